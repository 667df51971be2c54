//! Assemble, solve, evaluate and compare, all in memory.

use std::fmt;

use elastic_inclusion::field::{FieldEvaluator, ResidualOptions};
use elastic_inclusion::oracle::{compare, self_convergence, solve_oracle, ComparisonReport, SelfConvergence};
use elastic_inclusion::system::{assemble, solve, Mode, SolveOptions, DEFAULT_RCOND};
use elastic_inclusion::{DensitySolution, FieldSample, GeometryBundle};

use crate::config::Problem;

/// Boundary angles for the residual check in the summary.
pub const CHECK_ANGLES: usize = 64;
/// Probe points on the offset circle for the oracle comparison.
pub const ORACLE_PROBES: usize = 64;

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Assembly(String),
    Io(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Assembly(m) => write!(f, "assembly error: {m}"),
            RunError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

fn assembly(e: elastic_inclusion::Error) -> RunError {
    RunError::Assembly(e.to_string())
}

/// Transmission residuals or, for a cavity, the spread of the traction
/// potential along the boundary.
#[derive(Clone, Copy, Debug)]
pub enum BoundaryCheck {
    Transmission { displacement: f64, traction: f64 },
    Cavity { traction_variation: f64 },
}

#[derive(Clone, Debug)]
pub struct OracleOutcome {
    pub comparison: ComparisonReport<f64>,
    pub refinement: SelfConvergence<f64>,
    pub tolerance: f64,
}

impl OracleOutcome {
    pub fn agrees(&self) -> bool {
        self.comparison.offset_max <= self.tolerance
    }

    /// The oracle's own refinement error at q/2 must sit below the
    /// tolerance, otherwise the comparison says little.
    pub fn resolved(&self) -> bool {
        self.refinement.error_2q <= self.tolerance
    }
}

pub struct RunResults {
    pub solution: DensitySolution,
    pub check: BoundaryCheck,
    pub field: Option<Vec<FieldSample>>,
    pub oracle: Option<OracleOutcome>,
}

pub fn angles(count: usize) -> Vec<f64> {
    (0..count).map(|j| std::f64::consts::TAU * j as f64 / count as f64).collect()
}

pub fn execute(p: &Problem) -> Result<RunResults, RunError> {
    let geo = GeometryBundle::new(&p.map, p.truncation);
    let system = assemble(&p.material, &geo, &p.loading).map_err(assembly)?;
    let opts = SolveOptions {
        rcond: DEFAULT_RCOND,
        tolerance: p.tolerance,
    };
    let solution = solve(&system, opts).map_err(assembly)?;
    let ev = FieldEvaluator::new(&solution, &p.loading, &p.map, &p.material).map_err(assembly)?;
    let th = angles(CHECK_ANGLES);
    let ro = ResidualOptions::default();
    let check = match solution.mode {
        Mode::Transmission => {
            let (d, t) = ev.transmission_residual(&th, ro).map_err(assembly)?;
            BoundaryCheck::Transmission { displacement: d, traction: t }
        }
        Mode::Cavity => BoundaryCheck::Cavity {
            traction_variation: ev.traction_variation(&th, ro).map_err(assembly)?,
        },
    };
    let field = p.grid.as_ref().map(|g| ev.grid_field(g));
    let oracle = match &p.oracle {
        Some(o) => {
            let sol = solve_oracle(&p.map, &p.material, &p.loading, o.q).map_err(assembly)?;
            let comparison = compare(&sol, &ev, &p.loading, ORACLE_PROBES).map_err(assembly)?;
            let refinement =
                self_convergence(&p.map, &p.material, &p.loading, o.q / 4, ORACLE_PROBES).map_err(assembly)?;
            Some(OracleOutcome {
                comparison,
                refinement,
                tolerance: o.tolerance,
            })
        }
        None => None,
    };
    Ok(RunResults {
        solution,
        check,
        field,
        oracle,
    })
}
