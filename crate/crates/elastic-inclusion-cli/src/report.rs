//! Output files. Everything except the manifest timestamp is a function of
//! the effective configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use elastic_inclusion::system::Mode;
use elastic_inclusion::{DensitySolution, FieldSample};
use serde::Serialize;
use serde_json::json;

use crate::config::{Problem, RunConfig, SCHEMA_VERSION};
use crate::run::{BoundaryCheck, OracleOutcome, RunError, RunResults, CHECK_ANGLES, ORACLE_PROBES};

pub const SOLUTION_FILE: &str = "solution.json";
pub const FIELD_FILE: &str = "field.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const ORACLE_FILE: &str = "oracle.json";
pub const MANIFEST_FILE: &str = "manifest.json";

pub const FIELD_HEADER: [&str; 8] = ["re(w)", "im(w)", "re(z)", "im(z)", "region", "re(u)", "im(u)", "near_boundary"];

fn io(path: &Path, e: impl std::fmt::Display) -> RunError {
    RunError::Io(format!("{}: {e}", path.display()))
}

#[derive(Serialize)]
struct Coefficient {
    k: i64,
    re: f64,
    im: f64,
}

fn coefficients(sol: &DensitySolution, interior: bool) -> Vec<Coefficient> {
    let n = sol.order() as i64;
    (-n..=n)
        .filter(|&k| interior || k != 0)
        .map(|k| {
            let v = if interior { sol.interior_coefficient(k) } else { sol.exterior_coefficient(k) };
            Coefficient { k, re: v.re, im: v.im }
        })
        .collect()
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn solution_json(p: &Problem, r: &RunResults) -> serde_json::Value {
    let s = &r.solution;
    let interior = (s.mode == Mode::Transmission).then(|| coefficients(s, true));
    json!({
        "schema_version": SCHEMA_VERSION,
        "mode": s.mode.to_string(),
        "truncation": s.order(),
        "exterior": coefficients(s, false),
        "interior": interior,
        "diagnostics": {
            "residual": s.residual,
            "relative_residual": s.relative_residual,
            "tolerance": p.tolerance,
            "converged": s.converged,
            "rank": s.rank,
            "unknowns": s.unknowns,
            "excess_kernel": s.excess_kernel(),
            "singular_gap": finite(s.singular_gap),
            "rotation_moment": s.rotation_moment,
        },
    })
}

pub fn oracle_json(o: &OracleOutcome) -> serde_json::Value {
    let c = &o.comparison;
    json!({
        "q": c.q,
        "probes": c.probes,
        "offset_radius_over_gamma": 1.5,
        "boundary_max": c.boundary_max,
        "boundary_rms": c.boundary_l2,
        "offset_max": c.offset_max,
        "offset_rms": c.offset_l2,
        "condition": finite(c.condition),
        "tolerance": o.tolerance,
        "agrees": o.agrees(),
        "refinement": {
            "q": o.refinement.q,
            "error_q": o.refinement.error_q,
            "error_2q": o.refinement.error_2q,
            "ratio": finite(o.refinement.ratio()),
            "resolved": o.resolved(),
        },
    })
}

pub fn field_csv(samples: &[FieldSample]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(FIELD_HEADER)?;
    for s in samples {
        w.write_record([
            s.w.re.to_string(),
            s.w.im.to_string(),
            s.z.re.to_string(),
            s.z.im.to_string(),
            s.region.to_string(),
            s.u.re.to_string(),
            s.u.im.to_string(),
            s.near_boundary.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn summary(p: &Problem, r: &RunResults) -> String {
    let s = &r.solution;
    let mut out = String::new();
    let _ = writeln!(out, "mode: {}", s.mode);
    let _ = writeln!(out, "truncation: {}", s.order());
    let _ = writeln!(
        out,
        "conformal radius: {}, map depth: {}",
        p.map.gamma(),
        p.map.depth()
    );
    let _ = writeln!(out, "residual |xE + 2h|: {:.3e}", s.residual);
    let _ = writeln!(
        out,
        "relative residual: {:.3e} (tolerance {:.1e}) -> {}",
        s.relative_residual,
        p.tolerance,
        if s.converged { "converged" } else { "NOT converged" }
    );
    let _ = writeln!(out, "rank: {} of {} real unknowns", s.rank, s.unknowns);
    let _ = writeln!(out, "rotation moment: {:.3e}", s.rotation_moment);
    match r.check {
        BoundaryCheck::Transmission { displacement, traction } => {
            let _ = writeln!(out, "displacement jump on boundary ({CHECK_ANGLES} angles): {displacement:.3e}");
            let _ = writeln!(out, "traction jump on boundary ({CHECK_ANGLES} angles): {traction:.3e}");
        }
        BoundaryCheck::Cavity { traction_variation } => {
            let _ = writeln!(
                out,
                "traction potential spread on boundary ({CHECK_ANGLES} angles): {traction_variation:.3e}"
            );
        }
    }
    if let Some(f) = &r.field {
        let ok = f.iter().filter(|x| x.u.re.is_finite()).count();
        let _ = writeln!(out, "field samples: {} ({} evaluated)", f.len(), ok);
    }
    if let Some(o) = &r.oracle {
        let c = &o.comparison;
        let _ = writeln!(
            out,
            "oracle q = {}: boundary max {:.3e}, offset max {:.3e} over {ORACLE_PROBES} points (tolerance {:.1e}) -> {}",
            c.q,
            c.boundary_max,
            c.offset_max,
            o.tolerance,
            if o.agrees() { "agrees" } else { "MISMATCH" }
        );
        let _ = writeln!(
            out,
            "oracle refinement q = {} -> {}: errors {:.3e} -> {:.3e}{}",
            o.refinement.q,
            2 * o.refinement.q,
            o.refinement.error_q,
            o.refinement.error_2q,
            if o.resolved() { "" } else { " (quadrature order too low)" }
        );
    }
    out
}

fn manifest(cmd: &str, cfg: &RunConfig, outputs: &[&str], timestamp: &str) -> serde_json::Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": cmd,
        "timestamp": timestamp,
        "versions": {
            "inclusion": env!("CARGO_PKG_VERSION"),
            "elastic-inclusion": elastic_inclusion::VERSION,
        },
        "config": cfg,
        "outputs": outputs,
    })
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

/// Renders every file first, then writes them; a failure while rendering
/// leaves the output directory untouched.
pub fn emit(cmd: &str, p: &Problem, r: &RunResults, timestamp: &str) -> Result<Vec<PathBuf>, RunError> {
    let mut files: Vec<(&str, Vec<u8>)> = vec![
        (SOLUTION_FILE, pretty(&solution_json(p, r)).into_bytes()),
        (SUMMARY_FILE, summary(p, r).into_bytes()),
    ];
    if let Some(f) = &r.field {
        let bytes = field_csv(f).map_err(|e| io(&p.out_dir.join(FIELD_FILE), e))?;
        files.push((FIELD_FILE, bytes));
    }
    if let Some(o) = &r.oracle {
        files.push((ORACLE_FILE, pretty(&oracle_json(o)).into_bytes()));
    }
    let names: Vec<&str> = files.iter().map(|f| f.0).collect();
    let m = pretty(&manifest(cmd, &p.config, &names, timestamp)).into_bytes();
    files.push((MANIFEST_FILE, m));

    fs::create_dir_all(&p.out_dir).map_err(|e| io(&p.out_dir, e))?;
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = p.out_dir.join(name);
        fs::write(&path, bytes).map_err(|e| io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
