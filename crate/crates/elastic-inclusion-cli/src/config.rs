//! Run configuration: the TOML schema and its validation into a problem.

use std::fmt;
use std::path::{Path, PathBuf};

use elastic_inclusion::field::GridSpec;
use elastic_inclusion::oracle::MAX_NODES;
use elastic_inclusion::{Complex64, ConformalMap, LoadingSpec, MaterialPair};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<ComplexValue> for Complex64 {
    fn from(c: ComplexValue) -> Self {
        Complex64::new(c.re, c.im)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub gamma: f64,
    /// `a₀, a₁, …`
    pub a: Vec<ComplexValue>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub lambda: f64,
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_t: Option<f64>,
    #[serde(default)]
    pub cavity: bool,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LoadingConfig {
    #[serde(rename = "A", default)]
    pub a: Vec<ComplexValue>,
    #[serde(rename = "B", default)]
    pub b: Vec<ComplexValue>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            truncation: default_truncation(),
            tolerance: default_tolerance(),
        }
    }
}

fn default_truncation() -> usize {
    elastic_inclusion::system::DEFAULT_ORDER
}

fn default_tolerance() -> f64 {
    elastic_inclusion::system::DEFAULT_TOLERANCE
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    /// `"x0,x1,y0,y1,nx,ny"`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_nodes")]
    pub q: usize,
    /// Largest allowed discrepancy on the offset circle.
    #[serde(default = "default_oracle_tolerance")]
    pub tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            q: default_nodes(),
            tolerance: default_oracle_tolerance(),
        }
    }
}

fn default_nodes() -> usize {
    256
}

fn default_oracle_tolerance() -> f64 {
    1e-3
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub map: MapConfig,
    pub material: MaterialConfig,
    #[serde(default)]
    pub loading: LoadingConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub field: FieldConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub truncation: Option<usize>,
    pub tolerance: Option<f64>,
    pub grid: Option<String>,
    pub oracle: bool,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Validated problem, ready for assembly.
#[derive(Clone, Debug)]
pub struct Problem {
    /// Effective configuration after overrides.
    pub config: RunConfig,
    pub map: ConformalMap,
    pub material: MaterialPair,
    pub loading: LoadingSpec,
    pub truncation: usize,
    pub tolerance: f64,
    pub grid: Option<GridSpec>,
    pub oracle: Option<OracleConfig>,
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(bad(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn apply(mut self, o: &Overrides) -> Self {
        if let Some(n) = o.truncation {
            self.solver.truncation = n;
        }
        if let Some(t) = o.tolerance {
            self.solver.tolerance = t;
        }
        if let Some(g) = &o.grid {
            self.field.grid = Some(g.clone());
        }
        if o.oracle {
            self.oracle.enabled = true;
        }
        if let Some(d) = &o.out_dir {
            self.output.dir = Some(d.clone());
        }
        self
    }

    /// Runs every library-side check so that an accepted config never fails
    /// for input reasons later on.
    pub fn validate(self) -> Result<Problem, ConfigError> {
        let lib = |what: &str, e: elastic_inclusion::Error| bad(format!("{what}: {e}"));
        if self.map.a.is_empty() {
            return Err(bad("map.a needs at least a₀"));
        }
        let map = ConformalMap::new(self.map.gamma, self.map.a.iter().map(|&c| c.into()).collect())
            .map_err(|e| lib("map", e))?;
        let m = &self.material;
        let material = match (m.cavity, m.lambda_t, m.mu_t) {
            (true, None, None) => MaterialPair::cavity(m.lambda, m.mu),
            (true, _, _) => return Err(bad("material: cavity excludes lambda_t and mu_t")),
            (false, Some(lt), Some(mt)) => MaterialPair::transmission(m.lambda, m.mu, lt, mt),
            (false, _, _) => {
                return Err(bad("material: give lambda_t and mu_t, or set cavity = true"))
            }
        }
        .map_err(|e| lib("material", e))?;
        let loading = LoadingSpec::new(
            self.loading.a.iter().map(|&c| c.into()).collect(),
            self.loading.b.iter().map(|&c| c.into()).collect(),
        )
        .map_err(|e| lib("loading", e))?;
        let n = self.solver.truncation;
        if n == 0 {
            return Err(bad("solver.truncation must be at least 1"));
        }
        loading.check_order(n).map_err(|e| lib("loading", e))?;
        let tol = self.solver.tolerance;
        if !(tol.is_finite() && tol > 0.0) {
            return Err(bad(format!("solver.tolerance must be positive, got {tol}")));
        }
        let grid = match &self.field.grid {
            Some(g) => Some(g.parse::<GridSpec>().map_err(|e| lib("field.grid", e))?),
            None => None,
        };
        let oracle = if self.oracle.enabled {
            let q = self.oracle.q;
            // the refinement estimate runs q/4, q/2 and q
            if q % 8 != 0 || !(16..=MAX_NODES).contains(&q) {
                return Err(bad(format!(
                    "oracle.q must be a multiple of 8 in 16..={MAX_NODES}, got {q}"
                )));
            }
            let t = self.oracle.tolerance;
            if !(t.is_finite() && t > 0.0) {
                return Err(bad(format!("oracle.tolerance must be positive, got {t}")));
            }
            Some(self.oracle.clone())
        } else {
            None
        };
        let out_dir = self.output.dir.clone().unwrap_or_else(|| PathBuf::from("out"));
        Ok(Problem {
            map,
            material,
            loading,
            truncation: n,
            tolerance: tol,
            grid,
            oracle,
            out_dir,
            config: self,
        })
    }
}
