//! Matrix formulation of the planar elastostatic inclusion problem.
//!
//! Given an exterior conformal map, a pair of Lamé media and a background
//! field expanded in Faber polynomials, the density coefficients of the
//! single-layer representation solve a block linear system `x E = −2h`.
//!
//! Modules, bottom up:
//!
//! - [`scalar`]: the [`Real`] trait (`f32`, `f64`) and dense solver hooks.
//! - [`material`]: Lamé and Kelvin constants, transmission or cavity mode.
//! - [`laurent`]: truncated Laurent series arithmetic.
//! - [`geometry`]: the map, Faber and Grunsky matrices, diagonal matrices.
//! - [`loading`]: background field and right-hand side vectors.
//! - [`system`]: block assembly and the realified least-squares solve.
//! - [`field`]: displacement and traction-potential evaluation.
//! - [`oracle`]: independent Nyström solver on the real integral equations.
//!
//! Everything is generic over the scalar; the aliases below fix `f64`.

// Negated comparisons are deliberate: they make NaN fail the checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod field;
pub mod geometry;
pub mod laurent;
pub mod loading;
pub mod material;
pub mod oracle;
pub mod scalar;
pub mod system;

pub use error::{Error, Result};
pub use scalar::{CMat, Cx, Real};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Complex64 = Cx<f64>;
pub type ConformalMap = geometry::ConformalMap<f64>;
pub type GeometryBundle = geometry::GeometryBundle<f64>;
pub type MaterialPair = material::MaterialPair<f64>;
pub type LaurentSeries = laurent::LaurentSeries<f64>;







pub type LoadingSpec = loading::LoadingSpec<f64>;
pub type RhsVector = loading::RhsVector<f64>;
pub type BlockSystem = system::BlockSystem<f64>;
pub type DensitySolution = system::DensitySolution<f64>;
pub type FieldEvaluator = field::FieldEvaluator<f64>;
pub type FieldSample = field::FieldSample<f64>;
pub type OracleSolution = oracle::OracleSolution<f64>;
