//! Lamé constants and the derived Kelvin constants.
//!
//! For a pair (λ, μ):
//!
//! ```text
//! α = ½ (1/μ + 1/(2μ+λ)),   β = ½ (1/μ − 1/(2μ+λ)),   κ = (λ+3μ)/(λ+μ)
//! ```
//!
//! so that κβ = α. A cavity is a mode, not a limit: the interior constants
//! are left undefined and every interior query returns [`Error::CavityMode`].

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Kelvin constants of one isotropic medium.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kelvin<T> {
    pub lambda: T,
    pub mu: T,
    pub alpha: T,
    pub beta: T,
    pub kappa: T,
}

/// Computes (α, β, κ) for an elliptic Lamé pair.
pub fn derive_constants<T: Real>(lambda: T, mu: T) -> Result<(T, T, T)> {
    if !(lambda.is_finite() && mu.is_finite()) {
        return Err(Error::Validation("Lamé constants must be finite".into()));
    }
    if mu <= T::zero() {
        return Err(Error::Validation(format!("mu must be positive, got {mu}")));
    }
    if lambda + mu <= T::zero() {
        return Err(Error::Validation(format!(
            "lambda + mu must be positive, got {}",
            lambda + mu
        )));
    }
    // Combined over the common denominator; the difference form cancels
    // catastrophically when λ+μ is small relative to μ.
    let two = T::lit(2.0);
    let den = two * mu * (two * mu + lambda);
    let alpha = (lambda + T::lit(3.0) * mu) / den;
    let beta = (lambda + mu) / den;
    let kappa = (lambda + T::lit(3.0) * mu) / (lambda + mu);
    Ok((alpha, beta, kappa))
}

impl<T: Real> Kelvin<T> {
    pub fn new(lambda: T, mu: T) -> Result<Self> {
        let (alpha, beta, kappa) = derive_constants(lambda, mu)?;
        Ok(Self {
            lambda,
            mu,
            alpha,
            beta,
            kappa,
        })
    }
}

/// Exterior medium plus either an interior medium or a cavity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialPair<T> {
    ext: Kelvin<T>,
    int: Option<Kelvin<T>>,
}

impl<T: Real> MaterialPair<T> {
    /// Transmission pair. Rejects identical media, which leave nothing to solve.
    pub fn transmission(lambda: T, mu: T, lambda_t: T, mu_t: T) -> Result<Self> {
        let ext = Kelvin::new(lambda, mu)?;
        let int = Kelvin::new(lambda_t, mu_t)?;
        let dl = lambda - lambda_t;
        let dm = mu - mu_t;
        if dl * dl + dm * dm == T::zero() {
            return Err(Error::Validation(
                "interior and exterior Lamé constants coincide".into(),
            ));
        }
        Ok(Self {
            ext,
            int: Some(int),
        })
    }

    /// Traction-free hole in an elliptic exterior medium.
    pub fn cavity(lambda: T, mu: T) -> Result<Self> {
        Ok(Self {
            ext: Kelvin::new(lambda, mu)?,
            int: None,
        })
    }

    /// Same exterior, interior switched off.
    pub fn cavity_limit(&self) -> Self {
        Self {
            ext: self.ext,
            int: None,
        }
    }

    pub fn is_cavity(&self) -> bool {
        self.int.is_none()
    }

    pub fn exterior(&self) -> &Kelvin<T> {
        &self.ext
    }

    pub fn interior(&self) -> Result<&Kelvin<T>> {
        self.int
            .as_ref()
            .ok_or_else(|| Error::CavityMode("interior constants".into()))
    }

    pub fn alpha(&self) -> T {
        self.ext.alpha
    }
    pub fn beta(&self) -> T {
        self.ext.beta
    }
    pub fn kappa(&self) -> T {
        self.ext.kappa
    }
    pub fn alpha_t(&self) -> Result<T> {
        self.interior().map(|k| k.alpha)
    }
    pub fn beta_t(&self) -> Result<T> {
        self.interior().map(|k| k.beta)
    }
    pub fn kappa_t(&self) -> Result<T> {
        self.interior().map(|k| k.kappa)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn poisson_free_values() {
        let (a, b, k) = derive_constants(0.0f64, 1.0).unwrap();
        assert!((a - 0.75).abs() < 1e-15 && (b - 0.25).abs() < 1e-15 && (k - 3.0).abs() < 1e-15);
        let (a, b, k) = derive_constants(1.0f64, 1.0).unwrap();
        assert!((a - 2.0 / 3.0).abs() < 1e-15);
        assert!((b - 1.0 / 3.0).abs() < 1e-15);
        assert!((k - 2.0).abs() < 1e-15);
    }

    #[test]
    fn generic_pair() {
        // 1/μ = 10/7, 1/(2μ+λ) = 1/3.9
        let (a, b, k) = derive_constants(2.5f64, 0.7).unwrap();
        let ia = 10.0 / 7.0;
        let ib = 1.0 / 3.9;
        assert!((a - 0.5 * (ia + ib)).abs() < 1e-15);
        assert!((b - 0.5 * (ia - ib)).abs() < 1e-15);
        assert!((k - 4.6 / 3.2).abs() < 1e-15);
        assert!((k * b - a).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_elliptic() {
        assert!(derive_constants(1.0f64, 0.0).is_err());
        assert!(derive_constants(1.0f64, -1.0).is_err());
        assert!(derive_constants(-2.0f64, 1.0).is_err());
        assert!(derive_constants(-1.0f64, 1.0).is_err());
        assert!(derive_constants(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn transmission_needs_contrast() {
        assert!(MaterialPair::transmission(1.0f64, 1.0, 1.0, 1.0).is_err());
        assert!(MaterialPair::transmission(1.0f64, 1.0, 2.0, 1.0).is_ok());
    }

    #[test]
    fn cavity_interior_is_undefined() {
        let m = MaterialPair::transmission(1.0f64, 1.0, 2.0, 3.0).unwrap().cavity_limit();
        assert!(m.is_cavity());
        assert!(matches!(m.alpha_t(), Err(Error::CavityMode(_))));
        assert!(MaterialPair::cavity(1.0f64, 1.0).unwrap().interior().is_err());
    }

    #[test]
    fn single_precision() {
        let (a, b, k) = derive_constants(0.0f32, 1.0).unwrap();
        assert!((a - 0.75).abs() < 1e-7 && (b - 0.25).abs() < 1e-7 && (k - 3.0).abs() < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn kelvin_identities(mu in 1e-3f64..1e3, s in 1e-3f64..1e3) {
            let lambda = s - mu;
            let (a, b, k) = derive_constants(lambda, mu).unwrap();
            prop_assert!(a > b && b > 0.0);
            prop_assert!((k * b - a).abs() <= 1e-14 * a);
            prop_assert_eq!(derive_constants(lambda, mu).unwrap(), (a, b, k));
        }
    }
}
