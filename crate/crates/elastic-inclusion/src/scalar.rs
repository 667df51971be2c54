//! Scalar abstraction.
//!
//! Every routine in the crate is generic over [`Real`], which is implemented
//! for `f32` and `f64`. Dense factorizations are reached through trait hooks
//! so that generic code never has to juggle two competing float traits.

use std::fmt::{Debug, Display};

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Complex number over the working scalar.
pub type Cx<T> = Complex<T>;

/// Dense complex matrix over the working scalar.
pub type CMat<T> = DMatrix<Complex<T>>;

/// Result of a minimum-norm least-squares solve.
#[derive(Clone, Debug)]
pub struct Lstsq<T: Real> {
    pub x: DVector<T>,
    /// Singular values in descending order.
    pub singular_values: Vec<T>,
    /// Number of singular values above the cut-off.
    pub rank: usize,
}

/// Floating-point scalar usable throughout the crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self;

    /// Widens to `f64` for reporting.
    fn to_f64_lossy(self) -> f64;

    /// Minimum-norm least-squares solution of `a x = b` via SVD. Singular
    /// values below `rcond * s_max` are treated as zero.
    fn lstsq(a: &DMatrix<Self>, b: &DVector<Self>, rcond: Self) -> Lstsq<Self>;

    /// Solves the square system `a x = b` by partial-pivot LU and returns the
    /// solution together with an estimate of the 1-norm condition number.
    fn lu_solve(a: &DMatrix<Self>, b: &DVector<Self>) -> Option<(DVector<Self>, Self)>;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn lit(x: f64) -> Self {
                x as $t
            }

            #[inline]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }

            fn lstsq(a: &DMatrix<Self>, b: &DVector<Self>, rcond: Self) -> Lstsq<Self> {
                dense::lstsq(a, b, rcond)
            }

            fn lu_solve(a: &DMatrix<Self>, b: &DVector<Self>) -> Option<(DVector<Self>, Self)> {
                dense::lu_solve(a, b)
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

mod dense {
    use super::*;

    pub(super) fn lstsq<T: RealField + Copy + Real>(
        a: &DMatrix<T>,
        b: &DVector<T>,
        rcond: T,
    ) -> Lstsq<T> {
        let cols = a.ncols();
        if a.nrows() == 0 || cols == 0 {
            return Lstsq {
                x: DVector::zeros(cols),
                singular_values: Vec::new(),
                rank: 0,
            };
        }
        let svd = a.clone().svd(true, true);
        let mut sv: Vec<T> = svd.singular_values.iter().copied().collect();
        sv.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
        let smax = sv.first().copied().unwrap_or_else(T::zero);
        let cut = rcond * smax;
        let rank = sv.iter().filter(|&&s| s > cut).count();
        let u = svd.u.as_ref().expect("u requested");
        let vt = svd.v_t.as_ref().expect("v_t requested");
        let utb = u.transpose() * b;
        let mut y = DVector::zeros(svd.singular_values.len());
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s > cut && s > T::zero() {
                y[i] = utb[i] / s;
            }
        }
        let x = vt.transpose() * y;
        Lstsq {
            x,
            singular_values: sv,
            rank,
        }
    }

    pub(super) fn lu_solve<T: RealField + Copy + Real>(
        a: &DMatrix<T>,
        b: &DVector<T>,
    ) -> Option<(DVector<T>, T)> {
        let n = a.nrows();
        if n != a.ncols() || n != b.len() {
            return None;
        }
        if n == 0 {
            return Some((DVector::zeros(0), T::one()));
        }
        let lu = a.clone().lu();
        let x = lu.solve(b)?;
        let lut = a.transpose().lu();
        let inv_norm = hager(n, |v| lu.solve(v), |v| lut.solve(v))?;
        let a_norm = (0..n)
            .map(|j| a.column(j).iter().fold(T::zero(), |s, v| s + Float::abs(*v)))
            .fold(T::zero(), |m: T, v| if v > m { v } else { m });
        Some((x, a_norm * inv_norm))
    }

    /// Hager's estimator of `||A^{-1}||_1` from solves with `A` and `A^T`.
    fn hager<T, F, G>(n: usize, solve: F, solve_t: G) -> Option<T>
    where
        T: RealField + Copy + Real,
        F: Fn(&DVector<T>) -> Option<DVector<T>>,
        G: Fn(&DVector<T>) -> Option<DVector<T>>,
    {
        let inv_n = T::one() / <T as Real>::lit(n as f64);
        let mut x = DVector::from_element(n, inv_n);
        let mut est = T::zero();
        for _ in 0..5 {
            let y = solve(&x)?;
            est = y.iter().fold(T::zero(), |s, v| s + Float::abs(*v));
            let xi = y.map(|v| if v >= T::zero() { T::one() } else { -T::one() });
            let z = solve_t(&xi)?;
            let (j, zmax) = z
                .iter()
                .enumerate()
                .fold((0, T::zero()), |(bj, bm), (k, v)| {
                    if Float::abs(*v) > bm {
                        (k, Float::abs(*v))
                    } else {
                        (bj, bm)
                    }
                });
            if zmax <= z.dot(&x) {
                break;
            }
            x = DVector::zeros(n);
            x[j] = T::one();
        }
        Some(est)
    }
}

/// Maximum modulus of a complex slice, zero when empty.
pub fn max_abs<T: Real>(v: impl IntoIterator<Item = Cx<T>>) -> T {
    v.into_iter().fold(T::zero(), |m, z| m.max(z.norm()))
}

/// Largest entry modulus of a complex matrix or view.
pub trait MaxNorm<T> {
    fn max_norm(&self) -> T;
}

impl<T: Real, R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<Cx<T>, R, C>> MaxNorm<T>
    for nalgebra::Matrix<Cx<T>, R, C, S>
{
    fn max_norm(&self) -> T {
        max_abs(self.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lstsq_recovers_exact_solution() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 2.0, 1.0, 1.0]);
        let x = DVector::from_vec(vec![0.5, -1.5]);
        let b = &a * &x;
        let r = f64::lstsq(&a, &b, 1e-12);
        assert_eq!(r.rank, 2);
        assert!((r.x - x).norm() < 1e-13);
    }

    #[test]
    fn lstsq_min_norm_on_kernel() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![2.0, 2.0]);
        let r = f64::lstsq(&a, &b, 1e-12);
        assert_eq!(r.rank, 1);
        assert!((r.x[0] - 1.0).abs() < 1e-13 && (r.x[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn lu_condition_estimate_is_exact_for_diagonal() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0f64, 1.0, 0.01]));
        let b = DVector::from_vec(vec![1.0, 1.0, 1.0]);
        let (x, cond) = f64::lu_solve(&a, &b).unwrap();
        assert!((x[2] - 100.0).abs() < 1e-10);
        assert!((cond - 400.0).abs() < 1e-8);
    }

    #[test]
    fn single_precision_path_works() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0f32, 0.0, 0.0, 4.0]);
        let b = DVector::from_vec(vec![1.0f32, 1.0]);
        let (x, _) = f32::lu_solve(&a, &b).unwrap();
        assert!((x[1] - 0.25).abs() < 1e-6);
    }
}
