//! Background field and the right-hand side of the block system.
//!
//! The loading is `H = Σ_m κA_mF_m − z·conj(A_mF_m′) + conj(B_mF_m)`, i.e.
//! the displacement generated by the holomorphic pair `f = ΣA_mF_m`,
//! `g = −ΣB_mF_m`. Its boundary trace, written in powers of `w`, is carried
//! by four row vectors `h¹ … h⁴`, each a column sum of a matrix `ℍ^(j)`.

use nalgebra::DVector;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::geometry::{conj, faber_values, ConformalMap, GeometryBundle};
use crate::material::Kelvin;
use crate::scalar::{CMat, Cx, Real};

/// Faber coefficients `A_1..A_M`, `B_1..B_M` of the background field.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadingSpec<T> {
    a: Vec<Cx<T>>,
    b: Vec<Cx<T>>,
}

impl<T: Real> LoadingSpec<T> {
    /// `a[m-1] = A_m`, `b[m-1] = B_m`; the lists may differ in length.
    pub fn new(a: Vec<Cx<T>>, b: Vec<Cx<T>>) -> Result<Self> {
        if a.iter().chain(b.iter()).any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Validation("loading coefficients must be finite".into()));
        }
        Ok(Self { a, b })
    }

    pub fn zero() -> Self {
        Self {
            a: Vec::new(),
            b: Vec::new(),
        }
    }

    /// Single `B_m` mode.
    pub fn b_mode(m: usize, bm: Cx<T>) -> Self {
        assert!(m >= 1, "modes start at 1");
        let mut b = vec![Cx::zero(); m];
        b[m - 1] = bm;
        Self { a: Vec::new(), b }
    }

    /// `A_m`, zero outside the supplied range (including m = 0).
    pub fn a(&self, m: usize) -> Cx<T> {
        if m == 0 {
            return Cx::zero();
        }
        self.a.get(m - 1).copied().unwrap_or_else(Cx::zero)
    }

    pub fn b(&self, m: usize) -> Cx<T> {
        if m == 0 {
            return Cx::zero();
        }
        self.b.get(m - 1).copied().unwrap_or_else(Cx::zero)
    }

    pub fn a_coeffs(&self) -> &[Cx<T>] {
        &self.a
    }

    pub fn b_coeffs(&self) -> &[Cx<T>] {
        &self.b
    }

    /// Highest mode with a nonzero coefficient, 0 for the zero loading.
    pub fn max_mode(&self) -> usize {
        let last = |v: &[Cx<T>]| v.iter().rposition(|c| !c.is_zero()).map_or(0, |i| i + 1);
        last(&self.a).max(last(&self.b))
    }

    pub fn is_zero(&self) -> bool {
        self.max_mode() == 0
    }

    /// The loading must fit in the truncation.
    pub fn check_order(&self, n: usize) -> Result<()> {
        let m = self.max_mode();
        if m > n {
            return Err(Error::OrderMismatch { expected: n, got: m });
        }
        Ok(())
    }

    /// `f, f′, f″, g, g′` at `z`.
    pub fn potentials(&self, map: &ConformalMap<T>, z: Cx<T>) -> Potentials<T> {
        let mm = self.max_mode();
        let (f, d1, d2) = faber_values(map, z, mm);
        let mut p = Potentials::default();
        for m in 1..=mm {
            let (am, bm) = (self.a(m), self.b(m));
            p.f += am * f[m];
            p.df += am * d1[m];
            p.ddf += am * d2[m];
            p.g -= bm * f[m];
            p.dg -= bm * d1[m];
        }
        p
    }
}

/// Holomorphic pair of the background field and its derivatives at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Potentials<T> {
    pub f: Cx<T>,
    pub df: Cx<T>,
    pub ddf: Cx<T>,
    pub g: Cx<T>,
    pub dg: Cx<T>,
}

impl<T: Real> Default for Potentials<T> {
    fn default() -> Self {
        Self {
            f: Cx::zero(),
            df: Cx::zero(),
            ddf: Cx::zero(),
            g: Cx::zero(),
            dg: Cx::zero(),
        }
    }
}

/// `H(z)` as a complex displacement `H₁ + iH₂`.
pub fn eval_h<T: Real>(
    spec: &LoadingSpec<T>,
    map: &ConformalMap<T>,
    material: &Kelvin<T>,
    z: Cx<T>,
) -> Cx<T> {
    let p = spec.potentials(map, z);
    p.f * material.kappa - z * p.df.conj() - p.g.conj()
}

/// `𝓘ᵉ[H](z) = μ(f + z·conj f′ + conj g)`, defined up to a constant.
pub fn traction_potential_h<T: Real>(
    spec: &LoadingSpec<T>,
    map: &ConformalMap<T>,
    material: &Kelvin<T>,
    z: Cx<T>,
) -> Cx<T> {
    let p = spec.potentials(map, z);
    (p.f + z * p.df.conj() + p.g.conj()) * material.mu
}

/// Wirtinger derivatives `(∂_z H, ∂_z̄ H)`.
pub fn grad_h<T: Real>(
    spec: &LoadingSpec<T>,
    map: &ConformalMap<T>,
    material: &Kelvin<T>,
    z: Cx<T>,
) -> (Cx<T>, Cx<T>) {
    let p = spec.potentials(map, z);
    let dz = p.df * material.kappa - p.df.conj();
    let dzb = -(z * p.ddf.conj()) - p.dg.conj();
    (dz, dzb)
}

/// The four row vectors of the right-hand side, each of length `n + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct RhsVector<T: Real> {
    pub h1: DVector<Cx<T>>,
    pub h2: DVector<Cx<T>>,
    pub h3: DVector<Cx<T>>,
    pub h4: DVector<Cx<T>>,
}

impl<T: Real> RhsVector<T> {
    pub fn order(&self) -> usize {
        self.h1.len().saturating_sub(1)
    }

    /// `[h¹, conj h¹, h², conj h², h³, conj h³, h⁴, conj h⁴]`.
    pub fn blocks(&self) -> [DVector<Cx<T>>; 8] {
        let c = |v: &DVector<Cx<T>>| v.map(|z| z.conj());
        [
            self.h1.clone(),
            c(&self.h1),
            self.h2.clone(),
            c(&self.h2),
            self.h3.clone(),
            c(&self.h3),
            self.h4.clone(),
            c(&self.h4),
        ]
    }

    /// Cavity right-hand side `[h³, conj h³, h⁴, conj h⁴]`.
    pub fn cavity_blocks(&self) -> [DVector<Cx<T>>; 4] {
        let c = |v: &DVector<Cx<T>>| v.map(|z| z.conj());
        [self.h3.clone(), c(&self.h3), self.h4.clone(), c(&self.h4)]
    }

    pub fn norm(&self) -> T {
        let s = [&self.h1, &self.h2, &self.h3, &self.h4]
            .iter()
            .flat_map(|v| v.iter())
            .fold(T::zero(), |s, z| s + z.norm_sqr());
        // conjugate copies double the squared norm of the block row
        (s + s).sqrt()
    }

    /// Boundary trace `Σ_k h¹_k w^k + Σ_k h²_k w^{−k}` at `w`.
    pub fn trace_h(&self, w: Cx<T>) -> Cx<T> {
        series_pair(&self.h1, &self.h2, w)
    }

    /// Boundary trace of the traction potential, same layout with `h³, h⁴`.
    pub fn trace_traction(&self, w: Cx<T>) -> Cx<T> {
        series_pair(&self.h3, &self.h4, w)
    }
}

fn series_pair<T: Real>(pos: &DVector<Cx<T>>, neg: &DVector<Cx<T>>, w: Cx<T>) -> Cx<T> {
    let mut s = Cx::zero();
    let inv = w.inv();
    let (mut wp, mut wn) = (Cx::new(T::one(), T::zero()), Cx::new(T::one(), T::zero()));
    for k in 0..pos.len().max(neg.len()) {
        if k > 0 {
            if let Some(v) = pos.get(k) {
                s += *v * wp;
            }
        }
        if let Some(v) = neg.get(k) {
            s += *v * wn;
        }
        wp *= w;
        wn *= inv;
    }
    s
}

/// `ℍ¹ … ℍ⁴` at the bundle's order.
pub fn h_matrices<T: Real>(
    material: &Kelvin<T>,
    geo: &GeometryBundle<T>,
    spec: &LoadingSpec<T>,
) -> Result<[CMat<T>; 4]> {
    spec.check_order(geo.order())?;
    let w = geo.work_order();
    let dg = &geo.diag;
    let mut a = CMat::from_element(w + 1, w + 1, Cx::zero());
    let mut b = a.clone();
    for m in 1..=spec.max_mode() {
        a[(m, m)] = spec.a(m);
        b[(m, m)] = spec.b(m);
    }
    let (ab, bb) = (conj(&a), conj(&b));
    let cb = conj(&geo.c);
    let db = conj(&geo.d);
    let g2 = dg.gamma_pow(2);
    let gm2 = dg.gamma_pow(-2);
    let lead = &ab * &dg.nn * dg.gamma_pow(1) * &db;
    let cbg = &cb * &gm2;
    let x1 = &lead * (&g2 * &geo.psi_zero + &cbg * &geo.psi_minus);
    let x2 = &lead * (&g2 * geo.psi_minus.transpose() + &cbg * &geo.psi_plus);
    let (kappa, mu) = (Cx::new(material.kappa, T::zero()), Cx::new(material.mu, T::zero()));
    let x1i = &x1 * &dg.i0;
    let ac = &a * &geo.c;
    let bcg = &bb * &cbg;
    let bg2 = &bb * &g2;
    let h1 = &a * kappa - &x1i + &bcg;
    let h2 = &ac * kappa - &x2 + &bg2;
    let h3 = (&a + &x1i - &bcg) * mu;
    let h4 = (&ac + &x2 * &dg.i0 - &bg2) * mu;
    Ok([geo.crop(&h1), geo.crop(&h2), geo.crop(&h3), geo.crop(&h4)])
}

/// Column sums over rows `m ≥ 1`.
pub fn h_vectors<T: Real>(h: &[CMat<T>; 4]) -> RhsVector<T> {
    let sum = |m: &CMat<T>| {
        DVector::from_fn(m.ncols(), |k, _| {
            (1..m.nrows()).fold(Cx::zero(), |s, r| s + m[(r, k)])
        })
    };
    RhsVector {
        h1: sum(&h[0]),
        h2: sum(&h[1]),
        h3: sum(&h[2]),
        h4: sum(&h[3]),
    }
}

/// Right-hand side for the given loading.
pub fn rhs<T: Real>(
    material: &Kelvin<T>,
    geo: &GeometryBundle<T>,
    spec: &LoadingSpec<T>,
) -> Result<RhsVector<T>> {
    Ok(h_vectors(&h_matrices(material, geo, spec)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::MaxNorm;

    type C = Cx<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn unit() -> Kelvin<f64> {
        Kelvin::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_loading_gives_zero() {
        let map = ConformalMap::new(1.1, vec![c(0.5, 0.0), c(0.3, 0.0)]).unwrap();
        let geo = GeometryBundle::new(&map, 6);
        let h = h_matrices(&unit(), &geo, &LoadingSpec::zero()).unwrap();
        assert!(h.iter().all(|m| m.max_norm() == 0.0));
        let v = h_vectors(&h);
        assert_eq!(v.norm(), 0.0);
        assert_eq!(eval_h(&LoadingSpec::zero(), &map, &unit(), c(0.3, 0.2)), c(0.0, 0.0));
    }

    #[test]
    fn disk_b_only_matrices() {
        let g = 1.4;
        let map = ConformalMap::new(g, vec![c(0.5, 0.0)]).unwrap();
        let geo = GeometryBundle::new(&map, 5);
        let spec = LoadingSpec::new(vec![], vec![c(0.2, 0.1), c(-0.3, 0.4)]).unwrap();
        let mat = Kelvin::new(0.7, 1.3).unwrap();
        let [h1, h2, h3, h4] = h_matrices(&mat, &geo, &spec).unwrap();
        assert!(h1.max_norm() == 0.0 && h3.max_norm() == 0.0);
        for m in 0..=5 {
            for k in 0..=5 {
                let expect = if m == k { spec.b(m).conj() * g.powi(2 * m as i32) } else { c(0.0, 0.0) };
                assert!((h2[(m, k)] - expect).norm() < 1e-14);
                assert!((h4[(m, k)] + expect * mat.mu).norm() < 1e-14);
            }
        }
        let v = h_vectors(&[h1, h2, h3, h4]);
        assert!((v.h4[2] + spec.b(2).conj() * mat.mu * g.powi(4)).norm() < 1e-14);
    }

    #[test]
    fn ellipse_b_only_entries() {
        let (g, a1) = (1.3, 0.3);
        let map = ConformalMap::new(g, vec![c(0.5, 0.0), c(a1, 0.0)]).unwrap();
        let geo = GeometryBundle::new(&map, 6);
        let bm = c(0.4, 0.5);
        for m in 1..=3usize {
            let spec = LoadingSpec::b_mode(m, bm);
            let v = rhs(&unit(), &geo, &spec).unwrap();
            let mi = m as i32;
            let e1 = (bm * c(a1, 0.0).powi(mi)).conj() * g.powi(-2 * mi);
            let e2 = bm.conj() * g.powi(2 * mi);
            assert!((v.h1[m] - e1).norm() < 1e-14);
            assert!((v.h2[m] - e2).norm() < 1e-14);
            assert!((v.h3[m] + e1).norm() < 1e-14);
            assert!((v.h4[m] + e2).norm() < 1e-14);
        }
    }

    #[test]
    fn eval_h_examples() {
        let disk = ConformalMap::new(1.0, vec![c(0.5, 0.0)]).unwrap();
        let z = c(0.3, -0.7);
        let b1 = LoadingSpec::new(vec![], vec![c(1.0, 0.0)]).unwrap();
        assert!((eval_h(&b1, &disk, &unit(), z) - (z.conj() - c(0.5, 0.0))).norm() < 1e-15);

        let id = ConformalMap::new(1.0, vec![]).unwrap();
        let a1 = LoadingSpec::new(vec![c(1.0, 0.0)], vec![]).unwrap();
        let mat = unit();
        let expect = z * mat.kappa - z;
        assert!((eval_h(&a1, &id, &mat, z) - expect).norm() < 1e-15);
    }

    #[test]
    fn order_check() {
        let map = ConformalMap::new(1.0, vec![c(0.5, 0.0)]).unwrap();
        let geo = GeometryBundle::new(&map, 2);
        let spec = LoadingSpec::b_mode(3, c(1.0, 0.0));
        assert!(matches!(
            h_matrices(&unit(), &geo, &spec),
            Err(Error::OrderMismatch { .. })
        ));
    }

    #[test]
    fn h1_h3_vanish_at_index_zero() {
        let map = ConformalMap::new(1.2, vec![c(0.2, -0.1), c(0.15, 0.05), c(-0.04, 0.02)]).unwrap();
        let geo = GeometryBundle::new(&map, 8);
        let spec = LoadingSpec::new(
            vec![c(0.3, 0.1), c(-0.2, 0.05), c(0.1, 0.0)],
            vec![c(0.1, -0.2), c(0.05, 0.3)],
        )
        .unwrap();
        let v = rhs(&unit(), &geo, &spec).unwrap();
        assert_eq!(v.h1[0], c(0.0, 0.0));
        assert_eq!(v.h3[0], c(0.0, 0.0));
        assert_eq!(v.h4[0], c(0.0, 0.0));
    }

    #[test]
    fn boundary_trace_reproduces_h() {
        let map = ConformalMap::new(1.2, vec![c(0.2, -0.1), c(0.15, 0.05), c(-0.04, 0.02)]).unwrap();
        let geo = GeometryBundle::new(&map, 10);
        let spec = LoadingSpec::new(
            vec![c(0.3, 0.1), c(-0.2, 0.05), c(0.1, 0.0)],
            vec![c(0.1, -0.2), c(0.05, 0.3), c(0.0, 0.1), c(0.02, 0.0)],
        )
        .unwrap();
        let mat = Kelvin::new(1.7, 0.6).unwrap();
        let v = rhs(&mat, &geo, &spec).unwrap();
        let mut offsets = Vec::new();
        for j in 0..32 {
            let w = C::from_polar(map.gamma(), std::f64::consts::TAU * j as f64 / 32.0);
            let z = map.eval(w).unwrap();
            assert!((v.trace_h(w) - eval_h(&spec, &map, &mat, z)).norm() < 1e-11);
            offsets.push(v.trace_traction(w) - traction_potential_h(&spec, &map, &mat, z));
        }
        for o in &offsets {
            assert!((o - offsets[0]).norm() < 1e-11);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let map = ConformalMap::new(1.2, vec![c(0.2, -0.1), c(0.15, 0.05)]).unwrap();
        let spec = LoadingSpec::new(vec![c(0.3, 0.1), c(-0.2, 0.05)], vec![c(0.1, -0.2), c(0.05, 0.3)]).unwrap();
        let mat = Kelvin::new(1.7, 0.6).unwrap();
        let z = c(0.4, 0.2);
        let (dz, dzb) = grad_h(&spec, &map, &mat, z);
        let e = 1e-6;
        let dx = (eval_h(&spec, &map, &mat, z + c(e, 0.0)) - eval_h(&spec, &map, &mat, z - c(e, 0.0))) / (2.0 * e);
        let dy = (eval_h(&spec, &map, &mat, z + c(0.0, e)) - eval_h(&spec, &map, &mat, z - c(0.0, e))) / (2.0 * e);
        assert!((dx - (dz + dzb)).norm() < 1e-8);
        assert!((dy - (dz - dzb) * c(0.0, 1.0)).norm() < 1e-8);
    }
}
