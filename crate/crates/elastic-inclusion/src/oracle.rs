//! Nyström reference solver for the real boundary integral equations.
//!
//! Unknown densities live at `q` equispaced parameter nodes. The single layer
//! uses the trapezoid rule with the logarithm split off and integrated
//! exactly against the trigonometric interpolant; the conormal operator uses
//! the alternating-node rule, which handles its principal value by symmetry.
//!
//! Transmission problems solve
//!
//! ```text
//! [ S̃            −S          ] [φ]   [ H   ]
//! [ −½I + 𝒦̃*     −(½I + 𝒦*)  ] [ψ] = [ ∂νH ]
//! ```
//!
//! A cavity keeps only `(½I + 𝒦*)ψ = −∂νH`. That operator has the three rigid
//! motions in its left kernel, so the system is bordered with the moment
//! conditions `∮ψ·θ dσ = 0` and solved in the least-squares sense.

use nalgebra::{DMatrix, DVector};
use crate::error::{Error, Result};
use crate::field::{FieldEvaluator, Region, ResidualOptions};
use crate::geometry::ConformalMap;
use crate::loading::{eval_h, grad_h, LoadingSpec};
use crate::material::{Kelvin, MaterialPair};
use crate::scalar::{Cx, Real};

/// Largest supported node count.
pub const MAX_NODES: usize = 512;

type M2<T> = [[T; 2]; 2];

/// Quadrature nodes on ∂Ω.
#[derive(Clone, Debug)]
pub struct BoundaryMesh<T> {
    pub q: usize,
    pub theta: Vec<T>,
    pub z: Vec<Cx<T>>,
    /// `|dz/dθ|`
    pub h: Vec<T>,
    /// Unit tangent in the direction of increasing θ.
    pub tangent: Vec<Cx<T>>,
    /// Outward unit normal.
    pub normal: Vec<Cx<T>>,
}

impl<T: Real> BoundaryMesh<T> {
    pub fn new(map: &ConformalMap<T>, q: usize) -> Result<Self> {
        if q < 4 || q % 2 != 0 || q > MAX_NODES {
            return Err(Error::Validation(format!(
                "node count must be even and in 4..={MAX_NODES}, got {q}"
            )));
        }
        let g = map.gamma();
        let mut mesh = BoundaryMesh {
            q,
            theta: Vec::with_capacity(q),
            z: Vec::with_capacity(q),
            h: Vec::with_capacity(q),
            tangent: Vec::with_capacity(q),
            normal: Vec::with_capacity(q),
        };
        for j in 0..q {
            let th = T::TAU() * T::lit(j as f64) / T::lit(q as f64);
            let w = Cx::from_polar(g, th);
            let dz = Cx::new(T::zero(), T::one()) * w * map.derivative(w)?;
            let h = dz.norm();
            let t = dz / h;
            mesh.theta.push(th);
            mesh.z.push(map.eval(w)?);
            mesh.h.push(h);
            mesh.tangent.push(t);
            mesh.normal.push(Cx::new(t.im, -t.re));
        }
        if !(mesh.signed_area() > T::zero()) {
            return Err(Error::Validation("boundary is not positively oriented".into()));
        }
        Ok(mesh)
    }

    /// Trapezoid weight `2π/q`.
    pub fn weight(&self) -> T {
        T::TAU() / T::lit(self.q as f64)
    }

    /// Shoelace area of the node polygon.
    pub fn signed_area(&self) -> T {
        let mut a = T::zero();
        for j in 0..self.q {
            let p = self.z[j];
            let r = self.z[(j + 1) % self.q];
            a += p.re * r.im - p.im * r.re;
        }
        a * T::lit(0.5)
    }
}

fn v2<T: Real>(z: Cx<T>) -> [T; 2] {
    [z.re, z.im]
}

/// Kelvin matrix `Γ(d) = (α/2π) log|d| I − (β/2π) d dᵀ/|d|²` at `d = x − y`.
pub fn kelvin_kernel<T: Real>(d: Cx<T>, k: &Kelvin<T>) -> Result<M2<T>> {
    let r2 = d.norm_sqr();
    if !(r2 > T::zero()) {
        return Err(Error::SingularPoint("coincident points in the Kelvin kernel".into()));
    }
    let a = k.alpha / T::TAU();
    let b = k.beta / T::TAU();
    let l = a * T::lit(0.5) * r2.ln();
    let [x, y] = v2(d);
    Ok([
        [l - b * x * x / r2, -b * x * y / r2],
        [-b * x * y / r2, l - b * y * y / r2],
    ])
}

/// Conormal derivative at `x` of `Γ(x − y)`, taken along the unit normal `n`
/// at `x`, with `d = x − y`.
pub fn traction_kernel<T: Real>(d: Cx<T>, n: Cx<T>, k: &Kelvin<T>) -> M2<T> {
    let a = k.alpha / T::TAU();
    let b = k.beta / T::TAU();
    let r2 = d.norm_sqr();
    let [x, y] = v2(d);
    let dn = x * n.re + y * n.im;
    let dxn = x * n.im - y * n.re;
    let s = k.mu * (a - b) / r2;
    let t = T::lit(4.0) * k.mu * b * dn / (r2 * r2);
    [
        [s * dn + t * x * x, s * dxn + t * x * y],
        [-s * dxn + t * x * y, s * dn + t * y * y],
    ]
}

/// Weights `R_k` integrating `log(4 sin²((t−τ)/2))` against the
/// trigonometric interpolant, indexed by node offset.
fn log_weights<T: Real>(q: usize) -> Vec<T> {
    let n = q / 2;
    let nf = T::lit(n as f64);
    (0..q)
        .map(|k| {
            let dt = T::TAU() * T::lit(k as f64) / T::lit(q as f64);
            let mut s = T::zero();
            for m in 1..n {
                s += (T::lit(m as f64) * dt).cos() / T::lit(m as f64);
            }
            -(T::TAU() / nf) * s - T::PI() / (nf * nf) * (nf * dt).cos()
        })
        .collect()
}

fn put<T: Real>(m: &mut DMatrix<T>, i: usize, j: usize, b: M2<T>, s: T) {
    for r in 0..2 {
        for c in 0..2 {
            m[(2 * i + r, 2 * j + c)] = b[r][c] * s;
        }
    }
}

/// Discrete single layer on the nodes, `2q × 2q`.
pub fn single_layer_matrix<T: Real>(mesh: &BoundaryMesh<T>, k: &Kelvin<T>) -> DMatrix<T> {
    let q = mesh.q;
    let r = log_weights::<T>(q);
    let a = k.alpha / T::TAU();
    let b = k.beta / T::TAU();
    let w = mesh.weight();
    let half = T::lit(0.5);
    let mut s = DMatrix::zeros(2 * q, 2 * q);
    for i in 0..q {
        for j in 0..q {
            let blk = if i == j {
                let t = v2(mesh.tangent[j]);
                let l = a * (half * r[0] + w * mesh.h[j].ln());
                [
                    [l - b * w * t[0] * t[0], -b * w * t[0] * t[1]],
                    [-b * w * t[0] * t[1], l - b * w * t[1] * t[1]],
                ]
            } else {
                let d = mesh.z[i] - mesh.z[j];
                let r2 = d.norm_sqr();
                let sn = ((mesh.theta[i] - mesh.theta[j]) * half).sin();
                let ls = (T::lit(4.0) * sn * sn).ln();
                let l = a * (half * r[(i + q - j) % q] + w * half * (r2.ln() - ls));
                let [x, y] = v2(d);
                [
                    [l - b * w * x * x / r2, -b * w * x * y / r2],
                    [-b * w * x * y / r2, l - b * w * y * y / r2],
                ]
            };
            put(&mut s, i, j, blk, mesh.h[j]);
        }
    }
    s
}

/// Discrete principal-value conormal operator 𝒦* on the nodes.
pub fn conormal_matrix<T: Real>(mesh: &BoundaryMesh<T>, k: &Kelvin<T>) -> DMatrix<T> {
    let q = mesh.q;
    let w = T::lit(2.0) * mesh.weight();
    let mut m = DMatrix::zeros(2 * q, 2 * q);
    for i in 0..q {
        for j in 0..q {
            if (i + q - j) % 2 == 1 {
                let blk = traction_kernel(mesh.z[i] - mesh.z[j], mesh.normal[i], k);
                put(&mut m, i, j, blk, w * mesh.h[j]);
            }
        }
    }
    m
}

/// Conormal derivative `λ tr(∇H) N + μ(∇H + ∇Hᵀ)N` of the background field.
pub fn conormal_h<T: Real>(
    spec: &LoadingSpec<T>,
    map: &ConformalMap<T>,
    k: &Kelvin<T>,
    z: Cx<T>,
    n: Cx<T>,
) -> [T; 2] {
    let (hz, hzb) = grad_h(spec, map, k, z);
    let d1 = hz + hzb;
    let d2 = (hz - hzb) * Cx::new(T::zero(), T::one());
    let g = [[d1.re, d2.re], [d1.im, d2.im]];
    let nv = v2(n);
    let tr = g[0][0] + g[1][1];
    let mut out = [T::zero(); 2];
    for r in 0..2 {
        out[r] = k.lambda * tr * nv[r];
        for c in 0..2 {
            out[r] += k.mu * (g[r][c] + g[c][r]) * nv[c];
        }
    }
    out
}

/// Nodal densities and diagnostics.
#[derive(Clone, Debug)]
pub struct OracleSolution<T: Real> {
    pub mesh: BoundaryMesh<T>,
    pub psi_nodes: Vec<[T; 2]>,
    /// Empty for a cavity.
    pub phi_nodes: Vec<[T; 2]>,
    /// Exterior displacement `H + S[ψ]` at the nodes.
    pub u_boundary: Vec<Cx<T>>,
    /// 1-norm condition estimate (LU) or singular-value ratio (cavity).
    pub condition: T,
    /// Relative residual of the discrete system.
    pub residual: T,
    exterior: Kelvin<T>,
}

impl<T: Real> OracleSolution<T> {
    /// `S[ψ](x)` by the plain trapezoid rule, for `x` off ∂Ω.
    pub fn single_layer(&self, x: Cx<T>) -> Result<Cx<T>> {
        let w = self.mesh.weight();
        let mut u = [T::zero(); 2];
        for j in 0..self.mesh.q {
            let g = kelvin_kernel(x - self.mesh.z[j], &self.exterior)?;
            let p = self.psi_nodes[j];
            for r in 0..2 {
                u[r] += w * self.mesh.h[j] * (g[r][0] * p[0] + g[r][1] * p[1]);
            }
        }
        Ok(Cx::new(u[0], u[1]))
    }

    /// Exterior displacement `H + S[ψ]`.
    pub fn exterior_field(&self, spec: &LoadingSpec<T>, map: &ConformalMap<T>, x: Cx<T>) -> Result<Cx<T>> {
        Ok(eval_h(spec, map, &self.exterior, x) + self.single_layer(x)?)
    }

    /// `∮ψ·θ dσ` for the rigid fields `(1,0)`, `(0,1)`, `(−x₂, x₁)`.
    pub fn rigid_moments(&self) -> [T; 3] {
        let w = self.mesh.weight();
        let mut m = [T::zero(); 3];
        for j in 0..self.mesh.q {
            let s = w * self.mesh.h[j];
            let p = self.psi_nodes[j];
            let z = self.mesh.z[j];
            m[0] += s * p[0];
            m[1] += s * p[1];
            m[2] += s * (-z.im * p[0] + z.re * p[1]);
        }
        m
    }
}

/// Assembled discrete system.
#[derive(Clone, Debug)]
pub struct NystromSystem<T: Real> {
    pub mesh: BoundaryMesh<T>,
    pub matrix: DMatrix<T>,
    pub rhs: DVector<T>,
    pub cavity: bool,
    s_ext: DMatrix<T>,
    h_nodes: Vec<Cx<T>>,
    exterior: Kelvin<T>,
}

pub fn assemble_nystrom<T: Real>(
    mesh: &BoundaryMesh<T>,
    map: &ConformalMap<T>,
    material: &MaterialPair<T>,
    loading: &LoadingSpec<T>,
) -> Result<NystromSystem<T>> {
    let q = mesh.q;
    let ext = material.exterior();
    let h_nodes: Vec<Cx<T>> = mesh.z.iter().map(|&z| eval_h(loading, map, ext, z)).collect();
    let mut dh = DVector::zeros(2 * q);
    for j in 0..q {
        let t = conormal_h(loading, map, ext, mesh.z[j], mesh.normal[j]);
        dh[2 * j] = t[0];
        dh[2 * j + 1] = t[1];
    }
    let s = single_layer_matrix(mesh, ext);
    let k = conormal_matrix(mesh, ext);
    let half = T::lit(0.5);
    let (matrix, rhs) = if material.is_cavity() {
        let mut a = DMatrix::zeros(2 * q + 3, 2 * q);
        let mut top = k;
        for i in 0..2 * q {
            top[(i, i)] += half;
        }
        a.view_mut((0, 0), (2 * q, 2 * q)).copy_from(&top);
        let w = mesh.weight();
        for j in 0..q {
            let s = w * mesh.h[j];
            let z = mesh.z[j];
            a[(2 * q, 2 * j)] = s;
            a[(2 * q + 1, 2 * j + 1)] = s;
            a[(2 * q + 2, 2 * j)] = -z.im * s;
            a[(2 * q + 2, 2 * j + 1)] = z.re * s;
        }
        let mut b = DVector::zeros(2 * q + 3);
        for i in 0..2 * q {
            b[i] = -dh[i];
        }
        (a, b)
    } else {
        let int = material.interior()?;
        let st = single_layer_matrix(mesh, int);
        let kt = conormal_matrix(mesh, int);
        let n2 = 2 * q;
        let mut a = DMatrix::zeros(2 * n2, 2 * n2);
        a.view_mut((0, 0), (n2, n2)).copy_from(&st);
        a.view_mut((0, n2), (n2, n2)).copy_from(&(-&s));
        a.view_mut((n2, 0), (n2, n2)).copy_from(&kt);
        a.view_mut((n2, n2), (n2, n2)).copy_from(&(-&k));
        for i in 0..n2 {
            a[(n2 + i, i)] -= half;
            a[(n2 + i, n2 + i)] -= half;
        }
        let mut b = DVector::zeros(2 * n2);
        for j in 0..q {
            b[2 * j] = h_nodes[j].re;
            b[2 * j + 1] = h_nodes[j].im;
        }
        b.rows_mut(n2, n2).copy_from(&dh);
        (a, b)
    };
    Ok(NystromSystem {
        mesh: mesh.clone(),
        matrix,
        rhs,
        cavity: material.is_cavity(),
        s_ext: s,
        h_nodes,
        exterior: *ext,
    })
}

impl<T: Real> NystromSystem<T> {
    pub fn solve(&self) -> Result<OracleSolution<T>> {
        let q = self.mesh.q;
        let n2 = 2 * q;
        let (x, condition) = if self.cavity {
            let ls = T::lstsq(&self.matrix, &self.rhs, T::epsilon());
            let sv = &ls.singular_values;
            let cond = match (sv.first(), sv.last()) {
                (Some(&a), Some(&b)) if b > T::zero() => a / b,
                _ => T::infinity(),
            };
            (ls.x, cond)
        } else {
            T::lu_solve(&self.matrix, &self.rhs)
                .ok_or_else(|| Error::Solve("Nyström matrix is singular".into()))?
        };
        let r = &self.matrix * &x - &self.rhs;
        let l2 = |v: &DVector<T>| v.iter().fold(T::zero(), |s, x| s + *x * *x).sqrt();
        let bn = l2(&self.rhs);
        let residual = if bn > T::zero() { l2(&r) / bn } else { l2(&r) };
        let (phi, psi) = if self.cavity {
            (DVector::zeros(0), x)
        } else {
            (x.rows(0, n2).into_owned(), x.rows(n2, n2).into_owned())
        };
        let pairs = |v: &DVector<T>| (0..v.len() / 2).map(|j| [v[2 * j], v[2 * j + 1]]).collect::<Vec<_>>();
        let sp = &self.s_ext * &psi;
        let u_boundary = (0..q)
            .map(|j| self.h_nodes[j] + Cx::new(sp[2 * j], sp[2 * j + 1]))
            .collect();
        Ok(OracleSolution {
            mesh: self.mesh.clone(),
            psi_nodes: pairs(&psi),
            phi_nodes: pairs(&phi),
            u_boundary,
            condition,
            residual,
            exterior: self.exterior,
        })
    }
}

/// Meshes, assembles and solves in one step.
pub fn solve_oracle<T: Real>(
    map: &ConformalMap<T>,
    material: &MaterialPair<T>,
    loading: &LoadingSpec<T>,
    q: usize,
) -> Result<OracleSolution<T>> {
    let mesh = BoundaryMesh::new(map, q)?;
    assemble_nystrom(&mesh, map, material, loading)?.solve()
}

/// Discrepancies between the oracle and the series solution.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport<T> {
    pub q: usize,
    pub boundary_max: T,
    pub boundary_l2: T,
    /// Over `probes` points on `|w| = 1.5γ`.
    pub offset_max: T,
    pub offset_l2: T,
    pub probes: usize,
    pub condition: T,
}

/// Compares boundary displacement and the exterior field on `|w| = 1.5γ`.
/// The L² figures are root-mean-square values over the sample points.
pub fn compare<T: Real>(
    oracle: &OracleSolution<T>,
    series: &FieldEvaluator<T>,
    loading: &LoadingSpec<T>,
    probes: usize,
) -> Result<ComparisonReport<T>> {
    let map = series.map();
    let g = map.gamma();
    let opts = ResidualOptions::default();
    let mut bmax = T::zero();
    let mut bsum = T::zero();
    for j in 0..oracle.mesh.q {
        let s = series.boundary_limit(oracle.mesh.theta[j], Region::Exterior, opts)?[0];
        let d = (s - oracle.u_boundary[j]).norm();
        bmax = bmax.max(d);
        bsum += d * d;
    }
    let mut omax = T::zero();
    let mut osum = T::zero();
    for j in 0..probes {
        let th = T::TAU() * T::lit(j as f64) / T::lit(probes as f64);
        let w = Cx::from_polar(g * T::lit(1.5), th);
        let s = series.eval_exterior(w)?;
        let o = oracle.exterior_field(loading, map, s.z)?;
        let d = (s.u - o).norm();
        omax = omax.max(d);
        osum += d * d;
    }
    let rms = |s: T, n: usize| if n == 0 { T::zero() } else { (s / T::lit(n as f64)).sqrt() };
    Ok(ComparisonReport {
        q: oracle.mesh.q,
        boundary_max: bmax,
        boundary_l2: rms(bsum, oracle.mesh.q),
        offset_max: omax,
        offset_l2: rms(osum, probes),
        probes,
        condition: oracle.condition,
    })
}

/// Refinement study: errors of the `q`- and `2q`-node solutions against a
/// `4q`-node reference on `|w| = 1.5γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SelfConvergence<T> {
    pub q: usize,
    pub error_q: T,
    pub error_2q: T,
}

impl<T: Real> SelfConvergence<T> {
    /// `error_q / error_2q`; infinite once the finer error reaches zero.
    pub fn ratio(&self) -> T {
        if self.error_2q > T::zero() {
            self.error_q / self.error_2q
        } else {
            T::infinity()
        }
    }
}

pub fn self_convergence<T: Real>(
    map: &ConformalMap<T>,
    material: &MaterialPair<T>,
    loading: &LoadingSpec<T>,
    q: usize,
    probes: usize,
) -> Result<SelfConvergence<T>> {
    let sols = [q, 2 * q, 4 * q]
        .iter()
        .map(|&m| solve_oracle(map, material, loading, m))
        .collect::<Result<Vec<_>>>()?;
    let g = map.gamma();
    let mut e = [T::zero(); 2];
    for j in 0..probes {
        let th = T::TAU() * T::lit(j as f64) / T::lit(probes as f64);
        let z = map.eval(Cx::from_polar(g * T::lit(1.5), th))?;
        let r = sols[2].single_layer(z)?;
        for (i, s) in sols[..2].iter().enumerate() {
            e[i] = e[i].max((s.single_layer(z)? - r).norm());
        }
    }
    Ok(SelfConvergence { q, error_q: e[0], error_2q: e[1] })
}

/// Zero-vector check used by tests and diagnostics.
pub fn is_zero_solution<T: Real>(s: &OracleSolution<T>) -> bool {
    s.psi_nodes.iter().chain(&s.phi_nodes).all(|p| p[0].is_zero() && p[1].is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeometryBundle;
    use crate::system::{assemble, solve, SolveOptions};

    type C = Cx<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn kel() -> Kelvin<f64> {
        Kelvin::new(1.3, 0.8).unwrap()
    }

    fn matvec(m: M2<f64>, p: [f64; 2]) -> [f64; 2] {
        [m[0][0] * p[0] + m[0][1] * p[1], m[1][0] * p[0] + m[1][1] * p[1]]
    }

    #[test]
    fn kelvin_unit_distance() {
        let k = kel();
        let g = kelvin_kernel(c(1.0, 0.0), &k).unwrap();
        assert!((g[0][0] + k.beta / std::f64::consts::TAU).abs() < 1e-16);
        assert_eq!(g[1][1], 0.0);
        assert_eq!(g[0][1], g[1][0]);
        assert!(kelvin_kernel(c(0.0, 0.0), &k).is_err());
    }

    #[test]
    fn kelvin_isotropy_and_symmetry() {
        let k = kel();
        let d = c(0.7, -1.2);
        let rot = C::from_polar(1.0, 0.9);
        let g = kelvin_kernel(d, &k).unwrap();
        let gr = kelvin_kernel(d * rot, &k).unwrap();
        let (cs, sn) = (rot.re, rot.im);
        let r = [[cs, -sn], [sn, cs]];
        for i in 0..2 {
            for j in 0..2 {
                let mut v = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        v += r[i][a] * g[a][b] * r[j][b];
                    }
                }
                assert!((v - gr[i][j]).abs() < 1e-14);
            }
        }
        assert_eq!(g[0][1], g[1][0]);
    }

    #[test]
    fn traction_kernel_matches_finite_difference() {
        let k = kel();
        let y = c(0.3, -0.2);
        let p = [0.7, 1.1];
        let x = c(1.1, 0.4);
        let n = c(0.6, 0.8);
        let e = 1e-6;
        let u = |x: C| matvec(kelvin_kernel(x - y, &k).unwrap(), p);
        let mut g = [[0.0; 2]; 2];
        for (j, dx) in [c(e, 0.0), c(0.0, e)].into_iter().enumerate() {
            let (a, b) = (u(x + dx), u(x - dx));
            for r in 0..2 {
                g[r][j] = (a[r] - b[r]) / (2.0 * e);
            }
        }
        let tr = g[0][0] + g[1][1];
        let nv = [n.re, n.im];
        let t = matvec(traction_kernel(x - y, n, &k), p);
        for r in 0..2 {
            let mut v = k.lambda * tr * nv[r];
            for cc in 0..2 {
                v += k.mu * (g[r][cc] + g[cc][r]) * nv[cc];
            }
            assert!((v - t[r]).abs() < 1e-8);
        }
    }

    #[test]
    fn mesh_invariants() {
        let map = ConformalMap::new(1.3, vec![c(0.5, 0.0), c(0.3, 0.0)]).unwrap();
        let m = BoundaryMesh::new(&map, 32).unwrap();
        assert!(m.normal.iter().all(|n| (n.norm() - 1.0).abs() < 1e-14));
        assert!(m.signed_area() > 0.0);
        // outward: the normal points away from the centre a₀ for this convex shape
        for j in 0..32 {
            assert!(((m.z[j] - c(0.5, 0.0)) * m.normal[j].conj()).re > 0.0);
        }
        assert!(BoundaryMesh::new(&map, 31).is_err());
        assert!(BoundaryMesh::new(&map, 1024).is_err());
    }

    #[test]
    fn single_layer_of_constant_on_circle() {
        // on the unit circle the log kernel of a constant density integrates to 0
        let map = ConformalMap::new(1.0, vec![]).unwrap();
        let k = Kelvin::new(1.0, 1.0).unwrap();
        let mesh = BoundaryMesh::new(&map, 64).unwrap();
        let s = single_layer_matrix(&mesh, &k);
        let ones = DVector::<f64>::from_fn(128, |i, _| if i % 2 == 0 { 1.0 } else { 0.0 });
        let u = &s * ones;
        // the direction of x − y is i·e^{i(θ+τ)/2}, whose dyad averages to
        // diag(1/2, 1/2) over τ, so S[(1,0)] = (−β/2, 0) at every node
        for j in 0..64 {
            assert!((u[2 * j] + k.beta / 2.0).abs() < 1e-12, "{}", u[2 * j]);
            assert!(u[2 * j + 1].abs() < 1e-12);
        }
    }

    #[test]
    fn rigid_fields_annihilated_by_adjoint_conormal() {
        // ∫ θ·(−½I + 𝒦*)ψ dσ = 0 for every rigid θ, i.e. the h-weighted rigid
        // fields lie in the left kernel of the discrete interior operator
        let map = ConformalMap::new(1.3, vec![c(0.5, 0.0), c(0.3, 0.0)]).unwrap();
        let k = kel();
        let mesh = BoundaryMesh::new(&map, 96).unwrap();
        let mut a = conormal_matrix(&mesh, &k);
        for i in 0..192 {
            a[(i, i)] -= 0.5;
        }
        let rigid: [fn(C) -> C; 3] = [|_| c(1.0, 0.0), |_| c(0.0, 1.0), |z| c(-z.im, z.re)];
        for f in rigid {
            let v = DVector::from_fn(192, |i, _| {
                let j = i / 2;
                let t = f(mesh.z[j]) * mesh.h[j];
                if i % 2 == 0 { t.re } else { t.im }
            });
            let r = a.transpose() * &v;
            assert!(r.amax() < 1e-12 * v.amax(), "{}", r.amax());
        }
    }

    #[test]
    fn zero_loading() {
        let map = ConformalMap::new(1.0, vec![c(0.5, 0.0)]).unwrap();
        for m in [MaterialPair::transmission(1.0, 1.0, 2.0, 3.0).unwrap(), MaterialPair::cavity(1.0, 1.0).unwrap()] {
            let s = solve_oracle(&map, &m, &LoadingSpec::zero(), 16).unwrap();
            assert!(is_zero_solution(&s));
        }
    }

    fn series(map: &ConformalMap<f64>, m: &MaterialPair<f64>, spec: &LoadingSpec<f64>, n: usize) -> FieldEvaluator<f64> {
        let geo = GeometryBundle::new(map, n);
        let sol = solve(&assemble(m, &geo, spec).unwrap(), SolveOptions::default()).unwrap();
        FieldEvaluator::new(&sol, spec, map, m).unwrap()
    }

    #[test]
    fn disk_inclusion_matches_series() {
        let map = ConformalMap::new(1.0, vec![c(0.5, 0.0)]).unwrap();
        let m = MaterialPair::transmission(1.0, 1.0, 2.0, 3.0).unwrap();
        let spec = LoadingSpec::b_mode(1, c(0.4, 0.5));
        let o = solve_oracle(&map, &m, &spec, 128).unwrap();
        let r = compare(&o, &series(&map, &m, &spec, 16), &spec, 64).unwrap();
        assert!(r.boundary_max < 1e-4 && r.offset_max < 1e-4, "{r:?}");
        let mom = o.rigid_moments();
        assert!(mom.iter().all(|v| v.abs() < 1e-10), "{mom:?}");
    }

    #[test]
    fn generic_cavity_matches_series() {
        let map = ConformalMap::new(1.1, vec![c(0.2, 0.1), c(0.15, 0.0), c(0.0, 0.05), c(0.02, 0.0)]).unwrap();
        let m = MaterialPair::cavity(1.0, 0.7).unwrap();
        let spec = LoadingSpec::new(vec![c(0.1, -0.3)], vec![c(0.4, 0.5), c(0.0, 0.1)]).unwrap();
        let o = solve_oracle(&map, &m, &spec, 128).unwrap();
        let r = compare(&o, &series(&map, &m, &spec, 24), &spec, 32).unwrap();
        assert!(r.offset_max < 1e-8, "{r:?}");
        assert!(o.rigid_moments().iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn exterior_field_decays() {
        let map = ConformalMap::new(1.3, vec![c(0.5, 0.0), c(0.3, 0.0)]).unwrap();
        let m = MaterialPair::transmission(1.0, 1.0, 2.0, 3.0).unwrap();
        let spec = LoadingSpec::b_mode(1, c(0.4, 0.5));
        let o = solve_oracle(&map, &m, &spec, 64).unwrap();
        let a = o.single_layer(c(20.0, 0.0)).unwrap().norm();
        let b = o.single_layer(c(40.0, 0.0)).unwrap().norm();
        assert!(b < 0.6 * a && b > 0.4 * a, "{a} {b}");
    }

    #[test]
    fn self_convergence_on_disk() {
        let map = ConformalMap::new(1.0, vec![c(0.5, 0.0)]).unwrap();
        let m = MaterialPair::transmission(1.0, 1.0, 2.0, 3.0).unwrap();
        let s = self_convergence(&map, &m, &LoadingSpec::b_mode(2, c(0.4, 0.5)), 8, 16).unwrap();
        assert!(s.ratio() >= 10.0 || s.error_q < 1e-12, "{s:?}");
    }
}
