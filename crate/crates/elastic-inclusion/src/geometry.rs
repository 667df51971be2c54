//! Exterior conformal map and the coefficient matrices derived from it.
//!
//! The map is `Ψ(w) = w + a₀ + a₁/w + … + a_K/w^K`, defined for `|w| > γ`,
//! with the conventions `a₋₁ = 1` and `a₋ₙ = 0` for `n ≥ 2`.
//!
//! Every matrix here is a finite section, indexed `0..=n`, of a
//! semi-infinite matrix. Products of sections are only exact when the inner
//! index can run past `n`, so [`GeometryBundle`] builds everything on a wider
//! work order and callers crop results back to `n`.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::laurent::{LaurentSeries, Window};
use crate::scalar::{CMat, Cx, Real};

/// Default number of boundary samples for the simple-curve check.
pub const SIMPLE_CURVE_SAMPLES: usize = 1024;

/// Default analytic-extension margin δ as a fraction of γ.
pub const DEFAULT_MARGIN: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct ConformalMap<T> {
    gamma: T,
    /// `a₀, a₁, …, a_K`; never empty.
    a: Vec<Cx<T>>,
    margin: T,
}

impl<T: Real> ConformalMap<T> {
    /// Validated map. Checks γ > 0, finite coefficients, a non-degenerate
    /// parametrization and a simple boundary curve.
    pub fn new(gamma: T, a: Vec<Cx<T>>) -> Result<Self> {
        let m = Self::new_unchecked(gamma, a)?;
        m.validate_simple(SIMPLE_CURVE_SAMPLES)?;
        Ok(m)
    }

    /// Builds the map after scalar checks only, skipping the curve test.
    pub fn new_unchecked(gamma: T, mut a: Vec<Cx<T>>) -> Result<Self> {
        if !(gamma.is_finite() && gamma > T::zero()) {
            return Err(Error::Validation(format!("gamma must be positive, got {gamma}")));
        }
        if a.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Validation("map coefficients must be finite".into()));
        }
        while a.len() > 1 && a.last().is_some_and(|c| c.is_zero()) {
            a.pop();
        }
        if a.is_empty() {
            a.push(Cx::zero());
        }
        Ok(Self {
            gamma,
            a,
            margin: T::lit(DEFAULT_MARGIN),
        })
    }

    /// Sets δ/γ, the relative margin below γ where the series may still be
    /// evaluated.
    pub fn with_margin(mut self, margin: T) -> Result<Self> {
        if !(margin >= T::zero() && margin < T::one()) {
            return Err(Error::Validation(format!("margin must lie in [0, 1), got {margin}")));
        }
        self.margin = margin;
        Ok(self)
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// ρ₀ = ln γ.
    pub fn rho0(&self) -> T {
        self.gamma.ln()
    }

    pub fn margin(&self) -> T {
        self.margin
    }

    /// `a₀ … a_K` as supplied, trailing zeros removed.
    pub fn coefficients(&self) -> &[Cx<T>] {
        &self.a
    }

    /// Laurent depth K (index of the last nonzero coefficient).
    pub fn depth(&self) -> usize {
        self.a.len() - 1
    }

    /// `a_k` for any integer k.
    pub fn coeff(&self, k: i64) -> Cx<T> {
        match k {
            -1 => Cx::new(T::one(), T::zero()),
            k if k < -1 => Cx::zero(),
            k => self.a.get(k as usize).copied().unwrap_or_else(Cx::zero),
        }
    }

    fn check_domain(&self, w: Cx<T>) -> Result<()> {
        let rmin = self.gamma * (T::one() - self.margin);
        if !(w.norm() >= rmin) {
            return Err(Error::Domain(format!(
                "|w| = {} below the admissible radius {}",
                w.norm(),
                rmin
            )));
        }
        Ok(())
    }

    /// Ψ(w) without the domain check.
    pub fn eval_unchecked(&self, w: Cx<T>) -> Cx<T> {
        let inv = w.inv();
        let mut acc = Cx::zero();
        for c in self.a.iter().rev() {
            acc = acc * inv + *c;
        }
        w + acc
    }

    /// Ψ′(w) without checks.
    pub fn derivative_unchecked(&self, w: Cx<T>) -> Cx<T> {
        let inv = w.inv();
        let mut acc: Cx<T> = Cx::zero();
        for k in (1..self.a.len()).rev() {
            acc = acc * inv + self.a[k] * T::lit(k as f64);
        }
        Cx::new(T::one(), T::zero()) - acc * inv * inv
    }

    pub fn eval(&self, w: Cx<T>) -> Result<Cx<T>> {
        self.check_domain(w)?;
        Ok(self.eval_unchecked(w))
    }

    pub fn derivative(&self, w: Cx<T>) -> Result<Cx<T>> {
        self.check_domain(w)?;
        let d = self.derivative_unchecked(w);
        if d.norm() < T::lit(1e-12) {
            return Err(Error::SingularPoint(format!("{w}")));
        }
        Ok(d)
    }

    /// Boundary point `z = Ψ(γe^{iθ})` and scale factor `h = |γe^{iθ}Ψ′(γe^{iθ})|`.
    pub fn boundary_point(&self, theta: T) -> Result<(Cx<T>, T)> {
        let w = Cx::from_polar(self.gamma, theta);
        let d = self.derivative(w)?;
        Ok((self.eval_unchecked(w), (w * d).norm()))
    }

    /// Rejects maps whose sampled boundary degenerates or self-intersects.
    pub fn validate_simple(&self, samples: usize) -> Result<()> {
        let samples = samples.max(8);
        let step = T::TAU() / T::lit(samples as f64);
        let mut pts = Vec::with_capacity(samples);
        for j in 0..samples {
            let theta = step * T::lit(j as f64);
            let (z, h) = self
                .boundary_point(theta)
                .map_err(|e| Error::Validation(format!("degenerate boundary: {e}")))?;
            if !(h > T::lit(1e-12)) {
                return Err(Error::Validation(format!(
                    "scale factor vanishes at theta = {theta}"
                )));
            }
            pts.push(z);
        }
        let mut area = T::zero();
        for j in 0..samples {
            let a = pts[j];
            let b = pts[(j + 1) % samples];
            area += a.re * b.im - a.im * b.re;
        }
        if !(area > T::zero()) {
            return Err(Error::Validation("boundary is not positively oriented".into()));
        }
        for i in 0..samples {
            let (p1, p2) = (pts[i], pts[(i + 1) % samples]);
            for j in (i + 2)..samples {
                if i == 0 && j == samples - 1 {
                    continue;
                }
                if segments_cross(p1, p2, pts[j], pts[(j + 1) % samples]) {
                    return Err(Error::Validation(format!(
                        "boundary curve self-intersects near samples {i} and {j}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Ψ as a Laurent series with powers `-K..=1`.
    pub fn laurent(&self) -> LaurentSeries<T> {
        let k = self.depth() as i64;
        let coeffs = (-k..=1).map(|p| self.coeff(-p)).collect();
        LaurentSeries::new(-k, coeffs)
    }
}

fn segments_cross<T: Real>(a: Cx<T>, b: Cx<T>, c: Cx<T>, d: Cx<T>) -> bool {
    let orient = |p: Cx<T>, q: Cx<T>, r: Cx<T>| {
        let v = (q.re - p.re) * (r.im - p.im) - (q.im - p.im) * (r.re - p.re);
        if v > T::zero() {
            1
        } else if v < T::zero() {
            -1
        } else {
            0
        }
    };
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0 && o3 * o4 < 0
}

/// Finite section of one of the named semi-infinite matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffMatrix<T: Real> {
    pub label: &'static str,
    pub data: CMat<T>,
}

impl<T: Real> CoeffMatrix<T> {
    pub fn new(label: &'static str, data: CMat<T>) -> Self {
        Self { label, data }
    }

    /// Truncation order n (indices run over `0..=n`).
    pub fn order(&self) -> usize {
        self.data.nrows().saturating_sub(1)
    }

    pub fn get(&self, m: usize, k: usize) -> Cx<T> {
        self.data[(m, k)]
    }
}

fn czero<T: Real>(n: usize) -> CMat<T> {
    CMat::from_element(n + 1, n + 1, Cx::zero())
}

fn cr<T: Real>(x: T) -> Cx<T> {
    Cx::new(x, T::zero())
}

/// Faber coefficient matrix P: row m holds the monomial coefficients of F_m.
pub fn faber_matrix<T: Real>(map: &ConformalMap<T>, n: usize) -> CoeffMatrix<T> {
    let mut p = czero::<T>(n);
    p[(0, 0)] = cr(T::one());
    for m in 0..n {
        let am = map.coeff(m as i64);
        for j in 0..=m {
            // z F_m
            let v = p[(m, j)];
            p[(m + 1, j + 1)] += v;
        }
        p[(m + 1, 0)] -= am * T::lit(m as f64);
        for k in 0..=m {
            let a = map.coeff((m - k) as i64);
            if a.is_zero() {
                continue;
            }
            for j in 0..=k {
                let v = p[(k, j)];
                p[(m + 1, j)] -= a * v;
            }
        }
    }
    CoeffMatrix::new("P", p)
}

/// Inverse of a unit lower-triangular matrix by forward substitution.
pub fn faber_inverse<T: Real>(p: &CoeffMatrix<T>) -> CoeffMatrix<T> {
    let n = p.order();
    let mut x = czero::<T>(n);
    for i in 0..=n {
        x[(i, i)] = cr(T::one());
        for j in (0..i).rev() {
            let mut s = Cx::zero();
            for k in j..i {
                s += p.data[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = -s;
        }
    }
    CoeffMatrix::new("P^-1", x)
}

/// Derivative coefficients: `F_m′ = Σ_k d̃_{mk} F_k`, and `d_{mk} = d̃_{mk}/(mγ^m)`.
///
/// D̃ equals `P T P⁻¹`, but forming that product in floating point loses
/// digits because P grows quickly with a₀. D̃ does not depend on a₀ at all,
/// so it is built directly in the Faber basis from the recursion
/// `F_{m+1}′ = F_m + zF_m′ − Σ a_j F_{m−j}′` together with
/// `zF_k = F_{k+1} + k a_k + Σ_{j≤k} a_j F_{k−j}`.
pub fn faber_derivative_matrices<T: Real>(
    map: &ConformalMap<T>,
    n: usize,
) -> (CoeffMatrix<T>, CoeffMatrix<T>) {
    let mut dt = czero::<T>(n);
    let mut zrow = vec![Cx::<T>::zero(); n + 2];
    for m in 0..n {
        zrow.iter_mut().for_each(|v| *v = Cx::zero());
        zrow[m] += cr(T::one());
        for k in 0..m {
            let c = dt[(m, k)];
            if c.is_zero() {
                continue;
            }
            zrow[k + 1] += c;
            zrow[0] += c * map.coeff(k as i64) * T::lit(k as f64);
            for j in 0..=k {
                zrow[k - j] += c * map.coeff(j as i64);
            }
        }
        for j in 0..=m {
            let a = map.coeff(j as i64);
            if a.is_zero() {
                continue;
            }
            for k in 0..(m - j) {
                zrow[k] -= a * dt[(m - j, k)];
            }
        }
        for k in 0..=n {
            dt[(m + 1, k)] = zrow[k];
        }
    }
    let g = map.gamma();
    let mut d = czero::<T>(n);
    for m in 1..=n {
        let s = (T::lit(m as f64) * g.powi(m as i32)).recip();
        for k in 0..m {
            d[(m, k)] = dt[(m, k)] * s;
        }
    }
    (CoeffMatrix::new("D~", dt), CoeffMatrix::new("D", d))
}

/// Smallest window for which rows `1..=rows` and columns `1..=cols` of the
/// Grunsky matrix are exact. Each multiplication by Ψ spoils one more power at
/// the bottom of the window.
pub fn grunsky_window(rows: usize, cols: usize) -> Window {
    Window::new(-((rows + cols) as i64), rows as i64)
}

/// Grunsky coefficients `c_{mk}`, `0 ≤ m ≤ rows`, `0 ≤ k ≤ cols`: the
/// coefficient of `w^{-k}` in `F_m(Ψ(w))`.
///
/// The Faber recursion is run directly on Laurent series,
/// `G_{m+1} = ΨG_m − m a_m − Σ_{j≤m} a_j G_{m−j}` with `G_m = F_m∘Ψ`.
/// Substituting Ψ into each row of P gives the same numbers in exact
/// arithmetic but cancels badly once the entries of P grow.
pub fn grunsky_rows<T: Real>(
    map: &ConformalMap<T>,
    rows: usize,
    cols: usize,
    window: Window,
) -> Result<CMat<T>> {
    let need = grunsky_window(rows, cols);
    if window.lo > need.lo || window.hi < need.hi {
        return Err(Error::WindowTooSmall(format!(
            "rows {rows}, cols {cols} need [{}, {}], got [{}, {}]",
            need.lo, need.hi, window.lo, window.hi
        )));
    }
    let psi = map.laurent();
    let mut g: Vec<LaurentSeries<T>> = Vec::with_capacity(rows + 1);
    g.push(LaurentSeries::constant(cr(T::one())));
    for m in 0..rows {
        let mut next = g[m].multiply(&psi, window);
        next = next.add(&LaurentSeries::constant(-map.coeff(m as i64) * T::lit(m as f64)));
        for j in 0..=m {
            let a = map.coeff(j as i64);
            if !a.is_zero() {
                next = next.add(&g[m - j].scale(-a));
            }
        }
        g.push(next.truncate(window));
    }
    let mut c = CMat::from_element(rows + 1, cols + 1, Cx::zero());
    for m in 1..=rows {
        for k in 1..=cols {
            c[(m, k)] = g[m].coefficient(-(k as i64));
        }
    }
    Ok(c)
}

/// Square Grunsky section of order n using the default working window.
pub fn grunsky_matrix<T: Real>(map: &ConformalMap<T>, n: usize) -> CoeffMatrix<T> {
    let c = grunsky_rows(map, n, n, Window::working(n, n))
        .expect("default window covers the square section");
    CoeffMatrix::new("C", c)
}

/// `(Ψ₊, Ψ₋, Ψ₀)` with `[Ψ₊]_{mn} = a_{m+n}`, `[Ψ₋]_{mn} = a_{m−n}`.
pub fn psi_matrices<T: Real>(
    map: &ConformalMap<T>,
    n: usize,
) -> (CoeffMatrix<T>, CoeffMatrix<T>, CoeffMatrix<T>) {
    let plus = CMat::from_fn(n + 1, n + 1, |m, k| map.coeff((m + k) as i64));
    let minus = CMat::from_fn(n + 1, n + 1, |m, k| map.coeff(m as i64 - k as i64));
    let mut zero = czero::<T>(n);
    zero[(0, 0)] = map.coeff(0);
    if n >= 1 {
        zero[(1, 0)] = cr(T::one());
        zero[(0, 1)] = cr(T::one());
    }
    (
        CoeffMatrix::new("Psi+", plus),
        CoeffMatrix::new("Psi-", minus),
        CoeffMatrix::new("Psi0", zero),
    )
}

/// Diagonal and shift matrices of a given order.
#[derive(Clone, Debug)]
pub struct Diagonals<T: Real> {
    pub n: usize,
    pub gamma: T,
    /// diag(1, 1, 2, 3, …)
    pub nn: CMat<T>,
    /// diag(1, 1, 1/2, 1/3, …)
    pub nn_inv: CMat<T>,
    /// diag(0, 1, 2, 3, …)
    pub nn0: CMat<T>,
    /// diag(0, 1, 1/2, 1/3, …)
    pub nn0_inv: CMat<T>,
    /// diag(0, 1, 1, …)
    pub i0: CMat<T>,
    /// Subdiagonal (1, 2, 3, …).
    pub t: CMat<T>,
}

impl<T: Real> Diagonals<T> {
    /// diag(1, γ^k, γ^{2k}, …) for any integer k.
    pub fn gamma_pow(&self, k: i32) -> CMat<T> {
        diag_fn(self.n, |i| self.gamma.powi(k * i as i32))
    }

    /// Same as [`Self::gamma_pow`] with the leading entry zeroed.
    pub fn gamma_pow0(&self, k: i32) -> CMat<T> {
        diag_fn(self.n, |i| {
            if i == 0 {
                T::zero()
            } else {
                self.gamma.powi(k * i as i32)
            }
        })
    }
}

fn diag_fn<T: Real>(n: usize, f: impl Fn(usize) -> T) -> CMat<T> {
    let mut m = czero::<T>(n);
    for i in 0..=n {
        m[(i, i)] = cr(f(i));
    }
    m
}

pub fn diagonal_matrices<T: Real>(n: usize, gamma: T) -> Diagonals<T> {
    let idx = |i: usize| T::lit(i as f64);
    let mut t = czero::<T>(n);
    for i in 1..=n {
        t[(i, i - 1)] = cr(idx(i));
    }
    Diagonals {
        n,
        gamma,
        nn: diag_fn(n, |i| if i == 0 { T::one() } else { idx(i) }),
        nn_inv: diag_fn(n, |i| if i == 0 { T::one() } else { idx(i).recip() }),
        nn0: diag_fn(n, idx),
        nn0_inv: diag_fn(n, |i| if i == 0 { T::zero() } else { idx(i).recip() }),
        i0: diag_fn(n, |i| if i == 0 { T::zero() } else { T::one() }),
        t,
    }
}

/// `(F_m, F_m′, F_m″)` for `m = 0..=m_max`.
pub type FaberValues<T> = (Vec<Cx<T>>, Vec<Cx<T>>, Vec<Cx<T>>);

/// Values of `F_m`, `F_m′`, `F_m″` at `z` for `m = 0..=m_max`, from the
/// three-term-style Faber recursion rather than the monomial rows of P.
pub fn faber_values<T: Real>(
    map: &ConformalMap<T>,
    z: Cx<T>,
    m_max: usize,
) -> FaberValues<T> {
    let mut f = vec![cr(T::one())];
    let mut d1 = vec![Cx::zero()];
    let mut d2 = vec![Cx::zero()];
    for m in 0..m_max {
        let mut a = z * f[m] - map.coeff(m as i64) * T::lit(m as f64);
        let mut b = f[m] + z * d1[m];
        let mut c = d1[m] * T::lit(2.0) + z * d2[m];
        for j in 0..=m {
            let aj = map.coeff(j as i64);
            if aj.is_zero() {
                continue;
            }
            a -= aj * f[m - j];
            b -= aj * d1[m - j];
            c -= aj * d2[m - j];
        }
        f.push(a);
        d1.push(b);
        d2.push(c);
    }
    (f, d1, d2)
}

/// All map-derived matrices at a common truncation order.
///
/// Matrices are stored at the work order `n + K + 2`, which is wide enough
/// that every product used by the system and the loading is exact after
/// cropping back to `n`.
#[derive(Clone, Debug)]
pub struct GeometryBundle<T: Real> {
    map: ConformalMap<T>,
    order: usize,
    work: usize,
    pub p: CMat<T>,
    pub d_tilde: CMat<T>,
    pub d: CMat<T>,
    pub c: CMat<T>,
    pub psi_plus: CMat<T>,
    pub psi_minus: CMat<T>,
    pub psi_zero: CMat<T>,
    pub diag: Diagonals<T>,
}

impl<T: Real> GeometryBundle<T> {
    pub fn new(map: &ConformalMap<T>, order: usize) -> Self {
        let work = order + map.depth() + 2;
        let p = faber_matrix(map, work).data;
        let (dt, d) = faber_derivative_matrices(map, work);
        let c = grunsky_matrix(map, work).data;
        let (pp, pm, p0) = psi_matrices(map, work);
        Self {
            map: map.clone(),
            order,
            work,
            p,
            d_tilde: dt.data,
            d: d.data,
            c,
            psi_plus: pp.data,
            psi_minus: pm.data,
            psi_zero: p0.data,
            diag: diagonal_matrices(work, map.gamma()),
        }
    }

    pub fn map(&self) -> &ConformalMap<T> {
        &self.map
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn work_order(&self) -> usize {
        self.work
    }

    /// Leading `(n+1)×(n+1)` block of a work-order matrix.
    pub fn crop(&self, m: &CMat<T>) -> CMat<T> {
        m.view((0, 0), (self.order + 1, self.order + 1)).into_owned()
    }

    pub fn check_order(&self, n: usize) -> Result<()> {
        if n != self.order {
            return Err(Error::OrderMismatch {
                expected: self.order,
                got: n,
            });
        }
        Ok(())
    }
}

/// Entrywise complex conjugate.
pub fn conj<T: Real>(m: &CMat<T>) -> CMat<T> {
    m.map(|z| z.conj())
}
