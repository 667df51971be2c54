//! Displacement fields, traction potentials and boundary residuals.
//!
//! For a density `φ = Σ x_k φ_k` the single layer is written through the
//! holomorphic pair
//!
//! ```text
//! f = β𝓛[φ],   g = −α𝓛[φ̄] − β𝓒[ζ̄φ],   2S[φ] = κf − z·conj f′ − conj g − c
//! ```
//!
//! with `c = β x₀` (only the interior density has a mean). Outside Ω the
//! operators 𝓛, 𝓒 are evaluated in the `w` coordinate from the Grunsky
//! coefficients; inside Ω they reduce to Faber polynomials in `z`.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::geometry::{faber_values, grunsky_rows, grunsky_window, ConformalMap};
use crate::loading::{eval_h, traction_potential_h, LoadingSpec};
use crate::material::{Kelvin, MaterialPair};
use crate::scalar::{CMat, Cx, Real};
use crate::system::{DensitySolution, Mode};

/// Default boundary-approach offset, relative to γ.
pub const DEFAULT_EPS: f64 = 1e-3;
/// Default number of radii in the Richardson table.
pub const DEFAULT_LEVELS: usize = 4;
/// Default width of the flagged band around ∂Ω, relative to γ.
pub const DEFAULT_BAND: f64 = 2e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Exterior,
    Interior,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::Exterior => "exterior",
            Region::Interior => "interior",
        })
    }
}

/// Values of the pair `(f, f′, g)` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolomorphicPair<T> {
    pub f: Cx<T>,
    pub df: Cx<T>,
    pub g: Cx<T>,
}

/// Additive pieces of `u`; their sum is the displacement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldParts<T> {
    /// Background field H (zero inside Ω).
    pub h: Cx<T>,
    /// `κf/2`
    pub kappa_f: Cx<T>,
    /// `−z·conj f′ / 2`
    pub z_conj_df: Cx<T>,
    /// `−conj g / 2`
    pub conj_g: Cx<T>,
    /// `−c/2`
    pub mean: Cx<T>,
}

impl<T: Real> FieldParts<T> {
    pub fn total(&self) -> Cx<T> {
        self.h + self.kappa_f + self.z_conj_df + self.conj_g + self.mean
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample<T> {
    /// Preimage coordinate; NaN when an interior point has none.
    pub w: Cx<T>,
    pub z: Cx<T>,
    pub u: Cx<T>,
    pub region: Region,
    pub parts: FieldParts<T>,
    /// `𝓘[u]`, defined up to an additive constant.
    pub traction: Cx<T>,
    /// Set for grid points inside the boundary band.
    pub near_boundary: bool,
}

/// Boundary-approach settings.
#[derive(Clone, Copy, Debug)]
pub struct ResidualOptions<T> {
    /// Largest offset ε, relative to γ; radii are `γ(1 ± ε/2^j)`.
    pub eps: T,
    /// Number of radii in the Richardson table.
    pub levels: usize,
}

impl<T: Real> Default for ResidualOptions<T> {
    fn default() -> Self {
        Self {
            eps: T::lit(DEFAULT_EPS),
            levels: DEFAULT_LEVELS,
        }
    }
}

/// Rectangular grid in the physical plane, `x0,x1,y0,y1,nx,ny`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points in row-major order, `y` outermost.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let lin = |a: f64, b: f64, n: usize, i: usize| {
            if n <= 1 {
                a
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(self.len());
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                out.push((lin(self.x0, self.x1, self.nx, ix), lin(self.y0, self.y1, self.ny, iy)));
            }
        }
        out
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(Error::Validation(format!(
                "grid needs x0,x1,y0,y1,nx,ny, got {s:?}"
            )));
        }
        let float = |t: &str| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Validation(format!("bad grid bound {t:?}")))
        };
        let count = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| Error::Validation(format!("bad grid count {t:?}")))
        };
        Ok(GridSpec {
            x0: float(parts[0])?,
            x1: float(parts[1])?,
            y0: float(parts[2])?,
            y1: float(parts[3])?,
            nx: count(parts[4])?,
            ny: count(parts[5])?,
        })
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{},{},{}", self.x0, self.x1, self.y0, self.y1, self.nx, self.ny)
    }
}

/// `𝓛[φ_k]`, `𝓒[φ_k]` for `k` in `lo..=hi` at one point.
struct Table<T> {
    lo: i64,
    l: Vec<Cx<T>>,
    c: Vec<Cx<T>>,
}

impl<T: Real> Table<T> {
    fn l(&self, k: i64) -> Cx<T> {
        self.l[(k - self.lo) as usize]
    }
    fn c(&self, k: i64) -> Cx<T> {
        self.c[(k - self.lo) as usize]
    }
}

/// Evaluates the solved fields of one problem.
#[derive(Clone, Debug)]
pub struct FieldEvaluator<T: Real> {
    map: ConformalMap<T>,
    material: MaterialPair<T>,
    loading: LoadingSpec<T>,
    mode: Mode,
    order: usize,
    ext: Vec<(i64, Cx<T>)>,
    int: Vec<(i64, Cx<T>)>,
    grunsky: CMat<T>,
    rows: usize,
    cols: usize,
    boundary: Vec<Cx<T>>,
    band: T,
}

impl<T: Real> FieldEvaluator<T> {
    pub fn new(
        solution: &DensitySolution<T>,
        loading: &LoadingSpec<T>,
        map: &ConformalMap<T>,
        material: &MaterialPair<T>,
    ) -> Result<Self> {
        let expect = if material.is_cavity() { Mode::Cavity } else { Mode::Transmission };
        if solution.mode != expect {
            return Err(Error::Validation("solution mode does not match material".into()));
        }
        let n = solution.order();
        let mut ext = Vec::new();
        let mut int = Vec::new();
        for k in 1..=n as i64 {
            for kk in [k, -k] {
                ext.push((kk, solution.exterior_coefficient(kk)));
                int.push((kk, solution.interior_coefficient(kk)));
            }
        }
        int.push((0, solution.interior_coefficient(0)));
        Self::from_coefficients(map, material, loading, expect, n, ext, int)
    }

    /// Builds an evaluator from explicit coefficient lists `(k, x_k)`.
    pub fn from_coefficients(
        map: &ConformalMap<T>,
        material: &MaterialPair<T>,
        loading: &LoadingSpec<T>,
        mode: Mode,
        order: usize,
        ext: Vec<(i64, Cx<T>)>,
        int: Vec<(i64, Cx<T>)>,
    ) -> Result<Self> {
        let span = |v: &[(i64, Cx<T>)]| v.iter().map(|(k, _)| k.unsigned_abs() as usize).max();
        let order = order.max(span(&ext).unwrap_or(0)).max(span(&int).unwrap_or(0));
        let k = map.depth();
        let rows = order + k + 2;
        let cols = (rows * k).max(1);
        let grunsky = grunsky_rows(map, rows, cols, grunsky_window(rows, cols))?;
        let samples = crate::geometry::SIMPLE_CURVE_SAMPLES;
        let boundary = (0..samples)
            .map(|j| {
                let th = T::TAU() * T::lit(j as f64) / T::lit(samples as f64);
                map.eval_unchecked(Cx::from_polar(map.gamma(), th))
            })
            .collect();
        Ok(Self {
            map: map.clone(),
            material: *material,
            loading: loading.clone(),
            mode,
            order,
            ext,
            int,
            grunsky,
            rows,
            cols,
            boundary,
            band: T::lit(DEFAULT_BAND),
        })
    }

    /// Replaces the boundary band width (relative to γ).
    pub fn with_band(mut self, band: T) -> Self {
        self.band = band;
        self
    }

    pub fn map(&self) -> &ConformalMap<T> {
        &self.map
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    fn table_exterior(&self, w: Cx<T>) -> Result<Table<T>> {
        let g = self.map.gamma();
        let dp = self.map.derivative(w)?;
        let inv = w.inv();
        let mut pow = Vec::with_capacity(self.cols + 2);
        let mut p = Cx::new(T::one(), T::zero());
        for _ in 0..=self.cols + 1 {
            pow.push(p);
            p *= inv;
        }
        let lo = -(self.order as i64) - 1;
        let hi = self.rows as i64;
        let mut l = Vec::with_capacity((hi - lo + 1) as usize);
        let mut c = Vec::with_capacity(l.capacity());
        let gw = Cx::new(g, T::zero()) * inv;
        for k in lo..=hi {
            if k < 0 {
                let m = -k;
                let gm = gw.powi(m as i32);
                l.push(-gm / T::lit(m as f64));
                c.push(gm * inv / dp);
            } else if k == 0 {
                l.push(w.ln());
                c.push((w * dp).inv());
            } else {
                let m = k as usize;
                let mut s = Cx::zero();
                let mut sd = Cx::zero();
                for j in 1..=self.cols {
                    let cm = self.grunsky[(m, j)];
                    s += cm * pow[j];
                    sd += cm * pow[j + 1] * T::lit(j as f64);
                }
                let scale = g.powi(-(k as i32)) / T::lit(k as f64);
                l.push(-s * scale);
                c.push(sd * scale / dp);
            }
        }
        Ok(Table { lo, l, c })
    }

    fn table_interior(&self, z: Cx<T>) -> Table<T> {
        let g = self.map.gamma();
        let (f, d1, _) = faber_values(&self.map, z, self.rows);
        let lo = -(self.order as i64) - 1;
        let hi = self.rows as i64;
        let mut l = Vec::new();
        let mut c = Vec::new();
        for k in lo..=hi {
            if k < 0 {
                l.push(Cx::zero());
                c.push(Cx::zero());
            } else if k == 0 {
                l.push(Cx::new(g.ln(), T::zero()));
                c.push(Cx::zero());
            } else {
                let s = -g.powi(-(k as i32)) / T::lit(k as f64);
                l.push(f[k as usize] * s);
                c.push(d1[k as usize] * s);
            }
        }
        Table { lo, l, c }
    }

    /// `(𝓛[φ], 𝓛[φ̄], 𝓒[φ], 𝓒[ζ̄φ])` for `φ = Σ x_k φ_k`.
    fn sums(&self, coeffs: &[(i64, Cx<T>)], tab: &Table<T>) -> [Cx<T>; 4] {
        let g = self.map.gamma();
        let depth = self.map.depth() as i64;
        let mut out = [Cx::zero(); 4];
        for &(l, x) in coeffs {
            if x.is_zero() {
                continue;
            }
            out[0] += x * tab.l(l);
            out[1] += x.conj() * tab.l(-l);
            out[2] += x * tab.c(l);
            for j in -1..=depth {
                out[3] += x * self.map.coeff(j).conj() * g.powi(-(j as i32)) * tab.c(j + l);
            }
        }
        out
    }

    fn pair(&self, coeffs: &[(i64, Cx<T>)], tab: &Table<T>, k: &Kelvin<T>) -> HolomorphicPair<T> {
        let [lp, lb, cp, cz] = self.sums(coeffs, tab);
        HolomorphicPair {
            f: lp * k.beta,
            df: cp * k.beta,
            g: -(lb * k.alpha) - cz * k.beta,
        }
    }

    fn sample(
        &self,
        w: Cx<T>,
        z: Cx<T>,
        region: Region,
        pair: HolomorphicPair<T>,
        k: &Kelvin<T>,
        x0: Cx<T>,
    ) -> FieldSample<T> {
        let half = T::lit(0.5);
        let ext = self.material.exterior();
        let (h, th) = match region {
            Region::Exterior => (
                eval_h(&self.loading, &self.map, ext, z),
                traction_potential_h(&self.loading, &self.map, ext, z),
            ),
            Region::Interior => (Cx::zero(), Cx::zero()),
        };
        let parts = FieldParts {
            h,
            kappa_f: pair.f * (k.kappa * half),
            z_conj_df: -(z * pair.df.conj()) * half,
            conj_g: -pair.g.conj() * half,
            mean: -(x0 * k.beta) * half,
        };
        let traction = th + (pair.f + z * pair.df.conj() + pair.g.conj()) * (k.mu * half);
        FieldSample {
            w,
            z,
            u: parts.total(),
            region,
            parts,
            traction,
            near_boundary: false,
        }
    }

    /// Holomorphic pair of `S[ψ]` at `Ψ(w)`, `|w| > γ`.
    pub fn pair_exterior(&self, w: Cx<T>) -> Result<HolomorphicPair<T>> {
        self.check_exterior(w)?;
        let tab = self.table_exterior(w)?;
        Ok(self.pair(&self.ext, &tab, self.material.exterior()))
    }

    /// Holomorphic pair of `S̃[φ]` at an interior point `z`.
    pub fn pair_interior(&self, z: Cx<T>) -> Result<HolomorphicPair<T>> {
        let k = self.material.interior()?;
        let tab = self.table_interior(z);
        Ok(self.pair(&self.int, &tab, k))
    }

    fn check_exterior(&self, w: Cx<T>) -> Result<()> {
        if !(w.norm() > self.map.gamma()) {
            return Err(Error::Domain(format!(
                "exterior evaluation needs |w| > γ, got |w| = {}",
                w.norm()
            )));
        }
        Ok(())
    }

    /// `u = H + S[ψ]` at `z = Ψ(w)`.
    pub fn eval_exterior(&self, w: Cx<T>) -> Result<FieldSample<T>> {
        self.check_exterior(w)?;
        let z = self.map.eval(w)?;
        let tab = self.table_exterior(w)?;
        let k = self.material.exterior();
        let pair = self.pair(&self.ext, &tab, k);
        Ok(self.sample(w, z, Region::Exterior, pair, k, Cx::zero()))
    }

    /// `u = S̃[φ]` at `z = Ψ(w)` for `|w| < γ` in the band where Ψ still
    /// parametrises Ω.
    pub fn eval_interior(&self, w: Cx<T>) -> Result<FieldSample<T>> {
        if !(w.norm() < self.map.gamma()) || w.is_zero() {
            return Err(Error::Domain(format!(
                "interior evaluation needs 0 < |w| < γ, got |w| = {}",
                w.norm()
            )));
        }
        let z = self.map.eval_unchecked(w);
        self.interior_at(w, z)
    }

    /// `u = S̃[φ]` at a physical point inside Ω.
    pub fn eval_interior_z(&self, z: Cx<T>) -> Result<FieldSample<T>> {
        if !self.inside(z) {
            return Err(Error::Domain(format!("point {z} is not inside the inclusion")));
        }
        let w = self.preimage(z, false).unwrap_or(Cx::new(T::nan(), T::nan()));
        self.interior_at(w, z)
    }

    fn interior_at(&self, w: Cx<T>, z: Cx<T>) -> Result<FieldSample<T>> {
        let k = self.material.interior()?;
        let tab = self.table_interior(z);
        let pair = self.pair(&self.int, &tab, k);
        let x0 = self
            .int
            .iter()
            .find(|(i, _)| *i == 0)
            .map(|p| p.1)
            .unwrap_or_else(Cx::zero);
        Ok(self.sample(w, z, Region::Interior, pair, k, x0))
    }

    /// Winding-number test against the sampled boundary.
    pub fn inside(&self, z: Cx<T>) -> bool {
        let mut wind = T::zero();
        let n = self.boundary.len();
        for j in 0..n {
            let a = self.boundary[j] - z;
            let b = self.boundary[(j + 1) % n] - z;
            wind += (b / a).arg();
        }
        wind.abs() > T::PI()
    }

    /// Distance from `z` to the sampled boundary polygon.
    pub fn boundary_distance(&self, z: Cx<T>) -> T {
        let n = self.boundary.len();
        let mut best = T::infinity();
        for j in 0..n {
            let a = self.boundary[j];
            let b = self.boundary[(j + 1) % n];
            let ab = b - a;
            let len2 = ab.norm_sqr();
            let t = if len2 > T::zero() {
                ((z - a) * ab.conj()).re / len2
            } else {
                T::zero()
            };
            let t = t.max(T::zero()).min(T::one());
            best = best.min((a + ab * t - z).norm());
        }
        best
    }

    /// Solves `Ψ(w) = z` by Newton's method on the requested side of `|w| = γ`.
    pub fn preimage(&self, z: Cx<T>, exterior: bool) -> Option<Cx<T>> {
        let g = self.map.gamma();
        let n = self.boundary.len();
        let j = (0..n)
            .min_by(|&a, &b| {
                (self.boundary[a] - z)
                    .norm()
                    .partial_cmp(&(self.boundary[b] - z).norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(0);
        let th = T::TAU() * T::lit(j as f64) / T::lit(n as f64);
        let d = (self.boundary[j] - z).norm() / g;
        let scale = if exterior { T::one() + d } else { (T::one() - d).max(T::lit(0.5)) };
        let starts = [Cx::from_polar(g * scale, th), z - self.map.coeff(0)];
        let tol = T::lit(1e3) * T::epsilon() * z.norm().max(T::one());
        for start in starts {
            let mut w = start;
            for _ in 0..100 {
                let dp = self.map.derivative_unchecked(w);
                if dp.norm() < T::lit(1e-12) {
                    break;
                }
                let step = (self.map.eval_unchecked(w) - z) / dp;
                w -= step;
                if !(w.re.is_finite() && w.im.is_finite()) || w.is_zero() {
                    break;
                }
                if step.norm() <= T::epsilon() * w.norm() {
                    break;
                }
            }
            let ok_side = if exterior { w.norm() > g } else { w.norm() < g };
            if ok_side && (self.map.eval_unchecked(w) - z).norm() <= tol {
                return Some(w);
            }
        }
        None
    }

    /// Evaluates the field at a physical point, choosing the region.
    /// Points on ∂Ω itself use the interior form when there is one.
    pub fn eval_at(&self, z: Cx<T>) -> Result<FieldSample<T>> {
        let near = self.boundary_distance(z) < self.band * self.map.gamma();
        let inside = self.inside(z);
        let mut s = if inside && self.mode == Mode::Cavity {
            return Err(Error::CavityMode(format!("point {z} lies in the cavity")));
        } else if inside {
            self.interior_at(self.preimage(z, false).unwrap_or(Cx::new(T::nan(), T::nan())), z)?
        } else {
            match self.preimage(z, true) {
                Some(w) => self.eval_exterior(w)?,
                None if near && self.mode == Mode::Transmission => {
                    self.interior_at(Cx::new(T::nan(), T::nan()), z)?
                }
                None => return Err(Error::Domain(format!("no exterior preimage for {z}"))),
            }
        };
        s.near_boundary = near;
        Ok(s)
    }

    /// Samples a grid in row-major order. Every point yields a sample:
    /// points inside the boundary band are flagged, and points without a
    /// field (inside a cavity, or on its edge) carry NaN displacement.
    pub fn grid_field(&self, grid: &GridSpec) -> Vec<FieldSample<T>> {
        grid.points()
            .into_iter()
            .map(|(x, y)| {
                let z = Cx::new(T::lit(x), T::lit(y));
                self.eval_at(z).unwrap_or_else(|_| self.empty_sample(z))
            })
            .collect()
    }

    fn empty_sample(&self, z: Cx<T>) -> FieldSample<T> {
        let nan = Cx::new(T::nan(), T::nan());
        let region = if self.inside(z) { Region::Interior } else { Region::Exterior };
        FieldSample {
            w: nan,
            z,
            u: nan,
            region,
            parts: FieldParts { h: nan, kappa_f: nan, z_conj_df: nan, conj_g: nan, mean: nan },
            traction: nan,
            near_boundary: self.boundary_distance(z) < self.band * self.map.gamma(),
        }
    }

    fn richardson(vals: Vec<[Cx<T>; 2]>) -> [Cx<T>; 2] {
        let mut cur = vals;
        let mut lev = 1;
        while cur.len() > 1 {
            let f = T::lit(2f64.powi(lev));
            cur = cur
                .windows(2)
                .map(|p| {
                    [
                        (p[1][0] * f - p[0][0]) / (f - T::one()),
                        (p[1][1] * f - p[0][1]) / (f - T::one()),
                    ]
                })
                .collect();
            lev += 1;
        }
        cur[0]
    }

    /// Boundary limits of `(u, 𝓘[u])` at angle θ, from outside or inside.
    pub fn boundary_limit(&self, theta: T, region: Region, opts: ResidualOptions<T>) -> Result<[Cx<T>; 2]> {
        let g = self.map.gamma();
        let levels = opts.levels.max(1);
        let mut vals = Vec::with_capacity(levels);
        for j in 0..levels {
            let e = opts.eps / T::lit(2f64.powi(j as i32));
            let s = match region {
                Region::Exterior => self.eval_exterior(Cx::from_polar(g * (T::one() + e), theta))?,
                Region::Interior => {
                    let w = Cx::from_polar(g * (T::one() - e), theta);
                    self.interior_at(w, self.map.eval_unchecked(w))?
                }
            };
            vals.push([s.u, s.traction]);
        }
        Ok(Self::richardson(vals))
    }

    /// `(r_disp, r_trac)`: the largest displacement jump across ∂Ω and the
    /// largest variation of the traction-potential jump between angles.
    pub fn transmission_residual(&self, angles: &[T], opts: ResidualOptions<T>) -> Result<(T, T)> {
        if self.mode == Mode::Cavity {
            return Err(Error::CavityMode("no interior field for a cavity".into()));
        }
        let mut rd = T::zero();
        let mut jumps = Vec::with_capacity(angles.len());
        for &th in angles {
            let e = self.boundary_limit(th, Region::Exterior, opts)?;
            let i = self.boundary_limit(th, Region::Interior, opts)?;
            rd = rd.max((e[0] - i[0]).norm());
            jumps.push(e[1] - i[1]);
        }
        Ok((rd, spread(&jumps)))
    }

    /// Largest variation of `𝓘ᵉ[u_e]` along ∂Ω; zero for a traction-free
    /// boundary.
    pub fn traction_variation(&self, angles: &[T], opts: ResidualOptions<T>) -> Result<T> {
        let mut vals = Vec::with_capacity(angles.len());
        for &th in angles {
            vals.push(self.boundary_limit(th, Region::Exterior, opts)?[1]);
        }
        Ok(spread(&vals))
    }
}

fn spread<T: Real>(v: &[Cx<T>]) -> T {
    let mut m = T::zero();
    for (i, a) in v.iter().enumerate() {
        for b in &v[i + 1..] {
            m = m.max((*a - *b).norm());
        }
    }
    m
}

/// `−Ψ(w)·conj 𝓒₂[φ_k](z) + conj 𝓒₂[ζ̄φ_k](z)` at an exterior point,
/// where `𝓒₂[φ_j] = γ^{−j} w^{j−1}/Ψ′(w)` is the part of `𝓒[φ_j]` carrying
/// `1/Ψ′`.
pub fn c2_combination<T: Real>(map: &ConformalMap<T>, k: i64, w: Cx<T>) -> Result<Cx<T>> {
    if !(w.norm() > map.gamma()) {
        return Err(Error::Domain("combination is sampled outside Ω only".into()));
    }
    let g = map.gamma();
    let dp = map.derivative(w)?;
    let c2 = |j: i64| w.powi((j - 1) as i32) * g.powi(-(j as i32)) / dp;
    let mut zeta = Cx::zero();
    for j in -1..=map.depth() as i64 {
        zeta += map.coeff(j).conj() * g.powi(-(j as i32)) * c2(j + k);
    }
    Ok(-(map.eval(w)? * c2(k).conj()) + zeta.conj())
}
