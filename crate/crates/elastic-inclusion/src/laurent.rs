//! Truncated two-sided power series in `w`.
//!
//! A [`LaurentSeries`] stores dense coefficients for the powers `lo..=hi`.
//! Products are clipped to a [`Window`]; the window actually applied is kept
//! with the result so callers can tell which coefficients are exact.

use crate::scalar::{Cx, Real};

/// Closed range of retained powers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Self {
        assert!(hi >= lo, "empty window [{lo}, {hi}]");
        Self { lo, hi }
    }

    /// Default working window `[-(n + guard), n]`.
    pub fn working(n: usize, guard: usize) -> Self {
        Self::new(-((n + guard) as i64), n as i64)
    }

    pub fn contains(&self, k: i64) -> bool {
        self.lo <= k && k <= self.hi
    }

    fn intersect(&self, lo: i64, hi: i64) -> Option<(i64, i64)> {
        let l = lo.max(self.lo);
        let h = hi.min(self.hi);
        (l <= h).then_some((l, h))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeries<T> {
    lo: i64,
    coeffs: Vec<Cx<T>>,
    window: Option<Window>,
}

impl<T: Real> LaurentSeries<T> {
    /// Series with coefficients for `w^lo, w^(lo+1), ...`. An empty slice is
    /// stored as the zero series at power `lo`.
    pub fn new(lo: i64, coeffs: Vec<Cx<T>>) -> Self {
        let coeffs = if coeffs.is_empty() {
            vec![Cx::new(T::zero(), T::zero())]
        } else {
            coeffs
        };
        Self {
            lo,
            coeffs,
            window: None,
        }
    }

    pub fn zero() -> Self {
        Self::new(0, Vec::new())
    }

    pub fn constant(c: Cx<T>) -> Self {
        Self::new(0, vec![c])
    }

    /// `c * w^k`.
    pub fn monomial(c: Cx<T>, k: i64) -> Self {
        Self::new(k, vec![c])
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    /// Window applied by the most recent truncating operation, if any.
    pub fn window(&self) -> Option<Window> {
        self.window
    }

    pub fn coeffs(&self) -> &[Cx<T>] {
        &self.coeffs
    }

    /// Coefficient of `w^k`; zero outside `[lo, hi]`.
    pub fn coefficient(&self, k: i64) -> Cx<T> {
        if k < self.lo || k > self.hi() {
            return Cx::new(T::zero(), T::zero());
        }
        self.coeffs[(k - self.lo) as usize]
    }

    /// Multiplies by `w^p`.
    pub fn shift_power(&self, p: i64) -> Self {
        Self {
            lo: self.lo + p,
            coeffs: self.coeffs.clone(),
            window: self.window.map(|w| Window::new(w.lo + p, w.hi + p)),
        }
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        Self {
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|c| *c * s).collect(),
            window: self.window,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        let coeffs = (lo..=hi)
            .map(|k| self.coefficient(k) + other.coefficient(k))
            .collect();
        Self {
            lo,
            coeffs,
            window: None,
        }
    }

    /// Keeps only powers inside `window`.
    pub fn truncate(&self, window: Window) -> Self {
        match window.intersect(self.lo, self.hi()) {
            Some((l, h)) => Self {
                lo: l,
                coeffs: (l..=h).map(|k| self.coefficient(k)).collect(),
                window: Some(window),
            },
            None => Self {
                lo: window.lo,
                coeffs: vec![Cx::new(T::zero(), T::zero())],
                window: Some(window),
            },
        }
    }

    /// Product clipped to `window`.
    pub fn multiply(&self, other: &Self, window: Window) -> Self {
        let full_lo = self.lo + other.lo;
        let full_hi = self.hi() + other.hi();
        let Some((l, h)) = window.intersect(full_lo, full_hi) else {
            return Self::zero().truncate(window);
        };
        let mut out = vec![Cx::new(T::zero(), T::zero()); (h - l + 1) as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.re == T::zero() && a.im == T::zero() {
                continue;
            }
            let pi = self.lo + i as i64;
            // powers j of `other` with l <= pi + j <= h
            let jlo = (l - pi).max(other.lo);
            let jhi = (h - pi).min(other.hi());
            for j in jlo..=jhi {
                out[(pi + j - l) as usize] += *a * other.coeffs[(j - other.lo) as usize];
            }
        }
        Self {
            lo: l,
            coeffs: out,
            window: Some(window),
        }
    }

    /// Evaluates the series at `w != 0`.
    pub fn eval(&self, w: Cx<T>) -> Cx<T> {
        let mut acc = Cx::new(T::zero(), T::zero());
        for c in self.coeffs.iter().rev() {
            acc = acc * w + *c;
        }
        acc * w.powi(self.lo as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type S = LaurentSeries<f64>;

    fn c(re: f64, im: f64) -> Cx<f64> {
        Cx::new(re, im)
    }

    fn wide() -> Window {
        Window::new(-20, 20)
    }

    fn close(a: &S, b: &S, tol: f64) -> bool {
        let lo = a.lo().min(b.lo());
        let hi = a.hi().max(b.hi());
        (lo..=hi).all(|k| (a.coefficient(k) - b.coefficient(k)).norm() <= tol)
    }

    #[test]
    fn w_times_inverse_w() {
        let p = S::monomial(c(1.0, 0.0), 1).multiply(&S::monomial(c(1.0, 0.0), -1), wide());
        assert!(close(&p, &S::constant(c(1.0, 0.0)), 0.0));
    }

    #[test]
    fn binomial_square() {
        let a = S::new(-1, vec![c(0.3, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let p = a.multiply(&a, wide());
        let expect = S::new(-2, vec![c(0.09, 0.0), c(0.0, 0.0), c(0.6, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(close(&p, &expect, 1e-15));
    }

    #[test]
    fn three_term_map_squared() {
        // (w + 0.5 + 0.3/w)^2 = w^2 + w + (0.25 + 0.6) + 0.3/w + 0.09/w^2
        let psi = S::new(-1, vec![c(0.3, 0.0), c(0.5, 0.0), c(1.0, 0.0)]);
        let p = psi.multiply(&psi, wide());
        let expect = [(2, 1.0), (1, 1.0), (0, 0.85), (-1, 0.3), (-2, 0.09)];
        for (k, v) in expect {
            assert!((p.coefficient(k) - c(v, 0.0)).norm() < 1e-15, "power {k}");
        }
        assert!((p.coefficient(-2) - c(0.09, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn elementwise_ops() {
        let w3 = S::constant(c(1.0, 0.0)).shift_power(3);
        assert_eq!(w3.coefficient(3), c(1.0, 0.0));
        assert_eq!(w3.lo(), 3);
        let w = S::monomial(c(1.0, 0.0), 1);
        let z = w.add(&w.scale(c(-1.0, 0.0)));
        assert!((-5..5).all(|k| z.coefficient(k) == c(0.0, 0.0)));
        let s = S::monomial(c(1.0, 0.0), -2).scale(c(0.0, 2.0));
        assert_eq!(s.coefficient(-2), c(0.0, 2.0));
    }

    #[test]
    fn coefficient_outside_support_is_zero() {
        let a = S::new(0, vec![c(0.5, 0.0), c(1.0, 0.0)]);
        assert_eq!(a.coefficient(0), c(0.5, 0.0));
        assert_eq!(a.coefficient(-3), c(0.0, 0.0));
    }

    #[test]
    fn window_is_recorded_and_applied() {
        let a = S::new(-3, vec![c(1.0, 0.0); 7]);
        let win = Window::new(-1, 1);
        let p = a.multiply(&a, win);
        assert_eq!(p.window(), Some(win));
        assert!(p.lo() >= -1 && p.hi() <= 1);
        assert_eq!(p.coefficient(0), c(7.0, 0.0));
    }

    fn series() -> impl Strategy<Value = S> {
        (-3i64..3, proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5))
            .prop_map(|(lo, v)| S::new(lo, v.into_iter().map(|(a, b)| c(a, b)).collect()))
    }

    proptest! {
        #[test]
        fn commutative(a in series(), b in series()) {
            prop_assert!(close(&a.multiply(&b, wide()), &b.multiply(&a, wide()), 1e-14));
        }

        #[test]
        fn associative(a in series(), b in series(), d in series()) {
            let l = a.multiply(&b, wide()).multiply(&d, wide());
            let r = a.multiply(&b.multiply(&d, wide()), wide());
            prop_assert!(close(&l, &r, 1e-13));
        }

        #[test]
        fn truncation_idempotent(a in series(), lo in -4i64..0, span in 0i64..4) {
            let win = Window::new(lo, lo + span);
            let once = a.truncate(win);
            prop_assert_eq!(once.truncate(win), once);
        }

        #[test]
        fn eval_matches_product(a in series(), b in series()) {
            let w = c(1.1, 0.4);
            let lhs = a.multiply(&b, wide()).eval(w);
            prop_assert!((lhs - a.eval(w) * b.eval(w)).norm() < 1e-12);
        }
    }
}
