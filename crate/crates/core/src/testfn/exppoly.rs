//! Exponential polynomials `Σ c · x^k · e^{r x}`.
//!
//! Closed under addition, multiplication and differentiation, which makes
//! every derivative exact. Terms are kept sorted by `(rate, power)` with
//! exact-zero coefficients removed, so cancellations such as
//! `6e^{-x} - 6e^{-x}` leave the zero polynomial.

use std::cmp::Ordering;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub coef: f64,
    pub power: u32,
    pub rate: f64,
}

impl ExpTerm {
    #[inline]
    fn eval(&self, x: f64) -> f64 {
        let mut v = self.coef;
        if self.power > 0 {
            v *= x.powi(self.power as i32);
        }
        if self.rate != 0.0 {
            v *= (self.rate * x).exp();
        }
        v
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        self.rate
            .total_cmp(&other.rate)
            .then(self.power.cmp(&other.power))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpPoly {
    terms: Vec<ExpTerm>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms(vec![ExpTerm {
            coef: c,
            power: 0,
            rate: 0.0,
        }])
    }

    pub fn x() -> Self {
        Self::monomial(1.0, 1)
    }

    pub fn monomial(coef: f64, power: u32) -> Self {
        Self::from_terms(vec![ExpTerm {
            coef,
            power,
            rate: 0.0,
        }])
    }

    /// `coef · e^{rate x}`.
    pub fn exponential(coef: f64, rate: f64) -> Self {
        Self::from_terms(vec![ExpTerm {
            coef,
            power: 0,
            rate,
        }])
    }

    /// Polynomial from ascending coefficients.
    pub fn polynomial(coeffs: &[f64]) -> Self {
        Self::from_terms(
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| ExpTerm {
                    coef: c,
                    power: k as u32,
                    rate: 0.0,
                })
                .collect(),
        )
    }

    pub fn from_terms(mut terms: Vec<ExpTerm>) -> Self {
        terms.sort_by(|a, b| a.key_cmp(b));
        let mut merged: Vec<ExpTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.key_cmp(&t) == Ordering::Equal => last.coef += t.coef,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coef != 0.0);
        Self { terms: merged }
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms.iter().all(|t| t.rate == 0.0)
    }

    /// Constant value when the expression has no `x` dependence.
    pub fn as_constant(&self) -> Option<f64> {
        match self.terms.as_slice() {
            [] => Some(0.0),
            [t] if t.power == 0 && t.rate == 0.0 => Some(t.coef),
            _ => None,
        }
    }

    pub fn max_power(&self) -> u32 {
        self.terms.iter().map(|t| t.power).max().unwrap_or(0)
    }

    /// Distinct exponential rates in ascending order.
    pub fn rates(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self.terms.iter().map(|t| t.rate).collect();
        r.dedup();
        r
    }

    /// Ascending polynomial coefficients of the terms with the given rate.
    pub fn poly_part(&self, rate: f64) -> Vec<f64> {
        let deg = self
            .terms
            .iter()
            .filter(|t| t.rate == rate)
            .map(|t| t.power)
            .max();
        let Some(deg) = deg else {
            return Vec::new();
        };
        let mut c = vec![0.0; deg as usize + 1];
        for t in self.terms.iter().filter(|t| t.rate == rate) {
            c[t.power as usize] += t.coef;
        }
        c
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    /// `Σ |term(x)|`: the magnitude against which cancellation is judged.
    pub fn abs_eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(x).abs()).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| ExpTerm {
                    coef: t.coef * s,
                    ..*t
                })
                .collect(),
        )
    }

    pub fn derivative(&self) -> Self {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            if t.power > 0 {
                out.push(ExpTerm {
                    coef: t.coef * t.power as f64,
                    power: t.power - 1,
                    rate: t.rate,
                });
            }
            if t.rate != 0.0 {
                out.push(ExpTerm {
                    coef: t.coef * t.rate,
                    ..*t
                });
            }
        }
        Self::from_terms(out)
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                out.push(ExpTerm {
                    coef: a.coef * b.coef,
                    power: a.power + b.power,
                    rate: a.rate + b.rate,
                });
            }
        }
        Self::from_terms(out)
    }

    pub fn powi(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(1.0), |acc, _| acc.mul(self))
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// Order of vanishing at `p`: the first derivative index whose value is
    /// not negligible against its own term magnitudes. `None` when every
    /// derivative up to `max_order` vanishes.
    pub fn vanishing_order(&self, p: f64, max_order: usize) -> Option<usize> {
        let mut d = self.clone();
        for k in 0..=max_order {
            if d.is_zero() {
                return None;
            }
            let v = d.eval(p);
            let scale = d.abs_eval(p);
            if v.abs() > 1e-12 * scale {
                return Some(k);
            }
            d = d.derivative();
        }
        None
    }
}

impl std::ops::Add for &ExpPoly {
    type Output = ExpPoly;
    fn add(self, rhs: &ExpPoly) -> ExpPoly {
        let mut t = self.terms.clone();
        t.extend_from_slice(&rhs.terms);
        ExpPoly::from_terms(t)
    }
}

impl std::ops::Sub for &ExpPoly {
    type Output = ExpPoly;
    fn sub(self, rhs: &ExpPoly) -> ExpPoly {
        self + &rhs.scale(-1.0)
    }
}

impl std::ops::Neg for &ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        self.scale(-1.0)
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let mut parts: Vec<String> = Vec::new();
            let c = t.coef.abs();
            let bare = t.power > 0 || t.rate != 0.0;
            if !(bare && c == 1.0) {
                parts.push(format!("{c}"));
            }
            match t.power {
                0 => {}
                1 => parts.push("x".into()),
                k => parts.push(format!("x^{k}")),
            }
            if t.rate != 0.0 {
                parts.push(format!("exp({}*x)", t.rate));
            }
            let body = parts.join("*");
            if i == 0 {
                if t.coef < 0.0 {
                    write!(f, "-{body}")?;
                } else {
                    write!(f, "{body}")?;
                }
            } else if t.coef < 0.0 {
                write!(f, " - {body}")?;
            } else {
                write!(f, " + {body}")?;
            }
        }
        Ok(())
    }
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, v)| v * k as f64)
        .collect()
}

fn trim(mut c: Vec<f64>) -> Vec<f64> {
    while c.last() == Some(&0.0) {
        c.pop();
    }
    c
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Real roots of a polynomial in `[a, b]` by recursive isolation between
/// the critical points. Multiple roots are reported once.
fn poly_roots(c: &[f64], a: f64, b: f64) -> Vec<f64> {
    let c = trim(c.to_vec());
    if c.len() <= 1 {
        return Vec::new();
    }
    if c.len() == 2 {
        let r = -c[0] / c[1];
        return if r >= a && r <= b { vec![r] } else { Vec::new() };
    }
    let crit = poly_roots(&poly_derivative(&c), a, b);
    let m = a.abs().max(b.abs()).max(1.0);
    let scale: f64 = c
        .iter()
        .enumerate()
        .map(|(k, v)| v.abs() * m.powi(k as i32))
        .sum();
    let f = |x: f64| poly_eval(&c, x);
    let mut pts = vec![a];
    pts.extend(crit.iter().copied().filter(|x| *x > a && *x < b));
    pts.push(b);

    let mut roots = Vec::new();
    for w in pts.windows(2) {
        let (l, r) = (w[0], w[1]);
        let (fl, fr) = (f(l), f(r));
        if fl.abs() <= 1e-14 * scale {
            roots.push(l);
        } else if fr.abs() > 1e-14 * scale && (fl < 0.0) != (fr < 0.0) {
            roots.push(bisect(&f, l, r));
        }
    }
    if f(b).abs() <= 1e-14 * scale {
        roots.push(b);
    }
    dedup_sorted(roots, 1e-12 * (b - a).max(1e-300))
}

fn dedup_sorted(mut v: Vec<f64>, tol: f64) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|x, y| (*x - *y).abs() <= tol);
    v
}

/// Sample count used to bracket roots of mixed-rate expressions.
const MIXED_RATE_SAMPLES: usize = 16_384;

/// Roots found by [`ExpPoly::roots_in`], flagged when the isolation was exact
/// (single exponential rate, i.e. polynomial roots) rather than sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub roots: Vec<f64>,
    pub exact: bool,
}

impl ExpPoly {
    /// Real roots in `[a, b]`.
    ///
    /// With a single exponential rate the factor `e^{rx} > 0` drops out and
    /// the polynomial part is isolated exactly; mixed rates fall back to
    /// dense bracketing. The zero expression has no isolated roots.
    pub fn roots_in(&self, a: f64, b: f64) -> RootSet {
        let rates = self.rates();
        match rates.as_slice() {
            [] => RootSet {
                roots: Vec::new(),
                exact: true,
            },
            [r] => RootSet {
                roots: poly_roots(&self.poly_part(*r), a, b),
                exact: true,
            },
            _ => {
                let f = |x: f64| self.eval(x);
                let n = MIXED_RATE_SAMPLES;
                let xs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
                let mut roots = Vec::new();
                let mut prev = f(xs[0]);
                if prev == 0.0 {
                    roots.push(xs[0]);
                }
                for w in xs.windows(2) {
                    let fr = f(w[1]);
                    if fr == 0.0 {
                        roots.push(w[1]);
                    } else if prev != 0.0 && (prev < 0.0) != (fr < 0.0) {
                        roots.push(bisect(&f, w[0], w[1]));
                    }
                    prev = fr;
                }
                RootSet {
                    roots: dedup_sorted(roots, 1e-12 * (b - a)),
                    exact: false,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_derivative_exact() {
        for k in 1..=8u32 {
            let p = ExpPoly::monomial(1.0, k);
            let d = p.derivative().eval(0.37);
            let exact = k as f64 * 0.37_f64.powi(k as i32 - 1);
            assert!((d - exact).abs() <= 1e-14, "k = {k}");
        }
    }

    #[test]
    fn exponential_derivative_exact() {
        for c in [-2.5, -1.0, 0.3, 4.0] {
            let p = ExpPoly::exponential(1.0, c);
            let x = 0.37;
            assert!((p.derivative().eval(x) - c * (c * x).exp()).abs() <= 1e-14 * (c * x).exp().max(1.0));
        }
    }

    #[test]
    fn cancellation_leaves_zero() {
        let phi = ExpPoly::exponential(-1.0, -1.0);
        let g = &phi.derivative().scale(6.0) + &phi.scale(6.0);
        assert!(g.is_zero());
    }

    #[test]
    fn product_rule_matches() {
        let p = &ExpPoly::polynomial(&[1.0, -2.0, 0.5]) + &ExpPoly::exponential(3.0, 0.7);
        let q = ExpPoly::polynomial(&[0.0, 1.0, 1.0]);
        let lhs = p.mul(&q).derivative();
        let rhs = &p.derivative().mul(&q) + &p.mul(&q.derivative());
        for x in [0.0, 0.3, 1.7] {
            assert!((lhs.eval(x) - rhs.eval(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn polynomial_roots_including_double() {
        // (x - 0.25)² (x - 0.8)
        let p = ExpPoly::polynomial(&[-0.05, 0.4625, -1.3, 1.0]);
        let r = p.roots_in(0.0, 1.0);
        assert!(r.exact);
        assert_eq!(r.roots.len(), 2, "{:?}", r.roots);
        assert!((r.roots[0] - 0.25).abs() < 1e-7);
        assert!((r.roots[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn exponential_factor_is_ignored_for_roots() {
        // (x - 0.5) e^{-2x}
        let p = ExpPoly::from_terms(vec![
            ExpTerm { coef: 1.0, power: 1, rate: -2.0 },
            ExpTerm { coef: -0.5, power: 0, rate: -2.0 },
        ]);
        let r = p.roots_in(0.0, 1.0);
        assert_eq!(r.roots, vec![0.5]);
    }

    #[test]
    fn mixed_rates_are_bracketed() {
        // e^{x} - 2 has root ln 2
        let p = &ExpPoly::exponential(1.0, 1.0) - &ExpPoly::constant(2.0);
        let r = p.roots_in(0.0, 1.0);
        assert!(!r.exact);
        assert_eq!(r.roots.len(), 1);
        assert!((r.roots[0] - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn vanishing_orders() {
        let p = ExpPoly::monomial(4.0, 3);
        assert_eq!(p.vanishing_order(0.0, 8), Some(3));
        assert_eq!(p.vanishing_order(1.0, 8), Some(0));
        assert_eq!(ExpPoly::zero().vanishing_order(0.0, 8), None);
    }

    #[test]
    fn display_round_trips_structure() {
        let p = &ExpPoly::polynomial(&[-1.0, 0.0, 3.0]) + &ExpPoly::exponential(-1.0, -1.0);
        assert_eq!(p.to_string(), "-exp(-1*x) - 1 + 3*x^2");
    }
}
