//! Gauss–Legendre rules and adaptive composite quadrature.
//!
//! Panels use a fixed 16-node rule. A panel is accepted when its estimate
//! agrees with the sum over its two halves to the requested relative
//! tolerance; otherwise both halves are refined independently.

use crate::error::{Error, Result};
use std::sync::OnceLock;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Tricomi initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Applies the rule on `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, f: &mut impl FnMut(f64) -> f64) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub(crate) fn gauss16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

pub(crate) fn gauss8() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(8))
}

/// Options for [`adaptive_gauss_legendre`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    /// Absolute floor so that integrals equal to zero terminate.
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-15,
            max_depth: 40,
        }
    }
}

/// Adaptive composite 16-node Gauss–Legendre quadrature of `f` over `[a, b]`.
pub fn adaptive_gauss_legendre(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    opts: QuadOptions,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let rule = gauss16();
    let whole = rule.integrate(a, b, &mut f);
    if !whole.is_finite() {
        return Err(Error::Quadrature {
            a,
            b,
            estimate: whole,
            error: f64::INFINITY,
        });
    }
    let width = b - a;
    let mut total = 0.0;
    let mut stack = vec![(a, b, whole, 0u32)];
    // global scale for the relative criterion, refined as panels are accepted
    let scale = whole.abs();
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(lo, mid, &mut f);
        let right = rule.integrate(mid, hi, &mut f);
        let refined = left + right;
        if !refined.is_finite() {
            return Err(Error::Quadrature {
                a: lo,
                b: hi,
                estimate: refined,
                error: f64::INFINITY,
            });
        }
        let err = (refined - est).abs();
        let frac = (hi - lo) / width;
        let local_tol = (opts.rel_tol * scale.max(refined.abs())).max(opts.abs_tol) * frac.sqrt();
        if err <= local_tol || err <= 4.0 * f64::EPSILON * refined.abs() {
            total += refined;
        } else if depth >= opts.max_depth {
            return Err(Error::Quadrature {
                a: lo,
                b: hi,
                estimate: refined,
                error: err,
            });
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_high_degree_polynomials_exactly() {
        let rule = GaussLegendre::new(16);
        let s: f64 = rule.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // degree 31 is the exactness limit for 16 nodes
        let v = rule.integrate(0.0, 1.0, &mut |x: f64| x.powi(31));
        assert!((v - 1.0 / 32.0).abs() < 1e-15);
        let v = rule.integrate(0.0, 1.0, &mut |x: f64| x.powi(30));
        assert!((v - 1.0 / 31.0).abs() < 1e-15);
    }

    #[test]
    fn odd_rule_has_zero_center() {
        let rule = GaussLegendre::new(5);
        assert_eq!(rule.nodes[2], 0.0);
        let v = rule.integrate(-1.0, 1.0, &mut |x: f64| x.powi(8));
        assert!((v - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let f = |x: f64| 1.0 / (1e-4 + (x - 0.3) * (x - 0.3));
        let exact = (0.7 / 1e-2_f64).atan() / 1e-2 + (0.3 / 1e-2_f64).atan() / 1e-2;
        let v = adaptive_gauss_legendre(f, 0.0, 1.0, QuadOptions::default()).unwrap();
        assert!(((v - exact) / exact).abs() < 1e-11, "{v} vs {exact}");
    }

    #[test]
    fn adaptive_zero_integral_terminates() {
        let v = adaptive_gauss_legendre(|x: f64| (x - 0.5).powi(3), 0.0, 1.0, QuadOptions::default())
            .unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn adaptive_rejects_non_integrable() {
        let r = adaptive_gauss_legendre(|x: f64| 1.0 / x, 0.0, 1.0, QuadOptions::default());
        assert!(r.is_err());
    }
}
