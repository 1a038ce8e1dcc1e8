use super::{gamma_known, CaputoHistory, FractionalOrder};
use crate::error::{Error, Result};
use crate::quadrature::gauss8;

/// `x^e` with the convention `0^e = 0` for every `e ≥ 0`.
///
/// The L1 weight of the last interval is the limit of the kernel integral;
/// at `α = 1` that limit requires `0^0 = 0`.
#[inline]
fn kernel_pow(x: f64, e: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x.powf(e)
    }
}

/// L1 weights at node `n` of an arbitrary grid.
///
/// Returns `w_0 .. w_{n-1}` with
/// `∂ᵅf(t_n) ≈ Σ_k w_k (f_{k+1} - f_k)` and
/// `w_k = [(t_n - t_k)^{1-α} - (t_n - t_{k+1})^{1-α}] / (Γ(2-α) (t_{k+1} - t_k))`.
///
/// The solvers use this graded form once adaptive halving has made their grid
/// non-uniform; [`caputo_l1`] itself only accepts uniform grids.
pub fn l1_weights(nodes: &[f64], n: usize, alpha: FractionalOrder) -> Vec<f64> {
    assert!(n >= 1 && n < nodes.len(), "l1_weights: node index out of range");
    let beta = 1.0 - alpha.value();
    let g = gamma_known(2.0 - alpha.value());
    let tn = nodes[n];
    (0..n)
        .map(|k| {
            let h = nodes[k + 1] - nodes[k];
            (kernel_pow(tn - nodes[k], beta) - kernel_pow(tn - nodes[k + 1], beta)) / (g * h)
        })
        .collect()
}

/// Uniform-grid L1 coefficients `b_j = j^{1-α} - (j-1)^{1-α}`, `j = 1..=n`.
fn uniform_l1_coefficients(n: usize, alpha: f64) -> Vec<f64> {
    let beta = 1.0 - alpha;
    (1..=n)
        .map(|j| kernel_pow(j as f64, beta) - kernel_pow((j - 1) as f64, beta))
        .collect()
}

/// L1 approximation of the Caputo derivative at node `n` of a uniform history.
///
/// Truncation error is `O(Δt^{2-α})` for `C²` samples; at `α = 1` the scheme
/// is exactly the backward difference.
pub fn caputo_l1(history: &CaputoHistory, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("caputo_l1 needs n >= 1 (no history at n = 0)".into()));
    }
    if n >= history.len() {
        return Err(Error::Domain(format!(
            "node index {n} beyond history of length {}",
            history.len()
        )));
    }
    let grid = history.grid();
    if !grid.is_uniform() {
        return Err(Error::UnsupportedGrid(
            "caputo_l1 supports uniform grids only".into(),
        ));
    }
    let alpha = history.alpha().value();
    let dt = grid.step().expect("n >= 1 implies two nodes");
    let f = history.samples();
    let b = uniform_l1_coefficients(n, alpha);
    // b_j multiplies the increment over interval n-j
    let mut acc = 0.0;
    for (j, bj) in b.iter().enumerate() {
        let k = n - 1 - j;
        acc += bj * (f[k + 1] - f[k]);
    }
    Ok(acc * dt.powf(-alpha) / gamma_known(2.0 - alpha))
}

/// Riemann–Liouville integral `I^α f(t_n)` by product trapezoid quadrature:
/// the kernel `(t_n - s)^{α-1}` is integrated exactly against the piecewise
/// linear interpolant of the samples. Exact for linear `f`.
pub fn rl_integral(history: &CaputoHistory, alpha: FractionalOrder, n: usize) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::Domain("rl_integral of an empty history".into()));
    }
    if n >= history.len() {
        return Err(Error::Domain(format!(
            "node index {n} beyond history of length {}",
            history.len()
        )));
    }
    let t = history.grid().nodes();
    let f = history.samples();
    let a = alpha.value();
    let tn = t[n];
    let mut acc = 0.0;
    for k in 0..n {
        let h = t[k + 1] - t[k];
        let near = tn - t[k + 1];
        let far = tn - t[k];
        let (left, right) = if near < 4.0 * h {
            panel_weights_closed(near, far, h, a)
        } else {
            panel_weights_gauss(near, far, h, a)
        };
        acc += left * f[k] + right * f[k + 1];
    }
    Ok(acc / gamma_known(a))
}

/// Exact moments for `∫_near^far τ^{α-1} ℓ(τ) dτ` with the two hat functions.
fn panel_weights_closed(near: f64, far: f64, h: f64, a: f64) -> (f64, f64) {
    let p0 = (far.powf(a) - kernel_pow(near, a)) / a;
    let p1 = (far.powf(a + 1.0) - kernel_pow(near, a + 1.0)) / (a + 1.0);
    // f_k pairs with (τ - near)/h, f_{k+1} with (far - τ)/h
    ((p1 - near * p0) / h, (far * p0 - p1) / h)
}

/// Same moments by an 8-point rule; the kernel is analytic on panels away from
/// `t_n`, where the closed form suffers cancellation.
fn panel_weights_gauss(near: f64, far: f64, h: f64, a: f64) -> (f64, f64) {
    let rule = gauss8();
    let mut left = 0.0;
    let mut right = 0.0;
    let mid = 0.5 * (near + far);
    let half = 0.5 * h;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let tau = mid + half * x;
        let k = tau.powf(a - 1.0) * w * half;
        left += k * (tau - near) / h;
        right += k * (far - tau) / h;
    }
    (left, right)
}

/// Closed-form Caputo derivative of `t^p`:
/// `Γ(p+1) / Γ(p+1-α) · t^{p-α}` for `p > 0`, zero for `p = 0`.
pub fn caputo_exact(p: f64, alpha: FractionalOrder, t: f64) -> Result<f64> {
    if !(p >= 0.0 && p.is_finite()) {
        return Err(Error::Domain(format!("monomial power must be >= 0, got {p}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let a = alpha.value();
    let e = p - a;
    if t == 0.0 && e < 0.0 {
        return Err(Error::Domain(format!(
            "derivative of t^{p} of order {a} is unbounded at t = 0"
        )));
    }
    let g_num = super::gamma_fn(p + 1.0)?;
    let g_den = super::gamma_fn(p + 1.0 - a)?;
    let power = if e == 0.0 { 1.0 } else { kernel_pow(t, e) };
    Ok(g_num / g_den * power)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::{gamma_fn, TimeGrid};

    fn order(a: f64) -> FractionalOrder {
        FractionalOrder::new(a).unwrap()
    }

    #[test]
    fn caputo_of_constant_is_zero() {
        let h = CaputoHistory::sample_uniform(|_| 5.0, 1.0, 40, order(0.4)).unwrap();
        for n in 1..h.len() {
            assert_eq!(caputo_l1(&h, n).unwrap(), 0.0);
        }
    }

    #[test]
    fn caputo_l1_exact_for_linear() {
        // ∂^α t = t^{1-α} / Γ(2-α); at t = 1 and α = 1/2: 1/Γ(3/2)
        let h = CaputoHistory::sample_uniform(|t| t, 1.0, 64, order(0.5)).unwrap();
        let expected = 1.0 / (std::f64::consts::PI.sqrt() / 2.0);
        assert!((caputo_l1(&h, 64).unwrap() - expected).abs() < 1e-12);
        assert!((expected - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-15);
    }

    #[test]
    fn caputo_l1_square_approaches_closed_form() {
        let expected = 2.0 / gamma_fn(2.5).unwrap();
        assert!((expected - 1.504_505_556_1).abs() < 1e-9);
        let mut prev = f64::INFINITY;
        for n in [32, 64, 128, 256] {
            let h = CaputoHistory::sample_uniform(|t| t * t, 1.0, n, order(0.5)).unwrap();
            let err = (caputo_l1(&h, n).unwrap() - expected).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn classical_limit_is_backward_difference() {
        let f = |t: f64| (2.0 * t).sin() + t * t;
        let h = CaputoHistory::sample_uniform(f, 2.0, 50, order(1.0)).unwrap();
        let dt = 2.0 / 50.0;
        for n in 1..=50 {
            let s = h.samples();
            let bd = (s[n] - s[n - 1]) / dt;
            assert!((caputo_l1(&h, n).unwrap() - bd).abs() < 1e-12 * bd.abs().max(1.0));
        }
    }

    #[test]
    fn caputo_l1_errors() {
        let h = CaputoHistory::sample_uniform(|t| t, 1.0, 4, order(0.5)).unwrap();
        assert!(matches!(caputo_l1(&h, 0), Err(Error::Domain(_))));
        assert!(caputo_l1(&h, 5).is_err());
        let g = TimeGrid::from_nodes(vec![0.0, 0.1, 0.3, 0.35]).unwrap();
        let nh = CaputoHistory::new(g, vec![0.0, 1.0, 2.0, 3.0], order(0.5)).unwrap();
        assert!(matches!(caputo_l1(&nh, 2), Err(Error::UnsupportedGrid(_))));
    }

    #[test]
    fn graded_weights_match_uniform_formula() {
        let a = order(0.35);
        let h = CaputoHistory::sample_uniform(|t| t.powi(3) - t, 1.5, 30, a).unwrap();
        let w = l1_weights(h.grid().nodes(), 30, a);
        let s = h.samples();
        let graded: f64 = w.iter().enumerate().map(|(k, wk)| wk * (s[k + 1] - s[k])).sum();
        let uniform = caputo_l1(&h, 30).unwrap();
        assert!((graded - uniform).abs() < 1e-11 * uniform.abs().max(1.0));
    }

    #[test]
    fn rl_integral_examples() {
        let h = CaputoHistory::sample_uniform(|_| 1.0, 2.0, 10, order(1.0)).unwrap();
        assert!((rl_integral(&h, order(1.0), 10).unwrap() - 2.0).abs() < 1e-14);

        // constant c: c t^α / Γ(α+1), for several orders
        for a in [0.2, 0.5, 0.9] {
            let h = CaputoHistory::sample_uniform(|_| 3.0, 1.7, 200, order(a)).unwrap();
            let exact = 3.0 * 1.7_f64.powf(a) / gamma_fn(a + 1.0).unwrap();
            let got = rl_integral(&h, order(a), 200).unwrap();
            assert!(((got - exact) / exact).abs() < 1e-13, "a = {a}: {got} vs {exact}");
        }

        // I^{1/2} t = t^{3/2}/Γ(5/2) = 4/(3√π) at t = 1
        let h = CaputoHistory::sample_uniform(|t| t, 1.0, 100, order(0.5)).unwrap();
        let exact = 4.0 / (3.0 * std::f64::consts::PI.sqrt());
        assert!((exact - 0.752_25).abs() < 1e-5);
        assert!((rl_integral(&h, order(0.5), 100).unwrap() - exact).abs() < 1e-13);
        assert_eq!(rl_integral(&h, order(0.5), 0).unwrap(), 0.0);
    }

    #[test]
    fn caputo_exact_examples() {
        assert_eq!(caputo_exact(0.0, order(0.5), 2.0).unwrap(), 0.0);
        assert!((caputo_exact(1.0, order(0.5), 1.0).unwrap() - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-14);
        assert!((caputo_exact(2.0, order(1.0), 3.0).unwrap() - 6.0).abs() < 1e-13);
        assert!(caputo_exact(-1.0, order(0.5), 1.0).is_err());
        assert!(caputo_exact(0.2, order(0.5), 0.0).is_err());
    }
}
