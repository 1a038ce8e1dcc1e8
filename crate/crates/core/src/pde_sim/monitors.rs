//! Observers on a stored run: the capacity functional, the maximum
//! principle, the gradient functional and blow-up detection.

use super::{SolutionField, Termination};
use crate::capacity::{functional_parts, CapacityCertificate, CertificateStatus, FunctionalParts};
use crate::error::{Error, Result};
use crate::quadrature::QuadOptions;
use crate::testfn::{FamilySpec, TestFunction};
use serde::Serialize;
use std::io::Write;

/// Escape factor for both the sup-norm and `F` detectors.
pub const DETECTION_FACTOR: f64 = 1e6;
/// Slack on the upper end of the certificate window.
const CONTAINMENT_SLACK: f64 = 0.1;

/// Composite Simpson on equally spaced samples; an odd interval count closes
/// with the 3/8 rule on the last three intervals.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * h * (values[0] + values[1]),
        _ => {
            let (even, tail) = if n.is_multiple_of(2) { (n, 0.0) } else { (n - 3, three_eighths(&values[n - 3..], h)) };
            let mut s = values[0] + values[even];
            for i in 1..even {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * values[i];
            }
            s * h / 3.0 + tail
        }
    }
}

fn three_eighths(v: &[f64], h: f64) -> f64 {
    3.0 * h / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3])
}

fn check_length(field: &SolutionField, phi: &TestFunction) -> Result<()> {
    let (l, g) = (phi.length(), field.grid.length());
    if (l - g).abs() > 1e-12 * l {
        return Err(Error::Domain(format!("phi lives on [0, {l}] but the run on [0, {g}]")));
    }
    Ok(())
}

/// `F(tₙ)` for every stored level, by Simpson on the grid.
pub fn monitor_capacity(field: &SolutionField, phi: &TestFunction, spec: &FamilySpec) -> Result<Vec<f64>> {
    check_length(field, phi)?;
    match functional_parts(phi, spec, &QuadOptions::default())? {
        FunctionalParts::Linear { weight, squared, shift_density, .. } => {
            let xs = field.grid.nodes();
            let dens: Vec<(f64, f64)> = xs.iter().map(|&x| (weight.eval(x), shift_density.eval(x))).collect();
            let q = field.grid.quadrature_weights();
            Ok(field
                .values
                .iter()
                .map(|u| {
                    u.iter()
                        .zip(&dens)
                        .zip(&q)
                        .map(|((&v, &(w, s)), qi)| qi * if squared { v * v * w + s } else { v * w + s })
                        .sum()
                })
                .collect())
        }
        FunctionalParts::Gradient { nu } => {
            let FamilySpec::BurgersGrad { m_bound, .. } = *spec else {
                unreachable!("gradient parts come from the Burgers family")
            };
            Ok(monitor_gradient(field, nu, phi, m_bound)?.f)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GradientSeries {
    pub f: Vec<f64>,
    /// `‖u(tₙ)‖∞ ≤ M` at every stored level.
    pub m_valid: bool,
    pub max_abs_u: f64,
}

/// Weights of the first derivative at `x0` from values at `xs` (Fornberg's
/// recursion, orders 0 and 1 only).
fn fornberg_d1(x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    // c[j][k]: weight of xs[j] for derivative order k
    let mut c = vec![[0.0_f64; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    for i in 1..n {
        let mut c2 = 1.0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                c[i][1] = c1 * (c[i - 1][0] - (xs[i - 1] - x0) * c[i - 1][1]) / c2;
                c[i][0] = -c1 * (xs[i - 1] - x0) * c[i - 1][0] / c2;
            }
            c[j][1] = ((xs[i] - x0) * c[j][1] - c[j][0]) / c3;
            c[j][0] = (xs[i] - x0) * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|w| w[1]).collect()
}

/// Fourth-order `u_x` weights: five nearest nodes, one-sided near the ends.
fn gradient_stencils(xs: &[f64]) -> Vec<(usize, Vec<f64>)> {
    let n = xs.len();
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(2).min(n - 5);
            (start, fornberg_d1(xs[i], &xs[start..start + 5]))
        })
        .collect()
}

fn apply_gradient(stencils: &[(usize, Vec<f64>)], u: &[f64]) -> Vec<f64> {
    stencils
        .iter()
        .map(|(start, w)| w.iter().zip(&u[*start..]).map(|(a, b)| a * b).sum())
        .collect()
}

/// `F(tₙ) = ∫ v φ` with `v = -u_x - u²/(2ν)`.
pub fn monitor_gradient(field: &SolutionField, nu: f64, phi: &TestFunction, m_bound: f64) -> Result<GradientSeries> {
    check_length(field, phi)?;
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::Domain(format!("nu must be positive, got {nu}")));
    }
    let xs = field.grid.nodes();
    let q = field.grid.quadrature_weights();
    let stencils = gradient_stencils(&xs);
    let ph: Vec<f64> = xs.iter().map(|&x| phi.eval(0, x)).collect();
    let mut max_abs_u = 0.0_f64;
    let f = field
        .values
        .iter()
        .map(|u| {
            max_abs_u = u.iter().fold(max_abs_u, |m, v| m.max(v.abs()));
            let ux = apply_gradient(&stencils, u);
            (0..u.len())
                .map(|i| q[i] * (-ux[i] - u[i] * u[i] / (2.0 * nu)) * ph[i])
                .sum()
        })
        .collect();
    Ok(GradientSeries { f, m_valid: max_abs_u <= m_bound, max_abs_u })
}

#[derive(Debug, Clone, Serialize)]
pub struct MaxPrincipleReport {
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// `min u(tₙ) - lower_bound`.
    pub margins_low: Vec<f64>,
    /// `upper_bound - max u(tₙ)`.
    pub margins_high: Vec<f64>,
    pub tol: f64,
    pub passed: bool,
}

/// Bounds from `u₀` and the boundary traces, margins per stored level, and a
/// tolerance `10 (Δt_max^{2-α} + h²)(1 + ‖u₀‖∞)`.
pub fn check_max_principle(field: &SolutionField) -> MaxPrincipleReport {
    let u0 = &field.values[0];
    let last = u0.len() - 1;
    let (mut lo, mut hi) = u0.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    for u in &field.values {
        for v in [u[0], u[last]] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let nodes = field.times.nodes();
    let dt_max = nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let h = field.grid.h();
    let scale = 1.0 + u0.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = 10.0 * (dt_max.powf(2.0 - field.alpha.value()) + h * h) * scale;
    let (margins_low, margins_high): (Vec<f64>, Vec<f64>) = field
        .values
        .iter()
        .map(|u| {
            let (mn, mx) = u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            (mn - lo, hi - mx)
        })
        .unzip();
    let passed = margins_low.iter().chain(&margins_high).all(|m| *m >= -tol);
    MaxPrincipleReport { lower_bound: lo, upper_bound: hi, margins_low, margins_high, tol, passed }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlowupReason {
    SupNormEscape,
    FEscape,
    SolverDivergence,
    HorizonReached,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContainmentVerdict {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupReport {
    pub detected: bool,
    pub t_detect: Option<f64>,
    pub reason: BlowupReason,
    pub times: Vec<f64>,
    #[serde(rename = "F_series")]
    pub f_series: Option<Vec<f64>>,
    pub window_upper: Option<f64>,
    pub window_containment: ContainmentVerdict,
    /// First time `F` exceeds `10 · F(0)`, for positive `F(0)`.
    pub f_crossing: Option<f64>,
    /// `F` non-decreasing from that crossing on.
    pub f_monotone_after_crossing: Option<bool>,
}

/// Scans the stored levels in time order; the first escape wins. A solver
/// failure is timed at the last good level.
pub fn detect_blowup(field: &SolutionField, f: Option<&[f64]>, cert: Option<&CapacityCertificate>) -> BlowupReport {
    let times = field.times.nodes().to_vec();
    let sup_limit = DETECTION_FACTOR * (1.0 + field.sup_norm(0));
    let f_limit = f.and_then(|s| s.first()).map(|f0| DETECTION_FACTOR * (1.0 + f0.abs()));
    let mut hit = None;
    for n in 0..field.values.len() {
        if field.sup_norm(n) > sup_limit {
            hit = Some((times[n], BlowupReason::SupNormEscape));
            break;
        }
        if let (Some(s), Some(lim)) = (f, f_limit) {
            if s.get(n).is_some_and(|v| *v > lim || v.is_nan()) {
                hit = Some((times[n], BlowupReason::FEscape));
                break;
            }
        }
    }
    if hit.is_none() {
        if let Termination::SolverDivergence { .. } = field.termination {
            hit = Some((*times.last().expect("non-empty"), BlowupReason::SolverDivergence));
        }
    }
    let upper = cert
        .filter(|c| c.status == CertificateStatus::CertifiedBlowup)
        .and_then(|c| c.window.as_ref())
        .map(|w| w.upper);
    let horizon = *times.last().expect("non-empty");
    let window_containment = match (upper, hit) {
        (None, _) => ContainmentVerdict::NotApplicable,
        (Some(u), Some((t, _))) if t <= u * (1.0 + CONTAINMENT_SLACK) => ContainmentVerdict::Pass,
        (Some(_), Some(_)) => ContainmentVerdict::Fail,
        (Some(u), None) if horizon >= u * (1.0 + CONTAINMENT_SLACK) => ContainmentVerdict::Fail,
        (Some(_), None) => ContainmentVerdict::NotApplicable,
    };
    let (f_crossing, f_monotone_after_crossing) = match f {
        Some(s) if s.first().is_some_and(|f0| *f0 > 0.0) => {
            let target = 10.0 * s[0];
            match s.iter().position(|v| *v > target) {
                Some(k) => (Some(times[k]), Some(s[k..].windows(2).all(|w| w[1] >= w[0]))),
                None => (None, None),
            }
        }
        _ => (None, None),
    };
    BlowupReport {
        detected: hit.is_some(),
        t_detect: hit.map(|h| h.0),
        reason: hit.map_or(BlowupReason::HorizonReached, |h| h.1),
        times,
        f_series: f.map(<[f64]>::to_vec),
        window_upper: upper,
        window_containment,
        f_crossing,
        f_monotone_after_crossing,
    }
}

/// One row per stored level: `t, sup_norm, F, max_margin_low, max_margin_high`.
/// Margin columns follow [`check_max_principle`]: negative means a violation.
pub fn write_run_csv<W: Write>(out: W, field: &SolutionField, f: Option<&[f64]>) -> Result<()> {
    let mp = check_max_principle(field);
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Domain(format!("csv write failed: {e}"));
    w.write_record(["t", "sup_norm", "F", "max_margin_low", "max_margin_high"]).map_err(io)?;
    for (n, t) in field.times.nodes().iter().enumerate() {
        let fv = f.and_then(|s| s.get(n)).map_or(String::new(), |v| format!("{v:e}"));
        w.write_record([
            format!("{t:e}"),
            format!("{:e}", field.sup_norm(n)),
            fv,
            format!("{:e}", mp.margins_low[n]),
            format!("{:e}", mp.margins_high[n]),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Domain(format!("csv flush failed: {e}")))?;
    Ok(())
}
