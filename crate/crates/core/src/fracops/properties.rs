use super::{caputo_l1, CaputoHistory};
use crate::error::{Error, Result};
use serde::Serialize;

/// Truncation-aware tolerance `10 · Δt^{2-α} · scale²` used by the property
/// checkers, where `scale` is the sup-norm of the samples (at least 1).
pub fn default_tol_num(history: &CaputoHistory) -> f64 {
    let dt = history.grid().step().unwrap_or(0.0);
    let alpha = history.alpha().value();
    let scale = history
        .samples()
        .iter()
        .fold(1.0_f64, |m, v| m.max(v.abs()));
    10.0 * dt.powf(2.0 - alpha) * scale * scale
}

/// Per-node margins of a checked inequality together with the tolerance they
/// were judged against. `margins[i]` belongs to node `i + 1`.
#[derive(Debug, Clone, Serialize)]
pub struct MarginSeries {
    pub margins: Vec<f64>,
    pub tol_num: f64,
}

impl MarginSeries {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn holds(&self) -> bool {
        self.margins.iter().all(|m| *m >= -self.tol_num)
    }
}

fn monotone(samples: &[f64]) -> bool {
    let up = samples.windows(2).all(|w| w[1] >= w[0]);
    let down = samples.windows(2).all(|w| w[1] <= w[0]);
    up || down
}

/// Margins `2 f(t_n) ∂ᵅf(t_n) - ∂ᵅ(f²)(t_n)` for a monotone history, both
/// derivatives taken with the L1 scheme.
pub fn check_convexity_inequality(history: &CaputoHistory) -> Result<MarginSeries> {
    if history.len() < 2 {
        return Err(Error::Precondition("need at least two samples".into()));
    }
    if !monotone(history.samples()) {
        return Err(Error::Precondition("samples are not monotone".into()));
    }
    let squared = history.with_samples(history.samples().iter().map(|v| v * v).collect())?;
    let f = history.samples();
    let mut margins = Vec::with_capacity(history.len() - 1);
    for n in 1..history.len() {
        let lhs = 2.0 * f[n] * caputo_l1(history, n)?;
        let rhs = caputo_l1(&squared, n)?;
        margins.push(lhs - rhs);
    }
    Ok(MarginSeries {
        margins,
        tol_num: default_tol_num(history),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtremumStatus {
    Pass,
    Fail,
    NotApplicable,
}

/// Signed L1 derivative at one extremum.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExtremumCheck {
    pub node: usize,
    pub time: f64,
    pub derivative: f64,
    pub status: ExtremumStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremumVerdict {
    pub max: ExtremumCheck,
    pub min: ExtremumCheck,
    pub tol_num: f64,
    pub status: ExtremumStatus,
}

/// Locates the argmax and argmin of the samples over `(t0, T]` and checks
/// `∂ᵅf ≥ -tol` at the maximum and `∂ᵅf ≤ tol` at the minimum.
///
/// An extremum attained only at `t0` makes that half of the check
/// not applicable. Ties prefer the latest node.
pub fn check_extremum_property(history: &CaputoHistory) -> Result<ExtremumVerdict> {
    if history.len() < 2 {
        return Err(Error::Precondition("need at least two samples".into()));
    }
    let f = history.samples();
    let t = history.grid().nodes();
    let tol = default_tol_num(history);

    let mut imax = 1;
    let mut imin = 1;
    for i in 1..f.len() {
        if f[i] >= f[imax] {
            imax = i;
        }
        if f[i] <= f[imin] {
            imin = i;
        }
    }

    let max = if f[0] > f[imax] {
        ExtremumCheck {
            node: 0,
            time: t[0],
            derivative: f64::NAN,
            status: ExtremumStatus::NotApplicable,
        }
    } else {
        let d = caputo_l1(history, imax)?;
        ExtremumCheck {
            node: imax,
            time: t[imax],
            derivative: d,
            status: if d >= -tol {
                ExtremumStatus::Pass
            } else {
                ExtremumStatus::Fail
            },
        }
    };
    let min = if f[0] < f[imin] {
        ExtremumCheck {
            node: 0,
            time: t[0],
            derivative: f64::NAN,
            status: ExtremumStatus::NotApplicable,
        }
    } else {
        let d = caputo_l1(history, imin)?;
        ExtremumCheck {
            node: imin,
            time: t[imin],
            derivative: d,
            status: if d <= tol {
                ExtremumStatus::Pass
            } else {
                ExtremumStatus::Fail
            },
        }
    };

    use ExtremumStatus::*;
    let status = match (max.status, min.status) {
        (Fail, _) | (_, Fail) => Fail,
        (NotApplicable, NotApplicable) => NotApplicable,
        _ => Pass,
    };
    Ok(ExtremumVerdict {
        max,
        min,
        tol_num: tol,
        status,
    })
}
