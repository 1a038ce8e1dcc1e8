//! The comparison equation `∂ᵅu = u²`, `u(0) = u₀ > 0`.
//!
//! Its solution blows up inside the closed-form window
//! `[(Γ(α+1)/(4u₀))^{1/α}, (Γ(α+1)/u₀)^{1/α}]`. The solver below integrates
//! the equation with an implicit L1 step and must escape inside that window.

use crate::error::{Error, Result};
use crate::fracops::{gamma_known, l1_weights, CaputoHistory, FractionalOrder};
use serde::{Deserialize, Serialize};

/// Two-sided bound on the blow-up time of the comparison equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TstarWindow {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    pub u0: f64,
}

impl TstarWindow {
    pub fn contains(&self, t: f64) -> bool {
        t >= self.lower && t <= self.upper
    }

    /// Containment with relative slack on both ends.
    pub fn contains_with_slack(&self, t: f64, slack: f64) -> bool {
        t >= self.lower * (1.0 - slack) && t <= self.upper * (1.0 + slack)
    }
}

pub fn tstar_window(alpha: FractionalOrder, u0: f64) -> Result<TstarWindow> {
    if !(u0 > 0.0 && u0.is_finite()) {
        return Err(Error::Domain(format!(
            "blow-up window requires u0 > 0, got {u0}"
        )));
    }
    let a = alpha.value();
    let g = gamma_known(a + 1.0);
    let inv = 1.0 / a;
    Ok(TstarWindow {
        lower: (g / (4.0 * u0)).powf(inv),
        upper: (g / u0).powf(inv),
        alpha: a,
        u0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectionReason {
    ThresholdEscape,
    StepCollapse,
    HorizonReached,
}

/// Solver settings for [`solve_comparison_ode`].
#[derive(Debug, Clone, Copy)]
pub struct OdeConfig {
    pub alpha: FractionalOrder,
    pub u0: f64,
    /// Escape level; must be at least `100 u₀`.
    pub threshold: f64,
    pub dt0: f64,
    pub horizon: f64,
    /// Guard on the number of accepted steps (each step costs `O(n)`).
    pub max_steps: usize,
}

impl OdeConfig {
    /// Defaults: threshold `1e6 u₀`, `dt0 = upper / 2000`, horizon
    /// `2 · upper` of the closed-form window.
    pub fn with_defaults(alpha: FractionalOrder, u0: f64) -> Result<Self> {
        let w = tstar_window(alpha, u0)?;
        Ok(Self {
            alpha,
            u0,
            threshold: 1e6 * u0,
            dt0: w.upper / 2000.0,
            horizon: 2.0 * w.upper,
            max_steps: 200_000,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OdeTrajectory {
    pub history: CaputoHistory,
    pub detected_tstar: Option<f64>,
    pub detection_reason: DetectionReason,
}

const MIN_STEP: f64 = 1e-14;
const MAX_REL_INCREMENT: f64 = 0.1;
const NEWTON_MAX_ITER: usize = 50;

enum StepOutcome {
    Accepted(f64),
    /// Step too large: no real root on the continuing branch, or the
    /// increment exceeded the relative limit.
    Reject,
}

/// Integrates `∂ᵅu = u²` with the implicit L1 scheme and adaptive halving.
///
/// Each step solves `w_last (u - u_prev) + memory = u²` by Newton iteration
/// started at `u_prev`; the root reached from there is the smaller one of
/// the per-step quadratic, which continues the solution branch. A step is
/// halved whenever the relative increment exceeds 10 % or the quadratic has
/// no real root. Step sizes never grow back.
pub fn solve_comparison_ode(cfg: &OdeConfig) -> Result<OdeTrajectory> {
    let u0 = cfg.u0;
    if !(u0 > 0.0 && u0.is_finite()) {
        return Err(Error::Domain(format!("u0 must be positive, got {u0}")));
    }
    if !(cfg.threshold >= 100.0 * u0) {
        return Err(Error::Domain(format!(
            "threshold {} must be at least 100 u0 = {}",
            cfg.threshold,
            100.0 * u0
        )));
    }
    if !(cfg.dt0 > 0.0 && cfg.horizon > 0.0) {
        return Err(Error::Domain("dt0 and horizon must be positive".into()));
    }

    let alpha = cfg.alpha;
    let mut history = CaputoHistory::start(0.0, u0, alpha);
    let mut times = vec![0.0];
    let mut values = vec![u0];
    let mut dt = cfg.dt0;

    loop {
        let t_prev = *times.last().expect("non-empty");
        if t_prev >= cfg.horizon {
            return Ok(OdeTrajectory {
                history,
                detected_tstar: None,
                detection_reason: DetectionReason::HorizonReached,
            });
        }
        if values.len() > cfg.max_steps {
            return Err(Error::Solver(format!(
                "exceeded {} steps before escape or horizon",
                cfg.max_steps
            )));
        }
        match implicit_step(&mut times, &values, dt, alpha)? {
            StepOutcome::Accepted(u) => {
                let t = *times.last().expect("pushed");
                values.push(u);
                history.push(t, u)?;
                if u > cfg.threshold {
                    return Ok(OdeTrajectory {
                        history,
                        detected_tstar: Some(t),
                        detection_reason: DetectionReason::ThresholdEscape,
                    });
                }
            }
            StepOutcome::Reject => {
                dt *= 0.5;
                if dt < MIN_STEP {
                    return Ok(OdeTrajectory {
                        history,
                        detected_tstar: Some(t_prev),
                        detection_reason: DetectionReason::StepCollapse,
                    });
                }
            }
        }
    }
}

/// Tries one step of size `dt`; on acceptance the new node is left in `times`.
fn implicit_step(
    times: &mut Vec<f64>,
    values: &[f64],
    dt: f64,
    alpha: FractionalOrder,
) -> Result<StepOutcome> {
    let n = times.len();
    let u_prev = values[n - 1];
    times.push(times[n - 1] + dt);
    let w = l1_weights(times, n, alpha);
    let memory: f64 = (0..n - 1).map(|k| w[k] * (values[k + 1] - values[k])).sum();
    let c = w[n - 1];

    // g(u) = u² - c u + (c u_prev - memory)
    let q = c * u_prev - memory;
    let disc = c * c - 4.0 * q;
    if disc < 0.0 {
        times.pop();
        return Ok(StepOutcome::Reject);
    }
    let mut u = u_prev;
    let mut converged = false;
    for _ in 0..NEWTON_MAX_ITER {
        let g = u * u - c * u + q;
        let dg = 2.0 * u - c;
        if dg == 0.0 {
            break;
        }
        let du = g / dg;
        u -= du;
        if du.abs() <= 1e-14 * u.abs().max(1e-300) {
            converged = true;
            break;
        }
    }
    if !converged || !u.is_finite() {
        times.pop();
        return Err(Error::Solver(format!(
            "Newton iteration did not converge at t = {}",
            times[n - 1] + dt
        )));
    }
    // the far root belongs to the other branch of the quadratic
    if u > 0.5 * c || (u - u_prev) > MAX_REL_INCREMENT * u_prev.abs() {
        times.pop();
        return Ok(StepOutcome::Reject);
    }
    Ok(StepOutcome::Accepted(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn order(a: f64) -> FractionalOrder {
        FractionalOrder::new(a).unwrap()
    }

    #[test]
    fn classical_window() {
        let w = tstar_window(order(1.0), 1.0).unwrap();
        assert_eq!((w.lower, w.upper), (0.25, 1.0));
        let w = tstar_window(order(1.0), 2.0).unwrap();
        assert_eq!((w.lower, w.upper), (0.125, 0.5));
    }

    #[test]
    fn half_order_window() {
        let w = tstar_window(order(0.5), 1.0).unwrap();
        assert!((w.lower - PI / 64.0).abs() < 1e-12);
        assert!((w.upper - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn window_rejects_nonpositive_data() {
        assert!(tstar_window(order(0.5), 0.0).is_err());
        assert!(tstar_window(order(0.5), -1.0).is_err());
    }

    #[test]
    fn classical_blowup_time() {
        let mut cfg = OdeConfig::with_defaults(order(1.0), 1.0).unwrap();
        cfg.threshold = 1e6;
        let tr = solve_comparison_ode(&cfg).unwrap();
        let t = tr.detected_tstar.unwrap();
        assert!((t - 1.0).abs() < 0.02, "t* = {t}");
    }

    #[test]
    fn half_order_blowup_in_window() {
        let cfg = OdeConfig::with_defaults(order(0.5), 1.0).unwrap();
        let tr = solve_comparison_ode(&cfg).unwrap();
        let t = tr.detected_tstar.unwrap();
        assert!((PI / 64.0..=PI / 4.0).contains(&t), "t* = {t}");
        let s = tr.history.samples();
        assert!(s.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn tiny_data_reaches_horizon() {
        let cfg = OdeConfig {
            alpha: order(0.6),
            u0: 1e-8,
            threshold: 1e-2,
            dt0: 1e-2,
            horizon: 1.0,
            max_steps: 10_000,
        };
        let tr = solve_comparison_ode(&cfg).unwrap();
        assert_eq!(tr.detection_reason, DetectionReason::HorizonReached);
        assert!(tr.detected_tstar.is_none());
    }

    #[test]
    fn config_validation() {
        let mut cfg = OdeConfig::with_defaults(order(0.5), 1.0).unwrap();
        cfg.threshold = 10.0;
        assert!(solve_comparison_ode(&cfg).is_err());
        cfg.threshold = 1e6;
        cfg.dt0 = 0.0;
        assert!(solve_comparison_ode(&cfg).is_err());
    }
}
