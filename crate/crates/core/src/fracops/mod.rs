//! Fractional calculus kernel.
//!
//! Riemann–Liouville integral by product trapezoid quadrature, the Caputo
//! derivative in closed form for monomials and by the L1 scheme on sampled
//! histories, and numerical checkers for two pointwise properties of the
//! Caputo derivative: the convexity inequality `2 f ∂ᵅf ≥ ∂ᵅ(f²)` for
//! monotone `f`, and the sign of `∂ᵅf` at an interior extremum.
//!
//! For `0 < α < 1` the Caputo derivative of a `C¹` function is
//! `∂ᵅf(t) = I^{1-α} f'(t)`, i.e. the Riemann–Liouville derivative of
//! `f - f(0)`; the integer part `m` is 1 for every order handled here.

mod gamma;
mod operators;
mod properties;

pub use gamma::{gamma_fn, GAMMA_MAX_ARG};
pub(crate) use gamma::gamma_known;
pub use operators::{caputo_exact, caputo_l1, l1_weights, rl_integral};
pub use properties::{
    check_convexity_inequality, check_extremum_property, default_tol_num, ExtremumCheck,
    ExtremumStatus, ExtremumVerdict, MarginSeries,
};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Order `α ∈ (0, 1]` of a fractional operator.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::Domain(format!("alpha out of range (0, 1]: {alpha}")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_classical(self) -> bool {
        self.0 == 1.0
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FractionalOrder> for f64 {
    fn from(a: FractionalOrder) -> f64 {
        a.0
    }
}

const UNIFORM_RTOL: f64 = 1e-12;

/// Strictly increasing sequence of time nodes starting at `t0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    nodes: Vec<f64>,
    uniform: bool,
}

impl TimeGrid {
    /// `n + 1` equally spaced nodes `t0, t0 + dt, ..., t0 + n dt`.
    pub fn uniform(t0: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite() && t0.is_finite()) {
            return Err(Error::Domain(format!("uniform grid needs dt > 0, got {dt}")));
        }
        let nodes = (0..=n).map(|k| t0 + k as f64 * dt).collect();
        Ok(Self {
            nodes,
            uniform: true,
        })
    }

    /// Arbitrary strictly increasing nodes; uniformity is detected.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Domain("time grid needs at least one node".into()));
        }
        if nodes.iter().any(|t| !t.is_finite()) {
            return Err(Error::Domain("time grid nodes must be finite".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("time grid nodes must be strictly increasing".into()));
        }
        let uniform = detect_uniform(&nodes);
        Ok(Self { nodes, uniform })
    }

    pub fn t0(&self) -> f64 {
        self.nodes[0]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Spacing of a uniform grid (first spacing otherwise); `None` for a
    /// single node.
    pub fn step(&self) -> Option<f64> {
        (self.nodes.len() > 1).then(|| self.nodes[1] - self.nodes[0])
    }

    pub fn last(&self) -> f64 {
        *self.nodes.last().expect("non-empty grid")
    }

    /// Appends a node beyond the current end.
    pub fn push(&mut self, t: f64) -> Result<()> {
        let last = self.last();
        if !(t > last && t.is_finite()) {
            return Err(Error::Domain(format!(
                "appended node {t} must exceed last node {last}"
            )));
        }
        if self.uniform && self.nodes.len() > 1 {
            let h0 = self.nodes[1] - self.nodes[0];
            self.uniform = ((t - last) - h0).abs() <= UNIFORM_RTOL * h0;
        }
        self.nodes.push(t);
        Ok(())
    }
}

fn detect_uniform(nodes: &[f64]) -> bool {
    if nodes.len() < 3 {
        return true;
    }
    let h0 = nodes[1] - nodes[0];
    nodes
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h0).abs() <= UNIFORM_RTOL * h0)
}

/// Samples of a function on a time grid; the memory of every fractional
/// time-stepping scheme in this crate.
///
/// Samples can only be appended, never rewritten.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaputoHistory {
    grid: TimeGrid,
    samples: Vec<f64>,
    alpha: FractionalOrder,
}

impl CaputoHistory {
    pub fn new(grid: TimeGrid, samples: Vec<f64>, alpha: FractionalOrder) -> Result<Self> {
        if grid.len() != samples.len() {
            return Err(Error::Domain(format!(
                "{} samples for {} grid nodes",
                samples.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            samples,
            alpha,
        })
    }

    /// Samples `f` on a uniform grid over `[0, t_end]` with `n` steps.
    pub fn sample_uniform(
        f: impl Fn(f64) -> f64,
        t_end: f64,
        n: usize,
        alpha: FractionalOrder,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("need at least one step".into()));
        }
        let grid = TimeGrid::uniform(0.0, t_end / n as f64, n)?;
        let samples = grid.nodes().iter().map(|&t| f(t)).collect();
        Self::new(grid, samples, alpha)
    }

    /// Starts a history with its initial value at `t0`.
    pub fn start(t0: f64, value: f64, alpha: FractionalOrder) -> Self {
        Self {
            grid: TimeGrid {
                nodes: vec![t0],
                uniform: true,
            },
            samples: vec![value],
            alpha,
        }
    }

    pub fn push(&mut self, t: f64, value: f64) -> Result<()> {
        self.grid.push(t)?;
        self.samples.push(value);
        Ok(())
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn alpha(&self) -> FractionalOrder {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Same grid and order, new samples (used for `f²`, linear combinations).
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Self::new(self.grid.clone(), samples, self.alpha)
    }
}
