//! Method-of-lines simulation with L1 stepping in time.
//!
//! Solves `∂ᵅ(u - a u_xx + b u_xxxx) + c u_xxx - d u_xx + τ u_x + u u_x = 0`
//! on `[0, L]` with second-order centred differences. Each sweep linearizes
//! `u u_x` (and any quadratic Robin flux) about the previous iterate `ū`,
//! solves one banded system, and repeats until the level settles.
//! `τ = 1` gives the FBB family, `τ = 0` Burgers.

mod banded;
mod monitors;
mod stepper;

pub use monitors::{
    check_max_principle, detect_blowup, monitor_capacity, monitor_gradient, simpson,
    write_run_csv, BlowupReason, BlowupReport, ContainmentVerdict, GradientSeries,
    MaxPrincipleReport, DETECTION_FACTOR,
};
pub use stepper::{simulate_burgers, simulate_fbb};

use crate::error::{Error, Result};
use crate::fracops::{FractionalOrder, TimeGrid};
use crate::testfn::TestFunction;
use serde::{Deserialize, Serialize};

/// End of the interval a graded grid clusters toward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridEnd {
    Left,
    Right,
}

/// Geometric spacing: neighbouring cells differ by `ratio`, smallest at `toward`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grading {
    pub toward: GridEnd,
    pub ratio: f64,
}

/// Grid with `m` interior points, `x_0 = 0` and `x_{m+1} = L`. Uniform by
/// default (`x_i = i h`); graded grids resolve boundary layers and support
/// only the three-point operators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    length: f64,
    m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grading: Option<Grading>,
}

#[allow(clippy::len_without_is_empty)]
impl SpatialGrid {
    pub fn new(length: f64, m: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Domain(format!("grid length must be positive, got {length}")));
        }
        if m < 8 {
            return Err(Error::Domain(format!("need at least 8 interior points, got {m}")));
        }
        Ok(Self { length, m, grading: None })
    }

    /// Geometric grid; `ratio` in `(1, 2]`, smallest cell at least `1e-12 L`.
    pub fn graded(length: f64, m: usize, toward: GridEnd, ratio: f64) -> Result<Self> {
        let base = Self::new(length, m)?;
        if !(ratio > 1.0 && ratio <= 2.0) {
            return Err(Error::Domain(format!("grading ratio must lie in (1, 2], got {ratio}")));
        }
        let grid = Self { grading: Some(Grading { toward, ratio }), ..base };
        if !(grid.min_spacing() >= 1e-12 * length) {
            return Err(Error::Domain(format!(
                "grading {ratio} with {m} points makes cells below 1e-12 L"
            )));
        }
        Ok(grid)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn interior(&self) -> usize {
        self.m
    }

    pub fn grading(&self) -> Option<Grading> {
        self.grading
    }

    pub fn is_uniform(&self) -> bool {
        self.grading.is_none()
    }

    /// The uniform spacing, or the largest cell of a graded grid.
    pub fn h(&self) -> f64 {
        match self.grading {
            None => self.length / (self.m + 1) as f64,
            Some(_) => (0..=self.m).map(|i| self.spacing(i)).fold(0.0, f64::max),
        }
    }

    pub fn min_spacing(&self) -> f64 {
        (0..=self.m).map(|i| self.spacing(i)).fold(f64::INFINITY, f64::min)
    }

    /// `x_{i+1} - x_i`.
    pub fn spacing(&self, i: usize) -> f64 {
        self.x(i + 1) - self.x(i)
    }

    /// Number of nodes including both endpoints.
    pub fn len(&self) -> usize {
        self.m + 2
    }

    pub fn x(&self, i: usize) -> f64 {
        let n = self.m + 1;
        if i == n {
            return self.length;
        }
        match self.grading {
            None => i as f64 * self.length / n as f64,
            Some(Grading { toward, ratio }) => {
                let total = ratio.powi(n as i32) - 1.0;
                let from_left = |k: usize| self.length * (ratio.powi(k as i32) - 1.0) / total;
                match toward {
                    GridEnd::Left => from_left(i),
                    GridEnd::Right => self.length - from_left(n - i),
                }
            }
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    /// Weights of `∫₀ᴸ f ≈ Σ wᵢ f(xᵢ)`: composite Simpson (3/8 on a trailing
    /// odd interval) when uniform, piecewise quadratic interpolation when graded.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let n = self.len();
        let mut w = vec![0.0; n];
        if self.is_uniform() {
            let h = self.h();
            let intervals = n - 1;
            let even = if intervals.is_multiple_of(2) { intervals } else { intervals - 3 };
            for i in 0..=even {
                let c = if i == 0 || i == even { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                w[i] += c * h / 3.0;
            }
            if even < intervals {
                for (k, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
                    w[even + k] += 3.0 * h / 8.0 * c;
                }
            }
            return w;
        }
        let xs = self.nodes();
        let mut add = |a: usize, pts: [usize; 3]| {
            for (k, wk) in lagrange_cell_weights(xs[a], xs[a + 1], pts.map(|p| xs[p]))
                .into_iter()
                .enumerate()
            {
                w[pts[k]] += wk;
            }
        };
        let mut i = 0;
        while i + 2 < n {
            add(i, [i, i + 1, i + 2]);
            add(i + 1, [i, i + 1, i + 2]);
            i += 2;
        }
        if i + 1 < n {
            add(i, [i - 1, i, i + 1]);
        }
        w
    }
}

/// `∫_a^b ℓ_k` for the quadratic Lagrange basis on `pts`, by two-point Gauss
/// (exact for the quadratic integrands).
fn lagrange_cell_weights(a: f64, b: f64, pts: [f64; 3]) -> [f64; 3] {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let g = half / 3.0_f64.sqrt();
    let mut out = [0.0; 3];
    for x in [mid - g, mid + g] {
        for k in 0..3 {
            let (p, q) = ((k + 1) % 3, (k + 2) % 3);
            out[k] += half * (x - pts[p]) * (x - pts[q]) / ((pts[k] - pts[p]) * (pts[k] - pts[q]));
        }
    }
    out
}

/// Condition at one end of the interval.
///
/// Dirichlet ends may carry a second condition (slope or curvature) for the
/// five-point stencils of the third- and fourth-order terms. Flux ends
/// prescribe `u_x = g + k1 u + k2 u²`; Neumann is the case `k1 = k2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EndCondition {
    Dirichlet {
        value: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        slope: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        curvature: Option<f64>,
    },
    Neumann {
        value: f64,
    },
    Robin {
        g: f64,
        k1: f64,
        k2: f64,
    },
}

impl EndCondition {
    pub fn dirichlet(value: f64) -> Self {
        Self::Dirichlet { value, slope: None, curvature: None }
    }

    /// `(g, k1, k2)` for flux ends.
    fn flux(&self) -> Option<(f64, f64, f64)> {
        match *self {
            Self::Neumann { value } => Some((value, 0.0, 0.0)),
            Self::Robin { g, k1, k2 } => Some((g, k1, k2)),
            Self::Dirichlet { .. } => None,
        }
    }

    fn finite(&self) -> bool {
        match *self {
            Self::Dirichlet { value, slope, curvature } => {
                value.is_finite()
                    && slope.is_none_or(f64::is_finite)
                    && curvature.is_none_or(f64::is_finite)
            }
            Self::Neumann { value } => value.is_finite(),
            Self::Robin { g, k1, k2 } => g.is_finite() && k1.is_finite() && k2.is_finite(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySet {
    pub left: EndCondition,
    pub right: EndCondition,
}

impl BoundarySet {
    pub fn homogeneous_dirichlet() -> Self {
        Self {
            left: EndCondition::dirichlet(0.0),
            right: EndCondition::dirichlet(0.0),
        }
    }

    pub fn dirichlet(left: f64, right: f64) -> Self {
        Self {
            left: EndCondition::dirichlet(left),
            right: EndCondition::dirichlet(right),
        }
    }
}

/// Robin end for `a = b = c = 0` that makes the boundary functional of the
/// FBB family vanish at that end:
/// `d u_x φ - d u φ' - u φ - u² φ / 2 = 0`, i.e.
/// `u_x = u (d φ' + φ)/(d φ) + u²/(2d)`.
pub fn flux_neutral_robin(phi: &TestFunction, d: f64, right_end: bool) -> Result<EndCondition> {
    let x = if right_end { phi.length() } else { 0.0 };
    let p = phi.eval(0, x);
    if p == 0.0 || d == 0.0 || !d.is_finite() {
        return Err(Error::Domain(
            "flux-neutral Robin end needs phi != 0 at that end and d != 0".into(),
        ));
    }
    Ok(EndCondition::Robin {
        g: 0.0,
        k1: (d * phi.eval(1, x) + p) / (d * p),
        k2: 0.5 / d,
    })
}

/// Adaptive halving for runs expected to escape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveStepping {
    pub min_dt: f64,
    /// Largest accepted `‖uⁿ - uⁿ⁻¹‖∞ / max(1, ‖uⁿ⁻¹‖∞)`.
    pub max_rel_increment: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    /// Largest number of retained time levels.
    pub memory_budget: usize,
    pub adaptive: Option<AdaptiveStepping>,
}

pub const DEFAULT_MEMORY_BUDGET: usize = 50_000;

impl SimConfig {
    pub fn fixed(dt: f64, horizon: f64) -> Self {
        Self {
            dt,
            horizon,
            memory_budget: DEFAULT_MEMORY_BUDGET,
            adaptive: None,
        }
    }

    /// Halving down to `1e-12 · horizon` with a 25 % increment limit.
    pub fn adaptive(dt: f64, horizon: f64) -> Self {
        Self {
            adaptive: Some(AdaptiveStepping {
                min_dt: 1e-12 * horizon,
                max_rel_increment: 0.25,
            }),
            ..Self::fixed(dt, horizon)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Termination {
    HorizonReached,
    SupNormEscape,
    SolverDivergence { message: String },
}

/// Stored solution levels `values[n][i] ≈ u(x_i, t_n)`.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionField {
    pub grid: SpatialGrid,
    pub times: TimeGrid,
    pub values: Vec<Vec<f64>>,
    pub memory_budget: usize,
    pub alpha: FractionalOrder,
    pub termination: Termination,
}

impl SolutionField {
    pub fn sup_norm(&self, n: usize) -> f64 {
        self.values[n].iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn last(&self) -> &[f64] {
        self.values.last().expect("field holds the initial level")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_basics() {
        let g = SpatialGrid::new(2.0, 9).unwrap();
        assert_eq!(g.len(), 11);
        assert!((g.h() - 0.2).abs() < 1e-15);
        assert_eq!(g.x(10), 2.0);
        assert!(SpatialGrid::new(1.0, 7).is_err());
        assert!(SpatialGrid::new(-1.0, 10).is_err());
    }

    #[test]
    fn graded_grid_geometry() {
        let g = SpatialGrid::graded(2.0, 30, GridEnd::Right, 1.2).unwrap();
        assert_eq!(g.x(0), 0.0);
        assert_eq!(g.x(31), 2.0);
        for i in 0..30 {
            let r = g.spacing(i) / g.spacing(i + 1);
            assert!((r - 1.2).abs() < 1e-9, "{i}: {r}");
        }
        assert!(g.min_spacing() < g.h());
        let l = SpatialGrid::graded(2.0, 30, GridEnd::Left, 1.2).unwrap();
        assert!((l.x(1) - g.spacing(30)).abs() < 1e-15);
        assert!(SpatialGrid::graded(1.0, 10, GridEnd::Left, 1.0).is_err());
        assert!(SpatialGrid::graded(1.0, 400, GridEnd::Left, 2.0).is_err());
    }

    #[test]
    fn quadrature_weights_integrate_quadratics() {
        for g in [
            SpatialGrid::new(1.5, 9).unwrap(),
            SpatialGrid::new(1.5, 10).unwrap(),
            SpatialGrid::graded(1.5, 9, GridEnd::Right, 1.3).unwrap(),
            SpatialGrid::graded(1.5, 10, GridEnd::Left, 1.3).unwrap(),
        ] {
            let w = g.quadrature_weights();
            let got: f64 = g.nodes().iter().zip(&w).map(|(x, wi)| wi * (x * x - x + 2.0)).sum();
            let want = 1.5_f64.powi(3) / 3.0 - 1.5_f64.powi(2) / 2.0 + 3.0;
            assert!((got - want).abs() < 1e-13, "{g:?}: {got} vs {want}");
        }
    }

    #[test]
    fn flux_neutral_coefficients() {
        let phi = TestFunction::parse("1 - exp(-x)", 1.0).unwrap();
        match flux_neutral_robin(&phi, 1.0, true).unwrap() {
            EndCondition::Robin { g, k1, k2 } => {
                let e = std::f64::consts::E;
                assert_eq!(g, 0.0);
                assert!((k1 - e / (e - 1.0)).abs() < 1e-14);
                assert_eq!(k2, 0.5);
            }
            other => panic!("{other:?}"),
        }
        assert!(flux_neutral_robin(&phi, 1.0, false).is_err());
    }
}
