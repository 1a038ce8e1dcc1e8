//! Certificates of finite-time blow-up by the nonlinear capacity method.
//!
//! For each family the test function `φ` turns the equation into
//! `∂ᵅF ≥ F²/θ₂ + Φ(t) - θ₁`. With `F̃ = F/θ₂` and `Φ ≥ θ₁` this becomes
//! `∂ᵅF̃ ≥ F̃²`, so `F` escapes no later than the comparison equation started
//! at `F(0)/θ₂`.

mod audit;

pub use audit::{audit_reference_examples, AuditRow, ConditionForm};

use crate::blowup_ode::{tstar_window, TstarWindow};
use crate::error::{Error, Result};
use crate::fracops::FractionalOrder;
use crate::quadrature::{adaptive_gauss_legendre, gauss16, QuadOptions};
use crate::testfn::{
    capacity_forms, check_hypotheses, parse_expr, theta_pair_with, CapacityForms, ExpPoly,
    FamilySpec, HypothesisVerdict, Ratio, TestFunction, ThetaPair, HYPOTHESIS_GRID,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Initial profile `u₀` on `[0, L]`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    ClosedForm { source: String, expr: ExpPoly },
    /// Values on a uniform grid covering `[0, L]` (both endpoints included),
    /// interpolated linearly.
    Sampled { length: f64, values: Vec<f64> },
}

impl InitialData {
    pub fn parse(src: &str) -> Result<Self> {
        Ok(Self::ClosedForm {
            source: src.trim().to_string(),
            expr: parse_expr(src)?,
        })
    }

    pub fn zero() -> Self {
        Self::ClosedForm {
            source: "0".into(),
            expr: ExpPoly::zero(),
        }
    }

    pub fn sampled(length: f64, values: Vec<f64>) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Domain(format!("sample length must be positive, got {length}")));
        }
        if values.len() < 2 || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(
                "sampled initial data needs at least two finite values".into(),
            ));
        }
        Ok(Self::Sampled { length, values })
    }

    pub fn regularity(&self) -> &'static str {
        match self {
            Self::ClosedForm { .. } => "closed-form",
            Self::Sampled { .. } => "piecewise-linear",
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::ClosedForm { source, .. } => source.clone(),
            Self::Sampled { values, .. } => format!("sampled ({} points)", values.len()),
        }
    }

    fn locate(length: f64, n: usize, x: f64) -> (usize, f64) {
        let h = length / (n - 1) as f64;
        let i = ((x / h).floor() as isize).clamp(0, n as isize - 2) as usize;
        (i, h)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::ClosedForm { expr, .. } => expr.eval(x),
            Self::Sampled { length, values } => {
                let (i, h) = Self::locate(*length, values.len(), x);
                let s = (x - i as f64 * h) / h;
                values[i] + s * (values[i + 1] - values[i])
            }
        }
    }

    /// `u₀'` (exact for closed forms, the interval slope for samples).
    pub fn slope(&self, x: f64) -> f64 {
        match self {
            Self::ClosedForm { expr, .. } => expr.derivative().eval(x),
            Self::Sampled { length, values } => {
                let (i, h) = Self::locate(*length, values.len(), x);
                (values[i + 1] - values[i]) / h
            }
        }
    }

    fn check_domain(&self, length: f64) -> Result<()> {
        match self {
            Self::Sampled { length: l, .. } if (l - length).abs() > 1e-12 * length => Err(
                Error::Domain(format!("initial data covers [0, {l}] but phi lives on [0, {length}]")),
            ),
            _ => Ok(()),
        }
    }

    /// `∫₀ᴸ g(x, u₀, u₀')`, split at the sample nodes for sampled data.
    fn integrate<G: Fn(f64, f64, f64) -> f64>(&self, length: f64, g: G, opts: &QuadOptions) -> Result<f64> {
        match self {
            Self::ClosedForm { expr, .. } => {
                let d = expr.derivative();
                adaptive_gauss_legendre(|x| g(x, expr.eval(x), d.eval(x)), 0.0, length, *opts)
            }
            Self::Sampled { values, .. } => {
                // linear data times a smooth weight: a 16-point rule per cell
                let rule = gauss16();
                let n = values.len();
                let h = length / (n - 1) as f64;
                let mut acc = 0.0;
                for i in 0..n - 1 {
                    let a = i as f64 * h;
                    let slope = (values[i + 1] - values[i]) / h;
                    acc += rule.integrate(a, a + h, &mut |x| {
                        g(x, values[i] + slope * (x - a), slope)
                    });
                }
                Ok(acc)
            }
        }
    }
}

/// The additive shift that turns `u` into the field `v` used in `F`.
#[derive(Debug, Clone)]
pub enum ShiftedOffset {
    /// `v = u + offset` (or `v² = u² + offset` when `squared`).
    Additive { offset: Ratio, squared: bool },
    /// `v = -u' - u²/(2ν)`.
    GradientRecipe { nu: f64 },
}

impl ShiftedOffset {
    /// Offset value at `x`; zero for the gradient recipe, which has none.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Additive { offset, .. } => offset.eval(x),
            Self::GradientRecipe { .. } => 0.0,
        }
    }
}

pub fn shifted_field_offset(phi: &TestFunction, spec: &FamilySpec) -> Result<ShiftedOffset> {
    spec.validate()?;
    match capacity_forms(phi, spec) {
        CapacityForms::Ratio {
            offset_num,
            den,
            squared,
            ..
        } => Ok(ShiftedOffset::Additive {
            offset: Ratio::allowing_endpoint_poles(offset_num, den, phi.length())?,
            squared,
        }),
        CapacityForms::Gradient { nu, .. } => Ok(ShiftedOffset::GradientRecipe { nu }),
    }
}

/// The pieces needed to evaluate `F` for any field `u`:
/// `F = ∫ u·w` (or `u²·w`) `+ shift_integral`, or the gradient form.
#[derive(Debug, Clone)]
pub(crate) enum FunctionalParts {
    Linear {
        weight: ExpPoly,
        squared: bool,
        /// `offset · weight`, continuously extended at the endpoints.
        shift_density: Ratio,
        shift_integral: f64,
    },
    Gradient { nu: f64 },
}

pub(crate) fn functional_parts(
    phi: &TestFunction,
    spec: &FamilySpec,
    opts: &QuadOptions,
) -> Result<FunctionalParts> {
    spec.validate()?;
    match capacity_forms(phi, spec) {
        CapacityForms::Ratio {
            offset_num,
            den,
            weight,
            squared,
            ..
        } => {
            let shift_density = Ratio::new(offset_num.mul(&weight), den, phi.length())?;
            let shift_integral = shift_density.integrate(opts)?;
            Ok(FunctionalParts::Linear {
                weight,
                squared,
                shift_density,
                shift_integral,
            })
        }
        CapacityForms::Gradient { nu, .. } => Ok(FunctionalParts::Gradient { nu }),
    }
}

pub fn capacity_f0(phi: &TestFunction, spec: &FamilySpec, u0: &InitialData) -> Result<f64> {
    capacity_f0_with(phi, spec, u0, &QuadOptions::default())
}

/// `F(0)` for the family's functional, by the same quadrature engine as θ.
pub fn capacity_f0_with(
    phi: &TestFunction,
    spec: &FamilySpec,
    u0: &InitialData,
    opts: &QuadOptions,
) -> Result<f64> {
    let l = phi.length();
    u0.check_domain(l)?;
    match functional_parts(phi, spec, opts)? {
        FunctionalParts::Linear {
            weight,
            squared,
            shift_integral,
            ..
        } => {
            let data = u0.integrate(
                l,
                |x, u, _| if squared { u * u * weight.eval(x) } else { u * weight.eval(x) },
                opts,
            )?;
            Ok(data + shift_integral)
        }
        FunctionalParts::Gradient { nu } => {
            let v = u0.integrate(l, |x, u, du| (du + u * u / (2.0 * nu)) * phi.eval(0, x), opts)?;
            Ok(-v)
        }
    }
}

/// Asserted lower bound on the boundary functional `Φ(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundaryFunctional {
    Zero,
    Constant { value: f64 },
    Sampled { times: Vec<f64>, values: Vec<f64> },
}

impl BoundaryFunctional {
    pub fn infimum(&self) -> Result<f64> {
        match self {
            Self::Zero => Ok(0.0),
            Self::Constant { value } if value.is_finite() => Ok(*value),
            Self::Constant { value } => Err(Error::Domain(format!("non-finite boundary bound {value}"))),
            Self::Sampled { times, values } => {
                if values.is_empty() || times.len() != values.len() {
                    return Err(Error::Domain(
                        "sampled boundary bound needs matching, non-empty times and values".into(),
                    ));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Domain("non-finite sample in boundary bound".into()));
                }
                Ok(values.iter().copied().fold(f64::INFINITY, f64::min))
            }
        }
    }

    /// `Φ` is linear in `φ`, so scaling the test function scales the bound.
    pub fn scaled(&self, lambda: f64) -> Self {
        match self {
            Self::Zero => Self::Zero,
            Self::Constant { value } => Self::Constant { value: lambda * value },
            Self::Sampled { times, values } => Self::Sampled {
                times: times.clone(),
                values: values.iter().map(|v| lambda * v).collect(),
            },
        }
    }

    fn describe(&self) -> &'static str {
        match self {
            Self::Zero => "asserted: boundary terms vanish identically",
            Self::Constant { .. } => "asserted: constant lower bound",
            Self::Sampled { .. } => "asserted: minimum of a sampled lower bound",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateStatus {
    #[serde(rename = "certified-blowup")]
    CertifiedBlowup,
    #[serde(rename = "hypotheses-fail")]
    HypothesesFail,
    #[serde(rename = "F0-nonpositive")]
    F0Nonpositive,
}

/// `inf Φ ≥ θ₁` up to a relative rounding allowance on the computed θ₁.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryVerdict {
    pub inf_phi: Option<f64>,
    pub theta1: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacityCertificate {
    pub family: FamilySpec,
    pub phi: String,
    pub length: f64,
    pub alpha: f64,
    pub initial_data: String,
    pub thetas: Option<ThetaPair>,
    #[serde(rename = "F0")]
    pub f0: Option<f64>,
    pub hypothesis_verdicts: Vec<HypothesisVerdict>,
    pub phi_minus_theta1_nonneg: BoundaryVerdict,
    pub window: Option<TstarWindow>,
    pub status: CertificateStatus,
    pub provenance: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

/// Relative slack granted to `inf Φ ≥ θ₁`; θ₁ carries quadrature rounding.
const THETA1_SLACK: f64 = 1e-10;

pub fn build_certificate(
    phi: &TestFunction,
    spec: &FamilySpec,
    u0: &InitialData,
    boundary: &BoundaryFunctional,
    alpha: FractionalOrder,
) -> CapacityCertificate {
    build_certificate_with(phi, spec, u0, boundary, alpha, &QuadOptions::default())
}

/// Runs every check and returns exactly one status. Failures never raise;
/// they are recorded in the verdicts and `warnings`.
pub fn build_certificate_with(
    phi: &TestFunction,
    spec: &FamilySpec,
    u0: &InitialData,
    boundary: &BoundaryFunctional,
    alpha: FractionalOrder,
    opts: &QuadOptions,
) -> CapacityCertificate {
    let mut warnings = Vec::new();
    let mut provenance = BTreeMap::new();
    let quad = format!(
        "adaptive Gauss-Legendre, 16-node panels, relative tolerance {:e}",
        opts.rel_tol
    );

    let spec_ok = match spec.validate() {
        Ok(()) => true,
        Err(e) => {
            warnings.push(format!("family: {e}"));
            false
        }
    };
    let hypothesis_verdicts = check_hypotheses(phi, spec);
    provenance.insert(
        "hypothesis_verdicts".into(),
        format!("pointwise on a {HYPOTHESIS_GRID}-interval grid plus critical points and roots"),
    );

    let thetas = if spec_ok {
        match theta_pair_with(phi, spec, opts) {
            Ok(t) => Some(t),
            Err(e) => {
                warnings.push(format!("theta: {e}"));
                None
            }
        }
    } else {
        None
    };
    provenance.insert("thetas".into(), quad.clone());

    let f0 = if spec_ok {
        match capacity_f0_with(phi, spec, u0, opts) {
            Ok(v) => Some(v),
            Err(e) => {
                warnings.push(format!("F0: {e}"));
                None
            }
        }
    } else {
        None
    };
    provenance.insert("F0".into(), format!("{quad}; initial data {}", u0.regularity()));

    if let (FamilySpec::Mkdv { .. }, Ok(ShiftedOffset::Additive { offset, .. })) =
        (spec, shifted_field_offset(phi, spec))
    {
        let l = phi.length();
        let worst = (0..=HYPOTHESIS_GRID)
            .map(|i| l * i as f64 / HYPOTHESIS_GRID as f64)
            .map(|x| u0.eval(x).powi(2) + offset.eval(x))
            .fold(f64::INFINITY, f64::min);
        if worst < 0.0 {
            warnings.push(format!(
                "u0^2 + offset reaches {worst:.3e} < 0: the squared shifted field is negative somewhere"
            ));
        }
    }

    let inf_phi = match boundary.infimum() {
        Ok(v) => Some(v),
        Err(e) => {
            warnings.push(format!("boundary: {e}"));
            None
        }
    };
    provenance.insert("inf_phi".into(), boundary.describe().into());
    let theta1 = thetas.map(|t| t.theta1);
    let tolerance = THETA1_SLACK * theta1.map_or(1.0, |t| t.abs().max(1.0));
    let boundary_ok = matches!((inf_phi, theta1), (Some(p), Some(t)) if p >= t - tolerance);
    let phi_minus_theta1_nonneg = BoundaryVerdict {
        inf_phi,
        theta1,
        tolerance,
        passed: boundary_ok,
    };

    let hyps_ok = spec_ok && hypothesis_verdicts.iter().all(|h| h.passed) && thetas.is_some();
    let mut window = None;
    let status = match (hyps_ok && boundary_ok, thetas.as_ref(), f0) {
        (true, _, Some(f)) if f <= 0.0 => CertificateStatus::F0Nonpositive,
        (true, Some(t), Some(f)) => match tstar_window(alpha, f / t.theta2) {
            Ok(w) => {
                window = Some(w);
                CertificateStatus::CertifiedBlowup
            }
            Err(e) => {
                warnings.push(format!("window: {e}"));
                CertificateStatus::HypothesesFail
            }
        },
        _ => CertificateStatus::HypothesesFail,
    };
    provenance.insert(
        "window".into(),
        "closed-form comparison window evaluated at F0 / theta2".into(),
    );

    CapacityCertificate {
        family: *spec,
        phi: phi.source().to_string(),
        length: phi.length(),
        alpha: alpha.value(),
        initial_data: u0.describe(),
        thetas,
        f0,
        hypothesis_verdicts,
        phi_minus_theta1_nonneg,
        window,
        status,
        provenance,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tf(s: &str) -> TestFunction {
        TestFunction::parse(s, 1.0).unwrap()
    }

    const ROSENAU: FamilySpec = FamilySpec::Fbb { a: 0.0, b: 1.0, c: 0.0, d: 0.0 };

    #[test]
    fn offsets() {
        let o = shifted_field_offset(&tf("x-1"), &ROSENAU).unwrap();
        assert_eq!(o.eval(0.3), 1.0);
        let o = shifted_field_offset(&tf("x"), &FamilySpec::camassa_holm(1.5)).unwrap();
        assert!((o.eval(0.3) - 1.0).abs() < 1e-15);
        let o = shifted_field_offset(&tf("x^2"), &FamilySpec::Ost { a: 1.0, b: -1.0 }).unwrap();
        assert_eq!(o.eval(0.7), 1.0);
    }

    #[test]
    fn rosenau_f0() {
        // ∫ u0 (x-1) = 0.6 with u0 = -3.6 x
        let f0 = capacity_f0(&tf("x-1"), &ROSENAU, &InitialData::parse("-3.6*x").unwrap()).unwrap();
        assert!((f0 - 0.1).abs() < 1e-13);
        let f0 = capacity_f0(&tf("x-1"), &ROSENAU, &InitialData::zero()).unwrap();
        assert!((f0 + 0.5).abs() < 1e-14);
    }

    #[test]
    fn ch_and_mkdv_f0_with_zero_data() {
        let k = 1.3;
        let f0 = capacity_f0(&tf("x"), &FamilySpec::camassa_holm(k), &InitialData::zero()).unwrap();
        assert!((f0 - k / 3.0).abs() < 1e-14);
        let f0 = capacity_f0(&tf("-exp(-x)"), &FamilySpec::Mkdv { a: 2.0, b: 3.0 }, &InitialData::zero()).unwrap();
        assert!((f0 - (1.0 - (-1f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn sampled_matches_closed_form_for_linear_data() {
        let closed = InitialData::parse("2 - 3*x").unwrap();
        let values: Vec<f64> = (0..=40).map(|i| 2.0 - 3.0 * i as f64 / 40.0).collect();
        let sampled = InitialData::sampled(1.0, values).unwrap();
        let spec = FamilySpec::BurgersGrad { nu: 0.5, m_bound: 3.0 };
        let phi = tf("x^2*(1-x)^2");
        let a = capacity_f0(&phi, &spec, &closed).unwrap();
        let b = capacity_f0(&phi, &spec, &sampled).unwrap();
        assert!((a - b).abs() < 1e-13, "{a} vs {b}");
    }

    #[test]
    fn rosenau_certificate_and_statuses() {
        let alpha = FractionalOrder::new(0.5).unwrap();
        let bc = BoundaryFunctional::Constant { value: 0.5 };
        let c = build_certificate(&tf("x-1"), &ROSENAU, &InitialData::parse("-3.6*x").unwrap(), &bc, alpha);
        assert_eq!(c.status, CertificateStatus::CertifiedBlowup);
        let w = c.window.unwrap();
        let t = c.thetas.unwrap();
        let exact = tstar_window(alpha, c.f0.unwrap() / t.theta2).unwrap();
        assert_eq!(w, exact);

        let c = build_certificate(&tf("x-1"), &ROSENAU, &InitialData::zero(), &bc, alpha);
        assert_eq!(c.status, CertificateStatus::F0Nonpositive);
        assert!(c.window.is_none());

        let weak = BoundaryFunctional::Constant { value: 0.4 };
        let c = build_certificate(&tf("x-1"), &ROSENAU, &InitialData::parse("-3.6*x").unwrap(), &weak, alpha);
        assert_eq!(c.status, CertificateStatus::HypothesesFail);
    }

    #[test]
    fn mkdv_dirichlet_never_certifies() {
        let alpha = FractionalOrder::new(0.5).unwrap();
        let spec = FamilySpec::Mkdv { a: 0.0, b: 1.0 };
        for u0 in ["0", "1", "5*x*(1-x)", "exp(3*x)"] {
            let c = build_certificate(&tf("x-1"), &spec, &InitialData::parse(u0).unwrap(), &BoundaryFunctional::Zero, alpha);
            assert_eq!(c.status, CertificateStatus::F0Nonpositive, "u0 = {u0}");
        }
    }

    #[test]
    fn mkdv_negative_square_warning() {
        // offset (aφ''' + bφ'')/φ' = -1 for a=2, b=3, φ=-e^{-x}
        let alpha = FractionalOrder::new(0.5).unwrap();
        let c = build_certificate(
            &tf("-exp(-x)"),
            &FamilySpec::Mkdv { a: 2.0, b: 3.0 },
            &InitialData::parse("0.5").unwrap(),
            &BoundaryFunctional::Zero,
            alpha,
        );
        assert!(c.warnings.iter().any(|w| w.contains("negative")));
    }

    #[test]
    fn invalid_family_is_hypotheses_fail() {
        let alpha = FractionalOrder::new(0.5).unwrap();
        let c = build_certificate(
            &tf("x"),
            &FamilySpec::BurgersGrad { nu: -1.0, m_bound: 1.0 },
            &InitialData::zero(),
            &BoundaryFunctional::Zero,
            alpha,
        );
        assert_eq!(c.status, CertificateStatus::HypothesesFail);
        assert!(c.window.is_none());
    }
}
