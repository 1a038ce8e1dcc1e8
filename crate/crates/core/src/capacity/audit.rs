//! Recomputation of the published worked examples from the definitional
//! θ and `F` formulas, side by side with the values stated for them.

use super::{functional_parts, FunctionalParts};
use crate::quadrature::QuadOptions;
use crate::testfn::{parse_expr, theta_pair, ExpPoly, FamilySpec, TestFunction};
use serde::Serialize;
use std::f64::consts::E;

/// A blow-up condition normalized to `∫₀ᴸ u₀·w > t` (or `u₀²·w` when
/// `squared`).
#[derive(Debug, Clone, Serialize)]
pub struct ConditionForm {
    pub weight: String,
    pub squared: bool,
    pub threshold: f64,
    #[serde(skip)]
    w: ExpPoly,
}

impl ConditionForm {
    fn new(w: ExpPoly, squared: bool, threshold: f64) -> Self {
        Self {
            weight: w.to_string(),
            squared,
            threshold,
            w,
        }
    }

    fn stated(w: &str, squared: bool, threshold: f64) -> Self {
        Self::new(parse_expr(w).expect("static weight parses"), squared, threshold)
    }

    /// Equal up to a positive factor on both weight and threshold.
    fn equivalent(&self, other: &Self, length: f64) -> bool {
        if self.squared != other.squared {
            return false;
        }
        let xs: Vec<f64> = (0..=256).map(|i| length * i as f64 / 256.0).collect();
        let (mut best_x, mut best) = (0.0, 0.0);
        for &x in &xs {
            let v = other.w.eval(x).abs();
            if v > best {
                best = v;
                best_x = x;
            }
        }
        if best == 0.0 {
            return self.w.is_zero() && self.threshold == other.threshold;
        }
        let lambda = self.w.eval(best_x) / other.w.eval(best_x);
        if !(lambda > 0.0) {
            return false;
        }
        let scale = xs.iter().map(|&x| self.w.eval(x).abs()).fold(0.0, f64::max);
        let weights_agree = xs
            .iter()
            .all(|&x| (self.w.eval(x) - lambda * other.w.eval(x)).abs() <= 1e-10 * scale);
        let thresholds_agree = (self.threshold - lambda * other.threshold).abs()
            <= 1e-10 * self.threshold.abs().max(1.0);
        weights_agree && thresholds_agree
    }

    /// A squared condition with a weight that is nowhere positive cannot
    /// exceed a non-negative threshold.
    fn satisfiable(&self, length: f64) -> bool {
        let nonpositive = (0..=2048)
            .map(|i| self.w.eval(length * i as f64 / 2048.0))
            .all(|v| v <= 0.0);
        !(nonpositive && self.threshold >= 0.0 && (self.squared || self.w.is_zero()))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditRow {
    pub id: &'static str,
    pub equation: &'static str,
    pub family: FamilySpec,
    pub parameters: &'static str,
    pub phi: &'static str,
    pub length: f64,
    pub stated_theta1: f64,
    pub stated_theta2: f64,
    pub computed_theta1: f64,
    pub computed_theta2: f64,
    pub theta1_match: bool,
    pub theta2_match: bool,
    pub stated_condition: ConditionForm,
    pub computed_condition: ConditionForm,
    pub condition_match: bool,
    pub condition_satisfiable: bool,
    pub flagged: bool,
    pub issues: Vec<String>,
}

struct Example {
    id: &'static str,
    equation: &'static str,
    family: FamilySpec,
    parameters: &'static str,
    phi: &'static str,
    theta: (f64, f64),
    condition: ConditionForm,
}

fn examples() -> Vec<Example> {
    let fbb = |a, b, c, d| FamilySpec::Fbb { a, b, c, d };
    let e1 = 1.0 - 1.0 / E;
    vec![
        Example {
            id: "kdv",
            equation: "time-fractional KdV",
            family: fbb(0.0, 0.0, 1.0, 0.0),
            parameters: "a = b = d = 0, c = 1",
            phi: "x",
            theta: (0.0, 1.0 / 6.0),
            condition: ConditionForm::stated("x", false, 0.0),
        },
        Example {
            id: "burgers-robin",
            equation: "time-fractional Burgers (Robin end)",
            family: fbb(0.0, 0.0, 0.0, 1.0),
            parameters: "a = b = c = 0, d = 1",
            phi: "x",
            theta: (0.0, 1.0 / 6.0),
            condition: ConditionForm::stated("x", false, 0.0),
        },
        Example {
            id: "bbm",
            equation: "time-fractional BBM",
            family: fbb(1.0, 0.0, 0.0, 0.0),
            parameters: "a = 1, b = c = d = 0",
            phi: "x^4",
            theta: (0.0, 395.0 / 48.0),
            condition: ConditionForm::stated("x^2*(x^2 - 12)", false, 0.0),
        },
        Example {
            id: "rosenau",
            equation: "time-fractional Rosenau",
            family: fbb(0.0, 1.0, 0.0, 0.0),
            parameters: "a = c = d = 0, b = 1",
            phi: "x - 1",
            theta: (0.5, 2.0 / 3.0),
            condition: ConditionForm::stated("x - 1", false, 0.5),
        },
        Example {
            id: "rosenau-burgers",
            equation: "time-fractional Rosenau-Burgers",
            family: fbb(0.0, 1.0, 0.0, 1.0),
            parameters: "a = c = 0, b = d = 1",
            phi: "x",
            theta: (0.5, 2.0 / 3.0),
            condition: ConditionForm::stated("x", false, -0.5),
        },
        Example {
            id: "camassa-holm",
            equation: "time-fractional Camassa-Holm",
            family: FamilySpec::camassa_holm(1.0),
            parameters: "kappa = 1",
            phi: "x",
            theta: (2.0 / 3.0, 2.0 / 9.0),
            condition: ConditionForm::stated("x", false, -1.0 / 3.0),
        },
        Example {
            id: "degasperis-procesi",
            equation: "time-fractional Degasperis-Procesi",
            family: FamilySpec::degasperis_procesi(1.0),
            parameters: "kappa = 1",
            phi: "x",
            theta: (0.5, 1.0 / 6.0),
            condition: ConditionForm::stated("x", false, -0.25),
        },
        Example {
            id: "ostrovsky",
            equation: "time-fractional Ostrovsky",
            family: FamilySpec::Ost { a: 1.0, b: -1.0 },
            parameters: "a = 1, b = -1",
            phi: "x^2",
            theta: (1.0, 4.0 / 3.0),
            condition: ConditionForm::stated("x^2", false, -1.0 / 3.0),
        },
        Example {
            id: "mkdv-exp",
            equation: "time-fractional mKdV-Burgers",
            family: FamilySpec::Mkdv { a: 2.0, b: 3.0 },
            parameters: "a = 2, b = 3",
            phi: "-exp(-x)",
            theta: (0.0, e1 / 2.0),
            // ∫u₀² e^{-x} < 1 - 1/e, i.e. ∫u₀²(-e^{-x}) > -(1 - 1/e)
            condition: ConditionForm::stated("-exp(-x)", true, -e1),
        },
        Example {
            id: "mkdv-dirichlet",
            equation: "time-fractional mKdV-Burgers (Dirichlet)",
            family: FamilySpec::Mkdv { a: 0.0, b: 1.0 },
            parameters: "a = 0, b = 1",
            phi: "x - 1",
            theta: (0.0, 1.0 / 6.0),
            condition: ConditionForm::stated("x - 1", true, 0.0),
        },
    ]
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1e-300) || a == b
}

/// One row per worked example. Values that disagree are reported, never
/// replaced: the definitional formulas are authoritative.
pub fn audit_reference_examples() -> Vec<AuditRow> {
    examples().into_iter().map(audit_one).collect()
}

fn audit_one(ex: Example) -> AuditRow {
    const L: f64 = 1.0;
    let mut issues = Vec::new();
    let phi = TestFunction::parse(ex.phi, L).expect("static phi parses");
    let (t1, t2) = match theta_pair(&phi, &ex.family) {
        Ok(t) => (t.theta1, t.theta2),
        Err(e) => {
            issues.push(format!("theta evaluation failed: {e}"));
            (f64::NAN, f64::NAN)
        }
    };
    let computed_condition = match functional_parts(&phi, &ex.family, &QuadOptions::default()) {
        Ok(FunctionalParts::Linear {
            weight,
            squared,
            shift_integral,
            ..
        }) => ConditionForm::new(weight, squared, -shift_integral),
        Ok(FunctionalParts::Gradient { .. }) => unreachable!("no gradient-family example"),
        Err(e) => {
            issues.push(format!("F(0) evaluation failed: {e}"));
            ConditionForm::new(ExpPoly::zero(), false, f64::NAN)
        }
    };

    let theta1_match = same(ex.theta.0, t1);
    let theta2_match = same(ex.theta.1, t2);
    if !theta1_match {
        issues.push(format!("theta1: stated {} vs computed {t1}", ex.theta.0));
    }
    if !theta2_match {
        issues.push(format!("theta2: stated {} vs computed {t2}", ex.theta.1));
    }
    let condition_match = ex.condition.equivalent(&computed_condition, L);
    if !condition_match {
        issues.push(format!(
            "F(0) > 0 condition: stated weight {} threshold {} vs computed weight {} threshold {}",
            ex.condition.weight, ex.condition.threshold, computed_condition.weight, computed_condition.threshold
        ));
    }
    let condition_satisfiable = ex.condition.satisfiable(L);
    if !condition_satisfiable {
        issues.push("stated F(0) > 0 condition cannot hold for any real u0".into());
    }
    AuditRow {
        id: ex.id,
        equation: ex.equation,
        family: ex.family,
        parameters: ex.parameters,
        phi: ex.phi,
        length: L,
        stated_theta1: ex.theta.0,
        stated_theta2: ex.theta.1,
        computed_theta1: t1,
        computed_theta2: t2,
        theta1_match,
        theta2_match,
        stated_condition: ex.condition,
        computed_condition,
        condition_match,
        condition_satisfiable,
        flagged: !issues.is_empty(),
        issues,
    }
}
