//! Capacity constants θ₁, θ₂ and the ratio integrands behind them.

use super::{ExpPoly, FamilySpec, TestFunction, HYPOTHESIS_GRID};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_gauss_legendre, QuadOptions};
use serde::Serialize;

const MAX_VANISHING_ORDER: usize = 16;

/// `num / den` on `[0, L]` with `den > 0` inside the interval.
///
/// The denominator may vanish at an endpoint provided the numerator vanishes
/// to at least the same order there; the quotient is then extended
/// continuously by its one-sided limit.
#[derive(Debug, Clone)]
pub struct Ratio {
    num: ExpPoly,
    den: ExpPoly,
    length: f64,
    end_orders: [usize; 2],
    poles: [bool; 2],
}

impl Ratio {
    /// Strict form: the quotient must be integrable at both endpoints.
    pub fn new(num: ExpPoly, den: ExpPoly, length: f64) -> Result<Self> {
        Self::build(num, den, length, true)
    }

    /// Only the interior is checked; endpoint poles evaluate to `±∞`.
    pub fn allowing_endpoint_poles(num: ExpPoly, den: ExpPoly, length: f64) -> Result<Self> {
        Self::build(num, den, length, false)
    }

    fn build(num: ExpPoly, den: ExpPoly, length: f64, strict: bool) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::NonFiniteCapacity("denominator vanishes identically".into()));
        }
        let eps = 1e-9 * length;
        let mut probes: Vec<f64> = (1..HYPOTHESIS_GRID)
            .map(|i| length * i as f64 / HYPOTHESIS_GRID as f64)
            .collect();
        probes.extend(den.derivative().roots_in(0.0, length).roots);
        for x in probes.into_iter().filter(|x| *x > eps && *x < length - eps) {
            if den.eval(x) <= 0.0 {
                return Err(Error::NonFiniteCapacity(format!(
                    "denominator {den} is not positive at x = {x}"
                )));
            }
        }
        if let Some(r) = den
            .roots_in(0.0, length)
            .roots
            .into_iter()
            .find(|r| *r > eps && *r < length - eps)
        {
            return Err(Error::NonFiniteCapacity(format!(
                "denominator {den} vanishes inside the interval at x = {r}"
            )));
        }

        let mut end_orders = [0usize; 2];
        let mut poles = [false; 2];
        for (i, p) in [0.0, length].into_iter().enumerate() {
            let od = den.vanishing_order(p, MAX_VANISHING_ORDER).ok_or_else(|| {
                Error::NonFiniteCapacity(format!("denominator degenerate at x = {p}"))
            })?;
            if od > 0 {
                if let Some(on) = num.vanishing_order(p, MAX_VANISHING_ORDER) {
                    if on < od {
                        if strict {
                            return Err(Error::NonFiniteCapacity(format!(
                                "non-integrable singularity at x = {p}: numerator order {on} < denominator order {od}"
                            )));
                        }
                        poles[i] = true;
                    }
                }
            } else if den.eval(p) < 0.0 {
                return Err(Error::NonFiniteCapacity(format!(
                    "denominator negative at x = {p}"
                )));
            }
            end_orders[i] = od;
        }
        Ok(Self {
            num,
            den,
            length,
            end_orders,
            poles,
        })
    }

    /// True when the denominator vanishes at an endpoint.
    pub fn is_singular(&self) -> bool {
        self.end_orders.iter().any(|&k| k > 0)
    }

    fn limit_at(&self, p: f64, k: usize) -> f64 {
        self.num.nth_derivative(k).eval(p) / self.den.nth_derivative(k).eval(p)
    }

    pub fn eval(&self, x: f64) -> f64 {
        for (i, p) in [0.0, self.length].into_iter().enumerate() {
            let k = self.end_orders[i];
            if k > 0 && x == p {
                if self.poles[i] {
                    let inside = p + (0.5 - i as f64) * 1e-6 * self.length;
                    let s = self.num.eval(inside) / self.den.eval(inside);
                    return f64::INFINITY.copysign(s);
                }
                return self.limit_at(p, k);
            }
        }
        self.num.eval(x) / self.den.eval(x)
    }

    pub fn integrate(&self, opts: &QuadOptions) -> Result<f64> {
        if self.num.is_zero() {
            return Ok(0.0);
        }
        adaptive_gauss_legendre(|x| self.num.eval(x) / self.den.eval(x), 0.0, self.length, *opts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaPair {
    pub theta1: f64,
    pub theta2: f64,
    pub integrand_singular: bool,
}

/// `prefactor · ∫ num / den`.
#[derive(Debug, Clone)]
pub(crate) struct RatioForm {
    pub prefactor: f64,
    pub num: ExpPoly,
    pub den: ExpPoly,
}

/// The ingredients shared by θ, the shifted field and `F`.
#[derive(Debug, Clone)]
pub(crate) enum CapacityForms {
    /// `F = ∫ (u + offset_num/den) · weight`, or with `u²` when `squared`.
    Ratio {
        theta1: RatioForm,
        theta2: RatioForm,
        offset_num: ExpPoly,
        den: ExpPoly,
        weight: ExpPoly,
        squared: bool,
    },
    /// `F = -∫ (u' + u²/(2ν)) φ`.
    Gradient { nu: f64, m_bound: f64 },
}

pub(crate) fn capacity_forms(phi: &TestFunction, spec: &FamilySpec) -> CapacityForms {
    let d = |k: usize| phi.d(k).clone();
    let form = |prefactor: f64, root: ExpPoly, den: &ExpPoly| RatioForm {
        prefactor,
        num: root.square(),
        den: den.clone(),
    };
    match *spec {
        FamilySpec::Fbb { a, b, c, d: dd } => {
            let den = d(1);
            let shift = &(&d(3).scale(c) + &d(2).scale(dd)) + &d(1);
            let weight = &(&d(0) - &d(2).scale(a)) + &d(4).scale(b);
            CapacityForms::Ratio {
                theta1: form(0.5, shift.clone(), &den),
                theta2: form(2.0, weight.clone(), &den),
                offset_num: shift,
                den,
                weight,
                squared: false,
            }
        }
        FamilySpec::Ch { a, b, d: dd, .. } => {
            let den = &d(1).scale(b) - &d(3).scale(dd);
            let weight = &d(0) - &d(2);
            CapacityForms::Ratio {
                theta1: form(0.5, d(1).scale(a), &den),
                theta2: form(2.0, weight.clone(), &den),
                offset_num: d(1).scale(a),
                den,
                weight,
                squared: false,
            }
        }
        FamilySpec::Ost { a, b } => {
            let den = d(2);
            let shift = &d(2).scale(a) + &d(4).scale(b);
            CapacityForms::Ratio {
                theta1: form(0.5, shift.clone(), &den),
                theta2: form(2.0, d(1), &den),
                offset_num: shift,
                den,
                weight: d(1),
                squared: false,
            }
        }
        FamilySpec::Mkdv { a, b } => {
            let den = d(1);
            let shift = &d(3).scale(a) + &d(2).scale(b);
            CapacityForms::Ratio {
                theta1: form(2.0, shift.clone(), &den),
                theta2: form(0.5, d(0), &den),
                offset_num: shift,
                den,
                weight: d(0),
                squared: true,
            }
        }
        FamilySpec::BurgersGrad { nu, m_bound } => CapacityForms::Gradient { nu, m_bound },
    }
}

/// `∫₀ᴸ |g|` for `g = G'`, split at the sign changes of `g` and evaluated
/// through the antiderivative on each piece.
fn abs_integral_of_derivative(antiderivative: &ExpPoly, g: &ExpPoly, length: f64) -> f64 {
    let mut cuts = vec![0.0];
    cuts.extend(
        g.roots_in(0.0, length)
            .roots
            .into_iter()
            .filter(|r| *r > 0.0 && *r < length),
    );
    cuts.push(length);
    cuts.windows(2)
        .map(|w| (antiderivative.eval(w[1]) - antiderivative.eval(w[0])).abs())
        .sum()
}

/// θ₁ and θ₂ with the default quadrature tolerance.
pub fn theta_pair(phi: &TestFunction, spec: &FamilySpec) -> Result<ThetaPair> {
    theta_pair_with(phi, spec, &QuadOptions::default())
}

/// θ₁ and θ₂ by adaptive Gauss–Legendre quadrature.
pub fn theta_pair_with(phi: &TestFunction, spec: &FamilySpec, opts: &QuadOptions) -> Result<ThetaPair> {
    spec.validate()?;
    let l = phi.length();
    match capacity_forms(phi, spec) {
        CapacityForms::Ratio { theta1, theta2, .. } => {
            let r1 = Ratio::new(theta1.num, theta1.den, l)?;
            let r2 = Ratio::new(theta2.num, theta2.den, l)?;
            let t1 = theta1.prefactor * r1.integrate(opts)?;
            let t2 = theta2.prefactor * r2.integrate(opts)?;
            if !(t1.is_finite() && t2.is_finite()) {
                return Err(Error::NonFiniteCapacity(format!("theta values ({t1}, {t2})")));
            }
            Ok(ThetaPair {
                theta1: t1,
                theta2: t2,
                integrand_singular: r1.is_singular() || r2.is_singular(),
            })
        }
        CapacityForms::Gradient { nu, m_bound } => {
            let int_phi = adaptive_gauss_legendre(|x| phi.eval(0, x), 0.0, l, *opts)?;
            let int_abs3 = abs_integral_of_derivative(phi.d(2), phi.d(3), l);
            Ok(ThetaPair {
                theta1: m_bound.powi(4) / (4.0 * nu * nu) * int_phi + m_bound * nu * int_abs3,
                theta2: int_phi,
                integrand_singular: false,
            })
        }
    }
}
