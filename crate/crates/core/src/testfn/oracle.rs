//! Exact rational evaluation of θ₁, θ₂ for polynomial test functions.
//!
//! Coefficients are converted from `f64` without rounding, every integrand is
//! reduced to a polynomial by exact division, and the integrals come from
//! exact antiderivatives. Used as an independent check on the quadrature.

use super::{FamilySpec, TestFunction};
use crate::error::{Error, Result};
use num::traits::{One, Signed, ToPrimitive, Zero};
use num::{BigInt, BigRational};

type Q = BigRational;

#[derive(Debug, Clone, PartialEq)]
struct Poly(Vec<Q>);

impl Poly {
    fn trimmed(mut v: Vec<Q>) -> Self {
        while v.last().is_some_and(|c| c.is_zero()) {
            v.pop();
        }
        Poly(v)
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        let z = Q::zero();
        Poly::trimmed(
            (0..n)
                .map(|i| self.0.get(i).unwrap_or(&z) + o.0.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    fn scale(&self, s: &Q) -> Poly {
        Poly::trimmed(self.0.iter().map(|c| c * s).collect())
    }

    fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(&-Q::one()))
    }

    fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly(Vec::new());
        }
        let mut out = vec![Q::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::trimmed(out)
    }

    fn derivative(&self) -> Poly {
        Poly::trimmed(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Q::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    fn eval(&self, x: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }

    /// `∫_a^b p`.
    fn integral(&self, a: &Q, b: &Q) -> Q {
        let anti = Poly(
            std::iter::once(Q::zero())
                .chain(
                    self.0
                        .iter()
                        .enumerate()
                        .map(|(k, c)| c / Q::from_integer(BigInt::from(k + 1))),
                )
                .collect(),
        );
        anti.eval(b) - anti.eval(a)
    }

    /// Exact quotient, `None` when the remainder is non-zero.
    fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let dd = d.degree()?;
        let lead = d.0[dd].clone();
        let mut rem = self.0.clone();
        if rem.len() <= dd {
            return if self.is_zero() { Some(Poly(Vec::new())) } else { None };
        }
        let mut quot = vec![Q::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] / &lead;
            for (j, dc) in d.0.iter().enumerate() {
                rem[i + j] -= &c * dc;
            }
            quot[i] = c;
        }
        if rem.iter().all(|c| c.is_zero()) {
            Some(Poly::trimmed(quot))
        } else {
            None
        }
    }
}

fn rational(x: f64) -> Result<Q> {
    Q::from_float(x).ok_or_else(|| Error::Unsupported(format!("non-finite coefficient {x}")))
}

/// θ values as exact rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactThetaPair {
    pub theta1: BigRational,
    pub theta2: BigRational,
}

impl ExactThetaPair {
    pub fn to_f64(&self) -> (f64, f64) {
        (
            self.theta1.to_f64().unwrap_or(f64::NAN),
            self.theta2.to_f64().unwrap_or(f64::NAN),
        )
    }
}

/// `prefactor · ∫₀ᴸ num/den` where `den` must divide `num` exactly.
fn ratio_integral(pre: Q, num: &Poly, den: &Poly, l: &Q) -> Result<Q> {
    let q = num.div_exact(den).ok_or_else(|| {
        Error::Unsupported("denominator does not divide the integrand exactly".into())
    })?;
    Ok(pre * q.integral(&Q::zero(), l))
}

/// Exact θ pair for a polynomial `φ`.
///
/// Requires each θ integrand to reduce to a polynomial after exact division;
/// for the gradient family `φ'''` must be at most linear so that `|φ'''|`
/// splits at a rational point.
pub fn closed_form_theta_oracle(phi: &TestFunction, spec: &FamilySpec) -> Result<ExactThetaPair> {
    let e = phi.d(0);
    if !e.is_polynomial() {
        return Err(Error::Unsupported("oracle needs a polynomial test function".into()));
    }
    let coeffs = e.poly_part(0.0);
    let p0 = Poly::trimmed(coeffs.iter().map(|c| rational(*c)).collect::<Result<_>>()?);
    let mut d = vec![p0];
    for k in 1..=4 {
        let next = d[k - 1].derivative();
        d.push(next);
    }
    let l = rational(phi.length())?;
    let half = Q::new(BigInt::from(1), BigInt::from(2));
    let two = Q::from_integer(BigInt::from(2));
    let r = rational;

    let (t1, t2) = match *spec {
        FamilySpec::Fbb { a, b, c, d: dd } => {
            let den = d[1].clone();
            let shift = d[3].scale(&r(c)?).add(&d[2].scale(&r(dd)?)).add(&d[1]);
            let weight = d[0].sub(&d[2].scale(&r(a)?)).add(&d[4].scale(&r(b)?));
            (
                ratio_integral(half, &shift.mul(&shift), &den, &l)?,
                ratio_integral(two, &weight.mul(&weight), &den, &l)?,
            )
        }
        FamilySpec::Ch { a, b, d: dd, .. } => {
            let den = d[1].scale(&r(b)?).sub(&d[3].scale(&r(dd)?));
            let s = d[1].scale(&r(a)?);
            let w = d[0].sub(&d[2]);
            (
                ratio_integral(half, &s.mul(&s), &den, &l)?,
                ratio_integral(two, &w.mul(&w), &den, &l)?,
            )
        }
        FamilySpec::Ost { a, b } => {
            let den = d[2].clone();
            let s = d[2].scale(&r(a)?).add(&d[4].scale(&r(b)?));
            (
                ratio_integral(half, &s.mul(&s), &den, &l)?,
                ratio_integral(two, &d[1].mul(&d[1]), &den, &l)?,
            )
        }
        FamilySpec::Mkdv { a, b } => {
            let den = d[1].clone();
            let s = d[3].scale(&r(a)?).add(&d[2].scale(&r(b)?));
            (
                ratio_integral(two, &s.mul(&s), &den, &l)?,
                ratio_integral(half, &d[0].mul(&d[0]), &den, &l)?,
            )
        }
        FamilySpec::BurgersGrad { nu, m_bound } => {
            let nu = r(nu)?;
            let m = r(m_bound)?;
            let int_phi = d[0].integral(&Q::zero(), &l);
            let mut cuts = vec![Q::zero()];
            match d[3].degree() {
                None | Some(0) => {}
                Some(1) => {
                    let root = -&d[3].0[0] / &d[3].0[1];
                    if root.is_positive() && root < l {
                        cuts.push(root);
                    }
                }
                Some(_) => {
                    return Err(Error::Unsupported(
                        "oracle needs phi''' of degree at most one".into(),
                    ))
                }
            }
            cuts.push(l.clone());
            let abs3: Q = cuts
                .windows(2)
                .map(|w| (d[2].eval(&w[1]) - d[2].eval(&w[0])).abs())
                .fold(Q::zero(), |acc, v| acc + v);
            let m4 = &m * &m * &m * &m;
            let t1 = m4 / (Q::from_integer(BigInt::from(4)) * &nu * &nu) * &int_phi + m * nu * abs3;
            (t1, int_phi)
        }
    };
    Ok(ExactThetaPair { theta1: t1, theta2: t2 })
}
