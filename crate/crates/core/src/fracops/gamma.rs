//! Euler gamma function for real positive arguments.

use crate::error::{Error, Result};
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Largest accepted argument; `Γ(171.62)` overflows `f64`.
pub const GAMMA_MAX_ARG: f64 = 171.0;

/// `Γ(x)` for `0 < x < 171`.
///
/// Lanczos approximation (g = 7, nine terms) with reflection below 1/2.
/// The power `t^(x - 1/2)` is split in two halves so that large arguments do
/// not overflow before the exponential factor is applied.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("gamma requires x > 0, got {x}")));
    }
    if x >= GAMMA_MAX_ARG {
        return Err(Error::Domain(format!(
            "gamma argument {x} outside (0, {GAMMA_MAX_ARG})"
        )));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    if x == x.floor() && x <= 23.0 {
        // exact for small integers
        let mut acc = 1.0;
        let mut k = 2.0;
        while k < x {
            acc *= k;
            k += 1.0;
        }
        return acc;
    }
    if x > 20.0 {
        // Γ(x) = Γ(x - k) Π_{j=1..k} (x - j); every factor x - j is exact
        let k = (x - 10.0).floor();
        let mut acc = gamma_unchecked(x - k);
        let mut j = 1.0;
        while j <= k {
            acc *= x - j;
            j += 1.0;
        }
        return acc;
    }
    let z = x - 1.0;
    let mut series = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * series
}

/// `Γ(x)` for arguments already known to be valid (internal use on orders
/// in `(0, 3]`).
pub(crate) fn gamma_known(x: f64) -> f64 {
    debug_assert!(x > 0.0 && x < GAMMA_MAX_ARG);
    gamma_unchecked(x)
}
