//! Logarithms of binomial coefficients for `N` up to and beyond `10¹²`.
//!
//! `ln C(N, m)` is assembled from the Stirling decomposition
//! `ln x! = x·ln x − x + ½·ln(2πx) + r(x)` of each factorial. The leading
//! terms are regrouped as `m·ln(N/m) + n·ln(N/n)` (the `−x` terms cancel
//! exactly), which avoids subtracting three numbers of size `N·ln N`.
//! The remainder `r(x)` comes from exact log-factorial sums below
//! [`SERIES_CUTOFF`] and from the asymptotic series above it.

use std::f64::consts::PI;

use crate::error::{invalid, Result};

const SERIES_CUTOFF: u64 = 16;

/// `r(x) = ln x! − (x·ln x − x + ½·ln(2πx))` for `x ≥ 1`.
fn stirling_remainder(x: u64) -> f64 {
    let xf = x as f64;
    if x < SERIES_CUTOFF {
        let ln_fact: f64 = (2..=x).map(|k| (k as f64).ln()).sum();
        ln_fact - (xf * xf.ln() - xf + 0.5 * (2.0 * PI * xf).ln())
    } else {
        let inv = 1.0 / xf;
        let inv2 = inv * inv;
        inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
    }
}

/// Natural logarithm of `C(N, m)`.
pub fn ln_binomial(total: u64, choose: u64) -> Result<f64> {
    if choose > total {
        return Err(invalid("m", format!("cannot choose {choose} of {total}")));
    }
    let rest = total - choose;
    if choose == 0 || rest == 0 {
        return Ok(0.0);
    }
    let (n, m, r) = (total as f64, choose as f64, rest as f64);
    // m·ln(N/m) + r·ln(N/r), with ln(N/r) = −ln(1 − m/N)
    let leading = m * (n / m).ln() - r * (-m / n).ln_1p();
    let half_log = 0.5 * (n / (2.0 * PI * m * r)).ln();
    let remainder =
        stirling_remainder(total) - stirling_remainder(choose) - stirling_remainder(rest);
    Ok(leading + half_log + remainder)
}

/// `log₂ C(N, m)` in bits.
pub fn log2_binomial(total: u64, choose: u64) -> Result<f64> {
    Ok(ln_binomial(total, choose)? / std::f64::consts::LN_2)
}
