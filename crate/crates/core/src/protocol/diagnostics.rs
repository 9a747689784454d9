//! Output diagnostics and hex formatting for key bits.

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Sanity statistics of a key. These are not a security claim.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeyDiagnostics {
    pub length: usize,
    pub ones_fraction: f64,
    /// `(#ones − #zeros)/√len`, standard normal for uniform bits.
    pub monobit_z: f64,
    /// Number of maximal runs of equal bits.
    pub runs: usize,
}

pub fn key_diagnostics(key: &[bool]) -> Result<KeyDiagnostics> {
    if key.is_empty() {
        return Err(Error::Empty);
    }
    let n = key.len();
    let ones = key.iter().filter(|&&b| b).count();
    let runs = 1 + key.windows(2).filter(|w| w[0] != w[1]).count();
    Ok(KeyDiagnostics {
        length: n,
        ones_fraction: ones as f64 / n as f64,
        monobit_z: (2.0 * ones as f64 - n as f64) / (n as f64).sqrt(),
        runs,
    })
}

/// Lowercase hex, four bits per digit, most significant bit first. A final
/// partial nibble is padded with zero bits on the right.
pub fn bits_to_hex(bits: &[bool]) -> String {
    bits.chunks(4)
        .map(|nibble| {
            let value = nibble
                .iter()
                .chain(std::iter::repeat(&false))
                .take(4)
                .fold(0u32, |acc, &b| (acc << 1) | b as u32);
            char::from_digit(value, 16).expect("nibble is below 16")
        })
        .collect()
}

/// Parses [`bits_to_hex`] output back into `len` bits.
pub fn hex_to_bits(hex: &str, len: usize) -> Result<Vec<bool>> {
    if hex.len() != len.div_ceil(4) {
        return Err(invalid(
            "hex",
            format!("{} digits cannot hold exactly {len} bits", hex.len()),
        ));
    }
    let mut bits = Vec::with_capacity(hex.len() * 4);
    for c in hex.chars() {
        let value = c
            .to_digit(16)
            .filter(|_| !c.is_ascii_uppercase())
            .ok_or_else(|| invalid("hex", format!("bad digit {c:?}")))?;
        bits.extend((0..4).rev().map(|b| (value >> b) & 1 == 1));
    }
    if bits[len..].iter().any(|&b| b) {
        return Err(invalid("hex", "padding bits must be zero"));
    }
    bits.truncate(len);
    Ok(bits)
}
