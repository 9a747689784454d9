//! Fixed-width binary encoding of `P`-ary raw strings.
//!
//! Each symbol becomes `⌈log₂P⌉` bits, most significant bit first. The map is
//! injective, so the bit string carries exactly the min-entropy of the
//! symbol string.

use crate::error::{invalid, Result};

/// `⌈log₂P⌉` for `P ≥ 2`.
pub fn bits_per_symbol(positions: usize) -> usize {
    debug_assert!(positions >= 2);
    (usize::BITS - (positions - 1).leading_zeros()) as usize
}

pub fn encode_raw(raw: &[u32], positions: usize) -> Result<Vec<bool>> {
    if positions < 2 {
        return Err(invalid("P", "need at least 2 positions"));
    }
    let width = bits_per_symbol(positions);
    let mut bits = Vec::with_capacity(raw.len() * width);
    for &symbol in raw {
        if symbol as usize >= positions {
            return Err(invalid(
                "r",
                format!("symbol {symbol} outside 0..{positions}"),
            ));
        }
        bits.extend((0..width).rev().map(|b| (symbol >> b) & 1 == 1));
    }
    Ok(bits)
}

/// Inverse of [`encode_raw`].
pub fn decode_raw(bits: &[bool], positions: usize) -> Result<Vec<u32>> {
    if positions < 2 {
        return Err(invalid("P", "need at least 2 positions"));
    }
    let width = bits_per_symbol(positions);
    if !bits.len().is_multiple_of(width) {
        return Err(invalid(
            "bits",
            format!("length {} is not a multiple of {width}", bits.len()),
        ));
    }
    bits.chunks_exact(width)
        .map(|chunk| {
            let symbol = chunk.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
            if symbol as usize >= positions {
                Err(invalid(
                    "bits",
                    format!("codeword {symbol} outside 0..{positions}"),
                ))
            } else {
                Ok(symbol)
            }
        })
        .collect()
}
