//! `d`-ary entropy functions and Hamming weights of words over `{0, .., d−1}`.
//!
//! Entropies here are normalized to base `d`; conversions to bits happen in
//! the rate module.

use crate::error::{invalid, Error, Result};

/// A word over the alphabet `{0, .., d−1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    symbols: Vec<u32>,
    alphabet: u32,
}

impl Word {
    pub fn new(symbols: Vec<u32>, alphabet: u32) -> Result<Self> {
        if alphabet < 2 {
            return Err(invalid("d", "alphabet needs at least 2 symbols"));
        }
        if let Some(s) = symbols.iter().find(|&&s| s >= alphabet) {
            return Err(invalid(
                "word",
                format!("symbol {s} outside alphabet of size {alphabet}"),
            ));
        }
        Ok(Self { symbols, alphabet })
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Number of nonzero symbols.
    pub fn weight(&self) -> usize {
        hamming_weight(&self.symbols)
    }

    pub fn relative_weight(&self) -> Result<f64> {
        relative_weight(&self.symbols)
    }
}

pub fn hamming_weight<T: Copy + Default + PartialEq>(symbols: &[T]) -> usize {
    symbols.iter().filter(|&&s| s != T::default()).count()
}

/// Fraction of nonzero symbols.
pub fn relative_weight<T: Copy + Default + PartialEq>(symbols: &[T]) -> Result<f64> {
    if symbols.is_empty() {
        return Err(Error::Empty);
    }
    Ok(hamming_weight(symbols) as f64 / symbols.len() as f64)
}

fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

fn check_alphabet(d: u32) -> Result<()> {
    if d < 2 {
        return Err(invalid(
            "d",
            format!("alphabet size must be at least 2, got {d}"),
        ));
    }
    Ok(())
}

fn h_unchecked(d: u32, x: f64) -> f64 {
    let d = f64::from(d);
    (x * (d - 1.0).ln() - xlnx(x) - xlnx(1.0 - x)) / d.ln()
}

/// `h_d(x) = x·log_d(d−1) − x·log_d x − (1−x)·log_d(1−x)` on `[0, 1]`,
/// with `0·log 0 = 0`.
pub fn entropy_d(d: u32, x: f64) -> Result<f64> {
    check_alphabet(d)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid("x", format!("{x} outside [0, 1]")));
    }
    Ok(h_unchecked(d, x))
}

/// `h_d` clamped to 0 below zero and to 1 above its maximum at `1 − 1/d`.
pub fn extended_entropy_d(d: u32, x: f64) -> Result<f64> {
    check_alphabet(d)?;
    Ok(if x < 0.0 {
        0.0
    } else if x > 1.0 - 1.0 / f64::from(d) {
        1.0
    } else {
        h_unchecked(d, x)
    })
}
