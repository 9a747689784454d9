//! Toeplitz hashing over GF(2).
//!
//! For an input `x` of `k` bits and a seed `s` of `k + ℓ − 1` bits the key is
//!
//! ```text
//! key[i] = ⊕_j T[i, j]·x[j],   T[i, j] = s[i − j + k − 1],   0 ≤ i < ℓ, 0 ≤ j < k
//! ```
//!
//! so `s[k−1]` sits on the diagonal, `s[0]` in the top-right corner and
//! `s[k+ℓ−2]` in the bottom-left. Equivalently `key[i]` is coefficient
//! `i + k − 1` of the product `s(X)·x(X)` over GF(2). Large products are
//! computed as exact integer convolutions with a number-theoretic transform
//! and reduced mod 2; the matrix is tiled when it exceeds one transform.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::rng::seeded;

/// Seed bits of a Toeplitz matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToeplitzSeed {
    bits: Vec<bool>,
}

impl ToeplitzSeed {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Seed length for a `input_len → output_len` hash.
    pub fn required_len(input_len: usize, output_len: usize) -> usize {
        (input_len + output_len).saturating_sub(1)
    }

    /// Uniformly random seed bits from `seed`. The bits for a given `seed`
    /// form one fixed stream, so a longer seed extends a shorter one.
    pub fn random(input_len: usize, output_len: usize, seed: u64) -> Self {
        let len = Self::required_len(input_len, output_len);
        let mut rng = seeded(seed);
        let mut bits = Vec::with_capacity(len);
        while bits.len() < len {
            let word = rng.next_u64();
            let take = (len - bits.len()).min(64);
            bits.extend((0..take).map(|b| (word >> (63 - b)) & 1 == 1));
        }
        Self { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Hashes `input` down to `output_len` bits.
pub fn toeplitz_extract(
    input: &[bool],
    seed: &ToeplitzSeed,
    output_len: usize,
) -> Result<Vec<bool>> {
    let expected = ToeplitzSeed::required_len(input.len(), output_len);
    if seed.len() != expected {
        return Err(Error::SeedLength {
            expected,
            actual: seed.len(),
        });
    }
    let mut out = vec![false; output_len];
    if output_len == 0 || input.is_empty() {
        return Ok(out);
    }
    if input.len().saturating_mul(output_len) <= DIRECT_LIMIT {
        toeplitz_direct(input, seed.bits(), &mut out);
        return Ok(out);
    }
    toeplitz_tiled(input, seed.bits(), &mut out, MAX_TRANSFORM);
    Ok(out)
}

const DIRECT_LIMIT: usize = 1 << 16;
const MAX_TRANSFORM: usize = 1 << 23;

/// Splits `T` into Toeplitz blocks whose seed windows fit one transform of
/// length `max_transform`.
fn toeplitz_tiled(input: &[bool], seed: &[bool], out: &mut [bool], max_transform: usize) {
    let (k, output_len) = (input.len(), out.len());
    let (width, height) = if k + output_len - 1 <= max_transform {
        (k, output_len)
    } else {
        (max_transform / 2, max_transform / 2)
    };
    for row in (0..output_len).step_by(height) {
        let h = height.min(output_len - row);
        for col in (0..k).step_by(width) {
            let w = width.min(k - col);
            // Block (row.., col..) is itself Toeplitz; its corner entries
            // T[row, col + w − 1] and T[row + h − 1, col] fix the seed window.
            let offset = row + k - col - w;
            let window = &seed[offset..offset + h + w - 1];
            toeplitz_convolve(&input[col..col + w], window, &mut out[row..row + h]);
        }
    }
}

/// XORs `T·x` into `out` with a direct double loop.
fn toeplitz_direct(input: &[bool], seed: &[bool], out: &mut [bool]) {
    let k = input.len();
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = false;
        for (j, &x) in input.iter().enumerate() {
            acc ^= x & seed[i + k - 1 - j];
        }
        *o ^= acc;
    }
}

/// XORs `T·x` into `out` using one cyclic convolution of length at least
/// `seed.len()`. Coefficients `k−1 .. k+ℓ−2` of the linear product never
/// receive wrapped-around terms at that length.
fn toeplitz_convolve(input: &[bool], seed: &[bool], out: &mut [bool]) {
    let k = input.len();
    let len = seed.len().next_power_of_two();
    let mut a: Vec<u32> = seed.iter().map(|&b| b as u32).collect();
    a.resize(len, 0);
    let mut b: Vec<u32> = input.iter().map(|&b| b as u32).collect();
    b.resize(len, 0);
    ntt(&mut a, false);
    ntt(&mut b, false);
    for (x, y) in a.iter_mut().zip(&b) {
        *x = mul_mod(*x, *y);
    }
    ntt(&mut a, true);
    for (i, o) in out.iter_mut().enumerate() {
        *o ^= a[i + k - 1] & 1 == 1;
    }
}

// 15·2²⁷ + 1, with primitive root 31. Convolution terms are at most the
// input length, far below the modulus, so residues are exact integers.
const MODULUS: u64 = 2_013_265_921;
const GENERATOR: u64 = 31;

#[inline]
fn mul_mod(a: u32, b: u32) -> u32 {
    (u64::from(a) * u64::from(b) % MODULUS) as u32
}

fn pow_mod(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1u64;
    base %= MODULUS;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % MODULUS;
        }
        base = base * base % MODULUS;
        exp >>= 1;
    }
    acc
}

fn ntt(a: &mut [u32], invert: bool) {
    let n = a.len();
    debug_assert!(n.is_power_of_two() && (MODULUS - 1).is_multiple_of(n as u64));
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j ^= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut twiddles = Vec::with_capacity(n / 2);
    let mut len = 2;
    while len <= n {
        let mut root = pow_mod(GENERATOR, (MODULUS - 1) / len as u64);
        if invert {
            root = pow_mod(root, MODULUS - 2);
        }
        let half = len / 2;
        twiddles.clear();
        let mut w = 1u64;
        for _ in 0..half {
            twiddles.push(w as u32);
            w = w * root % MODULUS;
        }
        for chunk in a.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((u, v), &w) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                let x = u64::from(*u);
                let y = u64::from(mul_mod(*v, w));
                let sum = x + y;
                *u = if sum >= MODULUS { sum - MODULUS } else { sum } as u32;
                *v = if x >= y { x - y } else { x + MODULUS - y } as u32;
            }
        }
        len <<= 1;
    }
    if invert {
        let inv_n = pow_mod(n as u64, MODULUS - 2) as u32;
        a.iter_mut().for_each(|x| *x = mul_mod(*x, inv_n));
    }
}
