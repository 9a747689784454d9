//! Independent reference implementations used by the integration tests.
//! They follow the textbook definitions and share no code with the library.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Dense `W = S·(H ⊗ I_P)` in the basis `|c, x⟩ ↦ c·P + x`.
pub fn dense_walk_matrix(p: usize) -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h = DMatrix::from_row_slice(2, 2, &[c(s), c(s), c(s), c(-s)]);
    let coin = h.kronecker(&DMatrix::<Complex64>::identity(p, p));
    let mut shift = DMatrix::zeros(2 * p, 2 * p);
    for x in 0..p {
        shift[((x + 1) % p, x)] = c(1.0);
        shift[(p + (x + p - 1) % p, p + x)] = c(1.0);
    }
    shift * coin
}

pub fn basis_vector(coin: usize, x: usize, p: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(2 * p);
    v[coin * p + x] = c(1.0);
    v
}

/// `W^T |coin, x⟩` by repeated dense multiplication.
pub fn dense_evolve(coin: usize, x: usize, p: usize, t: usize) -> DVector<Complex64> {
    let w = dense_walk_matrix(p);
    let mut v = basis_vector(coin, x, p);
    for _ in 0..t {
        v = &w * v;
    }
    v
}

pub fn dense_gamma(p: usize, t: usize) -> f64 {
    let v = dense_evolve(0, 0, p, t);
    (0..p)
        .map(|x| v[x].norm_sqr() + v[p + x].norm_sqr())
        .fold(0.0, f64::max)
}

/// `h_d(x)` written with base-`d` logarithms.
pub fn h_d(d: f64, x: f64) -> f64 {
    let lg = |y: f64| y.ln() / d.ln();
    let mut h = x * lg(d - 1.0);
    if x > 0.0 {
        h -= x * lg(x);
    }
    if x < 1.0 {
        h -= (1.0 - x) * lg(1.0 - x);
    }
    h
}

pub fn h_bar(d: f64, x: f64) -> f64 {
    if x < 0.0 {
        0.0
    } else if x > 1.0 - 1.0 / d {
        1.0
    } else {
        h_d(d, x)
    }
}

pub fn log2_choose(n: u64, m: u64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (ln_gamma(n + 1.0) - ln_gamma(m + 1.0) - ln_gamma(n - m + 1.0)) / std::f64::consts::LN_2
}

pub fn delta(n: u64, m: u64, eps: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    ((n + 2.0) * (2.0 / (eps * eps)).ln() / (m * n)).sqrt()
}

/// Raw output length, term for term.
pub fn raw_key_length(n_total: u64, m: u64, eps: f64, p: usize, gamma: f64, wq: f64) -> f64 {
    let d = delta(n_total, m, eps);
    let n = (n_total - m) as f64;
    let eta = (n * (1.0 - wq - d)).max(0.0);
    let dim = 2.0 * p as f64;
    -eta * gamma.log2()
        - n * h_bar(dim, wq + d) * dim.log2()
        - 2.0 * (1.0 / eps).log2()
        - log2_choose(n_total, m)
}

/// `T·x` over GF(2) with `T[i][j] = s[i − j + k − 1]` as an explicit matrix.
pub fn dense_toeplitz(x: &[bool], s: &[bool], ell: usize) -> Vec<bool> {
    let k = x.len();
    let matrix: Vec<Vec<bool>> = (0..ell)
        .map(|i| (0..k).map(|j| s[i + k - 1 - j]).collect())
        .collect();
    matrix
        .iter()
        .map(|row| row.iter().zip(x).filter(|(a, b)| **a && **b).count() % 2 == 1)
        .collect()
}

/// Histogram of Hamming weights over all `d^n` words, by enumeration.
/// `d` must be a power of two.
pub fn enumerate_weights(d: u32, n: u32) -> Vec<u64> {
    let bits = d.trailing_zeros();
    assert_eq!(1 << bits, d);
    let mut digit_mask = 0u64;
    for i in 0..n {
        digit_mask |= 1 << (i * bits);
    }
    let mut hist = vec![0u64; n as usize + 1];
    for word in 0..(1u64 << (bits * n)) {
        let mut any = 0u64;
        for b in 0..bits {
            any |= word >> b;
        }
        hist[(any & digit_mask).count_ones() as usize] += 1;
    }
    hist
}
