//! Finite-sample statistics of the random-subset sampling strategy.
//!
//! A subset `t` of `m` out of `N` positions is drawn uniformly; the relative
//! weight of the observed part `q_t` estimates that of the rest `q_{−t}`.
//! Subsets are 0-based index sets throughout.

use rand::seq::index;
use rand::Rng;
use serde::Serialize;

use crate::entropy::Word;
use crate::error::{invalid, Result};
use crate::rng::{substream, SimRng};

/// `N`, `m`, `ε` and the deviation `δ` they imply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingParams {
    #[serde(rename = "N")]
    total: u64,
    #[serde(rename = "m")]
    test: u64,
    epsilon: f64,
    delta: f64,
}

impl SamplingParams {
    pub fn new(total: u64, test: u64, epsilon: f64) -> Result<Self> {
        let delta = sampling_delta(total, test, epsilon)?;
        Ok(Self {
            total,
            test,
            epsilon,
            delta,
        })
    }

    /// `N`, the number of signals.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// `m`, the size of the test subset.
    pub fn test(&self) -> u64 {
        self.test
    }

    /// `n = N − m`, the number of signals left for the raw string.
    pub fn raw(&self) -> u64 {
        self.total - self.test
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

fn check_sizes(total: u64, test: u64) -> Result<()> {
    if test < 1 {
        return Err(invalid("m", "test subset must be non-empty"));
    }
    if test.checked_mul(2).is_none_or(|twice| twice > total) {
        return Err(invalid(
            "m",
            format!("need m <= N/2, got m = {test}, N = {total}"),
        ));
    }
    Ok(())
}

/// `δ = √((N+2)·ln(2/ε²) / (m·N))`.
pub fn sampling_delta(total: u64, test: u64, epsilon: f64) -> Result<f64> {
    check_sizes(total, test)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid("epsilon", format!("{epsilon} outside (0, 1)")));
    }
    let log_term = std::f64::consts::LN_2 - 2.0 * epsilon.ln();
    // (N+2)/N written as 1 + 2/N stays monotone in N after rounding.
    Ok(((1.0 + 2.0 / total as f64) * log_term / test as f64).sqrt())
}

/// Upper bound `2·exp(−δ²·m·(n+m)/(m+n+2))` on the probability that a word
/// falls outside the good set for a random subset.
pub fn classical_sampling_error(total: u64, test: u64, delta: f64) -> Result<f64> {
    check_sizes(total, test)?;
    if delta.is_nan() || delta < 0.0 {
        return Err(invalid("delta", format!("{delta} must be non-negative")));
    }
    let (m, n) = (test as f64, (total - test) as f64);
    Ok(2.0 * (-delta * delta * m * (n + m) / (m + n + 2.0)).exp())
}

/// Relative weights of the sampled and unsampled parts of `symbols`.
/// `in_subset` must be a membership mask of the same length.
fn split_weights<T: Copy + Default + PartialEq>(symbols: &[T], in_subset: &[bool]) -> (f64, f64) {
    let (mut inside, mut inside_weight, mut outside_weight) = (0usize, 0usize, 0usize);
    for (s, &sel) in symbols.iter().zip(in_subset) {
        let nonzero = *s != T::default();
        if sel {
            inside += 1;
            inside_weight += nonzero as usize;
        } else {
            outside_weight += nonzero as usize;
        }
    }
    let outside = symbols.len() - inside;
    (
        inside_weight as f64 / inside as f64,
        outside_weight as f64 / outside as f64,
    )
}

/// Whether `|w(q_t) − w(q_{−t})| ≤ δ`.
pub fn good_set_member(word: &Word, subset: &[usize], delta: f64) -> Result<bool> {
    let len = word.len();
    let mut mask = vec![false; len];
    for &i in subset {
        if i >= len {
            return Err(invalid(
                "t",
                format!("index {i} out of range for word of length {len}"),
            ));
        }
        if std::mem::replace(&mut mask[i], true) {
            return Err(invalid("t", format!("index {i} repeated")));
        }
    }
    if subset.is_empty() || subset.len() == len {
        return Err(invalid(
            "t",
            "subset and its complement must both be non-empty",
        ));
    }
    let (inside, outside) = split_weights(word.symbols(), &mask);
    Ok((inside - outside).abs() <= delta)
}

/// Word families for [`monte_carlo_sampling_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WordGenerator {
    /// Every symbol equal to the given value.
    Constant(u32),
    /// Alternating runs of zero and nonzero symbols of the given length.
    Blocks(usize),
    /// First half nonzero, second half zero.
    HalfHeavy,
    /// Each symbol independently nonzero with the given probability.
    Bernoulli(f64),
}

impl WordGenerator {
    fn draw(&self, len: usize, alphabet: u32, rng: &mut SimRng) -> Vec<u32> {
        let nonzero = |rng: &mut SimRng| rng.random_range(1..alphabet);
        match *self {
            WordGenerator::Constant(s) => vec![s % alphabet; len],
            WordGenerator::Blocks(run) => {
                let run = run.max(1);
                (0..len)
                    .map(|i| if (i / run) % 2 == 1 { nonzero(rng) } else { 0 })
                    .collect()
            }
            WordGenerator::HalfHeavy => (0..len)
                .map(|i| if i < len / 2 { nonzero(rng) } else { 0 })
                .collect(),
            WordGenerator::Bernoulli(p) => (0..len)
                .map(|_| if rng.random_bool(p) { nonzero(rng) } else { 0 })
                .collect(),
        }
    }
}

/// Settings for an empirical check of the sampling bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingCheck {
    pub total: usize,
    pub test: usize,
    pub alphabet: u32,
    pub delta: f64,
}

/// Fraction of trials in which a drawn word and a uniform size-`m` subset
/// give `|w(q_t) − w(q_{−t})| > δ`. Trial `i` uses substream `i` of `seed`.
pub fn monte_carlo_sampling_check(
    check: &SamplingCheck,
    generator: WordGenerator,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    check_sizes(check.total as u64, check.test as u64)?;
    if check.alphabet < 2 {
        return Err(invalid("d", "alphabet needs at least 2 symbols"));
    }
    if trials < 1 {
        return Err(invalid("trials", "need at least one trial"));
    }
    if let WordGenerator::Bernoulli(p) = generator {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid("p", format!("{p} outside [0, 1]")));
        }
    }
    let mut mask = vec![false; check.total];
    let mut failures = 0u64;
    for trial in 0..trials {
        let mut rng = substream(seed, trial);
        let word = generator.draw(check.total, check.alphabet, &mut rng);
        mask.iter_mut().for_each(|m| *m = false);
        for i in index::sample(&mut rng, check.total, check.test) {
            mask[i] = true;
        }
        let (inside, outside) = split_weights(&word, &mask);
        if (inside - outside).abs() > check.delta {
            failures += 1;
        }
    }
    Ok(failures as f64 / trials as f64)
}

/// Number of words of length `n` over `d` symbols with weight at most
/// `max_weight`: `Σ_{k ≤ max_weight} C(n, k)·(d−1)^k`.
pub fn hamming_ball_volume(n: u32, d: u32, max_weight: u32) -> f64 {
    let mut binom = 1.0f64;
    let mut power = 1.0f64;
    let mut total = 0.0;
    for k in 0..=max_weight.min(n) {
        if k > 0 {
            binom = binom * f64::from(n - k + 1) / f64::from(k);
            power *= f64::from(d - 1);
        }
        total += binom * power;
    }
    total
}
