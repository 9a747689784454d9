//! End-to-end protocol simulation.
//!
//! A run follows the protocol stages:
//!
//! 1. the source emits `N` walkers according to a [`SourceModel`];
//! 2. Alice draws a uniform test subset `t` of size `m`, applies the test
//!    measurement to those walkers (outcomes `q`) and the position
//!    measurement to the other `n = N − m` (raw string `r`);
//! 3. the output length `ℓ` follows from `w(q)`; if it is positive, `r` is
//!    encoded to bits and hashed down to `ℓ` key bits with a Toeplitz matrix.
//!
//! Each run is a pure function of its configuration and [`Seeds`].

mod diagnostics;
mod encode;
mod extract;
mod source;

pub use diagnostics::{bits_to_hex, hex_to_bits, key_diagnostics, KeyDiagnostics};
pub use encode::{bits_per_symbol, decode_raw, encode_raw};
pub use extract::{toeplitz_extract, ToeplitzSeed};
pub use source::{DensityOperator, Measurement, PositionSampler, SourceModel, Walker};

use rand::seq::index;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::rate::{key_length, RateInputs, RateReport};
use crate::rng::{seeded, substream};
use crate::sampling::SamplingParams;
use crate::walk::{gamma, WalkParams};

/// Largest `N` for which [`run_protocol`] materializes the raw string.
pub const RAW_STRING_LIMIT: u64 = 100_000_000;

/// Walkers per measurement substream.
const MEASUREMENT_BLOCK: usize = 1 << 12;

/// Uniformly random sorted subset of `m` indices from `0..N`.
pub fn choose_subset(total: u64, test: u64, seed: u64) -> Result<Vec<u64>> {
    if test.saturating_mul(2) > total {
        return Err(invalid(
            "m",
            format!("need m <= N/2, got m = {test}, N = {total}"),
        ));
    }
    let total = usize::try_from(total).map_err(|_| invalid("N", "too large for this platform"))?;
    let mut rng = seeded(seed);
    let mut subset: Vec<u64> = index::sample(&mut rng, total, test as usize)
        .into_iter()
        .map(|i| i as u64)
        .collect();
    subset.sort_unstable();
    Ok(subset)
}

/// Seeds for the three independent random choices of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Seeds {
    pub subset: u64,
    pub measurement: u64,
    pub hash: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub params: WalkParams,
    /// `N`
    pub total: u64,
    /// `m`
    pub test: u64,
    pub epsilon: f64,
    /// Depolarized walkers fail the test with probability `Q` rather than
    /// the exact `Q·(1 − 1/(2P))`.
    pub paper_compat: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    /// Every outcome simulated, key extracted.
    Full,
    /// Outcome counts drawn from their binomial/multinomial laws, no key.
    Aggregate,
}

/// Record of one protocol execution.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    pub mode: RunMode,
    pub params: WalkParams,
    pub sampling: SamplingParams,
    pub gamma: f64,
    /// Test subset `t` (full mode only).
    pub subset: Option<Vec<u64>>,
    /// Test outcomes `q`, 0 for pass (full mode only).
    pub test_outcomes: Option<Vec<u8>>,
    /// `wt(q)`
    pub test_weight: u64,
    /// `w(q)`
    pub wq: f64,
    /// Raw string `r` (full mode only).
    pub raw: Option<Vec<u32>>,
    /// Histogram of `r` over the `P` positions.
    pub position_counts: Vec<u64>,
    pub report: RateReport,
    /// Extracted key, empty on abort (full mode only).
    pub key: Option<Vec<bool>>,
    pub seeds: Seeds,
}

impl ProtocolRun {
    pub fn aborted(&self) -> bool {
        self.report.aborted()
    }
}

enum WalkerSampling<'a> {
    Shared { pass: f64, sampler: PositionSampler },
    PerWalker(&'a SourceModel),
}

/// Simulates one run with every outcome materialized.
pub fn run_protocol(
    config: &ProtocolConfig,
    model: &SourceModel,
    seeds: Seeds,
) -> Result<ProtocolRun> {
    if config.total > RAW_STRING_LIMIT {
        return Err(invalid(
            "N",
            format!(
                "{} exceeds the raw-string limit {RAW_STRING_LIMIT}; use aggregate mode",
                config.total
            ),
        ));
    }
    let positions = config.params.positions();
    model.validate(config.total, positions)?;
    let sampling = SamplingParams::new(config.total, config.test, config.epsilon)?;
    let gamma = gamma(&config.params);
    let subset = choose_subset(config.total, config.test, seeds.subset)?;

    let measurement = Measurement::new(config.params).with_paper_compat(config.paper_compat);
    let walkers = match model {
        SourceModel::Explicit(_) => WalkerSampling::PerWalker(model),
        _ => {
            let walker = model.walker(0);
            WalkerSampling::Shared {
                pass: measurement.test_pass_probability(walker),
                sampler: measurement.position_sampler(walker),
            }
        }
    };

    let total = config.total as usize;
    let mut test_outcomes = Vec::with_capacity(subset.len());
    let mut raw = Vec::with_capacity(total - subset.len());
    let mut next_test = subset.iter().copied().peekable();
    for block_start in (0..total).step_by(MEASUREMENT_BLOCK) {
        let mut rng = substream(seeds.measurement, (block_start / MEASUREMENT_BLOCK) as u64);
        for i in block_start..total.min(block_start + MEASUREMENT_BLOCK) {
            let tested = next_test.next_if_eq(&(i as u64)).is_some();
            match (&walkers, tested) {
                (WalkerSampling::Shared { pass, .. }, true) => {
                    test_outcomes.push(u8::from(rand::Rng::random::<f64>(&mut rng) >= *pass));
                }
                (WalkerSampling::Shared { sampler, .. }, false) => {
                    raw.push(sampler.sample(&mut rng))
                }
                (WalkerSampling::PerWalker(m), true) => {
                    test_outcomes.push(measurement.test_measurement(m.walker(i), &mut rng));
                }
                (WalkerSampling::PerWalker(m), false) => {
                    raw.push(measurement.position_measurement(m.walker(i), &mut rng));
                }
            }
        }
    }

    let mut position_counts = vec![0u64; positions];
    for &z in &raw {
        position_counts[z as usize] += 1;
    }
    let test_weight = test_outcomes.iter().filter(|&&q| q != 0).count() as u64;
    let wq = test_weight as f64 / config.test as f64;
    let report = key_length(&RateInputs {
        sampling,
        positions,
        gamma,
        test_weight: wq,
    })?;

    let key = if report.aborted() {
        Vec::new()
    } else {
        let bits = encode_raw(&raw, positions)?;
        let ell = usize::try_from(report.ell).map_err(|_| invalid("ell", "too large"))?;
        let hash = ToeplitzSeed::random(bits.len(), ell, seeds.hash);
        toeplitz_extract(&bits, &hash, ell)?
    };

    Ok(ProtocolRun {
        mode: RunMode::Full,
        params: config.params,
        sampling,
        gamma,
        subset: Some(subset),
        test_outcomes: Some(test_outcomes),
        test_weight,
        wq,
        raw: Some(raw),
        position_counts,
        report,
        key: Some(key),
        seeds,
    })
}

/// Simulates a run against a depolarizing source without materializing
/// individual outcomes: `wt(q) ~ Binomial(m, p_fail)` and the position
/// histogram is multinomial over `n` draws. No key is extracted.
pub fn run_protocol_aggregate(
    config: &ProtocolConfig,
    model: &SourceModel,
    seeds: Seeds,
) -> Result<ProtocolRun> {
    let SourceModel::Depolarizing { noise } = *model else {
        return Err(Error::UnsupportedModel(
            "aggregate mode needs a depolarizing source",
        ));
    };
    model.validate(config.total, config.params.positions())?;
    let sampling = SamplingParams::new(config.total, config.test, config.epsilon)?;
    let gamma = gamma(&config.params);
    let measurement = Measurement::new(config.params).with_paper_compat(config.paper_compat);
    let walker = Walker::Depolarizing(noise);
    let fail = (1.0 - measurement.test_pass_probability(walker)).clamp(0.0, 1.0);

    let mut rng = seeded(seeds.measurement);
    let test_weight = binomial(config.test, fail).sample(&mut rng);
    let probs = measurement.position_probabilities(walker);
    let mut remaining = sampling.raw();
    let mut mass_left = 1.0f64;
    let mut position_counts = Vec::with_capacity(probs.len());
    for (z, &p) in probs.iter().enumerate() {
        let count = if z + 1 == probs.len() {
            remaining
        } else {
            let conditional = if mass_left > 0.0 {
                (p / mass_left).clamp(0.0, 1.0)
            } else {
                0.0
            };
            binomial(remaining, conditional).sample(&mut rng)
        };
        position_counts.push(count);
        remaining -= count;
        mass_left -= p;
    }

    let wq = test_weight as f64 / config.test as f64;
    let report = key_length(&RateInputs {
        sampling,
        positions: config.params.positions(),
        gamma,
        test_weight: wq,
    })?;
    Ok(ProtocolRun {
        mode: RunMode::Aggregate,
        params: config.params,
        sampling,
        gamma,
        subset: None,
        test_outcomes: None,
        test_weight,
        wq,
        raw: None,
        position_counts,
        report,
        key: None,
        seeds,
    })
}

fn binomial(trials: u64, p: f64) -> Binomial {
    Binomial::new(trials, p).expect("probability clamped to [0, 1]")
}
