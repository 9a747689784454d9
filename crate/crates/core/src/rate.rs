//! Finite-key output length and bit-generation rate curves.
//!
//! For `N` signals of which `m` are tested, observed test weight `w(q)`,
//! walk dimension `2P` and maximal positional probability `γ`:
//!
//! ```text
//! ℓ = −η_q·log₂γ − n·H̄_{2P}(w(q)+δ)·log₂(2P) − 2·log₂(1/ε) − log₂C(N, m)
//! η_q = n·(1 − w(q) − δ),   n = N − m
//! ```
//!
//! The output is `ε_PA = 5ε + 4ε^{1/3}` close to uniform except with
//! probability `ε^{1/3}`. A non-positive `ℓ` means the run aborts.

use serde::Serialize;

use crate::binomial::log2_binomial;
use crate::entropy::extended_entropy_d;
use crate::error::{invalid, Result};
use crate::sampling::{sampling_delta, SamplingParams};

/// Everything the output-length formula depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateInputs {
    pub sampling: SamplingParams,
    pub positions: usize,
    pub gamma: f64,
    /// Observed relative test weight `w(q)`.
    pub test_weight: f64,
}

/// The four terms of `ℓ`, each as a non-negative magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateTerms {
    /// `−η_q·log₂γ`
    pub min_entropy: f64,
    /// `n·H̄_{2P}(w(q)+δ)·log₂(2P)`
    pub entropy_penalty: f64,
    /// `2·log₂(1/ε)`
    pub epsilon_cost: f64,
    /// `log₂C(N, m)`, the randomness spent choosing the test subset.
    pub subset_cost: f64,
}

impl RateTerms {
    pub fn total(&self) -> f64 {
        self.min_entropy - self.entropy_penalty - self.epsilon_cost - self.subset_cost
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateReport {
    /// Output length in bits: `max(0, ⌊raw_ell⌋)`.
    pub ell: u64,
    pub raw_ell: f64,
    pub eta_q: f64,
    /// `ε^{1/3}`
    pub failure_probability: f64,
    /// `5ε + 4ε^{1/3}`
    pub security_distance: f64,
    pub terms: RateTerms,
}

impl RateReport {
    pub fn aborted(&self) -> bool {
        self.ell == 0
    }
}

fn check_rate_inputs(positions: usize, gamma: f64, test_weight: f64) -> Result<()> {
    if positions < 2 {
        return Err(invalid("P", "need at least 2 positions"));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(invalid("gamma", format!("{gamma} outside (0, 1]")));
    }
    if !(0.0..=1.0).contains(&test_weight) {
        return Err(invalid("w(q)", format!("{test_weight} outside [0, 1]")));
    }
    Ok(())
}

pub fn key_length(inputs: &RateInputs) -> Result<RateReport> {
    let s = &inputs.sampling;
    key_length_with_delta(
        s.total(),
        s.test(),
        s.epsilon(),
        s.delta(),
        inputs.positions,
        inputs.gamma,
        inputs.test_weight,
    )
}

/// [`key_length`] with an explicit deviation `δ` instead of the one implied
/// by `(N, m, ε)`. Useful for sensitivity analysis.
pub fn key_length_with_delta(
    total: u64,
    test: u64,
    epsilon: f64,
    delta: f64,
    positions: usize,
    gamma: f64,
    test_weight: f64,
) -> Result<RateReport> {
    check_rate_inputs(positions, gamma, test_weight)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid("epsilon", format!("{epsilon} outside (0, 1)")));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(invalid(
            "delta",
            format!("{delta} must be finite and non-negative"),
        ));
    }
    if test < 1 || test.saturating_mul(2) > total {
        return Err(invalid(
            "m",
            format!("need 1 <= m <= N/2, got m = {test}, N = {total}"),
        ));
    }
    let raw = (total - test) as f64;
    let dim = 2 * positions;
    let eta_q = (raw * (1.0 - test_weight - delta)).max(0.0);
    let bits_per_symbol = (dim as f64).log2();
    let terms = RateTerms {
        min_entropy: eta_q * -gamma.log2(),
        entropy_penalty: raw
            * extended_entropy_d(dim as u32, test_weight + delta)?
            * bits_per_symbol,
        epsilon_cost: -2.0 * epsilon.log2(),
        subset_cost: log2_binomial(total, test)?,
    };
    let raw_ell = terms.total();
    let ell = if raw_ell >= 1.0 {
        raw_ell.floor() as u64
    } else {
        0
    };
    let cube_root = epsilon.cbrt();
    Ok(RateReport {
        ell,
        raw_ell,
        eta_q,
        failure_probability: cube_root,
        security_distance: 5.0 * epsilon + 4.0 * cube_root,
        terms,
    })
}

/// How the test subset size `m` follows from `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestSizeRule {
    /// `m = ⌊√N⌋`
    Sqrt,
    Fixed(u64),
}

impl TestSizeRule {
    pub fn test_size(&self, total: u64) -> u64 {
        match *self {
            TestSizeRule::Sqrt => total.isqrt(),
            TestSizeRule::Fixed(m) => m,
        }
    }
}

impl std::fmt::Display for TestSizeRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestSizeRule::Sqrt => write!(f, "sqrt"),
            TestSizeRule::Fixed(m) => write!(f, "fixed:{m}"),
        }
    }
}

impl std::str::FromStr for TestSizeRule {
    type Err = crate::Error;

    /// Parses `sqrt` or `fixed:<m>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "sqrt" => Ok(TestSizeRule::Sqrt),
            Some(("fixed", m)) => m
                .parse()
                .map(TestSizeRule::Fixed)
                .map_err(|_| invalid("m_rule", format!("bad test count {m:?}"))),
            _ => Err(invalid(
                "m_rule",
                format!("expected sqrt or fixed:<m>, got {s:?}"),
            )),
        }
    }
}

/// Test weight expected from a depolarizing source with parameter `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightModel {
    /// `w(q) = Q·(1 − 1/(2P))`, the Born probability of failing the test.
    Exact,
    /// `w(q) = Q`, the approximation used for the published rate curves.
    PaperCompat,
}

impl WeightModel {
    pub fn test_weight(&self, noise: f64, positions: usize) -> f64 {
        match self {
            WeightModel::Exact => noise * (1.0 - 1.0 / (2 * positions) as f64),
            WeightModel::PaperCompat => noise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSettings {
    pub positions: usize,
    /// Depolarizing parameter `Q`.
    pub noise: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub test_size: TestSizeRule,
    pub weight_model: WeightModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    #[serde(rename = "N")]
    pub total: u64,
    #[serde(rename = "m")]
    pub test: u64,
    pub delta: f64,
    #[serde(rename = "wq")]
    pub test_weight: f64,
    pub ell: u64,
    /// `ℓ / N`
    pub rate: f64,
}

/// Evaluates `ℓ/N` at every grid point.
pub fn rate_curve(settings: &CurveSettings, grid: &[u64]) -> Result<Vec<CurvePoint>> {
    if !(0.0..1.0).contains(&settings.noise) {
        return Err(invalid("Q", format!("{} outside [0, 1)", settings.noise)));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("N_grid", "grid must be strictly increasing"));
    }
    let test_weight = settings
        .weight_model
        .test_weight(settings.noise, settings.positions);
    grid.iter()
        .map(|&total| {
            let test = settings.test_size.test_size(total);
            let delta = sampling_delta(total, test, settings.epsilon)?;
            let report = key_length_with_delta(
                total,
                test,
                settings.epsilon,
                delta,
                settings.positions,
                settings.gamma,
                test_weight,
            )?;
            Ok(CurvePoint {
                total,
                test,
                delta,
                test_weight,
                ell: report.ell,
                rate: report.ell as f64 / total as f64,
            })
        })
        .collect()
}

/// `N → ∞` limit of `ℓ/N` under `m = ⌊√N⌋`, where `δ` and the overhead
/// terms vanish: `(1−Q)·(−log₂γ) − H̄_{2P}(Q)·log₂(2P)`, clamped at zero.
pub fn asymptotic_rate(positions: usize, noise: f64, gamma: f64) -> Result<f64> {
    check_rate_inputs(positions, gamma, noise)?;
    if noise >= 1.0 {
        return Err(invalid("Q", "must be below 1"));
    }
    let dim = 2 * positions;
    let rate = (1.0 - noise) * -gamma.log2()
        - extended_entropy_d(dim as u32, noise)? * (dim as f64).log2();
    Ok(rate.max(0.0))
}

/// `points` logarithmically spaced integers from `start` to `end`, rounded
/// and with duplicates removed.
pub fn log_grid(start: f64, end: f64, points: usize) -> Result<Vec<u64>> {
    if !(start >= 1.0 && end >= start && end < 1.8e19) {
        return Err(invalid("N_grid", format!("bad range {start}..{end}")));
    }
    if points < 1 || (points == 1 && start != end) {
        return Err(invalid("N_grid", "need at least two points for a range"));
    }
    let (lo, hi) = (start.ln(), end.ln());
    let mut grid: Vec<u64> = (0..points)
        .map(|i| {
            let frac = if points == 1 {
                0.0
            } else {
                i as f64 / (points - 1) as f64
            };
            (lo + frac * (hi - lo)).exp().round() as u64
        })
        .collect();
    grid.dedup();
    Ok(grid)
}

/// Logarithmic grid from `10⁴` to `10¹²`, ten points per decade.
pub fn default_grid() -> Vec<u64> {
    log_grid(1e4, 1e12, 81).expect("static grid is valid")
}
