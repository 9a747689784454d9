//! Source models and the two measurements applied to each walker.
//!
//! Walkers are independent: walker `i` of a run is described by
//! [`SourceModel::walker`]. The test measurement `{|w₀⟩⟨w₀|, I − |w₀⟩⟨w₀|}`
//! reports 0 on a pass; the position measurement `{I_C ⊗ |z⟩⟨z|}` reports `z`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::walk::{flat_index, honest_walker, position_distribution, WalkParams, WalkState};

const DENSITY_TOLERANCE: f64 = 1e-8;

/// A validated `2P × 2P` density operator for one walker.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    positions: usize,
    matrix: DMatrix<Complex64>,
}

impl DensityOperator {
    /// Checks Hermiticity, unit trace and positive semi-definiteness, each
    /// within `1e-8`.
    pub fn new(positions: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = 2 * positions;
        if positions < 2 || matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::InvalidDensity(format!(
                "expected a {dim}x{dim} matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let asym = (&matrix - matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if asym > DENSITY_TOLERANCE {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (deviation {asym:e})"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > DENSITY_TOLERANCE || trace.im.abs() > DENSITY_TOLERANCE {
            return Err(Error::InvalidDensity(format!("trace {trace} is not 1")));
        }
        let min_eigen = matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eigen < -DENSITY_TOLERANCE {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min_eigen:e}"
            )));
        }
        Ok(Self { positions, matrix })
    }

    /// `|ψ⟩⟨ψ|` for a normalized state.
    pub fn pure(state: &WalkState) -> Result<Self> {
        let v = state.amplitudes();
        let n = v.len();
        Self::new(
            state.positions(),
            DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj()),
        )
    }

    pub fn maximally_mixed(positions: usize) -> Result<Self> {
        let dim = 2 * positions;
        let scale = Complex64::new(1.0 / dim as f64, 0.0);
        Self::new(positions, DMatrix::identity(dim, dim) * scale)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn positions(&self) -> usize {
        self.positions
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, state: &WalkState) -> f64 {
        let v = state.amplitudes();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, vi) in v.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                acc += vi.conj() * self.matrix[(i, j)] * vj;
            }
        }
        acc.re
    }

    /// `tr[ρ·(I_C ⊗ |z⟩⟨z|)]` for every position `z`.
    pub fn position_probabilities(&self) -> Vec<f64> {
        let p = self.positions;
        (0..p)
            .map(|z| {
                (0..2)
                    .map(|c| self.matrix[(flat_index(c, z, p), flat_index(c, z, p))].re)
                    .sum::<f64>()
                    .max(0.0)
            })
            .collect()
    }
}

/// What the source emits for each of the `N` walkers.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceModel {
    /// Every walker is `|w₀⟩`.
    Ideal,
    /// Every walker is `(1−Q)·|w₀⟩⟨w₀| + Q·I/(2P)`.
    Depolarizing { noise: f64 },
    /// One density operator per walker.
    Explicit(Vec<DensityOperator>),
}

impl SourceModel {
    pub fn depolarizing(noise: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&noise) {
            return Err(invalid("Q", format!("{noise} outside [0, 1]")));
        }
        Ok(SourceModel::Depolarizing { noise })
    }

    /// Checks the model against a run of `total` walkers of dimension `2P`.
    pub fn validate(&self, total: u64, positions: usize) -> Result<()> {
        match self {
            SourceModel::Ideal => Ok(()),
            SourceModel::Depolarizing { noise } => SourceModel::depolarizing(*noise).map(|_| ()),
            SourceModel::Explicit(ops) => {
                if ops.len() as u64 != total {
                    return Err(invalid(
                        "source",
                        format!(
                            "explicit model has {} walkers, run needs {total}",
                            ops.len()
                        ),
                    ));
                }
                if let Some(op) = ops.iter().find(|op| op.positions != positions) {
                    return Err(invalid(
                        "source",
                        format!(
                            "walker of dimension {} in a P = {positions} run",
                            2 * op.positions
                        ),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn walker(&self, index: usize) -> Walker<'_> {
        match self {
            SourceModel::Ideal => Walker::Ideal,
            SourceModel::Depolarizing { noise } => Walker::Depolarizing(*noise),
            SourceModel::Explicit(ops) => Walker::Explicit(&ops[index]),
        }
    }
}

/// A single walker as emitted by the source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Walker<'a> {
    Ideal,
    Depolarizing(f64),
    Explicit(&'a DensityOperator),
}

/// Alice's measurement devices for a fixed walk.
#[derive(Debug, Clone)]
pub struct Measurement {
    params: WalkParams,
    honest: WalkState,
    walk_probs: Vec<f64>,
    paper_compat: bool,
}

impl Measurement {
    pub fn new(params: WalkParams) -> Self {
        let honest = honest_walker(&params);
        let walk_probs = position_distribution(&honest).probs().to_vec();
        Self {
            params,
            honest,
            walk_probs,
            paper_compat: false,
        }
    }

    /// With `paper_compat` a depolarized walker fails the test with
    /// probability `Q` instead of `Q·(1 − 1/(2P))`.
    pub fn with_paper_compat(mut self, paper_compat: bool) -> Self {
        self.paper_compat = paper_compat;
        self
    }

    pub fn params(&self) -> &WalkParams {
        &self.params
    }

    /// Probability that the test measurement returns 0.
    pub fn test_pass_probability(&self, walker: Walker<'_>) -> f64 {
        match walker {
            Walker::Ideal => 1.0,
            Walker::Depolarizing(q) if self.paper_compat => 1.0 - q,
            Walker::Depolarizing(q) => (1.0 - q) + q / self.params.dimension() as f64,
            Walker::Explicit(rho) => rho.expectation(&self.honest).clamp(0.0, 1.0),
        }
    }

    pub fn position_probabilities(&self, walker: Walker<'_>) -> Vec<f64> {
        match walker {
            Walker::Ideal => self.walk_probs.clone(),
            Walker::Depolarizing(q) => {
                let uniform = q / self.params.positions() as f64;
                self.walk_probs
                    .iter()
                    .map(|p| (1.0 - q) * p + uniform)
                    .collect()
            }
            Walker::Explicit(rho) => rho.position_probabilities(),
        }
    }

    /// Samples the test outcome: 0 on pass, 1 on fail.
    pub fn test_measurement<R: Rng + ?Sized>(&self, walker: Walker<'_>, rng: &mut R) -> u8 {
        let pass = self.test_pass_probability(walker);
        u8::from(rng.random::<f64>() >= pass)
    }

    pub fn position_measurement<R: Rng + ?Sized>(&self, walker: Walker<'_>, rng: &mut R) -> u32 {
        self.position_sampler(walker).sample(rng)
    }

    /// A reusable sampler for the position outcome of `walker`.
    pub fn position_sampler(&self, walker: Walker<'_>) -> PositionSampler {
        PositionSampler::new(&self.position_probabilities(walker))
    }
}

/// Draws positions from a fixed distribution.
#[derive(Debug, Clone)]
pub struct PositionSampler(WeightedIndex<f64>);

impl PositionSampler {
    fn new(probs: &[f64]) -> Self {
        Self(WeightedIndex::new(probs).expect("position probabilities are a distribution"))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.0.sample(rng) as u32
    }
}
