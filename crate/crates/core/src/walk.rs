//! Discrete-time Hadamard walk on a cycle of `P` positions.
//!
//! The walker lives in `C² ⊗ C^P`. Basis state `|c, x⟩` (coin `c ∈ {0, 1}`,
//! position `x ∈ 0..P`) is stored at flat index `c·P + x`, so `|0,0⟩` is
//! index 0. One walk step is `W = S·(H ⊗ I_P)`: a Hadamard on the coin
//! followed by the shift `|0,x⟩ → |0,x+1⟩`, `|1,x⟩ → |1,x−1⟩` (mod `P`).
//!
//! Evolution is always applied as repeated `O(P)` sparse steps.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// The coin operator. The walk is only ever evaluated with the Hadamard coin.
pub const HADAMARD: [[f64; 2]; 2] = [
    [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
    [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
];

/// Public walk settings: cycle size `P` and step count `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct WalkParams {
    #[serde(rename = "P")]
    positions: usize,
    #[serde(rename = "T")]
    steps: usize,
}

impl WalkParams {
    pub fn new(positions: usize, steps: usize) -> Result<Self> {
        check_positions(positions)?;
        Ok(Self { positions, steps })
    }

    pub fn positions(&self) -> usize {
        self.positions
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Dimension `2P` of a single walker.
    pub fn dimension(&self) -> usize {
        2 * self.positions
    }
}

fn check_positions(positions: usize) -> Result<()> {
    if positions < 2 {
        return Err(invalid(
            "P",
            format!("need at least 2 positions, got {positions}"),
        ));
    }
    Ok(())
}

/// Flat index of basis state `|coin, position⟩`.
#[inline]
pub fn flat_index(coin: usize, position: usize, positions: usize) -> usize {
    coin * positions + position
}

/// Amplitude vector of one walker over the `2P` coin-position basis.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    positions: usize,
    amplitudes: Vec<Complex64>,
}

impl WalkState {
    /// The basis state `|coin, position⟩`.
    pub fn basis(coin: usize, position: usize, positions: usize) -> Result<Self> {
        check_positions(positions)?;
        if coin > 1 {
            return Err(invalid(
                "c",
                format!("coin index must be 0 or 1, got {coin}"),
            ));
        }
        if position >= positions {
            return Err(invalid(
                "x",
                format!("position {position} out of range for P = {positions}"),
            ));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 2 * positions];
        amplitudes[flat_index(coin, position, positions)] = Complex64::new(1.0, 0.0);
        Ok(Self {
            positions,
            amplitudes,
        })
    }

    /// Wraps an amplitude vector of length `2P`. The vector is taken as is;
    /// callers that need a normalized state should call [`WalkState::normalize`].
    pub fn from_amplitudes(positions: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_positions(positions)?;
        if amplitudes.len() != 2 * positions {
            return Err(invalid(
                "amplitudes",
                format!(
                    "expected {} entries, got {}",
                    2 * positions,
                    amplitudes.len()
                ),
            ));
        }
        Ok(Self {
            positions,
            amplitudes,
        })
    }

    pub fn positions(&self) -> usize {
        self.positions
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, coin: usize, position: usize) -> Complex64 {
        self.amplitudes[flat_index(coin, position, self.positions)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= norm);
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &WalkState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Applies one walk step `S·(H ⊗ I_P)` in place.
    pub fn step(&mut self) {
        let p = self.positions;
        let (heads, tails) = self.amplitudes.split_at_mut(p);
        apply_coin(heads, tails);
        heads.rotate_right(1);
        tails.rotate_left(1);
    }

    /// Applies `W† = (H ⊗ I_P)·S†` in place, undoing one [`WalkState::step`].
    pub fn step_adjoint(&mut self) {
        let p = self.positions;
        let (heads, tails) = self.amplitudes.split_at_mut(p);
        heads.rotate_left(1);
        tails.rotate_right(1);
        apply_coin(heads, tails);
    }
}

fn apply_coin(heads: &mut [Complex64], tails: &mut [Complex64]) {
    let [[h00, h01], [h10, h11]] = HADAMARD;
    for (a, b) in heads.iter_mut().zip(tails.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = x * h00 + y * h01;
        *b = x * h10 + y * h11;
    }
}

/// One application of the walk operator.
pub fn walk_step(state: &WalkState) -> WalkState {
    let mut next = state.clone();
    next.step();
    next
}

/// `W^T |coin, position⟩`.
pub fn evolve(coin: usize, position: usize, params: &WalkParams) -> Result<WalkState> {
    let mut state = WalkState::basis(coin, position, params.positions)?;
    for _ in 0..params.steps {
        state.step();
    }
    Ok(state)
}

/// The walker state `|w₀⟩ = W^T |0,0⟩` an honest source emits.
pub fn honest_walker(params: &WalkParams) -> WalkState {
    evolve(0, 0, params).expect("|0,0> exists for every valid walk")
}

/// Probability of observing the walker at each position, coin traced out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositionDistribution {
    probs: Vec<f64>,
}

impl PositionDistribution {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn max(&self) -> f64 {
        self.probs.iter().copied().fold(0.0, f64::max)
    }
}

pub fn position_distribution(state: &WalkState) -> PositionDistribution {
    let p = state.positions;
    let probs = (0..p)
        .map(|z| state.amplitudes[z].norm_sqr() + state.amplitudes[p + z].norm_sqr())
        .collect();
    PositionDistribution { probs }
}

/// Maximal positional probability `γ` of `W^T |0,0⟩`.
/// Rounded down to 1 when round-off pushes it above.
pub fn gamma(params: &WalkParams) -> f64 {
    position_distribution(&honest_walker(params)).max().min(1.0)
}

/// Iterator over `(T, γ(P, T))` for `T = 1, 2, ...`, one walk step per item.
#[derive(Debug, Clone)]
pub struct GammaSeries {
    state: WalkState,
    steps: usize,
}

impl Iterator for GammaSeries {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<Self::Item> {
        self.state.step();
        self.steps += 1;
        Some((self.steps, position_distribution(&self.state).max()))
    }
}

pub fn gamma_series(positions: usize) -> Result<GammaSeries> {
    Ok(GammaSeries {
        state: WalkState::basis(0, 0, positions)?,
        steps: 0,
    })
}

/// Result of minimizing `γ` over step counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaScan {
    pub steps: usize,
    pub gamma: f64,
}

/// Finds the `T ∈ [1, max_steps]` minimizing `γ(P, T)`; the smallest such `T`
/// wins ties.
pub fn gamma_scan(positions: usize, max_steps: usize) -> Result<GammaScan> {
    if max_steps < 1 {
        return Err(invalid("T_max", "must be at least 1"));
    }
    let mut best = GammaScan {
        steps: 0,
        gamma: f64::INFINITY,
    };
    for (steps, gamma) in gamma_series(positions)?.take(max_steps) {
        if gamma < best.gamma {
            best = GammaScan { steps, gamma };
        }
    }
    Ok(best)
}

/// Probability `|⟨w₀|state⟩|²` that the test POVM returns outcome 0.
pub fn walk_basis_fidelity(state: &WalkState, params: &WalkParams) -> f64 {
    honest_walker(params).inner(state).norm_sqr()
}

fn projector_onto(state: &WalkState) -> DMatrix<Complex64> {
    let v = state.amplitudes();
    let n = v.len();
    DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj())
}

fn position_projector(positions: usize, position: usize) -> DMatrix<Complex64> {
    let n = 2 * positions;
    let mut z = DMatrix::zeros(n, n);
    for coin in 0..2 {
        let i = flat_index(coin, position, positions);
        z[(i, i)] = Complex64::new(1.0, 0.0);
    }
    z
}

fn test_projectors(params: &WalkParams) -> [DMatrix<Complex64>; 2] {
    let w0 = projector_onto(&honest_walker(params));
    let w1 = DMatrix::identity(params.dimension(), params.dimension()) - &w0;
    [w0, w1]
}

fn op_norm_sqr(m: &DMatrix<Complex64>) -> f64 {
    m.singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
        .powi(2)
}

/// `‖√W_x √Z_y‖²_op` for the test projector `W_x` (`x = 0` is `|w₀⟩⟨w₀|`)
/// and the position projector `Z_y = I_C ⊗ |y⟩⟨y|`.
pub fn projector_overlap(params: &WalkParams, test_outcome: usize, position: usize) -> Result<f64> {
    if test_outcome > 1 {
        return Err(invalid("x", "test outcome must be 0 or 1"));
    }
    if position >= params.positions {
        return Err(invalid("y", format!("position {position} out of range")));
    }
    let tests = test_projectors(params);
    let z = position_projector(params.positions, position);
    Ok(op_norm_sqr(&(&tests[test_outcome] * z)))
}

/// `max_{x,y} ‖√W_x √Z_y‖²_op` over the test and position POVMs, computed by
/// a full singular value decomposition of each product.
pub fn uncertainty_overlap(params: &WalkParams) -> f64 {
    let tests = test_projectors(params);
    let mut best = 0.0f64;
    for y in 0..params.positions {
        let z = position_projector(params.positions, y);
        for w in &tests {
            best = best.max(op_norm_sqr(&(w * &z)));
        }
    }
    best
}

/// Classical min-entropy `−log₂ max_x p_x` in bits.
pub fn min_entropy_of_distribution(probs: &[f64]) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::Empty);
    }
    if probs.iter().any(|p| !(0.0..=1.0 + 1e-12).contains(p)) {
        return Err(invalid("p", "entries must lie in [0, 1]"));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { sum });
    }
    let max = probs.iter().copied().fold(0.0, f64::max);
    Ok(-max.log2())
}
