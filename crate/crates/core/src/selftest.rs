//! Fast invariant checks run by `qwqrng selftest`.

use num_complex::Complex64;
use rand::Rng;

use crate::binomial::log2_binomial;
use crate::entropy::entropy_d;
use crate::protocol::{toeplitz_extract, ToeplitzSeed};
use crate::rate::key_length_with_delta;
use crate::rng::seeded;
use crate::sampling::{classical_sampling_error, sampling_delta};
use crate::walk::{gamma, gamma_scan, uncertainty_overlap, WalkParams, WalkState};
use crate::Result;

/// Signature of the `h_d` implementation under test.
pub type EntropyFn = fn(u32, f64) -> Result<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SelftestReport {
    pub checks: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Selftest {
    entropy: EntropyFn,
}

impl Default for Selftest {
    fn default() -> Self {
        Self { entropy: entropy_d }
    }
}

type Check = fn(&Selftest) -> std::result::Result<(), String>;

const CHECKS: [(&str, Check); 8] = [
    ("unitarity", check_unitarity),
    ("gamma", check_gamma),
    ("entropy", check_entropy),
    ("toeplitz", check_toeplitz),
    ("sampling-bound", check_sampling_bound),
    ("log-binomial", check_log_binomial),
    ("overlap", check_overlap),
    ("key-length", check_key_length),
];

impl Selftest {
    /// Replaces the entropy function, for exercising the failure path.
    pub fn with_entropy(entropy: EntropyFn) -> Self {
        Self { entropy }
    }

    pub fn run(&self) -> SelftestReport {
        let checks = CHECKS
            .iter()
            .map(|&(name, check)| {
                let outcome = check(self);
                CheckResult {
                    name,
                    passed: outcome.is_ok(),
                    detail: outcome.err().unwrap_or_default(),
                }
            })
            .collect();
        SelftestReport { checks }
    }

    fn h(&self, d: u32, x: f64) -> std::result::Result<f64, String> {
        (self.entropy)(d, x).map_err(|e| e.to_string())
    }
}

/// Runs every check with the library's own functions.
pub fn run_selftest() -> SelftestReport {
    Selftest::default().run()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(what: &str, got: f64, want: f64, tol: f64) -> std::result::Result<(), String> {
    ensure((got - want).abs() <= tol, || {
        format!("{what}: got {got}, expected {want}")
    })
}

fn check_unitarity(_: &Selftest) -> std::result::Result<(), String> {
    let mut rng = seeded(0x5e1f);
    for positions in [2, 5, 11] {
        let amps: Vec<Complex64> = (0..2 * positions)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let mut state = WalkState::from_amplitudes(positions, amps).map_err(|e| e.to_string())?;
        state.normalize();
        let start = state.clone();
        for _ in 0..64 {
            state.step();
        }
        close("norm after 64 steps", state.norm_sqr(), 1.0, 1e-12)?;
        for _ in 0..64 {
            state.step_adjoint();
        }
        close(
            "fidelity after reversal",
            start.inner(&state).norm_sqr(),
            1.0,
            1e-12,
        )?;
    }
    Ok(())
}

fn check_gamma(_: &Selftest) -> std::result::Result<(), String> {
    let at = |p, t| {
        WalkParams::new(p, t)
            .map(|w| gamma(&w))
            .map_err(|e| e.to_string())
    };
    close("gamma(P=2, T=0)", at(2, 0)?, 1.0, 1e-15)?;
    close("gamma(P=4, T=1)", at(4, 1)?, 0.5, 1e-15)?;
    let scan = gamma_scan(5, 4000).map_err(|e| e.to_string())?;
    ensure(scan.steps == 3493, || {
        format!("T* for P=5: got {}, expected 3493", scan.steps)
    })?;
    close("gamma* for P=5", scan.gamma, 0.241789, 5e-6)
}

fn check_entropy(t: &Selftest) -> std::result::Result<(), String> {
    close("h_2(1/4)", t.h(2, 0.25)?, 2.0 - 0.75 * 3f64.log2(), 1e-12)?;
    for d in [2u32, 4, 10, 102] {
        close(&format!("h_{d}(0)"), t.h(d, 0.0)?, 0.0, 1e-15)?;
        let peak = 1.0 - 1.0 / f64::from(d);
        close(&format!("h_{d}(1-1/d)"), t.h(d, peak)?, 1.0, 1e-12)?;
        let below = t.h(d, peak * 0.5)?;
        ensure(below > 0.0 && below < 1.0, || {
            format!("h_{d} not in (0,1) below its peak")
        })?;
    }
    Ok(())
}

fn check_toeplitz(_: &Selftest) -> std::result::Result<(), String> {
    let mut rng = seeded(0x7e11);
    for (k, ell) in [(40, 13), (700, 300)] {
        let seed = ToeplitzSeed::random(k, ell, rng.random());
        let x: Vec<bool> = (0..k).map(|_| rng.random()).collect();
        let y: Vec<bool> = (0..k).map(|_| rng.random()).collect();
        let xy: Vec<bool> = x.iter().zip(&y).map(|(a, b)| a ^ b).collect();
        let hash = |v: &[bool]| toeplitz_extract(v, &seed, ell).map_err(|e| e.to_string());
        let (hx, hy, hxy) = (hash(&x)?, hash(&y)?, hash(&xy)?);
        let sum: Vec<bool> = hx.iter().zip(&hy).map(|(a, b)| a ^ b).collect();
        ensure(sum == hxy, || {
            format!("hash not linear for k = {k}, ell = {ell}")
        })?;
        let s = seed.bits();
        let matrix: Vec<bool> = (0..ell)
            .map(|i| (0..k).fold(false, |acc, j| acc ^ (s[i + k - 1 - j] & x[j])))
            .collect();
        ensure(matrix == hx, || {
            format!("hash differs from matrix product for k = {k}")
        })?;
    }
    Ok(())
}

fn check_sampling_bound(_: &Selftest) -> std::result::Result<(), String> {
    for (n, m, eps) in [
        (1000u64, 31u64, 1e-3),
        (1_000_000, 1000, 1e-6),
        (10_000, 5000, 0.5),
    ] {
        let delta = sampling_delta(n, m, eps).map_err(|e| e.to_string())?;
        let err = classical_sampling_error(n, m, delta).map_err(|e| e.to_string())?;
        close(
            &format!("sampling error / eps^2 at N = {n}"),
            err / (eps * eps),
            1.0,
            1e-9,
        )?;
    }
    Ok(())
}

fn check_log_binomial(_: &Selftest) -> std::result::Result<(), String> {
    let lb = |n, m| log2_binomial(n, m).map_err(|e| e.to_string());
    close("log2 C(4,2)", lb(4, 2)?, 6f64.log2(), 1e-12)?;
    close("log2 C(52,5)", lb(52, 5)?, 2_598_960f64.log2(), 1e-11)?;
    close(
        "log2 C(100,50)",
        lb(100, 50)?,
        1.008_913_445_455_642e29f64.log2(),
        1e-9,
    )
}

fn check_overlap(_: &Selftest) -> std::result::Result<(), String> {
    for p in [2, 3] {
        let params = WalkParams::new(p, 0).map_err(|e| e.to_string())?;
        close(
            &format!("overlap at P = {p}, T = 0"),
            uncertainty_overlap(&params),
            1.0,
            1e-10,
        )?;
    }
    Ok(())
}

/// Recomputes `ℓ` term by term and compares with the library.
fn check_key_length(t: &Selftest) -> std::result::Result<(), String> {
    let (n_total, m, eps, p, wq) = (2000u64, 44u64, 1e-3, 5usize, 0.02);
    let params = WalkParams::new(p, 7).map_err(|e| e.to_string())?;
    let g = gamma(&params);
    let delta = sampling_delta(n_total, m, eps).map_err(|e| e.to_string())?;
    let n = (n_total - m) as f64;
    let d = 2 * p as u32;
    let x = wq + delta;
    let h = if x > 1.0 - 1.0 / f64::from(d) {
        1.0
    } else {
        t.h(d, x)?
    };
    let log2_choose: f64 = (0..m)
        .map(|i| ((n_total - i) as f64 / (m - i) as f64).log2())
        .sum();
    let want = -n * (1.0 - wq - delta) * g.log2()
        - n * h * f64::from(d).log2()
        - 2.0 * (1.0 / eps).log2()
        - log2_choose;
    let report =
        key_length_with_delta(n_total, m, eps, delta, p, g, wq).map_err(|e| e.to_string())?;
    close("raw ell", report.raw_ell, want, 1e-9 * want.abs().max(1.0))
}
