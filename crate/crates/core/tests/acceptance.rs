//! Acceptance criteria, one line each. Exits nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::DVector;
use num_complex::Complex64;
use qwqrng_core::protocol::*;
use qwqrng_core::rate::*;
use qwqrng_core::rng::{seeded, substream};
use qwqrng_core::sampling::*;
use qwqrng_core::walk::*;
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! check {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn walk_correctness() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for p in [2, 3, 5, 11] {
        let w = common::dense_walk_matrix(p);
        for coin in 0..2 {
            for x in 0..p {
                let mut dense = common::basis_vector(coin, x, p);
                let mut fast = WalkState::basis(coin, x, p).unwrap();
                for t in 0..=50 {
                    if t > 0 {
                        dense = &w * dense;
                        fast.step();
                    }
                    let ev = evolve(coin, x, &WalkParams::new(p, t).unwrap()).unwrap();
                    for ((a, b), c) in ev
                        .amplitudes()
                        .iter()
                        .zip(dense.iter())
                        .zip(fast.amplitudes())
                    {
                        worst = worst.max((a - b).norm()).max((c - b).norm());
                    }
                }
            }
        }
    }
    check!(worst < 1e-9, "max amplitude deviation {worst:e}");
    let mut norm_dev = 0.0f64;
    for p in [2, 3, 5, 11] {
        let mut s = WalkState::basis(0, 0, p).unwrap();
        for _ in 0..5000 {
            s.step();
            norm_dev = norm_dev.max((s.norm_sqr() - 1.0).abs());
        }
    }
    check!(norm_dev < 1e-10, "norm deviation {norm_dev:e}");
    let elapsed = start.elapsed();
    check!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!(
        "max deviation {worst:.1e}, norm drift {norm_dev:.1e}"
    ))
}

fn gamma_anchors() -> Outcome {
    for p in [2, 3, 5, 11, 51] {
        let g0 = gamma(&WalkParams::new(p, 0).unwrap());
        check!((g0 - 1.0).abs() < 1e-12, "gamma({p}, 0) = {g0}");
        if p >= 3 {
            let g1 = gamma(&WalkParams::new(p, 1).unwrap());
            check!((g1 - 0.5).abs() < 1e-12, "gamma({p}, 1) = {g1}");
        }
    }
    let scans: Vec<(usize, GammaScan)> = [5, 11, 51]
        .iter()
        .map(|&p| (p, gamma_scan(p, 5000).unwrap()))
        .collect();
    for (p, s) in &scans {
        check!(s.gamma <= 0.5, "gamma*({p}) = {}", s.gamma);
    }
    check!(
        scans[0].1.gamma > scans[1].1.gamma && scans[1].1.gamma > scans[2].1.gamma,
        "gamma* not decreasing in P"
    );
    let desc: Vec<String> = scans
        .iter()
        .map(|(p, s)| format!("P={p}: T*={} gamma*={:.6}", s.steps, s.gamma))
        .collect();
    Ok(desc.join(", "))
}

fn overlap_vacuity() -> Outcome {
    let mut worst = 0.0f64;
    for p in [2, 5, 11, 51] {
        let t_star = gamma_scan(p, 5000).unwrap().steps;
        for t in [1, t_star] {
            let o = uncertainty_overlap(&WalkParams::new(p, t).unwrap());
            worst = worst.max((o - 1.0).abs());
        }
    }
    check!(worst < 1e-6, "overlap deviates from 1 by {worst:e}");
    Ok(format!("max |c - 1| = {worst:.1e}"))
}

fn sampling_bound() -> Outcome {
    let trials = 20_000u64;
    let grid = [
        (200, 100, 0.1, 2, WordGenerator::HalfHeavy),
        (200, 100, 0.1, 4, WordGenerator::Bernoulli(0.5)),
        (200, 100, 0.2, 2, WordGenerator::Blocks(10)),
        (400, 40, 0.2, 10, WordGenerator::HalfHeavy),
        (1000, 100, 0.1, 102, WordGenerator::Bernoulli(0.3)),
        (1000, 300, 0.08, 22, WordGenerator::Blocks(3)),
    ];
    let mut worst_margin = f64::INFINITY;
    for (i, &(total, test, delta, alphabet, gen)) in grid.iter().enumerate() {
        let check = SamplingCheck {
            total,
            test,
            alphabet,
            delta,
        };
        let rate = monte_carlo_sampling_check(&check, gen, trials, i as u64).unwrap();
        let bound = classical_sampling_error(total as u64, test as u64, delta).unwrap();
        let b = bound.min(1.0);
        let sigma = (b * (1.0 - b) / trials as f64).sqrt();
        check!(
            rate <= bound + 3.0 * sigma,
            "{check:?}: rate {rate} above bound {bound}"
        );
        worst_margin = worst_margin.min(bound - rate);
    }
    let b200 = classical_sampling_error(200, 100, 0.1).unwrap();
    let mut worst_rel = 0.0f64;
    for n in [10u64, 200, 10_000, 1_000_000, 1_000_000_000_000] {
        for m in [1, n / 7, n / 2] {
            for eps in [1e-36, 1e-10, 1e-3, 0.5] {
                if m == 0 {
                    continue;
                }
                let d = sampling_delta(n, m, eps).unwrap();
                let err = classical_sampling_error(n, m, d).unwrap();
                worst_rel = worst_rel.max((err / (eps * eps) - 1.0).abs());
            }
        }
    }
    check!(worst_rel < 1e-9, "inverse relation off by {worst_rel:e}");
    Ok(format!(
        "bound(200,100,0.1) = {b200:.4}, min margin {worst_margin:.3}, inverse rel err {worst_rel:.1e}"
    ))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = seeded(0x0e5);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = 10f64.powf(rng.random_range(2.5..12.0)) as u64;
        let hi = (n as f64 / 2.0).log10();
        let m = (10f64.powf(rng.random_range(0.0..hi)) as u64).clamp(1, n / 2);
        let eps = 10f64.powf(rng.random_range(-40.0..-0.3));
        let p = rng.random_range(2..128);
        let g = rng.random_range(1.0 / p as f64..=1.0);
        let wq = rng.random_range(0.0..0.4);
        let report = key_length(&RateInputs {
            sampling: SamplingParams::new(n, m, eps).unwrap(),
            positions: p,
            gamma: g,
            test_weight: wq,
        })
        .unwrap();
        let want = common::raw_key_length(n, m, eps, p, g, wq);
        let want_ell = if want >= 1.0 { want.floor() } else { 0.0 };
        let dev = (report.raw_ell - want)
            .abs()
            .max((report.ell as f64 - want_ell).abs());
        check!(
            dev <= 1.0,
            "N={n} m={m} eps={eps:e} P={p}: {} vs {want}",
            report.raw_ell
        );
        worst = worst.max((report.raw_ell - want).abs());
    }
    Ok(format!(
        "1000 points, max |raw ell - oracle| = {worst:.2e} bits"
    ))
}

fn rate_curve_shape() -> Outcome {
    let start = Instant::now();
    let grid = default_grid();
    let gammas: Vec<(usize, f64)> = [51, 11, 5]
        .iter()
        .map(|&p| (p, gamma_scan(p, 5000).unwrap().gamma))
        .collect();
    let mut all = Vec::new();
    for noise in [0.15, 0.20] {
        let curves: Vec<Vec<CurvePoint>> = gammas
            .iter()
            .map(|&(p, g)| {
                let s = CurveSettings {
                    positions: p,
                    noise,
                    epsilon: 1e-36,
                    gamma: g,
                    test_size: TestSizeRule::Sqrt,
                    weight_model: WeightModel::PaperCompat,
                };
                rate_curve(&s, &grid).unwrap()
            })
            .collect();
        for (c, &(p, _)) in curves.iter().zip(&gammas) {
            check!(
                c.windows(2).all(|w| w[1].rate >= w[0].rate),
                "Q={noise} P={p}: rate decreases in N"
            );
        }
        for i in 0..grid.len() {
            let r: Vec<f64> = curves.iter().map(|c| c[i].rate).collect();
            if r.iter().all(|&x| x > 0.0) {
                check!(
                    r[0] > r[1] && r[1] > r[2],
                    "Q={noise} N={}: order {r:?}",
                    grid[i]
                );
            }
        }
        all.push(curves);
    }
    for (a, b) in all[0].iter().zip(&all[1]) {
        for (x, y) in a.iter().zip(b) {
            check!(y.rate <= x.rate, "Q=0.20 above Q=0.15 at N={}", x.total);
        }
    }
    let elapsed = start.elapsed();
    check!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    let last = |q: usize, i: usize| all[q][i].last().unwrap().rate;
    Ok(format!(
        "rates at N=1e12, Q=0.15: {:.4} > {:.4} > {:.4}",
        last(0, 0),
        last(0, 1),
        last(0, 2)
    ))
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let scan = gamma_scan(51, 5000).unwrap();
    let config = ProtocolConfig {
        params: WalkParams::new(51, scan.steps).unwrap(),
        total: 1_000_000,
        test: 1_000,
        epsilon: 1e-6,
        paper_compat: false,
    };
    let model = SourceModel::depolarizing(0.05).unwrap();
    let mut good = 0;
    let mut lengths = Vec::new();
    for i in 0..100u64 {
        let seeds = Seeds {
            subset: 3 * i,
            measurement: 3 * i + 1,
            hash: 3 * i + 2,
        };
        let run = run_protocol(&config, &model, seeds).unwrap();
        check!(run.report.ell > 0, "run {i} aborted with w(q) = {}", run.wq);
        let key = run.key.unwrap();
        check!(
            key.len() as u64 == run.report.ell,
            "run {i}: key length {} != ell",
            key.len()
        );
        if key_diagnostics(&key).unwrap().monobit_z.abs() < 4.0 {
            good += 1;
        }
        lengths.push(key.len());
    }
    check!(good >= 99, "only {good} of 100 keys pass monobit");
    let elapsed = start.elapsed();
    check!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    let (lo, hi) = (lengths.iter().min().unwrap(), lengths.iter().max().unwrap());
    Ok(format!(
        "ell in [{lo}, {hi}], {good}/100 monobit ok, {:.0} s",
        elapsed.as_secs_f64()
    ))
}

fn extractor_soundness() -> Outcome {
    let mut rng = seeded(0x70e);
    for i in 0..10_000u64 {
        let k = rng.random_range(1..200);
        let ell = rng.random_range(0..200);
        let x: Vec<bool> = (0..k).map(|_| rng.random()).collect();
        let seed = ToeplitzSeed::random(k, ell, i);
        let got = toeplitz_extract(&x, &seed, ell).unwrap();
        check!(
            got == common::dense_toeplitz(&x, seed.bits(), ell),
            "mismatch at k={k} ell={ell}"
        );
    }
    let trials = 100_000u64;
    let mut worst = f64::NEG_INFINITY;
    for (k, ell) in [(16usize, 8usize), (16, 4), (8, 8), (10, 1)] {
        let mut collisions = 0u64;
        for s in 0..trials {
            let mut pair = substream(0xc011, s);
            let x: Vec<bool> = (0..k).map(|_| pair.random()).collect();
            let mut y = x.clone();
            while y == x {
                y = (0..k).map(|_| pair.random()).collect();
            }
            let seed = ToeplitzSeed::random(k, ell, pair.random());
            if toeplitz_extract(&x, &seed, ell).unwrap()
                == toeplitz_extract(&y, &seed, ell).unwrap()
            {
                collisions += 1;
            }
        }
        let p = 0.5f64.powi(ell as i32);
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        let rate = collisions as f64 / trials as f64;
        check!(
            rate <= p + 5.0 * sigma,
            "k={k} ell={ell}: collision rate {rate} vs {p}"
        );
        worst = worst.max((rate - p) / sigma);
    }
    Ok(format!(
        "10^4 oracle pairs exact, worst collision excess {worst:.2} sigma"
    ))
}

/// Exact joint law of `(q, r)` by enumeration over the subset, the test
/// outcome and every position string.
fn enumerate_joint(ops: &[DensityOperator], params: WalkParams) -> Vec<f64> {
    let p = params.positions();
    let n = ops.len();
    let w0: DVector<Complex64> = common::dense_evolve(0, 0, p, params.steps());
    let pass: Vec<f64> = ops
        .iter()
        .map(|rho| (w0.adjoint() * rho.matrix() * &w0)[(0, 0)].re)
        .collect();
    let pos: Vec<Vec<f64>> = ops
        .iter()
        .map(|rho| {
            (0..p)
                .map(|z| rho.matrix()[(z, z)].re + rho.matrix()[(p + z, p + z)].re)
                .collect()
        })
        .collect();
    let strings = p.pow((n - 1) as u32);
    let mut law = vec![0.0; 2 * strings];
    for (t, &pass_t) in pass.iter().enumerate() {
        let rest: Vec<usize> = (0..n).filter(|&i| i != t).collect();
        for q in 0..2 {
            let pq = if q == 0 { pass_t } else { 1.0 - pass_t };
            for r in 0..strings {
                let mut prob = pq / n as f64;
                let mut code = r;
                for &walker in rest.iter().rev() {
                    prob *= pos[walker][code % p];
                    code /= p;
                }
                law[q * strings + r] += prob;
            }
        }
    }
    law
}

fn mixed_walker(p: usize, weights: [f64; 3], coin: usize, x: usize, t: usize) -> DensityOperator {
    let honest =
        DensityOperator::pure(&evolve(0, 0, &WalkParams::new(p, t).unwrap()).unwrap()).unwrap();
    let other = DensityOperator::pure(&WalkState::basis(coin, x, p).unwrap()).unwrap();
    let mixed = DensityOperator::maximally_mixed(p).unwrap();
    let c = |a: f64| Complex64::new(a, 0.0);
    let m = honest.matrix() * c(weights[0])
        + other.matrix() * c(weights[1])
        + mixed.matrix() * c(weights[2]);
    DensityOperator::new(p, m).unwrap()
}

fn born_oracle() -> Outcome {
    let trials = 1_000_000u64;
    let mut worst = 0.0f64;
    let cases = [
        (
            3usize,
            2usize,
            vec![
                mixed_walker(3, [0.9, 0.1, 0.0], 1, 2, 2),
                mixed_walker(3, [0.2, 0.3, 0.5], 0, 1, 2),
                mixed_walker(3, [0.0, 0.6, 0.4], 1, 0, 2),
            ],
        ),
        (
            2,
            3,
            vec![
                mixed_walker(2, [0.5, 0.5, 0.0], 1, 1, 3),
                mixed_walker(2, [0.1, 0.1, 0.8], 0, 1, 3),
            ],
        ),
    ];
    for (case, (p, t, ops)) in cases.into_iter().enumerate() {
        let params = WalkParams::new(p, t).unwrap();
        let law = enumerate_joint(&ops, params);
        let n = ops.len();
        let config = ProtocolConfig {
            params,
            total: n as u64,
            test: 1,
            epsilon: 0.5,
            paper_compat: false,
        };
        let model = SourceModel::Explicit(ops);
        let strings = p.pow((n - 1) as u32);
        let mut counts = vec![0u64; law.len()];
        for i in 0..trials {
            let s = substream(0xb0 + case as u64, i);
            let mut s = s;
            let seeds = Seeds {
                subset: s.random(),
                measurement: s.random(),
                hash: 0,
            };
            let run = run_protocol(&config, &model, seeds).unwrap();
            let q = run.test_outcomes.unwrap()[0] as usize;
            let r = run
                .raw
                .unwrap()
                .iter()
                .fold(0usize, |acc, &z| acc * p + z as usize);
            counts[q * strings + r] += 1;
        }
        for (cell, (&c, &prob)) in counts.iter().zip(&law).enumerate() {
            let mean = prob * trials as f64;
            let sigma = (trials as f64 * prob * (1.0 - prob)).sqrt();
            let z = if sigma > 0.0 {
                (c as f64 - mean) / sigma
            } else {
                c as f64 - mean
            };
            check!(
                z.abs() <= 3.0,
                "N={n} P={p}: cell {cell} off by {z:.2} sigma"
            );
            worst = worst.max(z.abs());
        }
    }
    Ok(format!("2 instances x 10^6 trials, max |z| = {worst:.2}"))
}

fn hamming_ball() -> Outcome {
    let mut tightest = 0.0f64;
    for d in [2u32, 4] {
        for n in 1..=14u32 {
            let hist = common::enumerate_weights(d, n);
            let mut volume = 0u64;
            for (k, &count) in hist.iter().enumerate() {
                volume += count;
                let beta = k as f64 / n as f64;
                let bound = f64::from(d).powf(f64::from(n) * common::h_bar(f64::from(d), beta));
                check!(
                    volume as f64 <= bound * (1.0 + 1e-12),
                    "d={d} n={n} k={k}: {volume} > {bound}"
                );
                tightest = tightest.max(volume as f64 / bound);
            }
        }
    }
    Ok(format!("max count/bound ratio {tightest:.4}"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("walk correctness", walk_correctness),
        ("gamma anchors", gamma_anchors),
        ("overlap vacuity", overlap_vacuity),
        ("sampling bound", sampling_bound),
        ("key length oracle", oracle_equivalence),
        ("rate curve shape", rate_curve_shape),
        ("end-to-end extraction", end_to_end),
        ("extractor soundness", extractor_soundness),
        ("small-instance Born oracle", born_oracle),
        ("Hamming ball bound", hamming_ball),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {:>2} {name} ({secs:.1} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {:>2} {name} ({secs:.1} s): {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
