//! `qwqrng`: γ scans, rate curves, protocol simulation and self-checks for
//! the quantum-walk random number generator.
//!
//! Exit codes: 0 on success (aborted runs included), 2 for invalid input,
//! 3 for I/O failures, 4 when the self-test fails.

mod parse;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qwqrng_core::protocol::{
    bits_to_hex, key_diagnostics, run_protocol, run_protocol_aggregate, ProtocolConfig,
    ProtocolRun, RunMode, Seeds, SourceModel, RAW_STRING_LIMIT,
};
use qwqrng_core::rate::{rate_curve, CurveSettings, TestSizeRule, WeightModel};
use qwqrng_core::selftest::Selftest;
use qwqrng_core::walk::{gamma, gamma_scan, gamma_series, GammaScan, WalkParams};
use qwqrng_core::VERSION;

#[derive(Parser)]
#[command(
    name = "qwqrng",
    version,
    about = "Quantum-walk random number generator toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate γ(P, T) for T = 1..T_max and report the minimizer.
    GammaScan(GammaScanArgs),
    /// Finite-key rate ℓ/N over a grid of N.
    RateCurve(RateCurveArgs),
    /// Run the protocol once against a depolarizing source.
    Simulate(SimulateArgs),
    /// Run the built-in invariant checks.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct GammaScanArgs {
    #[arg(long = "P")]
    positions: usize,
    #[arg(long = "T-max", default_value_t = 5000)]
    max_steps: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Q = 0.15, P ∈ {51, 11, 5}, ε = 1e-36, m = ⌊√N⌋, w(q) = Q
    Fig1Left,
    /// As fig1-left with Q = 0.20
    Fig1Right,
}

#[derive(Args)]
struct RateCurveArgs {
    #[arg(long, value_enum, conflicts_with_all = ["positions", "noise", "epsilon", "m_rule", "paper_compat"])]
    preset: Option<Preset>,
    /// Cycle sizes, one curve each.
    #[arg(long = "P", value_delimiter = ',', default_value = "51")]
    positions: Vec<usize>,
    /// Depolarizing noise.
    #[arg(long = "Q", default_value_t = 0.15)]
    noise: f64,
    #[arg(long, default_value_t = 1e-36)]
    epsilon: f64,
    /// Comma list or start:end:points.
    #[arg(long = "N-grid", value_parser = parse::grid, default_value = "1e4:1e12:81")]
    grid: parse::Grid,
    /// sqrt or fixed:<m>.
    #[arg(long = "m-rule", default_value = "sqrt")]
    m_rule: TestSizeRule,
    /// Use w(q) = Q instead of the exact failure probability.
    #[arg(long)]
    paper_compat: bool,
    /// Fixed walk length; otherwise T minimizes γ over 1..T_max.
    #[arg(long = "T", conflicts_with = "gamma")]
    steps: Option<usize>,
    #[arg(long = "T-max", default_value_t = 5000)]
    max_steps: usize,
    /// Use this γ for every curve instead of computing it.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long = "P")]
    positions: usize,
    /// Walk length; otherwise T minimizes γ over 1..T_max.
    #[arg(long = "T")]
    steps: Option<usize>,
    #[arg(long = "T-max", default_value_t = 5000)]
    max_steps: usize,
    #[arg(long = "N", value_parser = parse::count)]
    total: u64,
    #[arg(long = "m-rule", default_value = "sqrt")]
    m_rule: TestSizeRule,
    #[arg(long = "Q", default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    #[arg(long, default_value_t = 1)]
    seed_subset: u64,
    #[arg(long, default_value_t = 2)]
    seed_measure: u64,
    #[arg(long, default_value_t = 3)]
    seed_hash: u64,
    /// Depolarized walkers fail the test with probability Q.
    #[arg(long)]
    paper_compat: bool,
    /// Sample outcome counts only, even when N is small enough for a full run.
    #[arg(long)]
    aggregate: bool,
    /// Include the subset, test outcomes and raw string in the record.
    #[arg(long)]
    emit_raw: bool,
    /// Run record; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Hex key file, written when the run produces a key.
    #[arg(long)]
    key_output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fault {
    Entropy,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<Fault>,
}

enum Failure {
    Invalid(String),
    Io(String),
    Selftest,
}

impl From<qwqrng_core::Error> for Failure {
    fn from(e: qwqrng_core::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GammaScan(a) => cmd_gamma_scan(a),
        Command::RateCurve(a) => cmd_rate_curve(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Selftest(a) => cmd_selftest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Selftest) => ExitCode::from(4),
    }
}

fn emit(output: Option<&Path>, text: &str) -> CmdResult {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn header(out: &mut String, command: &str, config: &[(&str, String)]) {
    writeln!(out, "# qwqrng {VERSION} {command}").unwrap();
    for (key, value) in config {
        writeln!(out, "# {key}={value}").unwrap();
    }
}

fn cmd_gamma_scan(a: GammaScanArgs) -> CmdResult {
    WalkParams::new(a.positions, 0)?;
    let best = gamma_scan(a.positions, a.max_steps)?;
    let mut out = String::new();
    header(
        &mut out,
        "gamma-scan",
        &[
            ("P", a.positions.to_string()),
            ("T_max", a.max_steps.to_string()),
        ],
    );
    out.push_str("T,gamma\n");
    for (t, g) in gamma_series(a.positions)?.take(a.max_steps) {
        writeln!(out, "{t},{g}").unwrap();
    }
    writeln!(out, "# T*={},gamma*={}", best.steps, best.gamma).unwrap();
    emit(a.output.as_deref(), &out)
}

fn resolve_gamma(
    positions: usize,
    steps: Option<usize>,
    max_steps: usize,
) -> Result<GammaScan, Failure> {
    Ok(match steps {
        Some(t) => GammaScan {
            steps: t,
            gamma: gamma(&WalkParams::new(positions, t)?),
        },
        None => gamma_scan(positions, max_steps)?,
    })
}

fn cmd_rate_curve(mut a: RateCurveArgs) -> CmdResult {
    if let Some(preset) = a.preset {
        a.positions = vec![51, 11, 5];
        a.noise = match preset {
            Preset::Fig1Left => 0.15,
            Preset::Fig1Right => 0.20,
        };
        a.epsilon = 1e-36;
        a.m_rule = TestSizeRule::Sqrt;
        a.paper_compat = true;
    }
    let weight_model = if a.paper_compat {
        WeightModel::PaperCompat
    } else {
        WeightModel::Exact
    };
    let mut config = vec![
        ("P", join(&a.positions)),
        ("Q", a.noise.to_string()),
        ("epsilon", format!("{:e}", a.epsilon)),
        ("m_rule", a.m_rule.to_string()),
        (
            "weight_model",
            if a.paper_compat {
                "paper-compat"
            } else {
                "exact"
            }
            .to_string(),
        ),
        ("N_grid", describe_grid(&a.grid.0)),
    ];
    if let Some(p) = a.preset {
        config.insert(
            0,
            (
                "preset",
                p.to_possible_value().unwrap().get_name().to_string(),
            ),
        );
    }
    let mut rows = String::from("P,N,m,delta,wq,ell,rate\n");
    for &p in &a.positions {
        let (steps, g) = match a.gamma {
            Some(g) => ("override".to_string(), g),
            None => {
                let scan = resolve_gamma(p, a.steps, a.max_steps)?;
                (scan.steps.to_string(), scan.gamma)
            }
        };
        config.push(("walk", format!("P={p} T={steps} gamma={g}")));
        let settings = CurveSettings {
            positions: p,
            noise: a.noise,
            epsilon: a.epsilon,
            gamma: g,
            test_size: a.m_rule,
            weight_model,
        };
        for pt in rate_curve(&settings, &a.grid.0)? {
            writeln!(
                rows,
                "{p},{},{},{},{},{},{}",
                pt.total, pt.test, pt.delta, pt.test_weight, pt.ell, pt.rate
            )
            .unwrap();
        }
    }
    let mut out = String::new();
    header(&mut out, "rate-curve", &config);
    out.push_str(&rows);
    emit(a.output.as_deref(), &out)
}

fn cmd_simulate(a: SimulateArgs) -> CmdResult {
    let scan = resolve_gamma(a.positions, a.steps, a.max_steps)?;
    let params = WalkParams::new(a.positions, scan.steps)?;
    let test = a.m_rule.test_size(a.total);
    let config = ProtocolConfig {
        params,
        total: a.total,
        test,
        epsilon: a.epsilon,
        paper_compat: a.paper_compat,
    };
    let model = SourceModel::depolarizing(a.noise)?;
    let seeds = Seeds {
        subset: a.seed_subset,
        measurement: a.seed_measure,
        hash: a.seed_hash,
    };
    let aggregate = a.aggregate || a.total > RAW_STRING_LIMIT;
    let run = if aggregate {
        run_protocol_aggregate(&config, &model, seeds)?
    } else {
        run_protocol(&config, &model, seeds)?
    };

    let key = run.key.as_deref().filter(|k| !k.is_empty());
    let key_file = match (&a.key_output, key) {
        (Some(path), Some(key)) => {
            let mut text = String::new();
            header(
                &mut text,
                "key",
                &[
                    ("bits", key.len().to_string()),
                    ("P", a.positions.to_string()),
                    ("T", scan.steps.to_string()),
                    ("N", a.total.to_string()),
                    (
                        "seeds",
                        format!("{},{},{}", seeds.subset, seeds.measurement, seeds.hash),
                    ),
                ],
            );
            writeln!(text, "{}", bits_to_hex(key)).unwrap();
            emit(Some(path), &text)?;
            Some(path.display().to_string())
        }
        (Some(_), None) if run.mode == RunMode::Aggregate => {
            eprintln!(
                "note: aggregate runs extract no key; {} not written",
                a.key_output.as_ref().unwrap().display()
            );
            None
        }
        _ => None,
    };

    let mut record = run_record(&run, a.noise, a.m_rule, a.emit_raw)?;
    record["key_file"] = json!(key_file);
    let mut text = serde_json::to_string_pretty(&record).expect("record is valid JSON");
    text.push('\n');
    emit(a.output.as_deref(), &text)
}

fn run_record(
    run: &ProtocolRun,
    noise: f64,
    rule: TestSizeRule,
    emit_raw: bool,
) -> Result<Value, Failure> {
    let s = &run.sampling;
    let mut record = json!({
        "artifact": "qwqrng",
        "version": VERSION,
        "config": {
            "P": run.params.positions(),
            "T": run.params.steps(),
            "N": s.total(),
            "m": s.test(),
            "m_rule": rule.to_string(),
            "Q": noise,
            "epsilon": s.epsilon(),
            "source": "depolarizing",
        },
        "mode": run.mode,
        "seeds": run.seeds,
        "status": if run.aborted() { "ABORT" } else { "OK" },
        "n": s.raw(),
        "delta": s.delta(),
        "gamma": run.gamma,
        "wt_q": run.test_weight,
        "wq": run.wq,
        "position_counts": run.position_counts,
        "ell": run.report.ell,
        "report": run.report,
    });
    if let Some(key) = run.key.as_deref() {
        record["key_bits"] = json!(key.len());
        if !key.is_empty() {
            record["key_diagnostics"] = json!(key_diagnostics(key)?);
        }
    }
    if emit_raw && run.mode == RunMode::Full {
        record["t"] = json!(run.subset);
        record["q"] = json!(run.test_outcomes);
        record["r"] = json!(run.raw);
    }
    Ok(record)
}

fn cmd_selftest(a: SelftestArgs) -> CmdResult {
    let suite = match a.inject_fault {
        Some(Fault::Entropy) => {
            Selftest::with_entropy(|d, x| qwqrng_core::entropy::entropy_d(d, x).map(|h| h * 1.01))
        }
        None => Selftest::default(),
    };
    let report = suite.run();
    println!("# qwqrng {VERSION} selftest");
    for c in &report.checks {
        if c.passed {
            println!("ok   {}", c.name);
        } else {
            println!("FAIL {}: {}", c.name, c.detail);
        }
    }
    if report.passed() {
        println!("all {} checks passed", report.checks.len());
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name).collect();
        eprintln!("selftest failed: {}", names.join(", "));
        Err(Failure::Selftest)
    }
}

fn join(values: &[usize]) -> String {
    values
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn describe_grid(grid: &[u64]) -> String {
    match grid {
        [] => "empty".into(),
        [only] => only.to_string(),
        [first, .., last] => format!("{} points from {first} to {last}", grid.len()),
    }
}
