//! Command-line front end: scenario dispatch, `--check` comparison and
//! matrix dumps.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::game::{all_orders, trit_game, two_party_game};
use crate::report::{to_csv, to_json, to_text, EntryStatus, Probability, Report, ReportEntry, ScenarioResult};
use crate::solver::SolverSettings;
use crate::tensor::rational;
use crate::{classical, network, quantum};

/// Tolerance used by `--check` for scenarios with floating-point results.
pub const CHECK_TOLERANCE: f64 = 1e-6;

/// Random channel triples sampled by the quantum-memoryless scenario.
pub const RANDOM_TRIPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    TwoParty,
    Trit,
    ClassicalMemoryless,
    Losr,
    Nonsignaling,
    QuantumMemoryless,
    LoseVerify,
    LoseSdp,
    All,
}

impl Scenario {
    pub const EACH: [Scenario; 8] = [
        Scenario::TwoParty,
        Scenario::Trit,
        Scenario::ClassicalMemoryless,
        Scenario::Losr,
        Scenario::Nonsignaling,
        Scenario::QuantumMemoryless,
        Scenario::LoseVerify,
        Scenario::LoseSdp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::TwoParty => "two-party",
            Scenario::Trit => "trit",
            Scenario::ClassicalMemoryless => "classical-memoryless",
            Scenario::Losr => "losr",
            Scenario::Nonsignaling => "nonsignaling",
            Scenario::QuantumMemoryless => "quantum-memoryless",
            Scenario::LoseVerify => "lose-verify",
            Scenario::LoseSdp => "lose-sdp",
            Scenario::All => "all",
        }
    }

    pub fn expected(self) -> Option<BigRational> {
        Some(match self {
            Scenario::TwoParty | Scenario::Trit | Scenario::LoseVerify | Scenario::LoseSdp => rational(1, 1),
            Scenario::ClassicalMemoryless | Scenario::QuantumMemoryless => rational(1, 3),
            Scenario::Losr | Scenario::Nonsignaling => rational(5, 6),
            Scenario::All => return None,
        })
    }

    fn expand(self) -> Vec<Scenario> {
        match self {
            Scenario::All => Scenario::EACH.to_vec(),
            s => vec![s],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

fn positive_usize(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("expected a positive integer, got {s:?}")),
    }
}

/// Guess the order in which three parties acted, under several resource models.
#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "causal-order", version)]
pub struct RunConfig {
    #[arg(long, value_enum, default_value = "all")]
    pub scenario: Scenario,
    /// Solver tolerance on primal and dual residuals.
    #[arg(long, default_value = "1e-8", value_parser = positive_f64)]
    pub tolerance: f64,
    #[arg(long, default_value = "200000", value_parser = positive_usize)]
    pub max_iters: usize,
    /// Seed for the random channel triples.
    #[arg(long, default_value = "42")]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    pub output: OutputFormat,
    /// Write sigma, the swap-network matrices and the non-signaling tableau.
    #[arg(long)]
    pub dump_matrices: bool,
    /// Compare every value with its expected result; exit 1 on a mismatch.
    #[arg(long)]
    pub check: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "matrices")]
    #[serde(skip)]
    pub dump_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::parse_from(["causal-order"])
    }
}

impl RunConfig {
    pub fn solver_settings(&self) -> SolverSettings {
        SolverSettings {
            tolerance: self.tolerance,
            max_iters: self.max_iters,
            ..SolverSettings::default()
        }
    }
}

pub fn run_scenario(scenario: Scenario, config: &RunConfig) -> Result<ScenarioResult> {
    let settings = config.solver_settings();
    Ok(match scenario {
        Scenario::TwoParty => two_party_game(),
        Scenario::Trit => trit_game(),
        Scenario::ClassicalMemoryless => classical::search_memoryless(),
        Scenario::Losr => classical::search_losr(),
        Scenario::Nonsignaling => network::solve_nonsignaling(&settings)?.result,
        Scenario::QuantumMemoryless => quantum::quantum_memoryless_scenario(&settings, RANDOM_TRIPLES, config.seed)?,
        Scenario::LoseVerify => quantum::verify_lose_exact(&quantum::swap_sigma()?)?,
        Scenario::LoseSdp => quantum::lose_sdp_scenario(&settings)?.0,
        Scenario::All => unreachable!("expanded before dispatch"),
    })
}

fn matches_expected(scenario: Scenario, p: &Probability) -> bool {
    let Some(expected) = scenario.expected() else {
        return true;
    };
    match p {
        Probability::Exact(q) => *q == expected,
        Probability::Float(x) => (x - crate::tensor::rational_to_f64(&expected)).abs() <= CHECK_TOLERANCE,
    }
}

fn entry(scenario: Scenario, config: &RunConfig) -> ReportEntry {
    let start = Instant::now();
    let outcome = run_scenario(scenario, config);
    let wall_time_ms = start.elapsed().as_millis() as u64;
    match outcome {
        Ok(result) => {
            let status = if config.check && !matches_expected(scenario, &result.probability) {
                EntryStatus::Mismatch
            } else {
                EntryStatus::Ok
            };
            ReportEntry {
                result,
                status,
                error: None,
                wall_time_ms,
            }
        }
        Err(e) => ReportEntry {
            result: ScenarioResult {
                scenario: scenario.name().into(),
                probability: Probability::Float(0.0),
                strategy: String::new(),
                certificate: None,
            },
            status: EntryStatus::Failed,
            error: Some(e.to_string()),
            wall_time_ms,
        },
    }
}

/// Runs the requested scenarios concurrently; results keep the fixed order.
pub fn run(config: &RunConfig) -> Report {
    let results = config
        .scenario
        .expand()
        .into_par_iter()
        .map(|s| entry(s, config))
        .collect();
    Report {
        version: env!("CARGO_PKG_VERSION").into(),
        settings: serde_json::to_value(config).expect("config serializes"),
        results,
    }
}

const HEADLINES: [(&str, &str); 5] = [
    ("classical-memoryless", "classical, no memory"),
    ("losr", "classical with memory (LOSR)"),
    ("nonsignaling", "non-signaling network"),
    ("quantum-memoryless", "quantum, no memory"),
    ("lose-verify", "quantum with entanglement (LOSE)"),
];

/// The five headline probabilities, one per line.
pub fn headline_summary(report: &Report) -> String {
    let mut out = String::from("summary\n");
    for (name, label) in HEADLINES {
        if let Some(e) = report.results.iter().find(|e| e.result.scenario == name) {
            let p = &e.result.probability;
            let shown = match p.exact() {
                Some(q) => crate::tensor::format_rational(q),
                None => format!("{:.9}", p.value()),
            };
            out.push_str(&format!("  {label:<34} {shown}\n"));
        }
    }
    out
}

pub fn emit(report: &Report, format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => to_text(report),
        OutputFormat::Json => to_json(report) + "\n",
        OutputFormat::Csv => to_csv(report),
    }
}

/// 2 if any scenario failed, 1 if any mismatched its expected value, else 0.
pub fn exit_code(report: &Report) -> i32 {
    let has = |s| report.results.iter().any(|e| e.status == s);
    if has(EntryStatus::Failed) {
        2
    } else if has(EntryStatus::Mismatch) {
        1
    } else {
        0
    }
}

/// Writes `sigma.json`, `m_<order>.json` for every order and
/// `nonsignaling.tableau` into `dir`.
pub fn dump_matrices(dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut write = |name: String, contents: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, contents)?;
        written.push(path);
        Ok(())
    };
    write("sigma.json".into(), json(&quantum::swap_sigma()?.to_serialized()))?;
    for pi in all_orders() {
        let m = quantum::build_m(&pi)?;
        write(format!("m_{}.json", pi.composition_word()), json(&m.op.to_serialized()))?;
    }
    write(
        "nonsignaling.tableau".into(),
        network::assemble_nonsignaling_program()?.to_tableau(),
    )?;
    Ok(written)
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("matrix serializes") + "\n"
}
