//! Scenario results and their JSON / CSV / text renderings.

use std::fmt::Write as _;

use num_rational::BigRational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::solver::{SolveReport, SolveStatus};
use crate::tensor::{format_rational, parse_rational, rational_to_f64};

#[derive(Debug, Clone, PartialEq)]
pub enum Probability {
    Exact(BigRational),
    Float(f64),
}

impl Probability {
    pub fn value(&self) -> f64 {
        match self {
            Probability::Exact(q) => rational_to_f64(q),
            Probability::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Probability::Exact(q) => Some(q),
            Probability::Float(_) => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ProbabilityRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exact: Option<String>,
    value: f64,
}

impl Serialize for Probability {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ProbabilityRepr {
            exact: self.exact().map(format_rational),
            value: self.value(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Probability {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = ProbabilityRepr::deserialize(d)?;
        match repr.exact {
            Some(s) => parse_rational(&s)
                .map(Probability::Exact)
                .ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}"))),
            None => Ok(Probability::Float(repr.value)),
        }
    }
}

/// Solver certificate without the (large) solution vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub status: SolveStatus,
    pub objective_value: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub equality_residual: f64,
    pub iterations: usize,
    /// Extra named checks, e.g. constraint values of the returned point.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<(String, f64)>,
}

impl From<&SolveReport> for SolverSummary {
    fn from(r: &SolveReport) -> Self {
        SolverSummary {
            status: r.status,
            objective_value: r.objective_value,
            primal_residual: r.primal_residual,
            dual_residual: r.dual_residual,
            equality_residual: r.equality_residual,
            iterations: r.iterations,
            checks: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    Transcript(Vec<String>),
    Solver(SolverSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario: String,
    pub probability: Probability,
    pub strategy: String,
    pub certificate: Option<Certificate>,
}

impl ScenarioResult {
    /// Largest reported residual (0 for exact transcripts).
    pub fn residual(&self) -> f64 {
        match &self.certificate {
            Some(Certificate::Solver(s)) => s
                .checks
                .iter()
                .map(|(_, v)| v.abs())
                .fold(s.primal_residual.max(s.dual_residual), f64::max),
            _ => 0.0,
        }
    }

    pub fn iterations(&self) -> Option<usize> {
        match &self.certificate {
            Some(Certificate::Solver(s)) => Some(s.iterations),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    Ok,
    /// The scenario ran, but its value missed the expected one under `--check`.
    Mismatch,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    #[serde(flatten)]
    pub result: ScenarioResult,
    pub status: EntryStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub settings: serde_json::Value,
    pub results: Vec<ReportEntry>,
}

pub const CSV_HEADER: &str = "scenario,probability,exact,residual,iterations,wall_time_ms";

pub fn to_json(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

pub fn to_csv(report: &Report) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for e in &report.results {
        let r = &e.result;
        let _ = writeln!(
            out,
            "{},{},{},{:e},{},{}",
            r.scenario,
            r.probability.value(),
            r.probability.exact().map(format_rational).unwrap_or_default(),
            r.residual(),
            r.iterations().map(|n| n.to_string()).unwrap_or_default(),
            e.wall_time_ms
        );
    }
    out
}

pub fn to_text(report: &Report) -> String {
    let mut rows = vec![[
        "scenario".to_string(),
        "probability".to_string(),
        "exact".to_string(),
        "residual".to_string(),
        "status".to_string(),
        "ms".to_string(),
    ]];
    for e in &report.results {
        let r = &e.result;
        rows.push([
            r.scenario.clone(),
            format!("{:.10}", r.probability.value()),
            r.probability.exact().map(format_rational).unwrap_or_else(|| "-".into()),
            format!("{:.1e}", r.residual()),
            format!("{:?}", e.status).to_lowercase(),
            e.wall_time_ms.to_string(),
        ]);
    }
    let widths: Vec<usize> = (0..6)
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let line: Vec<String> = row.iter().zip(&widths).map(|(cell, w)| format!("{cell:<w$}")).collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
        if i == 0 {
            let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 10));
        }
    }
    for e in &report.results {
        let _ = writeln!(out, "\n[{}] {}", e.result.scenario, e.result.strategy);
        if let Some(err) = &e.error {
            let _ = writeln!(out, "  error: {err}");
        }
        match &e.result.certificate {
            Some(Certificate::Transcript(lines)) => {
                for l in lines {
                    let _ = writeln!(out, "  {l}");
                }
            }
            Some(Certificate::Solver(s)) => {
                let _ = writeln!(
                    out,
                    "  solver: {:?} after {} iterations, objective {:.12}, primal {:.2e}, dual {:.2e}, equality {:.2e}",
                    s.status, s.iterations, s.objective_value, s.primal_residual, s.dual_residual, s.equality_residual
                );
                for (name, v) in &s.checks {
                    let _ = writeln!(out, "  {name}: {v:.3e}");
                }
            }
            None => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::rational;

    fn sample() -> Report {
        Report {
            version: "0.1.0".into(),
            settings: serde_json::json!({"scenario": "all"}),
            results: vec![
                ReportEntry {
                    result: ScenarioResult {
                        scenario: "losr".into(),
                        probability: Probability::Exact(rational(5, 6)),
                        strategy: "a=(0,0)".into(),
                        certificate: Some(Certificate::Transcript(vec!["x".into()])),
                    },
                    status: EntryStatus::Ok,
                    error: None,
                    wall_time_ms: 1,
                },
                ReportEntry {
                    result: ScenarioResult {
                        scenario: "nonsignaling".into(),
                        probability: Probability::Float(0.8333333333),
                        strategy: "lp".into(),
                        certificate: Some(Certificate::Solver(SolverSummary {
                            status: SolveStatus::Optimal,
                            objective_value: 0.8333333333,
                            primal_residual: 1e-9,
                            dual_residual: 2e-9,
                            equality_residual: 3e-9,
                            iterations: 42,
                            checks: vec![("x".into(), -5e-9)],
                        })),
                    },
                    status: EntryStatus::Ok,
                    error: None,
                    wall_time_ms: 10,
                },
            ],
        }
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let back: Report = serde_json::from_str(&to_json(&r)).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn exact_probability_carries_float() {
        let v = serde_json::to_value(Probability::Exact(rational(5, 6))).unwrap();
        assert_eq!(v["exact"], "5/6");
        assert!((v["value"].as_f64().unwrap() - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let csv = to_csv(&sample());
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 6);
        assert_eq!(row[0], "losr");
        assert_eq!(row[2], "5/6");
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[4], "42");
        assert_eq!(row[3].parse::<f64>().unwrap(), 5e-9);
    }

    #[test]
    fn text_table_mentions_every_scenario() {
        let t = to_text(&sample());
        assert!(t.contains("losr"));
        assert!(t.contains("nonsignaling"));
        assert!(t.contains("5/6"));
    }
}
