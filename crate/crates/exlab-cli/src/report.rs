//! Run reports: the single JSON artifact a run writes, plus the optional
//! CSV summary. Reports are deterministic except for the `runtime_ms`
//! fields, which comparisons must zero out.

use std::path::Path;

use exlab::nofsim::MissingEntropyReport;
use exlab::verify::{AdversarialReport, McReport, ProfileReport, ReductionReport, VerifyReport};
use exlab::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Output {
    /// A single labeled value: hex for field elements and map outputs,
    /// "num/den" for probabilities and distances.
    Value { label: String, value: String },
    Check(VerifyReport),
    Profile(ProfileReport),
    Reduction(ReductionReport),
    Adversarial(AdversarialReport),
    MissingEntropy(MissingEntropyReport),
    MonteCarlo(McReport),
    Fixtures {
        entries: usize,
        mismatches: Vec<String>,
    },
    /// Emitted instead of results when the run was refused up front.
    ResourceExceeded { estimated: String, budget: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    pub config: ExperimentConfig,
    pub outputs: Vec<Output>,
    pub holds: bool,
    /// Sum of the evaluation counts the run charged against its budget.
    pub total_cost: u64,
    pub runtime_ms: u64,
}

impl RunReport {
    pub fn new(config: ExperimentConfig, outputs: Vec<Output>, holds: bool, total_cost: u64) -> RunReport {
        RunReport {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            outputs,
            holds,
            total_cost,
            runtime_ms: 0,
        }
    }

    /// Zeroes every timing field, for byte-level comparisons.
    pub fn strip_timing(&mut self) {
        self.runtime_ms = 0;
        for o in &mut self.outputs {
            match o {
                Output::Check(r) => r.runtime_ms = 0,
                Output::Reduction(r) => {
                    for c in &mut r.checks {
                        c.runtime_ms = 0;
                    }
                }
                Output::Adversarial(r) => {
                    r.structural.runtime_ms = 0;
                    r.statistical.runtime_ms = 0;
                }
                _ => {}
            }
        }
    }
}

fn atomic_write(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text).map_err(|e| Error::config(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::config(format!("{}: {e}", path.display())))
}

/// Pretty JSON, written whole then renamed into place: a failed run never
/// leaves a partial report behind.
pub fn write_report(path: &Path, report: &RunReport) -> Result<()> {
    let text = serde_json::to_string_pretty(report).map_err(|e| Error::config(e.to_string()))? + "\n";
    atomic_write(path, &text)
}

fn csv_field(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn csv_row(r: &VerifyReport) -> String {
    format!(
        "{},{},{},{},{}\n",
        csv_field(&r.quantity),
        exlab::ratio::format_ratio(&r.measured),
        exlab::ratio::format_ratio(&r.bound),
        r.holds,
        r.cost
    )
}

/// One summary row per bound check in the report.
pub fn write_csv(path: &Path, report: &RunReport) -> Result<()> {
    let mut text = String::from("quantity,measured,bound,holds,cost\n");
    for o in &report.outputs {
        match o {
            Output::Check(r) => text.push_str(&csv_row(r)),
            Output::Reduction(red) => {
                for c in &red.checks {
                    text.push_str(&csv_row(c));
                }
            }
            Output::Adversarial(a) => {
                text.push_str(&csv_row(&a.structural));
                text.push_str(&csv_row(&a.statistical));
            }
            Output::MissingEntropy(m) => {
                text.push_str(&format!(
                    "{},{},{},{},{}\n",
                    csv_field("missing-entropy worst leakage"),
                    exlab::ratio::format_ratio(&m.worst),
                    exlab::ratio::format_ratio(&m.bound),
                    m.holds,
                    m.protocols_test
                ));
            }
            _ => {}
        }
    }
    atomic_write(path, &text)
}
