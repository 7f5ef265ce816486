//! Numerical checks selectable from the command line.

use std::fs;
use std::path::Path;

use anyhow::Result;
use clap::ValueEnum;
use serde::Serialize;

use dimreg::checks::{self, CheckOutcome};
use dimreg::theory::{
    write_collapse_csv, write_gradient_reports_csv, CollapseConfig, Prop3Config, Prop4Config,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    /// Frobenius identity on random matrices.
    Prop1,
    /// Analytic gradients against finite differences.
    Gradients,
    /// Attraction-only collapse on Erdős–Rényi graphs.
    Collapse,
    /// Gradient gap shrinking with sparsity.
    Prop3,
    /// Regulariser gradient gap decaying with constriction.
    Prop4,
    /// Exponential tail inequalities.
    Lemma1,
    /// Negative-sampling expectation.
    Sgns,
    /// Exact centering by one regularisation step.
    Centering,
    /// Linearised attraction surrogate.
    Taylor,
    All,
}

const EACH: [Selector; 9] = [
    Selector::Prop1,
    Selector::Gradients,
    Selector::Collapse,
    Selector::Prop3,
    Selector::Prop4,
    Selector::Lemma1,
    Selector::Sgns,
    Selector::Centering,
    Selector::Taylor,
];

#[derive(Debug, Clone, Serialize)]
pub struct ValidationSummary {
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

/// Runs the selected checks, writing `summary.json` and any traces
/// (`collapse.csv`, `prop3.csv`, `prop4.csv`) into `out`.
pub fn run(selector: Selector, seed: u64, out: &Path) -> Result<ValidationSummary> {
    fs::create_dir_all(out)?;
    let selected: Vec<Selector> = if selector == Selector::All { EACH.to_vec() } else { vec![selector] };
    let mut outcomes = Vec::new();
    for s in selected {
        let outcome = match s {
            Selector::Prop1 => checks::frobenius(1000, seed),
            Selector::Gradients => checks::gradients(50, seed)?,
            Selector::Collapse => {
                let cfg = CollapseConfig {
                    seed,
                    ..CollapseConfig::default()
                };
                let (o, traces) = checks::collapse(&cfg)?;
                write_collapse_csv(out.join("collapse.csv"), &traces)?;
                o
            }
            Selector::Prop3 => {
                let (o, reports) = checks::prop3(&Prop3Config::default())?;
                write_gradient_reports_csv(out.join("prop3.csv"), &reports)?;
                o
            }
            Selector::Prop4 => {
                let (o, reports) = checks::prop4(&Prop4Config::default())?;
                write_gradient_reports_csv(out.join("prop4.csv"), &reports)?;
                o
            }
            Selector::Lemma1 => checks::lemma1(10_000),
            Selector::Sgns => checks::sgns(10_000, seed)?,
            Selector::Centering => checks::centering(100, seed)?,
            Selector::Taylor => checks::taylor(seed)?,
            Selector::All => unreachable!("expanded above"),
        };
        log::info!("{}: {} ({})", outcome.name, if outcome.passed { "pass" } else { "fail" }, outcome.detail);
        outcomes.push(outcome);
    }
    let summary = ValidationSummary {
        passed: outcomes.iter().all(|o| o.passed),
        checks: outcomes,
    };
    fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(summary)
}
