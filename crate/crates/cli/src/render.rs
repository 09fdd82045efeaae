//! Table, JSON and CSV emitters for score runs and suite reports.

use std::fmt::Write as _;

use anyhow::Result;
use dea_core::verify::{Status, SuiteReport};
use dea_core::{AssumptionReport, EfficiencyReport, Model};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub model: Model,
    pub report: Option<EfficiencyReport>,
    pub error: Option<String>,
    pub exit_code: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmuResult {
    pub name: String,
    pub results: Vec<ModelResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRun {
    pub models: Vec<Model>,
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
    pub assumptions: AssumptionReport,
    pub dmus: Vec<DmuResult>,
}

impl ScoreRun {
    fn coordinates(&self) -> impl Iterator<Item = &str> {
        self.input_names.iter().chain(&self.output_names).map(String::as_str)
    }
}

fn fixed(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn rate(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), fixed)
}

const CELL: usize = 10;

/// Per-DMU blocks: a score line, then one line per coordinate (inputs, then
/// outputs) with Projection, Diff and Rate for each model.
pub fn table(run: &ScoreRun) -> String {
    let mut out = String::new();
    let label = run.coordinates().map(str::len).max().unwrap_or(0).max(3) + 2;
    let group = 3 * CELL + 3;

    let _ = write!(out, "{:<label$}{:>CELL$} ", "DMU", "Data");
    for model in &run.models {
        let tag = if *model == Model::BrwzAr {
            format!("{model} *")
        } else {
            model.to_string()
        };
        let _ = write!(out, "| {tag:<w$}", w = group - 2);
    }
    out.push('\n');
    let _ = write!(out, "{:<label$}{:>CELL$} ", "", "");
    for _ in &run.models {
        let _ = write!(
            out,
            "| {:>w$}{:>CELL$}{:>CELL$} ",
            "Projection",
            "Diff",
            "Rate",
            w = CELL - 2
        );
    }
    out.push('\n');

    for dmu in &run.dmus {
        let _ = write!(out, "{:<label$}{:>CELL$} ", dmu.name, "");
        for r in &dmu.results {
            let cell = match &r.report {
                Some(rep) => format!("Score {}", fixed(rep.score)),
                None => "refused".into(),
            };
            let _ = write!(out, "| {cell:<w$}", w = group - 2);
        }
        out.push('\n');
        let data: Vec<f64> = dmu
            .results
            .iter()
            .find_map(|r| r.report.as_ref())
            .map(|rep| rep.x.iter().chain(&rep.y).copied().collect())
            .unwrap_or_default();
        for (k, name) in run.coordinates().enumerate() {
            let value = data.get(k).map_or_else(|| "-".into(), |v| fixed(*v));
            let _ = write!(out, "  {name:<w$}{value:>CELL$} ", w = label - 2);
            for r in &dmu.results {
                match &r.report {
                    Some(rep) => {
                        let _ = write!(
                            out,
                            "| {:>w$}{:>CELL$}{:>CELL$} ",
                            fixed(rep.projection[k]),
                            fixed(rep.diff[k]),
                            rate(rep.rate[k]),
                            w = CELL - 2
                        );
                    }
                    None => {
                        let _ = write!(out, "| {:>w$}{:>CELL$}{:>CELL$} ", "-", "-", "-", w = CELL - 2);
                    }
                }
            }
            out.push('\n');
        }
    }
    for dmu in &run.dmus {
        for r in &dmu.results {
            if let Some(e) = &r.error {
                let _ = writeln!(out, "{} {}: refused: {e}", dmu.name, r.model);
            }
        }
    }
    if run.models.contains(&Model::BrwzAr) {
        out.push_str("* non-certified: local search, no global optimality guarantee\n");
    }
    out
}

pub fn json(run: &ScoreRun) -> Result<String> {
    Ok(format!("{}\n", serde_json::to_string_pretty(run)?))
}

#[derive(Serialize)]
struct CsvRow<'a> {
    dmu: &'a str,
    model: Model,
    coordinate: &'a str,
    data: Option<f64>,
    score: Option<f64>,
    certified: Option<bool>,
    projection: Option<f64>,
    diff: Option<f64>,
    rate: Option<f64>,
    error: Option<&'a str>,
}

/// One row per DMU, model and coordinate; the score repeats across a block.
pub fn csv(run: &ScoreRun) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for dmu in &run.dmus {
        for r in &dmu.results {
            for (k, coordinate) in run.coordinates().enumerate() {
                let rep = r.report.as_ref();
                w.serialize(CsvRow {
                    dmu: &dmu.name,
                    model: r.model,
                    coordinate,
                    data: rep.map(|rep| {
                        if k < rep.x.len() {
                            rep.x[k]
                        } else {
                            rep.y[k - rep.x.len()]
                        }
                    }),
                    score: rep.map(|rep| rep.score),
                    certified: rep.map(|rep| rep.certified),
                    projection: rep.map(|rep| rep.projection[k]),
                    diff: rep.map(|rep| rep.diff[k]),
                    rate: rep.and_then(|rep| rep.rate[k]),
                    error: r.error.as_deref(),
                })?;
            }
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn minimum(v: Option<f64>) -> String {
    v.map_or_else(|| "infeasible".into(), |v| format!("{v:.6}"))
}

pub fn assumptions(rep: &AssumptionReport) -> String {
    let mut out = String::new();
    for (i, v) in rep.input_minima.iter().enumerate() {
        let _ = writeln!(out, "min v{}  {}", i + 1, minimum(*v));
    }
    for (r, v) in rep.output_minima.iter().enumerate() {
        let _ = writeln!(out, "min u{}  {}", r + 1, minimum(*v));
    }
    let verdict = |ok: bool| if ok { "holds" } else { "FAILS" };
    let _ = writeln!(out, "vcon {}", verdict(rep.vcon));
    let _ = writeln!(out, "ucon {}", verdict(rep.ucon));
    out
}

pub fn suite(rep: &SuiteReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "seed {}  samples {}", rep.seed, rep.samples);
    let width = rep.properties.iter().map(|p| p.id.len()).max().unwrap_or(0);
    for p in &rep.properties {
        let status = match p.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::NotClaimed => "not-claimed",
            Status::Skipped => "skipped",
        };
        let _ = writeln!(
            out,
            "{:<width$}  {status:<11}  {}/{} over {}",
            p.id, p.passed, p.tested, p.population
        );
        for w in p.failures.iter().take(3) {
            let _ = writeln!(out, "    failure: {}", w.detail);
        }
        if !p.counterexamples.is_empty() {
            let _ = writeln!(
                out,
                "    {} counterexamples to the unclaimed statement",
                p.counterexamples.len()
            );
        }
    }
    out
}
