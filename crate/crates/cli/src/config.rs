//! JSON run configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dea_core::lp::Tolerances;
use dea_core::{AssuranceRegion, Matrix, Model, RatioBounds};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// Weight restrictions, either as ratio bounds against weight 1 or as
/// explicit row-major trade-off matrices.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ArSpec {
    Unrestricted,
    RatioBounds {
        inputs: Vec<[f64; 2]>,
        outputs: Vec<[f64; 2]>,
    },
    Matrices {
        p: Vec<Vec<f64>>,
        q: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub feas: Option<f64>,
    pub gap: Option<f64>,
    pub pivot: Option<f64>,
}

impl ToleranceOverrides {
    pub fn resolve(&self) -> Result<Tolerances> {
        let base = Tolerances::default();
        let tol = Tolerances {
            feas: self.feas.unwrap_or(base.feas),
            gap: self.gap.unwrap_or(base.gap),
            pivot: self.pivot.unwrap_or(base.pivot),
        };
        for (name, v) in [("feas", tol.feas), ("gap", tol.gap), ("pivot", tol.pivot)] {
            if !(v.is_finite() && v > 0.0) {
                bail!("tolerance '{name}' must be positive and finite, got {v}");
            }
        }
        Ok(tol)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Resolved against the directory holding the config file.
    pub dataset: Option<PathBuf>,
    pub ar: ArSpec,
    #[serde(default)]
    pub models: Vec<String>,
    pub format: Option<Format>,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("malformed config {}", path.display()))?;
        if let Some(ds) = cfg.dataset.take() {
            let base = path.parent().unwrap_or_else(|| Path::new("."));
            cfg.dataset = Some(if ds.is_absolute() { ds } else { base.join(ds) });
        }
        Ok(cfg)
    }
}

pub fn parse_models(names: &[String]) -> Result<Vec<Model>> {
    let mut out = Vec::new();
    for name in names
        .iter()
        .flat_map(|n| n.split(','))
        .map(str::trim)
        .filter(|n| !n.is_empty())
    {
        let Some(model) = Model::parse(name) else {
            bail!("unknown model '{name}' (expected one of sbm-ar, brwz-ar, max-sbm-ar, max-brwz-ar)");
        };
        if !out.contains(&model) {
            out.push(model);
        }
    }
    if out.is_empty() {
        bail!("at least one model is required");
    }
    Ok(out)
}

impl ArSpec {
    /// Input and output counts implied by the specification alone.
    pub fn dims(&self) -> Option<(usize, usize)> {
        match self {
            ArSpec::Unrestricted => None,
            ArSpec::RatioBounds { inputs, outputs } => Some((inputs.len() + 1, outputs.len() + 1)),
            ArSpec::Matrices { p, q } => Some((p.len(), q.len())),
        }
    }

    pub fn build(&self, m: usize, s: usize) -> Result<AssuranceRegion> {
        let region = match self {
            ArSpec::Unrestricted => AssuranceRegion::unrestricted(m, s),
            ArSpec::RatioBounds { inputs, outputs } => {
                let bounds = RatioBounds {
                    inputs: inputs.iter().map(|[lo, hi]| (*lo, *hi)).collect(),
                    outputs: outputs.iter().map(|[lo, hi]| (*lo, *hi)).collect(),
                };
                AssuranceRegion::from_ratio_bounds(&bounds, m, s)?
            }
            ArSpec::Matrices { p, q } => AssuranceRegion::from_matrices(matrix("p", p, m)?, matrix("q", q, s)?)?,
        };
        Ok(region)
    }
}

fn matrix(name: &str, rows: &[Vec<f64>], expect: usize) -> Result<Matrix> {
    if rows.len() != expect {
        bail!("{name} has {} rows, expected {expect}", rows.len());
    }
    let cols = rows.first().map_or(0, Vec::len);
    Matrix::from_rows(rows, cols).with_context(|| format!("{name} rows have unequal lengths"))
}
