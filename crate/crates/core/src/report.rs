use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    SbmAr,
    BrwzAr,
    MaxSbmAr,
    MaxBrwzAr,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::SbmAr, Model::BrwzAr, Model::MaxSbmAr, Model::MaxBrwzAr];

    pub fn name(self) -> &'static str {
        match self {
            Model::SbmAr => "sbm-ar",
            Model::BrwzAr => "brwz-ar",
            Model::MaxSbmAr => "max-sbm-ar",
            Model::MaxBrwzAr => "max-brwz-ar",
        }
    }

    pub fn parse(s: &str) -> Option<Model> {
        Model::ALL.into_iter().find(|m| m.name() == s)
    }

    /// Closest-target models need the regularity assumptions on `P`, `Q`.
    pub fn is_max_model(self) -> bool {
        matches!(self, Model::MaxSbmAr | Model::MaxBrwzAr)
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Slacks and intensities of a point in the equality form of the technology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlackProfile {
    pub d_minus: Vec<f64>,
    pub d_plus: Vec<f64>,
    pub lambda: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl SlackProfile {
    pub fn zero(m: usize, s: usize, n: usize, kp: usize, kq: usize) -> Self {
        SlackProfile {
            d_minus: vec![0.0; m],
            d_plus: vec![0.0; s],
            lambda: vec![0.0; n],
            alpha: vec![0.0; kp],
            beta: vec![0.0; kq],
        }
    }
}

/// Input (`v`) and output (`u`) multipliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualWeights {
    pub v: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Input,
    Output,
}

/// Which single-coordinate move realises a closest-target score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosestTarget {
    pub branch: Branch,
    /// Index within the inputs or outputs, depending on `branch`.
    pub coordinate: usize,
    /// Number of (branch, coordinate) moves attaining the score.
    pub multiplicity: usize,
    /// The point had zero coordinates and the natural extension was used.
    pub natural: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub model: Model,
    pub score: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `(x - d-, y + d+)`, inputs then outputs.
    pub projection: Vec<f64>,
    /// `d-` then `d+`: always nonnegative.
    pub diff: Vec<f64>,
    /// `diff / original`; `None` where the original coordinate is zero.
    pub rate: Vec<Option<f64>>,
    pub slacks: Option<SlackProfile>,
    pub weights: Option<DualWeights>,
    pub closest: Option<ClosestTarget>,
    /// `false` for local-search scores without a global optimality guarantee.
    pub certified: bool,
    pub warnings: Vec<String>,
}

impl EfficiencyReport {
    pub fn new(model: Model, score: f64, x: &[f64], y: &[f64], d_minus: &[f64], d_plus: &[f64]) -> Self {
        let projection = x
            .iter()
            .zip(d_minus)
            .map(|(a, d)| a - d)
            .chain(y.iter().zip(d_plus).map(|(a, d)| a + d))
            .collect();
        let diff: Vec<f64> = d_minus.iter().chain(d_plus).copied().collect();
        let rate = x
            .iter()
            .chain(y)
            .zip(&diff)
            .map(|(orig, d)| (*orig != 0.0).then(|| d / orig))
            .collect();
        EfficiencyReport {
            model,
            score,
            x: x.to_vec(),
            y: y.to_vec(),
            projection,
            diff,
            rate,
            slacks: None,
            weights: None,
            closest: None,
            certified: true,
            warnings: Vec::new(),
        }
    }

    pub fn d_minus(&self) -> &[f64] {
        &self.diff[..self.x.len()]
    }

    pub fn d_plus(&self) -> &[f64] {
        &self.diff[self.x.len()..]
    }

    pub fn projected_x(&self) -> &[f64] {
        &self.projection[..self.x.len()]
    }

    pub fn projected_y(&self) -> &[f64] {
        &self.projection[self.x.len()..]
    }
}
