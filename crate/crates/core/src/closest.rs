//! Closest-target measures.
//!
//! `D-` and `D+` are least-distance inefficiencies to the strong frontier;
//! each is the smallest single-coordinate max step over the support of the
//! point. `F_S` and `F_B` follow in closed form from them. Points with zero
//! coordinates use the natural extension: only the support is probed, while
//! the divisors stay the full `m` and `s`.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontier::{solve_max_delta, Extent, Ray, Technology};
use crate::report::{Branch, ClosestTarget, EfficiencyReport, Model};

/// Two candidate scores closer than this are treated as a tie.
pub const TIE_TOL: f64 = 1e-9;
/// Required gap at the smallest perturbation in [`continuity_probe`].
pub const CONV_TOL: f64 = 1e-3;

/// `I(z)`: indices of strictly positive entries.
pub fn support(z: &[f64]) -> Vec<usize> {
    z.iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceProfile {
    /// `delta_bar_i^-` for `i` in the input support, `None` elsewhere.
    pub delta_minus: Vec<Option<Extent>>,
    /// `delta_bar_r^+` for `r` in the output support, `None` elsewhere.
    pub delta_plus: Vec<Option<Extent>>,
    /// Minimum over finite input entries; `Unbounded` when there are none.
    pub d_minus: Extent,
    pub d_plus: Extent,
    /// Every input coordinate attaining `d_minus` within [`TIE_TOL`], ascending.
    pub argmin_minus: Vec<usize>,
    pub argmin_plus: Vec<usize>,
    /// The point has a zero coordinate, so these are the natural distances.
    pub natural: bool,
    pub warnings: Vec<String>,
}

fn reduce(entries: &[Option<Extent>], side: &str, warnings: &mut Vec<String>) -> (Extent, Vec<usize>) {
    let finite: Vec<(usize, f64)> = entries
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.and_then(Extent::finite).map(|v| (i, v)))
        .collect();
    let unbounded = entries.iter().filter(|e| **e == Some(Extent::Unbounded)).count();
    if unbounded > 0 {
        let msg = format!("{unbounded} unbounded {side} max-step(s) excluded from the minimum");
        warn!("{msg}");
        warnings.push(msg);
    }
    let Some(min) = finite.iter().map(|(_, v)| *v).reduce(f64::min) else {
        return (Extent::Unbounded, Vec::new());
    };
    let argmin = finite
        .iter()
        .filter(|(_, v)| *v - min <= TIE_TOL)
        .map(|(i, _)| *i)
        .collect();
    (Extent::Finite(min), argmin)
}

fn check_domain(tech: &Technology, x: &[f64], y: &[f64]) -> Result<()> {
    tech.check_dims(x, y)?;
    if x.iter().chain(y).any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidData(
            "closest-target measures need a nonnegative point".into(),
        ));
    }
    if x.iter().all(|v| *v == 0.0) || y.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidData(
            "closest-target measures need nonzero input and output vectors".into(),
        ));
    }
    Ok(())
}

/// One relative max-step LP per supported coordinate.
pub fn distance_profile(tech: &Technology, x: &[f64], y: &[f64]) -> Result<DistanceProfile> {
    check_domain(tech, x, y)?;
    let probe = |ray: Ray, scale: f64| -> Result<Option<Extent>> {
        if scale > 0.0 {
            solve_max_delta(tech, x, y, ray).map(Some)
        } else {
            Ok(None)
        }
    };
    let delta_minus = (0..tech.m())
        .map(|i| probe(Ray::Input(i), x[i]))
        .collect::<Result<Vec<_>>>()?;
    let delta_plus = (0..tech.s())
        .map(|r| probe(Ray::Output(r), y[r]))
        .collect::<Result<Vec<_>>>()?;
    let mut warnings = Vec::new();
    let (d_minus, argmin_minus) = reduce(&delta_minus, "input", &mut warnings);
    let (d_plus, argmin_plus) = reduce(&delta_plus, "output", &mut warnings);
    Ok(DistanceProfile {
        delta_minus,
        delta_plus,
        d_minus,
        d_plus,
        argmin_minus,
        argmin_plus,
        natural: x.iter().chain(y).any(|v| *v == 0.0),
        warnings,
    })
}

/// Both branches of the closed form and the winner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    /// `1 - D-/m`.
    pub input_value: f64,
    /// `1/(1 + D+/s)` for `F_S`, `1 - (1/s) D+/(1+D+)` for `F_B`.
    pub output_value: f64,
    pub score: f64,
    pub branch: Branch,
}

/// Evaluates the closed form of `F_S` (`MaxSbmAr`) or `F_B` (`MaxBrwzAr`).
pub fn closed_form(model: Model, profile: &DistanceProfile, m: usize, s: usize) -> Result<ClosedForm> {
    let (Extent::Finite(dm), Extent::Finite(dp)) = (profile.d_minus, profile.d_plus) else {
        return Err(Error::Unbounded(format!(
            "every {} max-step is unbounded; {model} score refused",
            if profile.d_minus == Extent::Unbounded {
                "input"
            } else {
                "output"
            }
        )));
    };
    let (mf, sf) = (m as f64, s as f64);
    let input_value = 1.0 - dm / mf;
    let output_value = match model {
        Model::MaxSbmAr => 1.0 / (1.0 + dp / sf),
        Model::MaxBrwzAr => 1.0 - dp / (1.0 + dp) / sf,
        other => return Err(Error::Internal(format!("{other} has no closed form"))),
    };
    let branch = if input_value >= output_value - TIE_TOL {
        Branch::Input
    } else {
        Branch::Output
    };
    Ok(ClosedForm {
        input_value,
        output_value,
        score: input_value.max(output_value),
        branch,
    })
}

fn closest(tech: &Technology, model: Model, x: &[f64], y: &[f64]) -> Result<EfficiencyReport> {
    let profile = distance_profile(tech, x, y)?;
    let form = closed_form(model, &profile, tech.m(), tech.s())?;
    let (m, s) = (tech.m(), tech.s());
    let mut d_minus = vec![0.0; m];
    let mut d_plus = vec![0.0; s];
    let ties_input = form.input_value >= form.score - TIE_TOL;
    let ties_output = form.output_value >= form.score - TIE_TOL;
    let multiplicity =
        usize::from(ties_input) * profile.argmin_minus.len() + usize::from(ties_output) * profile.argmin_plus.len();
    let coordinate = match form.branch {
        Branch::Input => {
            let i = profile.argmin_minus[0];
            d_minus[i] = profile.d_minus.finite().unwrap_or(0.0) * x[i];
            i
        }
        Branch::Output => {
            let r = profile.argmin_plus[0];
            d_plus[r] = profile.d_plus.finite().unwrap_or(0.0) * y[r];
            r
        }
    };
    let mut report = EfficiencyReport::new(model, form.score, x, y, &d_minus, &d_plus);
    report.closest = Some(ClosestTarget {
        branch: form.branch,
        coordinate,
        multiplicity,
        natural: profile.natural,
    });
    report.warnings = profile.warnings;
    if !tech.assumptions().holds() {
        report
            .warnings
            .push("assurance region violates the regularity assumptions; closed form not guaranteed".into());
    }
    Ok(report)
}

/// `F_S`: the SBM objective maximised over strong-frontier targets.
pub fn f_s(tech: &Technology, x: &[f64], y: &[f64]) -> Result<EfficiencyReport> {
    closest(tech, Model::MaxSbmAr, x, y)
}

/// `F_B`: the BRWZ objective maximised over strong-frontier targets.
pub fn f_b(tech: &Technology, x: &[f64], y: &[f64]) -> Result<EfficiencyReport> {
    closest(tech, Model::MaxBrwzAr, x, y)
}

/// Scores approaching a zero-data point along strictly positive perturbations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRecord {
    pub epsilons: Vec<f64>,
    pub f_s_natural: f64,
    pub f_b_natural: f64,
    pub f_s: Vec<f64>,
    pub f_b: Vec<f64>,
    pub f_s_gaps: Vec<f64>,
    pub f_b_gaps: Vec<f64>,
}

impl ContinuityRecord {
    /// Both gap sequences are nonincreasing and end at or below `tol`.
    pub fn converged(&self, tol: f64) -> bool {
        [&self.f_s_gaps, &self.f_b_gaps]
            .iter()
            .all(|gaps| gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12) && gaps.last().is_some_and(|g| *g <= tol))
    }
}

/// Adds `eps` to every zero coordinate of `(x, y)`.
pub fn perturb_zeros(x: &[f64], y: &[f64], eps: f64) -> (Vec<f64>, Vec<f64>) {
    let bump = |v: &f64| if *v == 0.0 { eps } else { *v };
    (x.iter().map(bump).collect(), y.iter().map(bump).collect())
}

/// Evaluates `F_S` and `F_B` at `perturb_zeros(x, y, eps)` for each `eps`
/// and records the gap to the natural scores at `(x, y)`.
pub fn continuity_probe(tech: &Technology, x: &[f64], y: &[f64], epsilons: &[f64]) -> Result<ContinuityRecord> {
    check_domain(tech, x, y)?;
    if !x.iter().chain(y).any(|v| *v == 0.0) {
        return Err(Error::InvalidData(
            "continuity probe needs a point with at least one zero coordinate".into(),
        ));
    }
    if epsilons.is_empty()
        || epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0))
        || epsilons.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidData(
            "epsilons must be positive and strictly decreasing".into(),
        ));
    }
    let f_s_natural = f_s(tech, x, y)?.score;
    let f_b_natural = f_b(tech, x, y)?.score;
    let mut rec = ContinuityRecord {
        epsilons: epsilons.to_vec(),
        f_s_natural,
        f_b_natural,
        f_s: Vec::new(),
        f_b: Vec::new(),
        f_s_gaps: Vec::new(),
        f_b_gaps: Vec::new(),
    };
    for &eps in epsilons {
        let (xe, ye) = perturb_zeros(x, y, eps);
        let s = f_s(tech, &xe, &ye)?.score;
        let b = f_b(tech, &xe, &ye)?.score;
        rec.f_s.push(s);
        rec.f_b.push(b);
        rec.f_s_gaps.push((s - f_s_natural).abs());
        rec.f_b_gaps.push((b - f_b_natural).abs());
    }
    Ok(rec)
}
