//! Classic SBM-AR and BRWZ-AR measures, minimised over the whole technology.
//!
//! SBM-AR minimises `g_-(d-) * g_+(d+)` and is solved exactly as an LP,
//! once through the Charnes-Cooper linearisation of the ratio objective and
//! once through its multiplier dual. BRWZ-AR minimises `g_-(d-) * h_+(d+)`,
//! which is nonconvex; it is attacked with a multi-start coordinate descent
//! over `d+` and reported as non-certified.

use log::warn;

use crate::error::{Error, Result};
use crate::frontier::{max_step, Extent, Ray, Technology};
use crate::lp::{LinearProgram, LpStatus, Relation, Sense};
use crate::report::{DualWeights, EfficiencyReport, Model, SlackProfile};

/// Required agreement between the linearised primal and the dual of SBM-AR.
pub const PRIMAL_DUAL_TOL: f64 = 1e-6;
/// BRWZ-AR descent stops when a full sweep improves by less than this.
pub const DESCENT_TOL: f64 = 1e-10;
pub const MAX_DESCENT_SWEEPS: usize = 500;
/// Feasibility tolerance used by [`verify_profile`].
pub const PROFILE_TOL: f64 = 1e-9;

fn require_positive(what: &'static str, v: &[f64]) -> Result<()> {
    match v.iter().position(|a| *a <= 0.0) {
        Some(i) => Err(Error::ZeroCoordinate(what, i)),
        None => Ok(()),
    }
}

/// `g_-(d-) = 1 - (1/m) sum d-_i / x_i`.
pub fn eval_g_minus(d_minus: &[f64], x: &[f64]) -> Result<f64> {
    require_positive("g_-", x)?;
    let m = x.len() as f64;
    Ok(1.0 - d_minus.iter().zip(x).map(|(d, x)| d / x).sum::<f64>() / m)
}

/// `g_+(d+) = s / sum (1 + d+_r / y_r)`: reciprocal of the arithmetic mean.
pub fn eval_g_plus(d_plus: &[f64], y: &[f64]) -> Result<f64> {
    require_positive("g_+", y)?;
    let s = y.len() as f64;
    Ok(s / d_plus.iter().zip(y).map(|(d, y)| 1.0 + d / y).sum::<f64>())
}

/// `h_+(d+) = (1/s) sum 1 / (1 + d+_r / y_r)`: the harmonic counterpart of `g_+`.
pub fn eval_h_plus(d_plus: &[f64], y: &[f64]) -> Result<f64> {
    require_positive("h_+", y)?;
    let s = y.len() as f64;
    Ok(d_plus.iter().zip(y).map(|(d, y)| 1.0 / (1.0 + d / y)).sum::<f64>() / s)
}

/// Objective of a classic model at the given slacks.
pub fn model_objective(model: Model, x: &[f64], y: &[f64], d_minus: &[f64], d_plus: &[f64]) -> Result<f64> {
    let g = eval_g_minus(d_minus, x)?;
    match model {
        Model::SbmAr | Model::MaxSbmAr => Ok(g * eval_g_plus(d_plus, y)?),
        Model::BrwzAr | Model::MaxBrwzAr => Ok(g * eval_h_plus(d_plus, y)?),
    }
}

/// SBM-AR score for the point `(x, y)`, which must be strictly positive.
///
/// The score is the linearised primal optimum; the multiplier dual is
/// solved independently and must agree within [`PRIMAL_DUAL_TOL`].
pub fn sbm_ar(tech: &Technology, x: &[f64], y: &[f64]) -> Result<EfficiencyReport> {
    tech.check_dims(x, y)?;
    require_positive("SBM-AR", x)?;
    require_positive("SBM-AR", y)?;
    let (primal_score, profile) = sbm_linearised(tech, x, y)?;
    let (dual_score, weights) = sbm_dual(tech, x, y)?;
    if (primal_score - dual_score).abs() > PRIMAL_DUAL_TOL {
        return Err(Error::DualMismatch {
            primal: primal_score,
            dual: dual_score,
        });
    }
    let mut report = EfficiencyReport::new(Model::SbmAr, primal_score, x, y, &profile.d_minus, &profile.d_plus);
    if primal_score < 0.0 {
        warn!("SBM-AR score {primal_score} is negative");
        report.warnings.push(format!("negative SBM-AR score {primal_score:.6}"));
    }
    report.slacks = Some(profile);
    report.weights = Some(weights);
    Ok(report)
}

/// Charnes-Cooper form: scale every primal variable by `t` so that the
/// denominator `t + (1/s) sum S+_r / y_r` equals one.
///
/// Columns: `[t, lambda.., alpha.., beta.., S-.., S+..]`.
fn sbm_linearised(tech: &Technology, x: &[f64], y: &[f64]) -> Result<(f64, SlackProfile)> {
    let (m, s, k) = (tech.m(), tech.s(), tech.intensity_len());
    let (mf, sf) = (m as f64, s as f64);
    let ncols = 1 + k + m + s;
    let mut objective = vec![0.0; ncols];
    objective[0] = 1.0;
    for i in 0..m {
        objective[1 + k + i] = -1.0 / (mf * x[i]);
    }
    let mut lp = LinearProgram::new(Sense::Minimize, objective);

    let mut norm = vec![0.0; ncols];
    norm[0] = 1.0;
    for r in 0..s {
        norm[1 + k + m + r] = 1.0 / (sf * y[r]);
    }
    lp.add_row(norm, Relation::Eq, 1.0);
    for i in 0..m {
        let mut row = vec![-x[i]];
        row.extend(tech.input_row(i));
        row.extend((0..m + s).map(|c| if c == i { 1.0 } else { 0.0 }));
        lp.add_row(row, Relation::Eq, 0.0);
    }
    for r in 0..s {
        let mut row = vec![-y[r]];
        row.extend(tech.output_row(r));
        row.extend((0..m + s).map(|c| if c == m + r { -1.0 } else { 0.0 }));
        lp.add_row(row, Relation::Eq, 0.0);
    }

    let sol = tech.solver().solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::OutsideTechnology),
        LpStatus::Unbounded => return Err(Error::Unbounded("linearised SBM-AR".into())),
    }
    let t = sol.primal[0];
    if t <= 1e-12 {
        return Err(Error::Unbounded("SBM-AR optimum is not attained (t = 0)".into()));
    }
    let unscale =
        |range: std::ops::Range<usize>| -> Vec<f64> { sol.primal[range].iter().map(|v| (v / t).max(0.0)).collect() };
    let (n, kp) = (tech.n(), tech.region().p.cols());
    let profile = SlackProfile {
        lambda: unscale(1..1 + n),
        alpha: unscale(1 + n..1 + n + kp),
        beta: unscale(1 + n + kp..1 + k),
        d_minus: unscale(1 + k..1 + k + m),
        d_plus: unscale(1 + k + m..ncols),
    };
    Ok((sol.objective, profile))
}

/// `max uy - vx + 1` subject to `u y_j - v x_j <= 0`, `v_i >= 1/(m x_i)`,
/// `u_r >= (1 + uy - vx)/(s y_r)`, `vP <= 0`, `uQ <= 0`.
fn sbm_dual(tech: &Technology, x: &[f64], y: &[f64]) -> Result<(f64, DualWeights)> {
    let (m, s) = (tech.m(), tech.s());
    let (mf, sf) = (m as f64, s as f64);
    let mut objective: Vec<f64> = x.iter().map(|v| -v).collect();
    objective.extend_from_slice(y);
    let mut lp = LinearProgram::new(Sense::Maximize, objective);
    for j in 0..m + s {
        lp.set_free(j);
    }
    let data = tech.data();
    for j in 0..tech.n() {
        let mut row: Vec<f64> = data.inputs[j].iter().map(|v| -v).collect();
        row.extend_from_slice(&data.outputs[j]);
        lp.add_row(row, Relation::Le, 0.0);
    }
    for i in 0..m {
        let mut row = vec![0.0; m + s];
        row[i] = 1.0;
        lp.add_row(row, Relation::Ge, 1.0 / (mf * x[i]));
    }
    // s y_r u_r - u y + v x >= 1
    for r in 0..s {
        let mut row: Vec<f64> = x.to_vec();
        row.extend(y.iter().map(|v| -v));
        row[m + r] += sf * y[r];
        lp.add_row(row, Relation::Ge, 1.0);
    }
    let (p, q) = (&tech.region().p, &tech.region().q);
    for c in 0..p.cols() {
        let mut row: Vec<f64> = (0..m).map(|i| p.get(i, c)).collect();
        row.extend(std::iter::repeat_n(0.0, s));
        lp.add_row(row, Relation::Le, 0.0);
    }
    for c in 0..q.cols() {
        let mut row = vec![0.0; m];
        row.extend((0..s).map(|r| q.get(r, c)));
        lp.add_row(row, Relation::Le, 0.0);
    }
    let sol = tech.solver().solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok((
            sol.objective + 1.0,
            DualWeights {
                v: sol.primal[..m].to_vec(),
                u: sol.primal[m..].to_vec(),
            },
        )),
        LpStatus::Infeasible => Err(Error::Unbounded("SBM-AR dual is infeasible".into())),
        LpStatus::Unbounded => Err(Error::OutsideTechnology),
    }
}

/// For fixed output shortfalls `d+`, the largest input reduction
/// `max sum d-_i / x_i` over the equality form of the technology.
/// Returns `g_-` at the optimum, or `None` when `(x, y + d+)` is outside `T`.
fn best_input_slacks(tech: &Technology, x: &[f64], y: &[f64], d_plus: &[f64]) -> Result<Option<(f64, SlackProfile)>> {
    let (m, s, k) = (tech.m(), tech.s(), tech.intensity_len());
    let target: Vec<f64> = y.iter().zip(d_plus).map(|(a, d)| a + d).collect();
    let objective: Vec<f64> = x.iter().map(|v| 1.0 / v).collect();
    let lp = tech.pps_lp(
        Sense::Maximize,
        &objective,
        x,
        &target,
        |i| (0..m).map(|c| if c == i { 1.0 } else { 0.0 }).collect(),
        |_| vec![0.0; m],
        Some(Relation::Eq),
    );
    let sol = tech.solver().solve(&lp)?;
    match sol.status {
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(Error::Unbounded(
            "input slacks are unbounded for fixed output shortfalls".into(),
        )),
        LpStatus::Optimal => {
            let (n, kp) = (tech.n(), tech.region().p.cols());
            let z = &sol.primal;
            let pos = |r: std::ops::Range<usize>| z[r].iter().map(|v| v.max(0.0)).collect();
            let profile = SlackProfile {
                d_minus: pos(0..m),
                d_plus: d_plus.to_vec(),
                lambda: pos(m..m + n),
                alpha: pos(m + n..m + n + kp),
                beta: pos(m + n + kp..m + k),
            };
            debug_assert_eq!(profile.d_plus.len(), s);
            Ok(Some((1.0 - sol.objective / m as f64, profile)))
        }
    }
}

struct BrwzSearch<'a> {
    tech: &'a Technology,
    x: &'a [f64],
    y: &'a [f64],
}

impl BrwzSearch<'_> {
    /// `min_{d-} g_-(d-) * h_+(d+)`; `+inf` outside the technology.
    fn value(&self, d_plus: &[f64]) -> Result<f64> {
        Ok(match best_input_slacks(self.tech, self.x, self.y, d_plus)? {
            Some((g, _)) => g * eval_h_plus(d_plus, self.y)?,
            None => f64::INFINITY,
        })
    }

    /// Largest feasible value of coordinate `r` with the others held fixed.
    fn coordinate_cap(&self, d_plus: &[f64], r: usize) -> Result<f64> {
        let shifted: Vec<f64> = self.y.iter().zip(d_plus).map(|(a, d)| a + d).collect();
        Ok(match max_step(self.tech, self.x, &shifted, Ray::Output(r))? {
            Extent::Finite(t) => d_plus[r] + t,
            Extent::Unbounded => d_plus[r] + 100.0 * self.y[r].max(1.0),
        })
    }

    /// Grid scan followed by golden-section refinement around the best cell.
    fn line_search(&self, d_plus: &mut [f64], r: usize, current: f64) -> Result<f64> {
        const GRID: usize = 12;
        const GOLDEN_STEPS: usize = 48;
        let hi = self.coordinate_cap(d_plus, r)?;
        if hi <= 0.0 {
            return Ok(current);
        }
        let mut probe = d_plus.to_vec();
        let mut eval = |w: f64| -> Result<f64> {
            probe[r] = w;
            self.value(&probe)
        };
        let step = hi / GRID as f64;
        let mut best = (d_plus[r], current);
        let mut best_cell = None;
        for g in 0..=GRID {
            let w = step * g as f64;
            let v = eval(w)?;
            if v < best.1 {
                best = (w, v);
                best_cell = Some(g);
            }
        }
        let centre = best_cell.map_or(best.0, |g| step * g as f64);
        let (mut a, mut b) = ((centre - step).max(0.0), (centre + step).min(hi));
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut fc, mut fd) = (eval(c)?, eval(d)?);
        for _ in 0..GOLDEN_STEPS {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = eval(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = eval(d)?;
            }
        }
        for (w, v) in [(c, fc), (d, fd)] {
            if v < best.1 {
                best = (w, v);
            }
        }
        d_plus[r] = best.0;
        Ok(best.1)
    }

    fn descend(&self, start: Vec<f64>) -> Result<Option<(f64, Vec<f64>)>> {
        let mut cur = start;
        let mut value = self.value(&cur)?;
        if !value.is_finite() {
            return Ok(None);
        }
        for _ in 0..MAX_DESCENT_SWEEPS {
            let before = value;
            for r in 0..cur.len() {
                value = self.line_search(&mut cur, r, value)?;
            }
            if before - value < DESCENT_TOL {
                break;
            }
        }
        Ok(Some((value, cur)))
    }
}

/// BRWZ-AR score for a strictly positive point: the best local minimum found
/// from the SBM-AR optimum, zero slacks and each single-output max step.
pub fn brwz_ar(tech: &Technology, x: &[f64], y: &[f64]) -> Result<EfficiencyReport> {
    tech.check_dims(x, y)?;
    require_positive("BRWZ-AR", x)?;
    require_positive("BRWZ-AR", y)?;
    let s = tech.s();
    let search = BrwzSearch { tech, x, y };

    let mut starts: Vec<Vec<f64>> = vec![vec![0.0; s]];
    starts.push(sbm_linearised(tech, x, y)?.1.d_plus);
    for r in 0..s {
        if let Extent::Finite(t) = max_step(tech, x, y, Ray::Output(r))? {
            let mut d = vec![0.0; s];
            d[r] = t;
            starts.push(d);
        }
    }
    starts.dedup_by(|a, b| a.iter().zip(b.iter()).all(|(p, q)| (p - q).abs() < 1e-12));

    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in starts {
        if let Some((v, d)) = search.descend(start)? {
            if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                best = Some((v, d));
            }
        }
    }
    let (_, d_plus) = best.ok_or(Error::OutsideTechnology)?;
    let (_, profile) = best_input_slacks(tech, x, y, &d_plus)?.ok_or(Error::OutsideTechnology)?;
    let score = model_objective(Model::BrwzAr, x, y, &profile.d_minus, &profile.d_plus)?;
    let mut report = EfficiencyReport::new(Model::BrwzAr, score, x, y, &profile.d_minus, &profile.d_plus);
    report.certified = false;
    if score < 0.0 {
        warn!("BRWZ-AR score {score} is negative");
        report.warnings.push(format!("negative BRWZ-AR score {score:.6}"));
    }
    report.slacks = Some(profile);
    Ok(report)
}

/// Outcome of [`verify_profile`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCheck {
    pub feasible: bool,
    pub objective: f64,
    /// Equality residuals, inputs then outputs.
    pub residuals: Vec<f64>,
    /// Most negative entry over all profile variables (0 if none).
    pub min_entry: f64,
}

/// Checks a slack profile against the equality form of the technology and
/// evaluates the model objective, without solving anything.
pub fn verify_profile(
    tech: &Technology,
    x: &[f64],
    y: &[f64],
    profile: &SlackProfile,
    model: Model,
) -> Result<ProfileCheck> {
    tech.check_dims(x, y)?;
    let region = tech.region();
    if profile.lambda.len() != tech.n()
        || profile.alpha.len() != region.p.cols()
        || profile.beta.len() != region.q.cols()
        || profile.d_minus.len() != tech.m()
        || profile.d_plus.len() != tech.s()
    {
        return Err(Error::Dimension("slack profile has the wrong shape".into()));
    }
    let data = tech.data();
    let p_alpha = region.p.mul(&profile.alpha);
    let q_beta = region.q.mul(&profile.beta);
    let mut residuals = Vec::with_capacity(tech.m() + tech.s());
    for i in 0..tech.m() {
        let lx: f64 = (0..tech.n()).map(|j| profile.lambda[j] * data.inputs[j][i]).sum();
        residuals.push(lx - p_alpha[i] + profile.d_minus[i] - x[i]);
    }
    for r in 0..tech.s() {
        let ly: f64 = (0..tech.n()).map(|j| profile.lambda[j] * data.outputs[j][r]).sum();
        residuals.push(ly + q_beta[r] - profile.d_plus[r] - y[r]);
    }
    let min_entry = profile
        .lambda
        .iter()
        .chain(&profile.alpha)
        .chain(&profile.beta)
        .chain(&profile.d_minus)
        .chain(&profile.d_plus)
        .fold(0.0f64, |m, v| m.min(*v));
    let feasible = residuals.iter().all(|r| r.abs() <= PROFILE_TOL) && min_entry >= -PROFILE_TOL;
    let objective = model_objective(model, x, y, &profile.d_minus, &profile.d_plus)?;
    Ok(ProfileCheck {
        feasible,
        objective,
        residuals,
        min_entry,
    })
}
