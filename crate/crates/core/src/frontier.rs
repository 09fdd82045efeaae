//! The polyhedral technology
//!
//! `T = { (x, y) | X lambda - P alpha <= x, Y lambda + Q beta >= y, lambda, alpha, beta >= 0 }`
//!
//! and the frontier queries built on it. `T` carries no nonnegativity
//! restriction, so projected points with negative coordinates are legal.

use serde::{Deserialize, Serialize};

use crate::ar::{check_assumptions, AssumptionReport, AssuranceRegion};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpSolution, LpStatus, Relation, Sense, Solver, Tolerances};

/// Threshold for `phi` and total slack to count as zero.
pub const FRONTIER_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct Technology {
    data: Dataset,
    ar: AssuranceRegion,
    assumptions: AssumptionReport,
    solver: Solver,
}

impl Technology {
    pub fn new(data: Dataset, ar: AssuranceRegion) -> Result<Self> {
        Technology::with_tolerances(data, ar, Tolerances::default())
    }

    pub fn with_tolerances(data: Dataset, ar: AssuranceRegion, tol: Tolerances) -> Result<Self> {
        if ar.p.rows() != data.num_inputs() {
            return Err(Error::Dimension(format!(
                "P has {} rows for {} inputs",
                ar.p.rows(),
                data.num_inputs()
            )));
        }
        if ar.q.rows() != data.num_outputs() {
            return Err(Error::Dimension(format!(
                "Q has {} rows for {} outputs",
                ar.q.rows(),
                data.num_outputs()
            )));
        }
        let assumptions = check_assumptions(&ar)?;
        Ok(Technology {
            data,
            ar,
            assumptions,
            solver: Solver::with_tolerances(tol),
        })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn region(&self) -> &AssuranceRegion {
        &self.ar
    }

    pub fn assumptions(&self) -> &AssumptionReport {
        &self.assumptions
    }

    pub fn solver(&self) -> &Solver {
        &self.solver
    }

    pub fn m(&self) -> usize {
        self.data.num_inputs()
    }

    pub fn s(&self) -> usize {
        self.data.num_outputs()
    }

    pub fn n(&self) -> usize {
        self.data.num_dmus()
    }

    /// Observed input and output vectors of DMU `j`.
    pub fn dmu(&self, j: usize) -> (&[f64], &[f64]) {
        (&self.data.inputs[j], &self.data.outputs[j])
    }

    pub(crate) fn check_dims(&self, x: &[f64], y: &[f64]) -> Result<()> {
        if x.len() != self.m() || y.len() != self.s() {
            return Err(Error::Dimension(format!(
                "point has {} inputs and {} outputs, technology has {} and {}",
                x.len(),
                y.len(),
                self.m(),
                self.s()
            )));
        }
        Ok(())
    }

    /// Number of `lambda`, `alpha`, `beta` columns, in that order.
    pub(crate) fn intensity_len(&self) -> usize {
        self.n() + self.ar.p.cols() + self.ar.q.cols()
    }

    /// Coefficients of `X lambda - P alpha` (row `i`) over the intensity columns.
    pub(crate) fn input_row(&self, i: usize) -> Vec<f64> {
        let mut row = Vec::with_capacity(self.intensity_len());
        row.extend(self.data.inputs.iter().map(|x| x[i]));
        row.extend(self.ar.p.row(i).iter().map(|p| -p));
        row.extend(std::iter::repeat_n(0.0, self.ar.q.cols()));
        row
    }

    /// Coefficients of `Y lambda + Q beta` (row `r`) over the intensity columns.
    pub(crate) fn output_row(&self, r: usize) -> Vec<f64> {
        let mut row = Vec::with_capacity(self.intensity_len());
        row.extend(self.data.outputs.iter().map(|y| y[r]));
        row.extend(std::iter::repeat_n(0.0, self.ar.p.cols()));
        row.extend_from_slice(self.ar.q.row(r));
        row
    }

    /// LP over `[extra.., intensities..]` with the inequality form of `T`
    /// at `(x, y)`. `input_extra[i]`/`output_extra[r]` are the coefficients
    /// of the leading extra columns on each row.
    pub(crate) fn pps_lp(
        &self,
        sense: Sense,
        extra_objective: &[f64],
        x: &[f64],
        y: &[f64],
        input_extra: impl Fn(usize) -> Vec<f64>,
        output_extra: impl Fn(usize) -> Vec<f64>,
        relation: Option<Relation>,
    ) -> LinearProgram {
        let k = extra_objective.len();
        let mut objective = extra_objective.to_vec();
        objective.extend(std::iter::repeat_n(0.0, self.intensity_len()));
        let mut lp = LinearProgram::new(sense, objective);
        for i in 0..self.m() {
            let mut row = input_extra(i);
            debug_assert_eq!(row.len(), k);
            row.extend(self.input_row(i));
            lp.add_row(row, relation.unwrap_or(Relation::Le), x[i]);
        }
        for r in 0..self.s() {
            let mut row = output_extra(r);
            row.extend(self.output_row(r));
            lp.add_row(row, relation.unwrap_or(Relation::Ge), y[r]);
        }
        lp
    }

    /// `(x, y) in T`.
    pub fn membership(&self, x: &[f64], y: &[f64]) -> Result<bool> {
        self.check_dims(x, y)?;
        let lp = self.pps_lp(Sense::Minimize, &[], x, y, |_| vec![], |_| vec![], None);
        Ok(self.solver.solve(&lp)?.status == LpStatus::Optimal)
    }
}

/// A maximal step that may be unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Extent {
    Finite(f64),
    Unbounded,
}

impl Extent {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extent::Finite(v) => Some(v),
            Extent::Unbounded => None,
        }
    }

    pub fn is_zero(self, tol: f64) -> bool {
        matches!(self, Extent::Finite(v) if v.abs() <= tol)
    }
}

/// Single-coordinate direction: contract input `i` or expand output `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ray {
    Input(usize),
    Output(usize),
}

/// Largest absolute step `t` such that the point moved by `t` along the
/// unit ray stays in `T`.
pub fn max_step(tech: &Technology, x: &[f64], y: &[f64], ray: Ray) -> Result<Extent> {
    tech.check_dims(x, y)?;
    match ray {
        Ray::Input(i) if i >= tech.m() => return Err(Error::Dimension(format!("no input {i}"))),
        Ray::Output(r) if r >= tech.s() => return Err(Error::Dimension(format!("no output {r}"))),
        _ => {}
    }
    // Contracting x_i by t: X lambda - P alpha + t e_i <= x.
    // Expanding y_r by t: Y lambda + Q beta - t e_r >= y.
    let mut lp = tech.pps_lp(
        Sense::Maximize,
        &[1.0],
        x,
        y,
        |i| vec![if ray == Ray::Input(i) { 1.0 } else { 0.0 }],
        |r| vec![if ray == Ray::Output(r) { -1.0 } else { 0.0 }],
        None,
    );
    lp.set_free(0);
    let sol = tech.solver().solve(&lp)?;
    match sol.status {
        // A negative optimum means the point only enters T after a move the other way.
        LpStatus::Optimal if sol.primal[0] < -FRONTIER_TOL => Err(Error::OutsideTechnology),
        LpStatus::Optimal => Ok(Extent::Finite(sol.primal[0].max(0.0))),
        LpStatus::Unbounded => Ok(Extent::Unbounded),
        LpStatus::Infeasible => Err(Error::OutsideTechnology),
    }
}

/// `max { delta | (x - delta x_i e_i, y) in T }` or the output analogue
/// `max { delta | (x, y + delta y_r e_r) in T }`.
///
/// A zero coordinate has no relative scale and is rejected.
pub fn solve_max_delta(tech: &Technology, x: &[f64], y: &[f64], ray: Ray) -> Result<Extent> {
    let scale = match ray {
        Ray::Input(i) => x.get(i).copied(),
        Ray::Output(r) => y.get(r).copied(),
    }
    .ok_or_else(|| Error::Dimension(format!("ray {ray:?} out of range")))?;
    if scale <= 0.0 {
        let idx = match ray {
            Ray::Input(i) | Ray::Output(i) => i,
        };
        return Err(Error::ZeroCoordinate("relative max-delta", idx));
    }
    Ok(match max_step(tech, x, y, ray)? {
        Extent::Finite(t) => Extent::Finite(t / scale),
        Extent::Unbounded => Extent::Unbounded,
    })
}

/// `delta_bar_i^-`: maximal relative contraction of input `i`.
pub fn max_contraction(tech: &Technology, x: &[f64], y: &[f64], i: usize) -> Result<Extent> {
    solve_max_delta(tech, x, y, Ray::Input(i))
}

/// `delta_bar_r^+`: maximal relative expansion of output `r`.
pub fn max_expansion(tech: &Technology, x: &[f64], y: &[f64], r: usize) -> Result<Extent> {
    solve_max_delta(tech, x, y, Ray::Output(r))
}

/// Uniform contraction/augmentation gap
/// `max { phi | X lambda - P alpha + phi 1 <= x, Y lambda + Q beta - phi 1 >= y }`.
/// Zero exactly on the weakly efficient frontier.
pub fn weak_gap(tech: &Technology, x: &[f64], y: &[f64]) -> Result<Extent> {
    tech.check_dims(x, y)?;
    let mut lp = tech.pps_lp(Sense::Maximize, &[1.0], x, y, |_| vec![1.0], |_| vec![-1.0], None);
    lp.set_free(0);
    let sol = tech.solver().solve(&lp)?;
    extent_of(&sol, |s| s.objective)
}

/// The dual of [`weak_gap`]: `min { vx - uy | v x_j - u y_j >= 0, vP <= 0, uQ <= 0, v1 + u1 = 1, v, u >= 0 }`.
/// Returns the value and the minimising weights.
pub fn weak_gap_dual(tech: &Technology, x: &[f64], y: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    tech.check_dims(x, y)?;
    let (m, s) = (tech.m(), tech.s());
    let mut objective: Vec<f64> = x.to_vec();
    objective.extend(y.iter().map(|v| -v));
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    let data = tech.data();
    for j in 0..tech.n() {
        let mut row = data.inputs[j].clone();
        row.extend(data.outputs[j].iter().map(|v| -v));
        lp.add_row(row, Relation::Ge, 0.0);
    }
    let (p, q) = (&tech.region().p, &tech.region().q);
    for k in 0..p.cols() {
        let mut row: Vec<f64> = (0..m).map(|i| p.get(i, k)).collect();
        row.extend(std::iter::repeat_n(0.0, s));
        lp.add_row(row, Relation::Le, 0.0);
    }
    for k in 0..q.cols() {
        let mut row = vec![0.0; m];
        row.extend((0..s).map(|r| q.get(r, k)));
        lp.add_row(row, Relation::Le, 0.0);
    }
    lp.add_row(vec![1.0; m + s], Relation::Eq, 1.0);
    let sol = tech.solver().solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok((sol.objective, sol.primal[..m].to_vec(), sol.primal[m..].to_vec())),
        LpStatus::Infeasible => Err(Error::Unbounded("weak-gap dual is infeasible".into())),
        LpStatus::Unbounded => Err(Error::OutsideTechnology),
    }
}

/// Additive max-slack value over the equality form of `T`, with the
/// maximising slacks `(d-, d+)`. Zero exactly on the strong frontier.
pub fn strong_gap_slacks(tech: &Technology, x: &[f64], y: &[f64]) -> Result<(Extent, Option<(Vec<f64>, Vec<f64>)>)> {
    tech.check_dims(x, y)?;
    let (m, s) = (tech.m(), tech.s());
    let lp = tech.pps_lp(
        Sense::Maximize,
        &vec![1.0; m + s],
        x,
        y,
        |i| (0..m + s).map(|k| if k == i { 1.0 } else { 0.0 }).collect(),
        |r| (0..m + s).map(|k| if k == m + r { -1.0 } else { 0.0 }).collect(),
        Some(Relation::Eq),
    );
    let sol = tech.solver().solve(&lp)?;
    let value = extent_of(&sol, |s| s.objective)?;
    let slacks = (sol.status == LpStatus::Optimal).then(|| (sol.primal[..m].to_vec(), sol.primal[m..m + s].to_vec()));
    Ok((value, slacks))
}

pub fn strong_gap(tech: &Technology, x: &[f64], y: &[f64]) -> Result<Extent> {
    Ok(strong_gap_slacks(tech, x, y)?.0)
}

fn extent_of(sol: &LpSolution, value: impl Fn(&LpSolution) -> f64) -> Result<Extent> {
    match sol.status {
        LpStatus::Optimal => Ok(Extent::Finite(value(sol))),
        LpStatus::Unbounded => Ok(Extent::Unbounded),
        LpStatus::Infeasible => Err(Error::OutsideTechnology),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrontierKind {
    Outside,
    Interior,
    WeaklyEfficientOnly,
    StronglyEfficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierClass {
    pub kind: FrontierKind,
    pub phi: Option<Extent>,
    pub total_slack: Option<Extent>,
}

pub fn classify(tech: &Technology, x: &[f64], y: &[f64]) -> Result<FrontierClass> {
    if !tech.membership(x, y)? {
        return Ok(FrontierClass {
            kind: FrontierKind::Outside,
            phi: None,
            total_slack: None,
        });
    }
    let phi = weak_gap(tech, x, y)?;
    if !phi.is_zero(FRONTIER_TOL) {
        return Ok(FrontierClass {
            kind: FrontierKind::Interior,
            phi: Some(phi),
            total_slack: None,
        });
    }
    let slack = strong_gap(tech, x, y)?;
    let kind = if slack.is_zero(FRONTIER_TOL) {
        FrontierKind::StronglyEfficient
    } else {
        FrontierKind::WeaklyEfficientOnly
    };
    if kind == FrontierKind::WeaklyEfficientOnly
        && tech.assumptions().holds()
        && y.iter().all(|v| *v >= 0.0)
        && y.iter().any(|v| *v > 0.0)
    {
        log::warn!("weakly-but-not-strongly efficient point found although the assumptions hold");
    }
    Ok(FrontierClass {
        kind,
        phi: Some(phi),
        total_slack: Some(slack),
    })
}
