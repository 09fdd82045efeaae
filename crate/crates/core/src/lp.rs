//! Dense two-phase primal simplex.
//!
//! Every model in this crate compiles down to a [`LinearProgram`]: a dense
//! constraint matrix with per-row relations and per-variable lower bounds
//! of either `0` or `-inf`. Problems are tiny (tens of columns), so the
//! solver keeps a full tableau and favours robustness over speed.
//!
//! Dual values are shadow prices: `objective = b . dual` at optimality, and
//! the reduced costs `c - A^T dual` have the sign required by the sense.

use log::trace;
use thiserror::Error;

/// Optimisation direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Row relation `a . x (rel) b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// Lower bound of a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    NonNegative,
    Free,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
}

/// Solver tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Primal and dual feasibility residual.
    pub feas: f64,
    /// Allowed primal/dual objective gap.
    pub gap: f64,
    /// Smallest admissible pivot magnitude.
    pub pivot: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feas: 1e-8,
            gap: 1e-7,
            pivot: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub relations: Vec<Relation>,
    pub rhs: Vec<f64>,
    pub bounds: Vec<Bound>,
}

impl LinearProgram {
    /// An LP with the given objective, no rows and all variables nonnegative.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            sense,
            objective,
            rows: Vec::new(),
            relations: Vec::new(),
            rhs: Vec::new(),
            bounds: vec![Bound::NonNegative; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.rows.push(coeffs);
        self.relations.push(relation);
        self.rhs.push(rhs);
        self
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.bounds[var] = Bound::Free;
        self
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if self.bounds.len() != n {
            return Err(LpError::DimensionMismatch(format!(
                "{} bounds for {} variables",
                self.bounds.len(),
                n
            )));
        }
        if self.relations.len() != self.rows.len() || self.rhs.len() != self.rows.len() {
            return Err(LpError::DimensionMismatch(format!(
                "{} rows, {} relations, {} right-hand sides",
                self.rows.len(),
                self.relations.len(),
                self.rhs.len()
            )));
        }
        if let Some((i, row)) = self.rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(LpError::DimensionMismatch(format!(
                "row {i} has {} coefficients, expected {n}",
                row.len()
            )));
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(LpError::NonFinite("objective"));
        }
        if self.rhs.iter().any(|v| !v.is_finite()) {
            return Err(LpError::NonFinite("right-hand side"));
        }
        if self.rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(LpError::NonFinite("constraint matrix"));
        }
        Ok(())
    }

    /// Objective value `c . x`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Largest violation of any row or variable bound at `x`.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for ((row, rel), b) in self.rows.iter().zip(&self.relations).zip(&self.rhs) {
            let lhs = dot(row, x);
            let viol = match rel {
                Relation::Le => lhs - b,
                Relation::Ge => b - lhs,
                Relation::Eq => (lhs - b).abs(),
            };
            worst = worst.max(viol);
        }
        for (xj, bound) in x.iter().zip(&self.bounds) {
            if *bound == Bound::NonNegative {
                worst = worst.max(-xj);
            }
        }
        worst
    }

    /// Largest violation of dual feasibility for the shadow prices `y`.
    pub fn dual_residual(&self, y: &[f64]) -> f64 {
        // Work in minimisation form: sign = +1 for min, -1 for max.
        let sign = match self.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut worst = 0.0f64;
        for (yi, rel) in y.iter().zip(&self.relations) {
            let yi = sign * yi;
            let viol = match rel {
                Relation::Ge => -yi,
                Relation::Le => yi,
                Relation::Eq => 0.0,
            };
            worst = worst.max(viol);
        }
        for j in 0..self.num_vars() {
            let col: f64 = self.rows.iter().zip(y).map(|(row, yi)| row[j] * yi).sum();
            let reduced = sign * (self.objective[j] - col);
            let viol = match self.bounds[j] {
                Bound::NonNegative => -reduced,
                Bound::Free => reduced.abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal point, or the last basic point when unbounded. Empty when infeasible.
    pub primal: Vec<f64>,
    /// Shadow prices, one per row. Empty unless optimal.
    pub dual: Vec<f64>,
    /// `c . x` at optimality; `+-inf` otherwise, in the direction of the failure.
    pub objective: f64,
    /// Improving direction when unbounded: `primal + t * ray` is feasible for all `t >= 0`.
    pub ray: Option<Vec<f64>>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Dual objective `b . y`.
    pub fn dual_objective(&self, lp: &LinearProgram) -> f64 {
        dot(&lp.rhs, &self.dual)
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    Solver::default().solve(lp)
}

/// Number of consecutive degenerate pivots before switching to Bland's rule.
const STALL_THRESHOLD: usize = 50;
const MAX_ITERATIONS: usize = 50_000;

#[derive(Debug, Clone, Copy, Default)]
pub struct Solver {
    pub tol: Tolerances,
}

impl Solver {
    pub fn with_tolerances(tol: Tolerances) -> Self {
        Solver { tol }
    }

    pub fn solve(&self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        lp.validate()?;
        let mut sf = StandardForm::build(lp);
        let mut tab = Tableau::initial(&sf);
        trace!("initial tableau:\n{tab:?}");

        // Phase 1: minimise the sum of artificials.
        if sf.num_artificial > 0 {
            let mut cost = vec![0.0; sf.num_cols];
            for c in sf.artificial_start..sf.num_cols {
                cost[c] = 1.0;
            }
            tab.set_costs(&cost);
            match tab.run(&sf.active, self.tol.pivot)? {
                Outcome::Optimal => {}
                Outcome::Unbounded(_) => {
                    return Err(LpError::NumericalBreakdown(
                        "phase 1 reported an unbounded auxiliary problem".into(),
                    ))
                }
            }
            let infeasibility = -tab.obj[tab.rhs_col()];
            if infeasibility > self.tol.feas {
                return Ok(LpSolution {
                    status: LpStatus::Infeasible,
                    primal: Vec::new(),
                    dual: Vec::new(),
                    objective: match lp.sense {
                        Sense::Minimize => f64::INFINITY,
                        Sense::Maximize => f64::NEG_INFINITY,
                    },
                    ray: None,
                });
            }
            tab.expel_artificials(&mut sf, self.tol.pivot);
            for c in sf.artificial_start..sf.num_cols {
                sf.active[c] = false;
            }
        }

        // Phase 2.
        tab.set_costs(&sf.cost);
        let outcome = tab.run(&sf.active, self.tol.pivot)?;
        trace!("final tableau:\n{tab:?}");
        let point = sf.recover(&tab.basic_values());
        match outcome {
            Outcome::Unbounded(entering) => {
                let mut dir = vec![0.0; sf.num_cols];
                dir[entering] = 1.0;
                for (r, &bv) in tab.basis.iter().enumerate() {
                    dir[bv] = -tab.a[r][entering];
                }
                let ray = sf.recover(&dir);
                self.certify_ray(lp, &ray)?;
                Ok(LpSolution {
                    status: LpStatus::Unbounded,
                    primal: point,
                    dual: Vec::new(),
                    objective: match lp.sense {
                        Sense::Minimize => f64::NEG_INFINITY,
                        Sense::Maximize => f64::INFINITY,
                    },
                    ray: Some(ray),
                })
            }
            Outcome::Optimal => {
                let dual = sf.duals(lp, &tab.basis, &tab.kept_rows)?;
                let objective = lp.evaluate(&point);
                let solution = LpSolution {
                    status: LpStatus::Optimal,
                    primal: point,
                    dual,
                    objective,
                    ray: None,
                };
                self.certify(lp, &solution)?;
                Ok(solution)
            }
        }
    }

    /// An unbounded verdict rests on every entering-column entry being below
    /// the pivot tolerance; confirm the ray really is an improving recession direction.
    fn certify_ray(&self, lp: &LinearProgram, ray: &[f64]) -> Result<(), LpError> {
        let norm = ray.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = self.tol.feas * (1.0 + norm);
        let rows_ok = lp.rows.iter().zip(&lp.relations).all(|(row, rel)| {
            let v = dot(row, ray);
            match rel {
                Relation::Le => v <= tol,
                Relation::Ge => v >= -tol,
                Relation::Eq => v.abs() <= tol,
            }
        });
        let bounds_ok = ray.iter().zip(&lp.bounds).all(|(v, b)| *b == Bound::Free || *v >= -tol);
        let gain = match lp.sense {
            Sense::Minimize => -lp.evaluate(ray),
            Sense::Maximize => lp.evaluate(ray),
        };
        if rows_ok && bounds_ok && gain > 0.0 {
            Ok(())
        } else {
            Err(LpError::NumericalBreakdown(
                "pivot magnitudes fell below tolerance with no legal pivot".into(),
            ))
        }
    }

    fn certify(&self, lp: &LinearProgram, sol: &LpSolution) -> Result<(), LpError> {
        let scale = 1.0 + lp.rhs.iter().chain(&lp.objective).fold(0.0f64, |m, v| m.max(v.abs()));
        let primal = lp.primal_residual(&sol.primal);
        if primal > self.tol.feas * scale {
            return Err(LpError::NumericalBreakdown(format!(
                "primal residual {primal:e} exceeds tolerance"
            )));
        }
        let dual = lp.dual_residual(&sol.dual);
        if dual > self.tol.feas * scale {
            return Err(LpError::NumericalBreakdown(format!(
                "dual residual {dual:e} exceeds tolerance"
            )));
        }
        let gap = (sol.objective - sol.dual_objective(lp)).abs();
        if gap > self.tol.gap * (1.0 + sol.objective.abs()) {
            return Err(LpError::NumericalBreakdown(format!(
                "duality gap {gap:e} exceeds tolerance"
            )));
        }
        Ok(())
    }
}

/// `min cost . z` subject to `A z = b`, `z >= 0`, `b >= 0`, with a slack,
/// surplus or artificial column per row.
struct StandardForm {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    cost: Vec<f64>,
    /// Row was multiplied by -1 to make its right-hand side nonnegative.
    flipped: Vec<bool>,
    /// For each original variable, its positive column and optional negative column.
    var_cols: Vec<(usize, Option<usize>)>,
    initial_basis: Vec<usize>,
    num_cols: usize,
    artificial_start: usize,
    num_artificial: usize,
    active: Vec<bool>,
    sign: f64,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.num_rows();
        let sign = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut var_cols = Vec::with_capacity(lp.num_vars());
        let mut next = 0;
        for bound in &lp.bounds {
            match bound {
                Bound::NonNegative => {
                    var_cols.push((next, None));
                    next += 1;
                }
                Bound::Free => {
                    var_cols.push((next, Some(next + 1)));
                    next += 2;
                }
            }
        }
        let structural = next;

        let mut flipped = vec![false; m];
        let mut relations = lp.relations.clone();
        for i in 0..m {
            if lp.rhs[i] < 0.0 {
                flipped[i] = true;
                relations[i] = match relations[i] {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }
        let num_slack = relations.iter().filter(|r| **r != Relation::Eq).count();
        let num_artificial = relations.iter().filter(|r| **r != Relation::Le).count();
        let artificial_start = structural + num_slack;
        let num_cols = artificial_start + num_artificial;

        let mut a = vec![vec![0.0; num_cols]; m];
        let mut b = vec![0.0; m];
        let mut initial_basis = vec![0; m];
        let mut slack = structural;
        let mut art = artificial_start;
        for i in 0..m {
            let f = if flipped[i] { -1.0 } else { 1.0 };
            for (j, &(pos, neg)) in var_cols.iter().enumerate() {
                a[i][pos] = f * lp.rows[i][j];
                if let Some(neg) = neg {
                    a[i][neg] = -f * lp.rows[i][j];
                }
            }
            b[i] = f * lp.rhs[i];
            match relations[i] {
                Relation::Le => {
                    a[i][slack] = 1.0;
                    initial_basis[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    a[i][slack] = -1.0;
                    slack += 1;
                    a[i][art] = 1.0;
                    initial_basis[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    a[i][art] = 1.0;
                    initial_basis[i] = art;
                    art += 1;
                }
            }
        }

        let mut cost = vec![0.0; num_cols];
        for (j, &(pos, neg)) in var_cols.iter().enumerate() {
            cost[pos] = sign * lp.objective[j];
            if let Some(neg) = neg {
                cost[neg] = -sign * lp.objective[j];
            }
        }

        StandardForm {
            a,
            b,
            cost,
            flipped,
            var_cols,
            initial_basis,
            num_cols,
            artificial_start,
            num_artificial,
            active: vec![true; num_cols],
            sign,
        }
    }

    fn recover(&self, z: &[f64]) -> Vec<f64> {
        self.var_cols
            .iter()
            .map(|&(pos, neg)| z[pos] - neg.map_or(0.0, |n| z[n]))
            .collect()
    }

    /// Shadow prices from `B^T y = c_B` on the retained rows.
    fn duals(&self, lp: &LinearProgram, basis: &[usize], kept_rows: &[usize]) -> Result<Vec<f64>, LpError> {
        let k = kept_rows.len();
        let mut bt = vec![vec![0.0; k]; k];
        let mut rhs = vec![0.0; k];
        for (col, &bv) in basis.iter().enumerate() {
            for (row, &orig) in kept_rows.iter().enumerate() {
                bt[col][row] = self.a[orig][bv];
            }
            rhs[col] = self.cost[bv];
        }
        let y_kept = gauss_solve(bt, rhs)
            .ok_or_else(|| LpError::NumericalBreakdown("singular basis while recovering duals".into()))?;
        let mut y = vec![0.0; lp.num_rows()];
        for (&orig, yk) in kept_rows.iter().zip(y_kept) {
            let f = if self.flipped[orig] { -1.0 } else { 1.0 };
            y[orig] = self.sign * f * yk;
        }
        Ok(y)
    }
}

enum Outcome {
    Optimal,
    Unbounded(usize),
}

struct Tableau {
    /// Constraint rows, right-hand side in the last column.
    a: Vec<Vec<f64>>,
    /// Reduced costs; last entry is the negated objective.
    obj: Vec<f64>,
    basis: Vec<usize>,
    /// Original row index of each tableau row.
    kept_rows: Vec<usize>,
}

impl std::fmt::Debug for Tableau {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (row, bv) in self.a.iter().zip(&self.basis) {
            writeln!(f, "z{bv:<3} {row:9.4?}")?;
        }
        write!(f, "obj  {:9.4?}", self.obj)
    }
}

impl Tableau {
    fn initial(sf: &StandardForm) -> Self {
        let a =
            sf.a.iter()
                .zip(&sf.b)
                .map(|(row, b)| {
                    let mut r = row.clone();
                    r.push(*b);
                    r
                })
                .collect();
        Tableau {
            a,
            obj: vec![0.0; sf.num_cols + 1],
            basis: sf.initial_basis.clone(),
            kept_rows: (0..sf.b.len()).collect(),
        }
    }

    fn rhs_col(&self) -> usize {
        self.obj.len() - 1
    }

    fn set_costs(&mut self, cost: &[f64]) {
        let mut obj: Vec<f64> = cost.to_vec();
        obj.push(0.0);
        for (row, &bv) in self.a.iter().zip(&self.basis) {
            let cb = cost[bv];
            if cb != 0.0 {
                for (o, v) in obj.iter_mut().zip(row) {
                    *o -= cb * v;
                }
            }
        }
        self.obj = obj;
    }

    fn basic_values(&self) -> Vec<f64> {
        let rhs = self.rhs_col();
        let mut z = vec![0.0; rhs];
        for (row, &bv) in self.a.iter().zip(&self.basis) {
            z[bv] = row[rhs];
        }
        z
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.a[r][c];
        for v in self.a[r].iter_mut() {
            *v /= p;
        }
        self.a[r][c] = 1.0;
        let pivot_row = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pr) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
                row[c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, pr) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    fn run(&mut self, active: &[bool], pivot_tol: f64) -> Result<Outcome, LpError> {
        // Reduced costs above -OPT_TOL count as nonnegative.
        const OPT_TOL: f64 = 1e-11;
        let rhs = self.rhs_col();
        let mut stall = 0;
        for _ in 0..MAX_ITERATIONS {
            let bland = stall >= STALL_THRESHOLD;
            let candidates = (0..rhs).filter(|&j| active[j] && self.obj[j] < -OPT_TOL);
            let entering = if bland {
                candidates.min()
            } else {
                candidates.min_by(|&p, &q| self.obj[p].total_cmp(&self.obj[q]))
            };
            let Some(c) = entering else {
                return Ok(Outcome::Optimal);
            };

            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.a.iter().enumerate() {
                let aij = row[c];
                if aij <= pivot_tol {
                    continue;
                }
                let ratio = row[rhs].max(0.0) / aij;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leave else {
                return Ok(Outcome::Unbounded(c));
            };
            if ratio <= 1e-12 {
                stall += 1;
            } else {
                stall = 0;
            }
            self.pivot(r, c);
        }
        Err(LpError::NumericalBreakdown(format!(
            "no convergence after {MAX_ITERATIONS} pivots"
        )))
    }

    /// Pivot basic artificials out at zero level; drop rows where that is impossible.
    fn expel_artificials(&mut self, sf: &mut StandardForm, pivot_tol: f64) {
        let mut r = 0;
        while r < self.a.len() {
            if self.basis[r] >= sf.artificial_start {
                let col = (0..sf.artificial_start)
                    .filter(|&j| sf.active[j] && self.a[r][j].abs() > pivot_tol)
                    .max_by(|&p, &q| self.a[r][p].abs().total_cmp(&self.a[r][q].abs()));
                match col {
                    Some(c) => self.pivot(r, c),
                    None => {
                        self.a.remove(r);
                        self.basis.remove(r);
                        self.kept_rows.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting. `None` when singular.
pub(crate) fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-12 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}
