//! Assurance regions: trade-off matrices `P`, `Q` with weight restrictions
//! `vP <= 0`, `uQ <= 0`, built from ratio bounds on `v_i / v_1` and
//! `u_r / u_1` or supplied directly.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpStatus, Relation, Sense, Solver};
use crate::matrix::Matrix;

/// Threshold separating a zero minimum from a positive one in the assumption LPs.
pub const VCON_TOL: f64 = 1e-9;

/// `lower <= w_k / w_1 <= upper` for `k = 2..`; entry `k - 2` holds the pair for weight `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RatioBounds {
    pub inputs: Vec<(f64, f64)>,
    pub outputs: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    FromRatioBounds,
    UserSupplied,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssuranceRegion {
    /// `m` rows, one column per input trade-off.
    pub p: Matrix,
    /// `s` rows, one column per output trade-off.
    pub q: Matrix,
    pub provenance: Provenance,
}

impl AssuranceRegion {
    pub fn from_ratio_bounds(bounds: &RatioBounds, m: usize, s: usize) -> Result<Self> {
        Ok(AssuranceRegion {
            p: build_p(&bounds.inputs, m)?,
            q: build_q(&bounds.outputs, s)?,
            provenance: Provenance::FromRatioBounds,
        })
    }

    pub fn from_matrices(p: Matrix, q: Matrix) -> Result<Self> {
        if !p.is_finite() || !q.is_finite() {
            return Err(Error::InvalidRegion("non-finite trade-off entry".into()));
        }
        Ok(AssuranceRegion {
            p,
            q,
            provenance: Provenance::UserSupplied,
        })
    }

    /// No weight restrictions: zero-column `P` and `Q`.
    pub fn unrestricted(m: usize, s: usize) -> Self {
        AssuranceRegion {
            p: Matrix::zeros(m, 0),
            q: Matrix::zeros(s, 0),
            provenance: Provenance::UserSupplied,
        }
    }
}

/// Input trade-off matrix for `bounds[k-2] = (lower, upper)` on `v_k / v_1`.
pub fn build_p(bounds: &[(f64, f64)], m: usize) -> Result<Matrix> {
    ratio_matrix(bounds, m, "input")
}

/// Output trade-off matrix for `bounds[k-2] = (lower, upper)` on `u_k / u_1`.
pub fn build_q(bounds: &[(f64, f64)], s: usize) -> Result<Matrix> {
    ratio_matrix(bounds, s, "output")
}

fn ratio_matrix(bounds: &[(f64, f64)], dim: usize, side: &str) -> Result<Matrix> {
    if dim == 0 {
        return Err(Error::InvalidRegion(format!("{side} dimension must be at least 1")));
    }
    if bounds.len() != dim - 1 {
        return Err(Error::InvalidRegion(format!(
            "{} {side} ratio bounds supplied, expected {}",
            bounds.len(),
            dim - 1
        )));
    }
    for (k, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::InvalidRegion(format!(
                "{side} ratio bound {} must satisfy 0 < lower <= upper < inf, got ({lo}, {hi})",
                k + 2
            )));
        }
    }
    // Column 2k encodes lower_k * w_1 - w_k <= 0, column 2k+1 encodes w_k - upper_k * w_1 <= 0
    // (0-based columns, k-th bounded weight at row k+1).
    let mut mat = Matrix::zeros(dim, 2 * (dim - 1));
    for (k, &(lo, hi)) in bounds.iter().enumerate() {
        mat.set(0, 2 * k, lo);
        mat.set(0, 2 * k + 1, -hi);
        mat.set(k + 1, 2 * k, -1.0);
        mat.set(k + 1, 2 * k + 1, 1.0);
    }
    Ok(mat)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// `min { v_i | sum v = 1, vP <= 0, v >= 0 }`; `None` when infeasible.
    pub input_minima: Vec<Option<f64>>,
    /// `min { u_r | sum u = 1, uQ <= 0, u >= 0 }`; `None` when infeasible.
    pub output_minima: Vec<Option<f64>>,
    pub vcon: bool,
    pub ucon: bool,
}

impl AssumptionReport {
    pub fn holds(&self) -> bool {
        self.vcon && self.ucon
    }
}

/// Solves the `m + s` normalised weight-minimisation LPs.
///
/// `(Vcon)` holds iff no input LP reaches 0 (infeasibility means the
/// restricted weight cone is `{0}`). `(Ucon)` holds iff every output LP is
/// feasible with a strictly positive minimum.
pub fn check_assumptions(ar: &AssuranceRegion) -> Result<AssumptionReport> {
    let solver = Solver::default();
    let input_minima = weight_minima(&solver, &ar.p)?;
    let output_minima = weight_minima(&solver, &ar.q)?;
    let vcon = input_minima.iter().all(|v| v.is_none_or(|v| v > VCON_TOL));
    let ucon = output_minima.iter().all(|v| v.is_some_and(|v| v > VCON_TOL));
    if !vcon || !ucon {
        warn!("assurance region violates regularity assumptions (vcon={vcon}, ucon={ucon})");
    }
    Ok(AssumptionReport {
        input_minima,
        output_minima,
        vcon,
        ucon,
    })
}

fn weight_minima(solver: &Solver, mat: &Matrix) -> Result<Vec<Option<f64>>> {
    let dim = mat.rows();
    (0..dim)
        .map(|i| {
            let mut objective = vec![0.0; dim];
            objective[i] = 1.0;
            let mut lp = LinearProgram::new(Sense::Minimize, objective);
            lp.add_row(vec![1.0; dim], Relation::Eq, 1.0);
            for j in 0..mat.cols() {
                lp.add_row((0..dim).map(|k| mat.get(k, j)).collect(), Relation::Le, 0.0);
            }
            let sol = solver.solve(&lp)?;
            match sol.status {
                LpStatus::Optimal => Ok(Some(sol.objective)),
                LpStatus::Infeasible => Ok(None),
                LpStatus::Unbounded => Err(Error::Internal(
                    "weight minimisation over the simplex cannot be unbounded".into(),
                )),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_example() {
        let p = build_p(&[(1.0, 2.0)], 2).unwrap();
        assert_eq!(p.to_rows(), vec![vec![1.0, -2.0], vec![-1.0, 1.0]]);
        let q = build_q(&[(1.0, 2.0)], 2).unwrap();
        assert_eq!(q, p);
    }

    #[test]
    fn scalar_case_has_no_columns() {
        let p = build_p(&[], 1).unwrap();
        assert_eq!((p.rows(), p.cols()), (1, 0));
    }

    #[test]
    fn invalid_bounds_rejected() {
        assert!(build_p(&[(0.0, 1.0)], 2).is_err());
        assert!(build_p(&[(2.0, 1.0)], 2).is_err());
        assert!(build_p(&[(-1.0, 1.0)], 2).is_err());
        assert!(build_q(&[(1.0, 2.0)], 3).is_err());
    }

    #[test]
    fn three_rows_sparsity() {
        let p = build_p(&[(1.0, 2.0), (3.0, 4.0)], 3).unwrap();
        assert_eq!(
            p.to_rows(),
            vec![
                vec![1.0, -2.0, 3.0, -4.0],
                vec![-1.0, 1.0, 0.0, 0.0],
                vec![0.0, 0.0, -1.0, 1.0],
            ]
        );
    }

    #[test]
    fn reference_region_satisfies_assumptions() {
        let ar = AssuranceRegion::from_ratio_bounds(
            &RatioBounds {
                inputs: vec![(1.0, 2.0)],
                outputs: vec![(1.0, 2.0)],
            },
            2,
            2,
        )
        .unwrap();
        let rep = check_assumptions(&ar).unwrap();
        assert!(rep.vcon && rep.ucon);
        for v in rep.input_minima.iter().chain(&rep.output_minima) {
            assert!(v.unwrap() > VCON_TOL);
        }
        // v = (1/3, 2/3) at the upper ratio bound gives the smallest v_1.
        assert!((rep.input_minima[0].unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((rep.input_minima[1].unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unrestricted_weights_fail_vcon() {
        let rep = check_assumptions(&AssuranceRegion::unrestricted(2, 2)).unwrap();
        assert!(!rep.vcon);
        assert!(!rep.ucon);
        assert_eq!(rep.input_minima, vec![Some(0.0), Some(0.0)]);
    }

    #[test]
    fn single_weight_satisfies_both() {
        let rep = check_assumptions(&AssuranceRegion::unrestricted(1, 1)).unwrap();
        assert!(rep.vcon && rep.ucon);
    }

    #[test]
    fn empty_weight_cone_counts_for_vcon_but_not_ucon() {
        // v_1 <= 0 and v_2 <= 0 leave only v = 0, so the normalised LP is infeasible.
        let p = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], 2).unwrap();
        let ar = AssuranceRegion::from_matrices(p.clone(), p).unwrap();
        let rep = check_assumptions(&ar).unwrap();
        assert_eq!(rep.input_minima, vec![None, None]);
        assert!(rep.vcon);
        assert!(!rep.ucon);
    }
}
