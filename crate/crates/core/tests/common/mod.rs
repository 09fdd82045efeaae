//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use dea_core::lp::{LinearProgram, Relation, Sense};
use dea_core::{AssuranceRegion, Dataset, RatioBounds, Technology};
use rand::Rng;

pub fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn reference_region() -> AssuranceRegion {
    AssuranceRegion::from_ratio_bounds(
        &RatioBounds {
            inputs: vec![(1.0, 2.0)],
            outputs: vec![(1.0, 2.0)],
        },
        2,
        2,
    )
    .unwrap()
}

/// Five-DMU dataset (A..E).
pub fn table1() -> Technology {
    let ds = Dataset::from_csv_path(fixture("table1.csv")).unwrap();
    Technology::new(ds, reference_region()).unwrap()
}

/// Eight-DMU dataset (A..H), including DMU G with zero entries.
pub fn table2() -> Technology {
    let ds = Dataset::from_csv_path(fixture("table2.csv")).unwrap();
    Technology::new(ds, reference_region()).unwrap()
}

pub fn dmu<'a>(tech: &'a Technology, name: &str) -> (&'a [f64], &'a [f64]) {
    tech.dmu(tech.data().index_of(name).unwrap())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleStatus {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

/// Solves a square system by Gauss-Jordan elimination with full pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (mut pi, mut pj, mut best) = (k, k, 0.0);
        for i in k..n {
            for j in k..n {
                if a[i][j].abs() > best {
                    best = a[i][j].abs();
                    pi = i;
                    pj = j;
                }
            }
        }
        if best < 1e-9 {
            return None;
        }
        a.swap(k, pi);
        b.swap(k, pi);
        for row in a.iter_mut() {
            row.swap(k, pj);
        }
        perm.swap(k, pj);
        for i in 0..n {
            if i != k {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in 0..n {
        x[perm[k]] = b[k] / a[k][k];
    }
    Some(x)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Vertices of `{ z >= 0 | rows }`, found by activating every choice of
/// `n` linearly independent constraints that includes all equalities.
fn vertices(nvars: usize, rows: &[(Vec<f64>, Relation, f64)]) -> Vec<Vec<f64>> {
    let mut cons: Vec<(Vec<f64>, Relation, f64)> = rows.to_vec();
    for j in 0..nvars {
        let mut e = vec![0.0; nvars];
        e[j] = 1.0;
        cons.push((e, Relation::Ge, 0.0));
    }
    let eqs: Vec<usize> = (0..cons.len()).filter(|&i| cons[i].1 == Relation::Eq).collect();
    let optional: Vec<usize> = (0..cons.len()).filter(|&i| cons[i].1 != Relation::Eq).collect();
    if eqs.len() > nvars {
        // Over-determined equalities: try every n-subset of them as well.
        let mut out = Vec::new();
        for pick in subsets(eqs.len(), nvars) {
            let active: Vec<usize> = pick.iter().map(|&k| eqs[k]).collect();
            push_if_feasible(&cons, &active, nvars, &mut out);
        }
        return out;
    }
    let mut out = Vec::new();
    for pick in subsets(optional.len(), nvars - eqs.len()) {
        let mut active = eqs.clone();
        active.extend(pick.iter().map(|&k| optional[k]));
        push_if_feasible(&cons, &active, nvars, &mut out);
    }
    out
}

fn push_if_feasible(cons: &[(Vec<f64>, Relation, f64)], active: &[usize], nvars: usize, out: &mut Vec<Vec<f64>>) {
    let a: Vec<Vec<f64>> = active.iter().map(|&i| cons[i].0.clone()).collect();
    let b: Vec<f64> = active.iter().map(|&i| cons[i].2).collect();
    if let Some(z) = solve_square(a, b) {
        let ok = cons.iter().all(|(row, rel, rhs)| {
            let lhs: f64 = row.iter().zip(&z).map(|(p, q)| p * q).sum();
            match rel {
                Relation::Le => lhs <= rhs + 1e-9,
                Relation::Ge => lhs >= rhs - 1e-9,
                Relation::Eq => (lhs - rhs).abs() <= 1e-9,
            }
        });
        if ok {
            debug_assert_eq!(z.len(), nvars);
            out.push(z);
        }
    }
}

/// Exhaustive basis enumeration for LPs whose variables are all nonnegative.
pub fn enumerate_lp(lp: &LinearProgram) -> OracleStatus {
    let n = lp.num_vars();
    let rows: Vec<(Vec<f64>, Relation, f64)> = lp
        .rows
        .iter()
        .zip(&lp.relations)
        .zip(&lp.rhs)
        .map(|((r, rel), b)| (r.clone(), *rel, *b))
        .collect();
    let sign = if lp.sense == Sense::Minimize { 1.0 } else { -1.0 };
    let eval = |z: &[f64]| -> f64 { lp.objective.iter().zip(z).map(|(c, v)| c * v).sum() };

    let verts = vertices(n, &rows);
    if verts.is_empty() {
        return OracleStatus::Infeasible;
    }
    // Recession cone intersected with the simplex sum(d) = 1.
    let mut cone: Vec<(Vec<f64>, Relation, f64)> = rows.iter().map(|(r, rel, _)| (r.clone(), *rel, 0.0)).collect();
    cone.push((vec![1.0; n], Relation::Eq, 1.0));
    if vertices(n, &cone).iter().any(|d| sign * eval(d) < -1e-9) {
        return OracleStatus::Unbounded;
    }
    let best = verts.iter().map(|z| sign * eval(z)).fold(f64::INFINITY, f64::min);
    OracleStatus::Optimal(sign * best)
}

/// Small LP with integer coefficients in [-3, 3] and mixed row relations.
pub fn random_lp(rng: &mut impl Rng, max_vars: usize, max_rows: usize) -> LinearProgram {
    let n = rng.gen_range(1..=max_vars);
    let rows = rng.gen_range(1..=max_rows);
    let sense = if rng.gen_bool(0.5) {
        Sense::Minimize
    } else {
        Sense::Maximize
    };
    let mut lp = LinearProgram::new(sense, (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect());
    for _ in 0..rows {
        let coeffs = (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect();
        let rel = match rng.gen_range(0..8) {
            0..=3 => Relation::Le,
            4..=6 => Relation::Ge,
            _ => Relation::Eq,
        };
        lp.add_row(coeffs, rel, rng.gen_range(-2..=8) as f64);
    }
    lp
}
