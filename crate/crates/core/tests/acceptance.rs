//! Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::time::Instant;

use common::{dmu, enumerate_lp, random_lp, reference_region, table1, table2, OracleStatus};
use dea_core::ar::check_assumptions;
use dea_core::closest::{closed_form, continuity_probe, distance_profile, f_b, f_s, support};
use dea_core::frontier::{max_step, strong_gap, weak_gap, Extent, Ray, FRONTIER_TOL};
use dea_core::lp::{solve_lp, LinearProgram, LpStatus, Relation, Sense};
use dea_core::measures::{brwz_ar, sbm_ar, verify_profile};
use dea_core::verify::{run_axiom_suite, Measure, Property, Status, SuiteReport, CONTINUITY_EPSILONS};
use dea_core::{EfficiencyReport, Model, SlackProfile, Technology};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Reference cells: score, then (projection, diff, rate) for x1, x2, y1, y2.
type Block = (&'static str, f64, [[f64; 3]; 4]);

const TABLE1_SBM: [Block; 5] = [
    (
        "A",
        0.793,
        [[4.0, 0.0, 0.0], [3.0, 0.0, 0.0], [3.042, 1.042, 0.521], [3.0, 0.0, 0.0]],
    ),
    (
        "B",
        -0.973,
        [
            [-17.682, 23.682, 3.947],
            [20.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
        ],
    ),
    (
        "C",
        1.0,
        [[8.0, 0.0, 0.0], [1.0, 0.0, 0.0], [6.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
    ),
    (
        "D",
        0.667,
        [[8.0, 0.0, 0.0], [1.0, 0.0, 0.0], [6.0, 0.0, 0.0], [2.0, 1.0, 1.0]],
    ),
    (
        "E",
        1.0,
        [[2.0, 0.0, 0.0], [4.0, 0.0, 0.0], [1.0, 0.0, 0.0], [4.0, 0.0, 0.0]],
    ),
];

const TABLE1_BRWZ: [Block; 5] = [
    (
        "A",
        0.817,
        [
            [4.0, 0.0, 0.0],
            [2.643, 0.357, 0.119],
            [2.714, 0.714, 0.357],
            [3.0, 0.0, 0.0],
        ],
    ),
    (
        "B",
        -0.973,
        [
            [-17.682, 23.682, 3.947],
            [20.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
        ],
    ),
    (
        "C",
        1.0,
        [[8.0, 0.0, 0.0], [1.0, 0.0, 0.0], [6.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
    ),
    (
        "D",
        0.686,
        [
            [8.0, 0.0, 0.0],
            [0.435, 0.565, 0.565],
            [6.0, 0.0, 0.0],
            [1.095, 0.095, 0.095],
        ],
    ),
    (
        "E",
        1.0,
        [[2.0, 0.0, 0.0], [4.0, 0.0, 0.0], [1.0, 0.0, 0.0], [4.0, 0.0, 0.0]],
    ),
];

const TABLE2_FS: [Block; 8] = [
    (
        "A",
        0.900,
        [[4.0, 0.0, 0.0], [3.0, 0.0, 0.0], [2.0, 0.0, 0.0], [3.667, 0.667, 0.222]],
    ),
    (
        "B",
        0.463,
        [[6.0, 0.0, 0.0], [-1.5, 21.5, 1.075], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
    ),
    (
        "C",
        1.0,
        [[8.0, 0.0, 0.0], [1.0, 0.0, 0.0], [6.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
    ),
    (
        "D",
        0.930,
        [[6.875, 1.125, 0.141], [1.0, 0.0, 0.0], [6.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
    ),
    (
        "E",
        1.0,
        [[2.0, 0.0, 0.0], [4.0, 0.0, 0.0], [1.0, 0.0, 0.0], [4.0, 0.0, 0.0]],
    ),
    (
        "F",
        0.500,
        [[3.0, 0.0, 0.0], [0.0, 20.0, 1.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
    ),
    (
        "G",
        0.556,
        [[0.0, 0.0, 0.0], [1.125, 8.875, 0.887], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
    ),
    (
        "H",
        0.500,
        [[3.0, 0.0, 0.0], [0.0, 10.0, 1.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
    ),
];

const TABLE2_FB: [Block; 8] = [
    (
        "A",
        0.909,
        [[4.0, 0.0, 0.0], [3.0, 0.0, 0.0], [2.0, 0.0, 0.0], [3.667, 0.667, 0.222]],
    ),
    (
        "B",
        0.526,
        [[6.0, 0.0, 0.0], [20.0, 0.0, 0.0], [1.0, 0.0, 0.0], [19.0, 18.0, 18.0]],
    ),
    (
        "C",
        1.0,
        [[8.0, 0.0, 0.0], [1.0, 0.0, 0.0], [6.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
    ),
    (
        "D",
        0.930,
        [[6.875, 1.125, 0.141], [1.0, 0.0, 0.0], [6.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
    ),
    (
        "E",
        1.0,
        [[2.0, 0.0, 0.0], [4.0, 0.0, 0.0], [1.0, 0.0, 0.0], [4.0, 0.0, 0.0]],
    ),
    (
        "F",
        0.530,
        [
            [3.0, 0.0, 0.0],
            [20.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [16.75, 15.75, 15.75],
        ],
    ),
    (
        "G",
        0.556,
        [[0.0, 0.0, 0.0], [1.125, 8.875, 0.887], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
    ),
    (
        "H",
        0.554,
        [[3.0, 0.0, 0.0], [10.0, 0.0, 0.0], [1.0, 0.0, 0.0], [9.25, 8.25, 8.25]],
    ),
];

const CELL_TOL: f64 = 1e-3;
const GRID: usize = 100;

struct Runner {
    failed: Vec<String>,
}

impl Runner {
    fn check(&mut self, id: &str, what: &str, ok: bool, detail: impl AsRef<str>) {
        println!(
            "[{}] {id} {what}: {}",
            if ok { "PASS" } else { "FAIL" },
            detail.as_ref()
        );
        if !ok {
            self.failed.push(format!("{id} {what}"));
        }
    }
}

/// Largest deviation between a report and a reference block; rates with no
/// defined value compare as 0 against the printed 0.
fn block_error(rep: &EfficiencyReport, block: &Block) -> f64 {
    let mut worst = (rep.score - block.1).abs();
    for (k, want) in block.2.iter().enumerate() {
        let got = [rep.projection[k], rep.diff[k], rep.rate[k].unwrap_or(0.0)];
        for (g, w) in got.iter().zip(want) {
            worst = worst.max((g - w).abs());
        }
    }
    worst
}

fn reproduce(
    r: &mut Runner,
    id: &str,
    what: &str,
    tech: &Technology,
    blocks: &[Block],
    solve: fn(&Technology, &[f64], &[f64]) -> dea_core::Result<EfficiencyReport>,
) {
    let mut worst = 0.0f64;
    let mut errors = Vec::new();
    for block in blocks {
        let (x, y) = dmu(tech, block.0);
        match solve(tech, x, y) {
            Ok(rep) => worst = worst.max(block_error(&rep, block)),
            Err(e) => errors.push(format!("{}: {e}", block.0)),
        }
    }
    r.check(
        id,
        what,
        errors.is_empty() && worst <= CELL_TOL,
        format!("max cell deviation {worst:.2e} (tol {CELL_TOL:e}) {errors:?}"),
    );
}

fn ac1(r: &mut Runner) {
    let tech = table1();
    reproduce(r, "AC1", "sbm-ar scores and cells", &tech, &TABLE1_SBM, sbm_ar);
    let (x, y) = dmu(&tech, "B");
    let rep = sbm_ar(&tech, x, y).unwrap();
    let w = rep.weights.as_ref().unwrap();
    let dual =
        1.0 + w.u.iter().zip(y).map(|(u, y)| u * y).sum::<f64>() - w.v.iter().zip(x).map(|(v, x)| v * x).sum::<f64>();
    let target = -257.0 / 264.0;
    r.check(
        "AC1",
        "B dual optimum",
        (dual - target).abs() <= 1e-7,
        format!("{dual:.12} vs {target:.12} (tol 1e-7)"),
    );
    let want = [1.0 / 12.0, 1.0 / 12.0, 1.0 / 11.0, 9.0 / 88.0];
    let dev =
        w.v.iter()
            .chain(&w.u)
            .zip(want)
            .map(|(g, w)| (g - w).abs())
            .fold(0.0, f64::max);
    r.check(
        "AC1",
        "B dual weights",
        dev <= 1e-6,
        format!("v={:?} u={:?}, max deviation {dev:.2e} (tol 1e-6)", w.v, w.u),
    );
}

fn ac2(r: &mut Runner) {
    let tech = table1();
    reproduce(r, "AC2", "brwz-ar scores and cells", &tech, &TABLE1_BRWZ, brwz_ar);
    let (x, y) = dmu(&tech, "B");
    let profile = SlackProfile {
        lambda: vec![0.0, 0.0, 3.0 / 22.0, 0.0, 2.0 / 11.0],
        alpha: vec![19.0 + 3.0 / 22.0, 0.0],
        beta: vec![0.0, 0.0],
        d_minus: vec![23.0 + 15.0 / 22.0, 0.0],
        d_plus: vec![0.0, 0.0],
    };
    let chk = verify_profile(&tech, x, y, &profile, Model::BrwzAr).unwrap();
    let gap = (chk.objective + 257.0 / 264.0).abs();
    r.check(
        "AC2",
        "reference B solution",
        chk.feasible && gap <= 1e-9,
        format!(
            "feasible={} objective {:.12}, gap {gap:.2e} (tol 1e-9)",
            chk.feasible, chk.objective
        ),
    );
}

fn ac3(r: &mut Runner) {
    let tech = table2();
    reproduce(r, "AC3", "max-sbm-ar scores and cells", &tech, &TABLE2_FS, f_s);
    reproduce(r, "AC3", "max-brwz-ar scores and cells", &tech, &TABLE2_FB, f_b);
    let (x, y) = dmu(&tech, "G");
    let g = f_s(&tech, x, y).unwrap().score;
    let gap = (g - 89.0 / 160.0).abs();
    r.check(
        "AC3",
        "G F_S = 89/160",
        gap <= 1e-9,
        format!("{g:.12}, gap {gap:.2e} (tol 1e-9)"),
    );
}

/// `min w_k` over `{ w >= 0, sum w = 1, w M <= 0 }` by vertex enumeration.
fn oracle_minimum(mat: &dea_core::Matrix, k: usize) -> OracleStatus {
    let dim = mat.rows();
    let mut objective = vec![0.0; dim];
    objective[k] = 1.0;
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    lp.add_row(vec![1.0; dim], Relation::Eq, 1.0);
    for j in 0..mat.cols() {
        lp.add_row((0..dim).map(|i| mat.get(i, j)).collect(), Relation::Le, 0.0);
    }
    enumerate_lp(&lp)
}

fn ac4(r: &mut Runner) {
    let region = reference_region();
    let rep = check_assumptions(&region).unwrap();
    let mut ok = rep.holds();
    let mut cells = Vec::new();
    for (mat, minima, tag) in [
        (&region.p, &rep.input_minima, "v"),
        (&region.q, &rep.output_minima, "u"),
    ] {
        for (k, got) in minima.iter().enumerate() {
            let oracle = oracle_minimum(mat, k);
            let agree =
                matches!((got, oracle), (Some(g), OracleStatus::Optimal(o)) if *g > 0.0 && (g - o).abs() <= 1e-9);
            ok &= agree;
            cells.push(format!("min {tag}{}={got:?} oracle {oracle:?}", k + 1));
        }
    }
    r.check("AC4", "regularity minima positive", ok, cells.join(", "));
}

/// SBM or BRWZ objective at slacks `(dm, dp)`, summing over the support of
/// the point and dividing by the full dimensions.
fn objective(model: Model, x: &[f64], y: &[f64], dm: &[f64], dp: &[f64]) -> f64 {
    let (m, s) = (x.len() as f64, y.len() as f64);
    let input = 1.0 - support(x).iter().map(|&i| dm[i] / x[i]).sum::<f64>() / m;
    let rel: Vec<f64> = support(y).iter().map(|&r| dp[r] / y[r]).collect();
    match model {
        Model::MaxSbmAr => input / (1.0 + rel.iter().sum::<f64>() / s),
        _ => input * (1.0 - rel.iter().map(|t| t / (1.0 + t)).sum::<f64>() / s),
    }
}

fn shift(x: &mut [f64], y: &mut [f64], ray: Ray, t: f64) {
    match ray {
        Ray::Input(i) => x[i] -= t,
        Ray::Output(r) => y[r] += t,
    }
}

/// Best objective over two-move frontier targets: a grid fraction of the
/// maximal step along one coordinate, then the maximal step along another.
fn grid_oracle(tech: &Technology, model: Model, x: &[f64], y: &[f64]) -> f64 {
    let rays: Vec<Ray> = support(x)
        .into_iter()
        .map(Ray::Input)
        .chain(support(y).into_iter().map(Ray::Output))
        .collect();
    let mut best = f64::NEG_INFINITY;
    for &first in &rays {
        let Extent::Finite(full) = max_step(tech, x, y, first).unwrap() else {
            continue;
        };
        for step in 0..=GRID {
            let (mut x1, mut y1) = (x.to_vec(), y.to_vec());
            shift(&mut x1, &mut y1, first, full * step as f64 / GRID as f64);
            for &second in &rays {
                let Extent::Finite(t) = max_step(tech, &x1, &y1, second).unwrap() else {
                    continue;
                };
                let (mut x2, mut y2) = (x1.clone(), y1.clone());
                shift(&mut x2, &mut y2, second, t);
                let dm: Vec<f64> = x.iter().zip(&x2).map(|(a, b)| a - b).collect();
                let dp: Vec<f64> = y2.iter().zip(y).map(|(a, b)| a - b).collect();
                best = best.max(objective(model, x, y, &dm, &dp));
            }
        }
    }
    best
}

fn ac5(r: &mut Runner) {
    let mut exact = true;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_shortfall = 0.0f64;
    for tech in [table1(), table2()] {
        for j in 0..tech.n() {
            let (x, y) = tech.dmu(j);
            let prof = distance_profile(&tech, x, y).unwrap();
            for (model, rep) in [
                (Model::MaxSbmAr, f_s(&tech, x, y).unwrap()),
                (Model::MaxBrwzAr, f_b(&tech, x, y).unwrap()),
            ] {
                let form = closed_form(model, &prof, tech.m(), tech.s()).unwrap();
                exact &= form.score == rep.score;
                let oracle = grid_oracle(&tech, model, x, y);
                worst_excess = worst_excess.max(oracle - rep.score);
                worst_shortfall = worst_shortfall.max(rep.score - oracle);
            }
        }
    }
    r.check(
        "AC5",
        "closed form equals reported score",
        exact,
        "bitwise on all 13 DMUs, both measures",
    );
    r.check(
        "AC5",
        "grid oracle never beats closed form",
        worst_excess <= 1.0 / GRID as f64 && worst_shortfall <= 1e-9,
        format!(
            "max excess {worst_excess:.2e} (tol {:e}), max shortfall {worst_shortfall:.2e} (tol 1e-9)",
            1.0 / GRID as f64
        ),
    );
}

fn status_line(r: &mut Runner, tag: &str, rep: &SuiteReport, p: Property, want: Status) {
    let got = rep.get(p).unwrap();
    let detail = match got.failures.first() {
        Some(w) => format!(
            "{:?}, {}/{} passed; first failure: {}",
            got.status, got.passed, got.tested, w.detail
        ),
        None => format!("{:?}, {}/{} passed", got.status, got.passed, got.tested),
    };
    r.check("AC6", &format!("{tag} {}", got.id), got.status == want, detail);
}

fn ac6_ac7(r: &mut Runner, suites: &[(&str, SuiteReport)]) {
    let all = [Measure::FS, Measure::FB, Measure::FSNatural, Measure::FBNatural];
    for (tag, rep) in suites {
        for m in all {
            status_line(r, tag, rep, Property::Indication(m), Status::Pass);
        }
        for m in all {
            status_line(r, tag, rep, Property::WeakMonotonicity(m), Status::Pass);
        }
        for m in [Measure::FB, Measure::FBNatural] {
            let sm = rep.get(Property::StrongMonotonicity(m)).unwrap();
            r.check(
                "AC6",
                &format!("{tag} {}", sm.id),
                sm.status == Status::Pass && sm.failures.is_empty(),
                format!(
                    "{:?}, {} violations over {} pairs",
                    sm.status,
                    sm.failures.len(),
                    sm.tested
                ),
            );
        }
    }

    let tech = table2();
    let (xf, yf) = dmu(&tech, "F");
    let (xh, yh) = dmu(&tech, "H");
    let (sf, sh) = (f_s(&tech, xf, yf).unwrap().score, f_s(&tech, xh, yh).unwrap().score);
    let (bf, bh) = (f_b(&tech, xf, yf).unwrap().score, f_b(&tech, xh, yh).unwrap().score);
    let dominated = xh.iter().zip(xf).all(|(h, f)| h <= f) && xh != xf && yh == yf;
    r.check(
        "AC6",
        "F/H witness",
        dominated && (sf - sh).abs() <= 1e-9 && bh > bf + 1e-9,
        format!("H dominates F: {dominated}; F_S {sf:.6} = {sh:.6}; F_B {bh:.6} > {bf:.6}"),
    );

    for (tag, rep) in suites {
        let ord = rep.get(Property::Ordering).unwrap();
        r.check(
            "AC7",
            &format!("{tag} ordering and strictness predicate"),
            ord.status == Status::Pass,
            format!("{:?}, {}/{} points", ord.status, ord.passed, ord.tested),
        );
    }
    let mut ok = true;
    let mut n = 0;
    for tech in [table1(), table2()] {
        let (m, s) = (tech.m() as f64, tech.s() as f64);
        for j in 0..tech.n() {
            let (x, y) = tech.dmu(j);
            let prof = distance_profile(&tech, x, y).unwrap();
            let (dm, dp) = (prof.d_minus.finite().unwrap(), prof.d_plus.finite().unwrap());
            let (fs, fb) = (f_s(&tech, x, y).unwrap().score, f_b(&tech, x, y).unwrap().score);
            let predicate = s >= 2.0 && dm / m > dp / (1.0 + dp) / s + 1e-9;
            ok &= fs <= fb + 1e-12 && (fb - fs > 1e-9) == predicate;
            n += 1;
        }
    }
    r.check("AC7", "fixture DMUs", ok, format!("{n} DMUs"));
}

fn ac8(r: &mut Runner) {
    let tech = table2();
    let (x, y) = dmu(&tech, "G");
    let rec = continuity_probe(&tech, x, y, &CONTINUITY_EPSILONS).unwrap();
    let target = 89.0 / 160.0;
    for (name, values, natural) in [("F_S", &rec.f_s, rec.f_s_natural), ("F_B", &rec.f_b, rec.f_b_natural)] {
        let gaps: Vec<f64> = values.iter().map(|v| (v - target).abs()).collect();
        let monotone = gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        let last = *gaps.last().unwrap();
        r.check(
            "AC8",
            &format!("G continuity {name}"),
            monotone && last <= 1e-3 && (natural - target).abs() <= 1e-9,
            format!(
                "gaps {:?}, nonincreasing={monotone}, final {last:.2e} (tol 1e-3)",
                gaps.iter().map(|g| format!("{g:.2e}")).collect::<Vec<_>>()
            ),
        );
    }
}

fn ac9(r: &mut Runner) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut mismatches = Vec::new();
    let mut counts = [0usize; 3];
    for k in 0..500 {
        let lp = random_lp(&mut rng, 6, 6);
        let sol = solve_lp(&lp).unwrap();
        let agree = match (sol.status, enumerate_lp(&lp)) {
            (LpStatus::Optimal, OracleStatus::Optimal(v)) => {
                counts[0] += 1;
                (sol.objective - v).abs() <= 1e-9
            }
            (LpStatus::Infeasible, OracleStatus::Infeasible) => {
                counts[1] += 1;
                true
            }
            (LpStatus::Unbounded, OracleStatus::Unbounded) => {
                counts[2] += 1;
                true
            }
            _ => false,
        };
        if !agree {
            mismatches.push(k);
        }
    }
    r.check(
        "AC9",
        "500 random LPs vs vertex enumeration",
        mismatches.is_empty(),
        format!("optimal/infeasible/unbounded = {counts:?}, mismatches {mismatches:?}"),
    );
}

fn ac10(r: &mut Runner) {
    let tech = table2();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut checked, mut agree) = (0, 0);
    while checked < 100 {
        let (x, y) = tech.dmu(rng.gen_range(0..tech.n()));
        let mut x: Vec<f64> = x.iter().map(|v| v * rng.gen_range(1.0..3.0)).collect();
        let mut y: Vec<f64> = y.iter().map(|v| v * rng.gen_range(0.3..1.0)).collect();
        let k = rng.gen_range(0..4);
        let ray = if k < 2 { Ray::Input(k) } else { Ray::Output(k - 2) };
        let Extent::Finite(t) = max_step(&tech, &x, &y, ray).unwrap() else {
            continue;
        };
        shift(&mut x, &mut y, ray, t);
        let weak = weak_gap(&tech, &x, &y).unwrap().is_zero(FRONTIER_TOL);
        let strong = strong_gap(&tech, &x, &y).unwrap().is_zero(FRONTIER_TOL);
        agree += usize::from(weak == strong);
        checked += 1;
    }
    r.check(
        "AC10",
        "strong and weak frontier coincide",
        agree == checked,
        format!("{agree}/{checked} boundary points"),
    );
}

fn main() {
    let start = Instant::now();
    let mut r = Runner { failed: Vec::new() };
    ac1(&mut r);
    ac2(&mut r);
    ac3(&mut r);
    ac4(&mut r);
    ac5(&mut r);
    let suites = [
        ("table1", run_axiom_suite(&table1(), 0, 200).unwrap()),
        ("table2", run_axiom_suite(&table2(), 0, 200).unwrap()),
    ];
    ac6_ac7(&mut r, &suites);
    ac8(&mut r);
    ac9(&mut r);
    ac10(&mut r);
    println!("acceptance finished in {:.2?}", start.elapsed());
    if r.failed.is_empty() {
        println!("all criteria passed");
    } else {
        println!("{} check(s) failed: {}", r.failed.len(), r.failed.join("; "));
        std::process::exit(1);
    }
}
