//! Property harness for the closest-target measures.
//!
//! Every property is a predicate over a short list of points, so a failure
//! is stored as the points themselves and can be re-evaluated in isolation
//! with [`recheck`]. Populations are drawn from a seeded ChaCha stream.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ar::AssumptionReport;
use crate::closest::{self, continuity_probe, DistanceProfile, CONV_TOL};
use crate::error::{Error, Result};
use crate::frontier::{max_step, strong_gap, Extent, Ray, Technology, FRONTIER_TOL};
use crate::measures::{brwz_ar, sbm_ar};
use crate::report::{EfficiencyReport, Model};

pub const STRICT_MARGIN: f64 = 1e-9;
pub const EQUAL_TOL: f64 = 1e-7;
pub const CONTINUITY_EPSILONS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
const MAX_ATTEMPTS: usize = 1000;

/// The scoring back end under test.
pub trait Scorer {
    fn distances(&self, tech: &Technology, x: &[f64], y: &[f64]) -> Result<DistanceProfile>;
    /// `model` is `MaxSbmAr` or `MaxBrwzAr`.
    fn score(&self, tech: &Technology, model: Model, x: &[f64], y: &[f64]) -> Result<EfficiencyReport>;
}

/// The library's own closed-form implementation.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClosestScorer;

impl Scorer for ClosestScorer {
    fn distances(&self, tech: &Technology, x: &[f64], y: &[f64]) -> Result<DistanceProfile> {
        closest::distance_profile(tech, x, y)
    }

    fn score(&self, tech: &Technology, model: Model, x: &[f64], y: &[f64]) -> Result<EfficiencyReport> {
        match model {
            Model::MaxSbmAr => closest::f_s(tech, x, y),
            Model::MaxBrwzAr => closest::f_b(tech, x, y),
            other => Err(Error::Internal(format!("{other} is not a closest-target model"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Measure {
    FS,
    FB,
    FSNatural,
    FBNatural,
}

impl Measure {
    fn model(self) -> Model {
        match self {
            Measure::FS | Measure::FSNatural => Model::MaxSbmAr,
            Measure::FB | Measure::FBNatural => Model::MaxBrwzAr,
        }
    }

    fn natural(self) -> bool {
        matches!(self, Measure::FSNatural | Measure::FBNatural)
    }

    fn label(self) -> &'static str {
        match self {
            Measure::FS => "F_S",
            Measure::FB => "F_B",
            Measure::FSNatural => "F_S-natural",
            Measure::FBNatural => "F_B-natural",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "axiom", content = "measure")]
pub enum Property {
    /// Score 1 exactly on the strong frontier.
    Indication(Measure),
    /// A dominated point never scores higher.
    WeakMonotonicity(Measure),
    /// A dominated distinct point scores strictly lower.
    StrongMonotonicity(Measure),
    /// `F_S <= F_B`, strict exactly when the distance predicate says so.
    Ordering,
    /// `F_S, F_B in (0, 1]` and `F_B > 1 - 1/s`.
    Range,
    /// Closest-target projections lie on the strong frontier.
    ClosestProjection,
    /// Classic optima with `d- < x` project onto the strong frontier.
    ClassicProjection,
    /// Closest-target scores dominate the classic minima.
    BoundRelation,
    /// Natural scores are limits of scores at positive perturbations.
    Continuity,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::Indication(m) => write!(f, "indication[{}]", m.label()),
            Property::WeakMonotonicity(m) => write!(f, "weak-monotonicity[{}]", m.label()),
            Property::StrongMonotonicity(m) => write!(f, "strong-monotonicity[{}]", m.label()),
            Property::Ordering => f.write_str("ordering[F_S<=F_B]"),
            Property::Range => f.write_str("range"),
            Property::ClosestProjection => f.write_str("closest-projection"),
            Property::ClassicProjection => f.write_str("classic-projection"),
            Property::BoundRelation => f.write_str("bound-relation"),
            Property::Continuity => f.write_str("continuity"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// Not asserted by the theory for this measure; witnesses are informational.
    NotClaimed,
    /// No applicable population.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Point {
    fn new(x: &[f64], y: &[f64]) -> Self {
        Point {
            x: x.to_vec(),
            y: y.to_vec(),
        }
    }

    fn has_zero(&self) -> bool {
        self.x.iter().chain(&self.y).any(|v| *v == 0.0)
    }

    fn is_nonnegative(&self) -> bool {
        self.x.iter().chain(&self.y).all(|v| *v >= 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub points: Vec<Point>,
    pub values: Vec<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: Property,
    pub id: String,
    pub status: Status,
    pub population: String,
    pub tested: usize,
    pub passed: usize,
    pub failures: Vec<Witness>,
    /// For `NotClaimed` properties: points where the unclaimed statement breaks.
    pub counterexamples: Vec<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub samples: usize,
    pub assumptions: AssumptionReport,
    pub properties: Vec<PropertyReport>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.status != Status::Fail)
    }

    pub fn get(&self, property: Property) -> Option<&PropertyReport> {
        self.properties.iter().find(|p| p.property == property)
    }
}

struct Outcome {
    ok: bool,
    values: Vec<f64>,
    detail: String,
}

impl Outcome {
    fn new(ok: bool, values: Vec<f64>, detail: impl Into<String>) -> Self {
        Outcome {
            ok,
            values,
            detail: detail.into(),
        }
    }
}

fn on_strong_frontier(tech: &Technology, p: &Point) -> Result<(bool, f64)> {
    Ok(match strong_gap(tech, &p.x, &p.y)? {
        Extent::Finite(g) => (g <= FRONTIER_TOL, g),
        Extent::Unbounded => (false, f64::INFINITY),
    })
}

fn score(scorer: &dyn Scorer, tech: &Technology, model: Model, p: &Point) -> Result<f64> {
    Ok(scorer.score(tech, model, &p.x, &p.y)?.score)
}

fn evaluate(property: Property, tech: &Technology, scorer: &dyn Scorer, points: &[Point]) -> Result<Outcome> {
    let (m, s) = (tech.m() as f64, tech.s() as f64);
    match property {
        Property::Indication(measure) => {
            let p = &points[0];
            let f = score(scorer, tech, measure.model(), p)?;
            let (frontier, gap) = on_strong_frontier(tech, p)?;
            let unit = (f - 1.0).abs() <= EQUAL_TOL;
            Ok(Outcome::new(
                unit == frontier,
                vec![f, gap],
                format!("score={f} strong_gap={gap}"),
            ))
        }
        Property::WeakMonotonicity(measure) | Property::StrongMonotonicity(measure) => {
            let a = score(scorer, tech, measure.model(), &points[0])?;
            let b = score(scorer, tech, measure.model(), &points[1])?;
            let ok = if matches!(property, Property::WeakMonotonicity(_)) {
                a >= b - EQUAL_TOL
            } else {
                a - b > STRICT_MARGIN
            };
            Ok(Outcome::new(ok, vec![a, b], format!("dominating={a} dominated={b}")))
        }
        Property::Ordering => {
            let p = &points[0];
            let fs = score(scorer, tech, Model::MaxSbmAr, p)?;
            let fb = score(scorer, tech, Model::MaxBrwzAr, p)?;
            let prof = scorer.distances(tech, &p.x, &p.y)?;
            let (Some(dm), Some(dp)) = (prof.d_minus.finite(), prof.d_plus.finite()) else {
                return Ok(Outcome::new(false, vec![fs, fb], "unbounded least distance"));
            };
            let predicate = s >= 2.0 && dm / m - dp / (1.0 + dp) / s > STRICT_MARGIN;
            let strict = fb - fs > STRICT_MARGIN;
            let ok = fs <= fb + EQUAL_TOL && strict == predicate;
            Ok(Outcome::new(
                ok,
                vec![fs, fb, dm, dp],
                format!("F_S={fs} F_B={fb} predicate={predicate} strict={strict}"),
            ))
        }
        Property::Range => {
            let p = &points[0];
            let fs = score(scorer, tech, Model::MaxSbmAr, p)?;
            let fb = score(scorer, tech, Model::MaxBrwzAr, p)?;
            let unit = |v: f64| v > 0.0 && v <= 1.0 + EQUAL_TOL;
            let ok = unit(fs) && unit(fb) && fb > 1.0 - 1.0 / s;
            Ok(Outcome::new(ok, vec![fs, fb], format!("F_S={fs} F_B={fb}")))
        }
        Property::ClosestProjection => {
            let p = &points[0];
            let mut values = Vec::new();
            let mut ok = true;
            for model in [Model::MaxSbmAr, Model::MaxBrwzAr] {
                let rep = scorer.score(tech, model, &p.x, &p.y)?;
                let target = Point::new(rep.projected_x(), rep.projected_y());
                let (frontier, gap) = on_strong_frontier(tech, &target)?;
                ok &= frontier;
                values.push(gap);
            }
            Ok(Outcome::new(
                ok,
                values.clone(),
                format!("strong gaps at projections {values:?}"),
            ))
        }
        Property::ClassicProjection => {
            let p = &points[0];
            let mut values = Vec::new();
            let mut ok = true;
            for rep in [sbm_ar(tech, &p.x, &p.y)?, brwz_ar(tech, &p.x, &p.y)?] {
                if rep.d_minus().iter().zip(&p.x).all(|(d, x)| d < x) {
                    let target = Point::new(rep.projected_x(), rep.projected_y());
                    let (frontier, gap) = on_strong_frontier(tech, &target)?;
                    ok &= frontier;
                    values.push(gap);
                }
            }
            Ok(Outcome::new(
                ok,
                values.clone(),
                format!("strong gaps at projections {values:?}"),
            ))
        }
        Property::BoundRelation => {
            let p = &points[0];
            let fs = score(scorer, tech, Model::MaxSbmAr, p)?;
            let fb = score(scorer, tech, Model::MaxBrwzAr, p)?;
            let sbm = sbm_ar(tech, &p.x, &p.y)?.score;
            let brwz = brwz_ar(tech, &p.x, &p.y)?.score;
            let ok = fs >= sbm - EQUAL_TOL && fb >= brwz - EQUAL_TOL;
            Ok(Outcome::new(
                ok,
                vec![fs, sbm, fb, brwz],
                format!("F_S={fs} SBM={sbm} F_B={fb} BRWZ={brwz}"),
            ))
        }
        Property::Continuity => {
            let p = &points[0];
            let rec = continuity_probe(tech, &p.x, &p.y, &CONTINUITY_EPSILONS)?;
            let mut values = rec.f_s_gaps.clone();
            values.extend(&rec.f_b_gaps);
            Ok(Outcome::new(
                rec.converged(CONV_TOL),
                values,
                format!("F_S gaps {:?}, F_B gaps {:?}", rec.f_s_gaps, rec.f_b_gaps),
            ))
        }
    }
}

fn evaluate_or_fail(property: Property, tech: &Technology, scorer: &dyn Scorer, points: &[Point]) -> Outcome {
    evaluate(property, tech, scorer, points).unwrap_or_else(|e| Outcome::new(false, vec![], format!("error: {e}")))
}

/// Re-evaluates a stored witness; `true` if it still fails.
pub fn recheck(tech: &Technology, scorer: &dyn Scorer, property: Property, witness: &Witness) -> bool {
    !evaluate_or_fail(property, tech, scorer, &witness.points).ok
}

fn run_property(
    property: Property,
    population: &str,
    cases: &[Vec<Point>],
    tech: &Technology,
    scorer: &dyn Scorer,
) -> PropertyReport {
    let mut report = PropertyReport {
        property,
        id: property.to_string(),
        status: Status::Skipped,
        population: population.to_string(),
        tested: cases.len(),
        passed: 0,
        failures: Vec::new(),
        counterexamples: Vec::new(),
    };
    for case in cases {
        let out = evaluate_or_fail(property, tech, scorer, case);
        if out.ok {
            report.passed += 1;
        } else {
            report.failures.push(Witness {
                points: case.clone(),
                values: out.values,
                detail: out.detail,
            });
        }
    }
    if !cases.is_empty() {
        report.status = if report.failures.is_empty() {
            Status::Pass
        } else {
            Status::Fail
        };
    }
    report
}

/// Strong monotonicity evaluated without being claimed: failures become
/// counterexamples and the status is `NotClaimed`.
fn unclaimed(mut report: PropertyReport) -> PropertyReport {
    report.status = Status::NotClaimed;
    report.counterexamples = std::mem::take(&mut report.failures);
    report
}

fn exp_like(rng: &mut ChaCha8Rng, mean: f64) -> f64 {
    -mean * (1.0 - rng.gen::<f64>()).ln()
}

struct Sampler<'a> {
    tech: &'a Technology,
    rng: ChaCha8Rng,
}

impl Sampler<'_> {
    /// A random point of `T` with strictly positive coordinates: a nonnegative
    /// combination of observed DMUs, then possibly degraded.
    fn positive(&mut self) -> Option<Point> {
        let (n, tech) = (self.tech.n(), self.tech);
        for _ in 0..MAX_ATTEMPTS {
            let lambda: Vec<f64> = (0..n)
                .map(|_| {
                    if self.rng.gen_bool(0.6) {
                        exp_like(&mut self.rng, 1.0)
                    } else {
                        0.0
                    }
                })
                .collect();
            let data = tech.data();
            let mut x = vec![0.0; tech.m()];
            let mut y = vec![0.0; tech.s()];
            for j in 0..n {
                for (xi, v) in x.iter_mut().zip(&data.inputs[j]) {
                    *xi += lambda[j] * v;
                }
                for (yr, v) in y.iter_mut().zip(&data.outputs[j]) {
                    *yr += lambda[j] * v;
                }
            }
            if self.rng.gen_bool(0.8) {
                for xi in x.iter_mut() {
                    *xi *= 1.0 + exp_like(&mut self.rng, 0.3);
                }
                for yr in y.iter_mut() {
                    *yr *= self.rng.gen_range(0.5..1.0);
                }
            }
            if x.iter().chain(&y).all(|v| *v > 1e-6) {
                return Some(Point { x, y });
            }
        }
        None
    }

    /// A point of `T` with at least one zero coordinate and nonzero input and output vectors.
    fn with_zero(&mut self) -> Option<Point> {
        let (m, s) = (self.tech.m(), self.tech.s());
        for _ in 0..MAX_ATTEMPTS {
            let mut p = self.positive()?;
            let k = self.rng.gen_range(0..m + s);
            if k < m {
                if m < 2 {
                    continue;
                }
                p.x[k] = 0.0;
            } else {
                if s < 2 {
                    continue;
                }
                p.y[k - m] = 0.0;
            }
            if self.tech.membership(&p.x, &p.y).unwrap_or(false) {
                return Some(p);
            }
        }
        None
    }

    /// Moves `p` along a random supported coordinate to the frontier.
    fn boundary_from(&mut self, p: &Point) -> Option<Point> {
        let (m, s) = (self.tech.m(), self.tech.s());
        for _ in 0..MAX_ATTEMPTS {
            let k = self.rng.gen_range(0..m + s);
            let ray = if k < m { Ray::Input(k) } else { Ray::Output(k - m) };
            let coord = if k < m { p.x[k] } else { p.y[k - m] };
            if coord <= 0.0 {
                continue;
            }
            let Ok(Extent::Finite(t)) = max_step(self.tech, &p.x, &p.y, ray) else {
                continue;
            };
            let mut q = p.clone();
            match ray {
                Ray::Input(i) => q.x[i] -= t,
                Ray::Output(r) => q.y[r] += t,
            }
            for v in q.x.iter_mut().chain(q.y.iter_mut()) {
                if v.abs() < 1e-12 {
                    *v = 0.0;
                }
            }
            return Some(q);
        }
        None
    }

    /// `(x + a, y - b)` with `a, b >= 0` not both zero and `y - b` keeping the support pattern.
    fn dominated(&mut self, p: &Point) -> Point {
        let mut q = p.clone();
        let mut moved = false;
        for xi in q.x.iter_mut() {
            if self.rng.gen_bool(0.7) {
                *xi += exp_like(&mut self.rng, 0.25 * xi.max(1.0));
                moved = true;
            }
        }
        for yr in q.y.iter_mut() {
            if *yr > 0.0 && self.rng.gen_bool(0.7) {
                *yr *= 1.0 - self.rng.gen_range(0.05..0.5);
                moved = true;
            }
        }
        if !moved {
            let i = self.rng.gen_range(0..q.x.len());
            q.x[i] += exp_like(&mut self.rng, 0.25 * q.x[i].max(1.0));
        }
        q
    }
}

/// Runs every property over the observed DMUs and `samples` seeded random
/// points and pairs. Fails with `Error::Assumptions` when the assurance
/// region violates the regularity assumptions.
pub fn run_axiom_suite(tech: &Technology, seed: u64, samples: usize) -> Result<SuiteReport> {
    run_axiom_suite_with(tech, &ClosestScorer, seed, samples)
}

pub fn run_axiom_suite_with(tech: &Technology, scorer: &dyn Scorer, seed: u64, samples: usize) -> Result<SuiteReport> {
    let assumptions = tech.assumptions().clone();
    if !assumptions.holds() {
        return Err(Error::Assumptions(format!(
            "property suite needs the regularity assumptions (vcon={}, ucon={})",
            assumptions.vcon, assumptions.ucon
        )));
    }
    let mut sampler = Sampler {
        tech,
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let dmus: Vec<Point> = (0..tech.n())
        .map(|j| {
            let (x, y) = tech.dmu(j);
            Point::new(x, y)
        })
        .collect();
    let positive: Vec<Point> = (0..samples).filter_map(|_| sampler.positive()).collect();
    let zeros: Vec<Point> = (0..samples.div_ceil(4)).filter_map(|_| sampler.with_zero()).collect();
    let boundary: Vec<Point> = positive
        .iter()
        .chain(&zeros)
        .take(samples.div_ceil(2))
        .cloned()
        .collect::<Vec<_>>()
        .iter()
        .filter_map(|p| sampler.boundary_from(p))
        .filter(|q| q.is_nonnegative() && q.x.iter().any(|v| *v > 0.0) && q.y.iter().any(|v| *v > 0.0))
        .collect();
    let pairs: Vec<Vec<Point>> = positive
        .iter()
        .take(samples)
        .cloned()
        .collect::<Vec<_>>()
        .into_iter()
        .map(|p| {
            let q = sampler.dominated(&p);
            vec![p, q]
        })
        .collect();
    let zero_pairs: Vec<Vec<Point>> = zeros
        .clone()
        .into_iter()
        .map(|p| {
            let q = sampler.dominated(&p);
            vec![p, q]
        })
        .collect();
    let dmu_pairs: Vec<Vec<Point>> = dmus
        .iter()
        .flat_map(|a| dmus.iter().map(move |b| (a, b)))
        .filter(|(a, b)| a != b && weakly_dominates(a, b))
        .map(|(a, b)| vec![a.clone(), b.clone()])
        .collect();

    let everything: Vec<Point> = dmus
        .iter()
        .chain(&positive)
        .chain(&zeros)
        .chain(&boundary)
        .cloned()
        .collect();
    let (pos_points, zero_points): (Vec<Point>, Vec<Point>) = everything.iter().cloned().partition(|p| !p.has_zero());
    let singles = |pts: &[Point]| -> Vec<Vec<Point>> { pts.iter().map(|p| vec![p.clone()]).collect() };
    let split_pairs = |natural: bool| -> Vec<Vec<Point>> {
        dmu_pairs
            .iter()
            .chain(&pairs)
            .chain(&zero_pairs)
            .filter(|c| c.iter().any(Point::has_zero) == natural)
            .cloned()
            .collect()
    };
    let pos_pairs = split_pairs(false);
    let nat_pairs = split_pairs(true);
    let pos_dmus: Vec<Point> = dmus.iter().filter(|p| !p.has_zero()).cloned().collect();
    let zero_dmus: Vec<Point> = dmus.iter().filter(|p| p.has_zero()).cloned().collect();
    let inefficient: Vec<Point> = everything
        .iter()
        .filter(|p| on_strong_frontier(tech, p).map(|(f, _)| !f).unwrap_or(true))
        .cloned()
        .collect();

    let point_pop = format!(
        "{} DMUs, {} positive samples, {} zero-data samples, {} frontier points",
        dmus.len(),
        positive.len(),
        zeros.len(),
        boundary.len()
    );
    let pair_pop = |c: &[Vec<Point>]| format!("{} dominated pairs (observed and sampled)", c.len());

    let mut properties = Vec::new();
    for measure in [Measure::FS, Measure::FB, Measure::FSNatural, Measure::FBNatural] {
        let (pts, prs) = if measure.natural() {
            (&zero_points, &nat_pairs)
        } else {
            (&pos_points, &pos_pairs)
        };
        properties.push(run_property(
            Property::Indication(measure),
            &point_pop,
            &singles(pts),
            tech,
            scorer,
        ));
        properties.push(run_property(
            Property::WeakMonotonicity(measure),
            &pair_pop(prs),
            prs,
            tech,
            scorer,
        ));
        let sm = run_property(Property::StrongMonotonicity(measure), &pair_pop(prs), prs, tech, scorer);
        let claimed = matches!(measure.model(), Model::MaxBrwzAr) && tech.m() <= tech.s();
        properties.push(if claimed { sm } else { unclaimed(sm) });
    }
    let all = singles(&everything);
    properties.push(run_property(Property::Ordering, &point_pop, &all, tech, scorer));
    properties.push(run_property(Property::Range, &point_pop, &all, tech, scorer));
    properties.push(run_property(
        Property::ClosestProjection,
        &format!("{} inefficient points", inefficient.len()),
        &singles(&inefficient),
        tech,
        scorer,
    ));
    let dmu_pop = format!("{} strictly positive DMUs", pos_dmus.len());
    properties.push(run_property(
        Property::ClassicProjection,
        &dmu_pop,
        &singles(&pos_dmus),
        tech,
        scorer,
    ));
    properties.push(run_property(
        Property::BoundRelation,
        &dmu_pop,
        &singles(&pos_dmus),
        tech,
        scorer,
    ));
    properties.push(run_property(
        Property::Continuity,
        &format!("{} DMUs with zero data", zero_dmus.len()),
        &singles(&zero_dmus),
        tech,
        scorer,
    ));
    Ok(SuiteReport {
        seed,
        samples,
        assumptions,
        properties,
    })
}

/// `(a.x, -a.y) <= (b.x, -b.y)` componentwise.
fn weakly_dominates(a: &Point, b: &Point) -> bool {
    a.x.iter().zip(&b.x).all(|(p, q)| p <= q) && a.y.iter().zip(&b.y).all(|(p, q)| p >= q)
}
