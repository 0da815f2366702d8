//! Property suites that re-certify the engine on generated instances.
//!
//! Each suite draws `instances` seeded problems and reports every
//! violation it finds. The brute-force oracles here are written straight
//! from the definitions and share no code with the engine's Pareto scan.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::generate::{self, instance_seed, rng_from_seed};
use crate::interval::{DominanceMode, Interval};
use crate::pareto::{interval_pareto, point_pareto, vpr_pareto};
use crate::problem::{criterion_to_relation, point_to_relation_problem, Problem, Structure};
use crate::relation::PreferenceRelation;
use crate::session::Session;
use crate::utility::{incomparable_set, lower_utility, upper_utility, vpr_to_interval_structure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Refinement chains stay between the hidden-truth set and the initial set.
    Nesting,
    /// Accepted events never widen or add; rejected events change nothing.
    Refinement,
    /// Engines agree with brute-force definitions.
    Oracle,
    /// Utility bounds are ordered and tight exactly without incomparability.
    /// Spelled `eq14` on the command line.
    UtilityBounds,
    /// Point problems and their columnwise relations give the same set.
    /// Spelled `eq6` on the command line.
    Columnwise,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Nesting => "nesting",
            Suite::Refinement => "refinement",
            Suite::Oracle => "oracle",
            Suite::UtilityBounds => "eq14",
            Suite::Columnwise => "eq6",
        })
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nesting" => Ok(Suite::Nesting),
            "refinement" => Ok(Suite::Refinement),
            "oracle" => Ok(Suite::Oracle),
            "eq14" => Ok(Suite::UtilityBounds),
            "eq6" => Ok(Suite::Columnwise),
            other => Err(format!("unknown suite `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub instance: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub instances: usize,
    pub seed: u64,
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn run_suite(suite: Suite, instances: usize, seed: u64) -> Report {
    let mut violations = Vec::new();
    for k in 0..instances {
        let mut rng = rng_from_seed(instance_seed(seed, k as u64));
        let found = match suite {
            Suite::Oracle => oracle_instance(&mut rng),
            Suite::Columnwise => columnwise_instance(&mut rng),
            Suite::UtilityBounds => utility_instance(&mut rng),
            Suite::Nesting => {
                let mut v = interval_harness(&mut rng, Checks::NESTING);
                v.extend(relation_harness(&mut rng, Checks::NESTING));
                v
            }
            Suite::Refinement => {
                let mut v = interval_harness(&mut rng, Checks::REFINEMENT);
                v.extend(relation_harness(&mut rng, Checks::REFINEMENT));
                v
            }
        };
        violations.extend(found.into_iter().map(|message| Violation { instance: k, message }));
    }
    Report {
        suite: suite.to_string(),
        instances,
        seed,
        violations,
    }
}

// ---------------------------------------------------------------------------
// Definitional oracles

fn oracle_point_pareto(k: &[Vec<f64>]) -> BTreeSet<usize> {
    let n = k.len();
    let mut out = BTreeSet::new();
    'x: for x in 0..n {
        for y in 0..n {
            if y == x {
                continue;
            }
            let mut ge_all = true;
            let mut gt_some = false;
            for (a, b) in k[y].iter().zip(&k[x]) {
                if a < b {
                    ge_all = false;
                }
                if a > b {
                    gt_some = true;
                }
            }
            if ge_all && gt_some {
                continue 'x;
            }
        }
        out.insert(x);
    }
    out
}

fn oracle_interval_pareto(d: &[Vec<(f64, f64)>], weak: bool) -> BTreeSet<usize> {
    let n = d.len();
    let beats = |y: usize, x: usize, j: usize| {
        if weak {
            d[y][j].0 >= d[x][j].1
        } else {
            d[y][j].0 > d[x][j].1
        }
    };
    (0..n)
        .filter(|&x| !(0..n).any(|y| y != x && (0..d[x].len()).all(|j| beats(y, x, j))))
        .collect()
}

/// `pairs[j]` holds the ordered pairs of criterion `j`.
fn oracle_vpr_pareto(n: usize, pairs: &[BTreeSet<(usize, usize)>]) -> BTreeSet<usize> {
    let in_all = |a: usize, b: usize| pairs.iter().all(|p| p.contains(&(a, b)));
    (0..n)
        .filter(|&x| !(0..n).any(|y| y != x && in_all(y, x) && !in_all(x, y)))
        .collect()
}

fn point_rows(p: &Problem) -> Vec<Vec<f64>> {
    let k = p.points().expect("point problem");
    (0..p.n()).map(|i| k.row(i).to_vec()).collect()
}

fn interval_rows(p: &Problem) -> (Vec<Vec<(f64, f64)>>, bool) {
    let (d, mode) = p.intervals().expect("interval problem");
    let rows = (0..p.n())
        .map(|i| d.row(i).iter().map(|iv| (iv.lower(), iv.upper())).collect())
        .collect();
    (rows, mode == DominanceMode::Weak)
}

fn relation_pairs(p: &Problem) -> Vec<BTreeSet<(usize, usize)>> {
    p.relations()
        .expect("relation problem")
        .iter()
        .map(|r| r.pairs().collect())
        .collect()
}

/// Oracle Pareto set of any problem.
pub fn oracle_pareto(p: &Problem) -> BTreeSet<usize> {
    match p.structure() {
        Structure::Point(_) => oracle_point_pareto(&point_rows(p)),
        Structure::Interval { .. } => {
            let (rows, weak) = interval_rows(p);
            oracle_interval_pareto(&rows, weak)
        }
        Structure::Relation(_) => oracle_vpr_pareto(p.n(), &relation_pairs(p)),
    }
}

// ---------------------------------------------------------------------------
// Single-shot suites

fn oracle_instance<R: Rng>(rng: &mut R) -> Vec<String> {
    let mut out = Vec::new();
    let (n, m) = (rng.gen_range(1..=7), rng.gen_range(1..=3));
    let point = generate::random_points(rng, n, m);
    let engine = point_pareto(&point).expect("point");
    if engine.pareto_set() != &oracle_pareto(&point) {
        out.push(format!("point_pareto differs from oracle on {}", point.to_json_pretty()));
    }

    let (n, m) = (rng.gen_range(1..=7), rng.gen_range(1..=3));
    let mut interval = generate::random_intervals(rng, n, m).problem;
    if rng.gen_bool(0.25) {
        interval = interval.with_mode(DominanceMode::Weak);
    }
    let engine = interval_pareto(&interval).expect("interval");
    if engine.pareto_set() != &oracle_pareto(&interval) {
        out.push(format!("interval_pareto differs from oracle on {}", interval.to_json_pretty()));
    }

    let (n, m) = (rng.gen_range(1..=7), rng.gen_range(1..=3));
    let relation = generate::random_relations(rng, n, m).problem;
    let engine = vpr_pareto(&relation).expect("relation");
    if engine.pareto_set() != &oracle_pareto(&relation) {
        out.push(format!("vpr_pareto differs from oracle on {}", relation.to_json_pretty()));
    }

    for (name, p) in [("point", &point), ("relation", &relation)] {
        if oracle_pareto(p).is_empty() {
            out.push(format!("empty {name} Pareto set"));
        }
    }
    if interval.intervals().expect("interval").1 == DominanceMode::Strict && oracle_pareto(&interval).is_empty() {
        out.push("empty interval Pareto set".to_owned());
    }
    out
}

fn columnwise_instance<R: Rng>(rng: &mut R) -> Vec<String> {
    let (n, m) = (rng.gen_range(1..=8), rng.gen_range(1..=4));
    let point = generate::random_points(rng, n, m);
    let rel = point_to_relation_problem(&point).expect("point problem");
    let mut out = Vec::new();
    for j in 0..m {
        let r = criterion_to_relation(&point, j).expect("point problem");
        if !r.is_connected() || !r.is_transitive() {
            out.push(format!("criterion {j} relation is not a connected preorder"));
        }
    }
    let via_relations = vpr_pareto(&rel).expect("relation");
    let direct = point_pareto(&point).expect("point");
    if via_relations.pareto_set() != direct.pareto_set() {
        out.push(format!(
            "relation route {:?} != point route {:?}",
            via_relations.pareto_set(),
            direct.pareto_set()
        ));
    }
    out
}

fn utility_instance<R: Rng>(rng: &mut R) -> Vec<String> {
    let n = rng.gen_range(1..=8);
    let rel = if rng.gen_bool(0.2) {
        generate::random_total_preorder(rng, n)
    } else {
        let truth = generate::random_total_preorder(rng, n);
        let forget = rng.gen_range(0.0..=1.0);
        generate::forget_pairs(rng, &truth, forget)
    };
    let mut out = Vec::new();
    for x in 0..n {
        let lo = lower_utility(&rel, x).expect("in range");
        let hi = upper_utility(&rel, x).expect("in range");
        let none_incomparable = incomparable_set(&rel, x).expect("in range").is_empty();
        if hi < lo {
            out.push(format!("upper {hi} < lower {lo} for alternative {x}"));
        }
        if (hi == lo) != none_incomparable {
            out.push(format!("degenerate utility for {x} disagrees with incomparable set"));
        }
    }
    if rel.is_connected() {
        let p = crate::problem::labelled(n, 1, Structure::Relation(vec![rel])).expect("consistent");
        let conv = vpr_to_interval_structure(&p).expect("relation");
        let (d, _) = conv.intervals().expect("interval");
        if !d.iter().all(Interval::is_degenerate) {
            out.push("connected relation produced a non-degenerate utility interval".to_owned());
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Dialogue harnesses

#[derive(Debug, Clone, Copy)]
struct Checks {
    nesting: bool,
    refinement: bool,
}

impl Checks {
    const NESTING: Checks = Checks {
        nesting: true,
        refinement: false,
    };
    const REFINEMENT: Checks = Checks {
        nesting: false,
        refinement: true,
    };
}

fn check_step(
    checks: Checks,
    before: &Session,
    after: &Session,
    baseline: &BTreeSet<usize>,
    initial: &BTreeSet<usize>,
    out: &mut Vec<String>,
) {
    let current = after.pareto_set();
    let seq = after.last_sequence();
    if checks.nesting {
        if !baseline.is_subset(current) {
            out.push(format!("step {seq}: baseline {baseline:?} not within {current:?}"));
        }
        if !current.is_subset(initial) {
            out.push(format!("step {seq}: {current:?} escapes initial {initial:?}"));
        }
        if current.is_empty() {
            out.push(format!("step {seq}: empty Pareto set"));
        }
        if oracle_pareto(after.working()) != *current {
            out.push(format!("step {seq}: session Pareto set differs from oracle"));
        }
    }
    if checks.refinement {
        if !current.is_subset(before.pareto_set()) {
            out.push(format!("step {seq}: Pareto set gained a member"));
        }
        let (old, new) = (before.intervals(), after.intervals());
        for i in 0..old.rows() {
            for j in 0..old.cols() {
                if !old.get(i, j).includes(new.get(i, j)) {
                    out.push(format!("step {seq}: interval ({i}, {j}) widened"));
                }
            }
        }
    }
}

fn check_rejection<R: Rng>(rng: &mut R, session: &mut Session, out: &mut Vec<String>) {
    let Some(bad) = generate::invalid_event(rng, session) else {
        return;
    };
    let snapshot = session.clone();
    let json = serde_json::to_string(&session.to_file()).expect("serializable");
    if session.apply_event(bad).is_ok() {
        out.push(format!("invalid event accepted after step {}", snapshot.last_sequence()));
    }
    if *session != snapshot || serde_json::to_string(&session.to_file()).expect("serializable") != json {
        out.push("rejected event modified the session".to_owned());
        *session = snapshot;
    }
}

fn interval_harness<R: Rng>(rng: &mut R, checks: Checks) -> Vec<String> {
    let (n, m) = (rng.gen_range(1..=8), rng.gen_range(1..=3));
    let inst = generate::random_intervals(rng, n, m);
    let hidden = inst.hidden.expect("interval instances carry hidden points");
    let baseline = oracle_pareto(&hidden);
    let labels: Vec<String> = baseline.iter().map(|&i| hidden.alt_label(i).to_owned()).collect();
    let mut session = Session::create("harness", inst.problem, Some(&labels)).expect("interval problem");
    let initial = session.pareto_set().clone();
    let k = hidden.points().expect("point problem");
    let mut out = Vec::new();
    check_step(checks, &session, &session, &baseline, &initial, &mut out);
    for _ in 0..rng.gen_range(5..=20) {
        let before = session.clone();
        let event = generate::random_tighten(rng, &session, k);
        if let Err(e) = session.apply_event(event) {
            out.push(format!("consistent contraction rejected: {e}"));
            continue;
        }
        check_step(checks, &before, &session, &baseline, &initial, &mut out);
        if checks.refinement {
            check_rejection(rng, &mut session, &mut out);
        }
    }
    if checks.nesting && !session.pareto_history().nesting_ok {
        out.push("history certificate failed".to_owned());
    }
    out
}

fn relation_harness<R: Rng>(rng: &mut R, checks: Checks) -> Vec<String> {
    let (n, m) = (rng.gen_range(1..=8), rng.gen_range(1..=3));
    let inst = generate::random_relations(rng, n, m);
    let hidden = inst.hidden.expect("relation instances carry hidden truth");
    let truth: Vec<PreferenceRelation> = hidden.relations().expect("relation problem").to_vec();
    let baseline = oracle_pareto(&hidden);
    let labels: Vec<String> = baseline.iter().map(|&i| hidden.alt_label(i).to_owned()).collect();
    let mut session = Session::create("harness", inst.problem, Some(&labels)).expect("relation problem");
    let initial = session.pareto_set().clone();
    let mut out = Vec::new();
    check_step(checks, &session, &session, &baseline, &initial, &mut out);
    for _ in 0..rng.gen_range(5..=20) {
        let before = session.clone();
        let Some(event) = generate::random_reveal(rng, &session, &truth) else {
            break;
        };
        if let Err(e) = session.apply_event(event) {
            out.push(format!("true comparison rejected: {e}"));
            continue;
        }
        check_step(checks, &before, &session, &baseline, &initial, &mut out);
        if checks.refinement {
            check_rejection(rng, &mut session, &mut out);
        }
    }
    if checks.nesting && !session.pareto_history().nesting_ok {
        out.push("history certificate failed".to_owned());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes_small_batches() {
        for suite in [Suite::Oracle, Suite::Columnwise, Suite::UtilityBounds, Suite::Nesting, Suite::Refinement] {
            let report = run_suite(suite, 60, 11);
            assert!(report.passed(), "{suite}: {:?}", report.violations.first());
            assert_eq!(report.instances, 60);
        }
    }

    #[test]
    fn oracle_matches_known_sets() {
        let k = vec![vec![3.0, 1.0], vec![1.0, 3.0], vec![2.0, 2.0]];
        assert_eq!(oracle_point_pareto(&k), BTreeSet::from([0, 1, 2]));
        let d = vec![
            vec![(4.0, 6.0), (4.0, 6.0)],
            vec![(1.0, 2.0), (1.0, 2.0)],
            vec![(0.0, 3.0), (7.0, 9.0)],
        ];
        assert_eq!(oracle_interval_pareto(&d, false), BTreeSet::from([0, 2]));
    }

    #[test]
    fn suite_names_round_trip() {
        for s in ["nesting", "refinement", "oracle", "eq14", "eq6"] {
            assert_eq!(s.parse::<Suite>().unwrap().to_string(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }
}
