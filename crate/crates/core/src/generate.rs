//! Seeded random problem instances with hidden ground truth.
//!
//! Interval instances are built around hidden point values, so every hidden
//! point lies in its interval. Relation instances start from a hidden total
//! preorder per criterion and forget random pairs of alternatives. The
//! hidden truth is itself a problem (point or relation) over the same
//! alternatives and criteria.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::interval::{DominanceMode, Interval};
use crate::problem::{labelled, Matrix, Problem, Structure};
use crate::relation::PreferenceRelation;
use crate::session::{RefinementEvent, Session};

/// Largest hidden criterion value; small so ties are common.
const VALUE_RANGE: i32 = 9;
/// Largest distance from a hidden point to either interval bound.
const SPREAD: i32 = 3;
/// Probability that an observed pair of alternatives is forgotten.
const FORGET: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Point,
    Interval,
    Relation,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Point => "point",
            Variant::Interval => "interval",
            Variant::Relation => "relation",
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "point" => Ok(Variant::Point),
            "interval" => Ok(Variant::Interval),
            "relation" => Ok(Variant::Relation),
            other => Err(format!("unknown variant `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub problem: Problem,
    /// Point problem for interval instances, connected relation problem for
    /// relation instances, absent for point instances.
    pub hidden: Option<Problem>,
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for the `index`-th instance of a batch.
pub fn instance_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index)
}

pub fn random_points<R: Rng>(rng: &mut R, n: usize, m: usize) -> Problem {
    let k = Matrix::from_fn(n, m, |_, _| rng.gen_range(0..=VALUE_RANGE) as f64);
    labelled(n, m, Structure::Point(k)).expect("generated dimensions are consistent")
}

/// Intervals `[p - a; p + b]` around hidden points `p`, with integer
/// `a, b` in `0..=3` (zero-width intervals included).
pub fn random_intervals<R: Rng>(rng: &mut R, n: usize, m: usize) -> Instance {
    let hidden = random_points(rng, n, m);
    let k = hidden.points().expect("point problem");
    let matrix = Matrix::from_fn(n, m, |i, j| {
        let p = *k.get(i, j);
        let below = rng.gen_range(0..=SPREAD) as f64;
        let above = rng.gen_range(0..=SPREAD) as f64;
        Interval::new(p - below, p + above).expect("finite ordered bounds")
    });
    let problem = labelled(
        n,
        m,
        Structure::Interval {
            matrix,
            mode: DominanceMode::Strict,
        },
    )
    .expect("generated dimensions are consistent");
    Instance {
        problem,
        hidden: Some(hidden),
    }
}

/// Random total preorder: `x >= y` iff `score(x) >= score(y)`.
pub fn random_total_preorder<R: Rng>(rng: &mut R, n: usize) -> PreferenceRelation {
    let levels = n.max(1) as i32;
    let score: Vec<i32> = (0..n).map(|_| rng.gen_range(0..levels)).collect();
    PreferenceRelation::from_pairs(
        n,
        (0..n)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .filter(|&(x, y)| score[x] >= score[y]),
    )
    .transitive_closure()
}

/// Forgets each unordered pair of `truth` with probability `forget`, then
/// closes. Both directions go together, so the result never turns a
/// hidden indifference into a strict preference.
pub fn forget_pairs<R: Rng>(rng: &mut R, truth: &PreferenceRelation, forget: f64) -> PreferenceRelation {
    let n = truth.size();
    let mut kept = PreferenceRelation::empty(n);
    for x in 0..n {
        for y in x + 1..n {
            if rng.gen_bool(forget) {
                continue;
            }
            if truth.contains(x, y) {
                kept.insert(x, y);
            }
            if truth.contains(y, x) {
                kept.insert(y, x);
            }
        }
    }
    kept.transitive_closure()
}

pub fn random_relations<R: Rng>(rng: &mut R, n: usize, m: usize) -> Instance {
    let truth: Vec<PreferenceRelation> = (0..m).map(|_| random_total_preorder(rng, n)).collect();
    let observed: Vec<PreferenceRelation> = truth.iter().map(|t| forget_pairs(rng, t, FORGET)).collect();
    Instance {
        problem: labelled(n, m, Structure::Relation(observed)).expect("subset of a preorder is consistent"),
        hidden: Some(labelled(n, m, Structure::Relation(truth)).expect("total preorders are consistent")),
    }
}

pub fn generate<R: Rng>(rng: &mut R, n: usize, m: usize, variant: Variant) -> Instance {
    match variant {
        Variant::Point => Instance {
            problem: random_points(rng, n, m),
            hidden: None,
        },
        Variant::Interval => random_intervals(rng, n, m),
        Variant::Relation => random_relations(rng, n, m),
    }
}

/// A random contraction of one working interval that keeps the hidden point
/// inside. Bounds move towards the point in quarter steps.
pub fn random_tighten<R: Rng>(rng: &mut R, session: &Session, hidden: &Matrix<f64>) -> RefinementEvent {
    let current = session.intervals();
    let i = rng.gen_range(0..current.rows());
    let j = rng.gen_range(0..current.cols());
    let d = current.get(i, j);
    let p = *hidden.get(i, j);
    let t_lo = rng.gen_range(0..=4) as f64 / 4.0;
    let t_hi = rng.gen_range(0..=4) as f64 / 4.0;
    let lower = d.lower() + t_lo * (p - d.lower());
    let upper = d.upper() - t_hi * (d.upper() - p);
    let base = session.base();
    RefinementEvent::tighten(
        session.last_sequence() + 1,
        base.alt_label(i),
        base.criterion_label(j),
        Interval::new(lower.min(p), upper.max(p)).expect("bounds bracket the hidden point"),
    )
}

/// Reveals the hidden answer for one randomly chosen pair that is still
/// incomparable in the session, if any remain.
pub fn random_reveal<R: Rng>(rng: &mut R, session: &Session, hidden: &[PreferenceRelation]) -> Option<RefinementEvent> {
    let rels = session.working_relations()?;
    let mut open = Vec::new();
    for (j, r) in rels.iter().enumerate() {
        for x in 0..r.size() {
            for y in x + 1..r.size() {
                if r.incomparable(x, y) {
                    open.push((j, x, y));
                }
            }
        }
    }
    let &(j, x, y) = open.choose(rng)?;
    let base = session.base();
    let (c, a, b) = (base.criterion_label(j), base.alt_label(x), base.alt_label(y));
    let seq = session.last_sequence() + 1;
    let truth = &hidden[j];
    Some(if truth.indifferent(x, y) {
        RefinementEvent::indifferent(seq, c, a, b)
    } else if truth.contains(x, y) {
        RefinementEvent::compare(seq, c, a, b)
    } else {
        RefinementEvent::compare(seq, c, b, a)
    })
}

/// An event the session must reject: widening an interval on interval
/// bases, reversing a strict preference on relation bases. `None` when the
/// session offers nothing to contradict.
pub fn invalid_event<R: Rng>(rng: &mut R, session: &Session) -> Option<RefinementEvent> {
    let base = session.base();
    let seq = session.last_sequence() + 1;
    match session.working_relations() {
        None => {
            let current = session.intervals();
            let i = rng.gen_range(0..current.rows());
            let j = rng.gen_range(0..current.cols());
            let d = current.get(i, j);
            let wider = Interval::new(d.lower() - 1.0, d.upper()).expect("finite");
            Some(RefinementEvent::tighten(seq, base.alt_label(i), base.criterion_label(j), wider))
        }
        Some(rels) => {
            let strict: Vec<(usize, usize, usize)> = rels
                .iter()
                .enumerate()
                .flat_map(|(j, r)| r.strict_part().pairs().map(move |(x, y)| (j, x, y)).collect::<Vec<_>>())
                .collect();
            let &(j, x, y) = strict.choose(rng)?;
            Some(RefinementEvent::compare(
                seq,
                base.criterion_label(j),
                base.alt_label(y),
                base.alt_label(x),
            ))
        }
    }
}
