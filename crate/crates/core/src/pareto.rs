//! Pareto domination for the three information structures and extraction
//! of the non-dominated set.
//!
//! All three routes share one pairwise scan: build the strict domination
//! relation, then keep every alternative that nothing dominates. For each
//! eliminated alternative one dominator is recorded together with
//! per-criterion margins, so callers can explain the elimination.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{Problem, Structure};
use crate::utility::superiority_degree_index;

/// Strict domination pairs `(dominator, dominated)` over `n` alternatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominationRelation {
    n: usize,
    adj: Vec<bool>,
}

impl DominationRelation {
    pub(crate) fn build(n: usize, dominates: impl Fn(usize, usize) -> bool) -> Self {
        let mut adj = vec![false; n * n];
        for y in 0..n {
            for x in 0..n {
                if x != y && dominates(y, x) {
                    adj[y * n + x] = true;
                }
            }
        }
        DominationRelation { n, adj }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn dominates(&self, y: usize, x: usize) -> bool {
        self.adj[y * self.n + x]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        self.adj
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(k, _)| (k / n, k % n))
    }

    pub fn is_dominated(&self, x: usize) -> bool {
        (0..self.n).any(|y| self.dominates(y, x))
    }

    pub fn is_irreflexive(&self) -> bool {
        (0..self.n).all(|x| !self.dominates(x, x))
    }

    pub fn is_asymmetric(&self) -> bool {
        self.pairs().all(|(y, x)| !self.dominates(x, y))
    }

    pub fn is_transitive(&self) -> bool {
        self.pairs()
            .all(|(a, b)| (0..self.n).all(|c| !self.dominates(b, c) || self.dominates(a, c)))
    }
}

/// Why an alternative left the Pareto set.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub by: usize,
    /// One entry per criterion. Point: `K(by) - K(x)`. Interval:
    /// `lower(by) - upper(x)`. Relation: superiority degree of `by` over `x`.
    pub margins: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoResult {
    pareto: BTreeSet<usize>,
    domination: DominationRelation,
    witnesses: BTreeMap<usize, Witness>,
}

impl ParetoResult {
    fn from_domination(domination: DominationRelation, margins: impl Fn(usize, usize) -> Vec<f64>) -> Self {
        let n = domination.size();
        let pareto: BTreeSet<usize> = (0..n).filter(|&x| !domination.is_dominated(x)).collect();
        let witnesses = (0..n)
            .filter(|x| !pareto.contains(x))
            .map(|x| {
                // Prefer a dominator that survives; fall back to any.
                let by = pareto
                    .iter()
                    .copied()
                    .find(|&y| domination.dominates(y, x))
                    .or_else(|| (0..n).find(|&y| domination.dominates(y, x)))
                    .expect("eliminated alternative has a dominator");
                (x, Witness { by, margins: margins(by, x) })
            })
            .collect();
        ParetoResult {
            pareto,
            domination,
            witnesses,
        }
    }

    pub fn pareto_set(&self) -> &BTreeSet<usize> {
        &self.pareto
    }

    pub fn domination(&self) -> &DominationRelation {
        &self.domination
    }

    pub fn witnesses(&self) -> &BTreeMap<usize, Witness> {
        &self.witnesses
    }

    pub fn contains(&self, x: usize) -> bool {
        self.pareto.contains(&x)
    }

    /// The recorded dominator and margins for an eliminated alternative.
    pub fn explain(&self, x: usize) -> Option<&Witness> {
        self.witnesses.get(&x)
    }

    pub fn report(&self, problem: &Problem) -> ParetoReport {
        let alt = |i: usize| problem.alt_label(i).to_owned();
        ParetoReport {
            pareto: self.pareto.iter().map(|&i| alt(i)).collect(),
            dominations: self.domination.pairs().map(|(y, x)| (alt(y), alt(x))).collect(),
            witnesses: self
                .witnesses
                .iter()
                .map(|(&x, w)| {
                    let margins = w
                        .margins
                        .iter()
                        .enumerate()
                        .map(|(j, v)| (problem.criterion_label(j).to_owned(), *v))
                        .collect();
                    (alt(x), WitnessReport { by: alt(w.by), margins })
                })
                .collect(),
        }
    }
}

/// Wire form of a [`ParetoResult`], keyed by labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoReport {
    pub pareto: Vec<String>,
    pub dominations: Vec<(String, String)>,
    pub witnesses: BTreeMap<String, WitnessReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub by: String,
    pub margins: BTreeMap<String, f64>,
}

/// Componentwise Pareto rule: `y` dominates `x` when `K(y) >= K(x)` in every
/// criterion and `K(y) > K(x)` in at least one.
pub fn point_pareto(problem: &Problem) -> Result<ParetoResult> {
    let k = problem.points()?;
    let m = problem.m();
    let domination = DominationRelation::build(problem.n(), |y, x| {
        let row_y = k.row(y);
        let row_x = k.row(x);
        row_y.iter().zip(row_x).all(|(a, b)| a >= b) && row_y.iter().zip(row_x).any(|(a, b)| a > b)
    });
    Ok(ParetoResult::from_domination(domination, |y, x| {
        (0..m).map(|j| k.get(y, j) - k.get(x, j)).collect()
    }))
}

/// Pareto set of the intersection of the criterion relations. Domination is
/// the strict part of the intersection.
pub fn vpr_pareto(problem: &Problem) -> Result<ParetoResult> {
    let rels = problem.relations()?;
    let in_all = |a: usize, b: usize| rels.iter().all(|r| r.contains(a, b));
    let domination = DominationRelation::build(problem.n(), |y, x| in_all(y, x) && !in_all(x, y));
    Ok(ParetoResult::from_domination(domination, |y, x| {
        rels.iter()
            .map(|r| superiority_degree_index(r, y, x) as f64)
            .collect()
    }))
}

/// `y` dominates `x` when `y`'s interval dominates `x`'s on every criterion.
pub fn interval_pareto(problem: &Problem) -> Result<ParetoResult> {
    let (d, mode) = problem.intervals()?;
    let m = problem.m();
    let domination = DominationRelation::build(problem.n(), |y, x| {
        d.row(y).iter().zip(d.row(x)).all(|(a, b)| a.dominates(b, mode))
    });
    Ok(ParetoResult::from_domination(domination, |y, x| {
        (0..m).map(|j| d.get(y, j).lower() - d.get(x, j).upper()).collect()
    }))
}

/// Dispatches on the problem's structure.
pub fn pareto(problem: &Problem) -> ParetoResult {
    match problem.structure() {
        Structure::Point(_) => point_pareto(problem),
        Structure::Interval { .. } => interval_pareto(problem),
        Structure::Relation(_) => vpr_pareto(problem),
    }
    .expect("dispatch matches the variant")
}

/// True iff every set in `chain` is a subset of its successor.
pub fn check_nesting<T: Ord>(chain: &[BTreeSet<T>]) -> bool {
    chain.windows(2).all(|w| w[0].is_subset(&w[1]))
}

/// Dominator and per-criterion margins for an eliminated alternative.
pub fn dominance_explanations(problem: &Problem, result: &ParetoResult, x: &str) -> Result<WitnessReport> {
    let xi = problem.alt_index(x)?;
    let w = result.explain(xi).ok_or_else(|| Error::NotEliminated(x.to_owned()))?;
    Ok(WitnessReport {
        by: problem.alt_label(w.by).to_owned(),
        margins: w
            .margins
            .iter()
            .enumerate()
            .map(|(j, v)| (problem.criterion_label(j).to_owned(), *v))
            .collect(),
    })
}
