//! Utility bounds for relations with incomparable pairs.
//!
//! For a transitive relation, the number of alternatives `x` strictly beats
//! is an order scale coordinated with the relation. When some pairs are
//! incomparable the true scale is unknown, but it is bracketed by two
//! completions:
//!
//! - lower utility: every incomparable alternative is assumed to beat `x`,
//!   so only asserted strict wins count;
//! - upper utility: `x` is assumed to beat every incomparable alternative,
//!   so those are added on top.
//!
//! Turning each `[lower; upper]` into an interval converts a relation
//! problem into an interval problem with the same Pareto machinery.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::interval::{DominanceMode, Interval};
use crate::pareto::DominationRelation;
use crate::problem::{Matrix, Problem, Structure};
use crate::relation::PreferenceRelation;

fn check_index(rel: &PreferenceRelation, x: usize) -> Result<()> {
    if x >= rel.size() {
        return Err(Error::UnknownId(format!("alternative #{x}")));
    }
    Ok(())
}

/// `{(x, y) : (x, y) in rel, (y, x) not in rel}`.
pub fn strict_part(rel: &PreferenceRelation) -> PreferenceRelation {
    rel.strict_part()
}

/// Strict part viewed as a domination relation.
pub fn strict_domination(rel: &PreferenceRelation) -> DominationRelation {
    let strict = rel.strict_part();
    DominationRelation::build(rel.size(), |y, x| strict.contains(y, x))
}

/// Alternatives that `rel` neither ranks above nor below `x`.
pub fn incomparable_set(rel: &PreferenceRelation, x: usize) -> Result<BTreeSet<usize>> {
    check_index(rel, x)?;
    Ok((0..rel.size()).filter(|&y| rel.incomparable(x, y)).collect())
}

/// For each `y`, the number of criteria on which `y` is incomparable with
/// `x`. Entries with count zero are omitted.
pub fn incomparability_multiset(problem: &Problem, x: usize) -> Result<BTreeMap<usize, usize>> {
    let rels = problem.relations()?;
    if x >= problem.n() {
        return Err(Error::UnknownId(format!("alternative #{x}")));
    }
    let mut counts = BTreeMap::new();
    for rel in rels {
        for y in incomparable_set(rel, x)? {
            *counts.entry(y).or_insert(0) += 1;
        }
    }
    Ok(counts)
}

/// Per-alternative, per-criterion incomparability sets with their
/// multiplicity union.
#[derive(Debug, Clone, PartialEq)]
pub struct IncomparabilityReport {
    /// `per_criterion[x][j]` is the set of alternatives incomparable with `x` on `j`.
    pub per_criterion: Vec<Vec<BTreeSet<usize>>>,
    /// `aggregate[x][y]` counts the criteria on which `y` is incomparable with `x`.
    pub aggregate: Vec<BTreeMap<usize, usize>>,
}

pub fn incomparability_report(problem: &Problem) -> Result<IncomparabilityReport> {
    let rels = problem.relations()?;
    let n = problem.n();
    let per_criterion = (0..n)
        .map(|x| rels.iter().map(|r| incomparable_set(r, x)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let aggregate = (0..n)
        .map(|x| incomparability_multiset(problem, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(IncomparabilityReport {
        per_criterion,
        aggregate,
    })
}

pub(crate) fn superiority_degree_index(rel: &PreferenceRelation, x: usize, y: usize) -> i8 {
    if rel.strictly_prefers(x, y) {
        1
    } else if rel.strictly_prefers(y, x) {
        -1
    } else {
        0
    }
}

/// Sign of the preference of `x` over `y`: `+1`, `-1`, or `0` for
/// indifferent and incomparable pairs. Skew-symmetric.
pub fn superiority_degree(rel: &PreferenceRelation, x: usize, y: usize) -> Result<i8> {
    check_index(rel, x)?;
    check_index(rel, y)?;
    if x == y {
        return Err(Error::SamePair(format!("alternative #{x}")));
    }
    Ok(superiority_degree_index(rel, x, y))
}

pub fn lower_utility(rel: &PreferenceRelation, x: usize) -> Result<usize> {
    check_index(rel, x)?;
    Ok((0..rel.size()).filter(|&y| rel.strictly_prefers(x, y)).count())
}

pub fn upper_utility(rel: &PreferenceRelation, x: usize) -> Result<usize> {
    Ok(lower_utility(rel, x)? + incomparable_set(rel, x)?.len())
}

/// `[lower_utility; upper_utility]` for `x`.
pub fn utility_interval(rel: &PreferenceRelation, x: usize) -> Result<Interval> {
    let lo = lower_utility(rel, x)? as f64;
    let hi = upper_utility(rel, x)? as f64;
    Interval::new(lo, hi)
}

/// Utility intervals for every alternative and criterion: an `n x m`
/// interval matrix.
pub fn utility_matrix(relations: &[PreferenceRelation]) -> Matrix<Interval> {
    let n = relations.first().map_or(0, PreferenceRelation::size);
    Matrix::from_fn(n, relations.len(), |i, j| {
        utility_interval(&relations[j], i).expect("index in range")
    })
}

/// Converts a relation problem into an interval problem (strict mode) over
/// the same alternatives and criteria.
pub fn vpr_to_interval_structure(problem: &Problem) -> Result<Problem> {
    let rels = problem.relations()?;
    Problem::new(
        problem.alternatives().to_vec(),
        problem.criteria().to_vec(),
        Structure::Interval {
            matrix: utility_matrix(rels),
            mode: DominanceMode::Strict,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::labelled;
    use proptest::prelude::*;

    fn rel(n: usize, pairs: &[(usize, usize)]) -> PreferenceRelation {
        PreferenceRelation::from_pairs(n, pairs.iter().copied()).transitive_closure()
    }

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    #[test]
    fn incomparable_sets() {
        let r = rel(3, &[(0, 1)]);
        assert_eq!(incomparable_set(&r, 2).unwrap(), set(&[0, 1]));
        assert_eq!(incomparable_set(&r, 0).unwrap(), set(&[2]));
        let chain = rel(3, &[(0, 1), (1, 2)]);
        for x in 0..3 {
            assert!(incomparable_set(&chain, x).unwrap().is_empty());
        }
        assert!(matches!(incomparable_set(&r, 3), Err(Error::UnknownId(_))));
    }

    #[test]
    fn multiset_counts_criteria() {
        let p = labelled(3, 2, Structure::Relation(vec![rel(3, &[(0, 1)]), rel(3, &[(1, 2)])])).unwrap();
        let ms = incomparability_multiset(&p, 2).unwrap();
        assert_eq!(ms, BTreeMap::from([(0, 2), (1, 1)]));

        let single = labelled(3, 1, Structure::Relation(vec![rel(3, &[(0, 1)])])).unwrap();
        assert_eq!(incomparability_multiset(&single, 2).unwrap(), BTreeMap::from([(0, 1), (1, 1)]));

        let connected = labelled(2, 2, Structure::Relation(vec![rel(2, &[(0, 1)]), rel(2, &[(1, 0)])])).unwrap();
        assert!(incomparability_multiset(&connected, 0).unwrap().is_empty());

        let report = incomparability_report(&p).unwrap();
        assert_eq!(report.per_criterion[2], vec![set(&[0, 1]), set(&[0])]);
        assert_eq!(report.aggregate[2], ms);
    }

    #[test]
    fn superiority_degree_signs() {
        let r = rel(3, &[(0, 1)]);
        assert_eq!(superiority_degree(&r, 0, 1).unwrap(), 1);
        assert_eq!(superiority_degree(&r, 1, 0).unwrap(), -1);
        assert_eq!(superiority_degree(&r, 0, 2).unwrap(), 0);
        let ind = rel(2, &[(0, 1), (1, 0)]);
        assert_eq!(superiority_degree(&ind, 0, 1).unwrap(), 0);
        assert!(matches!(superiority_degree(&r, 1, 1), Err(Error::SamePair(_))));
        assert!(matches!(superiority_degree(&r, 0, 7), Err(Error::UnknownId(_))));
    }

    #[test]
    fn utility_examples() {
        let chain = rel(3, &[(0, 1), (1, 2), (0, 2)]);
        let lows: Vec<_> = (0..3).map(|x| lower_utility(&chain, x).unwrap()).collect();
        assert_eq!(lows, vec![2, 1, 0]);
        let ups: Vec<_> = (0..3).map(|x| upper_utility(&chain, x).unwrap()).collect();
        assert_eq!(ups, lows);

        let empty = PreferenceRelation::empty(3);
        for x in 0..3 {
            assert_eq!(lower_utility(&empty, x).unwrap(), 0);
            assert_eq!(upper_utility(&empty, x).unwrap(), 2);
        }

        let r = rel(3, &[(0, 1)]);
        let lows: Vec<_> = (0..3).map(|x| lower_utility(&r, x).unwrap()).collect();
        let ups: Vec<_> = (0..3).map(|x| upper_utility(&r, x).unwrap()).collect();
        assert_eq!(lows, vec![1, 0, 0]);
        assert_eq!(ups, vec![2, 1, 2]);
    }

    fn column(p: &Problem) -> Vec<(f64, f64)> {
        let (m, mode) = p.intervals().unwrap();
        assert_eq!(mode, DominanceMode::Strict);
        (0..m.rows()).map(|i| (m.get(i, 0).lower(), m.get(i, 0).upper())).collect()
    }

    #[test]
    fn conversion_examples() {
        let p = labelled(3, 1, Structure::Relation(vec![rel(3, &[(0, 1)])])).unwrap();
        assert_eq!(
            column(&vpr_to_interval_structure(&p).unwrap()),
            vec![(1.0, 2.0), (0.0, 1.0), (0.0, 2.0)]
        );
        let chain = labelled(3, 1, Structure::Relation(vec![rel(3, &[(0, 1), (1, 2)])])).unwrap();
        assert_eq!(
            column(&vpr_to_interval_structure(&chain).unwrap()),
            vec![(2.0, 2.0), (1.0, 1.0), (0.0, 0.0)]
        );
        let empty = labelled(3, 1, Structure::Relation(vec![PreferenceRelation::empty(3)])).unwrap();
        assert_eq!(column(&vpr_to_interval_structure(&empty).unwrap()), vec![(0.0, 2.0); 3]);

        let point = crate::problem::point_to_degenerate_intervals(
            &labelled(1, 1, Structure::Point(Matrix::from_fn(1, 1, |_, _| 0.0))).unwrap(),
            DominanceMode::Strict,
        )
        .unwrap();
        assert!(matches!(vpr_to_interval_structure(&point), Err(Error::WrongVariant { .. })));
    }

    /// Random transitive relation: closure of a random subset of a random
    /// total preorder, so it never contains contradictions.
    fn arb_transitive() -> impl Strategy<Value = PreferenceRelation> {
        (1usize..=7).prop_flat_map(|n| {
            (
                proptest::collection::vec(0u8..4, n),
                proptest::collection::vec(any::<bool>(), n * n),
            )
                .prop_map(move |(score, keep)| {
                    PreferenceRelation::from_pairs(
                        n,
                        (0..n)
                            .flat_map(|x| (0..n).map(move |y| (x, y)))
                            .filter(|&(x, y)| score[x] >= score[y] && keep[x.min(y) * n + x.max(y)]),
                    )
                    .transitive_closure()
                })
        })
    }

    proptest! {
        #[test]
        fn upper_dominates_lower(r in arb_transitive()) {
            for x in 0..r.size() {
                let lo = lower_utility(&r, x).unwrap();
                let hi = upper_utility(&r, x).unwrap();
                prop_assert!(hi >= lo);
                prop_assert_eq!(hi == lo, incomparable_set(&r, x).unwrap().is_empty());
            }
        }

        #[test]
        fn skew_symmetry(r in arb_transitive()) {
            for x in 0..r.size() {
                for y in 0..r.size() {
                    if x != y {
                        prop_assert_eq!(
                            superiority_degree(&r, x, y).unwrap(),
                            -superiority_degree(&r, y, x).unwrap()
                        );
                    }
                }
            }
        }

        #[test]
        fn lower_utility_is_order_coordinated(r in arb_transitive()) {
            let strict = strict_part(&r);
            for (x, y) in strict.pairs() {
                prop_assert!(lower_utility(&r, x).unwrap() > lower_utility(&r, y).unwrap());
            }
        }

        #[test]
        fn utilities_bracket_every_connected_extension(
            r in arb_transitive(), order in proptest::collection::vec(0u8..4, 7),
        ) {
            // Extend r to a connected transitive relation by breaking its
            // incomparabilities with a linear extension of the strict part.
            let n = r.size();
            let mut ext = r.clone();
            let mut rank: Vec<usize> = (0..n).collect();
            rank.sort_by_key(|&x| (std::cmp::Reverse(lower_utility(&r, x).unwrap()), order[x]));
            let pos: Vec<usize> = {
                let mut p = vec![0; n];
                for (k, &x) in rank.iter().enumerate() { p[x] = k; }
                p
            };
            for x in 0..n {
                for y in 0..n {
                    if r.incomparable(x, y) && pos[x] < pos[y] {
                        ext.insert(x, y);
                    }
                }
            }
            let ext = ext.transitive_closure();
            prop_assert!(ext.is_connected());
            if ext.downgraded_strict_pair(&r).is_none() {
                for x in 0..n {
                    let truth = lower_utility(&ext, x).unwrap();
                    prop_assert!(lower_utility(&r, x).unwrap() <= truth);
                    prop_assert!(truth <= upper_utility(&r, x).unwrap());
                }
            }
        }

        #[test]
        fn adding_consistent_pairs_contracts(r in arb_transitive(), x in 0usize..7, y in 0usize..7) {
            let n = r.size();
            let (x, y) = (x % n, y % n);
            let mut grown = r.clone();
            grown.insert(x, y);
            let grown = grown.transitive_closure();
            if grown.downgraded_strict_pair(&r).is_none() {
                for z in 0..n {
                    let before = utility_interval(&r, z).unwrap();
                    let after = utility_interval(&grown, z).unwrap();
                    prop_assert!(before.includes(&after), "{} -> {}", before, after);
                }
            }
        }
    }
}
