//! Binary preference relations over a finite set of alternatives.
//!
//! Alternatives are addressed by their declaration index. A pair `(x, y)`
//! means `x` is at least as good as `y`; reflexive pairs are implicit and
//! never stored.

use std::fmt;

/// A weak preference relation stored as a dense `n x n` adjacency matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PreferenceRelation {
    n: usize,
    adj: Vec<bool>,
    closed: bool,
}

impl PreferenceRelation {
    pub fn empty(n: usize) -> Self {
        PreferenceRelation {
            n,
            adj: vec![false; n * n],
            // The empty relation is trivially transitive.
            closed: true,
        }
    }

    /// Collects the given pairs, dropping reflexive ones. Does not close.
    ///
    /// # Panics
    ///
    /// Panics if an index is `>= n`.
    pub fn from_pairs<I>(n: usize, pairs: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut rel = PreferenceRelation::empty(n);
        for (x, y) in pairs {
            rel.insert(x, y);
        }
        rel
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.adj[x * self.n + y]
    }

    /// Adds `(x, y)`; returns whether the relation changed.
    pub fn insert(&mut self, x: usize, y: usize) -> bool {
        assert!(x < self.n && y < self.n, "alternative index out of range");
        if x == y || self.adj[x * self.n + y] {
            return false;
        }
        self.adj[x * self.n + y] = true;
        self.closed = false;
        true
    }

    /// Whether the closure has been applied since the last change.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Number of stored (non-reflexive) pairs.
    pub fn len(&self) -> usize {
        self.adj.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.adj.iter().any(|b| *b)
    }

    /// Stored pairs in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        self.adj
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(k, _)| (k / n, k % n))
    }

    /// `(x, y)` present and `(y, x)` absent.
    pub fn strictly_prefers(&self, x: usize, y: usize) -> bool {
        self.contains(x, y) && !self.contains(y, x)
    }

    pub fn indifferent(&self, x: usize, y: usize) -> bool {
        x != y && self.contains(x, y) && self.contains(y, x)
    }

    pub fn incomparable(&self, x: usize, y: usize) -> bool {
        x != y && !self.contains(x, y) && !self.contains(y, x)
    }

    /// Smallest transitive superset (Warshall).
    pub fn transitive_closure(&self) -> PreferenceRelation {
        let n = self.n;
        let mut adj = self.adj.clone();
        for k in 0..n {
            for i in 0..n {
                if i == k || !adj[i * n + k] {
                    continue;
                }
                for j in 0..n {
                    if adj[k * n + j] && i != j {
                        adj[i * n + j] = true;
                    }
                }
            }
        }
        PreferenceRelation { n, adj, closed: true }
    }

    pub fn is_transitive(&self) -> bool {
        self.closed || self.transitive_closure().adj == self.adj
    }

    /// Every unordered pair of distinct alternatives is comparable.
    pub fn is_connected(&self) -> bool {
        (0..self.n).all(|x| (x + 1..self.n).all(|y| !self.incomparable(x, y)))
    }

    /// Pairs of the relation with no reverse pair.
    pub fn strict_part(&self) -> PreferenceRelation {
        let mut out = PreferenceRelation::empty(self.n);
        for (x, y) in self.pairs() {
            if !self.contains(y, x) {
                out.adj[x * self.n + y] = true;
            }
        }
        // A strict part of a transitive relation is transitive.
        out.closed = self.is_transitive();
        out
    }

    /// The first strict pair of `reference` whose reverse is present in
    /// `self`, i.e. a strict preference that `self` downgrades to
    /// indifference or reverses.
    pub fn downgraded_strict_pair(&self, reference: &PreferenceRelation) -> Option<(usize, usize)> {
        debug_assert_eq!(self.n, reference.n);
        reference
            .pairs()
            .find(|&(x, y)| !reference.contains(y, x) && self.contains(y, x))
    }
}

impl fmt::Debug for PreferenceRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PreferenceRelation")
            .field("n", &self.n)
            .field("pairs", &self.pairs().collect::<Vec<_>>())
            .field("closed", &self.closed)
            .finish()
    }
}

/// Free-function form of [`PreferenceRelation::transitive_closure`].
pub fn transitive_closure(rel: &PreferenceRelation) -> PreferenceRelation {
    rel.transitive_closure()
}

pub fn is_transitive(rel: &PreferenceRelation) -> bool {
    rel.is_transitive()
}

pub fn is_connected(rel: &PreferenceRelation) -> bool {
    rel.is_connected()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;

    #[test]
    fn closure_adds_chain_pair() {
        let rel = PreferenceRelation::from_pairs(3, [(A, B), (B, C)]);
        assert!(!rel.is_closed());
        let closed = rel.transitive_closure();
        assert_eq!(closed.pairs().collect::<Vec<_>>(), vec![(A, B), (A, C), (B, C)]);
        assert!(closed.is_closed());
        assert_eq!(closed.transitive_closure(), closed);
    }

    #[test]
    fn closure_of_empty_is_empty() {
        let rel = PreferenceRelation::empty(4);
        assert!(rel.transitive_closure().is_empty());
    }

    #[test]
    fn closure_never_adds_reflexive_pairs() {
        let rel = PreferenceRelation::from_pairs(2, [(A, B), (B, A)]).transitive_closure();
        assert_eq!(rel.len(), 2);
        assert!(!rel.contains(A, A));
    }

    #[test]
    fn transitivity_checks() {
        assert!(PreferenceRelation::from_pairs(3, [(A, B), (B, C), (A, C)]).is_transitive());
        assert!(!PreferenceRelation::from_pairs(3, [(A, B), (B, C)]).is_transitive());
        assert!(PreferenceRelation::empty(3).is_transitive());
    }

    #[test]
    fn connectedness_checks() {
        let chain = PreferenceRelation::from_pairs(3, [(A, B), (B, C)]).transitive_closure();
        assert!(chain.is_connected());
        assert!(!PreferenceRelation::from_pairs(3, [(A, B)]).is_connected());
        assert!(PreferenceRelation::empty(1).is_connected());
    }

    #[test]
    fn strict_part_examples() {
        let r = PreferenceRelation::from_pairs(2, [(A, B)]);
        assert_eq!(r.strict_part().pairs().collect::<Vec<_>>(), vec![(A, B)]);
        let ind = PreferenceRelation::from_pairs(2, [(A, B), (B, A)]);
        assert!(ind.strict_part().is_empty());
        assert!(PreferenceRelation::empty(2).strict_part().is_empty());
    }

    #[test]
    fn downgrade_detection() {
        let old = PreferenceRelation::from_pairs(3, [(A, B)]);
        let mut new = old.clone();
        new.insert(B, A);
        assert_eq!(new.transitive_closure().downgraded_strict_pair(&old), Some((A, B)));
        let mut ok = old.clone();
        ok.insert(B, C);
        assert_eq!(ok.transitive_closure().downgraded_strict_pair(&old), None);
    }

    fn arb_relation() -> impl Strategy<Value = PreferenceRelation> {
        (1usize..=6).prop_flat_map(|n| {
            proptest::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
                PreferenceRelation::from_pairs(
                    n,
                    bits.iter()
                        .enumerate()
                        .filter(|(_, b)| **b)
                        .map(|(k, _)| (k / n, k % n)),
                )
            })
        })
    }

    proptest! {
        #[test]
        fn closure_is_idempotent_and_monotone(rel in arb_relation()) {
            let once = rel.transitive_closure();
            prop_assert_eq!(once.transitive_closure(), once.clone());
            for (x, y) in rel.pairs() {
                prop_assert!(once.contains(x, y));
            }
            prop_assert!(once.is_transitive());
        }

        #[test]
        fn closure_is_smallest(rel in arb_relation()) {
            // Every closure pair is witnessed by a path in the original.
            let closed = rel.transitive_closure();
            let n = rel.size();
            for (x, y) in closed.pairs() {
                let mut seen = vec![false; n];
                let mut stack = vec![x];
                while let Some(v) = stack.pop() {
                    for (w, s) in seen.iter_mut().enumerate() {
                        if rel.contains(v, w) && !*s {
                            *s = true;
                            stack.push(w);
                        }
                    }
                }
                prop_assert!(seen[y]);
            }
        }
    }
}
