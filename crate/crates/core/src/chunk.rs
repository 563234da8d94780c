//! Exact subsets of the unit shard `[0, 1)` as sorted unions of half-open
//! intervals.

use std::fmt;

use num_traits::{One, Zero};

use crate::rational::{format_q, Q};

/// A normalized union of half-open intervals inside `[0, 1)`.
///
/// Intervals are sorted, non-empty, pairwise disjoint and never touch, so
/// structural equality is set equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ChunkSet {
    iv: Vec<(Q, Q)>,
}

impl ChunkSet {
    pub fn empty() -> Self {
        ChunkSet { iv: Vec::new() }
    }

    /// The whole shard.
    pub fn full() -> Self {
        ChunkSet {
            iv: vec![(Q::zero(), Q::one())],
        }
    }

    /// `[a, b)`, clipped to the unit interval. Empty when `b <= a`.
    pub fn interval(a: Q, b: Q) -> Self {
        let a = a.max(Q::zero());
        let b = b.min(Q::one());
        if b <= a {
            return Self::empty();
        }
        ChunkSet { iv: vec![(a, b)] }
    }

    /// Normalizes an arbitrary list of intervals.
    pub fn from_intervals<I: IntoIterator<Item = (Q, Q)>>(items: I) -> Self {
        let mut v: Vec<(Q, Q)> = items
            .into_iter()
            .map(|(a, b)| (a.max(Q::zero()), b.min(Q::one())))
            .filter(|(a, b)| a < b)
            .collect();
        v.sort();
        let mut out: Vec<(Q, Q)> = Vec::with_capacity(v.len());
        for (a, b) in v {
            match out.last_mut() {
                Some(last) if a <= last.1 => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => out.push((a, b)),
            }
        }
        ChunkSet { iv: out }
    }

    /// Parses flattened endpoints `[a0, b0, a1, b1, ...]`.
    pub fn from_endpoints(points: &[Q]) -> Option<Self> {
        if !points.len().is_multiple_of(2) {
            return None;
        }
        let pairs: Vec<(Q, Q)> = points.chunks(2).map(|p| (p[0], p[1])).collect();
        for (a, b) in &pairs {
            if a >= b || *a < Q::zero() || *b > Q::one() {
                return None;
            }
        }
        Some(Self::from_intervals(pairs))
    }

    pub fn endpoints(&self) -> Vec<Q> {
        self.iv.iter().flat_map(|(a, b)| [*a, *b]).collect()
    }

    pub fn intervals(&self) -> &[(Q, Q)] {
        &self.iv
    }

    pub fn is_empty(&self) -> bool {
        self.iv.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.iv.len() == 1 && self.iv[0].0.is_zero() && self.iv[0].1.is_one()
    }

    pub fn measure(&self) -> Q {
        self.iv.iter().fold(Q::zero(), |acc, (a, b)| acc + (b - a))
    }

    pub fn union(&self, other: &ChunkSet) -> ChunkSet {
        if other.is_empty() {
            return self.clone();
        }
        if self.is_empty() {
            return other.clone();
        }
        Self::from_intervals(self.iv.iter().chain(other.iv.iter()).cloned())
    }

    pub fn intersection(&self, other: &ChunkSet) -> ChunkSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.iv.len() && j < other.iv.len() {
            let (a0, a1) = self.iv[i];
            let (b0, b1) = other.iv[j];
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if lo < hi {
                out.push((lo, hi));
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        ChunkSet { iv: out }
    }

    pub fn difference(&self, other: &ChunkSet) -> ChunkSet {
        let mut out = Vec::new();
        let mut j = 0;
        for &(a0, a1) in &self.iv {
            let mut cur = a0;
            while j < other.iv.len() && other.iv[j].1 <= cur {
                j += 1;
            }
            let mut k = j;
            while k < other.iv.len() && other.iv[k].0 < a1 {
                let (b0, b1) = other.iv[k];
                if b0 > cur {
                    out.push((cur, b0));
                }
                if b1 > cur {
                    cur = b1;
                }
                if cur >= a1 {
                    break;
                }
                k += 1;
            }
            if cur < a1 {
                out.push((cur, a1));
            }
        }
        ChunkSet { iv: out }
    }

    pub fn is_subset(&self, other: &ChunkSet) -> bool {
        self.difference(other).is_empty()
    }

    pub fn is_disjoint(&self, other: &ChunkSet) -> bool {
        self.intersection(other).is_empty()
    }

    /// Image under `x -> offset + width * x`.
    pub fn affine(&self, offset: Q, width: Q) -> ChunkSet {
        Self::from_intervals(
            self.iv
                .iter()
                .map(|(a, b)| (offset + width * a, offset + width * b)),
        )
    }
}

impl fmt::Debug for ChunkSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ChunkSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.iv.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self
            .iv
            .iter()
            .map(|(a, b)| format!("[{},{})", format_q(a), format_q(b)))
            .collect();
        write!(f, "{}", parts.join("u"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    fn iv(a: (i128, i128), b: (i128, i128)) -> ChunkSet {
        ChunkSet::interval(q(a.0, a.1), q(b.0, b.1))
    }

    #[test]
    fn halves_merge_to_full() {
        let u = iv((0, 1), (1, 2)).union(&iv((1, 2), (1, 1)));
        assert!(u.is_full());
        assert_eq!(u, ChunkSet::full());
    }

    #[test]
    fn overlapping_intersection() {
        let x = iv((0, 1), (1, 2)).intersection(&iv((1, 4), (3, 4)));
        assert_eq!(x, iv((1, 4), (1, 2)));
    }

    #[test]
    fn measure_of_two_pieces() {
        let x = iv((0, 1), (1, 3)).union(&iv((2, 3), (1, 1)));
        assert_eq!(x.measure(), q(2, 3));
        assert_eq!(x.intervals().len(), 2);
    }

    #[test]
    fn difference_splits() {
        let x = ChunkSet::full().difference(&iv((1, 4), (1, 2)));
        assert_eq!(x, iv((0, 1), (1, 4)).union(&iv((1, 2), (1, 1))));
        assert!(ChunkSet::full().difference(&ChunkSet::full()).is_empty());
        assert_eq!(ChunkSet::full().difference(&ChunkSet::empty()), ChunkSet::full());
    }

    #[test]
    fn empty_interval_is_empty() {
        assert!(iv((1, 2), (1, 2)).is_empty());
        assert!(iv((3, 4), (1, 2)).is_empty());
    }

    #[test]
    fn endpoints_roundtrip() {
        let x = iv((0, 1), (1, 3)).union(&iv((1, 2), (3, 4)));
        let back = ChunkSet::from_endpoints(&x.endpoints()).unwrap();
        assert_eq!(back, x);
        assert!(ChunkSet::from_endpoints(&[q(1, 2)]).is_none());
        assert!(ChunkSet::from_endpoints(&[q(1, 2), q(1, 4)]).is_none());
    }

    #[test]
    fn affine_into_subshard() {
        let x = iv((0, 1), (1, 2)).affine(q(1, 2), q(1, 2));
        assert_eq!(x, iv((1, 2), (3, 4)));
    }

    fn arb_set() -> impl Strategy<Value = ChunkSet> {
        prop::collection::vec((0i128..=12, 0i128..=12), 0..5).prop_map(|v| {
            ChunkSet::from_intervals(v.into_iter().map(|(a, b)| (q(a, 12), q(b, 12))))
        })
    }

    proptest! {
        #[test]
        fn normalized_form(a in arb_set()) {
            for w in a.intervals().windows(2) {
                prop_assert!(w[0].1 < w[1].0);
            }
            for (x, y) in a.intervals() {
                prop_assert!(x < y);
            }
        }

        #[test]
        fn inclusion_exclusion(a in arb_set(), b in arb_set()) {
            let u = a.union(&b).measure();
            let i = a.intersection(&b).measure();
            prop_assert_eq!(u + i, a.measure() + b.measure());
        }

        #[test]
        fn difference_partitions(a in arb_set(), b in arb_set()) {
            let d = a.difference(&b);
            let i = a.intersection(&b);
            prop_assert!(d.is_disjoint(&i));
            prop_assert_eq!(d.union(&i), a.clone());
            prop_assert!(d.is_disjoint(&b));
        }

        #[test]
        fn union_commutes(a in arb_set(), b in arb_set()) {
            prop_assert_eq!(a.union(&b), b.union(&a));
            prop_assert_eq!(a.intersection(&b), b.intersection(&a));
        }
    }
}
