//! Permutations of `[n] = {1, ..., n}`.
//!
//! Ranks are counted upward: rank `n` is the largest. A ranking permutation
//! assigns each arrival its rank, so `sigma.at(i) == n` says the `i`-th
//! element is the maximum.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Perm(Vec<usize>);

impl Perm {
    /// Validates that `images` is a permutation of `1..=len`.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(CoreError::BadParam("empty permutation".into()));
        }
        let mut seen = vec![false; n + 1];
        for &v in &images {
            if v == 0 || v > n || seen[v] {
                return Err(CoreError::BadParam(format!(
                    "not a permutation of 1..={n}: {images:?}"
                )));
            }
            seen[v] = true;
        }
        Ok(Perm(images))
    }

    pub fn identity(n: usize) -> Self {
        Perm((1..=n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Image of `i`, 1-indexed.
    pub fn at(&self, i: usize) -> usize {
        self.0[i - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v - 1] = i + 1;
        }
        Perm(inv)
    }

    /// All permutations of `[n]` in lexicographic order.
    pub fn all(n: usize) -> Vec<Perm> {
        (1..=n).permutations(n).map(Perm).collect()
    }

    /// Ranking of a list of distinct values: entry `i` is the rank of
    /// `values[i]`, with rank 1 the smallest.
    pub fn ranking_of<T: Ord>(values: &[T]) -> Result<Perm> {
        let k = values.len();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| values[a].cmp(&values[b]));
        let mut ranks = vec![0; k];
        for (rank0, &idx) in order.iter().enumerate() {
            if rank0 > 0 && values[order[rank0 - 1]] == values[idx] {
                return Err(CoreError::BadParam("values are not distinct".into()));
            }
            ranks[idx] = rank0 + 1;
        }
        Perm::new(ranks)
    }

    /// Relative ranking of the first `k` entries of this permutation's image
    /// sequence: the observation an ordinal algorithm has after `k` arrivals.
    pub fn prefix_ranking(&self, k: usize) -> Result<Perm> {
        if k == 0 || k > self.len() {
            return Err(CoreError::IndexOutOfRange {
                index: k,
                len: self.len(),
            });
        }
        Perm::ranking_of(&self.0[..k])
    }
}

impl std::fmt::Display for Perm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({})", self.0.iter().join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_permutations() {
        assert!(Perm::new(vec![1, 1, 2]).is_err());
        assert!(Perm::new(vec![0, 1]).is_err());
        assert!(Perm::new(vec![2, 3]).is_err());
        assert!(Perm::new(vec![]).is_err());
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let all = Perm::all(3);
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], Perm::new(vec![1, 2, 3]).unwrap());
        assert_eq!(all[5], Perm::new(vec![3, 2, 1]).unwrap());
    }

    #[test]
    fn inverse_round_trips() {
        let p = Perm::new(vec![3, 1, 4, 2]).unwrap();
        let inv = p.inverse();
        for i in 1..=4 {
            assert_eq!(inv.at(p.at(i)), i);
        }
    }

    #[test]
    fn ranking_of_values() {
        let r = Perm::ranking_of(&[40u64, 10, 25]).unwrap();
        assert_eq!(r, Perm::new(vec![3, 1, 2]).unwrap());
        assert!(Perm::ranking_of(&[5u64, 5]).is_err());
    }

    #[test]
    fn prefix_ranking_compresses_ranks() {
        let pi = Perm::new(vec![3, 1, 4, 2]).unwrap();
        assert_eq!(pi.prefix_ranking(1).unwrap(), Perm::identity(1));
        assert_eq!(pi.prefix_ranking(2).unwrap(), Perm::new(vec![2, 1]).unwrap());
        assert_eq!(
            pi.prefix_ranking(3).unwrap(),
            Perm::new(vec![2, 1, 3]).unwrap()
        );
        assert_eq!(pi.prefix_ranking(4).unwrap(), pi);
    }
}
