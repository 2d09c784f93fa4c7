//! Distributions over value sets whose order statistics are mutually
//! indistinguishable.
//!
//! A distribution `F` over n-element sets is order-statistics
//! indistinguishable (OSI) at level `eps` when for any two equal-size index
//! sets `I`, `J` the marginals `S_I` and `S_J` are within total variation
//! `eps`. Such inputs are what make value observations useless to an
//! adversary designing ordinal lower bounds, and conversely they carry the
//! whole difficulty of the games in this crate.
//!
//! Three constructions are provided, in increasing generality:
//! - consecutive pairs `{i, i+1}` (n = 2),
//! - dyadic triples `{i, i + 2^l, i + 2^(l+1)}` (n = 3),
//! - the recursive gap construction, where the gap exponents of an n-set are
//!   themselves an OSI (n-1)-set.
//!
//! The recursion's honest parameters grow as a tower, so the constructors
//! expose the level base `C` and the top range `T1` directly; `verify_osi`
//! then reports the indistinguishability actually achieved instead of
//! promising a target up front.

use std::collections::BTreeSet;

use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{EnumBudget, FiniteDist};
use crate::error::{CoreError, Result};
use crate::rational::{pow_floor, Rational};

/// A set of distinct positive integers `1 <= s_1 < ... < s_n <= bound`,
/// stored in increasing order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ValueSet {
    values: Vec<u64>,
    bound: u64,
}

impl ValueSet {
    pub fn new(values: Vec<u64>, bound: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(CoreError::BadParam("empty value set".into()));
        }
        if values[0] == 0 {
            return Err(CoreError::BadParam("values must be positive".into()));
        }
        if !values.windows(2).all(|w| w[0] < w[1]) {
            return Err(CoreError::BadParam(
                "values must be strictly increasing".into(),
            ));
        }
        if *values.last().unwrap() > bound {
            return Err(CoreError::BadParam(format!(
                "largest value {} exceeds bound {bound}",
                values.last().unwrap()
            )));
        }
        Ok(ValueSet { values, bound })
    }

    /// A value set whose bound is its own maximum. Marginal operations
    /// re-tighten bounds this way so that equal value lists always merge.
    pub fn tight(values: Vec<u64>) -> Result<Self> {
        let bound = *values.last().ok_or(CoreError::EmptyRange)?;
        Self::new(values, bound)
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The `i`-th smallest value, 1-indexed.
    pub fn order_stat(&self, i: usize) -> Result<u64> {
        self.values
            .get(i.wrapping_sub(1))
            .copied()
            .ok_or(CoreError::IndexOutOfRange {
                index: i,
                len: self.values.len(),
            })
    }

    pub fn gaps(&self) -> GapVector {
        let mut gaps = Vec::with_capacity(self.values.len());
        let mut prev = 0;
        for &v in &self.values {
            gaps.push(v - prev);
            prev = v;
        }
        GapVector { gaps }
    }
}

/// Consecutive differences `d_i = s_i - s_{i-1}` (with `s_0 = 0`), the
/// coordinate system in which the constructions and the guessing algorithms
/// are naturally written. All entries are strictly positive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GapVector {
    gaps: Vec<u64>,
}

impl GapVector {
    pub fn new(gaps: Vec<u64>) -> Result<Self> {
        if gaps.is_empty() {
            return Err(CoreError::BadParam("empty gap vector".into()));
        }
        if gaps.iter().any(|&g| g == 0) {
            return Err(CoreError::BadParam("gaps must be positive".into()));
        }
        Ok(GapVector { gaps })
    }

    pub fn gaps(&self) -> &[u64] {
        &self.gaps
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    /// Prefix sums; the inverse of `ValueSet::gaps`.
    pub fn to_value_set(&self) -> Result<ValueSet> {
        let mut values = Vec::with_capacity(self.gaps.len());
        let mut acc: u64 = 0;
        for &g in &self.gaps {
            acc = acc
                .checked_add(g)
                .ok_or_else(|| CoreError::Overflow("value exceeds u64".into()))?;
            values.push(acc);
        }
        ValueSet::tight(values)
    }
}

/// Parameters of the recursive construction. `level_base` is the base `C` of
/// the per-level gap ranges and `top_range` is the range `T1` of the first
/// (largest) gap; both are reused at every recursion depth, which is what
/// keeps instances on a desk scale.
#[derive(Debug, Clone, PartialEq)]
pub struct OsiParams {
    pub n: usize,
    pub level_base: Rational,
    pub top_range: u64,
}

impl OsiParams {
    pub fn new(n: usize, level_base: Rational, top_range: u64) -> Result<Self> {
        if n < 2 {
            return Err(CoreError::BadParam("need n >= 2".into()));
        }
        if level_base < Rational::from_integer(2.into()) {
            return Err(CoreError::BadParam("level base must be >= 2".into()));
        }
        if top_range == 0 {
            return Err(CoreError::BadParam("top range must be positive".into()));
        }
        Ok(OsiParams {
            n,
            level_base,
            top_range,
        })
    }
}

/// Uniform distribution over consecutive pairs `{i, i+1}`, `1 <= i <= N-1`.
pub fn build_osi_pairs(n_bound: u64) -> Result<FiniteDist<ValueSet>> {
    if n_bound < 2 {
        return Err(CoreError::BadParam("need N >= 2".into()));
    }
    let sets = (1..n_bound)
        .map(|i| ValueSet::new(vec![i, i + 1], n_bound))
        .collect::<Result<Vec<_>>>()?;
    FiniteDist::uniform(sets)
}

/// Uniform distribution over dyadic triples `{i, i + 2^l, i + 2^(l+1)}` for
/// all `1 <= l <= lmax` and all `i >= 1` with `i + 2^(l+1) <= N`.
pub fn build_osi_triples(lmax: u32, n_bound: u64) -> Result<FiniteDist<ValueSet>> {
    if lmax == 0 {
        return Err(CoreError::BadParam("need lmax >= 1".into()));
    }
    let mut sets = Vec::new();
    for l in 1..=lmax {
        let step = 1u64
            .checked_shl(l)
            .ok_or_else(|| CoreError::Overflow("2^l exceeds u64".into()))?;
        let reach = step
            .checked_mul(2)
            .ok_or_else(|| CoreError::Overflow("2^(l+1) exceeds u64".into()))?;
        if reach >= n_bound {
            continue;
        }
        for i in 1..=(n_bound - reach) {
            sets.push(ValueSet::new(vec![i, i + step, i + reach], n_bound)?);
        }
    }
    if sets.is_empty() {
        return Err(CoreError::BadParam(
            "no triple fits below the bound; increase N or decrease lmax".into(),
        ));
    }
    FiniteDist::uniform(sets)
}

fn gap_range(params: &OsiParams, exponent: u64) -> Result<u64> {
    let exp = u32::try_from(exponent)
        .map_err(|_| CoreError::Overflow("gap exponent exceeds u32".into()))?;
    let m = pow_floor(&params.level_base, exp)?;
    m.to_u64()
        .ok_or_else(|| CoreError::Overflow("gap range C^t exceeds u64".into()))
}

/// The recursive construction, fully enumerated.
///
/// For `n = 2` the gaps are `(Uni[T1], 1)`, which is exactly the consecutive
/// pair construction. For `n >= 3` a set of exponents `t_1 < ... < t_{n-1}`
/// is drawn from the (n-1)-point construction with the same parameters, and
/// the gaps are `d_1 ~ Uni[T1]`, `d_i ~ Uni[floor(C^{t_{i-1}})]` for
/// `i >= 2`. Tower growth means u64 values cap honest instances around
/// `n = 4`; beyond that the budget or an overflow error reports it.
pub fn build_osi_general(params: &OsiParams, budget: &EnumBudget) -> Result<FiniteDist<GapVector>> {
    if params.n == 2 {
        budget.check(u128::from(params.top_range))?;
        let gaps = (1..=params.top_range)
            .map(|d1| GapVector::new(vec![d1, 1]))
            .collect::<Result<Vec<_>>>()?;
        return FiniteDist::uniform(gaps);
    }
    let inner = OsiParams {
        n: params.n - 1,
        ..params.clone()
    };
    let exponent_sets = build_osi_general(&inner, budget)?;
    let mut parts = Vec::new();
    for (t_gaps, w) in exponent_sets.iter() {
        let t_set = t_gaps.to_value_set()?;
        let mut ranges = Vec::with_capacity(params.n);
        ranges.push(params.top_range);
        for &t in t_set.values() {
            ranges.push(gap_range(params, t)?);
        }
        let mut needed: u128 = 1;
        for &r in &ranges {
            needed = needed.saturating_mul(u128::from(r));
        }
        budget.check(needed)?;
        let coords: Vec<FiniteDist<u64>> = ranges
            .iter()
            .map(|&r| FiniteDist::uniform(1..=r))
            .collect::<Result<Vec<_>>>()?;
        let joint = FiniteDist::product(&coords, budget)?;
        let as_gaps = joint.pushforward(|v| GapVector { gaps: v.clone() });
        parts.push((w.clone(), as_gaps));
    }
    FiniteDist::mixture(parts)
}

/// One draw from the recursive construction; the sampling twin of
/// `build_osi_general` for parameter ranges too large to enumerate.
pub fn sample_osi_general<R: Rng + ?Sized>(params: &OsiParams, rng: &mut R) -> Result<GapVector> {
    if params.n == 2 {
        return GapVector::new(vec![rng.gen_range(1..=params.top_range), 1]);
    }
    let inner = OsiParams {
        n: params.n - 1,
        ..params.clone()
    };
    let t_set = sample_osi_general(&inner, rng)?.to_value_set()?;
    let mut gaps = vec![rng.gen_range(1..=params.top_range)];
    for &t in t_set.values() {
        gaps.push(rng.gen_range(1..=gap_range(params, t)?));
    }
    GapVector::new(gaps)
}

/// Reinterprets a gap-vector distribution as a value-set distribution.
pub fn gaps_to_sets(f: &FiniteDist<GapVector>) -> Result<FiniteDist<ValueSet>> {
    let mut pairs = Vec::with_capacity(f.support_size());
    for (g, w) in f.iter() {
        pairs.push((g.to_value_set()?, w.clone()));
    }
    FiniteDist::from_pairs(pairs)
}

fn common_size(f: &FiniteDist<ValueSet>) -> Result<usize> {
    let mut sizes = f.support().map(ValueSet::len);
    let n = sizes.next().ok_or(CoreError::EmptyRange)?;
    if let Some(bad) = sizes.find(|&k| k != n) {
        return Err(CoreError::BadLength {
            expected: n,
            found: bad,
        });
    }
    Ok(n)
}

/// Law of the set with its `i`-th smallest value removed. Bounds are
/// re-tightened so that equal surviving value lists merge.
pub fn deletion_marginal(f: &FiniteDist<ValueSet>, i: usize) -> Result<FiniteDist<ValueSet>> {
    let n = common_size(f)?;
    if i == 0 || i > n {
        return Err(CoreError::IndexOutOfRange { index: i, len: n });
    }
    if n < 2 {
        return Err(CoreError::BadParam("cannot delete from a singleton".into()));
    }
    let mut out: Vec<(ValueSet, Rational)> = Vec::new();
    for (s, w) in f.iter() {
        let mut values = s.values().to_vec();
        values.remove(i - 1);
        out.push((ValueSet::tight(values)?, w.clone()));
    }
    let d = FiniteDist::from_pairs(out);
    match d {
        Ok(d) => Ok(d),
        // deleting may merge outcomes, so rebuild through a pushforward
        Err(CoreError::InvalidDistribution(_)) => Ok(f.pushforward(|s| {
            let mut values = s.values().to_vec();
            values.remove(i - 1);
            ValueSet::tight(values).expect("surviving values stay valid")
        })),
        Err(e) => Err(e),
    }
}

/// Law of the order statistics at the 1-indexed ranks in `index_set`.
pub fn subset_marginal(
    f: &FiniteDist<ValueSet>,
    index_set: &BTreeSet<usize>,
) -> Result<FiniteDist<ValueSet>> {
    let n = common_size(f)?;
    if index_set.is_empty() {
        return Err(CoreError::BadParam("empty index set".into()));
    }
    if let Some(&bad) = index_set.iter().find(|&&i| i == 0 || i > n) {
        return Err(CoreError::IndexOutOfRange { index: bad, len: n });
    }
    Ok(f.pushforward(|s| {
        let values: Vec<u64> = index_set.iter().map(|&i| s.values()[i - 1]).collect();
        ValueSet::tight(values).expect("kept values stay valid")
    }))
}

/// The two halves of a deletion path between equal-size index sets.
///
/// Starting from `I` and `J`, the side whose first differing rank is larger
/// decrements that rank by one; each list records its start and every set it
/// moves through, and the two last entries coincide. Consecutive sets along
/// a side differ in one rank by one, which is what lets a total variation
/// bound on single deletions amplify along the path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexPath {
    pub from_left: Vec<BTreeSet<usize>>,
    pub from_right: Vec<BTreeSet<usize>>,
}

impl IndexPath {
    /// Number of single-step moves on both sides combined.
    pub fn steps(&self) -> usize {
        self.from_left.len() + self.from_right.len() - 2
    }
}

pub fn index_path(left: &BTreeSet<usize>, right: &BTreeSet<usize>) -> Result<IndexPath> {
    if left.len() != right.len() {
        return Err(CoreError::BadLength {
            expected: left.len(),
            found: right.len(),
        });
    }
    if left.is_empty() {
        return Err(CoreError::BadParam("empty index sets".into()));
    }
    for &i in left.iter().chain(right.iter()) {
        if i == 0 {
            return Err(CoreError::IndexOutOfRange { index: 0, len: 0 });
        }
    }
    let mut l: Vec<usize> = left.iter().copied().collect();
    let mut r: Vec<usize> = right.iter().copied().collect();
    let mut from_left = vec![left.clone()];
    let mut from_right = vec![right.clone()];
    while l != r {
        let pos = (0..l.len()).find(|&p| l[p] != r[p]).unwrap();
        if l[pos] > r[pos] {
            l[pos] -= 1;
            from_left.push(l.iter().copied().collect());
        } else {
            r[pos] -= 1;
            from_right.push(r.iter().copied().collect());
        }
        debug_assert!(l.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(r.windows(2).all(|w| w[0] < w[1]));
    }
    Ok(IndexPath {
        from_left,
        from_right,
    })
}

/// Everything `verify_osi` measured.
#[derive(Debug, Clone, PartialEq)]
pub struct OsiReport {
    pub n: usize,
    /// Largest TV distance between two single-deletion marginals.
    pub max_deletion_tv: Rational,
    pub max_deletion_pair: (usize, usize),
    /// Largest TV distance over the index-set pairs actually checked.
    pub max_subset_tv: Rational,
    pub max_subset_pair: (BTreeSet<usize>, BTreeSet<usize>),
    /// Whether every equal-size pair was checked, or only a sample.
    pub exhaustive: bool,
    pub pairs_checked: usize,
    /// Every checked pair satisfied `tv <= path steps * max deletion TV`.
    pub path_bound_ok: bool,
    /// `max_subset_tv <= n^2 * max_deletion_tv`.
    pub square_bound_ok: bool,
    /// Achieved indistinguishability, i.e. `max_subset_tv`.
    pub achieved_eps: Rational,
    pub eps_target: Option<Rational>,
    /// `achieved_eps <= eps_target`, when a target was given.
    pub pass: Option<bool>,
}

/// Exhaustive-pairs threshold: all equal-size index pairs are checked when
/// `2^n` stays at or below this.
const EXHAUSTIVE_SUBSET_LIMIT: u64 = 1 << 12;

/// Measures the indistinguishability of `f` and checks the path-amplification
/// bounds. For `n` beyond the exhaustive threshold only deletion pairs plus
/// `sample_pairs` random pairs per size are checked, and the report says so.
pub fn verify_osi<R: Rng + ?Sized>(
    f: &FiniteDist<ValueSet>,
    eps_target: Option<Rational>,
    sampler: Option<(&mut R, usize)>,
) -> Result<OsiReport> {
    let n = common_size(f)?;
    if n < 2 {
        return Err(CoreError::BadParam("need sets of size >= 2".into()));
    }
    let deletions: Vec<FiniteDist<ValueSet>> = (1..=n)
        .map(|i| deletion_marginal(f, i))
        .collect::<Result<Vec<_>>>()?;
    let mut max_deletion_tv = Rational::from_integer(0.into());
    let mut max_deletion_pair = (1, 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let tv = deletions[i].tv_distance(&deletions[j]);
            if tv > max_deletion_tv {
                max_deletion_tv = tv;
                max_deletion_pair = (i + 1, j + 1);
            }
        }
    }

    let exhaustive = (1u64 << n.min(63)) <= EXHAUSTIVE_SUBSET_LIMIT;
    let mut pairs: Vec<(BTreeSet<usize>, BTreeSet<usize>)> = Vec::new();
    if exhaustive {
        for k in 1..n {
            let subsets = k_subsets(n, k);
            for a in 0..subsets.len() {
                for b in (a + 1)..subsets.len() {
                    pairs.push((subsets[a].clone(), subsets[b].clone()));
                }
            }
        }
    } else {
        for i in 1..=n {
            for j in (i + 1)..=n {
                let li: BTreeSet<usize> = (1..=n).filter(|&x| x != i).collect();
                let lj: BTreeSet<usize> = (1..=n).filter(|&x| x != j).collect();
                pairs.push((li, lj));
            }
        }
        if let Some((rng, count)) = sampler {
            for _ in 0..count {
                let k = rng.gen_range(1..n);
                let a = random_subset(n, k, rng);
                let b = random_subset(n, k, rng);
                if a != b {
                    pairs.push((a, b));
                }
            }
        }
    }

    let mut max_subset_tv = max_deletion_tv.clone();
    let mut max_subset_pair = (
        (1..=n).filter(|&x| x != max_deletion_pair.0).collect(),
        (1..=n).filter(|&x| x != max_deletion_pair.1).collect(),
    );
    let mut path_bound_ok = true;
    for (a, b) in &pairs {
        let tv = subset_marginal(f, a)?.tv_distance(&subset_marginal(f, b)?);
        let path = index_path(a, b)?;
        let steps = Rational::from_integer((path.steps() as u64).into());
        if tv > steps * &max_deletion_tv {
            path_bound_ok = false;
        }
        if tv > max_subset_tv {
            max_subset_tv = tv;
            max_subset_pair = (a.clone(), b.clone());
        }
    }
    let nn = Rational::from_integer(((n * n) as u64).into());
    let square_bound_ok = max_subset_tv <= nn * &max_deletion_tv;
    let achieved_eps = max_subset_tv.clone();
    let pass = eps_target.as_ref().map(|t| &achieved_eps <= t);
    Ok(OsiReport {
        n,
        max_deletion_tv,
        max_deletion_pair,
        max_subset_tv,
        max_subset_pair,
        exhaustive,
        pairs_checked: pairs.len(),
        path_bound_ok,
        square_bound_ok,
        achieved_eps,
        eps_target,
        pass,
    })
}

/// Largest TV distance over all equal-size index-set marginal pairs; the
/// drift analyses use this as their `eps`.
pub fn max_subset_tv(f: &FiniteDist<ValueSet>) -> Result<Rational> {
    let report = verify_osi::<rand::rngs::ThreadRng>(f, None, None)?;
    if !report.exhaustive {
        return Err(CoreError::BadParam(
            "set size too large for an exhaustive subset scan".into(),
        ));
    }
    Ok(report.max_subset_tv)
}

fn k_subsets(n: usize, k: usize) -> Vec<BTreeSet<usize>> {
    use itertools::Itertools;
    (1..=n).combinations(k).map(BTreeSet::from_iter).collect()
}

fn random_subset<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> BTreeSet<usize> {
    use rand::seq::SliceRandom;
    let mut idx: Vec<usize> = (1..=n).collect();
    idx.shuffle(rng);
    idx.truncate(k);
    BTreeSet::from_iter(idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};
    use rand::rngs::ThreadRng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn no_sampler() -> Option<(&'static mut ThreadRng, usize)> {
        None
    }

    #[test]
    fn value_set_validation() {
        assert!(ValueSet::new(vec![1, 2, 5], 5).is_ok());
        assert!(ValueSet::new(vec![1, 1, 5], 5).is_err());
        assert!(ValueSet::new(vec![0, 2], 5).is_err());
        assert!(ValueSet::new(vec![1, 6], 5).is_err());
        assert!(ValueSet::new(vec![], 5).is_err());
    }

    #[test]
    fn gap_value_bijection() {
        let s = ValueSet::new(vec![3, 10, 14], 14).unwrap();
        let g = s.gaps();
        assert_eq!(g.gaps(), &[3, 7, 4]);
        assert_eq!(g.to_value_set().unwrap(), s);
    }

    #[test]
    fn pairs_construction_and_deletion_tv() {
        let f = build_osi_pairs(101).unwrap();
        assert_eq!(f.support_size(), 100);
        assert_eq!(
            f.prob(&ValueSet::new(vec![7, 8], 101).unwrap()),
            rat(1, 100)
        );
        let d1 = deletion_marginal(&f, 1).unwrap();
        let d2 = deletion_marginal(&f, 2).unwrap();
        assert_eq!(d1.tv_distance(&d2), rat(1, 100));
    }

    #[test]
    fn pairs_boundary_n2() {
        let f = build_osi_pairs(2).unwrap();
        assert_eq!(f.support_size(), 1);
        let d1 = deletion_marginal(&f, 1).unwrap();
        let d2 = deletion_marginal(&f, 2).unwrap();
        assert_eq!(d1.tv_distance(&d2), rat_int(1));
    }

    #[test]
    fn triples_enumerate_constraints() {
        // lmax = 1, N = 5: only i = 1 fits -> the single set {1, 3, 5}.
        let f = build_osi_triples(1, 5).unwrap();
        assert_eq!(f.support_size(), 1);
        assert_eq!(f.prob(&ValueSet::new(vec![1, 3, 5], 5).unwrap()), rat_int(1));
        // lmax = 2, N = 9: l = 1 gives i <= 5, l = 2 gives i = 1.
        let f = build_osi_triples(2, 9).unwrap();
        assert_eq!(f.support_size(), 6);
        assert_eq!(f.prob(&ValueSet::new(vec![1, 5, 9], 9).unwrap()), rat(1, 6));
        assert_eq!(f.prob(&ValueSet::new(vec![5, 7, 9], 9).unwrap()), rat(1, 6));
    }

    #[test]
    fn triples_too_tight_bound_errors() {
        assert!(build_osi_triples(1, 4).is_err());
    }

    #[test]
    fn general_base_case_matches_pairs() {
        let params = OsiParams::new(2, rat_int(2), 100).unwrap();
        let f = build_osi_general(&params, &EnumBudget::default()).unwrap();
        let sets = gaps_to_sets(&f).unwrap();
        let pairs = build_osi_pairs(101).unwrap();
        // same value lists; the pair construction carries the loose bound N
        let relaxed = pairs.pushforward(|s| ValueSet::tight(s.values().to_vec()).unwrap());
        assert_eq!(sets, relaxed);
    }

    #[test]
    fn general_recursion_stays_within_hand_bound() {
        // n = 3, C = 2, T1 = 4: exponents {t, t+1} with t <= 4, so values
        // stay at or below 4 + 2^4 + 2^5.
        let params = OsiParams::new(3, rat_int(2), 4).unwrap();
        let f = build_osi_general(&params, &EnumBudget::default()).unwrap();
        let max_realized = f
            .support()
            .map(|g| g.gaps().iter().sum::<u64>())
            .max()
            .unwrap();
        assert_eq!(max_realized, 4 + 16 + 32);
        for g in f.support() {
            assert_eq!(g.len(), 3);
            assert!(g.gaps()[0] <= 4);
        }
    }

    #[test]
    fn general_sampler_agrees_with_support() {
        let params = OsiParams::new(3, rat_int(2), 4).unwrap();
        let f = build_osi_general(&params, &EnumBudget::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let g = sample_osi_general(&params, &mut rng).unwrap();
            assert!(f.prob(&g) > rat_int(0), "sampled {g:?} outside support");
        }
    }

    #[test]
    fn deletion_marginal_merges_retightened_bounds() {
        let f = FiniteDist::uniform([
            ValueSet::new(vec![1, 5, 7], 10).unwrap(),
            ValueSet::new(vec![1, 5, 9], 10).unwrap(),
        ])
        .unwrap();
        let d3 = deletion_marginal(&f, 3).unwrap();
        assert_eq!(d3.support_size(), 1);
        assert_eq!(d3.prob(&ValueSet::tight(vec![1, 5]).unwrap()), rat_int(1));
    }

    #[test]
    fn subset_marginal_picks_ranks() {
        let f = build_osi_triples(2, 9).unwrap();
        let m = subset_marginal(&f, &BTreeSet::from([1, 3])).unwrap();
        // {1, 9} arises only from the l = 2 triple {1, 5, 9}
        assert_eq!(m.prob(&ValueSet::tight(vec![1, 9]).unwrap()), rat(1, 6));
        assert_eq!(m.prob(&ValueSet::tight(vec![5, 9]).unwrap()), rat(1, 6));
        assert_eq!(m.support_size(), 6);
    }

    #[test]
    fn index_path_example() {
        let p = index_path(&BTreeSet::from([1, 3]), &BTreeSet::from([2, 3])).unwrap();
        assert_eq!(p.from_left, vec![BTreeSet::from([1, 3])]);
        assert_eq!(
            p.from_right,
            vec![BTreeSet::from([2, 3]), BTreeSet::from([1, 3])]
        );
        assert_eq!(p.steps(), 1);
        assert_eq!(p.from_left.last(), p.from_right.last());
    }

    #[test]
    fn index_path_longer() {
        let p = index_path(&BTreeSet::from([2, 5]), &BTreeSet::from([3, 4])).unwrap();
        assert_eq!(p.from_left.last(), p.from_right.last());
        for side in [&p.from_left, &p.from_right] {
            for w in side.windows(2) {
                let a: Vec<_> = w[0].iter().collect();
                let b: Vec<_> = w[1].iter().collect();
                let diffs = a.iter().zip(&b).filter(|(x, y)| x != y).count();
                assert_eq!(diffs, 1);
            }
        }
        assert!(p.steps() <= 5 * 5);
    }

    #[test]
    fn verify_osi_pairs_report() {
        let f = build_osi_pairs(21).unwrap();
        let report = verify_osi(&f, Some(rat(1, 10)), no_sampler()).unwrap();
        assert_eq!(report.max_deletion_tv, rat(1, 20));
        assert_eq!(report.max_subset_tv, rat(1, 20));
        assert!(report.exhaustive);
        assert!(report.path_bound_ok);
        assert!(report.square_bound_ok);
        assert_eq!(report.pass, Some(true));
    }

    #[test]
    fn verify_osi_triples_bounds() {
        let f = build_osi_triples(3, 64).unwrap();
        let report = verify_osi(&f, None, no_sampler()).unwrap();
        assert!(report.exhaustive);
        assert!(report.path_bound_ok);
        assert!(report.square_bound_ok);
        assert!(report.max_subset_tv >= report.max_deletion_tv);
    }

    #[test]
    fn verify_osi_flags_miss() {
        let f = build_osi_pairs(2).unwrap();
        let report = verify_osi(&f, Some(rat(1, 2)), no_sampler()).unwrap();
        assert_eq!(report.achieved_eps, rat_int(1));
        assert_eq!(report.pass, Some(false));
    }
}
