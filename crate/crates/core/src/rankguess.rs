//! Perturbed rank guessing and the recursive cardinal guesser.
//!
//! One of `n` secret values is deleted; an adversary nudges every surviving
//! value by -1, 0, or +1 and shows the result. The guesser names the index
//! of the deleted value and is paid `1/p_i` on success, so value-oblivious
//! play scores exactly 1 and anything above 1 is advantage extracted from
//! the numbers themselves.
//!
//! Values are `u128`: the level-6 gap generators overflow `u64`.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::FiniteDist;
use crate::error::{CoreError, Result};
use crate::rational::{
    clamp01, floor_log2, format_ratio, log2_q32, parse_ratio, rat, Rational,
};

/// Exp-Gaps level constants.
pub const LEVELS: [u128; 6] = [2, 4, 16, 225, 42374, 1 << 21];

/// Deletions with indices above this are refused: the evaluator enumerates
/// `3^(n-1)` perturbations per deletion.
pub const MAX_WORST_CASE_N: usize = 9;

/// A guessing instance: strictly increasing values with consecutive gaps of
/// at least 20, a bound the adversary's perturbations are clamped to, and a
/// strictly positive deletion distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankGuessInstance {
    values: Vec<u128>,
    bound: u128,
    probs: Vec<Rational>,
}

impl RankGuessInstance {
    pub fn new(values: Vec<u128>, bound: u128, probs: Vec<Rational>) -> Result<Self> {
        if values.len() < 2 {
            return Err(CoreError::TooFewFaces {
                n: values.len(),
                min: 2,
            });
        }
        if probs.len() != values.len() {
            return Err(CoreError::BadLength {
                expected: values.len(),
                found: probs.len(),
            });
        }
        if values[0] == 0 {
            return Err(CoreError::BadParam("values must be positive".into()));
        }
        for w in values.windows(2) {
            if w[1] < w[0] + 20 {
                return Err(CoreError::BadParam(format!(
                    "gap {} -> {} below 20",
                    w[0], w[1]
                )));
            }
        }
        if *values.last().unwrap() > bound {
            return Err(CoreError::BadParam(format!(
                "largest value exceeds bound {bound}"
            )));
        }
        if probs.iter().any(|p| p <= &Rational::zero()) {
            return Err(CoreError::InvalidDistribution(
                "deletion probabilities must be strictly positive".into(),
            ));
        }
        let total: Rational = probs.iter().cloned().sum();
        if !total.is_one() {
            return Err(CoreError::InvalidDistribution(format!(
                "deletion probabilities sum to {total}"
            )));
        }
        Ok(RankGuessInstance {
            values,
            bound,
            probs,
        })
    }

    pub fn uniform(values: Vec<u128>, bound: u128) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(CoreError::EmptyRange);
        }
        let p = Rational::new(1.into(), (n as u64).into());
        Self::new(values, bound, vec![p; n])
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[u128] {
        &self.values
    }

    pub fn bound(&self) -> u128 {
        self.bound
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    /// Consecutive gaps `d_i = s_{i+1} - s_i`.
    pub fn gaps(&self) -> Vec<u128> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "values": self.values.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "bound": self.bound.to_string(),
            "probs": self.probs.iter().map(format_ratio).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Dto {
            values: Vec<String>,
            bound: String,
            probs: Vec<String>,
        }
        let dto: Dto = serde_json::from_value(v.clone())
            .map_err(|e| CoreError::BadParam(format!("bad instance json: {e}")))?;
        let parse_u128 = |s: &String| {
            s.parse::<u128>()
                .map_err(|e| CoreError::BadParam(format!("bad integer {s}: {e}")))
        };
        let values = dto.values.iter().map(parse_u128).collect::<Result<_>>()?;
        let bound = parse_u128(&dto.bound)?;
        let probs = dto
            .probs
            .iter()
            .map(|s| parse_ratio(s))
            .collect::<Result<_>>()?;
        Self::new(values, bound, probs)
    }
}

/// A guessing strategy: observed sorted values plus the bound, out comes a
/// distribution over the deleted index in `[n]`.
pub trait GuessPolicy {
    fn guess(&self, observed: &[u128], bound: u128) -> Result<FiniteDist<usize>>;
}

fn check_observed(observed: &[u128]) -> Result<()> {
    if observed.is_empty() {
        return Err(CoreError::EmptyRange);
    }
    if observed.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CoreError::BadParam(format!(
            "observed values must be strictly increasing: {observed:?}"
        )));
    }
    Ok(())
}

/// Two faces: guess "the hidden value is the larger one" with probability
/// `observed / bound`.
pub fn warmup2(observed: u128, bound: u128) -> Result<FiniteDist<usize>> {
    if observed == 0 || observed > bound {
        return Err(CoreError::BadParam(format!(
            "need 1 <= observed <= bound, got {observed} / {bound}"
        )));
    }
    let p1 = Rational::new(observed.into(), bound.into());
    FiniteDist::from_pairs([(1usize, p1.clone()), (2usize, Rational::one() - p1)])
}

/// Three faces: guess "the hidden value is the middle one" with probability
/// `log2(gap) / log2(bound)`, split the rest evenly between the ends. The
/// probability is clamped because the recursion feeds this base case
/// floor-log vectors that need not respect the bound's scale.
pub fn warmup3(observed: (u128, u128), bound: u128) -> Result<FiniteDist<usize>> {
    let (a, b) = observed;
    if a >= b {
        return Err(CoreError::BadParam(format!(
            "need observed_1 < observed_2, got {a} >= {b}"
        )));
    }
    if bound < 2 {
        return Err(CoreError::BadParam(format!("need bound >= 2, got {bound}")));
    }
    let p2 = clamp01(log2_q32(b - a)? / log2_q32(bound)?);
    let side = (Rational::one() - &p2) / rat(2, 1);
    FiniteDist::from_pairs([(1usize, side.clone()), (2usize, p2), (3usize, side)])
}

fn observed_gaps(observed: &[u128]) -> Vec<u128> {
    observed.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Pick a random adjacent pair of observed gaps; a sharp rise points the
/// guess just past the pair, a sharp drop just before its end, and a flat
/// pair leaves a coin flip between the pair's ends.
pub fn mono_gaps(observed: &[u128]) -> Result<FiniteDist<usize>> {
    check_observed(observed)?;
    let n = observed.len() + 1;
    if n < 4 {
        return Err(CoreError::TooFewFaces { n, min: 4 });
    }
    let g = observed_gaps(observed);
    let coef = Rational::new(1.into(), ((n - 3) as u64).into());
    let mut parts = Vec::with_capacity(n - 3);
    for i in 1..=(n - 3) {
        let (lo, hi) = (g[i - 1], g[i]);
        let branch = if hi > lo && hi - lo > 4 {
            FiniteDist::from_pairs([(i + 2, rat(2, 3)), (i, rat(1, 3))])?
        } else if lo > hi && lo - hi > 4 {
            FiniteDist::from_pairs([(i + 1, rat(2, 3)), (i + 3, rat(1, 3))])?
        } else {
            FiniteDist::uniform([i, i + 3])?
        };
        parts.push((coef.clone(), branch));
    }
    FiniteDist::mixture(parts)
}

fn strictly_increasing(xs: &[u128]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

fn strictly_decreasing(xs: &[u128]) -> bool {
    xs.windows(2).all(|w| w[0] > w[1])
}

/// `g >= l * h + 2l + 2`, with overflow treated as an unreachable threshold.
fn exp_condition(g: u128, h: u128, l: u128) -> bool {
    l.checked_mul(h)
        .and_then(|x| x.checked_add(2 * l + 2))
        .is_some_and(|rhs| g >= rhs)
}

/// Guess uniformly over the candidate set `I`: the two ends nearest the
/// deletion-insensitive positions plus every interior position whose gap
/// out-scales its neighbor by the level constant.
pub fn exp_gaps(level: usize, observed: &[u128]) -> Result<FiniteDist<usize>> {
    if !(1..=LEVELS.len()).contains(&level) {
        return Err(CoreError::BadLevel {
            level,
            max: LEVELS.len(),
        });
    }
    check_observed(observed)?;
    let n = observed.len() + 1;
    if n < 3 {
        return Err(CoreError::TooFewFaces { n, min: 3 });
    }
    let l = LEVELS[level - 1];
    let g = observed_gaps(observed);
    let mut i_set = BTreeSet::new();
    i_set.insert(1);
    i_set.insert(n);
    if strictly_decreasing(&g) && g.len() >= 2 {
        i_set.insert(n - 1);
        for i in 2..=(n - 2) {
            if exp_condition(g[i - 2], g[i - 1], l) {
                i_set.insert(i);
            }
        }
    } else {
        i_set.insert(2);
        if strictly_increasing(&g) {
            for i in 3..=(n - 1) {
                if exp_condition(g[i - 2], g[i - 3], l) {
                    i_set.insert(i);
                }
            }
        }
    }
    FiniteDist::uniform(i_set)
}

/// The recursive guesser: mostly Mono-Gaps, a geometrically vanishing slice
/// of each Exp-Gaps level, and a final sliver that recurses on the floor
/// base-2 logarithms of the gaps (one fewer face, exponentially smaller
/// bound). Three faces fall back to the log-gap warm-up.
pub fn guess_recursive(observed: &[u128], bound: u128) -> Result<FiniteDist<usize>> {
    check_observed(observed)?;
    let n = observed.len() + 1;
    if n < 3 {
        return Err(CoreError::TooFewFaces { n, min: 3 });
    }
    if *observed.last().unwrap() > bound {
        return Err(CoreError::BadParam(format!(
            "observed values exceed the bound {bound}"
        )));
    }
    if n == 3 {
        return warmup3((observed[0], observed[1]), bound);
    }
    let q = Rational::new(1.into(), ((6 * n) as u64).into());
    let mut parts = Vec::with_capacity(8);
    parts.push((Rational::one() - &q, mono_gaps(observed)?));
    let mut q_pow = q.clone();
    for level in 1..=LEVELS.len() {
        let next = &q_pow * &q;
        parts.push((&q_pow - &next, exp_gaps(level, observed)?));
        q_pow = next;
    }
    let g = observed_gaps(observed);
    let logs: Vec<u128> = g.iter().map(|&x| u128::from(floor_log2(x))).collect();
    let tail = if strictly_increasing(&logs) {
        guess_recursive(&logs, u128::from(floor_log2(bound)))?.pushforward(|&j| j + 1)
    } else if strictly_decreasing(&logs) {
        let reversed: Vec<u128> = logs.iter().rev().copied().collect();
        guess_recursive(&reversed, u128::from(floor_log2(bound)))?.pushforward(|&j| n - j)
    } else {
        FiniteDist::uniform(1..=n)?
    };
    parts.push((q_pow, tail));
    FiniteDist::mixture(parts)
}

fn scale20(values: &[u128]) -> Result<Vec<u128>> {
    values
        .iter()
        .map(|&v| {
            v.checked_mul(20)
                .ok_or_else(|| CoreError::Overflow("value * 20 exceeds u128".into()))
        })
        .collect()
}

/// Plays the die game through the rank guesser: multiplying everything by 20
/// manufactures the minimum-gap condition without changing the order.
pub fn die_guess_policy(observed: &[u128], bound: u128) -> Result<FiniteDist<usize>> {
    check_observed(observed)?;
    let scaled = scale20(observed)?;
    let scaled_bound = bound
        .checked_mul(20)
        .ok_or_else(|| CoreError::Overflow("bound * 20 exceeds u128".into()))?;
    if observed.len() == 1 {
        warmup2(scaled[0], scaled_bound)
    } else {
        guess_recursive(&scaled, scaled_bound)
    }
}

/// Reduces an `n`-face die to a `c`-face game played on the largest `c - 1`
/// visible values: a "smallest" verdict there spreads uniformly over the
/// `n - c + 1` low ranks here, any other verdict maps rank-for-rank.
pub fn face_reduction(c: usize, observed: &[u128], bound: u128) -> Result<FiniteDist<usize>> {
    check_observed(observed)?;
    let n = observed.len() + 1;
    if !(3..=n).contains(&c) {
        return Err(CoreError::BadParam(format!(
            "need 3 <= c <= n, got c = {c}, n = {n}"
        )));
    }
    let top = &observed[n - c..];
    let inner = die_guess_policy(top, bound)?;
    let low = FiniteDist::uniform(1..=(n - c + 1))?;
    let mut parts = Vec::with_capacity(inner.support_size());
    for (&j, w) in inner.iter() {
        let mapped = if j == 1 {
            low.clone()
        } else {
            FiniteDist::point(n - c + j)
        };
        parts.push((w.clone(), mapped));
    }
    FiniteDist::mixture(parts)
}

/// Named policies implementing the trait around the free functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NamedPolicy {
    Warmup2,
    Warmup3,
    MonoGaps,
    ExpGaps(usize),
    Recursive,
    DieGuess,
    FaceReduction(usize),
    /// Uniform over `[n]`; the canonical value-oblivious baseline.
    Uniform,
    /// Always the same index; also value-oblivious.
    Fixed(usize),
}

impl GuessPolicy for NamedPolicy {
    fn guess(&self, observed: &[u128], bound: u128) -> Result<FiniteDist<usize>> {
        let n = observed.len() + 1;
        match *self {
            NamedPolicy::Warmup2 => {
                if observed.len() != 1 {
                    return Err(CoreError::BadLength {
                        expected: 1,
                        found: observed.len(),
                    });
                }
                warmup2(observed[0], bound)
            }
            NamedPolicy::Warmup3 => {
                if observed.len() != 2 {
                    return Err(CoreError::BadLength {
                        expected: 2,
                        found: observed.len(),
                    });
                }
                warmup3((observed[0], observed[1]), bound)
            }
            NamedPolicy::MonoGaps => mono_gaps(observed),
            NamedPolicy::ExpGaps(level) => exp_gaps(level, observed),
            NamedPolicy::Recursive => guess_recursive(observed, bound),
            NamedPolicy::DieGuess => die_guess_policy(observed, bound),
            NamedPolicy::FaceReduction(c) => face_reduction(c, observed, bound),
            NamedPolicy::Uniform => FiniteDist::uniform(1..=n),
            NamedPolicy::Fixed(i) => {
                if i == 0 || i > n {
                    return Err(CoreError::IndexOutOfRange { index: i, len: n });
                }
                Ok(FiniteDist::point(i))
            }
        }
    }
}

fn perturbed(base: &[u128], shifts: &[i8], bound: u128) -> Vec<u128> {
    base.iter()
        .zip(shifts)
        .map(|(&v, &e)| match e {
            -1 => (v - 1).max(1),
            1 => v.saturating_add(1).min(bound),
            _ => v,
        })
        .collect()
}

/// Exact worst-case expected reward: the adversary sees which value was
/// deleted and picks, independently per deletion, the perturbation that
/// minimizes the chance the policy names it. The `1/p_i` payoff cancels the
/// deletion probability, so the result never depends on `p`.
pub fn worst_case_expected_reward(
    instance: &RankGuessInstance,
    policy: &dyn GuessPolicy,
) -> Result<Rational> {
    worst_case_with_cap(instance, policy, MAX_WORST_CASE_N)
}

pub fn worst_case_with_cap(
    instance: &RankGuessInstance,
    policy: &dyn GuessPolicy,
    cap: usize,
) -> Result<Rational> {
    let n = instance.n();
    if n > cap {
        return Err(CoreError::BudgetExceeded {
            needed: 3u128.saturating_pow((n - 1) as u32),
            budget: 3u64.saturating_pow((cap - 1) as u32),
        });
    }
    let mut total = Rational::zero();
    for i in 1..=n {
        let base: Vec<u128> = instance
            .values
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx + 1 != i)
            .map(|(_, &v)| v)
            .collect();
        let mut worst: Option<Rational> = None;
        for shifts in (0..base.len())
            .map(|_| [-1i8, 0, 1])
            .multi_cartesian_product()
        {
            let obs = perturbed(&base, &shifts, instance.bound);
            debug_assert!(strictly_increasing(&obs));
            let hit = policy.guess(&obs, instance.bound)?.prob(&i);
            if worst.as_ref().is_none_or(|w| &hit < w) {
                worst = Some(hit);
            }
        }
        let worst = worst.expect("at least the zero perturbation");
        // the payoff 1/p_i cancels the deletion probability p_i exactly
        total += &instance.probs[i - 1] * worst * instance.probs[i - 1].recip();
    }
    Ok(total)
}

/// Winning probability in the plain die game: uniform deletion, no
/// perturbation, guess must name the hidden index.
pub fn die_win_probability(
    values: &[u128],
    bound: u128,
    policy: &dyn GuessPolicy,
) -> Result<Rational> {
    check_observed(values)?;
    if values[0] == 0 || *values.last().unwrap() > bound {
        return Err(CoreError::BadParam(
            "die values must lie in [1, bound]".into(),
        ));
    }
    let n = values.len();
    if n < 2 {
        return Err(CoreError::TooFewFaces { n, min: 2 });
    }
    let uniform = Rational::new(1.into(), (n as u64).into());
    let mut total = Rational::zero();
    for i in 1..=n {
        let obs: Vec<u128> = values
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx + 1 != i)
            .map(|(_, &v)| v)
            .collect();
        total += &uniform * policy.guess(&obs, bound)?.prob(&i);
    }
    Ok(total)
}

/// Strictness is deliberate: tied gaps are neither increasing nor
/// decreasing and route to fallback branches everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Neither,
}

pub fn gap_monotonicity(d: &[u128]) -> Monotonicity {
    if d.len() >= 2 && strictly_increasing(d) {
        Monotonicity::Increasing
    } else if d.len() >= 2 && strictly_decreasing(d) {
        Monotonicity::Decreasing
    } else if d.len() < 2 {
        Monotonicity::Increasing
    } else {
        Monotonicity::Neither
    }
}

/// Level conditions on the instance gap vector. Level 0 is the
/// Fibonacci-like condition (monotone, and each gap no smaller than the sum
/// of the previous two minus 8); level `l >= 1` demands growth by the
/// factor `L_l` at every step.
pub fn satisfies_level(d: &[u128], level: usize) -> Result<bool> {
    if level > LEVELS.len() {
        return Err(CoreError::BadLevel {
            level,
            max: LEVELS.len(),
        });
    }
    if d.len() < 2 {
        return Ok(true);
    }
    let inc = strictly_increasing(d);
    let dec = strictly_decreasing(d);
    if level == 0 {
        if inc {
            Ok(d.windows(3).all(|w| w[0] + w[1] <= w[2] + 8))
        } else if dec {
            Ok(d.windows(3).all(|w| w[0] + 8 >= w[1] + w[2]))
        } else {
            Ok(false)
        }
    } else {
        let l = LEVELS[level - 1];
        let up = d
            .windows(2)
            .all(|w| w[0].checked_mul(l).is_some_and(|x| w[1] >= x));
        let down = d
            .windows(2)
            .all(|w| w[1].checked_mul(l).is_some_and(|x| w[0] >= x));
        Ok(up || down)
    }
}

/// Random valid instance: modest gaps at least 20, occasionally sorted or
/// doubled to hit the monotone classes, values well under a fixed bound.
pub fn random_instance<R: Rng + ?Sized>(
    n: usize,
    bound: u128,
    rng: &mut R,
) -> Result<RankGuessInstance> {
    if n < 2 {
        return Err(CoreError::TooFewFaces { n, min: 2 });
    }
    let span = bound / (2 * n as u128);
    if span < 21 {
        return Err(CoreError::BadParam("bound too small for n gaps".into()));
    }
    let mut gaps: Vec<u128> = (0..n - 1).map(|_| rng.gen_range(20..=span)).collect();
    match rng.gen_range(0..4u8) {
        1 => gaps.sort_unstable(),
        2 => {
            gaps.sort_unstable();
            gaps.reverse();
        }
        3 => {
            // roughly doubling gaps: lands in the level-1-satisfying class
            let mut g = rng.gen_range(20..=40u128);
            for gap in gaps.iter_mut() {
                *gap = g;
                g = 2 * g + rng.gen_range(0..=4u128);
            }
        }
        _ => {}
    }
    let mut values = Vec::with_capacity(n);
    let mut acc = rng.gen_range(1..=span);
    values.push(acc);
    for g in gaps {
        acc += g;
        values.push(acc);
    }
    RankGuessInstance::uniform(values, bound)
}

/// Instance whose gap vector either satisfies the level-`l` condition
/// (`satisfy`), or satisfies level-`l - 1` while violating level-`l`.
pub fn level_instance<R: Rng + ?Sized>(
    n: usize,
    level: usize,
    satisfy: bool,
    rng: &mut R,
) -> Result<RankGuessInstance> {
    if n < 4 {
        return Err(CoreError::TooFewFaces { n, min: 4 });
    }
    if !(1..=LEVELS.len()).contains(&level) {
        return Err(CoreError::BadLevel {
            level,
            max: LEVELS.len(),
        });
    }
    let mut gaps: Vec<u128> = Vec::with_capacity(n - 1);
    if satisfy {
        let l = LEVELS[level - 1];
        let mut g: u128 = 20 + rng.gen_range(0..=5u128);
        for _ in 0..n - 1 {
            gaps.push(g);
            g = l * g + rng.gen_range(0..=g);
        }
    } else if level == 1 {
        // Fibonacci-like growth, margin 5: satisfies level 0 and stays under
        // doubling, while adjacent gap differences of at least 5 keep every
        // post-deletion observation strictly increasing (a +-1 perturbation
        // of each value moves adjacent observed gap differences by at most 4).
        gaps.push(20 + rng.gen_range(0..=5u128));
        gaps.push(gaps[0] + 5 + rng.gen_range(0..=5u128));
        for i in 2..n - 1 {
            let margin = 5 + rng.gen_range(0..=5u128);
            gaps.push(gaps[i - 2] + gaps[i - 1] + margin);
        }
    } else {
        let l = LEVELS[level - 2];
        let mut g: u128 = 20 + rng.gen_range(0..=5u128);
        for _ in 0..n - 1 {
            gaps.push(g);
            g = l * g + rng.gen_range(0..=g);
        }
    }
    debug_assert!(satisfies_level(&gaps, if satisfy { level } else { level - 1 }).unwrap());
    debug_assert_eq!(satisfies_level(&gaps, level).unwrap(), satisfy);
    let mut values = Vec::with_capacity(n);
    let mut acc = 1 + rng.gen_range(0..=100u128);
    values.push(acc);
    for &g in &gaps {
        acc += g;
        values.push(acc);
    }
    RankGuessInstance::uniform(values, acc + 20)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat_int, to_f64};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn warmup2_basics() {
        let d = warmup2(100, 100).unwrap();
        assert_eq!(d.prob(&1), rat_int(1));
        let d = warmup2(50, 100).unwrap();
        assert_eq!(d.prob(&1), rat(1, 2));
        assert_eq!(d.prob(&2), rat(1, 2));
        assert!(warmup2(0, 100).is_err());
        assert!(warmup2(101, 100).is_err());
    }

    #[test]
    fn warmup2_worst_case_closed_form() {
        let inst = RankGuessInstance::uniform(vec![10, 40], 100).unwrap();
        let wcr = worst_case_expected_reward(&inst, &NamedPolicy::Warmup2).unwrap();
        assert_eq!(wcr, rat(128, 100));
        assert_eq!(wcr, rat_int(1) + rat(40 - 10 - 2, 100));
    }

    #[test]
    fn warmup3_boundaries() {
        let d = warmup3((10, 11), 1024).unwrap();
        assert_eq!(d.prob(&2), Rational::zero());
        assert_eq!(d.prob(&1), rat(1, 2));
        assert_eq!(d.prob(&3), rat(1, 2));
        let d = warmup3((1, 1025), 1024).unwrap();
        assert_eq!(d.prob(&2), rat_int(1));
    }

    #[test]
    fn warmup3_worst_case_example() {
        let inst = RankGuessInstance::uniform(vec![10, 40, 500], 1024).unwrap();
        let wcr = worst_case_expected_reward(&inst, &NamedPolicy::Warmup3).unwrap();
        let ten = log2_q32(1024).unwrap();
        let expected = rat(1, 2) * (rat_int(1) - log2_q32(462).unwrap() / &ten)
            + log2_q32(488).unwrap() / &ten
            + rat(1, 2) * (rat_int(1) - log2_q32(32).unwrap() / &ten);
        assert_eq!(wcr, expected);
        let float = 0.5 * (1.0 - (462f64).log2() / 10.0)
            + (488f64).log2() / 10.0
            + 0.5 * (1.0 - 5.0 / 10.0);
        assert!((to_f64(&wcr) - float).abs() < 1e-8);
    }

    #[test]
    fn mono_gaps_branch_examples() {
        let d = mono_gaps(&[100, 110, 210]).unwrap();
        assert_eq!(d.prob(&3), rat(2, 3));
        assert_eq!(d.prob(&1), rat(1, 3));
        let d = mono_gaps(&[100, 200, 210]).unwrap();
        assert_eq!(d.prob(&2), rat(2, 3));
        assert_eq!(d.prob(&4), rat(1, 3));
        let d = mono_gaps(&[100, 150, 202]).unwrap();
        assert_eq!(d.prob(&1), rat(1, 2));
        assert_eq!(d.prob(&4), rat(1, 2));
        assert!(mono_gaps(&[10, 30]).is_err());
    }

    #[test]
    fn exp_gaps_traces() {
        // increasing gaps (20, 100, 10000) with level 1: both interior
        // positions qualify
        let d = exp_gaps(1, &[100, 120, 220, 10220]).unwrap();
        for i in 1..=5 {
            assert_eq!(d.prob(&i), rat(1, 5));
        }
        // non-monotone gaps never grow the base set
        let d = exp_gaps(1, &[100, 130, 150, 190]).unwrap();
        assert_eq!(d.support().copied().collect::<Vec<_>>(), vec![1, 2, 5]);
        // level 6 threshold not met
        let d = exp_gaps(6, &[100, 120, 220]).unwrap();
        assert_eq!(d.support().copied().collect::<Vec<_>>(), vec![1, 2, 4]);
    }

    #[test]
    fn exp_gaps_decreasing_base_set() {
        // gaps (10000, 40, 20): strictly decreasing; position 2 qualifies at
        // level 1 (10000 >= 2 * 40 + 6) but position 3 does not (40 < 46)
        let d = exp_gaps(1, &[100, 10100, 10140, 10160]).unwrap();
        let support: Vec<usize> = d.support().copied().collect();
        assert_eq!(support, vec![1, 2, 4, 5]);
    }

    #[test]
    fn guess_recursive_composition() {
        // base case is the warm-up
        assert_eq!(
            guess_recursive(&[10, 40], 1024).unwrap(),
            warmup3((10, 40), 1024).unwrap()
        );
        // n = 4: mixture weights reproduce the explicit construction
        let obs = [100u128, 140, 1000];
        let q = rat(1, 24);
        let mut parts = vec![(rat_int(1) - &q, mono_gaps(&obs).unwrap())];
        let mut q_pow = q.clone();
        for level in 1..=6 {
            let next = &q_pow * &q;
            parts.push((&q_pow - &next, exp_gaps(level, &obs).unwrap()));
            q_pow = next;
        }
        // gap logs (5, 9) are strictly increasing: recurse into warmup3
        let tail = warmup3((5, 9), 63).unwrap().pushforward(|&j| j + 1);
        parts.push((q_pow, tail));
        let expected = FiniteDist::mixture(parts).unwrap();
        assert_eq!(guess_recursive(&obs, u128::pow(2, 63)).unwrap(), expected);
    }

    #[test]
    fn guess_recursive_tied_logs_fall_back() {
        // gaps 32 and 40 share floor-log 5: the recursion branch is uniform
        let obs = [100u128, 132, 172];
        let d = guess_recursive(&obs, 1 << 20).unwrap();
        let q7 = rat(1, 24).pow(7);
        let mut parts = vec![(rat_int(1) - rat(1, 24), mono_gaps(&obs).unwrap())];
        let mut q_pow = rat(1, 24);
        for level in 1..=6 {
            let next = &q_pow * rat(1, 24);
            parts.push((&q_pow - &next, exp_gaps(level, &obs).unwrap()));
            q_pow = next;
        }
        parts.push((q7, FiniteDist::uniform(1..=4).unwrap()));
        assert_eq!(d, FiniteDist::mixture(parts).unwrap());
    }

    #[test]
    fn die_guess_three_faces_matches_scaled_warmup() {
        assert_eq!(
            die_guess_policy(&[1, 2], 10).unwrap(),
            warmup3((20, 40), 200).unwrap()
        );
    }

    #[test]
    fn face_reduction_full_c_is_die_guess() {
        let obs = [3u128, 50, 90, 1000];
        assert_eq!(
            face_reduction(5, &obs, 5000).unwrap(),
            die_guess_policy(&obs, 5000).unwrap()
        );
    }

    #[test]
    fn face_reduction_spreads_low_mass() {
        let obs = [3u128, 50, 90, 1000];
        let d = face_reduction(3, &obs, 5000).unwrap();
        // the 3-face game sees the largest two values
        let inner = die_guess_policy(&obs[2..], 5000).unwrap();
        let third = inner.prob(&1) / rat_int(3);
        for i in 1..=3 {
            assert_eq!(d.prob(&i), third);
        }
        assert_eq!(d.prob(&4), inner.prob(&2));
        assert_eq!(d.prob(&5), inner.prob(&3));
    }

    #[test]
    fn oblivious_policies_score_exactly_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2usize, 4, 5] {
            let inst = random_instance(n, 1_000_000, &mut rng).unwrap();
            assert_eq!(
                worst_case_expected_reward(&inst, &NamedPolicy::Uniform).unwrap(),
                rat_int(1)
            );
            assert_eq!(
                worst_case_expected_reward(&inst, &NamedPolicy::Fixed(1)).unwrap(),
                rat_int(1)
            );
        }
    }

    #[test]
    fn worst_case_is_p_independent() {
        let values = vec![100u128, 200, 400, 500];
        let a = RankGuessInstance::uniform(values.clone(), 1_000_000).unwrap();
        let b = RankGuessInstance::new(
            values,
            1_000_000,
            vec![rat(1, 2), rat(1, 6), rat(1, 6), rat(1, 6)],
        )
        .unwrap();
        for policy in [NamedPolicy::MonoGaps, NamedPolicy::Recursive] {
            assert_eq!(
                worst_case_expected_reward(&a, &policy).unwrap(),
                worst_case_expected_reward(&b, &policy).unwrap()
            );
        }
    }

    #[test]
    fn mono_gaps_nonmonotone_bound() {
        // gap vector (100, 30, 200) is not monotone
        let inst = RankGuessInstance::uniform(vec![50, 150, 180, 380], 1_000_000).unwrap();
        let wcr = worst_case_expected_reward(&inst, &NamedPolicy::MonoGaps).unwrap();
        assert!(wcr >= rat(4, 3), "got {wcr}");
    }

    #[test]
    fn worst_case_cap_enforced() {
        let values: Vec<u128> = (1..=10).map(|i| i * 100).collect();
        let inst = RankGuessInstance::uniform(values, 10_000).unwrap();
        assert!(matches!(
            worst_case_expected_reward(&inst, &NamedPolicy::Uniform),
            Err(CoreError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn die_win_probability_beats_uniform() {
        let values = vec![1u128, 2, 30, 1000];
        let win = die_win_probability(&values, 2000, &NamedPolicy::DieGuess).unwrap();
        assert!(win >= rat(1, 4), "got {win}");
        let base = die_win_probability(&values, 2000, &NamedPolicy::Uniform).unwrap();
        assert_eq!(base, rat(1, 4));
    }

    #[test]
    fn level_generators_hit_their_classes() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for level in 1..=6 {
            for n in [4usize, 5, 6] {
                let sat = level_instance(n, level, true, &mut rng).unwrap();
                assert!(satisfies_level(&sat.gaps(), level).unwrap());
                let vio = level_instance(n, level, false, &mut rng).unwrap();
                assert!(satisfies_level(&vio.gaps(), level - 1).unwrap());
                assert!(!satisfies_level(&vio.gaps(), level).unwrap());
            }
        }
    }

    #[test]
    fn instance_json_round_trip() {
        let inst = RankGuessInstance::new(
            vec![10, 40, 500],
            1 << 100,
            vec![rat(1, 2), rat(1, 4), rat(1, 4)],
        )
        .unwrap();
        let json = inst.to_json();
        assert_eq!(RankGuessInstance::from_json(&json).unwrap(), inst);
    }
}
