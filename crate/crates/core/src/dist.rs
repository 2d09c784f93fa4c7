//! Finite probability distributions with exact rational weights.
//!
//! `FiniteDist` is the substrate for every construction and every evaluator
//! in this crate: distributions over integers, gap vectors, value sets,
//! permutations, policy actions. All measure-theoretic plumbing (total
//! variation, pushforward, conditioning, products, mixtures) lives here so
//! the domain modules can stay close to their defining formulas.
//!
//! Outcomes are compared through their `Ord` instance, which doubles as the
//! canonical encoding order for serialization. Weights are strictly positive
//! rationals summing to exactly one; zero-weight outcomes are dropped on
//! construction so that distribution equality is plain structural equality.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::error::{CoreError, Result};
use crate::rational::{format_ratio, parse_ratio, Rational};

/// Cap on the number of weighted outcomes an enumerating operation may
/// produce. The default (10^7) keeps worst cases around a minute of work;
/// anything beyond must be sampled instead, explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumBudget(pub u64);

pub const DEFAULT_ENUM_BUDGET: u64 = 10_000_000;

/// Environment variable consulted by `EnumBudget::from_env`.
pub const ENUM_BUDGET_ENV: &str = "ORDLAB_ENUM_BUDGET";

impl Default for EnumBudget {
    fn default() -> Self {
        EnumBudget(DEFAULT_ENUM_BUDGET)
    }
}

impl EnumBudget {
    /// Reads `ORDLAB_ENUM_BUDGET`, falling back to the default on absence or
    /// on an unparsable value.
    pub fn from_env() -> Self {
        match std::env::var(ENUM_BUDGET_ENV) {
            Ok(v) => v.parse::<u64>().map(EnumBudget).unwrap_or_default(),
            Err(_) => EnumBudget::default(),
        }
    }

    pub fn check(&self, needed: u128) -> Result<()> {
        if needed > u128::from(self.0) {
            Err(CoreError::BudgetExceeded {
                needed,
                budget: self.0,
            })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteDist<T: Ord + Clone> {
    weights: BTreeMap<T, Rational>,
}

impl<T: Ord + Clone> FiniteDist<T> {
    /// Builds a distribution from outcome/weight pairs.
    ///
    /// Duplicate outcomes are rejected (merging is the job of `pushforward`),
    /// negative weights are rejected, zero weights are dropped, and the
    /// remaining weights must sum to exactly one.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (T, Rational)>) -> Result<Self> {
        let mut weights = BTreeMap::new();
        let mut total = Rational::zero();
        for (t, w) in pairs {
            if w.is_negative() {
                return Err(CoreError::InvalidDistribution(format!(
                    "negative weight {}",
                    format_ratio(&w)
                )));
            }
            if w.is_zero() {
                continue;
            }
            total += &w;
            if weights.insert(t, w).is_some() {
                return Err(CoreError::InvalidDistribution(
                    "duplicate outcome in support".into(),
                ));
            }
        }
        if weights.is_empty() {
            return Err(CoreError::InvalidDistribution("empty support".into()));
        }
        if !total.is_one() {
            return Err(CoreError::InvalidDistribution(format!(
                "weights sum to {}, not 1",
                format_ratio(&total)
            )));
        }
        Ok(FiniteDist { weights })
    }

    /// Like `from_pairs` but sums the weights of repeated outcomes. Used by
    /// operations that merge fibers (pushforward, mixtures).
    fn accumulate(pairs: impl IntoIterator<Item = (T, Rational)>) -> Result<Self> {
        let mut weights: BTreeMap<T, Rational> = BTreeMap::new();
        let mut total = Rational::zero();
        for (t, w) in pairs {
            if w.is_negative() {
                return Err(CoreError::InvalidDistribution(format!(
                    "negative weight {}",
                    format_ratio(&w)
                )));
            }
            if w.is_zero() {
                continue;
            }
            total += &w;
            *weights.entry(t).or_insert_with(Rational::zero) += w;
        }
        if weights.is_empty() {
            return Err(CoreError::InvalidDistribution("empty support".into()));
        }
        if !total.is_one() {
            return Err(CoreError::InvalidDistribution(format!(
                "weights sum to {}, not 1",
                format_ratio(&total)
            )));
        }
        Ok(FiniteDist { weights })
    }

    pub fn point(t: T) -> Self {
        let mut weights = BTreeMap::new();
        weights.insert(t, Rational::one());
        FiniteDist { weights }
    }

    /// Uniform distribution over the given pairwise-distinct outcomes.
    pub fn uniform(outcomes: impl IntoIterator<Item = T>) -> Result<Self> {
        let items: Vec<T> = outcomes.into_iter().collect();
        if items.is_empty() {
            return Err(CoreError::EmptyRange);
        }
        let w = Rational::new(1.into(), (items.len() as u64).into());
        Self::from_pairs(items.into_iter().map(|t| (t, w.clone())))
    }

    pub fn prob(&self, t: &T) -> Rational {
        self.weights.get(t).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = &T> {
        self.weights.keys()
    }

    pub fn support_size(&self) -> usize {
        self.weights.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, &Rational)> {
        self.weights.iter()
    }

    /// Total variation distance `1/2 * sum_t |p(t) - q(t)|`, exact.
    pub fn tv_distance(&self, other: &Self) -> Rational {
        let mut acc = Rational::zero();
        for (t, p) in &self.weights {
            acc += (p - other.prob(t)).abs();
        }
        for (t, q) in &other.weights {
            if !self.weights.contains_key(t) {
                acc += q.abs();
            }
        }
        acc / Rational::from_integer(2.into())
    }

    /// Image distribution under `f`; fibers merge by summing weights.
    pub fn pushforward<U: Ord + Clone>(&self, mut f: impl FnMut(&T) -> U) -> FiniteDist<U> {
        let mut weights: BTreeMap<U, Rational> = BTreeMap::new();
        for (t, w) in &self.weights {
            *weights.entry(f(t)).or_insert_with(Rational::zero) += w;
        }
        FiniteDist { weights }
    }

    /// Conditional distribution given `pred`; `ZeroMass` if the event is null.
    pub fn condition(&self, mut pred: impl FnMut(&T) -> bool) -> Result<Self> {
        let mut weights = BTreeMap::new();
        let mut mass = Rational::zero();
        for (t, w) in &self.weights {
            if pred(t) {
                mass += w;
                weights.insert(t.clone(), w.clone());
            }
        }
        if mass.is_zero() {
            return Err(CoreError::ZeroMass);
        }
        for w in weights.values_mut() {
            *w /= &mass;
        }
        Ok(FiniteDist { weights })
    }

    pub fn expectation(&self, mut f: impl FnMut(&T) -> Rational) -> Rational {
        let mut acc = Rational::zero();
        for (t, w) in &self.weights {
            acc += f(t) * w;
        }
        acc
    }

    /// Convex combination of component distributions. The mixture weights
    /// must be nonnegative and sum to one.
    pub fn mixture(parts: impl IntoIterator<Item = (Rational, FiniteDist<T>)>) -> Result<Self> {
        let mut pairs: Vec<(T, Rational)> = Vec::new();
        for (coef, part) in parts {
            if coef.is_negative() {
                return Err(CoreError::InvalidDistribution(
                    "negative mixture coefficient".into(),
                ));
            }
            if coef.is_zero() {
                continue;
            }
            for (t, w) in part.weights {
                pairs.push((t, w * &coef));
            }
        }
        Self::accumulate(pairs)
    }

    /// Product of independent distributions, as a distribution over vectors.
    /// Fails fast when the support of the product would exceed the budget.
    pub fn product(dists: &[FiniteDist<T>], budget: &EnumBudget) -> Result<FiniteDist<Vec<T>>> {
        let mut needed: u128 = 1;
        for d in dists {
            needed = needed.saturating_mul(d.support_size() as u128);
        }
        budget.check(needed)?;
        let mut acc: Vec<(Vec<T>, Rational)> = vec![(Vec::new(), Rational::one())];
        for d in dists {
            let mut next = Vec::with_capacity(acc.len() * d.support_size());
            for (prefix, w) in &acc {
                for (t, wt) in &d.weights {
                    let mut v = prefix.clone();
                    v.push(t.clone());
                    next.push((v, w * wt));
                }
            }
            acc = next;
        }
        FiniteDist::from_pairs(acc)
    }

    /// Samples an outcome by exact CDF inversion of a 64-bit uniform draw.
    pub fn sample<'a, R: Rng + ?Sized>(&'a self, rng: &mut R) -> &'a T {
        let target = Rational::new(rng.gen::<u64>().into(), (u128::from(u64::MAX) + 1).into());
        let mut acc = Rational::zero();
        let mut last = None;
        for (t, w) in &self.weights {
            acc += w;
            last = Some(t);
            if target < acc {
                return t;
            }
        }
        last.expect("nonempty support")
    }
}

impl<T: Ord + Clone + Serialize> FiniteDist<T> {
    /// JSON form `{"support": [...], "weights": ["num/den", ...]}` with the
    /// support in canonical order.
    pub fn to_json(&self) -> serde_json::Value {
        let support: Vec<_> = self.weights.keys().collect();
        let weights: Vec<String> = self.weights.values().map(format_ratio).collect();
        json!({ "support": support, "weights": weights })
    }
}

impl<T: Ord + Clone + DeserializeOwned> FiniteDist<T> {
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bad = |m: &str| CoreError::InvalidDistribution(m.into());
        let support = v
            .get("support")
            .and_then(|s| s.as_array())
            .ok_or_else(|| bad("missing support array"))?;
        let weights = v
            .get("weights")
            .and_then(|s| s.as_array())
            .ok_or_else(|| bad("missing weights array"))?;
        if support.len() != weights.len() {
            return Err(CoreError::BadLength {
                expected: support.len(),
                found: weights.len(),
            });
        }
        let mut pairs = Vec::with_capacity(support.len());
        for (s, w) in support.iter().zip(weights) {
            let t: T = serde_json::from_value(s.clone())
                .map_err(|e| bad(&format!("bad support entry: {e}")))?;
            let w = parse_ratio(w.as_str().ok_or_else(|| bad("weight not a string"))?)?;
            pairs.push((t, w));
        }
        Self::from_pairs(pairs)
    }
}

/// Uniform distribution on the integer interval `[lo, hi]`.
pub fn uniform_int(lo: i64, hi: i64) -> Result<FiniteDist<i64>> {
    if lo > hi {
        return Err(CoreError::EmptyRange);
    }
    FiniteDist::uniform(lo..=hi)
}

/// Uniform distribution on `[1, hi]` over unsigned values, the `Uni[m]`
/// shorthand used throughout the constructions.
pub fn uniform_range_u128(hi: u128, budget: &EnumBudget) -> Result<FiniteDist<u128>> {
    if hi == 0 {
        return Err(CoreError::EmptyRange);
    }
    budget.check(hi)?;
    FiniteDist::uniform(1..=hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalTv {
    pub estimate: f64,
    pub std_error: f64,
}

/// Plug-in total variation between two empirical histograms, with a
/// delta-method standard error.
///
/// Writing the estimate as `(sum_t s_t p_hat(t) - sum_t s_t q_hat(t)) / 2`
/// with `s_t = sign(p_hat - q_hat)`, the multinomial variance of each inner
/// sum is `(1 - (sum_t s_t p(t))^2) / n`, which we evaluate at the plug-in
/// signs and frequencies. Ties contribute sign zero, which only makes the
/// reported error larger (conservative).
pub fn empirical_tv<T: Ord + Clone>(xs: &[T], ys: &[T]) -> Result<EmpiricalTv> {
    if xs.is_empty() || ys.is_empty() {
        return Err(CoreError::EmptyRange);
    }
    let count = |zs: &[T]| {
        let mut m: BTreeMap<T, u64> = BTreeMap::new();
        for z in zs {
            *m.entry(z.clone()).or_insert(0) += 1;
        }
        m
    };
    let px = count(xs);
    let qy = count(ys);
    let nx = xs.len() as f64;
    let ny = ys.len() as f64;
    let mut keys: Vec<&T> = px.keys().collect();
    for k in qy.keys() {
        if !px.contains_key(k) {
            keys.push(k);
        }
    }
    let mut tv = 0.0;
    let mut sp = 0.0; // sum_t s_t p_hat(t)
    let mut sq = 0.0;
    for k in keys {
        let p = *px.get(k).unwrap_or(&0) as f64 / nx;
        let q = *qy.get(k).unwrap_or(&0) as f64 / ny;
        tv += (p - q).abs();
        let s = if p > q {
            1.0
        } else if p < q {
            -1.0
        } else {
            0.0
        };
        sp += s * p;
        sq += s * q;
    }
    let var = ((1.0 - sp * sp) / nx + (1.0 - sq * sq) / ny).max(0.0);
    Ok(EmpiricalTv {
        estimate: tv / 2.0,
        std_error: var.sqrt() / 2.0,
    })
}
