//! The level construction for the game of googol.
//!
//! An instance is built from gaps: gap `i` (between the `i-1`-st and `i`-th
//! smallest values) gets a level `rho_i`, and its width is uniform on
//! `[1, Delta^{rho_i}]`. The level assignment `rho` is a permutation of `[n]`
//! with `rho_1 = n`, drawn from the stationary distribution of an explicit
//! Markov chain: deleting a uniformly chosen element of the instance then
//! looks, level-wise, exactly like a fresh instance on `n - 1` values. That
//! self-similarity under deletion is what blinds value observations.
//!
//! Besides the chain this module carries the two dynamic programs (ordinal
//! ranks only, and ranks plus observed levels) whose equality witnesses that
//! levels reveal nothing, the online gap-splitting simulation that turns an
//! ordinal stream into a consistent cardinal one, and the max-guessing game
//! whose constant policies score exactly 1.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{EnumBudget, FiniteDist};
use crate::error::{CoreError, Result};
use crate::linalg::null_space;
use crate::perm::Perm;
use crate::rational::{rat_int, Rational};

/// A permutation of `[n]` assigning a level to each gap, with the first gap
/// carrying the largest level `n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LevelPerm(Vec<usize>);

impl LevelPerm {
    pub fn new(levels: Vec<usize>) -> Result<Self> {
        let p = Perm::new(levels.clone())?;
        if p.at(1) != p.len() {
            return Err(CoreError::BadParam(format!(
                "first level must be the largest, got {levels:?}"
            )));
        }
        Ok(LevelPerm(levels))
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    /// Level of gap `i`, 1-indexed.
    pub fn level(&self, i: usize) -> usize {
        self.0[i - 1]
    }

    pub fn levels(&self) -> &[usize] {
        &self.0
    }

    /// All level permutations of `[n]` in lexicographic order; there are
    /// `(n-1)!` of them.
    pub fn all(n: usize) -> Result<Vec<LevelPerm>> {
        if n < 2 {
            return Err(CoreError::BadParam("need n >= 2".into()));
        }
        use itertools::Itertools;
        Ok((1..n)
            .permutations(n - 1)
            .map(|rest| {
                let mut v = Vec::with_capacity(n);
                v.push(n);
                v.extend(rest);
                LevelPerm(v)
            })
            .collect())
    }

    pub fn as_partial(&self) -> PartialLevels {
        PartialLevels(self.0.clone())
    }
}

impl std::fmt::Display for LevelPerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        use itertools::Itertools;
        write!(f, "({})", self.0.iter().join(","))
    }
}

/// Levels of the gaps of a partially observed instance: distinct, the first
/// entry maximal. Closed under the deletion operators below.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PartialLevels(Vec<usize>);

impl PartialLevels {
    pub fn new(levels: Vec<usize>) -> Result<Self> {
        if levels.is_empty() {
            return Err(CoreError::BadParam("empty level vector".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &l in &levels {
            if l == 0 || !seen.insert(l) {
                return Err(CoreError::BadParam(format!(
                    "levels must be distinct positive integers: {levels:?}"
                )));
            }
        }
        if levels.iter().max() != Some(&levels[0]) {
            return Err(CoreError::BadParam(format!(
                "first level must be maximal: {levels:?}"
            )));
        }
        Ok(PartialLevels(levels))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn levels(&self) -> &[usize] {
        &self.0
    }
}

/// Deletion operator `D_i` on a length-`k` level vector: for `i < k` the
/// `i`-th and `i+1`-st levels merge into their maximum (the element between
/// gaps `i` and `i+1` disappeared); `D_k` drops the last level (the maximum
/// element disappeared).
pub fn delete_level(lambda: &PartialLevels, i: usize) -> Result<PartialLevels> {
    let k = lambda.len();
    if i == 0 || i > k {
        return Err(CoreError::IndexOutOfRange { index: i, len: k });
    }
    if k < 2 {
        return Err(CoreError::BadParam(
            "cannot delete from a single level".into(),
        ));
    }
    let mut v = lambda.0.clone();
    if i == k {
        v.pop();
    } else {
        v[i - 1] = v[i - 1].max(v[i]);
        v.remove(i);
    }
    PartialLevels::new(v)
}

/// The level chain on the `(n-1)!` level permutations, in lexicographic
/// state order. Row `rho`, column `rho'` holds
/// `|{i in [n-1] : D_i(rho) = D_n(rho')}| / (n-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelChain {
    pub n: usize,
    pub states: Vec<LevelPerm>,
    pub matrix: Vec<Vec<Rational>>,
}

/// States beyond this factorial size are refused; the chain is meant to be
/// solved exactly.
pub const MAX_CHAIN_N: usize = 8;

pub fn build_transition_matrix(n: usize) -> Result<LevelChain> {
    if !(2..=MAX_CHAIN_N).contains(&n) {
        return Err(CoreError::BadParam(format!(
            "chain size n must be in 2..={MAX_CHAIN_N}, got {n}"
        )));
    }
    let states = LevelPerm::all(n)?;
    let drop_last: Vec<PartialLevels> = states
        .iter()
        .map(|s| delete_level(&s.as_partial(), n))
        .collect::<Result<Vec<_>>>()?;
    let denom = rat_int((n - 1) as i64);
    let mut matrix = Vec::with_capacity(states.len());
    for rho in &states {
        let mut counts = vec![0u32; states.len()];
        for i in 1..n {
            let merged = delete_level(&rho.as_partial(), i)?;
            for (col, target) in drop_last.iter().enumerate() {
                if &merged == target {
                    counts[col] += 1;
                }
            }
        }
        matrix.push(
            counts
                .into_iter()
                .map(|c| rat_int(c as i64) / &denom)
                .collect(),
        );
    }
    Ok(LevelChain { n, states, matrix })
}

/// Solves `p M = p`, `sum p = 1` by exact elimination on the null space of
/// `M^T - I`. A null space of dimension other than one is an error rather
/// than a silent choice among solutions.
pub fn stationary_distribution(chain: &LevelChain) -> Result<Vec<Rational>> {
    let m = chain.states.len();
    let mut a = vec![vec![Rational::zero(); m]; m];
    for (r, row) in chain.matrix.iter().enumerate() {
        for (c, x) in row.iter().enumerate() {
            a[c][r] = x.clone(); // transpose
        }
        a[r][r] -= Rational::one();
    }
    let ns = null_space(&a);
    if ns.len() != 1 {
        return Err(CoreError::NonUniqueStationary { dimension: ns.len() });
    }
    let mut p = ns.into_iter().next().unwrap();
    let total: Rational = p.iter().cloned().sum();
    if total.is_zero() {
        return Err(CoreError::NonUniqueStationary { dimension: 0 });
    }
    for x in &mut p {
        *x /= &total;
    }
    if p.iter().any(|x| x <= &Rational::zero()) {
        return Err(CoreError::InvalidDistribution(
            "stationary vector not strictly positive".into(),
        ));
    }
    // sanity: p really is a fixed point
    for c in 0..m {
        let dot: Rational = (0..m).map(|r| &p[r] * &chain.matrix[r][c]).sum();
        if dot != p[c] {
            return Err(CoreError::InvalidDistribution(
                "solved vector is not stationary".into(),
            ));
        }
    }
    Ok(p)
}

/// The stationary law of level permutations, as a distribution.
pub fn level_dist(n: usize) -> Result<FiniteDist<LevelPerm>> {
    let chain = build_transition_matrix(n)?;
    let p = stationary_distribution(&chain)?;
    FiniteDist::from_pairs(chain.states.into_iter().zip(p))
}

/// Which family of deletion operators to average over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeleteMode {
    /// `U`: uniform over `D_1, ..., D_k`.
    Uniform,
    /// `V`: uniform over `D_1, ..., D_{k-1}` (never drops the last level).
    SkipLast,
}

/// Pushes a distribution over length-`k` level vectors through a uniformly
/// chosen deletion operator.
pub fn uniform_delete(
    f: &FiniteDist<PartialLevels>,
    mode: DeleteMode,
) -> Result<FiniteDist<PartialLevels>> {
    let mut sizes = f.support().map(PartialLevels::len);
    let k = sizes.next().ok_or(CoreError::EmptyRange)?;
    if let Some(bad) = sizes.find(|&s| s != k) {
        return Err(CoreError::BadLength {
            expected: k,
            found: bad,
        });
    }
    let last = match mode {
        DeleteMode::Uniform => k,
        DeleteMode::SkipLast => {
            if k < 2 {
                return Err(CoreError::BadParam(
                    "skip-last deletion needs length >= 2".into(),
                ));
            }
            k - 1
        }
    };
    let coef = Rational::new(1.into(), (last as u64).into());
    let mut parts = Vec::with_capacity(last);
    for i in 1..=last {
        let mut pairs = Vec::with_capacity(f.support_size());
        for (lam, w) in f.iter() {
            pairs.push((delete_level(lam, i)?, w.clone()));
        }
        // deletions merge outcomes, so accumulate through a mixture of points
        let imgs = FiniteDist::mixture(
            pairs
                .into_iter()
                .map(|(lam, w)| (w, FiniteDist::point(lam))),
        )?;
        parts.push((coef.clone(), imgs));
    }
    FiniteDist::mixture(parts)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeletionIdentityCheck {
    pub k: usize,
    /// `U^k(F) == D_{n-k+1}(V^{k-1}(F))`
    pub uk_equals_dv: bool,
    /// `D_{n-k+1}(V^{k-1}(F)) == V^k(F)`
    pub dv_equals_vk: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeletionIdentityReport {
    pub n: usize,
    pub per_k: Vec<DeletionIdentityCheck>,
    pub all_hold: bool,
}

/// Checks, for `k in [n-1]`, the operator identities
/// `U^k(F) = D_{n-k+1}(V^{k-1}(F)) = V^k(F)` on the stationary level law.
/// Exact distribution equality, no tolerance.
pub fn verify_deletion_identities(n: usize) -> Result<DeletionIdentityReport> {
    let f = level_dist(n)?.pushforward(LevelPerm::as_partial);
    let mut per_k = Vec::with_capacity(n - 1);
    let mut u_pow = f.clone();
    let mut v_pow_prev = f.clone(); // V^{k-1}(F)
    for k in 1..n {
        u_pow = uniform_delete(&u_pow, DeleteMode::Uniform)?;
        // D_{n-k+1} is the drop-last operator on length n-k+1 vectors
        let mut pairs = Vec::with_capacity(v_pow_prev.support_size());
        for (lam, w) in v_pow_prev.iter() {
            pairs.push((w.clone(), FiniteDist::point(delete_level(lam, n - k + 1)?)));
        }
        let dv = FiniteDist::mixture(pairs)?;
        let v_pow = uniform_delete(&v_pow_prev, DeleteMode::SkipLast)?;
        per_k.push(DeletionIdentityCheck {
            k,
            uk_equals_dv: u_pow == dv,
            dv_equals_vk: dv == v_pow,
        });
        v_pow_prev = v_pow;
    }
    let all_hold = per_k.iter().all(|c| c.uk_equals_dv && c.dv_equals_vk);
    Ok(DeletionIdentityReport { n, per_k, all_hold })
}

/// A concrete instance: gap `i` has level `rho_i` and width
/// `gaps[i-1] <= Delta^{rho_i}`; values are the prefix sums.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoogolInstance {
    pub n: usize,
    pub delta: u64,
    pub rho: LevelPerm,
    pub gaps: Vec<u64>,
    pub values: Vec<u64>,
}

fn delta_pow(delta: u64, level: usize) -> Result<u64> {
    let e = u32::try_from(level).map_err(|_| CoreError::Overflow("level exceeds u32".into()))?;
    delta
        .checked_pow(e)
        .ok_or_else(|| CoreError::Overflow(format!("{delta}^{level} exceeds u64")))
}

fn check_instance_params(n: usize, delta: u64) -> Result<()> {
    if n < 2 {
        return Err(CoreError::BadParam("need n >= 2".into()));
    }
    if delta < 2 {
        return Err(CoreError::BadParam("need Delta >= 2".into()));
    }
    let mut total: u64 = 0;
    for lvl in 1..=n {
        total = total
            .checked_add(delta_pow(delta, lvl)?)
            .ok_or_else(|| CoreError::Overflow("sum of Delta^i exceeds u64".into()))?;
    }
    let _ = total;
    Ok(())
}

/// Draws `rho` from the stationary law and each gap uniformly from its level
/// range.
pub fn sample_instance<R: Rng + ?Sized>(n: usize, delta: u64, rng: &mut R) -> Result<GoogolInstance> {
    check_instance_params(n, delta)?;
    let rho = level_dist(n)?.sample(rng).clone();
    let mut gaps = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut acc = 0u64;
    for i in 1..=n {
        let g = rng.gen_range(1..=delta_pow(delta, rho.level(i))?);
        acc += g;
        gaps.push(g);
        values.push(acc);
    }
    Ok(GoogolInstance {
        n,
        delta,
        rho,
        gaps,
        values,
    })
}

/// The rank-only secretary dynamic program.
///
/// `tables[i-1]` maps each relative ranking of the first `i` arrivals to the
/// optimal win probability from step `i` on; `value` is the overall optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct OrdinalDp {
    pub n: usize,
    pub value: Rational,
    pub tables: Vec<BTreeMap<Perm, Rational>>,
}

/// Full-table cap: `n!` states at the last step.
pub const MAX_DP_N: usize = 8;

fn extend_ranking(prefix: &Perm, new_rank: usize) -> Perm {
    let mut v: Vec<usize> = prefix
        .images()
        .iter()
        .map(|&x| if x >= new_rank { x + 1 } else { x })
        .collect();
    v.push(new_rank);
    Perm::new(v).expect("extension of a ranking is a ranking")
}

pub fn ordinal_secretary_dp(n: usize) -> Result<OrdinalDp> {
    if !(2..=MAX_DP_N).contains(&n) {
        return Err(CoreError::BadParam(format!(
            "secretary DP supports 2..={MAX_DP_N}, got {n}"
        )));
    }
    let mut tables: Vec<BTreeMap<Perm, Rational>> = vec![BTreeMap::new(); n];
    for pi in Perm::all(n) {
        let win = rat_int(i64::from(pi.at(n) == n));
        tables[n - 1].insert(pi, win);
    }
    for i in (1..n).rev() {
        let mut table = BTreeMap::new();
        for prefix in Perm::all(i) {
            let mut cont = Rational::zero();
            for new_rank in 1..=(i + 1) {
                cont += &tables[i][&extend_ranking(&prefix, new_rank)];
            }
            cont /= rat_int((i + 1) as i64);
            let value = if prefix.at(i) == i {
                // current arrival is a prefix maximum: accepting wins with
                // probability i/n
                let accept = Rational::new((i as u64).into(), (n as u64).into());
                accept.max(cont)
            } else {
                cont
            };
            table.insert(prefix, value);
        }
        tables[i - 1] = table;
    }
    let value = tables[0][&Perm::identity(1)].clone();
    Ok(OrdinalDp { n, value, tables })
}

/// Closed recursion on (step, is-prefix-max) only; cross-checks the table DP.
pub fn classic_secretary_value(n: usize) -> Result<Rational> {
    if n < 1 {
        return Err(CoreError::BadParam("need n >= 1".into()));
    }
    let mut cont = Rational::zero(); // value of continuing past step n
    for i in (1..=n).rev() {
        let accept = Rational::new((i as u64).into(), (n as u64).into());
        let best = accept.max(cont.clone());
        // entering step i: record with probability 1/i
        let pi = rat_int(i as i64);
        cont = (best + (&pi - rat_int(1)) * cont) / pi;
    }
    Ok(cont)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelDpReport {
    pub n: usize,
    /// Optimal win probability when observing ranks and levels.
    pub value: Rational,
    /// Optimal win probability on ranks alone.
    pub ordinal_value: Rational,
    pub states_compared: usize,
    /// `g(mu, sigma) == f(sigma)` at every reachable state.
    pub g_equals_f: bool,
    /// Acceptance at a prefix maximum wins with probability exactly `i/n`
    /// at every reachable state.
    pub accept_prob_exact: bool,
}

/// The rank-plus-levels dynamic program, by exact joint enumeration of the
/// arrival order and the level permutation.
pub fn level_secretary_dp(n: usize, budget: &EnumBudget) -> Result<LevelDpReport> {
    let ordinal = ordinal_secretary_dp(n)?;
    let levels = level_dist(n)?;
    let arrivals = Perm::all(n);
    let needed = (arrivals.len() as u128) * (levels.support_size() as u128);
    budget.check(needed)?;

    struct Pair {
        weight: Rational,
        /// state (mu^i, sigma^i) for each step i, 1-indexed
        states: Vec<(PartialLevels, Perm)>,
        wins_if_accept: Vec<bool>,
    }
    let pi_weight = Rational::new(1.into(), (arrivals.len() as u64).into());
    let mut pairs = Vec::with_capacity(needed as usize);
    for pi in &arrivals {
        for (rho, w_rho) in levels.iter() {
            let mut states = Vec::with_capacity(n);
            let mut wins = Vec::with_capacity(n);
            let mut observed: Vec<usize> = Vec::with_capacity(n);
            for i in 1..=n {
                let rank = pi.at(i);
                let pos = observed.partition_point(|&r| r < rank);
                observed.insert(pos, rank);
                states.push((observed_levels(rho, &observed)?, pi.prefix_ranking(i)?));
                wins.push(rank == n);
            }
            pairs.push(Pair {
                weight: &pi_weight * w_rho,
                states,
                wins_if_accept: wins,
            });
        }
    }

    type State = (PartialLevels, Perm);
    let mut g_equals_f = true;
    let mut accept_prob_exact = true;
    let mut states_compared = 0usize;
    // values of g at step i+1, keyed by state
    let mut next: BTreeMap<State, Rational> = BTreeMap::new();
    for i in (1..=n).rev() {
        let mut mass: BTreeMap<State, Rational> = BTreeMap::new();
        let mut accept_mass: BTreeMap<State, Rational> = BTreeMap::new();
        let mut cont_mass: BTreeMap<State, Rational> = BTreeMap::new();
        for p in &pairs {
            let st = p.states[i - 1].clone();
            *mass.entry(st.clone()).or_insert_with(Rational::zero) += &p.weight;
            if p.wins_if_accept[i - 1] {
                *accept_mass.entry(st.clone()).or_insert_with(Rational::zero) += &p.weight;
            }
            if i < n {
                let nv = &next[&p.states[i]];
                *cont_mass.entry(st).or_insert_with(Rational::zero) += nv * &p.weight;
            }
        }
        let mut cur: BTreeMap<State, Rational> = BTreeMap::new();
        for (st, m) in &mass {
            let accept = accept_mass
                .get(st)
                .cloned()
                .unwrap_or_else(Rational::zero)
                / m;
            let cont = cont_mass.get(st).cloned().unwrap_or_else(Rational::zero) / m;
            let (mu, sigma) = st;
            let is_record = sigma.at(i) == i;
            let g = if i == n {
                rat_int(i64::from(accept.is_one()))
            } else if is_record {
                accept.clone().max(cont)
            } else {
                cont
            };
            if is_record {
                let expected = Rational::new((i as u64).into(), (n as u64).into());
                if accept != expected {
                    accept_prob_exact = false;
                }
            }
            let f = &ordinal.tables[i - 1][sigma];
            if &g != f {
                g_equals_f = false;
            }
            let _ = mu;
            states_compared += 1;
            cur.insert(st.clone(), g);
        }
        next = cur;
    }
    // step 1 has a single state: mu = (n), sigma = (1)
    let value = next
        .values()
        .next()
        .cloned()
        .ok_or(CoreError::EmptyRange)?;
    Ok(LevelDpReport {
        n,
        value,
        ordinal_value: ordinal.value,
        states_compared,
        g_equals_f,
        accept_prob_exact,
    })
}

fn observed_levels(rho: &LevelPerm, observed_ranks: &[usize]) -> Result<PartialLevels> {
    let mut out = Vec::with_capacity(observed_ranks.len());
    let mut lo = 0usize;
    for &hi in observed_ranks {
        let lvl = (lo + 1..=hi)
            .map(|j| rho.level(j))
            .max()
            .ok_or_else(|| CoreError::BadParam("unsorted observed ranks".into()))?;
        out.push(lvl);
        lo = hi;
    }
    PartialLevels::new(out)
}

/// A stopping rule for the simulated game: decide on the arrival of step
/// `step` given the sorted synthetic values and the relative ranking of the
/// arrivals so far.
pub trait StopPolicy {
    fn accept(&self, step: usize, n: usize, sorted_values: &[u64], ranking: &Perm) -> bool;
}

/// Skip a fixed number of arrivals, then accept the first prefix maximum.
/// Ordinal; the classic threshold rule.
#[derive(Debug, Clone, Copy)]
pub struct RecordAfter {
    pub skip: usize,
}

impl StopPolicy for RecordAfter {
    fn accept(&self, step: usize, _n: usize, _sorted_values: &[u64], ranking: &Perm) -> bool {
        step > self.skip && ranking.at(step) == step
    }
}

/// Accept the first arrival whose value clears a fixed cutoff. Cardinal.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdValue {
    pub cutoff: u64,
}

impl StopPolicy for ThresholdValue {
    fn accept(&self, step: usize, _n: usize, sorted_values: &[u64], ranking: &Perm) -> bool {
        let pos = ranking.at(step);
        sorted_values[pos - 1] >= self.cutoff
    }
}

/// One run of the online gap-splitting simulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimRun {
    pub n: usize,
    pub delta: u64,
    pub rho: LevelPerm,
    pub pi: Perm,
    pub failed: bool,
    /// Synthetic gap vector after each step (sorted by value), empty if failed.
    pub gap_history: Vec<Vec<u64>>,
    /// Levels of those gaps, parallel to `gap_history`.
    pub level_history: Vec<Vec<usize>>,
    pub actions: Vec<bool>,
    pub accepted_step: Option<usize>,
    /// Whether the accepted element was the maximum; `false` when nothing
    /// was accepted. `None` when the run failed before playing.
    pub win: Option<bool>,
}

impl SimRun {
    pub fn final_gaps(&self) -> Option<&[u64]> {
        self.gap_history.last().map(Vec::as_slice)
    }
}

/// Deterministic core of the simulation: given the level permutation, the
/// arrival order and the per-level widths `rs` (with `rs[i-1] <= Delta^i`),
/// either fails the width precondition or plays the policy on a gap stream
/// that remains consistent with one cardinal instance.
///
/// The new arrival either splits the gap it lands in (the side away from the
/// gap's level maximum gets the fresh level's width, the other side keeps
/// the remainder) or appends a fresh gap past the current maximum.
pub fn appc_run<P: StopPolicy + ?Sized>(
    n: usize,
    delta: u64,
    rho: &LevelPerm,
    pi: &Perm,
    rs: &[u64],
    policy: &P,
) -> Result<SimRun> {
    check_instance_params(n, delta)?;
    if rho.n() != n || pi.len() != n {
        return Err(CoreError::BadLength {
            expected: n,
            found: rho.n().min(pi.len()),
        });
    }
    if rs.len() != n {
        return Err(CoreError::BadLength {
            expected: n,
            found: rs.len(),
        });
    }
    for (idx, &r) in rs.iter().enumerate() {
        if r == 0 || r > delta_pow(delta, idx + 1)? {
            return Err(CoreError::BadParam(format!(
                "width r_{} = {r} outside [1, Delta^{}]",
                idx + 1,
                idx + 1
            )));
        }
    }
    let base = SimRun {
        n,
        delta,
        rho: rho.clone(),
        pi: pi.clone(),
        failed: true,
        gap_history: Vec::new(),
        level_history: Vec::new(),
        actions: Vec::new(),
        accepted_step: None,
        win: None,
    };
    // width precondition: each level must out-scale everything below it
    let mut prefix: u64 = 0;
    for &r in rs {
        if r <= prefix {
            return Ok(base);
        }
        prefix += r;
    }

    struct Interval {
        hi_rank: usize,
        level: usize,
        gap: u64,
    }
    let max_level =
        |lo: usize, hi: usize| -> usize { (lo + 1..=hi).map(|j| rho.level(j)).max().unwrap() };
    let mut intervals: Vec<Interval> = Vec::with_capacity(n);
    let mut run = SimRun {
        failed: false,
        ..base
    };
    for k in 1..=n {
        let rank = pi.at(k);
        let pos = intervals.partition_point(|iv| iv.hi_rank < rank);
        if pos == intervals.len() {
            // new maximum: append a fresh gap
            let lo = intervals.last().map_or(0, |iv| iv.hi_rank);
            let level = max_level(lo, rank);
            intervals.push(Interval {
                hi_rank: rank,
                level,
                gap: rs[level - 1],
            });
        } else {
            // split the gap the arrival lands in
            let lo = if pos == 0 {
                0
            } else {
                intervals[pos - 1].hi_rank
            };
            let hi = intervals[pos].hi_rank;
            let old_gap = intervals[pos].gap;
            let left_level = max_level(lo, rank);
            let right_level = max_level(rank, hi);
            debug_assert_eq!(left_level.max(right_level), intervals[pos].level);
            let fresh = left_level.min(right_level);
            let fresh_gap = rs[fresh - 1];
            assert!(
                old_gap > fresh_gap,
                "width precondition guarantees positive remainders"
            );
            let (left_gap, right_gap) = if fresh == left_level {
                (fresh_gap, old_gap - fresh_gap)
            } else {
                (old_gap - fresh_gap, fresh_gap)
            };
            intervals[pos] = Interval {
                hi_rank: hi,
                level: right_level,
                gap: right_gap,
            };
            intervals.insert(
                pos,
                Interval {
                    hi_rank: rank,
                    level: left_level,
                    gap: left_gap,
                },
            );
        }
        run.gap_history
            .push(intervals.iter().map(|iv| iv.gap).collect());
        run.level_history
            .push(intervals.iter().map(|iv| iv.level).collect());
        let mut values = Vec::with_capacity(k);
        let mut acc = 0u64;
        for iv in &intervals {
            acc += iv.gap;
            values.push(acc);
        }
        let ranking = pi.prefix_ranking(k)?;
        let act = if run.accepted_step.is_none() {
            policy.accept(k, n, &values, &ranking)
        } else {
            false
        };
        run.actions.push(act);
        if act && run.accepted_step.is_none() {
            run.accepted_step = Some(k);
        }
    }
    debug_assert_eq!(
        run.level_history.last().unwrap(),
        rho.levels(),
        "final gap levels must equal rho"
    );
    run.win = Some(matches!(run.accepted_step, Some(k) if pi.at(k) == n));
    Ok(run)
}

/// Samples the level permutation, the arrival order and the widths, then
/// delegates to `appc_run`.
pub fn appc_simulation<P: StopPolicy + ?Sized, R: Rng + ?Sized>(
    n: usize,
    delta: u64,
    policy: &P,
    rng: &mut R,
) -> Result<SimRun> {
    let levels = level_dist(n)?;
    appc_simulation_with(n, delta, &levels, policy, rng)
}

fn appc_simulation_with<P: StopPolicy + ?Sized, R: Rng + ?Sized>(
    n: usize,
    delta: u64,
    levels: &FiniteDist<LevelPerm>,
    policy: &P,
    rng: &mut R,
) -> Result<SimRun> {
    check_instance_params(n, delta)?;
    let rho = levels.sample(rng).clone();
    let mut order: Vec<usize> = (1..=n).collect();
    // Fisher-Yates
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let pi = Perm::new(order)?;
    let mut rs = Vec::with_capacity(n);
    for lvl in 1..=n {
        rs.push(rng.gen_range(1..=delta_pow(delta, lvl)?));
    }
    appc_run(n, delta, &rho, &pi, &rs, policy)
}

/// Aggregate of repeated simulation runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SimBatch {
    pub n: usize,
    pub delta: u64,
    pub trials: u64,
    pub failed: u64,
    pub accepted: u64,
    pub wins: u64,
    /// `(n-1)/(Delta-1)`, the guaranteed ceiling on the failure rate.
    pub failure_bound: Rational,
    pub failure_rate: f64,
    /// Binomial standard error of the failure rate.
    pub failure_se: f64,
    /// Win rate among non-failed runs, if any.
    pub win_rate: Option<f64>,
}

/// Runs the simulation `trials` times, computing the stationary law once.
pub fn appc_trials<P: StopPolicy + ?Sized, R: Rng + ?Sized>(
    n: usize,
    delta: u64,
    trials: u64,
    policy: &P,
    rng: &mut R,
) -> Result<SimBatch> {
    if trials == 0 {
        return Err(CoreError::BadParam("need at least one trial".into()));
    }
    check_instance_params(n, delta)?;
    let levels = level_dist(n)?;
    let mut failed = 0u64;
    let mut accepted = 0u64;
    let mut wins = 0u64;
    for _ in 0..trials {
        let run = appc_simulation_with(n, delta, &levels, policy, rng)?;
        if run.failed {
            failed += 1;
            continue;
        }
        if run.accepted_step.is_some() {
            accepted += 1;
        }
        if run.win == Some(true) {
            wins += 1;
        }
    }
    let t = trials as f64;
    let failure_rate = failed as f64 / t;
    let failure_se = (failure_rate * (1.0 - failure_rate) / t).sqrt();
    let ok = trials - failed;
    let win_rate = (ok > 0).then(|| wins as f64 / ok as f64);
    Ok(SimBatch {
        n,
        delta,
        trials,
        failed,
        accepted,
        wins,
        failure_bound: Rational::new(((n - 1) as u64).into(), (delta - 1).into()),
        failure_rate,
        failure_se,
        win_rate,
    })
}

/// Exact law of the value sets produced by the level construction; feasible
/// for small `n` and `Delta` only, and guarded by the budget.
pub fn max_guess_level_dist(
    n: usize,
    delta: u64,
    budget: &EnumBudget,
) -> Result<FiniteDist<crate::osi::ValueSet>> {
    check_instance_params(n, delta)?;
    let levels = level_dist(n)?;
    let mut bound: u64 = 0;
    for lvl in 1..=n {
        bound += delta_pow(delta, lvl)?;
    }
    let mut parts = Vec::new();
    for (rho, w) in levels.iter() {
        let ranges: Vec<u64> = (1..=n)
            .map(|i| delta_pow(delta, rho.level(i)))
            .collect::<Result<Vec<_>>>()?;
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
        let sets = joint.pushforward(|gaps| {
            let mut acc = 0u64;
            let values: Vec<u64> = gaps
                .iter()
                .map(|&g| {
                    acc += g;
                    acc
                })
                .collect();
            crate::osi::ValueSet::new(values, bound).expect("positive gaps give a valid set")
        });
        parts.push((w.clone(), sets));
    }
    FiniteDist::mixture(parts)
}

/// The maximum-guessing game: one of the `n` values hides uniformly at
/// random, the policy sees the rest and answers whether the hidden one is
/// the maximum. Saying yes pays `n` when right; saying no pays `n/(n-1)`
/// when right. Value-oblivious answers score exactly 1.
pub fn max_guess_eval(
    f: &FiniteDist<crate::osi::ValueSet>,
    yes_prob: impl Fn(&[u64]) -> Rational,
) -> Result<Rational> {
    let mut total = Rational::zero();
    let mut n_common: Option<usize> = None;
    for (s, w) in f.iter() {
        let n = s.len();
        match n_common {
            None => n_common = Some(n),
            Some(m) if m != n => {
                return Err(CoreError::BadLength {
                    expected: m,
                    found: n,
                })
            }
            _ => {}
        }
        let yes_reward = rat_int(n as i64);
        let no_reward = Rational::new((n as u64).into(), ((n - 1) as u64).into());
        let uniform = Rational::new(1.into(), (n as u64).into());
        for i in 1..=n {
            let observed: Vec<u64> = s
                .values()
                .iter()
                .enumerate()
                .filter(|(idx, _)| idx + 1 != i)
                .map(|(_, &v)| v)
                .collect();
            let p_yes = yes_prob(&observed);
            let reward = if i == n {
                &p_yes * &yes_reward
            } else {
                (Rational::one() - &p_yes) * &no_reward
            };
            total += w * &uniform * reward;
        }
    }
    Ok(total)
}

/// Joint law of (deleted index is the maximum, surviving values) under
/// uniform deletion from `f`, labeled for the Bayes guesser: label 1 means
/// "not the maximum" (pays `n/(n-1)`), label 2 means "the maximum" (pays
/// `n`).
pub fn max_guess_labeled(
    f: &FiniteDist<crate::osi::ValueSet>,
) -> Result<crate::oracle::LabeledDist<Vec<u64>>> {
    let mut lens = f.support().map(crate::osi::ValueSet::len);
    let n = lens.next().ok_or(CoreError::EmptyRange)?;
    if n < 2 {
        return Err(CoreError::TooFewFaces { n, min: 2 });
    }
    if let Some(bad) = lens.find(|&l| l != n) {
        return Err(CoreError::BadLength {
            expected: n,
            found: bad,
        });
    }
    let uniform = Rational::new(1.into(), (n as u64).into());
    let mut parts = Vec::with_capacity(f.support_size() * n);
    for (s, w) in f.iter() {
        for i in 1..=n {
            let observed: Vec<u64> = s
                .values()
                .iter()
                .enumerate()
                .filter(|(idx, _)| idx + 1 != i)
                .map(|(_, &v)| v)
                .collect();
            let label = if i == n { 2 } else { 1 };
            let part = FiniteDist::point((label, observed));
            parts.push((w * &uniform, part));
        }
    }
    let joint = FiniteDist::mixture(parts)?;
    let no_reward = Rational::new((n as u64).into(), ((n - 1) as u64).into());
    crate::oracle::LabeledDist::new(joint, vec![no_reward, rat_int(n as i64)])
}

/// Exact Bayes value of the max-guessing game under the level construction.
pub fn max_guess_bayes_exact(n: usize, delta: u64, budget: &EnumBudget) -> Result<Rational> {
    let f = max_guess_level_dist(n, delta, budget)?;
    let labeled = max_guess_labeled(&f)?;
    Ok(crate::oracle::bayes_single_shot(&labeled).value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxGuessMc {
    pub n: usize,
    pub delta: u64,
    pub trials: u64,
    /// Monte Carlo estimate of the Bayes value.
    pub estimate: f64,
    pub std_error: f64,
}

/// Monte Carlo Bayes value: sample an observation from the true process,
/// then compute its posterior exactly by enumerating every value the hidden
/// element could have had (all candidates up to `sum_k Delta^k`), and
/// average the per-observation optimal reward.
pub fn max_guess_bayes_mc<R: Rng + ?Sized>(
    n: usize,
    delta: u64,
    trials: u64,
    rng: &mut R,
) -> Result<MaxGuessMc> {
    if trials == 0 {
        return Err(CoreError::BadParam("need at least one trial".into()));
    }
    check_instance_params(n, delta)?;
    let levels = level_dist(n)?;
    let mut bound: u64 = 0;
    for lvl in 1..=n {
        bound += delta_pow(delta, lvl)?;
    }
    let caps: BTreeMap<&LevelPerm, Vec<u64>> = levels
        .support()
        .map(|rho| {
            let c = (1..=n)
                .map(|i| delta_pow(delta, rho.level(i)))
                .collect::<Result<Vec<_>>>()?;
            Ok((rho, c))
        })
        .collect::<Result<_>>()?;
    let yes_reward = rat_int(n as i64);
    let no_reward = Rational::new((n as u64).into(), ((n - 1) as u64).into());
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    for t in 0..trials {
        let rho = levels.sample(rng).clone();
        let mut acc = 0u64;
        let mut values = Vec::with_capacity(n);
        for i in 1..=n {
            acc += rng.gen_range(1..=delta_pow(delta, rho.level(i))?);
            values.push(acc);
        }
        let deleted = rng.gen_range(1..=n);
        let observed: Vec<u64> = values
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx + 1 != deleted)
            .map(|(_, &v)| v)
            .collect();
        let obs_max = *observed.last().unwrap();
        // total Delta^{-sum} scale is the same for every rho, so posterior
        // odds only need the stationary masses of the feasible rho's
        let mut mass_not_max = Rational::zero();
        let mut mass_max = Rational::zero();
        let mut candidate = Vec::with_capacity(n);
        for v in 1..=bound {
            if observed.binary_search(&v).is_ok() {
                continue;
            }
            candidate.clear();
            let pos = observed.partition_point(|&x| x < v);
            candidate.extend_from_slice(&observed[..pos]);
            candidate.push(v);
            candidate.extend_from_slice(&observed[pos..]);
            let mut mass = Rational::zero();
            for (rho, w) in levels.iter() {
                let caps = &caps[rho];
                let mut prev = 0u64;
                let feasible = candidate.iter().zip(caps).all(|(&x, &cap)| {
                    let ok = x - prev <= cap;
                    prev = x;
                    ok
                });
                if feasible {
                    mass += w;
                }
            }
            if v > obs_max {
                mass_max += mass;
            } else {
                mass_not_max += mass;
            }
        }
        let total = &mass_not_max + &mass_max;
        if total.is_zero() {
            return Err(CoreError::InvalidDistribution(
                "sampled observation has no consistent instance".into(),
            ));
        }
        let best = (&mass_max * &yes_reward).max(&mass_not_max * &no_reward) / total;
        let x = crate::rational::to_f64(&best);
        let d = x - mean;
        mean += d / (t + 1) as f64;
        m2 += d * (x - mean);
    }
    let variance = if trials > 1 {
        m2 / (trials - 1) as f64
    } else {
        0.0
    };
    Ok(MaxGuessMc {
        n,
        delta,
        trials,
        estimate: mean,
        std_error: (variance / trials as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn level_perm_validation() {
        assert!(LevelPerm::new(vec![4, 1, 2, 3]).is_ok());
        assert!(LevelPerm::new(vec![1, 4, 2, 3]).is_err());
        assert!(LevelPerm::new(vec![4, 1, 1, 3]).is_err());
    }

    #[test]
    fn delete_level_examples() {
        let lam = PartialLevels::new(vec![4, 1, 3, 2]).unwrap();
        assert_eq!(
            delete_level(&lam, 2).unwrap(),
            PartialLevels::new(vec![4, 3, 2]).unwrap()
        );
        assert_eq!(
            delete_level(&lam, 4).unwrap(),
            PartialLevels::new(vec![4, 1, 3]).unwrap()
        );
        assert_eq!(
            delete_level(&lam, 1).unwrap(),
            PartialLevels::new(vec![4, 3, 2]).unwrap()
        );
        assert!(delete_level(&lam, 5).is_err());
    }

    #[test]
    fn chain_n3_matrix_and_stationary() {
        let chain = build_transition_matrix(3).unwrap();
        assert_eq!(chain.states.len(), 2);
        assert_eq!(chain.matrix[0], vec![rat_int(0), rat_int(1)]);
        assert_eq!(chain.matrix[1], vec![rat(1, 2), rat(1, 2)]);
        let p = stationary_distribution(&chain).unwrap();
        assert_eq!(p, vec![rat(1, 3), rat(2, 3)]);
    }

    #[test]
    fn chain_n4_first_row() {
        let chain = build_transition_matrix(4).unwrap();
        assert_eq!(chain.states.len(), 6);
        assert_eq!(chain.states[0], LevelPerm::new(vec![4, 1, 2, 3]).unwrap());
        assert_eq!(
            chain.matrix[0],
            vec![
                rat_int(0),
                rat(1, 3),
                rat_int(0),
                rat(2, 3),
                rat_int(0),
                rat_int(0)
            ]
        );
    }

    #[test]
    fn chain_n4_stationary_vector() {
        let chain = build_transition_matrix(4).unwrap();
        let p = stationary_distribution(&chain).unwrap();
        assert_eq!(
            p,
            vec![
                rat(5, 66),
                rat(6, 66),
                rat(7, 66),
                rat(2, 11),
                rat(5, 22),
                rat(7, 22)
            ]
        );
    }

    #[test]
    fn uniform_delete_point_example() {
        let f = FiniteDist::point(PartialLevels::new(vec![3, 1, 2]).unwrap());
        let u = uniform_delete(&f, DeleteMode::Uniform).unwrap();
        assert_eq!(u.prob(&PartialLevels::new(vec![3, 2]).unwrap()), rat(2, 3));
        assert_eq!(u.prob(&PartialLevels::new(vec![3, 1]).unwrap()), rat(1, 3));
    }

    #[test]
    fn deletion_identities_small() {
        for n in [3, 4, 5] {
            let report = verify_deletion_identities(n).unwrap();
            assert_eq!(report.per_k.len(), n - 1);
            assert!(report.all_hold, "identities fail at n = {n}: {report:?}");
        }
    }

    #[test]
    fn ordinal_dp_matches_classic_values() {
        assert_eq!(ordinal_secretary_dp(3).unwrap().value, rat(1, 2));
        assert_eq!(ordinal_secretary_dp(4).unwrap().value, rat(11, 24));
        for n in 2..=6 {
            assert_eq!(
                ordinal_secretary_dp(n).unwrap().value,
                classic_secretary_value(n).unwrap(),
                "collapsed DP disagrees at n = {n}"
            );
        }
    }

    #[test]
    fn level_dp_equals_ordinal_dp() {
        for n in [3, 4] {
            let report = level_secretary_dp(n, &EnumBudget::default()).unwrap();
            assert!(report.g_equals_f, "g != f at n = {n}");
            assert!(report.accept_prob_exact, "accept prob != i/n at n = {n}");
            assert_eq!(report.value, report.ordinal_value);
        }
    }

    #[test]
    fn sampled_instances_respect_level_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let inst = sample_instance(4, 5, &mut rng).unwrap();
            for i in 1..=4 {
                let cap = 5u64.pow(inst.rho.level(i) as u32);
                assert!((1..=cap).contains(&inst.gaps[i - 1]));
            }
            assert!(inst.values.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn appc_run_splits_consistently() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let policy = RecordAfter { skip: 1 };
        let mut non_failed = 0;
        for _ in 0..200 {
            let run = appc_simulation(4, 40, &policy, &mut rng).unwrap();
            if run.failed {
                continue;
            }
            non_failed += 1;
            for (k, gaps) in run.gap_history.iter().enumerate() {
                assert_eq!(gaps.len(), k + 1);
                assert!(gaps.iter().all(|&g| g > 0));
                for (g, lvl) in gaps.iter().zip(&run.level_history[k]) {
                    assert!(*g <= 40u64.pow(*lvl as u32));
                }
            }
            for k in 1..run.gap_history.len() {
                let prev = &run.gap_history[k - 1];
                let cur = &run.gap_history[k];
                // one gap split in place or one appended at the end
                if cur.len() == prev.len() + 1 && cur[..prev.len()] == prev[..] {
                    continue;
                }
                let split = (0..prev.len())
                    .find(|&j| cur[j] != prev[j])
                    .expect("some gap must change");
                assert_eq!(cur[split] + cur[split + 1], prev[split]);
                assert_eq!(&cur[split + 2..], &prev[split + 1..]);
            }
            assert_eq!(
                run.level_history.last().unwrap().as_slice(),
                run.rho.levels()
            );
        }
        assert!(non_failed > 150, "unexpected failure rate");
    }

    #[test]
    fn appc_injective_per_widths() {
        // n = 3, Delta = 3: for each (rho, pi), distinct width tuples give
        // distinct non-failed instances.
        let policy = RecordAfter { skip: 1 };
        let pis = Perm::all(3);
        for rho in LevelPerm::all(3).unwrap() {
            for pi in &pis {
                let mut seen = std::collections::BTreeSet::new();
                for r1 in 1..=3u64 {
                    for r2 in 1..=9u64 {
                        for r3 in 1..=27u64 {
                            let run =
                                appc_run(3, 3, &rho, pi, &[r1, r2, r3], &policy).unwrap();
                            if run.failed {
                                continue;
                            }
                            let inst = run.final_gaps().unwrap().to_vec();
                            assert!(
                                seen.insert(inst.clone()),
                                "duplicate instance {inst:?} for rho {rho}, pi {pi}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn max_guess_constant_policies_score_one() {
        let budget = EnumBudget::default();
        let f = max_guess_level_dist(3, 4, &budget).unwrap();
        let one = rat_int(1);
        assert_eq!(max_guess_eval(&f, |_| Rational::zero()).unwrap(), one);
        assert_eq!(max_guess_eval(&f, |_| Rational::one()).unwrap(), one);
        assert_eq!(max_guess_eval(&f, |_| rat(2, 7)).unwrap(), one);
    }

    #[test]
    fn max_guess_bayes_edge_is_small_and_bounded() {
        let budget = EnumBudget::default();
        let v4 = max_guess_bayes_exact(3, 4, &budget).unwrap();
        let v6 = max_guess_bayes_exact(3, 6, &budget).unwrap();
        let one = rat_int(1);
        assert!(v4 > one && v6 > one, "values see something");
        assert!(&v4 - &one <= rat(3, 4), "advantage within n/Delta at 4");
        assert!(&v6 - &one <= rat(1, 2), "advantage within n/Delta at 6");
        assert!(v6 <= v4, "advantage shrinks as Delta grows");
    }

    #[test]
    fn max_guess_mc_matches_exact_at_small_delta() {
        let budget = EnumBudget::default();
        let exact = crate::rational::to_f64(&max_guess_bayes_exact(3, 4, &budget).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        let mc = max_guess_bayes_mc(3, 4, 4000, &mut rng).unwrap();
        assert!(
            (mc.estimate - exact).abs() <= 4.0 * mc.std_error,
            "mc {} +- {} vs exact {exact}",
            mc.estimate,
            mc.std_error
        );
    }
}
