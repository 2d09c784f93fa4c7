//! Ordinal online tasks, exact policy evaluation, and the reduction that
//! turns a cardinal rule into an ordinal one.
//!
//! A task fixes arrival-order and ranking priors, per-step action sets, a
//! feasibility predicate, and a reward that reads only actions and rankings.
//! Cardinal policies see values, ordinal policies see relative rankings;
//! both return action distributions so every evaluator can stay exact.
//! [`ordinalize`] replays a cardinal rule on synthetic values reconstructed
//! from rankings alone, and [`simulation_drift`] measures how far those
//! synthetic prefixes sit from the real ones.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use itertools::Itertools;
use num_traits::{One, Signed, Zero};

use crate::dist::{EnumBudget, FiniteDist};
use crate::error::{CoreError, Result};
use crate::osi::{max_subset_tv, subset_marginal, ValueSet};
use crate::perm::Perm;
use crate::rational::Rational;

/// Actions are small opaque codes; each step's action set gives the legal ones.
pub type Action = u32;

/// Stopping-game action codes. Rejection sorts first on purpose: fallback
/// plans prefer the lexicographically smallest feasible continuation, and for
/// stopping games that is the do-nothing branch.
pub const REJECT: Action = 0;
pub const ACCEPT: Action = 1;

/// What a value-observing policy sees at one step.
#[derive(Debug)]
pub struct CardinalObs<'a> {
    pub n: usize,
    /// 1-indexed step, from 1 to `n`.
    pub step: usize,
    /// Identities of the arrivals so far, `step` of them.
    pub identities: &'a [usize],
    /// Values of the arrivals so far, in arrival order.
    pub values: &'a [u64],
    /// Actions taken at steps before this one.
    pub past_actions: &'a [Action],
    /// Legal actions at this step.
    pub action_set: &'a [Action],
}

/// What a comparison-only policy sees at one step.
#[derive(Debug)]
pub struct OrdinalObs<'a> {
    pub n: usize,
    pub step: usize,
    pub identities: &'a [usize],
    /// Relative ranking of the arrivals so far; rank `step` is the largest.
    pub ranking: &'a Perm,
    pub past_actions: &'a [Action],
    pub action_set: &'a [Action],
}

/// Per-step rule over observed values. Returns a distribution over the
/// step's action set; randomness stays symbolic so evaluation is exact.
pub trait CardinalPolicy {
    fn act(&self, obs: &CardinalObs) -> Result<FiniteDist<Action>>;
}

/// Per-step rule over observed rankings.
pub trait OrdinalPolicy {
    fn act(&self, obs: &OrdinalObs) -> Result<FiniteDist<Action>>;
}

impl<P: CardinalPolicy + ?Sized> CardinalPolicy for &P {
    fn act(&self, obs: &CardinalObs) -> Result<FiniteDist<Action>> {
        (**self).act(obs)
    }
}

impl<P: CardinalPolicy + ?Sized> CardinalPolicy for Box<P> {
    fn act(&self, obs: &CardinalObs) -> Result<FiniteDist<Action>> {
        (**self).act(obs)
    }
}

impl<P: OrdinalPolicy + ?Sized> OrdinalPolicy for &P {
    fn act(&self, obs: &OrdinalObs) -> Result<FiniteDist<Action>> {
        (**self).act(obs)
    }
}

impl<P: OrdinalPolicy + ?Sized> OrdinalPolicy for Box<P> {
    fn act(&self, obs: &OrdinalObs) -> Result<FiniteDist<Action>> {
        (**self).act(obs)
    }
}

type FeasibleFn = Arc<dyn Fn(&[Action]) -> bool + Send + Sync>;
type RewardFn = Arc<dyn Fn(&[Action], &Perm, &Perm) -> Rational + Send + Sync>;

/// An online problem whose reward reads only the action vector, the value
/// ranking, and the arrival order. Infeasible action vectors pay zero by
/// construction: the reward closure is never consulted for them.
#[derive(Clone)]
pub struct OrdinalTask {
    name: String,
    n: usize,
    arrival: FiniteDist<Perm>,
    ranks: FiniteDist<Perm>,
    action_sets: Vec<Vec<Action>>,
    feasible: FeasibleFn,
    reward: RewardFn,
}

impl std::fmt::Debug for OrdinalTask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OrdinalTask")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("action_sets", &self.action_sets)
            .finish_non_exhaustive()
    }
}

impl OrdinalTask {
    pub fn new(
        name: impl Into<String>,
        arrival: FiniteDist<Perm>,
        ranks: FiniteDist<Perm>,
        action_sets: Vec<Vec<Action>>,
        feasible: FeasibleFn,
        reward: RewardFn,
    ) -> Result<Self> {
        let n = action_sets.len();
        if n == 0 {
            return Err(CoreError::BadParam("need at least one step".into()));
        }
        let mut sets = Vec::with_capacity(n);
        for (k, set) in action_sets.into_iter().enumerate() {
            let mut set = set;
            set.sort_unstable();
            set.dedup();
            if set.is_empty() {
                return Err(CoreError::BadParam(format!("empty action set at step {}", k + 1)));
            }
            sets.push(set);
        }
        for perm in arrival.support().chain(ranks.support()) {
            if perm.len() != n {
                return Err(CoreError::BadLength {
                    expected: n,
                    found: perm.len(),
                });
            }
        }
        Ok(OrdinalTask {
            name: name.into(),
            n,
            arrival,
            ranks,
            action_sets: sets,
            feasible,
            reward,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arrival_dist(&self) -> &FiniteDist<Perm> {
        &self.arrival
    }

    pub fn rank_dist(&self) -> &FiniteDist<Perm> {
        &self.ranks
    }

    /// Legal actions at 1-indexed step `k`.
    pub fn action_set(&self, k: usize) -> &[Action] {
        &self.action_sets[k - 1]
    }

    pub fn is_feasible(&self, actions: &[Action]) -> bool {
        (self.feasible)(actions)
    }

    /// Reward of a complete action vector; zero whenever infeasible.
    pub fn reward_value(&self, actions: &[Action], sigma: &Perm, pi: &Perm) -> Result<Rational> {
        if actions.len() != self.n {
            return Err(CoreError::BadLength {
                expected: self.n,
                found: actions.len(),
            });
        }
        if !(self.feasible)(actions) {
            return Ok(Rational::zero());
        }
        let r = (self.reward)(actions, sigma, pi);
        if r.is_negative() {
            return Err(CoreError::BadParam(format!("negative reward {r}")));
        }
        Ok(r)
    }
}

/// `tau(j)` = rank of the `j`-th arrival, so prefix rankings of `tau` are
/// exactly what an ordinal policy observes step by step.
fn compose(sigma: &Perm, pi: &Perm) -> Result<Perm> {
    Perm::new((1..=pi.len()).map(|j| sigma.at(pi.at(j))).collect())
}

fn check_input_sets(n: usize, input: &FiniteDist<ValueSet>) -> Result<()> {
    for s in input.support() {
        if s.len() != n {
            return Err(CoreError::BadLength {
                expected: n,
                found: s.len(),
            });
        }
    }
    Ok(())
}

/// Exact expected reward of an ordinal policy under the task's priors.
pub fn evaluate_ordinal(
    task: &OrdinalTask,
    policy: &dyn OrdinalPolicy,
    budget: &EnumBudget,
) -> Result<Rational> {
    let mut total = Rational::zero();
    let mut leaves: u128 = 0;
    for (sigma, ps) in task.ranks.iter() {
        for (pi, pp) in task.arrival.iter() {
            let tau = compose(sigma, pi)?;
            let mut actions = Vec::with_capacity(task.n);
            let v = ordinal_walk(task, policy, &tau, sigma, pi, &mut actions, budget, &mut leaves)?;
            total += ps * pp * v;
        }
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn ordinal_walk(
    task: &OrdinalTask,
    policy: &dyn OrdinalPolicy,
    tau: &Perm,
    sigma: &Perm,
    pi: &Perm,
    actions: &mut Vec<Action>,
    budget: &EnumBudget,
    leaves: &mut u128,
) -> Result<Rational> {
    let k = actions.len() + 1;
    let ranking = tau.prefix_ranking(k)?;
    let dist = policy.act(&OrdinalObs {
        n: task.n,
        step: k,
        identities: &pi.images()[..k],
        ranking: &ranking,
        past_actions: actions,
        action_set: task.action_set(k),
    })?;
    let pairs: Vec<(Action, Rational)> = dist.iter().map(|(a, p)| (*a, p.clone())).collect();
    let mut out = Rational::zero();
    for (a, pa) in pairs {
        if !task.action_set(k).contains(&a) {
            return Err(CoreError::BadParam(format!(
                "policy played {a} outside the step-{k} action set"
            )));
        }
        actions.push(a);
        let sub = if k == task.n {
            *leaves += 1;
            budget.check(*leaves)?;
            task.reward_value(actions, sigma, pi)?
        } else {
            ordinal_walk(task, policy, tau, sigma, pi, actions, budget, leaves)?
        };
        actions.pop();
        out += pa * sub;
    }
    Ok(out)
}

/// Exact expected reward of a value-observing policy when the value set is
/// drawn from `input` and assigned to elements through the task's ranking
/// prior.
pub fn evaluate_cardinal(
    task: &OrdinalTask,
    policy: &dyn CardinalPolicy,
    input: &FiniteDist<ValueSet>,
    budget: &EnumBudget,
) -> Result<Rational> {
    check_input_sets(task.n, input)?;
    let mut total = Rational::zero();
    let mut leaves: u128 = 0;
    for (sigma, ps) in task.ranks.iter() {
        for (pi, pp) in task.arrival.iter() {
            for (s, pf) in input.iter() {
                let mut vals = Vec::with_capacity(task.n);
                for j in 1..=task.n {
                    vals.push(s.order_stat(sigma.at(pi.at(j)))?);
                }
                let mut actions = Vec::with_capacity(task.n);
                let v = cardinal_walk(
                    task,
                    policy,
                    &vals,
                    sigma,
                    pi,
                    &mut actions,
                    budget,
                    &mut leaves,
                )?;
                total += ps * pp * pf * v;
            }
        }
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn cardinal_walk(
    task: &OrdinalTask,
    policy: &dyn CardinalPolicy,
    vals: &[u64],
    sigma: &Perm,
    pi: &Perm,
    actions: &mut Vec<Action>,
    budget: &EnumBudget,
    leaves: &mut u128,
) -> Result<Rational> {
    let k = actions.len() + 1;
    let dist = policy.act(&CardinalObs {
        n: task.n,
        step: k,
        identities: &pi.images()[..k],
        values: &vals[..k],
        past_actions: actions,
        action_set: task.action_set(k),
    })?;
    let pairs: Vec<(Action, Rational)> = dist.iter().map(|(a, p)| (*a, p.clone())).collect();
    let mut out = Rational::zero();
    for (a, pa) in pairs {
        if !task.action_set(k).contains(&a) {
            return Err(CoreError::BadParam(format!(
                "policy played {a} outside the step-{k} action set"
            )));
        }
        actions.push(a);
        let sub = if k == task.n {
            *leaves += 1;
            budget.check(*leaves)?;
            task.reward_value(actions, sigma, pi)?
        } else {
            cardinal_walk(task, policy, vals, sigma, pi, actions, budget, leaves)?
        };
        actions.pop();
        out += pa * sub;
    }
    Ok(out)
}

/// Expectation over the priors of the best feasible reward; no policy of
/// either kind can beat it.
pub fn offline_optimum(task: &OrdinalTask, budget: &EnumBudget) -> Result<Rational> {
    let mut per_pair: u128 = 1;
    for set in &task.action_sets {
        per_pair = per_pair.saturating_mul(set.len() as u128);
    }
    let pairs = task.ranks.support_size() as u128 * task.arrival.support_size() as u128;
    budget.check(per_pair.saturating_mul(pairs))?;
    let mut total = Rational::zero();
    for (sigma, ps) in task.ranks.iter() {
        for (pi, pp) in task.arrival.iter() {
            total += ps * pp * best_reward(task, sigma, pi)?;
        }
    }
    Ok(total)
}

fn best_reward(task: &OrdinalTask, sigma: &Perm, pi: &Perm) -> Result<Rational> {
    let mut best = Rational::zero();
    for actions in task
        .action_sets
        .iter()
        .map(|set| set.iter().copied())
        .multi_cartesian_product()
    {
        let r = task.reward_value(&actions, sigma, pi)?;
        if r > best {
            best = r;
        }
    }
    Ok(best)
}

/// Largest reward any feasible action vector attains over the priors'
/// supports; the scale factor in every drift-to-value bound.
pub fn max_reward(task: &OrdinalTask, budget: &EnumBudget) -> Result<Rational> {
    let mut per_pair: u128 = 1;
    for set in &task.action_sets {
        per_pair = per_pair.saturating_mul(set.len() as u128);
    }
    let pairs = task.ranks.support_size() as u128 * task.arrival.support_size() as u128;
    budget.check(per_pair.saturating_mul(pairs))?;
    let mut best = Rational::zero();
    for sigma in task.ranks.support() {
        for pi in task.arrival.support() {
            let b = best_reward(task, sigma, pi)?;
            if b > best {
                best = b;
            }
        }
    }
    Ok(best)
}

/// Plays a fixed action plan regardless of observations.
#[derive(Debug, Clone)]
pub struct FixedPlanPolicy {
    pub plan: Vec<Action>,
}

impl OrdinalPolicy for FixedPlanPolicy {
    fn act(&self, obs: &OrdinalObs) -> Result<FiniteDist<Action>> {
        if self.plan.len() != obs.n {
            return Err(CoreError::BadLength {
                expected: obs.n,
                found: self.plan.len(),
            });
        }
        Ok(FiniteDist::point(self.plan[obs.step - 1]))
    }
}

/// Guess-the-world baseline: commit to the single most profitable
/// (ranking, arrival) pair under the priors and play the lexicographically
/// first action vector that is optimal for it. Its value is at least the
/// offline optimum divided by the number of prior pairs, hence at least
/// `offline / (n!)^2`.
pub fn trivial_ordinal_policy(task: &OrdinalTask, budget: &EnumBudget) -> Result<FixedPlanPolicy> {
    let mut per_pair: u128 = 1;
    for set in &task.action_sets {
        per_pair = per_pair.saturating_mul(set.len() as u128);
    }
    let pairs = task.ranks.support_size() as u128 * task.arrival.support_size() as u128;
    budget.check(per_pair.saturating_mul(pairs))?;
    let mut best_score = Rational::zero();
    let mut best_pair: Option<(Perm, Perm)> = None;
    for (sigma, ps) in task.ranks.iter() {
        for (pi, pp) in task.arrival.iter() {
            let score = ps * pp * best_reward(task, sigma, pi)?;
            if best_pair.is_none() || score > best_score {
                best_score = score;
                best_pair = Some((sigma.clone(), pi.clone()));
            }
        }
    }
    let (sigma, pi) = best_pair.expect("priors have nonempty support");
    let target = best_reward(task, &sigma, &pi)?;
    let mut plan: Option<Vec<Action>> = None;
    for actions in task
        .action_sets
        .iter()
        .map(|set| set.iter().copied())
        .multi_cartesian_product()
    {
        if task.reward_value(&actions, &sigma, &pi)? == target {
            plan = Some(actions);
            break;
        }
    }
    Ok(FixedPlanPolicy {
        plan: plan.expect("some action vector attains the maximum"),
    })
}

/// Classic record rule: skip the first `skip` arrivals, then accept the
/// first arrival that is the largest seen so far, once.
#[derive(Debug, Clone)]
pub struct CutoffPolicy {
    pub skip: usize,
}

impl OrdinalPolicy for CutoffPolicy {
    fn act(&self, obs: &OrdinalObs) -> Result<FiniteDist<Action>> {
        let free = !obs.past_actions.contains(&ACCEPT);
        let record = obs.ranking.at(obs.step) == obs.step;
        let take = free && obs.step > self.skip && record;
        Ok(FiniteDist::point(if take { ACCEPT } else { REJECT }))
    }
}

/// Accepts once, on the first value at or above a fixed threshold.
#[derive(Debug, Clone)]
pub struct ThresholdPolicy {
    pub at_least: u64,
}

impl CardinalPolicy for ThresholdPolicy {
    fn act(&self, obs: &CardinalObs) -> Result<FiniteDist<Action>> {
        let free = !obs.past_actions.contains(&ACCEPT);
        let take = free && obs.values[obs.step - 1] >= self.at_least;
        Ok(FiniteDist::point(if take { ACCEPT } else { REJECT }))
    }
}

/// Value-aware stopping rule for two-step inputs from an adjacent-pair
/// family over `[1, bound]`: the first value is the overall maximum exactly
/// when it equals `bound`, so accept it then, otherwise take the second.
#[derive(Debug, Clone)]
pub struct BayesPairPolicy {
    pub bound: u64,
}

impl CardinalPolicy for BayesPairPolicy {
    fn act(&self, obs: &CardinalObs) -> Result<FiniteDist<Action>> {
        let free = !obs.past_actions.contains(&ACCEPT);
        let take = free && (obs.values[obs.step - 1] == self.bound || obs.step == obs.n);
        Ok(FiniteDist::point(if take { ACCEPT } else { REJECT }))
    }
}

/// Plays uniformly over each step's action set; the canonical
/// observation-oblivious baseline.
#[derive(Debug, Clone)]
pub struct UniformOrdinalPolicy;

impl OrdinalPolicy for UniformOrdinalPolicy {
    fn act(&self, obs: &OrdinalObs) -> Result<FiniteDist<Action>> {
        FiniteDist::uniform(obs.action_set.iter().copied())
    }
}

/// Runs an ordinal rule on value observations by ranking them first. Since
/// the ranking is all the wrapped rule reads, the evaluated value matches
/// the ordinal evaluation for every input distribution.
#[derive(Debug, Clone)]
pub struct OrdinalAsCardinal<P>(pub P);

impl<P: OrdinalPolicy> CardinalPolicy for OrdinalAsCardinal<P> {
    fn act(&self, obs: &CardinalObs) -> Result<FiniteDist<Action>> {
        let ranking = Perm::ranking_of(obs.values)?;
        self.0.act(&OrdinalObs {
            n: obs.n,
            step: obs.step,
            identities: obs.identities,
            ranking: &ranking,
            past_actions: obs.past_actions,
            action_set: obs.action_set,
        })
    }
}

/// Stop-at-the-maximum task: accept at most once, win when the accepted
/// arrival carries the largest value. Uniform priors on both permutations.
pub fn secretary_task(n: usize) -> Result<OrdinalTask> {
    if n == 0 {
        return Err(CoreError::BadParam("need at least one arrival".into()));
    }
    let perms = FiniteDist::uniform(Perm::all(n))?;
    OrdinalTask::new(
        format!("secretary-{n}"),
        perms.clone(),
        perms,
        vec![vec![REJECT, ACCEPT]; n],
        Arc::new(|a: &[Action]| a.iter().filter(|&&x| x == ACCEPT).count() <= 1),
        Arc::new(move |a: &[Action], sigma: &Perm, pi: &Perm| {
            let won = a
                .iter()
                .enumerate()
                .any(|(i, &x)| x == ACCEPT && sigma.at(pi.at(i + 1)) == n);
            if won {
                Rational::one()
            } else {
                Rational::zero()
            }
        }),
    )
}

/// One hidden rank: after seeing `n - 1` arrivals, name the rank of the one
/// still missing. Guessing happens at step `n - 1`; the other steps are
/// forced no-ops. Any guess is feasible, so the offline optimum is one.
pub fn die_guessing_task(n: usize) -> Result<OrdinalTask> {
    if n < 2 {
        return Err(CoreError::TooFewFaces { n, min: 2 });
    }
    let perms = FiniteDist::uniform(Perm::all(n))?;
    let mut sets: Vec<Vec<Action>> = vec![vec![0]; n];
    sets[n - 2] = (1..=n as Action).collect();
    OrdinalTask::new(
        format!("die-guessing-{n}"),
        perms.clone(),
        perms,
        sets,
        Arc::new(|_: &[Action]| true),
        Arc::new(move |a: &[Action], sigma: &Perm, pi: &Perm| {
            if a[n - 2] as usize == sigma.at(pi.at(n)) {
                Rational::one()
            } else {
                Rational::zero()
            }
        }),
    )
}

/// Accept up to `choose` arrivals; each accepted arrival among the `best`
/// largest values pays one.
pub fn jk_secretary_task(n: usize, choose: usize, best: usize) -> Result<OrdinalTask> {
    if n == 0 || choose == 0 || best == 0 || best > n {
        return Err(CoreError::BadParam(format!(
            "bad selection sizes: n={n} choose={choose} best={best}"
        )));
    }
    let perms = FiniteDist::uniform(Perm::all(n))?;
    OrdinalTask::new(
        format!("select-{choose}-of-top-{best}-{n}"),
        perms.clone(),
        perms,
        vec![vec![REJECT, ACCEPT]; n],
        Arc::new(move |a: &[Action]| a.iter().filter(|&&x| x == ACCEPT).count() <= choose),
        Arc::new(move |a: &[Action], sigma: &Perm, pi: &Perm| {
            let hits = a
                .iter()
                .enumerate()
                .filter(|&(i, &x)| x == ACCEPT && sigma.at(pi.at(i + 1)) > n - best)
                .count();
            Rational::from_integer((hits as u64).into())
        }),
    )
}

/// Two-sided stopping: `2n` faces on `n` cards, each card shows one face up
/// at a uniformly random table position. The first `n` steps reveal the
/// up faces with no choices; the last `n` steps turn the cards again in
/// table order, and the goal is to stop on the largest originally-hidden
/// face. Only the task is provided, no tuned policy.
pub fn two_sided_googol_task(n: usize) -> Result<OrdinalTask> {
    if n == 0 {
        return Err(CoreError::BadParam("need at least one card".into()));
    }
    let mut arrivals = Vec::new();
    for rho in Perm::all(n) {
        for mask in 0u32..(1 << n) {
            let mut images = vec![0usize; 2 * n];
            for k in 1..=n {
                let up = mask & (1 << (k - 1)) != 0;
                let side = if up { n } else { 0 };
                images[k - 1] = rho.at(k) + side;
                images[n + k - 1] = rho.at(k) + n - side;
            }
            arrivals.push(Perm::new(images)?);
        }
    }
    let arrival = FiniteDist::uniform(arrivals)?;
    let ranks = FiniteDist::uniform(Perm::all(2 * n))?;
    let mut sets: Vec<Vec<Action>> = vec![vec![0]; n];
    sets.extend(std::iter::repeat_n(vec![REJECT, ACCEPT], n));
    OrdinalTask::new(
        format!("two-sided-{n}"),
        arrival,
        ranks,
        sets,
        Arc::new(|a: &[Action]| a.iter().filter(|&&x| x == ACCEPT).count() <= 1),
        Arc::new(move |a: &[Action], sigma: &Perm, pi: &Perm| {
            let hidden_max = (n + 1..=2 * n)
                .map(|t| sigma.at(pi.at(t)))
                .max()
                .expect("second half is nonempty");
            let won = (n + 1..=2 * n)
                .any(|t| a[t - 1] == ACCEPT && sigma.at(pi.at(t)) == hidden_max);
            if won {
                Rational::one()
            } else {
                Rational::zero()
            }
        }),
    )
}

/// Ordinal replay of a cardinal rule. At step one it draws a set from the
/// input law and hands the rule the smallest element; at each later step it
/// redraws a set conditioned on the old synthetic values sitting at the
/// order-statistic positions the observed ranking dictates, so the synthetic
/// prefix is always the bottom of the latest draw. When no set in the
/// support extends the history, the policy falls back to the
/// lexicographically first feasible completion of its actions so far.
pub struct ReplayPolicy<C: CardinalPolicy> {
    n: usize,
    input: FiniteDist<ValueSet>,
    cardinal: C,
    arrival: FiniteDist<Perm>,
    ranks: FiniteDist<Perm>,
    action_sets: Vec<Vec<Action>>,
    feasible: FeasibleFn,
    budget: EnumBudget,
}

/// Builds the ordinal replay of `cardinal` over the value law `input`.
pub fn ordinalize<C: CardinalPolicy>(
    task: &OrdinalTask,
    cardinal: C,
    input: &FiniteDist<ValueSet>,
    budget: &EnumBudget,
) -> Result<ReplayPolicy<C>> {
    check_input_sets(task.n, input)?;
    Ok(ReplayPolicy {
        n: task.n,
        input: input.clone(),
        cardinal,
        arrival: task.arrival.clone(),
        ranks: task.ranks.clone(),
        action_sets: task.action_sets.clone(),
        feasible: task.feasible.clone(),
        budget: *budget,
    })
}

impl<C: CardinalPolicy> ReplayPolicy<C> {
    /// Probability that the replay abandons the cardinal rule at some step,
    /// under the task priors. Failure depends only on the observed ranking
    /// path, never on the actions, so the actions integrate out.
    pub fn fallback_mass(&self) -> Result<Rational> {
        let mut taus: BTreeMap<Perm, Rational> = BTreeMap::new();
        for (sigma, ps) in self.ranks.iter() {
            for (pi, pp) in self.arrival.iter() {
                *taus
                    .entry(compose(sigma, pi)?)
                    .or_insert_with(Rational::zero) += ps * pp;
            }
        }
        let mut out = Rational::zero();
        let mut work: u128 = 0;
        for (tau, wt) in &taus {
            let mut live = initial_chain(&self.input);
            let mut fail = Rational::zero();
            for j in 2..=self.n {
                work += live.len() as u128 * self.input.support_size() as u128;
                self.budget.check(work)?;
                let (next, failed) = chain_transition(&live, &self.input, &tau.prefix_ranking(j)?);
                live = next;
                fail += failed;
            }
            out += wt * fail;
        }
        Ok(out)
    }

    fn synthetic_dist(
        &self,
        obs: &OrdinalObs,
        step: usize,
        sig: &Perm,
        sorted_vals: &[u64],
    ) -> Result<FiniteDist<Action>> {
        let mut synth = Vec::with_capacity(step);
        for t in 1..=step {
            synth.push(sorted_vals[sig.at(t) - 1]);
        }
        self.cardinal.act(&CardinalObs {
            n: self.n,
            step,
            identities: &obs.identities[..step],
            values: &synth,
            past_actions: &obs.past_actions[..step - 1],
            action_set: &self.action_sets[step - 1],
        })
    }

    fn fallback_plan(&self, past: &[Action]) -> Vec<Action> {
        let mut buf = past.to_vec();
        if lex_complete(&self.action_sets, self.feasible.as_ref(), &mut buf) {
            return buf[past.len()..].to_vec();
        }
        // nothing feasible remains, and every infeasible play pays zero
        self.action_sets[past.len()..]
            .iter()
            .map(|set| set[0])
            .collect()
    }
}

fn lex_complete(
    sets: &[Vec<Action>],
    feasible: &(dyn Fn(&[Action]) -> bool + Send + Sync),
    buf: &mut Vec<Action>,
) -> bool {
    if buf.len() == sets.len() {
        return feasible(buf);
    }
    let step = buf.len();
    for &a in &sets[step] {
        buf.push(a);
        if lex_complete(sets, feasible, buf) {
            return true;
        }
        buf.pop();
    }
    false
}

fn initial_chain(input: &FiniteDist<ValueSet>) -> BTreeMap<Vec<u64>, Rational> {
    let mut live: BTreeMap<Vec<u64>, Rational> = BTreeMap::new();
    for (s, w) in input.iter() {
        *live
            .entry(vec![s.values()[0]])
            .or_insert_with(Rational::zero) += w;
    }
    live
}

/// One synthetic-resampling step. `sig` is the ranking of the first `j`
/// arrivals; the old values must occupy the bottom-`j` order-statistic
/// positions other than the new arrival's rank, and the surviving mass
/// lands on the bottom `j` values of each consistent set.
fn chain_transition(
    live: &BTreeMap<Vec<u64>, Rational>,
    input: &FiniteDist<ValueSet>,
    sig: &Perm,
) -> (BTreeMap<Vec<u64>, Rational>, Rational) {
    let j = sig.len();
    let new_rank = sig.at(j);
    let mut next: BTreeMap<Vec<u64>, Rational> = BTreeMap::new();
    let mut failed = Rational::zero();
    for (vals, mass) in live {
        let mut total = Rational::zero();
        let mut matches: Vec<(&ValueSet, &Rational)> = Vec::new();
        for (s, ws) in input.iter() {
            if extends(s, vals, j, new_rank) {
                total += ws;
                matches.push((s, ws));
            }
        }
        if total.is_zero() {
            failed += mass;
            continue;
        }
        for (s, ws) in matches {
            *next
                .entry(s.values()[..j].to_vec())
                .or_insert_with(Rational::zero) += mass * ws / &total;
        }
    }
    (next, failed)
}

fn extends(s: &ValueSet, old: &[u64], j: usize, new_rank: usize) -> bool {
    let mut t = 0;
    for pos in 1..=j {
        if pos == new_rank {
            continue;
        }
        if s.values()[pos - 1] != old[t] {
            return false;
        }
        t += 1;
    }
    true
}

impl<C: CardinalPolicy> OrdinalPolicy for ReplayPolicy<C> {
    fn act(&self, obs: &OrdinalObs) -> Result<FiniteDist<Action>> {
        if obs.n != self.n || obs.past_actions.len() + 1 != obs.step {
            return Err(CoreError::BadParam(
                "observation shape does not match the replayed task".into(),
            ));
        }
        let k = obs.step;
        let mut live = initial_chain(&self.input);
        let mut fallen: BTreeMap<usize, Rational> = BTreeMap::new();
        let mut plans: BTreeMap<usize, Vec<Action>> = BTreeMap::new();
        let mut work: u128 = 0;
        for j in 1..=k {
            let sig = if j == k {
                obs.ranking.clone()
            } else {
                obs.ranking.prefix_ranking(j)?
            };
            if j >= 2 {
                work += live.len() as u128 * self.input.support_size() as u128;
                self.budget.check(work)?;
                let (next, failed) = chain_transition(&live, &self.input, &sig);
                live = next;
                if !failed.is_zero() {
                    plans
                        .entry(j)
                        .or_insert_with(|| self.fallback_plan(&obs.past_actions[..j - 1]));
                    *fallen.entry(j).or_insert_with(Rational::zero) += failed;
                }
            }
            if j == k {
                break;
            }
            // posterior over synthetic histories given the action taken then
            let played = obs.past_actions[j - 1];
            let mut kept: BTreeMap<Vec<u64>, Rational> = BTreeMap::new();
            for (vals, mass) in &live {
                let p = self.synthetic_dist(obs, j, &sig, vals)?.prob(&played);
                if !p.is_zero() {
                    kept.insert(vals.clone(), mass * p);
                }
            }
            live = kept;
            fallen.retain(|fj, _| plans[fj][j - fj] == played);
        }
        let mut out: BTreeMap<Action, Rational> = BTreeMap::new();
        let mut total = Rational::zero();
        for (vals, mass) in &live {
            let dist = self.synthetic_dist(obs, k, obs.ranking, vals)?;
            for (a, p) in dist.iter() {
                *out.entry(*a).or_insert_with(Rational::zero) += mass * p;
            }
            total += mass;
        }
        for (fj, mass) in &fallen {
            *out.entry(plans[fj][k - fj]).or_insert_with(Rational::zero) += mass;
            total += mass;
        }
        if total.is_zero() {
            return Err(CoreError::ZeroMass);
        }
        FiniteDist::from_pairs(out.into_iter().map(|(a, m)| (a, m / &total)))
    }
}

/// Drift of one synthetic prefix law, worst case over ranking paths.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftStep {
    pub k: usize,
    /// Distance to the true bottom-`k` law, counting abandoned mass.
    pub tv_total: Rational,
    /// Distance of the surviving law, renormalized; one if nothing survives.
    pub tv_success: Rational,
    /// Mass abandoned by step `k`.
    pub fail_mass: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub n: usize,
    /// Largest TV distance between equal-size order-statistic marginals of
    /// the input; step `k` drift is provably at most `(k - 1)` times this.
    pub delta: Rational,
    pub steps: Vec<DriftStep>,
}

/// Exact per-step distance between the synthetic prefix law generated by
/// the replay and the true bottom-`k` law of `input`, maximized over every
/// ranking path the task can produce.
pub fn simulation_drift(
    task: &OrdinalTask,
    input: &FiniteDist<ValueSet>,
    budget: &EnumBudget,
) -> Result<DriftReport> {
    check_input_sets(task.n, input)?;
    let n = task.n;
    let delta = max_subset_tv(input)?;
    let mut taus: BTreeSet<Perm> = BTreeSet::new();
    for sigma in task.ranks.support() {
        for pi in task.arrival.support() {
            taus.insert(compose(sigma, pi)?);
        }
    }
    let mut steps: Vec<DriftStep> = (1..=n)
        .map(|k| DriftStep {
            k,
            tv_total: Rational::zero(),
            tv_success: Rational::zero(),
            fail_mass: Rational::zero(),
        })
        .collect();
    let mut truths: Vec<BTreeMap<Vec<u64>, Rational>> = Vec::with_capacity(n);
    for k in 1..=n {
        let marginal = subset_marginal(input, &(1..=k).collect())?;
        truths.push(
            marginal
                .iter()
                .map(|(s, w)| (s.values().to_vec(), w.clone()))
                .collect(),
        );
    }
    let mut work: u128 = 0;
    for tau in &taus {
        let mut live = initial_chain(input);
        let mut fail = Rational::zero();
        for k in 1..=n {
            if k >= 2 {
                work += live.len() as u128 * input.support_size() as u128;
                budget.check(work)?;
                let (next, failed) = chain_transition(&live, input, &tau.prefix_ranking(k)?);
                live = next;
                fail += failed;
            }
            let truth = &truths[k - 1];
            let tv_total = extended_tv(&live, &fail, truth);
            let live_total: Rational = live.values().sum();
            let tv_success = if live_total.is_zero() {
                Rational::one()
            } else {
                let scaled: BTreeMap<Vec<u64>, Rational> = live
                    .iter()
                    .map(|(v, m)| (v.clone(), m / &live_total))
                    .collect();
                extended_tv(&scaled, &Rational::zero(), truth)
            };
            let bound = delta.clone() * Rational::from_integer(((k - 1) as u64).into());
            assert!(
                tv_total <= bound,
                "synthetic prefix drift exceeded its step bound at k={k}"
            );
            let slot = &mut steps[k - 1];
            if tv_total > slot.tv_total {
                slot.tv_total = tv_total;
            }
            if tv_success > slot.tv_success {
                slot.tv_success = tv_success;
            }
            if fail > slot.fail_mass {
                slot.fail_mass = fail.clone();
            }
        }
    }
    Ok(DriftReport { n, delta, steps })
}

fn extended_tv(
    live: &BTreeMap<Vec<u64>, Rational>,
    fail: &Rational,
    truth: &BTreeMap<Vec<u64>, Rational>,
) -> Rational {
    let mut diff = fail.clone();
    for (vals, m) in live {
        match truth.get(vals) {
            Some(t) => diff += (m - t).abs(),
            None => diff += m,
        }
    }
    for (vals, t) in truth {
        if !live.contains_key(vals) {
            diff += t;
        }
    }
    diff / Rational::from_integer(2.into())
}

/// One sampled run of an ordinal policy; priors and policy randomness are
/// drawn from `rng`.
pub fn sample_ordinal_reward<R: rand::Rng + ?Sized>(
    task: &OrdinalTask,
    policy: &dyn OrdinalPolicy,
    rng: &mut R,
) -> Result<Rational> {
    let sigma = task.ranks.sample(rng).clone();
    let pi = task.arrival.sample(rng).clone();
    let tau = compose(&sigma, &pi)?;
    let mut actions = Vec::with_capacity(task.n);
    for k in 1..=task.n {
        let ranking = tau.prefix_ranking(k)?;
        let dist = policy.act(&OrdinalObs {
            n: task.n,
            step: k,
            identities: &pi.images()[..k],
            ranking: &ranking,
            past_actions: &actions,
            action_set: task.action_set(k),
        })?;
        let a = *dist.sample(rng);
        if !task.action_set(k).contains(&a) {
            return Err(CoreError::BadParam(format!(
                "policy played {a} outside the step-{k} action set"
            )));
        }
        actions.push(a);
    }
    task.reward_value(&actions, &sigma, &pi)
}

/// One sampled run of a cardinal policy over a drawn value set.
pub fn sample_cardinal_reward<R: rand::Rng + ?Sized>(
    task: &OrdinalTask,
    policy: &dyn CardinalPolicy,
    input: &FiniteDist<ValueSet>,
    rng: &mut R,
) -> Result<Rational> {
    check_input_sets(task.n, input)?;
    let sigma = task.ranks.sample(rng).clone();
    let pi = task.arrival.sample(rng).clone();
    let s = input.sample(rng).clone();
    let mut vals = Vec::with_capacity(task.n);
    for j in 1..=task.n {
        vals.push(s.order_stat(sigma.at(pi.at(j)))?);
    }
    let mut actions = Vec::with_capacity(task.n);
    for k in 1..=task.n {
        let dist = policy.act(&CardinalObs {
            n: task.n,
            step: k,
            identities: &pi.images()[..k],
            values: &vals[..k],
            past_actions: &actions,
            action_set: task.action_set(k),
        })?;
        let a = *dist.sample(rng);
        if !task.action_set(k).contains(&a) {
            return Err(CoreError::BadParam(format!(
                "policy played {a} outside the step-{k} action set"
            )));
        }
        actions.push(a);
    }
    task.reward_value(&actions, &sigma, &pi)
}
