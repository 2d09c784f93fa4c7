//! Bayes-optimal baselines for guessing games with cardinal observations.
//!
//! These are the full-information opponents: they see actual values, know
//! the prior, and play the posterior-optimal action. Comparing them against
//! ordinal play quantifies how much the values were worth.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::dist::{EnumBudget, FiniteDist};
use crate::error::{CoreError, Result};
use crate::osi::ValueSet;
use crate::perm::Perm;
use crate::rational::{rat, Rational};

/// Joint law of a hidden label in `[k]` and an observation, with the payoff
/// for calling each label correctly. Wrong calls pay nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDist<O: Ord + Clone> {
    joint: FiniteDist<(usize, O)>,
    rewards: Vec<Rational>,
}

impl<O: Ord + Clone> LabeledDist<O> {
    pub fn new(joint: FiniteDist<(usize, O)>, rewards: Vec<Rational>) -> Result<Self> {
        let k = rewards.len();
        if k == 0 {
            return Err(CoreError::BadParam("need at least one label".into()));
        }
        if let Some(r) = rewards.iter().find(|r| r < &&Rational::zero()) {
            return Err(CoreError::BadParam(format!("negative reward {r}")));
        }
        for ((label, _), _) in joint.iter() {
            if *label == 0 || *label > k {
                return Err(CoreError::IndexOutOfRange {
                    index: *label,
                    len: k,
                });
            }
        }
        Ok(LabeledDist { joint, rewards })
    }

    pub fn joint(&self) -> &FiniteDist<(usize, O)> {
        &self.joint
    }

    pub fn rewards(&self) -> &[Rational] {
        &self.rewards
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleShotReport<O: Ord> {
    pub value: Rational,
    /// Optimal label per observation; ties resolved to the smaller label.
    pub decisions: BTreeMap<O, usize>,
}

/// Expected reward of the Bayes-optimal guesser:
/// `sum_o max_i P[label = i, obs = o] * r_i`.
pub fn bayes_single_shot<O: Ord + Clone>(d: &LabeledDist<O>) -> SingleShotReport<O> {
    let mut by_obs: BTreeMap<O, BTreeMap<usize, Rational>> = BTreeMap::new();
    for ((label, obs), w) in d.joint().iter() {
        *by_obs
            .entry(obs.clone())
            .or_default()
            .entry(*label)
            .or_insert_with(Rational::zero) += w;
    }
    let mut value = Rational::zero();
    let mut decisions = BTreeMap::new();
    for (obs, masses) in by_obs {
        let mut best: Option<(usize, Rational)> = None;
        for (label, mass) in masses {
            let gain = mass * &d.rewards()[label - 1];
            match &best {
                Some((_, cur)) if &gain <= cur => {}
                _ => best = Some((label, gain)),
            }
        }
        let (label, gain) = best.expect("observation with no mass");
        value += gain;
        decisions.insert(obs, label);
    }
    SingleShotReport { value, decisions }
}

/// The two-value die family: `m` value pairs `{20i, 20i + 20}`, a pair drawn
/// uniformly, one face deleted uniformly; the label is the deleted index and
/// either correct call pays 2. Interior observations stay ambiguous, so the
/// oracle's value is `1 + 1/m`.
pub fn die_pairs_dist(m: u64) -> Result<LabeledDist<u64>> {
    if m == 0 {
        return Err(CoreError::BadParam("need at least one pair".into()));
    }
    let w = Rational::new(1.into(), (4 * m).into());
    let mut pairs = Vec::with_capacity(2 * m as usize);
    for i in 1..=m {
        let (lo, hi) = (20 * i, 20 * i + 20);
        // deleting the smaller face (label 1) leaves the larger, and vice versa
        pairs.push(((1usize, hi), w.clone() + &w));
        pairs.push(((2usize, lo), w.clone() + &w));
    }
    let joint = FiniteDist::from_pairs(pairs)?;
    LabeledDist::new(joint, vec![rat(2, 1), rat(2, 1)])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecretaryReport {
    pub n: usize,
    pub value: Rational,
    pub states: usize,
}

/// Bayes-optimal secretary: values drawn as a set from `f`, arrival order
/// uniform, observations are the actual values seen so far. Exact backward
/// induction over states (sorted seen values, position of the current
/// arrival among them).
pub fn bayes_secretary(f: &FiniteDist<ValueSet>, budget: &EnumBudget) -> Result<SecretaryReport> {
    let mut lens = f.support().map(ValueSet::len);
    let n = lens.next().ok_or(CoreError::EmptyRange)?;
    if let Some(bad) = lens.find(|&l| l != n) {
        return Err(CoreError::BadLength {
            expected: n,
            found: bad,
        });
    }
    let arrivals = Perm::all(n);
    budget.check((f.support_size() as u128) * (arrivals.len() as u128))?;

    type State = (Vec<u64>, usize);
    struct Traj {
        weight: Rational,
        states: Vec<State>,
        wins_if_accept: Vec<bool>,
    }
    let pi_weight = Rational::new(1.into(), (arrivals.len() as u64).into());
    let mut trajs = Vec::with_capacity(f.support_size() * arrivals.len());
    for (s, w) in f.iter() {
        for pi in &arrivals {
            let mut seen: Vec<u64> = Vec::with_capacity(n);
            let mut states = Vec::with_capacity(n);
            let mut wins = Vec::with_capacity(n);
            for i in 1..=n {
                let rank = pi.at(i);
                let v = s.order_stat(rank)?;
                let pos = seen.partition_point(|&x| x < v);
                seen.insert(pos, v);
                states.push((seen.clone(), pos + 1));
                wins.push(rank == n);
            }
            trajs.push(Traj {
                weight: w * &pi_weight,
                states,
                wins_if_accept: wins,
            });
        }
    }

    let mut states_total = 0usize;
    let mut next: BTreeMap<State, Rational> = BTreeMap::new();
    let mut value = Rational::zero();
    for i in (1..=n).rev() {
        let mut mass: BTreeMap<State, Rational> = BTreeMap::new();
        let mut accept_mass: BTreeMap<State, Rational> = BTreeMap::new();
        let mut cont_mass: BTreeMap<State, Rational> = BTreeMap::new();
        for t in &trajs {
            let st = t.states[i - 1].clone();
            *mass.entry(st.clone()).or_insert_with(Rational::zero) += &t.weight;
            if t.wins_if_accept[i - 1] {
                *accept_mass.entry(st.clone()).or_insert_with(Rational::zero) += &t.weight;
            }
            if i < n {
                let nv = &next[&t.states[i]];
                *cont_mass.entry(st).or_insert_with(Rational::zero) += nv * &t.weight;
            }
        }
        states_total += mass.len();
        let mut cur: BTreeMap<State, Rational> = BTreeMap::new();
        for (st, m) in &mass {
            let accept = accept_mass.get(st).cloned().unwrap_or_else(Rational::zero) / m;
            let cont = cont_mass.get(st).cloned().unwrap_or_else(Rational::zero) / m;
            let g = accept.max(cont);
            if i == 1 {
                value += m * &g;
            }
            cur.insert(st.clone(), g);
        }
        next = cur;
    }
    Ok(SecretaryReport {
        n,
        value,
        states: states_total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_int;

    #[test]
    fn die_pairs_value_is_one_plus_inverse_m() {
        for m in [1u64, 2, 4, 10] {
            let d = die_pairs_dist(m).unwrap();
            let report = bayes_single_shot(&d);
            assert_eq!(report.value, rat_int(1) + rat(1, m as i64));
        }
    }

    #[test]
    fn die_pairs_decisions_favor_smaller_label_on_ties() {
        let d = die_pairs_dist(3).unwrap();
        let report = bayes_single_shot(&d);
        // interior faces are perfectly ambiguous
        assert_eq!(report.decisions[&40], 1);
        assert_eq!(report.decisions[&60], 1);
        // boundary faces are certain
        assert_eq!(report.decisions[&20], 2);
        assert_eq!(report.decisions[&80], 1);
    }

    #[test]
    fn single_shot_weighs_rewards_not_just_mass() {
        // label 2 is less likely but pays far more
        let joint = FiniteDist::from_pairs([
            ((1usize, 0u8), rat(3, 4)),
            ((2usize, 0u8), rat(1, 4)),
        ])
        .unwrap();
        let d = LabeledDist::new(joint, vec![rat_int(1), rat_int(10)]).unwrap();
        let report = bayes_single_shot(&d);
        assert_eq!(report.decisions[&0], 2);
        assert_eq!(report.value, rat(10, 4));
    }

    #[test]
    fn secretary_point_mass_is_free_money() {
        let s = ValueSet::tight(vec![3, 7, 20]).unwrap();
        let f = FiniteDist::point(s);
        let report = bayes_secretary(&f, &EnumBudget::default()).unwrap();
        assert_eq!(report.value, rat_int(1));
    }

    #[test]
    fn secretary_two_of_three_values() {
        // uniform over the 2-subsets of {1,2,3}: first value 1 or 3 decides
        // the game, first value 2 is a coin flip either way
        let f = FiniteDist::uniform([
            ValueSet::new(vec![1, 2], 3).unwrap(),
            ValueSet::new(vec![1, 3], 3).unwrap(),
            ValueSet::new(vec![2, 3], 3).unwrap(),
        ])
        .unwrap();
        let report = bayes_secretary(&f, &EnumBudget::default()).unwrap();
        assert_eq!(report.value, rat(5, 6));
    }
}
