//! Randomized checks of the library's structural laws: metric axioms,
//! data processing, amplification chains, evaluator identities, and the
//! worst-case guarantees of the guessing policies. Everything here is exact
//! rational arithmetic; proptest only drives the instance generation.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_traits::{One, Zero};
use proptest::collection::{btree_map, btree_set, vec as pvec};
use proptest::prelude::*;

use ordlab_core::dist::{uniform_int, EnumBudget, FiniteDist};
use ordlab_core::oracle::{bayes_secretary, bayes_single_shot, LabeledDist};
use ordlab_core::osi::{
    deletion_marginal, index_path, max_subset_tv, subset_marginal, ValueSet,
};
use ordlab_core::rankguess::{
    guess_recursive, worst_case_expected_reward, NamedPolicy, RankGuessInstance,
};
use ordlab_core::rational::{rat, rat_int, Rational};
use ordlab_core::universal::{
    die_guessing_task, evaluate_cardinal, evaluate_ordinal, jk_secretary_task, max_reward,
    offline_optimum, ordinalize, secretary_task, simulation_drift, trivial_ordinal_policy,
    Action, CutoffPolicy, OrdinalAsCardinal, OrdinalTask, ThresholdPolicy, ACCEPT, REJECT,
};
use ordlab_core::Perm;

fn budget() -> EnumBudget {
    EnumBudget::default()
}

fn dist_from_weights(weights: &std::collections::BTreeMap<u64, u32>) -> FiniteDist<u64> {
    let total: i64 = weights.values().map(|&w| w as i64).sum();
    FiniteDist::from_pairs(
        weights
            .iter()
            .map(|(&x, &w)| (x, rat(w as i64, total))),
    )
    .expect("positive weights normalize")
}

fn small_dist() -> impl Strategy<Value = FiniteDist<u64>> {
    btree_map(0u64..8, 1u32..9, 1..5).prop_map(|m| dist_from_weights(&m))
}

fn triple_set() -> impl Strategy<Value = ValueSet> {
    btree_set(1u64..=30, 3).prop_map(|s| {
        ValueSet::new(s.into_iter().collect(), 40).expect("sorted triple in range")
    })
}

fn triple_family() -> impl Strategy<Value = FiniteDist<ValueSet>> {
    (pvec(triple_set(), 1..4), pvec(1u32..9, 4)).prop_map(|(sets, ws)| {
        let mut grouped: std::collections::BTreeMap<ValueSet, i64> =
            std::collections::BTreeMap::new();
        for (s, w) in sets.iter().zip(&ws) {
            *grouped.entry(s.clone()).or_insert(0) += *w as i64;
        }
        let total: i64 = grouped.values().sum();
        FiniteDist::from_pairs(grouped.into_iter().map(|(s, w)| (s, rat(w, total))))
            .expect("positive weights normalize")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tv_is_a_metric(p in small_dist(), q in small_dist(), r in small_dist()) {
        let pq = p.tv_distance(&q);
        prop_assert!(pq >= Rational::zero());
        prop_assert!(pq <= Rational::one());
        prop_assert_eq!(pq.clone(), q.tv_distance(&p));
        prop_assert_eq!(p.tv_distance(&p), Rational::zero());
        if pq.is_zero() {
            prop_assert_eq!(&p, &q);
        }
        prop_assert!(p.tv_distance(&r) <= pq + q.tv_distance(&r));
    }

    #[test]
    fn pushforward_contracts_tv(
        p in small_dist(),
        q in small_dist(),
        a in 0u64..5,
        b in 0u64..5,
        m in 1u64..7,
    ) {
        let fp = p.pushforward(|x| (a * x + b) % m);
        let fq = q.pushforward(|x| (a * x + b) % m);
        prop_assert!(fp.tv_distance(&fq) <= p.tv_distance(&q));
    }

    #[test]
    fn uniform_shift_stays_within_its_bound(
        a1 in 1i64..=6,
        w1 in 0i64..=6,
        pick in 0f64..1.0,
        frac in 0f64..1.0,
    ) {
        let b1 = a1 + w1;
        let b2 = (pick * (w1 + 1) as f64) as i64;
        let a2 = (frac * (b2 + 1) as f64) as i64;
        let base = uniform_int(a1, b1).unwrap();
        let shift = uniform_int(a2, b2).unwrap();
        let sum = FiniteDist::product(&[base.clone(), shift], &budget())
            .unwrap()
            .pushforward(|v| v[0] + v[1]);
        prop_assert!(base.tv_distance(&sum) <= rat(b2, w1 + 1));
    }

    #[test]
    fn gap_representation_round_trips(s in triple_set()) {
        let back = s.gaps().to_value_set().unwrap();
        prop_assert_eq!(back.values(), s.values());
    }

    #[test]
    fn index_paths_move_one_rank_at_a_time(
        left in btree_set(1usize..=5, 2),
        right in btree_set(1usize..=5, 2),
    ) {
        let path = index_path(&left, &right).unwrap();
        let top = *left.iter().chain(right.iter()).max().unwrap();
        prop_assert!(path.steps() <= top * top);
        for chain in [&path.from_left, &path.from_right] {
            prop_assert_eq!(chain.first().unwrap().len(), 2);
            for pair in chain.windows(2) {
                let gone: Vec<usize> = pair[0].difference(&pair[1]).copied().collect();
                let new: Vec<usize> = pair[1].difference(&pair[0]).copied().collect();
                prop_assert_eq!(gone.len(), 1);
                prop_assert_eq!(new.len(), 1);
                prop_assert_eq!(gone[0], new[0] + 1);
            }
        }
        prop_assert_eq!(path.from_left.last(), path.from_right.last());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn subset_distance_amplifies_deletions(
        f in triple_family(),
        left in btree_set(1usize..=3, 1..=3),
        right_seed in btree_set(1usize..=3, 1..=3),
    ) {
        let size = left.len().min(right_seed.len());
        let left: BTreeSet<usize> = left.into_iter().take(size).collect();
        let right: BTreeSet<usize> = right_seed.into_iter().take(size).collect();
        let mut max_del = Rational::zero();
        let dels: Vec<FiniteDist<ValueSet>> =
            (1..=3).map(|i| deletion_marginal(&f, i).unwrap()).collect();
        for i in 0..3 {
            for j in (i + 1)..3 {
                let tv = dels[i].tv_distance(&dels[j]);
                if tv > max_del {
                    max_del = tv;
                }
            }
        }
        let subset_tv = subset_marginal(&f, &left)
            .unwrap()
            .tv_distance(&subset_marginal(&f, &right).unwrap());
        let steps = index_path(&left, &right).unwrap().steps();
        prop_assert!(subset_tv <= rat_int(steps as i64) * max_del);
    }

    #[test]
    fn recursive_guess_is_a_proper_distribution(
        gaps in pvec(20u128..200, 1..4),
        start in 1u128..50,
    ) {
        let mut values = vec![start];
        for g in &gaps {
            values.push(values.last().unwrap() + g);
        }
        let n = values.len() + 1;
        let observed = values;
        let dist = guess_recursive(&observed, 1 << 20).unwrap();
        let mut mass = Rational::zero();
        for (g, w) in dist.iter() {
            prop_assert!((1..=n).contains(g));
            mass += w;
        }
        prop_assert_eq!(mass, Rational::one());
    }

    #[test]
    fn single_shot_oracle_dominates_any_fixed_rule(
        weights in btree_map((1usize..=3, 0u64..4), 1u32..9, 1..6),
        rewards in pvec(0i64..5, 3),
        choices in pvec(1usize..=3, 4),
    ) {
        let total: i64 = weights.values().map(|&w| w as i64).sum();
        let joint = FiniteDist::from_pairs(
            weights.iter().map(|(&k, &w)| (k, rat(w as i64, total))),
        )
        .unwrap();
        let d = LabeledDist::new(joint.clone(), rewards.iter().map(|&r| rat_int(r)).collect())
            .unwrap();
        let oracle = bayes_single_shot(&d);
        let mut fixed = Rational::zero();
        for ((label, obs), w) in joint.iter() {
            if choices[*obs as usize] == *label {
                fixed += w * &rat_int(rewards[label - 1]);
            }
        }
        prop_assert!(oracle.value >= fixed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ranking_rules_cannot_see_values_or_scale(
        f in triple_family(),
        skip in 0usize..3,
        scale in 1u64..=5,
    ) {
        let task = secretary_task(3).unwrap();
        let policy = CutoffPolicy { skip };
        let direct = evaluate_ordinal(&task, &policy, &budget()).unwrap();
        let wrapped = OrdinalAsCardinal(policy);
        let on_values = evaluate_cardinal(&task, &wrapped, &f, &budget()).unwrap();
        prop_assert_eq!(&direct, &on_values);
        let scaled = f.pushforward(|s| {
            let values = s.values().iter().map(|v| v * scale).collect();
            ValueSet::new(values, s.bound() * scale).unwrap()
        });
        let on_scaled = evaluate_cardinal(&task, &wrapped, &scaled, &budget()).unwrap();
        prop_assert_eq!(&direct, &on_scaled);
    }

    #[test]
    fn replay_gap_never_beats_the_drift_budget(
        f in triple_family(),
        at_least in 1u64..=31,
    ) {
        let task = secretary_task(3).unwrap();
        let policy = ThresholdPolicy { at_least };
        let cardinal = evaluate_cardinal(&task, &policy, &f, &budget()).unwrap();
        let replay = ordinalize(&task, policy, &f, &budget()).unwrap();
        let ordinal = evaluate_ordinal(&task, &replay, &budget()).unwrap();
        let report = simulation_drift(&task, &f, &budget()).unwrap();
        let drift_sum: Rational = report.steps.iter().map(|s| s.tv_total.clone()).sum();
        let scale = max_reward(&task, &budget()).unwrap();
        prop_assert!(cardinal - ordinal <= drift_sum * scale);
    }

    #[test]
    fn trivial_policies_keep_the_world_guessing_fraction(
        pick in 0usize..5,
        choose in 1usize..=2,
        best in 1usize..=2,
    ) {
        let task: OrdinalTask = match pick {
            0 => secretary_task(1).unwrap(),
            1 => secretary_task(2).unwrap(),
            2 => secretary_task(3).unwrap(),
            3 => die_guessing_task(3).unwrap(),
            _ => jk_secretary_task(3, choose, best).unwrap(),
        };
        let policy = trivial_ordinal_policy(&task, &budget()).unwrap();
        let value = evaluate_ordinal(&task, &policy, &budget()).unwrap();
        let opt = offline_optimum(&task, &budget()).unwrap();
        let mut fact = Rational::one();
        for i in 1..=task.n() {
            fact *= rat_int(i as i64);
        }
        prop_assert!(value >= opt / (&fact * &fact));
    }

    #[test]
    fn value_oblivious_guessers_score_exactly_one(
        gaps in pvec(20u128..=60, 1..4),
        start in 1u128..=40,
        fixed_pick in 1usize..=2,
    ) {
        let mut values = vec![start];
        for g in &gaps {
            values.push(values.last().unwrap() + g);
        }
        let n = values.len();
        let inst = RankGuessInstance::uniform(values, 10_000).unwrap();
        let one = Rational::one();
        prop_assert_eq!(
            worst_case_expected_reward(&inst, &NamedPolicy::Uniform).unwrap(),
            one.clone()
        );
        let fixed = NamedPolicy::Fixed(fixed_pick.min(n));
        prop_assert_eq!(worst_case_expected_reward(&inst, &fixed).unwrap(), one);
    }

    #[test]
    fn worst_case_reward_ignores_deletion_probabilities(
        gaps in pvec(20u128..=60, 3),
        start in 1u128..=40,
        weights in pvec(1u32..9, 4),
    ) {
        let mut values = vec![start];
        for g in &gaps {
            values.push(values.last().unwrap() + g);
        }
        let total: i64 = weights.iter().map(|&w| w as i64).sum();
        let probs: Vec<Rational> = weights.iter().map(|&w| rat(w as i64, total)).collect();
        let skewed = RankGuessInstance::new(values.clone(), 10_000, probs).unwrap();
        let uniform = RankGuessInstance::uniform(values, 10_000).unwrap();
        let policy = NamedPolicy::MonoGaps;
        prop_assert_eq!(
            worst_case_expected_reward(&skewed, &policy).unwrap(),
            worst_case_expected_reward(&uniform, &policy).unwrap()
        );
        prop_assert!(worst_case_expected_reward(&uniform, &NamedPolicy::MonoGaps).unwrap() >= Rational::one());
    }

    #[test]
    fn cardinal_secretary_oracle_sits_in_the_ordinal_window(f in triple_family()) {
        let report = bayes_secretary(&f, &budget()).unwrap();
        prop_assert!(report.value >= rat(1, 2));
        let delta = max_subset_tv(&f).unwrap();
        prop_assert!(report.value <= rat(1, 2) + rat_int(3) * delta);
    }
}

#[test]
fn zero_mass_states_fall_back_without_panicking() {
    // a history no pair family can extend: force the replay onto its
    // fallback plan and check the returned action is still well formed
    let pairs = ordlab_core::osi::build_osi_pairs(5).unwrap();
    let task = secretary_task(2).unwrap();
    let replay = ordinalize(
        &task,
        OrdinalAsCardinal(CutoffPolicy { skip: 0 }),
        &pairs,
        &budget(),
    )
    .unwrap();
    let value = evaluate_ordinal(&task, &replay, &budget()).unwrap();
    assert_eq!(value, rat(1, 2));
}

#[test]
fn feasibility_gates_the_reward_closure() {
    let perms = FiniteDist::uniform(Perm::all(2)).unwrap();
    let task = OrdinalTask::new(
        "gated",
        perms.clone(),
        perms,
        vec![vec![REJECT, ACCEPT]; 2],
        Arc::new(|a: &[Action]| a.iter().all(|&x| x == REJECT)),
        Arc::new(|_: &[Action], _: &Perm, _: &Perm| panic!("reward read an infeasible vector")),
    )
    .unwrap();
    assert_eq!(
        task.reward_value(&[ACCEPT, REJECT], &Perm::identity(2), &Perm::identity(2))
            .unwrap(),
        Rational::zero()
    );
}
