//! Aggregated check bundles behind `suite {paper-exact,properties,montecarlo}`.
//! Each bundle emits one row per check and an overall pass flag that drives
//! the exit code.

use num_traits::One;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ordlab_core::dist::EnumBudget;
use ordlab_core::error::Result;
use ordlab_core::googol::{
    appc_simulation, appc_trials, build_transition_matrix, classic_secretary_value,
    level_secretary_dp, max_guess_bayes_exact, max_guess_bayes_mc, max_guess_eval,
    max_guess_level_dist, stationary_distribution, verify_deletion_identities, LevelPerm,
    RecordAfter, SimRun,
};
use ordlab_core::oracle::{bayes_single_shot, die_pairs_dist};
use ordlab_core::osi::{build_osi_pairs, build_osi_triples, verify_osi};
use ordlab_core::rankguess::{
    gap_monotonicity, level_instance, random_instance, satisfies_level,
    worst_case_expected_reward, Monotonicity, NamedPolicy, RankGuessInstance,
};
use ordlab_core::rational::{format_ratio, rat, rat_int, to_f64, Rational};
use ordlab_core::universal::{
    evaluate_cardinal, evaluate_ordinal, ordinalize, secretary_task, simulation_drift,
    BayesPairPolicy,
};

use crate::table::{join_list, Table};

pub struct SuiteOutcome {
    pub table: Table,
    pub all_pass: bool,
}

const SUITE_COLS: [&str; 5] = ["suite", "check", "seed", "pass", "detail"];

struct Checker {
    suite: &'static str,
    seed: String,
    table: Table,
    all_pass: bool,
}

impl Checker {
    fn new(suite: &'static str, seed: Option<u64>) -> Checker {
        Checker {
            suite,
            seed: seed.map(|s| s.to_string()).unwrap_or_default(),
            table: Table::new(&SUITE_COLS),
            all_pass: true,
        }
    }

    fn record(&mut self, check: &str, pass: bool, detail: String) {
        self.all_pass &= pass;
        self.table.push(vec![
            self.suite.to_string(),
            check.to_string(),
            self.seed.clone(),
            pass.to_string(),
            detail,
        ]);
    }

    fn finish(self) -> SuiteOutcome {
        SuiteOutcome {
            table: self.table,
            all_pass: self.all_pass,
        }
    }
}

/// Every deterministic exact-value check in one bundle.
pub fn paper_exact() -> Result<SuiteOutcome> {
    let budget = EnumBudget::from_env();
    let mut c = Checker::new("paper-exact", None);

    let chain = build_transition_matrix(4)?;
    let p = stationary_distribution(&chain)?;
    let expected = vec![
        rat(5, 66),
        rat(6, 66),
        rat(7, 66),
        rat(2, 11),
        rat(5, 22),
        rat(7, 22),
    ];
    c.record(
        "stationary-n4",
        p == expected,
        join_list(p.iter().map(format_ratio)),
    );

    let head = LevelPerm::new(vec![4, 1, 2, 3])?;
    let row_expected = vec![
        rat_int(0),
        rat(1, 3),
        rat_int(0),
        rat(2, 3),
        rat_int(0),
        rat_int(0),
    ];
    c.record(
        "transition-row-n4",
        chain.states[0] == head && chain.matrix[0] == row_expected,
        join_list(chain.matrix[0].iter().map(format_ratio)),
    );

    for n in 3..=5 {
        let report = verify_deletion_identities(n)?;
        c.record(
            &format!("deletion-identities-n{n}"),
            report.all_hold,
            format!("{} operator identities", report.per_k.len()),
        );
    }

    for n in 3..=5 {
        let report = level_secretary_dp(n, &budget)?;
        let classic = classic_secretary_value(n)?;
        let mut pass = report.g_equals_f
            && report.accept_prob_exact
            && report.value == report.ordinal_value
            && classic == report.ordinal_value;
        if n == 3 {
            pass &= report.value == rat(1, 2);
        }
        if n == 4 {
            pass &= report.value == rat(11, 24);
        }
        c.record(
            &format!("level-dp-n{n}"),
            pass,
            format!(
                "value {} over {} states",
                format_ratio(&report.value),
                report.states_compared
            ),
        );
    }

    for n_bound in [21u64, 101, 1001] {
        let f = build_osi_pairs(n_bound)?;
        let report = verify_osi::<ChaCha8Rng>(&f, None, None)?;
        let want = rat(1, n_bound as i64 - 1);
        c.record(
            &format!("osi-pairs-N{n_bound}"),
            report.max_deletion_tv == want && report.max_subset_tv == want,
            format!("max deletion tv {}", format_ratio(&report.max_deletion_tv)),
        );
    }

    let mut triple_tvs = Vec::new();
    for lmax in 1..=4 {
        let f = build_osi_triples(lmax, 65)?;
        let report = verify_osi::<ChaCha8Rng>(&f, None, None)?;
        triple_tvs.push(report.max_subset_tv);
    }
    c.record(
        "osi-triples-monotone",
        triple_tvs.windows(2).all(|w| w[0] >= w[1]),
        join_list(triple_tvs.iter().map(format_ratio)),
    );

    let mut warm_ok = true;
    let mut warm_count = 0u32;
    for s1 in 1u64..=100 {
        for s2 in s1 + 20..=100 {
            let inst = RankGuessInstance::uniform(vec![s1 as u128, s2 as u128], 100)?;
            let wcr = worst_case_expected_reward(&inst, &NamedPolicy::Warmup2)?;
            let closed = rat_int(1) + rat((s2 - s1) as i64 - 2, 100);
            warm_ok &= wcr == closed && wcr >= rat(118, 100);
            warm_count += 1;
        }
    }
    c.record(
        "warmup2-closed-form-N100",
        warm_ok,
        format!("{warm_count} instances with gap >= 20"),
    );

    let task = secretary_task(2)?;
    let f = build_osi_pairs(101)?;
    let policy = BayesPairPolicy { bound: 101 };
    let cardinal = evaluate_cardinal(&task, &policy, &f, &budget)?;
    let replay = ordinalize(&task, policy, &f, &budget)?;
    let replayed = evaluate_ordinal(&task, &replay, &budget)?;
    let drift = simulation_drift(&task, &f, &budget)?;
    let gap = cardinal.clone() - &replayed;
    let k2 = &drift.steps.last().expect("n = 2 has a k = 2 step").tv_total;
    c.record(
        "universal-reduction-pairs101",
        gap <= rat(2, 100) && *k2 <= rat(1, 100),
        format!(
            "cardinal {} replay {} gap {} drift {}",
            format_ratio(&cardinal),
            format_ratio(&replayed),
            format_ratio(&gap),
            format_ratio(k2)
        ),
    );

    let report = bayes_single_shot(&die_pairs_dist(4)?);
    c.record(
        "oracle-die-pairs-m4",
        report.value == rat(5, 4),
        format!("value {}", format_ratio(&report.value)),
    );

    let mut advantages = Vec::new();
    let mut guess_ok = true;
    for delta in [4u64, 6] {
        let f = max_guess_level_dist(3, delta, &budget)?;
        let yes = max_guess_eval(&f, |_| Rational::one())?;
        let no = max_guess_eval(&f, |_| Rational::from_integer(0.into()))?;
        let advantage = max_guess_bayes_exact(3, delta, &budget)? - rat_int(1);
        guess_ok &= yes == rat_int(1)
            && no == rat_int(1)
            && advantage >= rat_int(0)
            && advantage <= rat(3, delta as i64);
        advantages.push(advantage);
    }
    guess_ok &= advantages[0] >= advantages[1];
    c.record(
        "maxguess-exact-d4-d6",
        guess_ok,
        format!(
            "advantage {} then {}",
            format_ratio(&advantages[0]),
            format_ratio(&advantages[1])
        ),
    );

    Ok(c.finish())
}

/// Randomized lemma checks over seeded instance batteries.
pub fn properties(trials: u64, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Checker::new("properties", Some(seed));

    for n in 4..=7usize {
        let mut ok = true;
        for _ in 0..100 {
            let inst = random_instance(n, 1_000_000, &mut rng)?;
            for policy in [
                NamedPolicy::Uniform,
                NamedPolicy::Fixed(1),
                NamedPolicy::Fixed(n),
            ] {
                ok &= worst_case_expected_reward(&inst, &policy)? == rat_int(1);
            }
        }
        c.record(
            &format!("oblivious-n{n}"),
            ok,
            "100 instances x 3 oblivious policies".to_string(),
        );
    }

    for n in 4..=7usize {
        let bonus = rat_int(1) + rat(1, 3 * (n as i64 - 3));
        let mut ok = true;
        let mut bonus_class = 0u64;
        for _ in 0..trials {
            let inst = random_instance(n, 1_000_000, &mut rng)?;
            let wcr = worst_case_expected_reward(&inst, &NamedPolicy::MonoGaps)?;
            ok &= wcr >= rat_int(1);
            let d = inst.gaps();
            let hard = gap_monotonicity(&d) == Monotonicity::Neither || !satisfies_level(&d, 0)?;
            if hard {
                bonus_class += 1;
                ok &= wcr >= bonus;
            }
        }
        c.record(
            &format!("mono-gaps-n{n}"),
            ok,
            format!("{trials} instances; {bonus_class} in the bonus class"),
        );
    }

    let per_combo = (trials / 50).clamp(4, 40);
    for level in 1..=6usize {
        let mut ok = true;
        for n in 4..=6usize {
            let bonus = rat_int(1) + rat(n as i64 - 3, (n * (n - 1)) as i64);
            for satisfy in [false, true] {
                for _ in 0..per_combo {
                    let inst = level_instance(n, level, satisfy, &mut rng)?;
                    let wcr = worst_case_expected_reward(&inst, &NamedPolicy::ExpGaps(level))?;
                    ok &= if satisfy {
                        wcr >= rat_int(1)
                    } else {
                        wcr >= bonus
                    };
                }
            }
        }
        c.record(
            &format!("exp-gaps-l{level}"),
            ok,
            format!("{per_combo} instances per class and n"),
        );
    }

    Ok(c.finish())
}

/// `true` when each step either appends one gap past the maximum or splits
/// one gap into two positive parts with the same total.
fn gaps_consistent(history: &[Vec<u64>]) -> bool {
    if history.first().map(Vec::len) != Some(1) {
        return false;
    }
    if history.iter().any(|g| g.contains(&0)) {
        return false;
    }
    history.windows(2).all(|w| {
        let (prev, cur) = (&w[0], &w[1]);
        if cur.len() != prev.len() + 1 {
            return false;
        }
        let appended = cur[..prev.len()] == prev[..];
        let split = (0..prev.len()).any(|i| {
            cur[..i] == prev[..i]
                && cur[i] + cur[i + 1] == prev[i]
                && cur[i + 2..] == prev[i + 1..]
        });
        appended || split
    })
}

fn run_consistent(run: &SimRun) -> bool {
    gaps_consistent(&run.gap_history)
        && run.level_history.last().map(Vec::as_slice) == Some(run.rho.levels())
}

/// Sampled-estimate checks; bounds carry a three-sigma allowance so the
/// bundle never fails on ordinary sampling noise.
pub fn montecarlo(trials: u64, seed: u64) -> Result<SuiteOutcome> {
    let budget = EnumBudget::from_env();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Checker::new("montecarlo", Some(seed));
    let policy = RecordAfter { skip: 1 };

    let batch = appc_trials(4, 40, trials, &policy, &mut rng)?;
    let bound = to_f64(&batch.failure_bound);
    c.record(
        "appc-failure-rate",
        batch.failure_bound == rat(3, 39) && batch.failure_rate <= bound + 3.0 * batch.failure_se,
        format!(
            "{} of {} failed; rate {:.6} vs bound {}",
            batch.failed,
            batch.trials,
            batch.failure_rate,
            format_ratio(&batch.failure_bound)
        ),
    );

    let spot = trials.min(300);
    let mut ok = true;
    let mut checked = 0u64;
    for _ in 0..spot {
        let run = appc_simulation(4, 40, &policy, &mut rng)?;
        if run.failed {
            continue;
        }
        checked += 1;
        ok &= run_consistent(&run);
    }
    c.record(
        "appc-gap-consistency",
        ok && checked > 0,
        format!("{checked} of {spot} runs produced gap streams"),
    );

    let mc_trials = (trials / 10).max(100);
    let report = max_guess_bayes_mc(3, 8, mc_trials, &mut rng)?;
    let slack = 3.0 * report.std_error;
    let advantage6 = to_f64(&(max_guess_bayes_exact(3, 6, &budget)? - rat_int(1)));
    let estimate_adv = report.estimate - 1.0;
    c.record(
        "maxguess-mc-d8",
        estimate_adv <= 3.0 / 8.0 + slack && estimate_adv <= advantage6 + slack
            && report.estimate >= 1.0 - slack,
        format!(
            "estimate {:.6} se {:.6} over {mc_trials} trials",
            report.estimate, report.std_error
        ),
    );

    Ok(c.finish())
}
