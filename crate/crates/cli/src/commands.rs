//! One function per subcommand. Each builds its inputs from parsed
//! arguments, runs the exact or seeded computation, and returns a table
//! with that command's fixed column set.

use std::fs;
use std::path::Path;

use num_traits::{One, Zero};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ordlab_core::dist::{EnumBudget, FiniteDist};
use ordlab_core::error::{CoreError, Result};
use ordlab_core::googol::{
    appc_trials, build_transition_matrix, level_secretary_dp, max_guess_bayes_exact,
    max_guess_bayes_mc, max_guess_eval, max_guess_level_dist, stationary_distribution,
    RecordAfter, StopPolicy, ThresholdValue,
};
use ordlab_core::oracle::{bayes_secretary, bayes_single_shot, die_pairs_dist};
use ordlab_core::osi::{
    build_osi_general, build_osi_pairs, build_osi_triples, gaps_to_sets, sample_osi_general,
    verify_osi, OsiParams, ValueSet,
};
use ordlab_core::rankguess::{
    random_instance, worst_case_expected_reward, GuessPolicy, NamedPolicy, RankGuessInstance,
};
use ordlab_core::rational::{format_ratio, parse_ratio, rat_int, Rational};
use ordlab_core::universal::{
    evaluate_cardinal, evaluate_ordinal, max_reward, offline_optimum, ordinalize,
    simulation_drift, trivial_ordinal_policy, BayesPairPolicy, CardinalPolicy, CutoffPolicy,
    OrdinalAsCardinal, OrdinalTask, ThresholdPolicy, UniformOrdinalPolicy,
};

use crate::table::{exact_cells, join_list, Table};

fn bad(msg: impl Into<String>) -> CoreError {
    CoreError::BadParam(msg.into())
}

/// A named input family over value sets.
#[derive(Debug, Clone)]
pub enum Family {
    Pairs { n_bound: u64 },
    Triples { lmax: u32, n_bound: u64 },
    General { n: usize, base: Rational, top: u64 },
}

impl Family {
    pub fn label(&self) -> String {
        match self {
            Family::Pairs { n_bound } => format!("pairs-{n_bound}"),
            Family::Triples { lmax, n_bound } => format!("triples-{lmax}-{n_bound}"),
            Family::General { n, top, .. } => format!("general-{n}-{top}"),
        }
    }

    pub fn build(&self, budget: &EnumBudget) -> Result<FiniteDist<ValueSet>> {
        match self {
            Family::Pairs { n_bound } => build_osi_pairs(*n_bound),
            Family::Triples { lmax, n_bound } => build_osi_triples(*lmax, *n_bound),
            Family::General { n, base, top } => {
                let params = OsiParams::new(*n, base.clone(), *top)?;
                gaps_to_sets(&build_osi_general(&params, budget)?)
            }
        }
    }

    /// Parses `pairs:N`, `triples:LMAX:N`, or `general:N:BASE:TOP`.
    pub fn parse(spec: &str) -> Result<Family> {
        let parts: Vec<&str> = spec.split(':').collect();
        let usage = "expected pairs:N, triples:LMAX:N, or general:N:BASE:TOP";
        match (parts[0], parts.len()) {
            ("pairs", 2) => Ok(Family::Pairs {
                n_bound: parts[1].parse().map_err(|_| bad(usage))?,
            }),
            ("triples", 3) => Ok(Family::Triples {
                lmax: parts[1].parse().map_err(|_| bad(usage))?,
                n_bound: parts[2].parse().map_err(|_| bad(usage))?,
            }),
            ("general", 4) => Ok(Family::General {
                n: parts[1].parse().map_err(|_| bad(usage))?,
                base: parse_ratio(parts[2])?,
                top: parts[3].parse().map_err(|_| bad(usage))?,
            }),
            _ => Err(bad(usage)),
        }
    }
}

/// Builds a family from the flag-style arguments of the `osi` subcommands.
#[allow(clippy::too_many_arguments)]
pub fn family_from_flags(
    pairs: bool,
    triples: bool,
    general: bool,
    n_bound: Option<u64>,
    lmax: Option<u32>,
    n: Option<usize>,
    base: Option<&str>,
    top: Option<u64>,
) -> Result<Family> {
    match (pairs, triples, general) {
        (true, false, false) => Ok(Family::Pairs {
            n_bound: n_bound.ok_or_else(|| bad("--pairs needs --N"))?,
        }),
        (false, true, false) => Ok(Family::Triples {
            lmax: lmax.ok_or_else(|| bad("--triples needs --lmax"))?,
            n_bound: n_bound.ok_or_else(|| bad("--triples needs --N"))?,
        }),
        (false, false, true) => Ok(Family::General {
            n: n.ok_or_else(|| bad("--general needs --n"))?,
            base: parse_ratio(base.ok_or_else(|| bad("--general needs --base"))?)?,
            top: top.ok_or_else(|| bad("--general needs --top"))?,
        }),
        _ => Err(bad("pick exactly one of --pairs, --triples, --general")),
    }
}

pub fn parse_task(spec: &str) -> Result<OrdinalTask> {
    let parts: Vec<&str> = spec.split(':').collect();
    let usage = "expected secretary:N, die:N, jk:N:J:K, or two-sided:N";
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad(usage));
    match (parts[0], parts.len()) {
        ("secretary", 2) => ordlab_core::universal::secretary_task(num(parts[1])?),
        ("die", 2) => ordlab_core::universal::die_guessing_task(num(parts[1])?),
        ("jk", 4) => ordlab_core::universal::jk_secretary_task(
            num(parts[1])?,
            num(parts[2])?,
            num(parts[3])?,
        ),
        ("two-sided", 2) => ordlab_core::universal::two_sided_googol_task(num(parts[1])?),
        _ => Err(bad(usage)),
    }
}

fn parse_cardinal_policy(spec: &str, family: &Family) -> Result<Box<dyn CardinalPolicy>> {
    let parts: Vec<&str> = spec.split(':').collect();
    match (parts[0], parts.len()) {
        ("bayes-pair", 1) => match family {
            Family::Pairs { n_bound } => Ok(Box::new(BayesPairPolicy { bound: *n_bound })),
            _ => Err(bad("bayes-pair expects a pairs family")),
        },
        ("threshold", 2) => Ok(Box::new(ThresholdPolicy {
            at_least: parts[1].parse().map_err(|_| bad("bad threshold"))?,
        })),
        ("cutoff", 2) => Ok(Box::new(OrdinalAsCardinal(CutoffPolicy {
            skip: parts[1].parse().map_err(|_| bad("bad cutoff"))?,
        }))),
        _ => Err(bad("expected bayes-pair, threshold:T, or cutoff:K")),
    }
}

fn parse_guess_policy(spec: &str) -> Result<NamedPolicy> {
    let parts: Vec<&str> = spec.split(':').collect();
    match (parts[0], parts.len()) {
        ("warmup2", 1) => Ok(NamedPolicy::Warmup2),
        ("warmup3", 1) => Ok(NamedPolicy::Warmup3),
        ("mono", 1) => Ok(NamedPolicy::MonoGaps),
        ("exp", 2) => Ok(NamedPolicy::ExpGaps(
            parts[1].parse().map_err(|_| bad("bad level"))?,
        )),
        ("guess", 1) => Ok(NamedPolicy::Recursive),
        ("die", 1) => Ok(NamedPolicy::DieGuess),
        ("face", 2) => Ok(NamedPolicy::FaceReduction(
            parts[1].parse().map_err(|_| bad("bad face count"))?,
        )),
        ("random", 1) => Ok(NamedPolicy::Uniform),
        ("fixed", 2) => Ok(NamedPolicy::Fixed(
            parts[1].parse().map_err(|_| bad("bad index"))?,
        )),
        _ => Err(bad(
            "expected warmup2, warmup3, mono, exp:L, guess, die, face:C, random, or fixed:I",
        )),
    }
}

const OSI_SAMPLE_COLS: [&str; 7] = ["experiment", "family", "n", "bound", "seed", "draw", "values"];

pub fn osi_sample(family: &Family, count: usize, seed: u64) -> Result<Table> {
    let budget = EnumBudget::from_env();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Table::new(&OSI_SAMPLE_COLS);
    let push = |t: &mut Table, draw: usize, s: &ValueSet| {
        t.push(vec![
            "osi-sample".into(),
            family.label(),
            s.len().to_string(),
            s.bound().to_string(),
            seed.to_string(),
            draw.to_string(),
            join_list(s.values()),
        ]);
    };
    match family {
        Family::General { n, base, top } => {
            let params = OsiParams::new(*n, base.clone(), *top)?;
            for draw in 0..count {
                let s = sample_osi_general(&params, &mut rng)?.to_value_set()?;
                push(&mut t, draw, &s);
            }
        }
        _ => {
            let f = family.build(&budget)?;
            for draw in 0..count {
                let s = f.sample(&mut rng).clone();
                push(&mut t, draw, &s);
            }
        }
    }
    Ok(t)
}

const OSI_VERIFY_COLS: [&str; 19] = [
    "experiment",
    "family",
    "n",
    "bound",
    "exhaustive",
    "pairs_checked",
    "seed",
    "max_deletion_num",
    "max_deletion_den",
    "max_deletion_float",
    "deletion_pair",
    "max_subset_num",
    "max_subset_den",
    "max_subset_float",
    "subset_pair",
    "path_bound_ok",
    "square_bound_ok",
    "eps_target",
    "pass",
];

pub fn osi_verify(
    family: &Family,
    eps_target: Option<&str>,
    sample_pairs: usize,
    seed: Option<u64>,
) -> Result<Table> {
    let budget = EnumBudget::from_env();
    let f = family.build(&budget)?;
    let target = eps_target.map(parse_ratio).transpose()?;
    let mut seed_cell = String::new();
    let report = if sample_pairs > 0 {
        let seed = seed.ok_or_else(|| bad("--seed is required when sampling index pairs"))?;
        seed_cell = seed.to_string();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        verify_osi(&f, target, Some((&mut rng, sample_pairs)))?
    } else {
        verify_osi::<ChaCha8Rng>(&f, target, None)?
    };
    let bound = f
        .support()
        .map(ValueSet::bound)
        .max()
        .ok_or(CoreError::EmptyRange)?;
    let [dn, dd, df] = exact_cells(&report.max_deletion_tv);
    let [sn, sd, sf] = exact_cells(&report.max_subset_tv);
    let mut t = Table::new(&OSI_VERIFY_COLS);
    t.push(vec![
        "osi-verify".to_string(),
        family.label(),
        report.n.to_string(),
        bound.to_string(),
        report.exhaustive.to_string(),
        report.pairs_checked.to_string(),
        seed_cell,
        dn,
        dd,
        df,
        format!("{}of{}", report.max_deletion_pair.0, report.max_deletion_pair.1),
        sn,
        sd,
        sf,
        format!(
            "{}vs{}",
            join_list(&report.max_subset_pair.0),
            join_list(&report.max_subset_pair.1)
        ),
        report.path_bound_ok.to_string(),
        report.square_bound_ok.to_string(),
        report.eps_target.as_ref().map(format_ratio).unwrap_or_default(),
        report.pass.map(|p| p.to_string()).unwrap_or_default(),
    ]);
    Ok(t)
}

const UNIVERSAL_COLS: [&str; 6] = [
    "task",
    "policy",
    "value_num",
    "value_den",
    "value_float",
    "drift",
];

fn universal_row(task: &str, policy: &str, value: &Rational, drift: String) -> Vec<String> {
    let [num, den, float] = exact_cells(value);
    vec![task.to_string(), policy.to_string(), num, den, float, drift]
}

pub fn universal_eval(task_spec: &str, policy_spec: &str) -> Result<Table> {
    let budget = EnumBudget::from_env();
    let task = parse_task(task_spec)?;
    let parts: Vec<&str> = policy_spec.split(':').collect();
    let value = match (parts[0], parts.len()) {
        ("cutoff", 2) => {
            let skip = parts[1].parse().map_err(|_| bad("bad cutoff"))?;
            evaluate_ordinal(&task, &CutoffPolicy { skip }, &budget)?
        }
        ("trivial", 1) => {
            let policy = trivial_ordinal_policy(&task, &budget)?;
            evaluate_ordinal(&task, &policy, &budget)?
        }
        ("uniform", 1) => evaluate_ordinal(&task, &UniformOrdinalPolicy, &budget)?,
        ("offline", 1) => offline_optimum(&task, &budget)?,
        _ => return Err(bad("expected cutoff:K, trivial, uniform, or offline")),
    };
    let mut t = Table::new(&UNIVERSAL_COLS);
    t.push(universal_row(task.name(), policy_spec, &value, String::new()));
    Ok(t)
}

pub fn universal_reduce(task_spec: &str, family: &Family, policy_spec: &str) -> Result<Table> {
    let budget = EnumBudget::from_env();
    let task = parse_task(task_spec)?;
    let f = family.build(&budget)?;
    let policy = parse_cardinal_policy(policy_spec, family)?;
    let cardinal = evaluate_cardinal(&task, &*policy, &f, &budget)?;
    let replay = ordinalize(&task, policy, &f, &budget)?;
    let replayed = evaluate_ordinal(&task, &replay, &budget)?;
    let report = simulation_drift(&task, &f, &budget)?;
    let drift_cell = join_list(report.steps.iter().map(|s| format_ratio(&s.tv_total)));
    let drift_sum: Rational = report.steps.iter().map(|s| s.tv_total.clone()).sum();
    let budget_value = drift_sum * max_reward(&task, &budget)?;
    let gap = cardinal.clone() - &replayed;
    let mut t = Table::new(&UNIVERSAL_COLS);
    t.push(universal_row(task.name(), policy_spec, &cardinal, String::new()));
    t.push(universal_row(
        task.name(),
        &format!("replay-{policy_spec}"),
        &replayed,
        drift_cell.clone(),
    ));
    t.push(universal_row(task.name(), "gap", &gap, String::new()));
    t.push(universal_row(
        task.name(),
        "drift-budget",
        &budget_value,
        drift_cell,
    ));
    Ok(t)
}

const DRIFT_COLS: [&str; 13] = [
    "task",
    "family",
    "k",
    "tv_total_num",
    "tv_total_den",
    "tv_success_num",
    "tv_success_den",
    "fail_num",
    "fail_den",
    "delta_num",
    "delta_den",
    "bound_num",
    "bound_den",
];

pub fn universal_drift(task_spec: &str, family: &Family) -> Result<Table> {
    let budget = EnumBudget::from_env();
    let task = parse_task(task_spec)?;
    let f = family.build(&budget)?;
    let report = simulation_drift(&task, &f, &budget)?;
    let mut t = Table::new(&DRIFT_COLS);
    for step in &report.steps {
        let [tn, td, _] = exact_cells(&step.tv_total);
        let [sn, sd, _] = exact_cells(&step.tv_success);
        let [fn_, fd, _] = exact_cells(&step.fail_mass);
        let [dn, dd, _] = exact_cells(&report.delta);
        let bound = rat_int((step.k - 1) as i64) * &report.delta;
        let [bn, bd, _] = exact_cells(&bound);
        t.push(vec![
            task.name().to_string(),
            family.label(),
            step.k.to_string(),
            tn,
            td,
            sn,
            sd,
            fn_,
            fd,
            dn,
            dd,
            bn,
            bd,
        ]);
    }
    Ok(t)
}

const RANKGUESS_COLS: [&str; 10] = [
    "experiment",
    "n",
    "bound",
    "policy",
    "instance",
    "seed",
    "values",
    "reward_num",
    "reward_den",
    "reward_float",
];

/// Fixed instance battery used when neither a file nor a seed is given:
/// flat, increasing, decreasing, and doubling gap patterns.
pub fn instance_battery(n: usize, bound: u128) -> Result<Vec<(String, RankGuessInstance)>> {
    let mut out = Vec::new();
    let patterns: [(&str, Box<dyn Fn(usize) -> u128>); 4] = [
        ("flat", Box::new(|_| 20)),
        ("up", Box::new(|i| 20 + 9 * i as u128)),
        ("down", Box::new(move |i| 20 + 9 * (n - 1 - i) as u128)),
        ("double", Box::new(|i| (20 << i) + 3 * i as u128)),
    ];
    for (name, gap) in patterns {
        let mut values = vec![25u128];
        for i in 0..n - 1 {
            values.push(values[i] + gap(i));
        }
        out.push((name.to_string(), RankGuessInstance::uniform(values, bound)?));
    }
    Ok(out)
}

/// `instances` takes a file path, or `any`/`battery` for the fixed built-in
/// battery. Without it, a seed draws random instances; otherwise the battery
/// runs, so the command stays deterministic when no seed is given.
pub fn rankguess_eval(
    n: usize,
    bound: u128,
    policy_spec: &str,
    instances: Option<&str>,
    count: usize,
    seed: Option<u64>,
) -> Result<Table> {
    let policy = parse_guess_policy(policy_spec)?;
    let mut seed_cell = String::new();
    let battery: Vec<(String, RankGuessInstance)> = match instances {
        Some("any") | Some("battery") => instance_battery(n, bound)?,
        Some(path) => {
            let path = Path::new(path);
            let text = fs::read_to_string(path)
                .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
            let json: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| bad(format!("bad instance file: {e}")))?;
            let arr = json
                .as_array()
                .ok_or_else(|| bad("instance file must hold a json array"))?;
            arr.iter()
                .enumerate()
                .map(|(i, v)| Ok((format!("file-{i}"), RankGuessInstance::from_json(v)?)))
                .collect::<Result<Vec<_>>>()?
        }
        None => {
            if let Some(seed) = seed {
                seed_cell = seed.to_string();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..count)
                    .map(|i| Ok((format!("seeded-{i}"), random_instance(n, bound, &mut rng)?)))
                    .collect::<Result<Vec<_>>>()?
            } else {
                instance_battery(n, bound)?
            }
        }
    };
    let mut t = Table::new(&RANKGUESS_COLS);
    for (name, inst) in &battery {
        let reward = worst_case_expected_reward(inst, &policy)?;
        let [num, den, float] = exact_cells(&reward);
        t.push(vec![
            "rankguess-eval".into(),
            inst.n().to_string(),
            inst.bound().to_string(),
            policy_spec.to_string(),
            name.clone(),
            seed_cell.clone(),
            join_list(inst.values()),
            num,
            den,
            float,
        ]);
    }
    Ok(t)
}

const TRACE_COLS: [&str; 7] = [
    "policy",
    "bound",
    "observed",
    "guess",
    "prob_num",
    "prob_den",
    "prob_float",
];

pub fn rankguess_trace(policy_spec: &str, observed: &str, bound: u128) -> Result<Table> {
    let policy = parse_guess_policy(policy_spec)?;
    let values: Vec<u128> = observed
        .split([',', ';'])
        .map(|s| s.trim().parse().map_err(|_| bad("bad observed value")))
        .collect::<Result<Vec<_>>>()?;
    let dist = policy.guess(&values, bound)?;
    let mut t = Table::new(&TRACE_COLS);
    for (guess, p) in dist.iter() {
        let [num, den, float] = exact_cells(p);
        t.push(vec![
            policy_spec.to_string(),
            bound.to_string(),
            join_list(&values),
            guess.to_string(),
            num,
            den,
            float,
        ]);
    }
    Ok(t)
}

const CHAIN_COLS: [&str; 6] = ["kind", "from", "to", "p_num", "p_den", "p_float"];

pub fn googol_chain(n: usize) -> Result<Table> {
    let chain = build_transition_matrix(n)?;
    let p = stationary_distribution(&chain)?;
    let mut t = Table::new(&CHAIN_COLS);
    for (i, from) in chain.states.iter().enumerate() {
        for (j, to) in chain.states.iter().enumerate() {
            let [num, den, float] = exact_cells(&chain.matrix[i][j]);
            t.push(vec![
                "transition".into(),
                join_list(from.levels()),
                join_list(to.levels()),
                num,
                den,
                float,
            ]);
        }
    }
    for (i, state) in chain.states.iter().enumerate() {
        let [num, den, float] = exact_cells(&p[i]);
        t.push(vec![
            "stationary".into(),
            join_list(state.levels()),
            String::new(),
            num,
            den,
            float,
        ]);
    }
    Ok(t)
}

const DP_COLS: [&str; 10] = [
    "n",
    "states",
    "value_num",
    "value_den",
    "value_float",
    "ordinal_num",
    "ordinal_den",
    "ordinal_float",
    "g_equals_f",
    "accept_prob_exact",
];

pub fn googol_dp(n: usize) -> Result<Table> {
    let budget = EnumBudget::from_env();
    let report = level_secretary_dp(n, &budget)?;
    let [vn, vd, vf] = exact_cells(&report.value);
    let [on, od, of] = exact_cells(&report.ordinal_value);
    let mut t = Table::new(&DP_COLS);
    t.push(vec![
        report.n.to_string(),
        report.states_compared.to_string(),
        vn,
        vd,
        vf,
        on,
        od,
        of,
        report.g_equals_f.to_string(),
        report.accept_prob_exact.to_string(),
    ]);
    Ok(t)
}

const SIM_COLS: [&str; 13] = [
    "kind",
    "n",
    "delta",
    "policy",
    "trials",
    "seed",
    "failed",
    "accepted",
    "wins",
    "estimate",
    "std_error",
    "value_num",
    "value_den",
];

fn parse_stop_policy(spec: &str) -> Result<Box<dyn StopPolicy>> {
    let parts: Vec<&str> = spec.split(':').collect();
    match (parts[0], parts.len()) {
        ("record", 2) => Ok(Box::new(RecordAfter {
            skip: parts[1].parse().map_err(|_| bad("bad skip count"))?,
        })),
        ("threshold", 2) => Ok(Box::new(ThresholdValue {
            cutoff: parts[1].parse().map_err(|_| bad("bad cutoff value"))?,
        })),
        _ => Err(bad("expected record:K or threshold:V")),
    }
}

pub fn googol_sim(
    n: usize,
    delta: u64,
    policy_spec: &str,
    trials: u64,
    seed: u64,
) -> Result<Table> {
    let policy = parse_stop_policy(policy_spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let batch = appc_trials(n, delta, trials, &*policy, &mut rng)?;
    let base = |kind: &str| {
        vec![
            kind.to_string(),
            n.to_string(),
            delta.to_string(),
            policy_spec.to_string(),
            trials.to_string(),
            seed.to_string(),
            batch.failed.to_string(),
            batch.accepted.to_string(),
            batch.wins.to_string(),
        ]
    };
    let mut t = Table::new(&SIM_COLS);
    let mut row = base("failure-rate");
    row.extend([
        format!("{}", batch.failure_rate),
        format!("{}", batch.failure_se),
        String::new(),
        String::new(),
    ]);
    t.push(row);
    let mut row = base("win-rate");
    row.extend([
        batch.win_rate.map(|w| format!("{w}")).unwrap_or_default(),
        String::new(),
        String::new(),
        String::new(),
    ]);
    t.push(row);
    let [num, den, _] = exact_cells(&batch.failure_bound);
    let mut row = base("failure-bound");
    row.extend([String::new(), String::new(), num, den]);
    t.push(row);
    Ok(t)
}

const MAXGUESS_COLS: [&str; 11] = [
    "kind",
    "n",
    "delta",
    "policy",
    "trials",
    "seed",
    "value_num",
    "value_den",
    "value_float",
    "estimate",
    "std_error",
];

pub fn googol_maxguess(
    n: usize,
    delta: u64,
    mc: bool,
    trials: u64,
    seed: Option<u64>,
) -> Result<Table> {
    let budget = EnumBudget::from_env();
    let mut t = Table::new(&MAXGUESS_COLS);
    let exact_row = |t: &mut Table, policy: &str, value: &Rational| {
        let [num, den, float] = exact_cells(value);
        t.push(vec![
            "exact".into(),
            n.to_string(),
            delta.to_string(),
            policy.to_string(),
            String::new(),
            String::new(),
            num,
            den,
            float,
            String::new(),
            String::new(),
        ]);
    };
    if mc {
        let seed = seed.ok_or_else(|| bad("--seed is required with --mc"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let report = max_guess_bayes_mc(n, delta, trials, &mut rng)?;
        t.push(vec![
            "montecarlo".into(),
            n.to_string(),
            delta.to_string(),
            "bayes".into(),
            trials.to_string(),
            seed.to_string(),
            String::new(),
            String::new(),
            String::new(),
            format!("{}", report.estimate),
            format!("{}", report.std_error),
        ]);
    } else {
        let f = max_guess_level_dist(n, delta, &budget)?;
        let yes = max_guess_eval(&f, |_| Rational::one())?;
        let no = max_guess_eval(&f, |_| Rational::zero())?;
        let bayes = max_guess_bayes_exact(n, delta, &budget)?;
        let advantage = bayes.clone() - Rational::one();
        exact_row(&mut t, "always-yes", &yes);
        exact_row(&mut t, "always-no", &no);
        exact_row(&mut t, "bayes", &bayes);
        exact_row(&mut t, "advantage", &advantage);
        exact_row(
            &mut t,
            "advantage-bound",
            &(rat_int(n as i64) / rat_int(delta as i64)),
        );
    }
    Ok(t)
}

const SINGLESHOT_COLS: [&str; 7] = [
    "kind",
    "m",
    "obs",
    "label",
    "value_num",
    "value_den",
    "value_float",
];

pub fn oracle_singleshot(m: u64) -> Result<Table> {
    let d = die_pairs_dist(m)?;
    let report = bayes_single_shot(&d);
    let [num, den, float] = exact_cells(&report.value);
    let mut t = Table::new(&SINGLESHOT_COLS);
    t.push(vec![
        "value".into(),
        m.to_string(),
        String::new(),
        String::new(),
        num,
        den,
        float,
    ]);
    for (obs, label) in &report.decisions {
        t.push(vec![
            "decision".into(),
            m.to_string(),
            obs.to_string(),
            label.to_string(),
            String::new(),
            String::new(),
            String::new(),
        ]);
    }
    Ok(t)
}

const SECRETARY_COLS: [&str; 7] = [
    "experiment",
    "family",
    "n",
    "bound",
    "states",
    "value_num",
    "value_den",
];

pub fn oracle_secretary(family: &Family) -> Result<Table> {
    let budget = EnumBudget::from_env();
    let f = family.build(&budget)?;
    let report = bayes_secretary(&f, &budget)?;
    let bound = f
        .support()
        .map(ValueSet::bound)
        .max()
        .ok_or(CoreError::EmptyRange)?;
    let [num, den, _] = exact_cells(&report.value);
    let mut t = Table::new(&SECRETARY_COLS);
    t.push(vec![
        "oracle-secretary".into(),
        family.label(),
        report.n.to_string(),
        bound.to_string(),
        report.states.to_string(),
        num,
        den,
    ]);
    Ok(t)
}
