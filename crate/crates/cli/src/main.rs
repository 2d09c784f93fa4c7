//! Command line front end. Parses arguments, dispatches to `commands` and
//! `suites`, renders one table per invocation, and reports runtime on stderr
//! so output files stay byte-identical across reruns.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use ordlab_cli::commands::{self, Family};
use ordlab_cli::suites;
use ordlab_cli::table::{write_atomic, OutputFormat, Table};
use ordlab_core::error::{CoreError, Result};

#[derive(Parser)]
#[command(name = "ordlab", version, about = "Ordinal online problems lab")]
struct Cli {
    /// Output format for the result table.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Write output to this file (atomic temp-file-and-rename) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Hard input distributions over value sets.
    #[command(subcommand)]
    Osi(OsiCmd),
    /// Ordinal tasks, exact policy evaluation, cardinal-to-ordinal replay.
    #[command(subcommand)]
    Universal(UniversalCmd),
    /// Deleted-rank guessing policies and their worst-case rewards.
    #[command(subcommand)]
    Rankguess(RankguessCmd),
    /// Level chains, secretary dynamic programs, gap-splitting simulation.
    #[command(subcommand)]
    Googol(GoogolCmd),
    /// Bayes-optimal cardinal baselines.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Aggregated pass/fail check bundles.
    #[command(subcommand)]
    Suite(SuiteCmd),
}

#[derive(clap::Args)]
struct FamilyFlags {
    /// Uniform over consecutive pairs {i, i+1} below the bound.
    #[arg(long)]
    pairs: bool,
    /// Uniform over dyadic triples for levels 1..=lmax.
    #[arg(long)]
    triples: bool,
    /// Recursive gap construction with a level base and a top range.
    #[arg(long)]
    general: bool,
    /// Value bound N for --pairs and --triples.
    #[arg(long = "N")]
    n_bound: Option<u64>,
    /// Largest dyadic level for --triples.
    #[arg(long)]
    lmax: Option<u32>,
    /// Set size for --general.
    #[arg(long)]
    n: Option<usize>,
    /// Level base (rational, e.g. 2 or 5/2) for --general.
    #[arg(long)]
    base: Option<String>,
    /// Top gap range for --general.
    #[arg(long)]
    top: Option<u64>,
}

impl FamilyFlags {
    fn family(&self) -> Result<Family> {
        commands::family_from_flags(
            self.pairs,
            self.triples,
            self.general,
            self.n_bound,
            self.lmax,
            self.n,
            self.base.as_deref(),
            self.top,
        )
    }
}

#[derive(Subcommand)]
enum OsiCmd {
    /// Draw value sets from a family.
    Sample {
        #[command(flatten)]
        family: FamilyFlags,
        /// Number of draws.
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// RNG seed; recorded in the output.
        #[arg(long)]
        seed: u64,
    },
    /// Exact deletion/subset indistinguishability report.
    Verify {
        #[command(flatten)]
        family: FamilyFlags,
        /// Indistinguishability target to judge pass/fail against.
        #[arg(long)]
        eps: Option<String>,
        /// Check this many sampled index-set pairs instead of all of them.
        #[arg(long, default_value_t = 0)]
        sample_pairs: usize,
        /// RNG seed; required when --sample-pairs > 0.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand)]
enum UniversalCmd {
    /// Exact expected reward of an ordinal policy on a task.
    Eval {
        /// Task spec: secretary:N, die:N, jk:N:J:K, or two-sided:N.
        #[arg(long)]
        task: String,
        /// Policy spec: cutoff:K, trivial, uniform, or offline.
        #[arg(long)]
        policy: String,
    },
    /// Replay a cardinal policy ordinally and compare exact values.
    Reduce {
        #[arg(long)]
        task: String,
        /// Input family spec: pairs:N, triples:LMAX:N, or general:N:BASE:TOP.
        #[arg(long)]
        family: String,
        /// Cardinal policy spec: bayes-pair, threshold:T, or cutoff:K.
        #[arg(long)]
        policy: String,
    },
    /// Per-step total-variation drift of the replay chain.
    Drift {
        #[arg(long)]
        task: String,
        #[arg(long)]
        family: String,
    },
}

#[derive(Subcommand)]
enum RankguessCmd {
    /// Worst-case expected reward of a guessing policy over instances.
    Eval {
        /// Number of die faces.
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// Value bound for generated instances.
        #[arg(long, default_value_t = 1_000_000)]
        bound: u128,
        /// Policy spec: warmup2, warmup3, mono, exp:L, guess, die, face:C,
        /// random, or fixed:I.
        #[arg(long)]
        policy: String,
        /// JSON file of instances, or `any` for the built-in battery.
        #[arg(long)]
        instances: Option<String>,
        /// Number of random instances when drawing with --seed.
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// RNG seed for random instances; recorded in the output.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Guess distribution of a policy on one observed vector.
    Trace {
        #[arg(long)]
        policy: String,
        /// Observed values, e.g. 100;150;400 (commas also accepted).
        #[arg(long)]
        observed: String,
        #[arg(long, default_value_t = 1_000_000)]
        bound: u128,
    },
}

#[derive(Subcommand)]
enum GoogolCmd {
    /// Transition matrix and stationary law of the level chain.
    Chain {
        #[arg(long)]
        n: usize,
    },
    /// Rank-only vs rank-plus-level secretary dynamic programs.
    Dp {
        #[arg(long)]
        n: usize,
    },
    /// Seeded gap-splitting simulation trials.
    Sim {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        delta: u64,
        /// Stopping rule: record:K or threshold:V.
        #[arg(long, default_value = "record:1")]
        policy: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// RNG seed; recorded in the output.
        #[arg(long)]
        seed: u64,
    },
    /// Max-guessing game values on the level construction.
    Maxguess {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        delta: u64,
        /// Estimate by Monte Carlo instead of exact enumeration.
        #[arg(long)]
        mc: bool,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// RNG seed; required with --mc.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Bayes-optimal single-shot labeling of scaled die pairs.
    Singleshot {
        /// Number of pair scales.
        #[arg(long)]
        m: u64,
    },
    /// Backward-induction cardinal secretary oracle over a family.
    Secretary {
        /// Input family spec: pairs:N, triples:LMAX:N, or general:N:BASE:TOP.
        #[arg(long)]
        family: String,
    },
}

#[derive(Subcommand)]
enum SuiteCmd {
    /// Every deterministic exact-value check.
    PaperExact,
    /// Seeded lemma checks over random instance batteries.
    Properties {
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Seeded sampling checks with three-sigma allowances.
    Montecarlo {
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
}

fn dispatch(cmd: &Cmd) -> Result<(Table, bool)> {
    let plain = |t: Table| (t, true);
    Ok(match cmd {
        Cmd::Osi(OsiCmd::Sample {
            family,
            count,
            seed,
        }) => plain(commands::osi_sample(&family.family()?, *count, *seed)?),
        Cmd::Osi(OsiCmd::Verify {
            family,
            eps,
            sample_pairs,
            seed,
        }) => plain(commands::osi_verify(
            &family.family()?,
            eps.as_deref(),
            *sample_pairs,
            *seed,
        )?),
        Cmd::Universal(UniversalCmd::Eval { task, policy }) => {
            plain(commands::universal_eval(task, policy)?)
        }
        Cmd::Universal(UniversalCmd::Reduce {
            task,
            family,
            policy,
        }) => plain(commands::universal_reduce(
            task,
            &Family::parse(family)?,
            policy,
        )?),
        Cmd::Universal(UniversalCmd::Drift { task, family }) => {
            plain(commands::universal_drift(task, &Family::parse(family)?)?)
        }
        Cmd::Rankguess(RankguessCmd::Eval {
            n,
            bound,
            policy,
            instances,
            count,
            seed,
        }) => plain(commands::rankguess_eval(
            *n,
            *bound,
            policy,
            instances.as_deref(),
            *count,
            *seed,
        )?),
        Cmd::Rankguess(RankguessCmd::Trace {
            policy,
            observed,
            bound,
        }) => plain(commands::rankguess_trace(policy, observed, *bound)?),
        Cmd::Googol(GoogolCmd::Chain { n }) => plain(commands::googol_chain(*n)?),
        Cmd::Googol(GoogolCmd::Dp { n }) => plain(commands::googol_dp(*n)?),
        Cmd::Googol(GoogolCmd::Sim {
            n,
            delta,
            policy,
            trials,
            seed,
        }) => plain(commands::googol_sim(*n, *delta, policy, *trials, *seed)?),
        Cmd::Googol(GoogolCmd::Maxguess {
            n,
            delta,
            mc,
            trials,
            seed,
        }) => plain(commands::googol_maxguess(*n, *delta, *mc, *trials, *seed)?),
        Cmd::Oracle(OracleCmd::Singleshot { m }) => plain(commands::oracle_singleshot(*m)?),
        Cmd::Oracle(OracleCmd::Secretary { family }) => {
            plain(commands::oracle_secretary(&Family::parse(family)?)?)
        }
        Cmd::Suite(SuiteCmd::PaperExact) => {
            let outcome = suites::paper_exact()?;
            (outcome.table, outcome.all_pass)
        }
        Cmd::Suite(SuiteCmd::Properties { trials, seed }) => {
            let outcome = suites::properties(*trials, *seed)?;
            (outcome.table, outcome.all_pass)
        }
        Cmd::Suite(SuiteCmd::Montecarlo { trials, seed }) => {
            let outcome = suites::montecarlo(*trials, *seed)?;
            (outcome.table, outcome.all_pass)
        }
    })
}

fn run(cli: &Cli) -> Result<bool> {
    let (table, all_pass) = dispatch(&cli.cmd)?;
    let rendered = table.render(cli.format);
    match &cli.out {
        Some(path) => write_atomic(path, &rendered).map_err(|e| {
            CoreError::BadParam(format!("cannot write {}: {e}", path.display()))
        })?,
        None => print!("{rendered}"),
    }
    Ok(all_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match run(&cli) {
        Ok(all_pass) => {
            eprintln!("runtime {} ms", started.elapsed().as_millis());
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
