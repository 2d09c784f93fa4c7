//! Exact-arithmetic laboratory for ordinal online problems.
//!
//! The crate builds hard input distributions for games in which an algorithm
//! sees numbers one by one (secretary-style stopping, rank guessing, the game
//! of googol), evaluates cardinal and ordinal policies on them exactly, and
//! checks the advantage and indistinguishability claims that motivate the
//! constructions.
//!
//! Everything proof-adjacent runs on `BigRational`: distributions, policies,
//! evaluators, and the reported values are exact. Floats only show up in
//! Monte-Carlo estimates and in display columns.
//!
//! Module map:
//! - [`dist`]: finite distributions, total variation, budgeted enumeration
//! - [`osi`]: order-statistics-indistinguishable value-set distributions
//! - [`universal`]: ordinal tasks, policy evaluation, cardinal-to-ordinal replay
//! - [`rankguess`]: perturbed rank guessing and the die-guessing reduction
//! - [`googol`]: level permutations, their Markov chain, secretary DPs
//! - [`oracle`]: Bayes-optimal baselines for single-shot and stopping games

pub mod dist;
pub mod error;
pub mod googol;
pub mod linalg;
pub mod oracle;
pub mod osi;
pub mod perm;
pub mod rankguess;
pub mod rational;
pub mod universal;

pub use dist::{empirical_tv, uniform_int, EmpiricalTv, EnumBudget, FiniteDist};
pub use error::{CoreError, Result};
pub use perm::Perm;
pub use rational::{format_ratio, parse_ratio, rat, rat_int, Rational};
