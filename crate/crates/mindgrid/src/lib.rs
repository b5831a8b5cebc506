//! Bayesian theory-of-mind engine for keys-doors-gems gridworlds.
//!
//! An observer watches an agent move through a small grid, opening boxes and
//! unlocking doors on the way to one of several gem goals. The engine inverts
//! a noisy-rational planning model of that agent to recover a joint posterior
//! over its goal, the hidden environment state, and its evolving graded
//! beliefs - and then answers typed natural-language-style statements about
//! those beliefs ("the player thinks the key must be in box 3") with
//! probabilities.
//!
//! Pipeline, end to end:
//!
//! 1. [`elot`] - a typed epistemic formula language: parse, print, typecheck,
//!    and lower statements into threshold comparisons over subjective
//!    probabilities.
//! 2. [`gridworld`] - deterministic environment model: maps, states, actions,
//!    observations, and hidden-content enumeration.
//! 3. [`planner`] - memoized optimal-cost planning and Boltzmann-rational
//!    action likelihoods over belief states.
//! 4. [`btom`] - exact enumerative inverse planning over (goal, initial
//!    state, initial belief) hypotheses.
//! 5. [`evaluator`] - statement scoring against the posterior, normalized
//!    likelihoods, and hyperparameter fitting against human ratings.
//! 6. [`translator`] - pluggable sentence-to-formula translation backends.
//! 7. [`cli`] - scenario/statement file formats and batch runners used by the
//!    `mindgrid` binary.

pub mod btom;
pub mod cli;
pub mod elot;
pub mod evaluator;
pub mod gridworld;
pub mod planner;
pub mod translator;
