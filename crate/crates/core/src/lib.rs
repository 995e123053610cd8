//! Defense of a multi-node network against adversarial attacks, modelled as a
//! Bayesian multi-node bandit: one node is probed per step, thwarted attacks
//! earn a reward, and the per-node attack value is set by a variation-bounded
//! adversary.
//!
//! The crate provides the pieces needed to run and evaluate that loop:
//!
//! * [`attack`] — truncated-Poisson attack counts and Gamma-conjugate beliefs
//!   over the unknown attack rates.
//! * [`policy`] — exponential-weights policies with batch restarts: Hedge fed
//!   a rate vector, Thompson-Hedge driven by posterior sampling, and a
//!   restarted EXP3 baseline under bandit feedback.
//! * [`adversary`] — cost-sequence generation and the cumulative-variation
//!   budget that constrains the adversary.
//! * [`opf`] — a DC optimal-power-flow model of a distributed generation
//!   system; per-node attack costs are operation-cost differences between the
//!   intact grid and a single-node outage.
//! * [`simplex`] — the dense LP solver backing [`opf`].
//! * [`regret`] — regret functionals, theoretical bound curves, and the
//!   seeded Monte-Carlo estimation harness.
//!
//! The crate is `no_std` (with `alloc`); file formats, statistics tables and
//! the CLI live in the companion `mnb-lab` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod adversary;
pub mod attack;
pub mod opf;
pub mod policy;
pub mod regret;
pub mod rng;
pub mod simplex;
pub mod stats;

mod math;
