//! Privacy-preserving data collaboration between a municipal authority and
//! mobility providers, instantiated as fixed-time arterial signal timing fed by
//! differentially private front-of-queue trajectory statistics.
//!
//! The crate is organized bottom-up:
//!
//! * [`game`]: the leader/follower game engine: budget floors, the
//!   continuous lower-stage equilibrium, the binary upper-stage game, and the
//!   leader's enumeration over quality thresholds.
//! * [`privacy`]: query statistics, the Gaussian mechanism, synthetic
//!   front-of-queue reconstruction and trajectory-to-count budget conversion.
//! * [`traffic`]: shockwave ground truth, regression on front-of-queue
//!   points, Bayesian fusion across owners and slope-to-flow conversion.
//! * [`signal`]: Webster timing, MAXBAND offsets over an in-crate simplex,
//!   and an analytical delay surrogate.
//! * [`sim`]: scenario files, the Monte Carlo utility surface, equilibrium
//!   search over the leader grid and artifact export.
//!
//! The guide under `book/` walks through the same layers with runnable
//! snippets; those snippets are compiled and run as doc-tests of this crate.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod game;
pub mod privacy;
pub mod rng;
pub mod signal;
pub mod sim;
pub mod traffic;

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/game.md")]
    pub mod game {}
    #[doc = include_str!("../../../book/src/privacy.md")]
    pub mod privacy {}
    #[doc = include_str!("../../../book/src/traffic.md")]
    pub mod traffic {}
    #[doc = include_str!("../../../book/src/signals.md")]
    pub mod signals {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    pub mod simulation {}
}
