//! Signaling schemes for binary-action Bayesian persuasion when the sender
//! does not know the receiver's utility.
//!
//! The sender either minimizes regret (the worst-case gap to a sender who
//! knows the utility) or maximizes the worst-case approximation ratio.
//! Alongside the closed-form schemes the crate carries independent
//! numerical checks: a matrix-game solver for the discretized threshold
//! games, brute-force adversaries, exact combinatorics and simplex geometry.

pub mod approx;
pub mod arbitrary;
pub mod error;
pub mod figures;
pub mod io;
pub mod kernel;
pub mod matrix_game;
pub mod mixed;
pub mod model;
pub mod monotone;
pub mod multidim;
pub mod rng;
pub mod standard;
pub mod verify;

pub use error::{PersuasionError, Result};
pub use kernel::{best_response, BestResponse, Kernel, Player};
pub use mixed::{sample_mixed, Atom, DensityForm, DensityPiece, MixedThreshold};
pub use model::{
    adopts, adopts_with_tolerance, expected_adopt_utility, is_bayes_plausible, sender_utility,
    threshold_to_finite, FiniteScheme, Posterior, Prior, ReceiverUtility, SchemeAtom, StateOrdering,
    ThresholdScheme,
};
pub use standard::{
    concavify_at, optimal_knapsack, Concavification, KnapsackSolution, Knot, PiecewiseLinear,
};
