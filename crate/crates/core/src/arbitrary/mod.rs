//! Receivers with arbitrary (not necessarily monotone) utilities.

pub mod binary;
pub mod bounds;
pub mod ternary;

pub use binary::{interval_utility, prop1_adversary, prop1_scheme, prop1_sweep_regret, Prop1Adversary};
pub use bounds::{
    thm2_lower_adoption_prob, thm2_lower_bound_check, thm2_upper_scheme, GoodNormalBadInstance,
    LowerBoundCheck,
};
pub use ternary::{ternary_mass_in, ternary_regret, ternary_sample, HalfPlaneAdoption};
