//! Seeded verification suites.
//!
//! A [`TrialConfig`] names a suite and the distribution of random
//! instances; [`run`] evaluates every trial (in parallel), rechecks any
//! failing comparison in a more precise mode, and assembles a
//! [`VerificationReport`]. Reports depend only on the configuration, never
//! on scheduling.

mod config;
mod generate;
mod report;
mod suites;

pub use config::{AtomRange, ExponentTuple, Lattice, Suite, TrialConfig, WeightScheme};
pub use generate::generate_instance;
pub use report::{run, run_with, Bin, Certificate, FixtureOutcome, Graze, PropertyTally, Recheck, VerificationReport};
pub use suites::{
    default_phi, evaluate, fixtures, thm32_sides, thm41_sides, thm43_sides, Check, Fixture, Relation,
};
