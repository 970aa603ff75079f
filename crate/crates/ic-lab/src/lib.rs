//! Laboratory for multi-receiver random access codes over no-signaling boxes.
//!
//! The crate is organized around a handful of resource representations:
//! dense conditional-probability tables ([`nsbox::BoxTable`]), small exact
//! quantum states ([`quantum::DensityMatrix`]), discrete joint distributions
//! ([`infotheory::JointDistribution`]), Bell functionals
//! ([`bell::BellFunctional`]) and the 2-ary tree Ising model
//! ([`ising::BetheTree`]). Protocol execution is exact enumeration
//! throughout; Monte Carlo appears only in the Ising module and is fully
//! seeded.

pub mod bell;
pub mod error;
pub mod infotheory;
pub mod ising;
pub mod manifest;
pub mod nsbox;
pub mod quantum;
pub mod rac;

pub use error::{IcError, Result};
