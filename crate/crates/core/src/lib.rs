//! Simulation toolkit for maximally mixed qubit ensembles and entangled pairs.
//!
//! The crate is layered bottom-up:
//!
//! - [`qstate`]: exact one- and two-qubit linear algebra (pure states, density
//!   matrices, Bloch vectors, partial trace, trace distance).
//! - [`ensemble`]: labeled particle ensembles for the different ways of
//!   preparing the maximally mixed state `I/2`.
//! - [`measurement`]: Born-rule measurement of single particles and the
//!   sequential collapse rule for singlet pairs.
//! - [`stats`]: tomography, two-proportion tests, distribution distances and
//!   the CHSH combination.
//! - [`protocol`]: the three-party signalling scenario with a physical
//!   receiver and two counterfactual oracle receivers.
//!
//! Every random quantity is drawn from a seeded [`seeding::LabRng`], so whole
//! runs are reproducible from a single master seed.

pub mod ensemble;
pub mod error;
pub mod measurement;
pub mod protocol;
pub mod qstate;
pub mod seeding;
pub mod stats;

pub use error::{Error, Result};
