//! Simulation of sensing with a PT-symmetric non-Hermitian qubit.
//!
//! The crate is layered bottom-up:
//!
//! * [`linalg`]: 2×2 complex matrices, eigen-decomposition, exponential.
//! * [`model`]: the Hamiltonian, its CPT metric and gauge-fixed eigenframe.
//! * [`protocol`]: the coupling ramp J(t), detuning phase Φ(t), criticality.
//! * [`geometry`]: Berry connection, quantum metric, stability eigenvalues.
//! * [`dynamics`]: lab-frame and eigenbasis integration, populations.
//! * [`analysis`]: sweeps, classical Fisher information, chirality, I/O.
//!
//! ```
//! use ptsense::model::eigensystem;
//!
//! let frame = eigensystem(3.0, 5.0, 0.0, None).unwrap();
//! assert_eq!(frame.e_plus.re, 4.0);
//! ```
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod protocol;
pub mod units;

pub use error::{Error, Result};
pub use linalg::{CMat2, CVec2, Complex};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/protocol.md")]
    mod protocol {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/sensing.md")]
    mod sensing {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
