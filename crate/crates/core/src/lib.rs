//! Lattice simulation of a localized two-particle "impossible measurement"
//! protocol: two spin-1/2 particles hopping on a 1-D chain, a detector
//! qubit, and the bookkeeping needed to decide whether a kick in one region
//! can be seen by a detector in a causally disconnected one.

pub mod cli;
pub mod composite;
pub mod error;
pub mod lattice;
pub mod protocol;
pub mod qcore;

pub use error::{Error, Result};
