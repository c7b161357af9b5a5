//! Guessing the hidden order in which three parties act on a shared bit or
//! qubit: exact searches over classical strategies, cone programs for
//! non-signaling and quantum strategies, and exact verification of a
//! perfect entanglement-assisted strategy.

pub mod classical;
pub mod cli;
pub mod error;
pub mod game;
pub mod network;
pub mod quantum;
pub mod report;
pub mod solver;
pub mod tensor;

pub use error::{Error, Result};
