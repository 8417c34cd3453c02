//! Probabilistic reward machines and algorithms that learn them from
//! non-Markovian reward signals.

pub mod error;
pub mod label;
pub mod prm;
pub mod env;
pub mod table;
pub mod par;
pub mod verify;
pub mod active;
pub mod passive;

pub use error::{Error, Result};
pub use label::{AtomicPropositions, Label, Reward, Word};
pub use prm::{Prm, PrmBuilder, TransitionMatrix};
