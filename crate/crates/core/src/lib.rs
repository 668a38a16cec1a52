//! Exact area-diagram constructions for single-copy entanglement
//! manipulation of bipartite pure states: optimal distillation into
//! maximally entangled m-states, maximum-probability extraction, and
//! deterministic conversion under majorization, each emitted as an explicit
//! measurement protocol that can be checked with rational arithmetic.

pub mod cli;
pub mod convert;
pub mod diagram;
pub mod distill;
pub mod error;
pub mod io;
pub mod protocol;
pub mod rational;
pub mod state;

pub use error::{Error, Result};
pub use rational::Rational;
pub use state::{
    average_yield, make_schmidt, nielsen_condition, parse_schmidt, OutcomeDistribution,
    OutcomeLabel, SchmidtVector,
};
