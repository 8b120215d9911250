//! Long-range random walks, electric networks, hierarchical rewiring of
//! long-range networks and the weight-dependent random connection model,
//! at a scale where every quantitative claim can be checked by enumeration,
//! linear solves or Monte Carlo.

pub mod cli;
pub mod error;
pub mod lattice;
pub mod network;
pub mod rewire;
pub mod numerics;
pub mod rcm;
pub mod stepdist;
pub mod unionfind;
pub mod walks;

pub use error::{Error, Result};
