//! Numerical laboratory for splitting types of bundles over the two-sphere.
//!
//! Splitting types are computed two ways: by energy gradient flow on based loops
//! in U(r) (the radial trivialization of a connection) and by a block-Toeplitz
//! kernel-rank oracle on Laurent loops. Around these sit the Morse-theoretic
//! tools: Hessian indices of geodesic loops, family energy profiles, curvature
//! bounds for connections, and a small Morse-Bott cascade complex.

pub mod error;
pub mod linalg;
pub mod liegroup;
pub mod loopspace;
pub mod flow;
pub mod birkhoff;
pub mod bundle;
pub mod invariants;
pub mod cascade;
pub mod corpus;
pub mod cli;

pub use error::{Error, Result};
