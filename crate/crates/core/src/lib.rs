//! Communication analysis for multiplex networks.
//!
//! Two complementary measures are supported: the multiplex global
//! efficiency, built from min-plus path-length matrices with layer-switch
//! costs, and the multiplex total communicability, built from the action
//! of the matrix exponential on the supra-adjacency matrix. Both come with
//! Perron-root sensitivity machinery (Wilkinson perturbations projected
//! onto sparsity cones) that ranks the intra-layer edges whose
//! strengthening improves each measure the most.

pub mod cli;
pub mod communicability;
pub mod dense;
pub mod efficiency;
pub mod error;
pub mod multiplex;
pub mod oracle;
pub mod ranking;
pub mod report;
pub mod spectral;
pub mod tropical;

pub use error::{Error, Result};
