//! Multiport beam-splitter outputs in truncated Fock space and their SLOCC
//! classification.
//!
//! Three input families are supported on the first port: finite number-state
//! superpositions, cat states (finite superpositions of coherent states) and
//! hybrids of the two. For each, [`classify`] builds the output state, constructs
//! an explicit certificate of invertible local operators reducing it to a class
//! representative, replays that certificate, and checks the Schmidt ranks across
//! every bipartition.
//!
//! Module map:
//! - [`fock`]: states, beam-splitter outputs, cutoffs.
//! - [`coeff`]: coefficient-matrix view and Hankel block checks.
//! - [`ilo`]: local operators, certificates and the reduction pipelines.
//! - [`schmidt`]: bipartitions and Schmidt ranks.
//! - [`product`]: product-state search in reduced ranges.
//! - [`classify`]: the end-to-end pipeline and class comparison.

// `!(x > 0.0)` style checks are meant to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod coeff;
pub mod error;
pub mod fock;
pub mod ilo;
pub mod linalg;
pub mod product;
pub mod schmidt;

pub use classify::{
    class_hierarchy, classify, cross_scenario_compare, ClassLabel, ClassificationReport, ClassifyOptions, Hierarchy,
    Scenario, Status, Verdict,
};
pub use error::{Error, Result};
pub use fock::{CatTerm, Cutoff, InputFamily, InputSpec, ModeTensor};
pub use ilo::{IloCertificate, LocalOperator};
pub use num_complex::Complex64 as C64;
pub use product::{ProductSearchConfig, ProductSearchResult};
pub use schmidt::Bipartition;
