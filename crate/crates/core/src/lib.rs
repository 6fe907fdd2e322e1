//! Desk-scale laboratory for additive combinatorics over prime fields.
//!
//! The crate computes, exactly and at small scale, the objects that appear
//! in the study of polynomial expanders and multi-source extractors over
//! `F_p`: image sets and collision energies of two-variable maps,
//! point/hyperplane incidences, exponential-sum spectra of three-variable
//! maps, moment counts, Sárközy-type equation counts, multiplication tables,
//! Weil sums and interval preimages. [`experiment`] wraps everything in a
//! seeded, reproducible runner driven by JSON configs.

pub mod additive;
pub mod budget;
pub mod error;
pub mod expander;
pub mod experiment;
pub mod extractor;
pub mod field;
pub mod fuzzing;
pub mod incidence;

pub use budget::Budget;
pub use error::{Error, Result};
pub use field::{FpInterval, FpSet, IntPoly, MapSpec, PrimeField};
