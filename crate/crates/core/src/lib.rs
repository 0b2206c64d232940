//! Substitution subshifts, block hierarchies, desubstitution and the
//! suspension tiling flows built over them, plus an experiment harness for
//! frequencies, correlations, spectral scans, rigidity and joinings.

pub mod error;
pub mod hierarchy;
pub mod lab;
pub mod perron;
pub mod recognizer;
pub mod substitution;
pub mod tiling;
pub mod word;

pub use error::{Error, Result};
pub use substitution::{FrequencyVector, Language, Substitution, SubstitutionMatrix};
pub use word::{Alphabet, Letter, Word};
