//! Completion problems for finite frames: given a Hermitian operator with
//! known spectrum and a budget of squared vector lengths, decide which
//! completed spectra are reachable, compute the minimal one, and build
//! vectors that realize a chosen target.
//!
//! - [`ratio`], [`spectrum`]: exact rational scalars and ordered spectra,
//!   with majorization and completion feasibility tests;
//! - [`optimizer`]: recursive water-filling solver for the minimal completion
//!   spectrum, in a reference form and a faster breakpoint-table form;
//! - [`eigensteps`]: tables of intermediate spectra, one row per added vector;
//! - [`synthesis`]: numerical construction of completion vectors plus a
//!   self-contained Jacobi eigensolver used for independent verification;
//! - [`cli`]: the JSON command-line surface.

pub mod cli;
pub mod eigensteps;
pub mod optimizer;
pub mod ratio;
pub mod spectrum;
pub mod synthesis;

pub use ratio::Ratio;
pub use spectrum::{
    classical_schur_horn_feasible, completion_feasible, interlaces_over, majorizes,
    FeasibilityReport, Spectrum, SpectrumError,
};

#[cfg(test)]
pub(crate) mod test_support;
