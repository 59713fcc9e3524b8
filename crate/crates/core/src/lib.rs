//! Symbol calculus for classical pseudodifferential operators on the circle.
//!
//! The crate provides
//!
//! * the graded algebra of classical matrix-valued symbols ([`symbol`]),
//! * trace functionals on it: the Wodzicki residue, leading-symbol traces
//!   paired with distributions on the cosphere bundle, and closed-form heat
//!   coefficients ([`traces`]),
//! * a Fourier-matrix backend that quantizes symbols, evaluates heat traces
//!   `Tr(A e^{−εQ})` exactly at finite cutoff and fits their small-ε
//!   expansion ([`spectral`]),
//! * loop-group connections, curvatures and first Chern forms
//!   ([`loop_geometry`], built on [`lie`]),
//! * finite-dimensional Chern–Weil machinery for algebra-valued forms
//!   ([`forms`]).
//!
//! The spectral backend is independent of the symbolic one and serves as its
//! numerical cross-check.
//!
//! ```
//! use symcalc::{compose, weight_power_symbol, ClassicalSymbol, WeightSpec};
//! use symcalc::traces::wodzicki_residue;
//!
//! // Λ^{-1} = (Δ + P)^{-1/2}: order −1, residue 2 (one from each sheet).
//! let inv = weight_power_symbol(WeightSpec::new(-0.5), 1, 2)?;
//! assert_eq!(wodzicki_residue(&inv)?.re, 2.0);
//!
//! // Λ ∘ Λ^{-1} is the identity symbol.
//! let lambda = weight_power_symbol(WeightSpec::new(0.5), 1, 2)?;
//! let id = compose(&lambda, &inv, 2)?;
//! assert!(id.max_level_distance(&ClassicalSymbol::identity(1, 2))? < 1e-15);
//! # Ok::<(), symcalc::Error>(())
//! ```

pub mod degree;
pub mod error;
pub mod forms;
pub mod fourier;
pub mod lie;
pub mod loop_geometry;
pub mod sample;
pub mod spectral;
pub mod symbol;
pub mod traces;

pub use degree::Degree;
pub use error::{Error, Result};
pub use fourier::{CMatrix, MatrixLoop, ScalarLoop};
pub use num_complex::Complex64;
pub use symbol::{
    commutator, compose, compose_power, multiplication_symbol, weight_power_symbol, ClassicalSymbol,
    HomogeneousComponent, Sheet, WeightSpec,
};
pub use traces::CosphereDistribution;
