//! Fourier-matrix backend: quantization of symbols, exact truncated heat
//! traces and least-squares extraction of their small-ε expansion.
//!
//! Nothing here consults the symbolic composition or trace formulas; the
//! module is the numerical reference the symbolic side is checked against.

mod conditional;
mod fit;
mod heat;
mod matrix;

pub use conditional::{conditional_trace, ConditionalTrace};
pub use fit::{fit_expansion, AsymptoticFit, FitSpec};
pub use heat::{heat_trace, heat_trace_sweep, log_grid, HeatSweep, HeatWeight, PreparedTrace, TRUNCATION_WEIGHT_LIMIT};
pub use matrix::{quantize, weight_matrix, FourierMatrix};

/// Default ε-grid: 40 log-spaced points in `[1e−4, 1e−2]`.
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-4, 1e-2, 40)
}
