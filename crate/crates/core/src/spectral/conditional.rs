use num_complex::Complex64;

use crate::error::{Error, Result};

use super::matrix::FourierMatrix;

/// Symmetric partial diagonal sums of a (presumed) trace-class operator.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalTrace {
    /// `Σ_{|k| ≤ N} tr A_{kk}` at the full cutoff.
    pub partial_sum: Complex64,
    /// Partial sum plus the geometric tail estimate from the last two increments.
    pub extrapolated: Complex64,
    /// Size of the tail estimate.
    pub error_estimate: f64,
    /// `(M, Σ_{|k| ≤ M})` for `M = N/4, N/2, N`.
    pub partial_sums: Vec<(usize, Complex64)>,
    /// `Σ_{|k| ≤ N} |tr A_{kk}|`, the size of the sum before cancellation.
    pub absolute_mass: f64,
}

/// Increments below this fraction of the absolute mass are rounding noise.
const NOISE_FLOOR: f64 = 1e-12;

/// Increments that shrink by less than this factor per doubling of the cutoff
/// are treated as divergent.
const DIVERGENCE_RATIO: f64 = 0.75;

/// Plain operator trace via symmetric partial sums over modes.
///
/// Divergence is flagged when the partial sums keep growing: the increment from
/// `N/2` to `N` is not smaller than [`DIVERGENCE_RATIO`] times the increment
/// from `N/4` to `N/2`.
pub fn conditional_trace(a: &FourierMatrix) -> Result<ConditionalTrace> {
    let n = a.mode_cutoff();
    if n < 4 {
        return Err(Error::InvalidArgument("conditional trace needs a cutoff of at least 4 modes".into()));
    }
    let cut = [n / 4, n / 2, n];
    let mut sums = Vec::with_capacity(3);
    let mut acc = a.diagonal_block_trace(0);
    let mut mass = acc.norm();
    let mut k = 0usize;
    for &m in &cut {
        while k < m {
            k += 1;
            let (p, q) = (a.diagonal_block_trace(k as i64), a.diagonal_block_trace(-(k as i64)));
            mass += p.norm() + q.norm();
            acc += p + q;
        }
        sums.push((m, acc));
    }
    let d1 = (sums[1].1 - sums[0].1).norm();
    let d2 = (sums[2].1 - sums[1].1).norm();
    if d2 > NOISE_FLOOR * mass && d2 >= DIVERGENCE_RATIO * d1 {
        return Err(Error::Divergent(d1, d2));
    }
    let ratio = if d1 > 0.0 { d2 / d1 } else { 0.0 };
    let tail = (sums[2].1 - sums[1].1) * (ratio / (1.0 - ratio));
    Ok(ConditionalTrace {
        partial_sum: acc,
        extrapolated: acc + tail,
        error_estimate: tail.norm(),
        partial_sums: sums,
        absolute_mass: mass,
    })
}
