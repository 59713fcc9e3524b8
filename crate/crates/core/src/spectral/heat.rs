use nalgebra::linalg::{Schur, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::CMatrix;

use super::matrix::FourierMatrix;

/// Largest acceptable `e^{−ε_min λ_max}`; above it the truncated spectrum
/// still carries weight at the smallest ε and the sweep is flagged.
pub const TRUNCATION_WEIGHT_LIMIT: f64 = 1e-12;

#[derive(Clone, Debug)]
enum Route {
    Diagonal(Vec<f64>),
    /// Hermitian weight: `Q = V Λ V*`.
    Unitary { eigenvalues: Vec<f64>, basis: CMatrix },
    /// Diagonalizable with real spectrum but not normal: `Q = (UV) Λ (UV)⁻¹`
    /// from the Schur form `Q = U T U*` and the unit upper-triangular
    /// eigenvector matrix `V` of `T`.
    General { eigenvalues: Vec<f64>, schur_basis: CMatrix, vectors: CMatrix, vectors_inv: CMatrix },
}

/// A weight operator `Q` prepared for repeated evaluation of `e^{−εQ}`.
///
/// The spectral decomposition is computed once and reused across ε.
#[derive(Clone, Debug)]
pub struct HeatWeight {
    route: Route,
    size: usize,
    min_eigenvalue: f64,
    max_eigenvalue: f64,
}

impl HeatWeight {
    pub fn new(q: &FourierMatrix) -> Result<Self> {
        let size = q.size();
        if q.is_diagonal() {
            let diag: Vec<Complex64> = q.diagonal();
            let scale = diag.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
            if diag.iter().any(|z| z.im.abs() > 1e-12 * scale) {
                return Err(Error::IllConditionedWeight("diagonal weight has complex entries".into()));
            }
            let eig: Vec<f64> = diag.iter().map(|z| z.re).collect();
            return Ok(Self::with_bounds(Route::Diagonal(eig.clone()), size, &eig));
        }
        let dense = q.to_dense();
        let scale = dense.norm().max(1.0);
        if (&dense - dense.adjoint()).norm() <= 1e-13 * scale {
            let hermitian = (&dense + dense.adjoint()) * Complex64::new(0.5, 0.0);
            let eig = SymmetricEigen::try_new(hermitian, 1e-15, 0)
                .ok_or_else(|| Error::IllConditionedWeight("Hermitian eigensolver did not converge".into()))?;
            let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            return Ok(Self::with_bounds(Route::Unitary { eigenvalues: values.clone(), basis: eig.eigenvectors }, size, &values));
        }
        let (u, t) = Schur::try_new(dense, 1e-15, 0)
            .ok_or_else(|| Error::IllConditionedWeight("Schur decomposition did not converge".into()))?
            .unpack();
        let n = t.nrows();
        let spread = (0..n).map(|i| t[(i, i)].norm()).fold(0.0, f64::max).max(1.0);
        if let Some(i) = (0..n).find(|&i| t[(i, i)].im.abs() > 1e-8 * spread) {
            return Err(Error::IllConditionedWeight(format!("non-real eigenvalue {}", t[(i, i)])));
        }
        let vectors = triangular_eigenvectors(&t, CLUSTER_TOL * spread)?;
        let vectors_inv = vectors
            .clone()
            .solve_upper_triangular(&CMatrix::identity(n, n))
            .ok_or_else(|| Error::IllConditionedWeight("eigenvector matrix is singular".into()))?;
        let values: Vec<f64> = (0..n).map(|i| t[(i, i)].re).collect();
        Ok(Self::with_bounds(
            Route::General { eigenvalues: values.clone(), schur_basis: u, vectors, vectors_inv },
            size,
            &values,
        ))
    }

    fn with_bounds(route: Route, size: usize, eig: &[f64]) -> Self {
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        HeatWeight { route, size, min_eigenvalue: min, max_eigenvalue: max }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.max_eigenvalue
    }

    /// `e^{−ε λ_max}`, the heat weight left on the top of the truncated spectrum.
    pub fn truncation_weight(&self, eps: f64) -> f64 {
        (-eps * self.max_eigenvalue).exp()
    }

    /// Precomputes what `Tr(A e^{−εQ})` needs from `A`.
    pub fn prepare(&self, a: &FourierMatrix) -> Result<PreparedTrace> {
        if a.size() != self.size {
            return Err(Error::ShapeMismatch(format!("operator size {} vs weight size {}", a.size(), self.size)));
        }
        Ok(match &self.route {
            Route::Diagonal(eig) => PreparedTrace { eigenvalues: eig.clone(), weights: a.diagonal() },
            Route::Unitary { eigenvalues, basis } => {
                let rotated = basis.adjoint() * a.to_dense() * basis;
                PreparedTrace { eigenvalues: eigenvalues.clone(), weights: rotated.diagonal().iter().copied().collect() }
            }
            Route::General { eigenvalues, schur_basis, vectors, vectors_inv } => {
                let b = schur_basis.adjoint() * a.to_dense() * schur_basis;
                let left = vectors_inv * b;
                let weights = (0..left.nrows()).map(|i| left.row(i).transpose().dot(&vectors.column(i))).collect();
                PreparedTrace { eigenvalues: eigenvalues.clone(), weights }
            }
        })
    }

    /// `Tr(A e^{−εQ})`.
    pub fn heat_trace(&self, a: &FourierMatrix, eps: f64) -> Result<Complex64> {
        self.prepare(a)?.eval(eps)
    }
}

/// An operator paired with a weight, ready for evaluation at many ε:
/// `Σ_i w_i e^{−ε λ_i}` with `w_i` the diagonal of `A` in the eigenbasis.
#[derive(Clone, Debug)]
pub struct PreparedTrace {
    eigenvalues: Vec<f64>,
    weights: Vec<Complex64>,
}

impl PreparedTrace {
    pub fn eval(&self, eps: f64) -> Result<Complex64> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("ε must be positive, got {eps}")));
        }
        Ok(self.eigenvalues.iter().zip(&self.weights).map(|(l, w)| w * (-eps * l).exp()).sum())
    }
}

/// Eigenvalues closer than this fraction of the spectral radius are treated
/// as one cluster whose eigenvectors are decoupled.
const CLUSTER_TOL: f64 = 1e-8;

/// Eigenvectors of an upper-triangular `T` with diagonalizable clusters:
/// column `j` solves `(T − t_jj) v = 0` with `v_j = 1`, taking `v_i = 0` for
/// `i` in the cluster of `t_jj`.
fn triangular_eigenvectors(t: &CMatrix, cluster_tol: f64) -> Result<CMatrix> {
    let n = t.nrows();
    let scale = t.norm().max(1.0);
    let mut v = CMatrix::identity(n, n);
    for j in 0..n {
        let lambda = t[(j, j)];
        for i in (0..j).rev() {
            let s: Complex64 = (i + 1..=j).map(|k| t[(i, k)] * v[(k, j)]).sum();
            let denom = t[(i, i)] - lambda;
            if denom.norm() <= cluster_tol {
                if s.norm() > 1e-6 * scale {
                    return Err(Error::IllConditionedWeight("weight is not diagonalizable".into()));
                }
                v[(i, j)] = Complex64::new(0.0, 0.0);
            } else {
                v[(i, j)] = -s / denom;
            }
        }
    }
    Ok(v)
}

/// `Tr(A e^{−εQ})` for a weight given as a matrix.
pub fn heat_trace(a: &FourierMatrix, q: &FourierMatrix, eps: f64) -> Result<Complex64> {
    HeatWeight::new(q)?.heat_trace(a, eps)
}

/// Samples of `Tr(A e^{−εQ})` over an ε-grid.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatSweep {
    pub samples: Vec<(f64, Complex64)>,
    /// Set when `e^{−ε_min λ_max}` exceeds [`TRUNCATION_WEIGHT_LIMIT`], i.e. the
    /// mode cutoff is too small for the smallest ε.
    pub truncation_warning: Option<f64>,
}

pub fn heat_trace_sweep(a: &FourierMatrix, q: &HeatWeight, grid: &[f64]) -> Result<HeatSweep> {
    if grid.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidArgument("ε-grid must be positive".into()));
    }
    let prepared = q.prepare(a)?;
    let samples = grid
        .par_iter()
        .map(|&eps| prepared.eval(eps).map(|v| (eps, v)))
        .collect::<Result<Vec<_>>>()?;
    let eps_min = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let w = q.truncation_weight(eps_min);
    Ok(HeatSweep { samples, truncation_warning: (w > TRUNCATION_WEIGHT_LIMIT).then_some(w) })
}

/// `count` log-spaced points in `[min, max]`.
pub fn log_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![min];
    }
    let (lmin, lmax) = (min.ln(), max.ln());
    (0..count)
        .map(|i| (lmin + (lmax - lmin) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::matrix::weight_matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gaussian_sum(eps: f64, n: i64) -> f64 {
        (-n..=n).map(|k| (-eps * (k * k) as f64).exp()).sum()
    }

    #[test]
    fn scalar_identity_heat_trace() {
        let q = weight_matrix(1.0, 200, 1, 1.0);
        let id = FourierMatrix::identity(200, 1);
        let v = heat_trace(&id, &q, 0.01).unwrap();
        let expect = gaussian_sum(0.01, 200) + (-0.01f64).exp() - 1.0;
        assert!((v.re - expect).abs() < 1e-12);
        assert!((v.re - 17.714588).abs() < 1e-5);
    }

    #[test]
    fn zero_operator_sweep() {
        let q = HeatWeight::new(&weight_matrix(1.0, 50, 2, 1.0)).unwrap();
        let zero = FourierMatrix::zeros(50, 2, 0);
        let sweep = heat_trace_sweep(&zero, &q, &log_grid(1e-1, 1.0, 5)).unwrap();
        assert!(sweep.samples.iter().all(|(_, v)| *v == Complex64::new(0.0, 0.0)));
        assert!(sweep.truncation_warning.is_none());
    }

    #[test]
    fn sweep_flags_small_cutoff() {
        let q = HeatWeight::new(&weight_matrix(1.0, 10, 1, 1.0)).unwrap();
        let sweep = heat_trace_sweep(&FourierMatrix::identity(10, 1), &q, &[1e-4, 1e-2]).unwrap();
        assert!(sweep.truncation_warning.is_some());
    }

    #[test]
    fn sweep_decreases_for_positive_operator() {
        let q = HeatWeight::new(&weight_matrix(1.0, 100, 1, 1.0)).unwrap();
        let sweep = heat_trace_sweep(&FourierMatrix::identity(100, 1), &q, &log_grid(1e-4, 1e-1, 20)).unwrap();
        assert!(sweep.samples.windows(2).all(|w| w[1].1.re < w[0].1.re));
        for (eps, v) in &sweep.samples {
            assert!((v.re - (gaussian_sum(*eps, 100) + (-eps).exp() - 1.0)).abs() < 1e-10);
        }
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale)
    }

    #[test]
    fn hermitian_and_general_routes_agree_with_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (modes, d) = (8, 2);
        let n = (2 * modes + 1) * d;
        let q = weight_matrix(1.0, modes, d, 1.0);
        let a = FourierMatrix::from_dense(modes, d, random_matrix(&mut rng, n, 1.0)).unwrap();
        let base = heat_trace(&a, &q, 0.05).unwrap();

        // Unitary conjugation (Hermitian route).
        let u = random_matrix(&mut rng, n, 1.0).qr().q();
        let (qa, aa) = (q.conjugated(&u, &u.adjoint()).unwrap(), a.conjugated(&u, &u.adjoint()).unwrap());
        assert!(matches!(HeatWeight::new(&qa).unwrap().route, Route::Unitary { .. }));
        assert!((heat_trace(&aa, &qa, 0.05).unwrap() - base).norm() < 1e-12 * base.norm());

        // General invertible conjugation.
        let g = CMatrix::identity(n, n) + random_matrix(&mut rng, n, 0.3 / (n as f64).sqrt());
        let gi = g.clone().try_inverse().unwrap();
        let (qg, ag) = (q.conjugated(&g, &gi).unwrap(), a.conjugated(&g, &gi).unwrap());
        assert!(matches!(HeatWeight::new(&qg).unwrap().route, Route::General { .. }));
        assert!((heat_trace(&ag, &qg, 0.05).unwrap() - base).norm() < 1e-11 * base.norm());
    }

    #[test]
    fn complex_spectrum_is_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.0)]);
        // Embed a rotation generator as a 1-mode, 2-fiber weight padded to size.
        let mut big = CMatrix::identity(6, 6);
        big.view_mut((0, 0), (2, 2)).copy_from(&m);
        let q = FourierMatrix::from_dense(1, 2, big).unwrap();
        assert!(matches!(HeatWeight::new(&q), Err(Error::IllConditionedWeight(_))));
    }

    #[test]
    fn grid_is_log_spaced() {
        let g = log_grid(1e-4, 1e-2, 3);
        assert!((g[1] - 1e-3).abs() < 1e-15);
        assert_eq!(g.len(), 3);
    }
}
