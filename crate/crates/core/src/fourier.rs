//! Band-limited periodic functions on the circle, stored by Fourier coefficients.
//!
//! A function `u(x) = Σ_{|k| ≤ B} û_k e^{ikx}` is kept as the coefficient array
//! `û_{-B}, …, û_B`. Products are exact convolutions, so the band limit of a
//! product is the sum of the band limits.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A scalar band-limited periodic function.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarLoop {
    band: usize,
    coeffs: Vec<Complex64>,
}

impl ScalarLoop {
    pub fn zeros(band: usize) -> Self {
        ScalarLoop { band, coeffs: vec![ZERO; 2 * band + 1] }
    }

    pub fn constant(c: Complex64) -> Self {
        ScalarLoop { band: 0, coeffs: vec![c] }
    }

    /// Builds from `(mode, coefficient)` pairs; repeated modes accumulate.
    pub fn from_modes<I: IntoIterator<Item = (i64, Complex64)>>(modes: I) -> Self {
        let modes: Vec<_> = modes.into_iter().collect();
        let band = modes.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        let mut out = ScalarLoop::zeros(band);
        for (k, c) in modes {
            out.coeffs[(k + band as i64) as usize] += c;
        }
        out
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.band {
            ZERO
        } else {
            self.coeffs[(k + self.band as i64) as usize]
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `(1/2π)∫ u dx`, exactly.
    pub fn mean(&self) -> Complex64 {
        self.coeff(0)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.modes()
            .map(|(k, c)| c * Complex64::from_polar(1.0, k as f64 * x))
            .sum()
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let b = self.band as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - b, c))
    }

    /// `∂_x u`.
    pub fn derivative(&self) -> Self {
        ScalarLoop {
            band: self.band,
            coeffs: self.modes().map(|(k, c)| c * Complex64::new(0.0, k as f64)).collect(),
        }
    }

    pub fn mul(&self, other: &ScalarLoop) -> Self {
        let mut out = ScalarLoop::zeros(self.band + other.band);
        for (k1, a) in self.modes() {
            if a == ZERO {
                continue;
            }
            for (k2, b) in other.modes() {
                out.coeffs[(k1 + k2 + out.band as i64) as usize] += a * b;
            }
        }
        out
    }

    pub fn add(&self, other: &ScalarLoop) -> Self {
        let band = self.band.max(other.band);
        let mut out = ScalarLoop::zeros(band);
        for (k, c) in self.modes().chain(other.modes()) {
            out.coeffs[(k + band as i64) as usize] += c;
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ScalarLoop { band: self.band, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// `Σ_k |û_k|`, an upper bound for the sup norm.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }
}

/// A band-limited periodic `d×d` matrix function.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixLoop {
    dim: usize,
    band: usize,
    coeffs: Vec<CMatrix>,
}

impl MatrixLoop {
    pub fn zeros(dim: usize, band: usize) -> Self {
        MatrixLoop { dim, band, coeffs: vec![CMatrix::zeros(dim, dim); 2 * band + 1] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::constant(CMatrix::identity(dim, dim))
    }

    pub fn constant(m: CMatrix) -> Self {
        assert!(m.is_square(), "matrix loop coefficients must be square");
        MatrixLoop { dim: m.nrows(), band: 0, coeffs: vec![m] }
    }

    /// Builds from `(mode, coefficient)` pairs; repeated modes accumulate.
    pub fn from_modes<I>(dim: usize, modes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, CMatrix)>,
    {
        let modes: Vec<_> = modes.into_iter().collect();
        let band = modes.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        let mut out = MatrixLoop::zeros(dim, band);
        for (k, m) in modes {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::ShapeMismatch(format!(
                    "mode {k} has shape {}x{}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            out.coeffs[(k + band as i64) as usize] += m;
        }
        Ok(out)
    }

    /// Scalar function times the identity.
    pub fn scalar(dim: usize, u: &ScalarLoop) -> Self {
        MatrixLoop {
            dim,
            band: u.band(),
            coeffs: u.coeffs().iter().map(|&c| CMatrix::identity(dim, dim) * c).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn coeff(&self, k: i64) -> Option<&CMatrix> {
        if k.unsigned_abs() as usize > self.band {
            None
        } else {
            Some(&self.coeffs[(k + self.band as i64) as usize])
        }
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, &CMatrix)> + '_ {
        let b = self.band as i64;
        self.coeffs.iter().enumerate().map(move |(i, c)| (i as i64 - b, c))
    }

    pub fn eval(&self, x: f64) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (k, c) in self.modes() {
            out += c * Complex64::from_polar(1.0, k as f64 * x);
        }
        out
    }

    /// Zero-padded copy with a larger band limit.
    pub fn widened(&self, band: usize) -> Self {
        if band <= self.band {
            return self.clone();
        }
        let mut out = MatrixLoop::zeros(self.dim, band);
        for (k, c) in self.modes() {
            out.coeffs[(k + band as i64) as usize] = c.clone();
        }
        out
    }

    /// Drops modes above `band`; returns the truncated loop and the
    /// coefficient norm that was discarded.
    pub fn truncated(&self, band: usize) -> (Self, f64) {
        if band >= self.band {
            return (self.clone(), 0.0);
        }
        let mut discarded = 0.0;
        let mut out = MatrixLoop::zeros(self.dim, band);
        for (k, c) in self.modes() {
            if k.unsigned_abs() as usize <= band {
                out.coeffs[(k + band as i64) as usize] = c.clone();
            } else {
                discarded += c.norm();
            }
        }
        (out, discarded)
    }

    pub fn mul(&self, other: &MatrixLoop) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = MatrixLoop::zeros(self.dim, self.band + other.band);
        let ob = out.band as i64;
        for (k1, a) in self.modes() {
            if a.iter().all(|z| *z == ZERO) {
                continue;
            }
            for (k2, b) in other.modes() {
                out.coeffs[(k1 + k2 + ob) as usize].gemm(Complex64::new(1.0, 0.0), a, b, Complex64::new(1.0, 0.0));
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &MatrixLoop) -> Result<Self> {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &MatrixLoop) -> Result<Self> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: Complex64, other: &MatrixLoop) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.widened(other.band);
        let b = out.band as i64;
        for (k, c) in other.modes() {
            out.coeffs[(k + b) as usize] += c * s;
        }
        Ok(out)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        MatrixLoop {
            dim: self.dim,
            band: self.band,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Pointwise commutator `[u(x), v(x)]`.
    pub fn commutator(&self, other: &MatrixLoop) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// `D_x^α u` with `D_x = −i∂_x`: mode `k` is multiplied by `k^α`.
    pub fn dx_power(&self, alpha: usize) -> Self {
        if alpha == 0 {
            return self.clone();
        }
        MatrixLoop {
            dim: self.dim,
            band: self.band,
            coeffs: self
                .modes()
                .map(|(k, c)| c * Complex64::new((k as f64).powi(alpha as i32), 0.0))
                .collect(),
        }
    }

    pub fn trace(&self) -> ScalarLoop {
        ScalarLoop { band: self.band, coeffs: self.coeffs.iter().map(|c| c.trace()).collect() }
    }

    /// Applies a linear map to every coefficient (e.g. a fiber-wise projection).
    pub fn map_coeffs<F: Fn(&CMatrix) -> CMatrix>(&self, f: F) -> Self {
        let coeffs: Vec<CMatrix> = self.coeffs.iter().map(f).collect();
        let dim = coeffs.first().map_or(self.dim, |c| c.nrows());
        MatrixLoop { dim, band: self.band, coeffs }
    }

    /// `Σ_k ‖û_k‖_F`, an upper bound for `sup_x ‖u(x)‖_F`.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    /// Sampled values on the uniform grid `x_j = 2πj/m`.
    pub fn sample(&self, m: usize) -> Vec<CMatrix> {
        (0..m).map(|j| self.eval(2.0 * PI * j as f64 / m as f64)).collect()
    }

    fn check_dim(&self, other: &MatrixLoop) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::FiberDimMismatch(self.dim, other.dim));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn product_matches_pointwise_evaluation() {
        let u = ScalarLoop::from_modes([(-1, c(0.5, 0.1)), (0, c(1.0, 0.0)), (2, c(0.0, -0.3))]);
        let v = ScalarLoop::from_modes([(1, c(0.2, 0.0)), (-2, c(-0.4, 0.7))]);
        let uv = u.mul(&v);
        assert_eq!(uv.band(), 4);
        for x in [0.0, 0.3, 1.7, 4.0] {
            assert!((uv.eval(x) - u.eval(x) * v.eval(x)).norm() < 1e-14);
        }
    }

    #[test]
    fn derivative_of_single_mode() {
        let u = ScalarLoop::from_modes([(3, c(1.0, 0.0))]);
        let du = u.derivative();
        assert_eq!(du.coeff(3), c(0.0, 3.0));
        let m = MatrixLoop::scalar(1, &u).dx_power(2);
        assert_eq!(m.coeff(3).unwrap()[(0, 0)], c(9.0, 0.0));
    }

    #[test]
    fn matrix_commutator_pointwise() {
        let a = MatrixLoop::from_modes(
            2,
            [
                (0, CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])),
                (1, CMatrix::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)])),
            ],
        )
        .unwrap();
        let b = MatrixLoop::from_modes(
            2,
            [(-1, CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0)]))],
        )
        .unwrap();
        let comm = a.commutator(&b).unwrap();
        for x in [0.1, 2.2] {
            let (ax, bx) = (a.eval(x), b.eval(x));
            assert!((comm.eval(x) - (&ax * &bx - &bx * &ax)).norm() < 1e-13);
        }
        assert!(comm.trace().norm() < 1e-14);
    }

    #[test]
    fn truncation_reports_discarded_mass() {
        let u = MatrixLoop::scalar(1, &ScalarLoop::from_modes([(0, c(1.0, 0.0)), (3, c(0.25, 0.0))]));
        let (t, lost) = u.truncated(2);
        assert_eq!(t.band(), 2);
        assert!((lost - 0.25).abs() < 1e-15);
        assert!(MatrixLoop::from_modes(2, [(0, CMatrix::zeros(3, 3))]).is_err());
    }
}
