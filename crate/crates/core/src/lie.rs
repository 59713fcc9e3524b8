//! Finite-dimensional compact semisimple Lie algebras given by structure
//! constants.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::CMatrix;

const VALIDATION_TOL: f64 = 1e-12;

/// Real Lie algebra with `[e_i, e_j] = Σ_k c^k_{ij} e_k`.
///
/// `gram` is minus the Killing form in the chosen basis; it is the identity
/// for the built-in constructors.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    constants: Vec<f64>,
    gram: DMatrix<f64>,
}

impl LieAlgebra {
    /// Validates antisymmetry, the Jacobi identity, `tr ad = 0` and
    /// positivity of minus the Killing form.
    pub fn new(dim: usize, structure_constants: &[Vec<Vec<f64>>]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidLieAlgebra("dimension must be positive".into()));
        }
        if structure_constants.len() != dim
            || structure_constants.iter().any(|m| m.len() != dim || m.iter().any(|r| r.len() != dim))
        {
            return Err(Error::InvalidLieAlgebra(format!("structure constants must be {dim}×{dim}×{dim}")));
        }
        let mut constants = vec![0.0; dim * dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    constants[(i * dim + j) * dim + k] = structure_constants[i][j][k];
                }
            }
        }
        Self::from_flat(dim, constants)
    }

    fn from_flat(dim: usize, constants: Vec<f64>) -> Result<Self> {
        let mut lie = LieAlgebra { dim, constants, gram: DMatrix::zeros(dim, dim) };
        let scale = lie.constants.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let tol = VALIDATION_TOL * scale * scale;

        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    if (lie.c(i, j, k) + lie.c(j, i, k)).abs() > VALIDATION_TOL * scale {
                        return Err(Error::InvalidLieAlgebra(format!("c^{k}_{{{i}{j}}} is not antisymmetric")));
                    }
                }
            }
        }
        let v = lie.jacobi_violation();
        if v > tol {
            return Err(Error::InvalidLieAlgebra(format!("Jacobi identity violated by {v:e}")));
        }
        for i in 0..dim {
            let tr: f64 = (0..dim).map(|j| lie.c(i, j, j)).sum();
            if tr.abs() > VALIDATION_TOL * scale * dim as f64 {
                return Err(Error::InvalidLieAlgebra(format!("tr ad(e_{i}) = {tr:e} ≠ 0")));
            }
        }
        let ads: Vec<DMatrix<f64>> = (0..dim).map(|i| lie.ad_real(i)).collect();
        lie.gram = DMatrix::from_fn(dim, dim, |i, j| -(&ads[i] * &ads[j]).trace());
        if lie.gram.clone().cholesky().is_none() {
            return Err(Error::InvalidLieAlgebra("minus the Killing form is not positive definite".into()));
        }
        Ok(lie)
    }

    /// `su(2)` with `c^k_{ij} = −ε_{ijk}/√2`, orthonormal for minus the Killing form.
    pub fn su2() -> Self {
        let mut c = vec![0.0; 27];
        let s = -std::f64::consts::FRAC_1_SQRT_2;
        for (i, j, k, sign) in [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0), (1, 0, 2, -1.0), (2, 1, 0, -1.0), (0, 2, 1, -1.0)] {
            c[(i * 3 + j) * 3 + k] = s * sign;
        }
        Self::from_flat(3, c).expect("su(2) constants are valid")
    }

    /// `su(n)` in the basis `i λ_a / (2√n)` built from generalized Gell-Mann
    /// matrices, orthonormal for minus the Killing form.
    pub fn su(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidLieAlgebra(format!("su({n}) needs n ≥ 2")));
        }
        let basis = su_basis(n);
        let dim = basis.len();
        let mut c = vec![0.0; dim * dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let br = &basis[i] * &basis[j] - &basis[j] * &basis[i];
                for (k, e) in basis.iter().enumerate() {
                    let num = (&br * e.adjoint()).trace();
                    let den = (e * e.adjoint()).trace();
                    c[(i * dim + j) * dim + k] = (num / den).re;
                }
            }
        }
        Self::from_flat(dim, c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `c^k_{ij}`.
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.constants[(i * self.dim + j) * self.dim + k]
    }

    /// `structure_constants[i][j][k] = c^k_{ij}`.
    pub fn structure_constants(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| (0..self.dim).map(|k| self.c(i, j, k)).collect()).collect())
            .collect()
    }

    /// Minus the Killing form.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn bracket(&self, x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); d];
        for i in 0..d {
            if x[i] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                let xy = x[i] * y[j];
                for (k, o) in out.iter_mut().enumerate() {
                    *o += xy * self.c(i, j, k);
                }
            }
        }
        out
    }

    /// Matrix of `ad_X` acting on coordinate vectors.
    pub fn ad(&self, x: &[Complex64]) -> CMatrix {
        let d = self.dim;
        CMatrix::from_fn(d, d, |k, j| (0..d).map(|i| x[i] * self.c(i, j, k)).sum())
    }

    fn ad_real(&self, i: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |k, j| self.c(i, j, k))
    }

    /// Sesquilinear extension of minus the Killing form, conjugate-linear in `x`.
    pub fn inner(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        let d = self.dim;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += x[i].conj() * y[j] * self.gram[(i, j)];
            }
        }
        acc
    }

    /// Largest `|Σ (c^m_{ij} c^l_{mk} + cyclic)|`.
    pub fn jacobi_violation(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let v: f64 = (0..d)
                            .map(|m| {
                                self.c(i, j, m) * self.c(m, k, l)
                                    + self.c(j, k, m) * self.c(m, i, l)
                                    + self.c(k, i, m) * self.c(m, j, l)
                            })
                            .sum();
                        worst = worst.max(v.abs());
                    }
                }
            }
        }
        worst
    }
}

fn su_basis(n: usize) -> Vec<CMatrix> {
    let zero = Complex64::new(0.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let norm = Complex64::new(1.0 / (2.0 * (n as f64).sqrt()), 0.0);
    let mut out = Vec::with_capacity(n * n - 1);
    for a in 0..n {
        for b in a + 1..n {
            let mut s = CMatrix::from_element(n, n, zero);
            s[(a, b)] = Complex64::new(1.0, 0.0);
            s[(b, a)] = Complex64::new(1.0, 0.0);
            out.push(s * i * norm);
            let mut t = CMatrix::from_element(n, n, zero);
            t[(a, b)] = -i;
            t[(b, a)] = i;
            out.push(t * i * norm);
        }
    }
    for l in 1..n {
        let f = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut h = CMatrix::from_element(n, n, zero);
        for m in 0..l {
            h[(m, m)] = Complex64::new(f, 0.0);
        }
        h[(l, l)] = Complex64::new(-(l as f64) * f, 0.0);
        out.push(h * i * norm);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(d: usize, i: usize) -> Vec<Complex64> {
        (0..d).map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect()
    }

    #[test]
    fn builtin_algebras_are_orthonormal() {
        for lie in [LieAlgebra::su2(), LieAlgebra::su(2).unwrap(), LieAlgebra::su(3).unwrap(), LieAlgebra::su(4).unwrap()] {
            let d = lie.dim();
            assert!((lie.gram() - DMatrix::<f64>::identity(d, d)).abs().max() < 1e-12, "dim {d}");
            assert!(lie.jacobi_violation() < 1e-12);
        }
        assert_eq!(LieAlgebra::su(3).unwrap().dim(), 8);
    }

    #[test]
    fn su2_bracket() {
        let lie = LieAlgebra::su2();
        let b = lie.bracket(&e(3, 0), &e(3, 1));
        assert!((b[2].re + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(lie.bracket(&e(3, 2), &e(3, 2)).iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn ad_matches_bracket_and_is_skew() {
        let lie = LieAlgebra::su(3).unwrap();
        let d = lie.dim();
        let x: Vec<Complex64> = (0..d).map(|i| Complex64::new(0.3 * i as f64 - 1.0, 0.0)).collect();
        let y: Vec<Complex64> = (0..d).map(|i| Complex64::new((i as f64).sin(), 0.0)).collect();
        let z: Vec<Complex64> = (0..d).map(|i| Complex64::new((i as f64).cos(), 0.0)).collect();
        let via_ad = lie.ad(&x) * nalgebra::DVector::from_vec(y.clone());
        let direct = lie.bracket(&x, &y);
        for k in 0..d {
            assert!((via_ad[k] - direct[k]).norm() < 1e-14);
        }
        let lhs = lie.inner(&lie.bracket(&x, &y), &z) + lie.inner(&y, &lie.bracket(&x, &z));
        assert!(lhs.norm() < 1e-13, "{lhs}");
        assert!(lie.ad(&x).trace().norm() < 1e-14);
    }

    #[test]
    fn rejects_invalid_constants() {
        let mut c = LieAlgebra::su2().structure_constants();
        c[0][1][2] += 0.1;
        assert!(matches!(LieAlgebra::new(3, &c), Err(Error::InvalidLieAlgebra(_))));
        let abelian = vec![vec![vec![0.0; 2]; 2]; 2];
        assert!(matches!(LieAlgebra::new(2, &abelian), Err(Error::InvalidLieAlgebra(_))));
        assert!(LieAlgebra::new(3, &c[..2]).is_err());
        let ok = LieAlgebra::su2().structure_constants();
        assert_eq!(LieAlgebra::new(3, &ok).unwrap(), LieAlgebra::su2());
    }
}
