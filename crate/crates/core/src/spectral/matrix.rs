use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::CMatrix;
use crate::symbol::{ClassicalSymbol, Sheet};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    /// Blocks for row mode `r` and offset `l = r − c`, `|l| ≤ width`, laid out
    /// as `[(r + N)(2w + 1) + (l + w)] · d² + a·d + b`.
    Banded { width: usize, blocks: Vec<Complex64> },
    Dense(CMatrix),
}

/// An operator truncated to Fourier modes `|k| ≤ N` on `C^d`-valued functions.
///
/// Rows and columns are indexed by `(mode, fiber index)`, mode-major. Operators
/// coming from band-limited symbols are stored banded in the mode index.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierMatrix {
    modes: usize,
    dim: usize,
    repr: Repr,
}

impl FourierMatrix {
    pub fn zeros(modes: usize, dim: usize, width: usize) -> Self {
        let width = width.min(2 * modes);
        FourierMatrix {
            modes,
            dim,
            repr: Repr::Banded { width, blocks: vec![ZERO; (2 * modes + 1) * (2 * width + 1) * dim * dim] },
        }
    }

    pub fn identity(modes: usize, dim: usize) -> Self {
        Self::from_diagonal(modes, dim, vec![ONE; (2 * modes + 1) * dim]).expect("sizes agree")
    }

    pub fn from_diagonal(modes: usize, dim: usize, values: Vec<Complex64>) -> Result<Self> {
        let n = (2 * modes + 1) * dim;
        if values.len() != n {
            return Err(Error::ShapeMismatch(format!("{} diagonal values for size {n}", values.len())));
        }
        let mut m = Self::zeros(modes, dim, 0);
        for (i, v) in values.into_iter().enumerate() {
            let (k, a) = ((i / dim) as i64 - modes as i64, i % dim);
            *m.banded_entry_mut(k, 0, a, a) = v;
        }
        Ok(m)
    }

    pub fn from_dense(modes: usize, dim: usize, m: CMatrix) -> Result<Self> {
        let n = (2 * modes + 1) * dim;
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::ShapeMismatch(format!("dense {}x{} for size {n}", m.nrows(), m.ncols())));
        }
        Ok(FourierMatrix { modes, dim, repr: Repr::Dense(m) })
    }

    pub fn mode_cutoff(&self) -> usize {
        self.modes
    }

    pub fn fiber_dim(&self) -> usize {
        self.dim
    }

    /// Matrix size `(2N + 1)·d`.
    pub fn size(&self) -> usize {
        (2 * self.modes + 1) * self.dim
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.repr, Repr::Dense(_))
    }

    /// Mode bandwidth; `2N` for dense storage.
    pub fn bandwidth(&self) -> usize {
        match &self.repr {
            Repr::Banded { width, .. } => *width,
            Repr::Dense(_) => 2 * self.modes,
        }
    }

    pub fn index(&self, mode: i64, a: usize) -> usize {
        (mode + self.modes as i64) as usize * self.dim + a
    }

    fn in_range(&self, mode: i64) -> bool {
        mode.unsigned_abs() as usize <= self.modes
    }

    fn banded_offset(&self, row: i64, offset: i64, a: usize, b: usize) -> usize {
        let Repr::Banded { width, .. } = &self.repr else { unreachable!() };
        let w = *width as i64;
        (((row + self.modes as i64) * (2 * w + 1) + offset + w) as usize) * self.dim * self.dim + a * self.dim + b
    }

    fn banded_entry_mut(&mut self, row: i64, offset: i64, a: usize, b: usize) -> &mut Complex64 {
        let idx = self.banded_offset(row, offset, a, b);
        match &mut self.repr {
            Repr::Banded { blocks, .. } => &mut blocks[idx],
            Repr::Dense(_) => unreachable!(),
        }
    }

    /// Entry at `(row mode, fiber a; column mode, fiber b)`.
    pub fn entry(&self, row: i64, a: usize, col: i64, b: usize) -> Complex64 {
        if !self.in_range(row) || !self.in_range(col) {
            return ZERO;
        }
        match &self.repr {
            Repr::Dense(m) => m[(self.index(row, a), self.index(col, b))],
            Repr::Banded { width, blocks } => {
                let off = row - col;
                if off.unsigned_abs() as usize > *width {
                    ZERO
                } else {
                    blocks[self.banded_offset(row, off, a, b)]
                }
            }
        }
    }

    /// The `d×d` block `(row mode, column mode)`.
    pub fn block(&self, row: i64, col: i64) -> CMatrix {
        CMatrix::from_fn(self.dim, self.dim, |a, b| self.entry(row, a, col, b))
    }

    pub fn to_dense(&self) -> CMatrix {
        match &self.repr {
            Repr::Dense(m) => m.clone(),
            Repr::Banded { width, .. } => {
                let n = self.size();
                let mut out = CMatrix::zeros(n, n);
                let (nn, w) = (self.modes as i64, *width as i64);
                for r in -nn..=nn {
                    for c in (r - w).max(-nn)..=(r + w).min(nn) {
                        for a in 0..self.dim {
                            for b in 0..self.dim {
                                out[(self.index(r, a), self.index(c, b))] = self.entry(r, a, c, b);
                            }
                        }
                    }
                }
                out
            }
        }
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        let nn = self.modes as i64;
        (-nn..=nn)
            .flat_map(|k| (0..self.dim).map(move |a| (k, a)))
            .map(|(k, a)| self.entry(k, a, k, a))
            .collect()
    }

    /// Fiber trace of the diagonal block at mode `k`.
    pub fn diagonal_block_trace(&self, k: i64) -> Complex64 {
        (0..self.dim).map(|a| self.entry(k, a, k, a)).sum()
    }

    pub fn trace(&self) -> Complex64 {
        self.diagonal().into_iter().sum()
    }

    pub fn is_diagonal(&self) -> bool {
        match &self.repr {
            Repr::Banded { width, .. } if *width == 0 && self.dim == 1 => true,
            _ => {
                let nn = self.modes as i64;
                let w = self.bandwidth() as i64;
                (-nn..=nn).all(|r| {
                    ((r - w).max(-nn)..=(r + w).min(nn)).all(|c| {
                        (0..self.dim).all(|a| (0..self.dim).all(|b| (r == c && a == b) || self.entry(r, a, c, b) == ZERO))
                    })
                })
            }
        }
    }

    fn check_compatible(&self, other: &FourierMatrix) -> Result<()> {
        if self.modes != other.modes || self.dim != other.dim {
            return Err(Error::ShapeMismatch(format!(
                "N={}, d={} vs N={}, d={}",
                self.modes, self.dim, other.modes, other.dim
            )));
        }
        Ok(())
    }

    /// Matrix product, staying banded when both factors are banded.
    pub fn mul(&self, other: &FourierMatrix) -> Result<FourierMatrix> {
        self.check_compatible(other)?;
        match (&self.repr, &other.repr) {
            (Repr::Banded { width: w1, .. }, Repr::Banded { width: w2, .. }) => {
                let (w1, w2) = (*w1 as i64, *w2 as i64);
                let nn = self.modes as i64;
                let d = self.dim;
                let mut out = FourierMatrix::zeros(self.modes, d, (w1 + w2) as usize);
                let wo = out.bandwidth() as i64;
                let rows: Vec<(i64, Vec<Complex64>)> = (-nn..=nn)
                    .into_par_iter()
                    .map(|r| {
                        let mut row = vec![ZERO; (2 * wo as usize + 1) * d * d];
                        for l1 in -w1..=w1 {
                            let mid = r - l1;
                            if mid.abs() > nn {
                                continue;
                            }
                            let a_blk = self.block(r, mid);
                            for l2 in -w2..=w2 {
                                let col = mid - l2;
                                if col.abs() > nn || (l1 + l2).abs() > wo {
                                    continue;
                                }
                                let prod = &a_blk * other.block(mid, col);
                                let base = ((l1 + l2 + wo) as usize) * d * d;
                                for a in 0..d {
                                    for b in 0..d {
                                        row[base + a * d + b] += prod[(a, b)];
                                    }
                                }
                            }
                        }
                        (r, row)
                    })
                    .collect();
                if let Repr::Banded { blocks, .. } = &mut out.repr {
                    let stride = (2 * wo as usize + 1) * d * d;
                    for (r, row) in rows {
                        let start = (r + nn) as usize * stride;
                        blocks[start..start + stride].copy_from_slice(&row);
                    }
                }
                Ok(out)
            }
            _ => FourierMatrix::from_dense(self.modes, self.dim, self.to_dense() * other.to_dense()),
        }
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: Complex64, other: &FourierMatrix) -> Result<FourierMatrix> {
        self.check_compatible(other)?;
        match (&self.repr, &other.repr) {
            (Repr::Banded { width: w1, .. }, Repr::Banded { width: w2, .. }) => {
                let w = (*w1).max(*w2) as i64;
                let nn = self.modes as i64;
                let mut out = FourierMatrix::zeros(self.modes, self.dim, w as usize);
                for r in -nn..=nn {
                    for l in -w..=w {
                        let c = r - l;
                        if c.abs() > nn {
                            continue;
                        }
                        for a in 0..self.dim {
                            for b in 0..self.dim {
                                *out.banded_entry_mut(r, l, a, b) =
                                    self.entry(r, a, c, b) + s * other.entry(r, a, c, b);
                            }
                        }
                    }
                }
                Ok(out)
            }
            _ => FourierMatrix::from_dense(self.modes, self.dim, self.to_dense() + other.to_dense() * s),
        }
    }

    pub fn sub(&self, other: &FourierMatrix) -> Result<FourierMatrix> {
        self.axpy(-ONE, other)
    }

    pub fn scale(&self, s: Complex64) -> FourierMatrix {
        let repr = match &self.repr {
            Repr::Banded { width, blocks } => {
                Repr::Banded { width: *width, blocks: blocks.iter().map(|z| z * s).collect() }
            }
            Repr::Dense(m) => Repr::Dense(m * s),
        };
        FourierMatrix { modes: self.modes, dim: self.dim, repr }
    }

    /// `g⁻¹ · self · g` as a dense matrix.
    pub fn conjugated(&self, g: &CMatrix, g_inv: &CMatrix) -> Result<FourierMatrix> {
        let n = self.size();
        if g.nrows() != n || g.ncols() != n || g_inv.nrows() != n || g_inv.ncols() != n {
            return Err(Error::ShapeMismatch(format!("conjugating matrix must be {n}x{n}")));
        }
        FourierMatrix::from_dense(self.modes, self.dim, g_inv * self.to_dense() * g)
    }

    /// Dense submatrix on the modes selected by `keep` (rows and columns).
    pub fn restricted<F: Fn(i64) -> bool>(&self, keep: F) -> CMatrix {
        let nn = self.modes as i64;
        let idx: Vec<(i64, usize)> = (-nn..=nn)
            .filter(|&k| keep(k))
            .flat_map(|k| (0..self.dim).map(move |a| (k, a)))
            .collect();
        DMatrix::from_fn(idx.len(), idx.len(), |i, j| {
            let (r, a) = idx[i];
            let (c, b) = idx[j];
            self.entry(r, a, c, b)
        })
    }

    /// Spectral norm of the submatrix on the modes selected by `keep`.
    pub fn operator_norm<F: Fn(i64) -> bool>(&self, keep: F) -> f64 {
        let m = self.restricted(keep);
        if m.is_empty() {
            return 0.0;
        }
        m.singular_values().max()
    }
}

/// Left quantization of a symbol at mode cutoff `N`.
///
/// Block `(k', k)` is the `(k' − k)`-th Fourier coefficient of
/// `ψ(k)·Σ_j sheet_{sign k, j}(x)·|k|^{m−j}`. The cutoff `ψ` vanishes at
/// `ξ = 0` and equals 1 for `|ξ| ≥ 1`; on the integer lattice every such
/// cutoff is the indicator of `k ≠ 0`, so the zero-mode column is empty.
pub fn quantize(symbol: &ClassicalSymbol, modes: usize) -> Result<FourierMatrix> {
    let band = symbol.band();
    if modes < band {
        return Err(Error::CutoffTooSmall { cutoff: modes, band });
    }
    let d = symbol.fiber_dim();
    let mut out = FourierMatrix::zeros(modes, d, band);
    let nn = modes as i64;
    let b = band as i64;
    for k in -nn..=nn {
        let Some(sheet) = Sheet::of(k) else { continue };
        let ak = (k as f64).abs();
        for comp in symbol.components() {
            let scale = Complex64::new(ak.powf(comp.degree().value()), 0.0);
            let s = comp.sheet(sheet);
            for l in -b..=b {
                let row = k + l;
                if row.abs() > nn {
                    continue;
                }
                let Some(coef) = s.coeff(l) else { continue };
                for a in 0..d {
                    for bb in 0..d {
                        *out.banded_entry_mut(row, l, a, bb) += coef[(a, bb)] * scale;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Diagonal realization of `(Q₀ + P)^s`: `|k|^{2s}` for `k ≠ 0` and
/// `kernel_rule^s` at `k = 0`.
pub fn weight_matrix(s: f64, modes: usize, dim: usize, kernel_rule: f64) -> FourierMatrix {
    let nn = modes as i64;
    let values = (-nn..=nn)
        .flat_map(|k| {
            let v = if k == 0 { kernel_rule.powf(s) } else { (k as f64).abs().powf(2.0 * s) };
            std::iter::repeat(Complex64::new(v, 0.0)).take(dim)
        })
        .collect();
    FourierMatrix::from_diagonal(modes, dim, values).expect("sizes agree")
}
