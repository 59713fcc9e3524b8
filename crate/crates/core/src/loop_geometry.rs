//! Connections and curvature on the loop group `H^s(S¹, G)`.
//!
//! Loop-algebra elements are band-limited Fourier series with values in a
//! [`LieAlgebra`]. The two left-invariant connections
//!
//! * `θ^s(U) = ½(ad_U + Q^{−s} ad_U Q^s − Q^{−s} ad_{Q^s U})` (Levi-Civita),
//! * `θ̃^s(U) = Q^{−s} ad_U Q^s` (conjugation),
//!
//! are represented by their symbols on the trivial bundle with fiber the Lie
//! algebra, and curvature is `Ω(U,V) = [θU, θV] − θ([U,V])`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::degree::Degree;
use crate::error::{Error, Result};
use crate::fourier::MatrixLoop;
use crate::lie::LieAlgebra;
use crate::spectral::{conditional_trace, quantize, ConditionalTrace};
use crate::symbol::{commutator, compose, multiplication_symbol, weight_power_symbol, ClassicalSymbol, WeightSpec};
use crate::traces::wodzicki_residue;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A band-limited loop `U(x) = Σ_{|k| ≤ K} U_k e^{ikx}` in a Lie algebra,
/// with complex coordinates. Real loops satisfy `U_{−k} = conj(U_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopAlgebraElement {
    dim: usize,
    cutoff: usize,
    coeffs: Vec<Vec<Complex64>>,
}

impl LoopAlgebraElement {
    pub fn zeros(dim: usize, cutoff: usize) -> Self {
        LoopAlgebraElement { dim, cutoff, coeffs: vec![vec![ZERO; dim]; 2 * cutoff + 1] }
    }

    pub fn constant(x: Vec<Complex64>) -> Self {
        LoopAlgebraElement { dim: x.len(), cutoff: 0, coeffs: vec![x] }
    }

    /// Cutoff is the largest `|k|` supplied; repeated modes accumulate.
    pub fn from_modes<I: IntoIterator<Item = (i64, Vec<Complex64>)>>(dim: usize, modes: I) -> Result<Self> {
        let modes: Vec<_> = modes.into_iter().collect();
        let cutoff = modes.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        let mut out = Self::zeros(dim, cutoff);
        for (k, v) in modes {
            if v.len() != dim {
                return Err(Error::ShapeMismatch(format!("mode {k} has {} components, expected {dim}", v.len())));
            }
            for (o, x) in out.coeffs[(k + cutoff as i64) as usize].iter_mut().zip(v) {
                *o += x;
            }
        }
        Ok(out)
    }

    /// Random real loop: coordinates of mode `k` uniform in `[−scale, scale]`
    /// and damped by `decay^|k|`.
    pub fn random_real<R: Rng + ?Sized>(rng: &mut R, dim: usize, cutoff: usize, scale: f64, decay: f64) -> Self {
        let mut out = Self::zeros(dim, cutoff);
        let c = cutoff as i64;
        for a in 0..dim {
            out.coeffs[cutoff][a] = Complex64::new(rng.gen_range(-scale..scale), 0.0);
        }
        for k in 1..=c {
            let damp = decay.powi(k as i32);
            for a in 0..dim {
                let v = Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)) * damp;
                out.coeffs[(c + k) as usize][a] = v;
                out.coeffs[(c - k) as usize][a] = v.conj();
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode_cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn coeff(&self, k: i64) -> Option<&[Complex64]> {
        let i = k + self.cutoff as i64;
        (i >= 0 && (i as usize) < self.coeffs.len()).then(|| self.coeffs[i as usize].as_slice())
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, &[Complex64])> + '_ {
        let c = self.cutoff as i64;
        self.coeffs.iter().enumerate().map(move |(i, v)| (i as i64 - c, v.as_slice()))
    }

    /// Value at `x`.
    pub fn eval(&self, x: f64) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.dim];
        for (k, v) in self.modes() {
            let e = Complex64::from_polar(1.0, k as f64 * x);
            for (o, c) in out.iter_mut().zip(v) {
                *o += c * e;
            }
        }
        out
    }

    /// Largest `|U_{−k} − conj(U_k)|`.
    pub fn reality_defect(&self) -> f64 {
        let c = self.cutoff as i64;
        (-c..=c)
            .flat_map(|k| {
                let (a, b) = (self.coeff(k).unwrap(), self.coeff(-k).unwrap());
                a.iter().zip(b).map(|(x, y)| (x.conj() - y).norm()).collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.reality_defect() <= tol
    }

    pub fn map_modes<F: Fn(i64, &[Complex64]) -> Vec<Complex64>>(&self, f: F) -> Self {
        let c = self.cutoff as i64;
        LoopAlgebraElement {
            dim: self.dim,
            cutoff: self.cutoff,
            coeffs: self.coeffs.iter().enumerate().map(|(i, v)| f(i as i64 - c, v)).collect(),
        }
    }

    pub fn axpy(&self, s: Complex64, other: &LoopAlgebraElement) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::ShapeMismatch(format!("loop elements in dimensions {} and {}", self.dim, other.dim)));
        }
        let mut out = Self::zeros(self.dim, self.cutoff.max(other.cutoff));
        let c = out.cutoff as i64;
        for (k, v) in self.modes() {
            for (o, x) in out.coeffs[(k + c) as usize].iter_mut().zip(v) {
                *o += x;
            }
        }
        for (k, v) in other.modes() {
            for (o, x) in out.coeffs[(k + c) as usize].iter_mut().zip(v) {
                *o += s * x;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &LoopAlgebraElement) -> Result<Self> {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map_modes(|_, v| v.iter().map(|x| x * s).collect())
    }

    /// `Σ_k |U_k|²` in the coordinate norm.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn check_dim(lie: &LieAlgebra, u: &LoopAlgebraElement) -> Result<()> {
    if u.dim != lie.dim() {
        return Err(Error::ShapeMismatch(format!(
            "loop element has {} components, Lie algebra has dimension {}",
            u.dim,
            lie.dim()
        )));
    }
    Ok(())
}

/// Pointwise bracket `[U, V](x) = [U(x), V(x)]`, cutoff `K_U + K_V`.
pub fn pointwise_bracket(lie: &LieAlgebra, u: &LoopAlgebraElement, v: &LoopAlgebraElement) -> Result<LoopAlgebraElement> {
    check_dim(lie, u)?;
    check_dim(lie, v)?;
    let mut out = LoopAlgebraElement::zeros(lie.dim(), u.cutoff + v.cutoff);
    let shift = out.cutoff as i64;
    for (k, a) in u.modes() {
        for (l, b) in v.modes() {
            let target = &mut out.coeffs[(k + l + shift) as usize];
            for (t, x) in target.iter_mut().zip(lie.bracket(a, b)) {
                *t += x;
            }
        }
    }
    Ok(out)
}

/// The matrix loop `x ↦ ad_{U(x)}`.
pub fn ad_loop(lie: &LieAlgebra, u: &LoopAlgebraElement) -> Result<MatrixLoop> {
    check_dim(lie, u)?;
    MatrixLoop::from_modes(lie.dim(), u.modes().map(|(k, v)| (k, lie.ad(v))))
}

/// Symbol of the multiplication operator `ad_U`, fiber dimension `dim 𝔤`.
pub fn ad_symbol(lie: &LieAlgebra, u: &LoopAlgebraElement, depth: usize) -> Result<ClassicalSymbol> {
    Ok(multiplication_symbol(&ad_loop(lie, u)?, depth))
}

/// `Q^s U`: mode `k` scaled by `|k|^{2s}`, the zero mode left unchanged.
pub fn sobolev_apply(s: f64, u: &LoopAlgebraElement) -> LoopAlgebraElement {
    let w = WeightSpec::new(s);
    u.map_modes(|k, v| {
        let m = w.multiplier(k);
        v.iter().map(|x| x * m).collect()
    })
}

/// `2π Σ_k m_s(k) ⟨U_k, V_k⟩` with `m_s(k) = |k|^{2s}` (1 at `k = 0`) and
/// minus the Killing form on the coordinates.
pub fn h_s_inner(lie: &LieAlgebra, s: f64, u: &LoopAlgebraElement, v: &LoopAlgebraElement) -> Result<Complex64> {
    check_dim(lie, u)?;
    check_dim(lie, v)?;
    let w = WeightSpec::new(s);
    let mut acc = ZERO;
    for (k, a) in u.modes() {
        if let Some(b) = v.coeff(k) {
            acc += lie.inner(a, b) * w.multiplier(k);
        }
    }
    Ok(acc * 2.0 * PI)
}

/// `Q^{−s} ∘ ad_U ∘ Q^s`.
fn conjugated_ad(lie: &LieAlgebra, s: f64, u: &LoopAlgebraElement, depth: usize) -> Result<ClassicalSymbol> {
    let d = lie.dim();
    let ad = ad_symbol(lie, u, depth)?;
    let q = weight_power_symbol(WeightSpec::new(s), d, depth)?;
    let q_inv = weight_power_symbol(WeightSpec::new(-s), d, depth)?;
    compose(&q_inv, &compose(&ad, &q, depth)?, depth)
}

/// `Q^{−s} ∘ ad_{Q^s U}`, of order `−2s`.
fn sobolev_ad(lie: &LieAlgebra, s: f64, u: &LoopAlgebraElement, depth: usize) -> Result<ClassicalSymbol> {
    let ad = ad_symbol(lie, &sobolev_apply(s, u), depth)?;
    let q_inv = weight_power_symbol(WeightSpec::new(-s), lie.dim(), depth)?;
    compose(&q_inv, &ad, depth)
}

/// Symbol of `θ^s(U) = ½(ad_U + Q^{−s} ad_U Q^s − Q^{−s} ad_{Q^s U})`.
///
/// `s` must be a positive half-integer so that every term lives on the same
/// integer grid of degrees below 0.
pub fn theta_levi_civita(lie: &LieAlgebra, s: f64, u: &LoopAlgebraElement, depth: usize) -> Result<ClassicalSymbol> {
    if !(s > 0.0) || Degree::try_from_f64(s).is_err() {
        return Err(Error::InvalidArgument(format!("θ^s needs a positive half-integer s, got {s}")));
    }
    let ad = ad_symbol(lie, u, depth)?;
    let conj = conjugated_ad(lie, s, u, depth)?;
    let third = sobolev_ad(lie, s, u, depth)?;
    Ok(ad.add(&conj)?.sub(&third)?.scale(Complex64::new(0.5, 0.0)))
}

/// Symbol of `θ̃^s(U) = Q^{−s} ad_U Q^s`.
pub fn theta_conjugation(lie: &LieAlgebra, s: f64, u: &LoopAlgebraElement, depth: usize) -> Result<ClassicalSymbol> {
    if s < 0.0 {
        return Err(Error::InvalidArgument(format!("θ̃^s needs s ≥ 0, got {s}")));
    }
    Degree::try_from_f64(2.0 * s)?;
    conjugated_ad(lie, s, u, depth)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConnectionKind {
    LeviCivita,
    Conjugation,
}

/// A left-invariant connection on the loop group, evaluated symbolically to a
/// fixed depth.
#[derive(Clone, Debug)]
pub struct Connection<'a> {
    pub lie: &'a LieAlgebra,
    pub kind: ConnectionKind,
    pub s: f64,
    pub depth: usize,
}

impl<'a> Connection<'a> {
    pub fn new(lie: &'a LieAlgebra, kind: ConnectionKind, s: f64, depth: usize) -> Self {
        Connection { lie, kind, s, depth }
    }

    pub fn apply(&self, u: &LoopAlgebraElement) -> Result<ClassicalSymbol> {
        match self.kind {
            ConnectionKind::LeviCivita => theta_levi_civita(self.lie, self.s, u, self.depth),
            ConnectionKind::Conjugation => theta_conjugation(self.lie, self.s, u, self.depth),
        }
    }

    /// `Ω(U,V) = [θU, θV] − θ([U,V])`.
    pub fn curvature(&self, u: &LoopAlgebraElement, v: &LoopAlgebraElement) -> Result<ClassicalSymbol> {
        let tu = self.apply(u)?;
        let tv = self.apply(v)?;
        let tuv = self.apply(&pointwise_bracket(self.lie, u, v)?)?;
        commutator(&tu, &tv, self.depth)?.sub(&tuv)
    }
}

/// Free-function form of [`Connection::curvature`].
pub fn curvature(conn: &Connection<'_>, u: &LoopAlgebraElement, v: &LoopAlgebraElement) -> Result<ClassicalSymbol> {
    conn.curvature(u, v)
}

/// Value of the weighted first Chern form with the size of the curvature
/// component it is computed from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChernValue {
    pub value: Complex64,
    /// Norm of `σ₋₁(Ω)` before the fiber trace: the sum over both sheets of
    /// the Frobenius norms of its Fourier coefficients.
    pub scale: f64,
}

/// `(1/2π) ∫_{S*S¹} tr σ₋₁(Ω^{1/2}(U,V))` for the Levi-Civita curvature at
/// `s = 1/2`. The fiber trace is taken once.
pub fn weighted_first_chern(lie: &LieAlgebra, u: &LoopAlgebraElement, v: &LoopAlgebraElement, depth: usize) -> Result<ChernValue> {
    if depth < 1 {
        return Err(Error::InsufficientDepth { order: Degree::ZERO, depth, needed: Degree::from_int(-1) });
    }
    let omega = Connection::new(lie, ConnectionKind::LeviCivita, 0.5, depth).curvature(u, v)?;
    let value = wodzicki_residue(&omega)?;
    let scale = omega.component(Degree::from_int(-1))?.map_or(0.0, |c| c.norm());
    Ok(ChernValue { value, scale })
}

/// Operator trace of the quantized fiber trace of `Ω^{1/2}(U,V)` at mode
/// cutoff `modes`.
pub fn chern_conditional_trace(
    lie: &LieAlgebra,
    u: &LoopAlgebraElement,
    v: &LoopAlgebraElement,
    depth: usize,
    modes: usize,
) -> Result<ConditionalTrace> {
    let omega = Connection::new(lie, ConnectionKind::LeviCivita, 0.5, depth).curvature(u, v)?;
    conditional_trace(&quantize(&omega.fiber_trace()?, modes)?)
}

/// Relative tolerance for the antisymmetry precondition of [`ce_differential`].
pub const ANTISYMMETRY_TOL: f64 = 1e-9;

/// Chevalley–Eilenberg differential of a left-invariant 2-form:
/// `dβ(U,V,W) = −β([U,V],W) + β([U,W],V) − β([V,W],U)`.
///
/// `β` is checked for antisymmetry on the three argument pairs.
pub fn ce_differential<F>(lie: &LieAlgebra, beta: F, u: &LoopAlgebraElement, v: &LoopAlgebraElement, w: &LoopAlgebraElement) -> Result<Complex64>
where
    F: Fn(&LoopAlgebraElement, &LoopAlgebraElement) -> Result<Complex64>,
{
    for (a, b) in [(u, v), (u, w), (v, w)] {
        let (ab, ba) = (beta(a, b)?, beta(b, a)?);
        let defect = (ab + ba).norm();
        if defect > ANTISYMMETRY_TOL * ab.norm().max(ba.norm()).max(1.0) {
            return Err(Error::NotAntisymmetric(defect));
        }
    }
    let uv = pointwise_bracket(lie, u, v)?;
    let uw = pointwise_bracket(lie, u, w)?;
    let vw = pointwise_bracket(lie, v, w)?;
    Ok(-beta(&uv, w)? + beta(&uw, v)? - beta(&vw, u)?)
}

/// The residues that show `res_w θ^{1/2}(U) = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidueChain {
    /// `res_w θ^{1/2}(U)`.
    pub theta: Complex64,
    /// `res_w (Q^{−1/2} ad_U Q^{1/2})`.
    pub conjugated: Complex64,
    /// `res_w (Q^{−1/2} ad_{Q^{1/2} U})`.
    pub sobolev: Complex64,
    /// Distance of `σ₋₁(Q^{−1/2})` from a scalar multiple of the identity.
    pub scalar_defect: f64,
    /// `max |tr ad_{U_k}|` over modes.
    pub ad_trace: f64,
}

pub fn residue_chain(lie: &LieAlgebra, u: &LoopAlgebraElement, depth: usize) -> Result<ResidueChain> {
    let theta = wodzicki_residue(&theta_levi_civita(lie, 0.5, u, depth)?)?;
    let conjugated = wodzicki_residue(&conjugated_ad(lie, 0.5, u, depth)?)?;
    let sobolev = wodzicki_residue(&sobolev_ad(lie, 0.5, u, depth)?)?;
    let q_inv = weight_power_symbol(WeightSpec::new(-0.5), lie.dim(), depth)?;
    let lead = q_inv.leading();
    let mut scalar_defect = 0.0f64;
    for sheet in crate::symbol::Sheet::BOTH {
        for (_, m) in lead.sheet(sheet).modes() {
            let mean = m.trace() / m.nrows() as f64;
            let dev = m - crate::fourier::CMatrix::identity(m.nrows(), m.ncols()) * mean;
            scalar_defect = scalar_defect.max(dev.norm());
        }
    }
    let ad_trace = u.modes().map(|(_, v)| lie.ad(v).trace().norm()).fold(0.0, f64::max);
    Ok(ResidueChain { theta, conjugated, sobolev, scalar_defect, ad_trace })
}
