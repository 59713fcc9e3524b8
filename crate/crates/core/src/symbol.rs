//! Classical pseudodifferential symbols on the circle with matrix coefficients.
//!
//! A classical symbol of order `m` is a graded list of homogeneous components
//! `σ_{m−j}(x, ξ)`, `j = 0..=J`. On the circle the cosphere bundle is two copies
//! of `S¹` (the sheets `ξ > 0` and `ξ < 0`), so each component is a pair of
//! periodic matrix functions with
//!
//! ```text
//! σ_{m−j}(x, ξ) = sheet_{sign ξ}(x) · |ξ|^{m−j},   ξ ≠ 0.
//! ```
//!
//! Composition uses the left-quantization expansion
//! `σ_{A∘B} ~ Σ_α (1/α!) ∂_ξ^α σ_A · D_x^α σ_B` with `D_x = −i∂_x`.

use num_complex::Complex64;

use crate::degree::{falling_factorial, Degree};
use crate::error::{Error, Result};
use crate::fourier::{CMatrix, MatrixLoop, ScalarLoop};

/// Sheet of the cosphere bundle of the circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sheet {
    Plus,
    Minus,
}

impl Sheet {
    pub const BOTH: [Sheet; 2] = [Sheet::Plus, Sheet::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Sheet::Plus => 1.0,
            Sheet::Minus => -1.0,
        }
    }

    pub fn of(xi: i64) -> Option<Sheet> {
        match xi.signum() {
            1 => Some(Sheet::Plus),
            -1 => Some(Sheet::Minus),
            _ => None,
        }
    }
}

/// One homogeneous piece `sheet_±(x)·|ξ|^degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousComponent {
    degree: Degree,
    plus: MatrixLoop,
    minus: MatrixLoop,
}

impl HomogeneousComponent {
    pub fn new(degree: Degree, plus: MatrixLoop, minus: MatrixLoop) -> Result<Self> {
        if plus.dim() != minus.dim() {
            return Err(Error::FiberDimMismatch(plus.dim(), minus.dim()));
        }
        let band = plus.band().max(minus.band());
        Ok(HomogeneousComponent { degree, plus: plus.widened(band), minus: minus.widened(band) })
    }

    pub fn zero(degree: Degree, dim: usize, band: usize) -> Self {
        HomogeneousComponent {
            degree,
            plus: MatrixLoop::zeros(dim, band),
            minus: MatrixLoop::zeros(dim, band),
        }
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn fiber_dim(&self) -> usize {
        self.plus.dim()
    }

    pub fn band(&self) -> usize {
        self.plus.band()
    }

    pub fn sheet(&self, sheet: Sheet) -> &MatrixLoop {
        match sheet {
            Sheet::Plus => &self.plus,
            Sheet::Minus => &self.minus,
        }
    }

    /// Value at `(x, ξ)`, `ξ ≠ 0`.
    pub fn eval(&self, x: f64, xi: f64) -> CMatrix {
        let sheet = if xi > 0.0 { Sheet::Plus } else { Sheet::Minus };
        assert!(xi != 0.0, "homogeneous components are evaluated off the zero section");
        self.sheet(sheet).eval(x) * Complex64::new(xi.abs().powf(self.degree.value()), 0.0)
    }

    /// Fiber trace on both sheets.
    pub fn trace(&self) -> (ScalarLoop, ScalarLoop) {
        (self.plus.trace(), self.minus.trace())
    }

    pub fn norm(&self) -> f64 {
        self.plus.norm() + self.minus.norm()
    }

    /// `∂_ξ^α` restricted to the sheets: `ε^α δ(δ−1)⋯(δ−α+1)·sheet_ε`, degree `δ−α`.
    pub fn xi_derivative(&self, alpha: usize) -> Self {
        let ff = falling_factorial(self.degree.value(), alpha);
        let sign_minus = if alpha % 2 == 0 { 1.0 } else { -1.0 };
        HomogeneousComponent {
            degree: self.degree.minus_steps(alpha),
            plus: self.plus.scale(Complex64::new(ff, 0.0)),
            minus: self.minus.scale(Complex64::new(ff * sign_minus, 0.0)),
        }
    }

    fn map_sheets<F: Fn(&MatrixLoop) -> MatrixLoop>(&self, f: F) -> Self {
        HomogeneousComponent { degree: self.degree, plus: f(&self.plus), minus: f(&self.minus) }
    }

    fn axpy(&self, s: Complex64, other: &HomogeneousComponent) -> Result<Self> {
        Ok(HomogeneousComponent {
            degree: self.degree,
            plus: self.plus.axpy(s, &other.plus)?,
            minus: self.minus.axpy(s, &other.minus)?,
        })
    }
}

/// A classical symbol `σ ~ Σ_{j=0}^{J} σ_{m−j}` with all levels materialized.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalSymbol {
    order: Degree,
    fiber_dim: usize,
    components: Vec<HomogeneousComponent>,
}

impl ClassicalSymbol {
    /// Assembles a symbol from `(plus, minus)` sheet pairs for levels `0..=J`.
    pub fn from_levels<I>(order: Degree, levels: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MatrixLoop, MatrixLoop)>,
    {
        let comps = levels
            .into_iter()
            .enumerate()
            .map(|(j, (p, m))| HomogeneousComponent::new(order.minus_steps(j), p, m))
            .collect::<Result<Vec<_>>>()?;
        Self::from_components(order, comps)
    }

    pub fn from_components(order: Degree, components: Vec<HomogeneousComponent>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::InvalidArgument("a symbol needs at least one component".into()));
        };
        let dim = first.fiber_dim();
        let band = components.iter().map(|c| c.band()).max().unwrap_or(0);
        let mut out = Vec::with_capacity(components.len());
        for (j, c) in components.into_iter().enumerate() {
            if c.fiber_dim() != dim {
                return Err(Error::FiberDimMismatch(dim, c.fiber_dim()));
            }
            if c.degree != order.minus_steps(j) {
                return Err(Error::InvalidArgument(format!(
                    "component {j} has degree {}, expected {}",
                    c.degree,
                    order.minus_steps(j)
                )));
            }
            out.push(c.map_sheets(|s| s.widened(band)));
        }
        Ok(ClassicalSymbol { order, fiber_dim: dim, components: out })
    }

    pub fn zero(order: Degree, dim: usize, depth: usize) -> Self {
        ClassicalSymbol {
            order,
            fiber_dim: dim,
            components: (0..=depth).map(|j| HomogeneousComponent::zero(order.minus_steps(j), dim, 0)).collect(),
        }
    }

    pub fn identity(dim: usize, depth: usize) -> Self {
        multiplication_symbol(&MatrixLoop::identity(dim), depth)
    }

    pub fn order(&self) -> Degree {
        self.order
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    /// Number of retained sub-leading levels `J`.
    pub fn depth(&self) -> usize {
        self.components.len() - 1
    }

    pub fn band(&self) -> usize {
        self.components[0].band()
    }

    pub fn components(&self) -> &[HomogeneousComponent] {
        &self.components
    }

    pub fn level(&self, j: usize) -> Option<&HomogeneousComponent> {
        self.components.get(j)
    }

    pub fn leading(&self) -> &HomogeneousComponent {
        &self.components[0]
    }

    /// The lowest degree represented.
    pub fn lowest_degree(&self) -> Degree {
        self.order.minus_steps(self.depth())
    }

    /// The component of the given degree. Degrees above the order are zero
    /// (returns `Ok(None)`); degrees below the retained depth are an error.
    pub fn component(&self, degree: Degree) -> Result<Option<&HomogeneousComponent>> {
        if degree > self.order {
            return Ok(None);
        }
        match self.order.steps_above(degree) {
            None => Ok(None),
            Some(j) if j <= self.depth() => Ok(Some(&self.components[j])),
            Some(_) => Err(Error::InsufficientDepth { order: self.order, depth: self.depth(), needed: degree }),
        }
    }

    /// Full truncated symbol at `(x, ξ)`.
    pub fn eval(&self, x: f64, xi: f64) -> CMatrix {
        self.components
            .iter()
            .fold(CMatrix::zeros(self.fiber_dim, self.fiber_dim), |acc, c| acc + c.eval(x, xi))
    }

    /// Keeps levels `0..=depth`.
    pub fn truncated(&self, depth: usize) -> Result<Self> {
        if depth > self.depth() {
            return Err(Error::DepthExceeded { requested: depth, available: self.depth() });
        }
        Ok(ClassicalSymbol {
            order: self.order,
            fiber_dim: self.fiber_dim,
            components: self.components[..=depth].to_vec(),
        })
    }

    /// Clamps the Fourier band of every component; returns the discarded
    /// coefficient norm so the truncation is recorded.
    pub fn band_limited(&self, band: usize) -> (Self, f64) {
        let mut lost = 0.0;
        let components = self
            .components
            .iter()
            .map(|c| {
                let (p, lp) = c.plus.truncated(band);
                let (m, lm) = c.minus.truncated(band);
                lost += lp + lm;
                HomogeneousComponent { degree: c.degree, plus: p, minus: m }
            })
            .collect();
        (ClassicalSymbol { order: self.order, fiber_dim: self.fiber_dim, components }, lost)
    }

    /// Re-expresses the symbol with a higher nominal order, prepending zero
    /// levels. `order` must exceed the current order by an integer.
    pub fn raised_to(&self, order: Degree) -> Result<Self> {
        let shift = order
            .steps_above(self.order)
            .ok_or(Error::IncompatibleOrders(order, self.order))?;
        let band = self.band();
        let mut comps: Vec<_> = (0..shift)
            .map(|j| HomogeneousComponent::zero(order.minus_steps(j), self.fiber_dim, band))
            .collect();
        comps.extend(self.components.iter().cloned());
        Ok(ClassicalSymbol { order, fiber_dim: self.fiber_dim, components: comps })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ClassicalSymbol {
            order: self.order,
            fiber_dim: self.fiber_dim,
            components: self.components.iter().map(|c| c.map_sheets(|m| m.scale(s))).collect(),
        }
    }

    /// Graded sum; the result has the larger order and is reliable down to the
    /// higher of the two lowest retained degrees.
    pub fn add(&self, other: &ClassicalSymbol) -> Result<Self> {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &ClassicalSymbol) -> Result<Self> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: Complex64, other: &ClassicalSymbol) -> Result<Self> {
        if self.fiber_dim != other.fiber_dim {
            return Err(Error::FiberDimMismatch(self.fiber_dim, other.fiber_dim));
        }
        let order = self.order.max(other.order);
        let a = self.raised_to(order)?;
        let b = other.raised_to(order)?;
        let depth = a.depth().min(b.depth());
        let components = a.components[..=depth]
            .iter()
            .zip(&b.components[..=depth])
            .map(|(x, y)| x.axpy(s, y))
            .collect::<Result<Vec<_>>>()?;
        ClassicalSymbol::from_components(order, components)
    }

    /// Applies a linear map to every matrix coefficient, e.g. a fiber trace.
    pub fn map_fiber<F: Fn(&CMatrix) -> CMatrix>(&self, f: F) -> Result<Self> {
        let components = self.components.iter().map(|c| c.map_sheets(|m| m.map_coeffs(&f))).collect();
        ClassicalSymbol::from_components(self.order, components)
    }

    /// Scalar symbol `tr σ` (fiber dimension 1).
    pub fn fiber_trace(&self) -> Result<Self> {
        self.map_fiber(|m| CMatrix::from_element(1, 1, m.trace()))
    }

    /// `Σ_j ‖σ_{m−j}‖` over both sheets.
    pub fn norm(&self) -> f64 {
        self.components.iter().map(|c| c.norm()).sum()
    }

    /// Largest per-level coefficient norm of `self − other`, comparing the
    /// common levels (orders must agree).
    pub fn max_level_distance(&self, other: &ClassicalSymbol) -> Result<f64> {
        let diff = self.sub(other)?;
        Ok(diff.components.iter().map(|c| c.norm()).fold(0.0, f64::max))
    }
}

/// Symbol of the multiplication operator by `u`: order 0, `σ₀ = u` on both sheets.
pub fn multiplication_symbol(u: &MatrixLoop, depth: usize) -> ClassicalSymbol {
    let band = u.band();
    let dim = u.dim();
    let mut components = vec![HomogeneousComponent {
        degree: Degree::ZERO,
        plus: u.clone(),
        minus: u.clone(),
    }];
    components.extend((1..=depth).map(|j| HomogeneousComponent::zero(Degree::from_int(-(j as i32)), dim, band)));
    ClassicalSymbol { order: Degree::ZERO, fiber_dim: dim, components }
}

/// Multiplier power `(Q₀ + P)^s` with `Q₀ = Δ ⊗ Id` on the circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightSpec {
    pub sobolev_exponent: f64,
    /// Eigenvalue assigned to the zero Fourier mode before raising to `s`.
    pub kernel_rule: f64,
}

impl WeightSpec {
    pub fn new(s: f64) -> Self {
        WeightSpec { sobolev_exponent: s, kernel_rule: 1.0 }
    }

    /// Operator order `2s`.
    pub fn base_order(&self) -> f64 {
        2.0 * self.sobolev_exponent
    }

    /// Fourier multiplier at mode `k`.
    pub fn multiplier(&self, k: i64) -> f64 {
        if k == 0 {
            self.kernel_rule.powf(self.sobolev_exponent)
        } else {
            (k as f64).abs().powf(self.base_order())
        }
    }
}

/// The x-independent symbol `|ξ|^{2s}·Id` of a weight power. `2s` must be a
/// multiple of 1/2.
pub fn weight_power_symbol(spec: WeightSpec, dim: usize, depth: usize) -> Result<ClassicalSymbol> {
    let order = Degree::try_from_f64(spec.base_order())?;
    let mut components = vec![HomogeneousComponent {
        degree: order,
        plus: MatrixLoop::identity(dim),
        minus: MatrixLoop::identity(dim),
    }];
    components.extend((1..=depth).map(|j| HomogeneousComponent::zero(order.minus_steps(j), dim, 0)));
    Ok(ClassicalSymbol { order, fiber_dim: dim, components })
}

/// Asymptotic composition truncated at `depth`.
///
/// Level `j` of the product collects `(1/α!) ∂_ξ^α σ_{A,j_A} · D_x^α σ_{B,j_B}`
/// over `α + j_A + j_B = j`.
pub fn compose(a: &ClassicalSymbol, b: &ClassicalSymbol, depth: usize) -> Result<ClassicalSymbol> {
    if a.fiber_dim != b.fiber_dim {
        return Err(Error::FiberDimMismatch(a.fiber_dim, b.fiber_dim));
    }
    let available = a.depth().min(b.depth());
    if depth > available {
        return Err(Error::DepthExceeded { requested: depth, available });
    }
    let order = a.order + b.order;
    let dim = a.fiber_dim;
    let band = a.band() + b.band();

    // D_x^α of B's levels, shared across j.
    let dx: Vec<Vec<(MatrixLoop, MatrixLoop)>> = (0..=depth)
        .map(|alpha| {
            b.components[..=depth - alpha]
                .iter()
                .map(|c| (c.plus.dx_power(alpha), c.minus.dx_power(alpha)))
                .collect()
        })
        .collect();

    let mut components = Vec::with_capacity(depth + 1);
    for j in 0..=depth {
        let mut plus = MatrixLoop::zeros(dim, band);
        let mut minus = MatrixLoop::zeros(dim, band);
        for ja in 0..=j {
            let ca = &a.components[ja];
            for jb in 0..=(j - ja) {
                let alpha = j - ja - jb;
                let coeff = falling_factorial(ca.degree.value(), alpha) / factorial(alpha);
                if coeff == 0.0 {
                    continue;
                }
                let (db_plus, db_minus) = &dx[alpha][jb];
                let sign = if alpha % 2 == 0 { 1.0 } else { -1.0 };
                plus = plus.axpy(Complex64::new(coeff, 0.0), &ca.plus.mul(db_plus)?)?;
                minus = minus.axpy(Complex64::new(coeff * sign, 0.0), &ca.minus.mul(db_minus)?)?;
            }
        }
        components.push(HomogeneousComponent { degree: order.minus_steps(j), plus, minus });
    }
    Ok(ClassicalSymbol { order, fiber_dim: dim, components })
}

/// `compose(A,B) − compose(B,A)`.
pub fn commutator(a: &ClassicalSymbol, b: &ClassicalSymbol, depth: usize) -> Result<ClassicalSymbol> {
    compose(a, b, depth)?.sub(&compose(b, a, depth)?)
}

/// `A∘A∘⋯∘A` (`k` factors), folded from the left.
pub fn compose_power(a: &ClassicalSymbol, k: usize, depth: usize) -> Result<ClassicalSymbol> {
    if k == 0 {
        return Err(Error::InvalidArgument("compose_power needs k ≥ 1".into()));
    }
    let mut acc = a.truncated(depth)?;
    for _ in 1..k {
        acc = compose(&acc, a, depth)?;
    }
    Ok(acc)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}
