//! Trace functionals on classical symbols.
//!
//! * [`wodzicki_residue`]: `(1/2π) ∫_{S*S¹} tr σ_{−1}`.
//! * [`symbol_trace`]: a distribution on the cosphere bundle applied to
//!   `tr σ₀`, a trace on symbols of order ≤ 0.
//! * [`component_trace`]: the same for `tr σ_r` on symbols of order ≤ p < 0,
//!   `2p ≤ r ≤ p`.
//! * [`predicted_a0`], [`predicted_b0`]: closed-form leading and logarithmic
//!   coefficients of `Tr(A e^{−εQ})` as `ε → 0`.
//!
//! All circle integrals are exact zero-mode extractions.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::degree::Degree;
use crate::error::{Error, Result};
use crate::fourier::ScalarLoop;
use crate::symbol::{ClassicalSymbol, HomogeneousComponent, Sheet};

/// A scalar function on the two-sheeted cosphere bundle of the circle.
#[derive(Clone, Debug, PartialEq)]
pub struct CosphereFunction {
    pub plus: ScalarLoop,
    pub minus: ScalarLoop,
}

impl CosphereFunction {
    pub fn new(plus: ScalarLoop, minus: ScalarLoop) -> Self {
        CosphereFunction { plus, minus }
    }

    pub fn constant(c: f64) -> Self {
        let s = ScalarLoop::constant(Complex64::new(c, 0.0));
        CosphereFunction { plus: s.clone(), minus: s }
    }

    /// `(x, sheet) ↦ tr c(x, sheet)` for a homogeneous component.
    pub fn trace_of(component: &HomogeneousComponent) -> Self {
        let (plus, minus) = component.trace();
        CosphereFunction { plus, minus }
    }

    pub fn sheet(&self, sheet: Sheet) -> &ScalarLoop {
        match sheet {
            Sheet::Plus => &self.plus,
            Sheet::Minus => &self.minus,
        }
    }

    /// `∂_θ` on both sheets.
    pub fn derivative(&self) -> Self {
        CosphereFunction { plus: self.plus.derivative(), minus: self.minus.derivative() }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }
}

/// The finite vocabulary of distributions used by the trace constructions.
#[derive(Clone, Debug, PartialEq)]
pub enum DistributionKind {
    /// `φ ↦ (1/2π)∫ φ(θ, +) dθ`.
    UniformPlus,
    /// `φ ↦ (1/2π)∫ φ(θ, −) dθ`.
    UniformMinus,
    /// Sum of the two uniform functionals.
    UniformBoth,
    /// Point evaluation `φ(x₀, sheet)`.
    Delta { x0: f64, sheet: Sheet },
    /// Fourier coefficient `(1/2π)∫ φ(θ, sheet) e^{−ikθ} dθ`.
    Mode { k: i64, sheet: Sheet },
    /// Distributional derivative: `(∂f)(φ) = −f(∂_θ φ)`.
    Derivative(Box<CosphereDistribution>),
}

/// A linear functional on smooth functions on the cosphere bundle of `S¹`.
#[derive(Clone, Debug, PartialEq)]
pub struct CosphereDistribution {
    pub kind: DistributionKind,
    pub normalization: Complex64,
}

impl CosphereDistribution {
    pub fn new(kind: DistributionKind) -> Self {
        CosphereDistribution { kind, normalization: Complex64::new(1.0, 0.0) }
    }

    pub fn uniform_plus() -> Self {
        Self::new(DistributionKind::UniformPlus)
    }

    pub fn uniform_minus() -> Self {
        Self::new(DistributionKind::UniformMinus)
    }

    pub fn uniform_both() -> Self {
        Self::new(DistributionKind::UniformBoth)
    }

    pub fn delta(x0: f64, sheet: Sheet) -> Self {
        Self::new(DistributionKind::Delta { x0, sheet })
    }

    pub fn mode(k: i64, sheet: Sheet) -> Self {
        Self::new(DistributionKind::Mode { k, sheet })
    }

    pub fn derivative(of: CosphereDistribution) -> Self {
        Self::new(DistributionKind::Derivative(Box::new(of)))
    }

    pub fn scaled(mut self, s: Complex64) -> Self {
        self.normalization *= s;
        self
    }

    pub fn apply(&self, phi: &CosphereFunction) -> Complex64 {
        let raw = match &self.kind {
            DistributionKind::UniformPlus => phi.plus.mean(),
            DistributionKind::UniformMinus => phi.minus.mean(),
            DistributionKind::UniformBoth => phi.plus.mean() + phi.minus.mean(),
            DistributionKind::Delta { x0, sheet } => phi.sheet(*sheet).eval(*x0),
            DistributionKind::Mode { k, sheet } => phi.sheet(*sheet).coeff(*k),
            DistributionKind::Derivative(inner) => -inner.apply(&phi.derivative()),
        };
        raw * self.normalization
    }
}

impl fmt::Display for CosphereDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sheet = |s: &Sheet| if *s == Sheet::Plus { '+' } else { '-' };
        if self.normalization != Complex64::new(1.0, 0.0) {
            write!(f, "({})*", self.normalization)?;
        }
        match &self.kind {
            DistributionKind::UniformPlus => write!(f, "uniform+"),
            DistributionKind::UniformMinus => write!(f, "uniform-"),
            DistributionKind::UniformBoth => write!(f, "uniform"),
            DistributionKind::Delta { x0, sheet: s } => write!(f, "delta:{x0}:{}", sheet(s)),
            DistributionKind::Mode { k, sheet: s } => write!(f, "mode:{k}:{}", sheet(s)),
            DistributionKind::Derivative(inner) => write!(f, "d({inner})"),
        }
    }
}

impl FromStr for CosphereDistribution {
    type Err = Error;

    /// Parses `uniform+`, `uniform-`, `uniform`, `delta:x0:±`, `mode:k:±` and `d(...)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("unrecognized distribution '{s}'"));
        if let Some(inner) = s.strip_prefix("d(").and_then(|r| r.strip_suffix(')')) {
            return Ok(Self::derivative(inner.parse()?));
        }
        let parse_sheet = |t: &str| match t {
            "+" => Ok(Sheet::Plus),
            "-" => Ok(Sheet::Minus),
            _ => Err(bad()),
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["uniform+"] => Ok(Self::uniform_plus()),
            ["uniform-"] => Ok(Self::uniform_minus()),
            ["uniform"] | ["uniform+-"] => Ok(Self::uniform_both()),
            ["delta", x, sh] => Ok(Self::delta(x.parse().map_err(|_| bad())?, parse_sheet(sh)?)),
            ["mode", k, sh] => Ok(Self::mode(k.parse().map_err(|_| bad())?, parse_sheet(sh)?)),
            _ => Err(bad()),
        }
    }
}

/// `res_w A = (1/2π) ∫_{S*S¹} tr σ_{−1}(x, ξ)`.
///
/// Zero for symbols whose grading never meets degree −1 (non-integral order,
/// or order below −1).
pub fn wodzicki_residue(a: &ClassicalSymbol) -> Result<Complex64> {
    Ok(match a.component(Degree::from_int(-1))? {
        Some(c) => {
            let (p, m) = c.trace();
            p.mean() + m.mean()
        }
        None => Complex64::new(0.0, 0.0),
    })
}

/// `Tr^f(A) = f(tr σ₀^A)` for `order(A) ≤ 0`.
pub fn symbol_trace(f: &CosphereDistribution, a: &ClassicalSymbol) -> Result<Complex64> {
    if a.order() > Degree::ZERO {
        return Err(Error::InvalidOrder(a.order(), "leading-symbol traces need order ≤ 0"));
    }
    Ok(match a.component(Degree::ZERO)? {
        Some(c) => f.apply(&CosphereFunction::trace_of(c)),
        None => Complex64::new(0.0, 0.0),
    })
}

/// `Tr_r^f(A) = f(tr σ_r^A)` on symbols of order ≤ `p < 0`, `2p ≤ r ≤ p`.
pub fn component_trace(r: Degree, p: Degree, f: &CosphereDistribution, a: &ClassicalSymbol) -> Result<Complex64> {
    if p >= Degree::ZERO {
        return Err(Error::InvalidOrder(p, "component traces need p < 0"));
    }
    if a.order() > p {
        return Err(Error::InvalidOrder(a.order(), "symbol order exceeds p"));
    }
    let lo = p + p;
    if r < lo || r > p {
        return Err(Error::ComponentOutOfRange { r, lo, hi: p });
    }
    Ok(match a.component(r)? {
        Some(c) => f.apply(&CosphereFunction::trace_of(c)),
        None => Complex64::new(0.0, 0.0),
    })
}

const QUADRATURE_POINTS: usize = 1024;

/// Closed-form leading heat coefficient `a₀(A, Q)` on the circle.
///
/// For `A` of integer order `a ≥ −1` and a weight `Q` of order `q` with scalar
/// leading symbol `f_Q`, returns `c·∫_{S*S¹} tr(σ_a) f_Q^{−(1+a)/q}` with
/// `c = Γ((1+a)/q)/(2πq)` for `a ≠ −1` and `c = 1/(2π)` for `a = −1`. The fiber
/// trace appears once; there is no extra fiber-dimension factor.
pub fn predicted_a0(a: &ClassicalSymbol, q: f64, f_q: &CosphereFunction) -> Result<Complex64> {
    let order = a
        .order()
        .as_int()
        .ok_or(Error::InvalidOrder(a.order(), "heat coefficients need integer order"))?;
    if order < -1 {
        return Err(Error::InvalidOrder(a.order(), "leading heat coefficient needs order ≥ −1"));
    }
    if !(q > 0.0) {
        return Err(Error::InvalidArgument(format!("weight order must be positive, got {q}")));
    }
    let exponent = (1 + order) as f64 / q;
    let constant = if order == -1 { 1.0 / (2.0 * PI) } else { gamma(exponent) / (2.0 * PI * q) };
    let tr = CosphereFunction::trace_of(a.leading());
    let integral: Complex64 = Sheet::BOTH
        .iter()
        .map(|&s| cosphere_integral(tr.sheet(s), f_q.sheet(s), -exponent))
        .sum();
    Ok(integral * constant)
}

/// [`predicted_a0`] multiplied by the fiber dimension, as the constant is
/// sometimes stated. Kept only for reporting the discrepancy against the
/// spectral fit.
pub fn predicted_a0_dim_weighted(a: &ClassicalSymbol, q: f64, f_q: &CosphereFunction) -> Result<Complex64> {
    Ok(predicted_a0(a, q, f_q)? * a.fiber_dim() as f64)
}

/// `b₀(A, Q) = −res_w(A)/q`, the coefficient of `log ε`.
pub fn predicted_b0(a: &ClassicalSymbol, q: f64) -> Result<Complex64> {
    if !(q > 0.0) {
        return Err(Error::InvalidArgument(format!("weight order must be positive, got {q}")));
    }
    Ok(-wodzicki_residue(a)? / q)
}

/// `∫_0^{2π} φ(x) w(x)^p dx`; exact when `w` is constant, trapezoidal
/// (spectrally accurate for smooth positive `w`) otherwise.
fn cosphere_integral(phi: &ScalarLoop, w: &ScalarLoop, p: f64) -> Complex64 {
    if w.modes().all(|(k, c)| k == 0 || c.norm() == 0.0) {
        let w0 = w.mean();
        return phi.mean() * w0.powf(p) * (2.0 * PI);
    }
    let m = QUADRATURE_POINTS.max(8 * (phi.band() + w.band()));
    let h = 2.0 * PI / m as f64;
    (0..m)
        .map(|j| {
            let x = j as f64 * h;
            phi.eval(x) * w.eval(x).powf(p)
        })
        .sum::<Complex64>()
        * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::SymbolSampler;
    use crate::symbol::{commutator, compose, multiplication_symbol, weight_power_symbol, WeightSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: Complex64, b: f64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn residue_of_inverse_square_root_weight() {
        let a = weight_power_symbol(WeightSpec::new(-0.5), 1, 1).unwrap();
        assert!(close(wodzicki_residue(&a).unwrap(), 2.0, 1e-15));
        assert!(close(predicted_b0(&a, 1.0).unwrap(), -2.0, 1e-15));
    }

    #[test]
    fn residue_vanishes_on_multiplication_and_low_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = SymbolSampler { dim: 2, ..Default::default() }.matrix_loop(&mut rng);
        let m = multiplication_symbol(&u, 2);
        assert_eq!(wodzicki_residue(&m).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(predicted_b0(&m, 2.0).unwrap(), Complex64::new(0.0, 0.0));
        let low = weight_power_symbol(WeightSpec::new(-1.5), 2, 0).unwrap();
        assert_eq!(wodzicki_residue(&low).unwrap(), Complex64::new(0.0, 0.0));
        let half = weight_power_symbol(WeightSpec::new(-0.25), 1, 3).unwrap();
        assert_eq!(wodzicki_residue(&half).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn residue_needs_depth() {
        let id = ClassicalSymbol::identity(1, 0);
        assert!(matches!(wodzicki_residue(&id), Err(Error::InsufficientDepth { .. })));
    }

    #[test]
    fn identity_traces() {
        let id = ClassicalSymbol::identity(3, 0);
        assert!(close(symbol_trace(&CosphereDistribution::uniform_plus(), &id).unwrap(), 3.0, 1e-15));
        assert!(close(symbol_trace(&CosphereDistribution::uniform_both(), &id).unwrap(), 6.0, 1e-15));
        let low = weight_power_symbol(WeightSpec::new(-0.5), 3, 0).unwrap();
        assert_eq!(symbol_trace(&CosphereDistribution::uniform_plus(), &low).unwrap(), Complex64::new(0.0, 0.0));
        let high = weight_power_symbol(WeightSpec::new(0.5), 3, 0).unwrap();
        assert!(symbol_trace(&CosphereDistribution::uniform_plus(), &high).is_err());
    }

    #[test]
    fn delta_evaluates_leading_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = SymbolSampler { dim: 2, depth: 1, ..Default::default() }.symbol(&mut rng, Degree::ZERO);
        let x0 = 0.7;
        let expect = a.leading().sheet(Sheet::Minus).eval(x0).trace();
        let got = symbol_trace(&CosphereDistribution::delta(x0, Sheet::Minus), &a).unwrap();
        assert!((got - expect).norm() < 1e-14);
    }

    #[test]
    fn derivative_distribution_integrates_by_parts() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = SymbolSampler { dim: 2, band: 3, depth: 0, ..Default::default() }.symbol(&mut rng, Degree::ZERO);
        let f = CosphereDistribution::delta(1.3, Sheet::Plus);
        let d = CosphereDistribution::derivative(f.clone());
        let got = symbol_trace(&d, &a).unwrap();
        // Central finite difference of the leading trace at x0.
        let h = 1e-5;
        let tr = |x: f64| a.leading().sheet(Sheet::Plus).eval(x).trace();
        let fd = (tr(1.3 + h) - tr(1.3 - h)) / (2.0 * h);
        assert!((got + fd).norm() < 1e-7);
        // Derivatives of the uniform functional vanish.
        let du = CosphereDistribution::derivative(CosphereDistribution::uniform_plus());
        assert!(symbol_trace(&du, &a).unwrap().norm() < 1e-15);
    }

    #[test]
    fn symbol_trace_is_a_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = SymbolSampler { dim: 3, band: 2, depth: 2, ..Default::default() };
        let a = s.symbol(&mut rng, Degree::ZERO);
        let b = s.symbol(&mut rng, Degree::ZERO);
        for f in [
            CosphereDistribution::uniform_plus(),
            CosphereDistribution::uniform_minus(),
            CosphereDistribution::delta(2.0, Sheet::Plus),
            CosphereDistribution::mode(1, Sheet::Minus),
        ] {
            let ab = symbol_trace(&f, &compose(&a, &b, 2).unwrap()).unwrap();
            let ba = symbol_trace(&f, &compose(&b, &a, 2).unwrap()).unwrap();
            assert!((ab - ba).norm() < 1e-12);
        }
    }

    #[test]
    fn component_traces() {
        let p = Degree::from_int(-1);
        let a = weight_power_symbol(WeightSpec::new(-0.5), 2, 2).unwrap();
        let f = CosphereDistribution::uniform_plus().scaled(Complex64::new(0.5, 0.0));
        assert!(close(component_trace(p, p, &f, &a).unwrap(), 1.0, 1e-15));

        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = SymbolSampler { dim: 2, band: 2, depth: 2, ..Default::default() };
        let x = s.symbol(&mut rng, p);
        let y = s.symbol(&mut rng, p);
        let comm = commutator(&x, &y, 2).unwrap();
        let g = CosphereDistribution::mode(0, Sheet::Plus);
        // [x, y] has order 2p, so Tr_r vanishes for r > 2p.
        assert_eq!(component_trace(p, p, &g, &comm).unwrap(), Complex64::new(0.0, 0.0));
        assert!(component_trace(Degree::from_int(-2), p, &g, &comm).unwrap().norm() < 1e-12);
        assert!(matches!(
            component_trace(Degree::from_int(-3), p, &g, &comm),
            Err(Error::ComponentOutOfRange { .. })
        ));
        assert!(component_trace(p, Degree::ZERO, &g, &comm).is_err());
    }

    #[test]
    fn predicted_coefficients() {
        let id = ClassicalSymbol::identity(1, 0);
        let one = CosphereFunction::constant(1.0);
        assert!(close(predicted_a0(&id, 2.0, &one).unwrap(), PI.sqrt(), 1e-14));
        let id3 = ClassicalSymbol::identity(3, 0);
        assert!(close(predicted_a0(&id3, 2.0, &one).unwrap(), 3.0 * PI.sqrt(), 1e-14));
        assert!(close(predicted_a0_dim_weighted(&id3, 2.0, &one).unwrap(), 9.0 * PI.sqrt(), 1e-13));
        let inv = weight_power_symbol(WeightSpec::new(-0.5), 1, 1).unwrap();
        assert!(close(predicted_a0(&inv, 1.0, &one).unwrap(), 2.0, 1e-14));
        let half = weight_power_symbol(WeightSpec::new(0.25), 1, 1).unwrap();
        assert!(predicted_a0(&half, 1.0, &one).is_err());
    }

    #[test]
    fn predicted_a0_with_varying_leading_symbol() {
        // f = 2 + cos x, σ₀ = 1: ∫ (2 + cos x)^{-1/2} dx on both sheets, q = 2.
        let f = ScalarLoop::from_modes([
            (-1, Complex64::new(0.5, 0.0)),
            (0, Complex64::new(2.0, 0.0)),
            (1, Complex64::new(0.5, 0.0)),
        ]);
        let fq = CosphereFunction::new(f.clone(), f);
        let id = ClassicalSymbol::identity(1, 0);
        let got = predicted_a0(&id, 2.0, &fq).unwrap();
        // Reference by composite Simpson on a fine grid.
        let n = 20_000;
        let h = 2.0 * PI / n as f64;
        let g = |x: f64| (2.0 + x.cos()).powf(-0.5);
        let simpson: f64 = (0..n)
            .map(|j| {
                let x = j as f64 * h;
                (g(x) + 4.0 * g(x + h / 2.0) + g(x + h)) * h / 6.0
            })
            .sum();
        let expect = gamma(0.5) / (4.0 * PI) * 2.0 * simpson;
        assert!((got.re - expect).abs() < 1e-10 && got.im.abs() < 1e-12);
    }

    #[test]
    fn distribution_names_round_trip() {
        for name in ["uniform+", "uniform-", "uniform", "delta:0.5:+", "mode:-2:-", "d(delta:1:+)", "d(d(uniform+))"] {
            let d: CosphereDistribution = name.parse().unwrap();
            assert_eq!(d.to_string(), name);
        }
        assert!("delta:x:+".parse::<CosphereDistribution>().is_err());
        assert!("mode:1:*".parse::<CosphereDistribution>().is_err());
    }

    #[test]
    fn linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let s = SymbolSampler { dim: 2, depth: 1, ..Default::default() };
        let a = s.symbol(&mut rng, Degree::ZERO);
        let b = s.symbol(&mut rng, Degree::ZERO);
        let lam = Complex64::new(0.3, -1.2);
        let comb = a.axpy(lam, &b).unwrap();
        let f = CosphereDistribution::delta(0.4, Sheet::Plus);
        let lhs = symbol_trace(&f, &comb).unwrap();
        let rhs = symbol_trace(&f, &a).unwrap() + lam * symbol_trace(&f, &b).unwrap();
        assert!((lhs - rhs).norm() < 1e-14);
        let lhs = wodzicki_residue(&comb).unwrap();
        let rhs = wodzicki_residue(&a).unwrap() + lam * wodzicki_residue(&b).unwrap();
        assert!((lhs - rhs).norm() < 1e-14);
    }
}
