//! Matrix-valued differential forms in two finite models.
//!
//! [`AlgebraValued2Form`] is a 2-form on a model tangent space `ℝ^m` whose
//! values are matrix loops; constant loops give ordinary matrix-valued forms.
//! Wedge powers use the determinant convention
//! `Ω^k(X₁…X_{2k}) = (1/(2^k k!)) Σ_σ sgn σ · Ω(X_{σ1},X_{σ2})⋯Ω(X_{σ(2k−1)},X_{σ2k})`.
//!
//! [`InvariantForm`] is a left-invariant matrix-valued form on a Lie group,
//! stored by its values on sorted tuples of basis vectors, with the standard
//! shuffle wedge product and the Chevalley–Eilenberg differential. It is the
//! model in which [`transgression_check`] runs.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fourier::{CMatrix, MatrixLoop};
use crate::lie::LieAlgebra;
use crate::traces::{CosphereDistribution, CosphereFunction};

/// Largest supported wedge power.
pub const MAX_WEDGE_POWER: usize = 4;

const ANTISYMMETRY_TOL: f64 = 1e-12;

/// Antisymmetric bilinear map `ℝ^m × ℝ^m → C^∞(S¹, gl(d))`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraValued2Form {
    tangent_dim: usize,
    dim: usize,
    /// `values[i·m + j] = Ω(e_i, e_j)`.
    values: Vec<MatrixLoop>,
}

impl AlgebraValued2Form {
    /// Builds the form from its values on basis pairs `i < j`; unspecified
    /// pairs are zero.
    pub fn from_pairs<I>(tangent_dim: usize, dim: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((usize, usize), MatrixLoop)>,
    {
        let m = tangent_dim;
        let mut values = vec![MatrixLoop::zeros(dim, 0); m * m];
        for ((i, j), v) in pairs {
            if i >= j || j >= m {
                return Err(Error::ShapeMismatch(format!("basis pair ({i},{j}) must satisfy i < j < {m}")));
            }
            if v.dim() != dim {
                return Err(Error::FiberDimMismatch(dim, v.dim()));
            }
            values[j * m + i] = v.scale(Complex64::new(-1.0, 0.0));
            values[i * m + j] = v;
        }
        Ok(AlgebraValued2Form { tangent_dim, dim, values })
    }

    /// Builds a constant form from the full table `table[i][j] = Ω(e_i, e_j)`,
    /// which must be antisymmetric.
    pub fn from_table(table: &[Vec<CMatrix>]) -> Result<Self> {
        let m = table.len();
        let dim = table.first().and_then(|r| r.first()).map_or(0, |v| v.nrows());
        if table.iter().any(|r| r.len() != m || r.iter().any(|v| v.nrows() != dim || v.ncols() != dim)) {
            return Err(Error::ShapeMismatch(format!("table must be {m}×{m} of {dim}×{dim} matrices")));
        }
        let scale = table.iter().flatten().map(|v| v.norm()).fold(1.0, f64::max);
        for i in 0..m {
            for j in 0..m {
                let defect = (&table[i][j] + &table[j][i]).norm();
                if defect > ANTISYMMETRY_TOL * scale {
                    return Err(Error::NotAntisymmetric(defect));
                }
            }
        }
        Self::from_pairs(
            m,
            dim,
            (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).map(|(i, j)| ((i, j), MatrixLoop::constant(table[i][j].clone()))),
        )
    }

    pub fn tangent_dim(&self) -> usize {
        self.tangent_dim
    }

    pub fn fiber_dim(&self) -> usize {
        self.dim
    }

    pub fn band(&self) -> usize {
        self.values.iter().map(|v| v.band()).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.band() == 0
    }

    pub fn basis_value(&self, i: usize, j: usize) -> &MatrixLoop {
        &self.values[i * self.tangent_dim + j]
    }

    /// Largest `‖Ω(e_i,e_j) + Ω(e_j,e_i)‖`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let m = self.tangent_dim;
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let s = self.values[i * m + j].add(&self.values[j * m + i]).expect("fiber dims agree");
                worst = worst.max(s.norm());
            }
        }
        worst
    }

    /// `Ω(X, Y)` as a matrix loop.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<MatrixLoop> {
        let m = self.tangent_dim;
        if x.len() != m || y.len() != m {
            return Err(Error::ShapeMismatch(format!("tangent vectors must have length {m}")));
        }
        let mut acc = MatrixLoop::zeros(self.dim, self.band());
        for i in 0..m {
            for j in 0..m {
                let c = x[i] * y[j];
                if c != 0.0 && i != j {
                    acc = acc.axpy(Complex64::new(c, 0.0), &self.values[i * m + j])?;
                }
            }
        }
        Ok(acc)
    }

    /// The constant form `Ω_{θ}` obtained by evaluating every value at `θ`.
    pub fn at(&self, theta: f64) -> Self {
        AlgebraValued2Form {
            tangent_dim: self.tangent_dim,
            dim: self.dim,
            values: self.values.iter().map(|v| MatrixLoop::constant(v.eval(theta))).collect(),
        }
    }
}

/// Kind of random matrices drawn by [`random_matrix`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    /// Traceless anti-Hermitian.
    SpecialUnitary,
    /// Anti-Hermitian.
    Unitary,
}

/// Random element of `su(n)` or `u(n)` with entries of size about 1.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, kind: MatrixKind) -> CMatrix {
    let a = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let mut h = (&a - a.adjoint()) * Complex64::new(0.5, 0.0);
    if kind == MatrixKind::SpecialUnitary {
        let t = h.trace() / n as f64;
        for i in 0..n {
            h[(i, i)] -= t;
        }
    }
    h
}

/// Random constant 2-form on `ℝ^m` with values of the given kind.
pub fn random_constant_form<R: Rng + ?Sized>(rng: &mut R, tangent_dim: usize, n: usize, kind: MatrixKind) -> AlgebraValued2Form {
    let pairs: Vec<_> = (0..tangent_dim)
        .flat_map(|i| (i + 1..tangent_dim).map(move |j| (i, j)))
        .map(|p| (p, MatrixLoop::constant(random_matrix(rng, n, kind))))
        .collect();
    AlgebraValued2Form::from_pairs(tangent_dim, n, pairs).expect("pairs are well formed")
}

/// All permutations of `0..n` with their signs.
fn signed_permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, sign: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        if rest.is_empty() {
            out.push((prefix.clone(), sign));
            return;
        }
        for pos in 0..rest.len() {
            let v = rest.remove(pos);
            prefix.push(v);
            rec(prefix, rest, if pos % 2 == 0 { sign } else { -sign }, out);
            prefix.pop();
            rest.insert(pos, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..n).collect(), 1.0, &mut out);
    out
}

fn pair_table(omega: &AlgebraValued2Form, xs: &[Vec<f64>]) -> Result<Vec<Vec<MatrixLoop>>> {
    xs.iter().map(|x| xs.iter().map(|y| omega.eval(x, y)).collect()).collect()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Sum over sequences of ordered pairs `(i < j)` drawn from `slots`, each pair
/// extracted with the sign of moving it to the front.
fn pair_expansion(table: &[Vec<MatrixLoop>], slots: &[usize], dim: usize) -> Result<MatrixLoop> {
    if slots.is_empty() {
        return Ok(MatrixLoop::identity(dim));
    }
    let mut acc: Option<MatrixLoop> = None;
    for a in 0..slots.len() {
        for b in a + 1..slots.len() {
            let sign = if (a + b - 1) % 2 == 0 { 1.0 } else { -1.0 };
            let rest: Vec<usize> = slots.iter().enumerate().filter(|(p, _)| *p != a && *p != b).map(|(_, s)| *s).collect();
            let term = table[slots[a]][slots[b]].mul(&pair_expansion(table, &rest, dim)?)?;
            acc = Some(match acc {
                None => term.scale(Complex64::new(sign, 0.0)),
                Some(s) => s.axpy(Complex64::new(sign, 0.0), &term)?,
            });
        }
    }
    Ok(acc.expect("at least one pair"))
}

/// Pointwise wedge power `Ω^k(X₁,…,X_{2k})` as a matrix loop.
///
/// Full permutation enumeration for `k ≤ 3`, recursive pair expansion for
/// `k = 4`.
pub fn wedge_power(omega: &AlgebraValued2Form, k: usize, xs: &[Vec<f64>]) -> Result<MatrixLoop> {
    if k == 0 || k > MAX_WEDGE_POWER {
        return Err(Error::WedgePowerUnsupported(k));
    }
    if xs.len() != 2 * k {
        return Err(Error::ArgumentCount { expected: 2 * k, got: xs.len() });
    }
    let table = pair_table(omega, xs)?;
    let norm = 1.0 / (2f64.powi(k as i32) * factorial(k));
    if k <= 3 {
        let mut acc = MatrixLoop::zeros(omega.dim, 0);
        for (perm, sign) in signed_permutations(2 * k) {
            let mut prod = table[perm[0]][perm[1]].clone();
            for p in 1..k {
                prod = prod.mul(&table[perm[2 * p]][perm[2 * p + 1]])?;
            }
            acc = acc.axpy(Complex64::new(sign * norm, 0.0), &prod)?;
        }
        Ok(acc)
    } else {
        let slots: Vec<usize> = (0..2 * k).collect();
        Ok(pair_expansion(&table, &slots, omega.dim)?.scale(Complex64::new(2f64.powi(k as i32) * norm, 0.0)))
    }
}

/// [`wedge_power`] for a constant form, as a single matrix.
pub fn wedge_power_evaluate(omega: &AlgebraValued2Form, k: usize, xs: &[Vec<f64>]) -> Result<CMatrix> {
    if !omega.is_constant() {
        return Err(Error::ShapeMismatch("wedge_power_evaluate needs a constant form; use wedge_power".into()));
    }
    let w = wedge_power(omega, k, xs)?;
    Ok(w.coeff(0).cloned().unwrap_or_else(|| CMatrix::zeros(omega.dim, omega.dim)))
}

/// `f(tr Ω^k(X₁,…,X_{2k}))` for a pointwise curvature, whose symbol is the
/// same on both sheets.
pub fn ck_f_pointwise(omega: &AlgebraValued2Form, f: &CosphereDistribution, k: usize, xs: &[Vec<f64>]) -> Result<Complex64> {
    let t = wedge_power(omega, k, xs)?.trace();
    Ok(f.apply(&CosphereFunction::new(t.clone(), t)))
}

/// Left-invariant `gl(d)`-valued `p`-form on a Lie group with Lie algebra of
/// dimension `n`, stored by its values on increasing index tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantForm {
    degree: usize,
    base_dim: usize,
    dim: usize,
    comps: BTreeMap<Vec<usize>, CMatrix>,
}

fn subsets(n: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, p, &mut Vec::new(), &mut out);
    out
}

/// Sign of the permutation sorting `v`, or `None` if `v` has repeats.
fn sort_sign(v: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut s = v.to_vec();
    let mut sign = 1.0;
    for i in 0..s.len() {
        for j in 0..s.len() - 1 - i {
            if s[j] == s[j + 1] {
                return None;
            }
            if s[j] > s[j + 1] {
                s.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    if s.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((s, sign))
}

impl InvariantForm {
    pub fn zero(degree: usize, base_dim: usize, dim: usize) -> Self {
        let comps = subsets(base_dim, degree).into_iter().map(|s| (s, CMatrix::zeros(dim, dim))).collect();
        InvariantForm { degree, base_dim, dim, comps }
    }

    /// The 1-form with `θ(e_i) = values[i]`.
    pub fn one_form(values: &[CMatrix]) -> Result<Self> {
        let dim = values.first().map_or(0, |v| v.nrows());
        if values.iter().any(|v| v.nrows() != dim || v.ncols() != dim) {
            return Err(Error::ShapeMismatch("1-form values must share one square shape".into()));
        }
        let comps = values.iter().enumerate().map(|(i, v)| (vec![i], v.clone())).collect();
        Ok(InvariantForm { degree: 1, base_dim: values.len(), dim, comps })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn fiber_dim(&self) -> usize {
        self.dim
    }

    /// Value on basis vectors `e_{idx[0]}, …` in any order.
    pub fn on_basis(&self, idx: &[usize]) -> CMatrix {
        match sort_sign(idx) {
            Some((sorted, sign)) => &self.comps[&sorted] * Complex64::new(sign, 0.0),
            None => CMatrix::zeros(self.dim, self.dim),
        }
    }

    pub fn components(&self) -> impl Iterator<Item = (&[usize], &CMatrix)> + '_ {
        self.comps.iter().map(|(k, v)| (k.as_slice(), v))
    }

    fn check_compatible(&self, other: &InvariantForm) -> Result<()> {
        if self.base_dim != other.base_dim || self.dim != other.dim {
            return Err(Error::ShapeMismatch("forms live on different spaces".into()));
        }
        Ok(())
    }

    pub fn axpy(&self, s: Complex64, other: &InvariantForm) -> Result<Self> {
        self.check_compatible(other)?;
        if self.degree != other.degree {
            return Err(Error::ShapeMismatch(format!("adding forms of degree {} and {}", self.degree, other.degree)));
        }
        let comps = self.comps.iter().map(|(k, v)| (k.clone(), v + &other.comps[k] * s)).collect();
        Ok(InvariantForm { comps, ..*self })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        InvariantForm { comps: self.comps.iter().map(|(k, v)| (k.clone(), v * s)).collect(), ..*self }
    }

    /// Shuffle product `(α∧β)(e_K) = Σ sgn(I,J) α(e_I) β(e_J)`.
    pub fn wedge(&self, other: &InvariantForm) -> Result<Self> {
        self.check_compatible(other)?;
        let (p, q) = (self.degree, other.degree);
        let mut out = Self::zero(p + q, self.base_dim, self.dim);
        for (k, slot) in out.comps.iter_mut() {
            for pick in subsets(p + q, p) {
                let i: Vec<usize> = pick.iter().map(|&a| k[a]).collect();
                let j: Vec<usize> = (0..p + q).filter(|a| !pick.contains(a)).map(|a| k[a]).collect();
                let order: Vec<usize> = pick.iter().copied().chain((0..p + q).filter(|a| !pick.contains(a))).collect();
                let (_, sign) = sort_sign(&order).expect("distinct positions");
                *slot += &self.comps[&i] * &other.comps[&j] * Complex64::new(sign, 0.0);
            }
        }
        Ok(out)
    }

    /// Chevalley–Eilenberg differential
    /// `dω(X₀,…,X_p) = Σ_{a<b} (−1)^{a+b} ω([X_a,X_b], X₀,…,X̂_a,…,X̂_b,…,X_p)`.
    pub fn ce_differential(&self, lie: &LieAlgebra) -> Result<Self> {
        if lie.dim() != self.base_dim {
            return Err(Error::ShapeMismatch(format!("form on a {}-dimensional algebra, got {}", self.base_dim, lie.dim())));
        }
        let p = self.degree;
        let mut out = Self::zero(p + 1, self.base_dim, self.dim);
        for (k, slot) in out.comps.iter_mut() {
            for a in 0..=p {
                for b in a + 1..=p {
                    let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
                    let rest: Vec<usize> = (0..=p).filter(|&c| c != a && c != b).map(|c| k[c]).collect();
                    for m in 0..self.base_dim {
                        let c = lie.c(k[a], k[b], m);
                        if c == 0.0 {
                            continue;
                        }
                        let mut idx = vec![m];
                        idx.extend_from_slice(&rest);
                        *slot += self.on_basis(&idx) * Complex64::new(sign * c, 0.0);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Scalar form `λ(ω)`, stored with `1×1` values.
    pub fn map_trace<L: Fn(&CMatrix) -> Complex64>(&self, lambda: L) -> Self {
        InvariantForm {
            dim: 1,
            comps: self.comps.iter().map(|(k, v)| (k.clone(), CMatrix::from_element(1, 1, lambda(v)))).collect(),
            ..*self
        }
    }

    /// Largest component norm.
    pub fn max_norm(&self) -> f64 {
        self.comps.values().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Curvature `Ω = dθ + θ∧θ` of a left-invariant connection 1-form.
pub fn invariant_curvature(lie: &LieAlgebra, theta: &InvariantForm) -> Result<InvariantForm> {
    theta.ce_differential(lie)?.axpy(Complex64::new(1.0, 0.0), &theta.wedge(theta)?)
}

fn wedge_power_invariant(omega: &InvariantForm, k: usize) -> Result<InvariantForm> {
    let mut acc = omega.clone();
    for _ in 1..k {
        acc = acc.wedge(omega)?;
    }
    Ok(acc)
}

/// Outcome of [`transgression_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransgressionReport {
    /// `max |∂_t λ(Ω_t^k) − d Σ_j λ(Ω_t^{k−j} θ̇_t Ω_t^{j−1})|` over components.
    pub residual: f64,
    /// Disagreement between the 3-point and 5-point t-derivatives.
    pub richardson_gap: f64,
    /// Largest component of the 5-point t-derivative.
    pub derivative_norm: f64,
}

/// Relative Richardson gap above which the step is rejected as too coarse.
pub const COARSE_GRID_TOL: f64 = 1e-2;

/// Checks `∂_t λ(Ω_t^k) = d Σ_{j=1}^k λ(Ω_t^{k−j} ∧ θ̇_t ∧ Ω_t^{j−1})` at `t0`
/// for the family of left-invariant connections `t ↦ θ_t` on the group of
/// `lie`. Wedge powers here use the shuffle product, so `Ω^{∧k}` is `k!`
/// times the determinant-convention power.
///
/// Both t-derivatives use the 5-point stencil with step `h`.
pub fn transgression_check<F, L>(lie: &LieAlgebra, family: F, lambda: L, k: usize, t0: f64, h: f64) -> Result<TransgressionReport>
where
    F: Fn(f64) -> Vec<CMatrix>,
    L: Fn(&CMatrix) -> Complex64,
{
    if k == 0 || k > MAX_WEDGE_POWER {
        return Err(Error::WedgePowerUnsupported(k));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let offsets = [-2.0, -1.0, 1.0, 2.0];
    let thetas: Vec<InvariantForm> = offsets.iter().map(|o| InvariantForm::one_form(&family(t0 + o * h))).collect::<Result<_>>()?;
    let p: Vec<InvariantForm> = thetas
        .iter()
        .map(|th| Ok(wedge_power_invariant(&invariant_curvature(lie, th)?, k)?.map_trace(&lambda)))
        .collect::<Result<_>>()?;
    let stencil5 = |f: &[InvariantForm]| -> Result<InvariantForm> {
        f[0].scale(Complex64::new(1.0, 0.0))
            .axpy(Complex64::new(-8.0, 0.0), &f[1])?
            .axpy(Complex64::new(8.0, 0.0), &f[2])?
            .axpy(Complex64::new(-1.0, 0.0), &f[3])
            .map(|s| s.scale(Complex64::new(1.0 / (12.0 * h), 0.0)))
    };
    let lhs5 = stencil5(&p)?;
    let lhs3 = p[2].axpy(Complex64::new(-1.0, 0.0), &p[1])?.scale(Complex64::new(1.0 / (2.0 * h), 0.0));

    let theta0 = InvariantForm::one_form(&family(t0))?;
    let theta_dot = stencil5(&thetas)?;
    let omega0 = invariant_curvature(lie, &theta0)?;
    let mut transgression = InvariantForm::zero(2 * k - 1, theta0.base_dim, 1);
    for j in 1..=k {
        let mut term = if k - j > 0 { wedge_power_invariant(&omega0, k - j)?.wedge(&theta_dot)? } else { theta_dot.clone() };
        if j > 1 {
            term = term.wedge(&wedge_power_invariant(&omega0, j - 1)?)?;
        }
        transgression = transgression.axpy(Complex64::new(1.0, 0.0), &term.map_trace(&lambda))?;
    }
    let rhs = transgression.ce_differential(lie)?;

    let residual = lhs5.axpy(Complex64::new(-1.0, 0.0), &rhs)?.max_norm();
    let richardson_gap = lhs5.axpy(Complex64::new(-1.0, 0.0), &lhs3)?.max_norm();
    let derivative_norm = lhs5.max_norm();
    if richardson_gap > COARSE_GRID_TOL * derivative_norm.max(1.0) {
        return Err(Error::GridTooCoarse(richardson_gap));
    }
    Ok(TransgressionReport { residual, richardson_gap, derivative_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Sheet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn basis(m: usize, i: usize) -> Vec<f64> {
        (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect()
    }

    fn random_vectors(rng: &mut ChaCha8Rng, m: usize, count: usize) -> Vec<Vec<f64>> {
        (0..count).map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
    }

    #[test]
    fn first_power_is_the_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let omega = random_constant_form(&mut rng, 4, 2, MatrixKind::SpecialUnitary);
        let xs = random_vectors(&mut rng, 4, 2);
        let w = wedge_power_evaluate(&omega, 1, &xs).unwrap();
        let direct = omega.eval(&xs[0], &xs[1]).unwrap();
        assert!((w - direct.coeff(0).unwrap()).norm() < 1e-14);
        let repeated = vec![xs[0].clone(), xs[0].clone()];
        assert!(wedge_power_evaluate(&omega, 1, &repeated).unwrap().norm() < 1e-14);
    }

    #[test]
    fn pair_expansion_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let omega = random_constant_form(&mut rng, 6, 3, MatrixKind::Unitary);
        for k in 1..=3 {
            let xs = random_vectors(&mut rng, 6, 2 * k);
            let table = pair_table(&omega, &xs).unwrap();
            let slots: Vec<usize> = (0..2 * k).collect();
            let rec = pair_expansion(&table, &slots, 3).unwrap().scale(Complex64::new(1.0 / factorial(k), 0.0));
            let enumerated = wedge_power(&omega, k, &xs).unwrap();
            assert!(rec.sub(&enumerated).unwrap().norm() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn wedge_power_is_alternating_and_multilinear() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let omega = random_constant_form(&mut rng, 5, 2, MatrixKind::SpecialUnitary);
        for k in [2, 4] {
            let xs = random_vectors(&mut rng, 5, 2 * k);
            let w = wedge_power_evaluate(&omega, k, &xs).unwrap();
            let mut swapped = xs.clone();
            swapped.swap(0, 2 * k - 1);
            assert!((wedge_power_evaluate(&omega, k, &swapped).unwrap() + &w).norm() < 1e-12);
            let extra = random_vectors(&mut rng, 5, 1).remove(0);
            let mut sum = xs.clone();
            sum[1] = xs[1].iter().zip(&extra).map(|(a, b)| 2.0 * a + b).collect();
            let mut other = xs.clone();
            other[1] = extra;
            let lin = wedge_power_evaluate(&omega, k, &sum).unwrap();
            let expect = &w * Complex64::new(2.0, 0.0) + wedge_power_evaluate(&omega, k, &other).unwrap();
            assert!((lin - expect).norm() < 1e-11);
        }
    }

    #[test]
    fn commuting_values_brute_force() {
        // Diagonal values commute; compare with the 24-term alternating sum.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = 4;
        let pairs: Vec<_> = (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
            .map(|p| (p, MatrixLoop::constant(CMatrix::from_diagonal(&nalgebra::DVector::from_fn(2, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))))))
            .collect();
        let omega = AlgebraValued2Form::from_pairs(m, 2, pairs).unwrap();
        let xs: Vec<Vec<f64>> = (0..4).map(|i| basis(m, i)).collect();
        let w = wedge_power_evaluate(&omega, 2, &xs).unwrap().trace();
        let mut brute = Complex64::new(0.0, 0.0);
        for (perm, sign) in signed_permutations(4) {
            let a = omega.basis_value(perm[0], perm[1]).coeff(0).unwrap();
            let b = omega.basis_value(perm[2], perm[3]).coeff(0).unwrap();
            brute += (a * b).trace() * sign;
        }
        assert!((w - brute / 8.0).norm() < 1e-13);
        assert_eq!(signed_permutations(4).len(), 24);
    }

    #[test]
    fn trace_is_cyclic_in_the_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let omega = random_constant_form(&mut rng, 4, 3, MatrixKind::Unitary);
        let xs = random_vectors(&mut rng, 4, 4);
        let rotated = vec![xs[2].clone(), xs[3].clone(), xs[0].clone(), xs[1].clone()];
        let a = wedge_power_evaluate(&omega, 2, &xs).unwrap().trace();
        let b = wedge_power_evaluate(&omega, 2, &rotated).unwrap().trace();
        assert!((a - b).norm() < 1e-13);
    }

    #[test]
    fn rejects_bad_arguments() {
        let omega = AlgebraValued2Form::from_pairs(3, 2, []).unwrap();
        let xs = vec![vec![0.0; 3]; 10];
        assert!(matches!(wedge_power(&omega, 5, &xs), Err(Error::WedgePowerUnsupported(5))));
        assert!(matches!(wedge_power(&omega, 2, &xs[..3]), Err(Error::ArgumentCount { .. })));
        let bad = vec![vec![CMatrix::identity(2, 2); 2]; 2];
        assert!(matches!(AlgebraValued2Form::from_table(&bad), Err(Error::NotAntisymmetric(_))));
    }

    #[test]
    fn pointwise_chern_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = 4;
        let base = random_constant_form(&mut rng, m, 2, MatrixKind::SpecialUnitary);
        let xs = random_vectors(&mut rng, m, 2);
        let expected = wedge_power_evaluate(&base, 1, &xs).unwrap().trace();
        let got = ck_f_pointwise(&base, &CosphereDistribution::uniform_plus(), 1, &xs).unwrap();
        assert!((got - expected).norm() < 1e-14);

        let ripple = MatrixLoop::from_modes(2, [(1, random_matrix(&mut rng, 2, MatrixKind::Unitary)), (-1, random_matrix(&mut rng, 2, MatrixKind::Unitary))]).unwrap();
        let looped = AlgebraValued2Form::from_pairs(m, 2, [((0, 1), ripple.clone()), ((1, 3), ripple)]).unwrap();
        let x0 = 0.8;
        let delta = ck_f_pointwise(&looped, &CosphereDistribution::delta(x0, Sheet::Minus), 1, &xs).unwrap();
        let at = looped.at(x0).eval(&xs[0], &xs[1]).unwrap().coeff(0).unwrap().trace();
        assert!((delta - at).norm() < 1e-13);
        let zero = AlgebraValued2Form::from_pairs(m, 2, []).unwrap();
        let xs4 = random_vectors(&mut rng, m, 4);
        assert_eq!(ck_f_pointwise(&zero, &CosphereDistribution::uniform_both(), 2, &xs4).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn shuffle_square_is_k_factorial_times_determinant_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lie = LieAlgebra::su(3).unwrap();
        let theta = InvariantForm::one_form(&(0..8).map(|_| random_matrix(&mut rng, 2, MatrixKind::Unitary)).collect::<Vec<_>>()).unwrap();
        let omega = invariant_curvature(&lie, &theta).unwrap();
        let table: Vec<Vec<CMatrix>> = (0..8).map(|i| (0..8).map(|j| omega.on_basis(&[i, j])).collect()).collect();
        let model = AlgebraValued2Form::from_table(&table).unwrap();
        let sq = omega.wedge(&omega).unwrap();
        let xs: Vec<Vec<f64>> = [0, 2, 5, 7].iter().map(|&i| basis(8, i)).collect();
        let det = wedge_power_evaluate(&model, 2, &xs).unwrap();
        assert!((sq.on_basis(&[0, 2, 5, 7]) - det * Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn ce_differential_squares_to_zero_and_bianchi_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let lie = LieAlgebra::su(3).unwrap();
        let theta = InvariantForm::one_form(&(0..8).map(|_| random_matrix(&mut rng, 2, MatrixKind::Unitary)).collect::<Vec<_>>()).unwrap();
        let dd = theta.ce_differential(&lie).unwrap().ce_differential(&lie).unwrap();
        assert!(dd.max_norm() < 1e-12);
        let omega = invariant_curvature(&lie, &theta).unwrap();
        let bianchi = omega
            .ce_differential(&lie)
            .unwrap()
            .axpy(Complex64::new(1.0, 0.0), &theta.wedge(&omega).unwrap())
            .unwrap()
            .axpy(Complex64::new(-1.0, 0.0), &omega.wedge(&theta).unwrap())
            .unwrap();
        assert!(bianchi.max_norm() < 1e-12);
    }

    #[test]
    fn transgression_trivial_families() {
        let lie = LieAlgebra::su2();
        let fixed: Vec<CMatrix> = (0..3).map(|i| CMatrix::identity(2, 2) * Complex64::new(i as f64, 0.0)).collect();
        let r = transgression_check(&lie, |_| fixed.clone(), |m: &CMatrix| m.trace(), 1, 0.3, 1e-2).unwrap();
        assert!(r.residual < 1e-12 && r.derivative_norm < 1e-12, "{r:?}");
        // Two flat abelian connections (diagonal values on a Cartan direction).
        let a: Vec<CMatrix> = vec![CMatrix::zeros(2, 2), CMatrix::zeros(2, 2), CMatrix::from_diagonal_element(2, 2, Complex64::new(0.0, 1.0))];
        let lin = |t: f64| a.iter().map(|m| m * Complex64::new(t, 0.0)).collect::<Vec<_>>();
        let r = transgression_check(&lie, lin, |m: &CMatrix| m.trace(), 1, 0.5, 1e-2).unwrap();
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn transgression_random_family() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let lie = LieAlgebra::su2();
        let c: Vec<Vec<CMatrix>> = (0..3).map(|_| (0..3).map(|_| random_matrix(&mut rng, 2, MatrixKind::Unitary)).collect()).collect();
        let family = |t: f64| (0..3).map(|i| &c[0][i] + &c[1][i] * Complex64::new(t.sin(), 0.0) + &c[2][i] * Complex64::new(t * t, 0.0)).collect::<Vec<_>>();
        let r = transgression_check(&lie, family, |m: &CMatrix| m.trace(), 1, 0.4, 1e-2).unwrap();
        assert!(r.derivative_norm > 1e-3);
        assert!(r.residual < 1e-6, "{r:?}");
        assert!(matches!(transgression_check(&lie, family, |m: &CMatrix| m.trace(), 1, 0.4, 2.0), Err(Error::GridTooCoarse(_))));
    }
}
