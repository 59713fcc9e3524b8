//! Named verification suites. Each check reports a measured value against a
//! bound; suites fan out over rayon and print in a fixed order.

use std::f64::consts::PI;
use std::io::Write;

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use symcalc::forms::{ck_f_pointwise, random_constant_form, random_matrix, transgression_check, AlgebraValued2Form, MatrixKind};
use symcalc::lie::LieAlgebra;
use symcalc::loop_geometry::{
    ad_loop, ce_differential, chern_conditional_trace, weighted_first_chern, Connection, ConnectionKind, LoopAlgebraElement,
};
use symcalc::sample::SymbolSampler;
use symcalc::spectral::{default_grid, fit_expansion, heat_trace_sweep, quantize, weight_matrix, FitSpec, HeatWeight};
use symcalc::traces::{predicted_a0, predicted_b0, symbol_trace, wodzicki_residue, CosphereFunction};
use symcalc::{
    commutator, compose, multiplication_symbol, weight_power_symbol, CMatrix, ClassicalSymbol, Complex64, CosphereDistribution,
    Degree, Sheet, WeightSpec,
};

use crate::{emit, Failure, RunConfig};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Traces,
    Composition,
    Loopgroup,
    Chern,
    All,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Traces => "traces",
            Suite::Composition => "composition",
            Suite::Loopgroup => "loopgroup",
            Suite::Chern => "chern",
            Suite::All => "all",
        }
    }

    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Traces, Suite::Composition, Suite::Loopgroup, Suite::Chern],
            s => vec![s],
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub tolerance: f64,
    pub pass: bool,
}

fn at_most(suite: Suite, name: &str, value: f64, tolerance: f64) -> Check {
    Check { suite: suite.name(), name: name.into(), value, bound: Bound::AtMost, tolerance, pass: value <= tolerance }
}

fn at_least(suite: Suite, name: &str, value: f64, tolerance: f64) -> Check {
    Check { suite: suite.name(), name: name.into(), value, bound: Bound::AtLeast, tolerance, pass: value >= tolerance }
}

/// Settings shared by every check.
struct Ctx {
    seed: u64,
    depth: usize,
    band: usize,
    modes: usize,
    exact: f64,
}

impl Ctx {
    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }

    fn sampler(&self, dim: usize) -> SymbolSampler {
        SymbolSampler { dim, band: self.band, depth: self.depth.max(2), scale: 1.0, decay: 0.6 }
    }
}

type CheckFn = fn(&Ctx) -> Result<Vec<Check>, Failure>;

fn checks_for(suite: Suite) -> Vec<CheckFn> {
    match suite {
        Suite::Traces => vec![residue_examples, commutator_traces, heat_identity, heat_log],
        Suite::Composition => vec![composition_laws, quantization_defect],
        Suite::Loopgroup => vec![loop_curvatures, loop_chern_agreement],
        Suite::Chern => vec![chern_closedness, transgression, pullback],
        Suite::All => vec![],
    }
}

#[derive(Serialize)]
struct VerifyReport {
    suite: Suite,
    passed: usize,
    failed: usize,
    checks: Vec<Check>,
    seed: u64,
    config: RunConfig,
}

pub fn run(suite: Suite, config: RunConfig) -> Result<(), Failure> {
    let ctx = Ctx {
        seed: config.seed,
        depth: config.depth,
        band: config.band.unwrap_or(2),
        modes: config.modes,
        exact: config.tol.unwrap_or(1e-10),
    };
    let jobs: Vec<(Suite, CheckFn)> = suite.members().into_iter().flat_map(|s| checks_for(s).into_iter().map(move |f| (s, f))).collect();
    let results: Vec<Result<Vec<Check>, Failure>> = jobs.par_iter().map(|(_, f)| f(&ctx)).collect();
    let mut checks = Vec::new();
    for r in results {
        checks.extend(r?);
    }

    let mut out = std::io::stdout().lock();
    for c in &checks {
        let op = match c.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        let status = if c.pass { "PASS" } else { "FAIL" };
        writeln!(out, "{status}  [{}] {}: {:.3e} {op} {:.1e}", c.suite, c.name, c.value, c.tolerance).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    let passed = checks.len() - failed;
    writeln!(out, "{}: {passed} passed, {failed} failed (seed {})", suite.name(), config.seed).map_err(|e| Failure::Usage(e.to_string()))?;
    drop(out);

    if config.out.is_some() {
        let report = VerifyReport { suite, passed, failed, checks, seed: config.seed, config };
        emit(&report, &report.config)?;
    }
    if failed > 0 {
        return Err(Failure::Verification(format!("{failed} check(s) in suite {}", suite.name())));
    }
    Ok(())
}

fn residue_examples(ctx: &Ctx) -> Result<Vec<Check>, Failure> {
    let s = Suite::Traces;
    let mut rng = ctx.rng(1);
    let lambda_inv = weight_power_symbol(WeightSpec::new(-0.5), 1, 2)?;
    let mult = multiplication_symbol(&ctx.sampler(2).matrix_loop(&mut rng), 2);
    let low = ctx.sampler(2).symbol(&mut rng, Degree::from_int(-3));
    Ok(vec![
        at_most(s, "res_w(Λ^{-1}) = 2", (wodzicki_residue(&lambda_inv)? - 2.0).norm(), ctx.exact),
        at_most(s, "res_w(multiplication) = 0", wodzicki_residue(&mult)?.norm(), ctx.exact),
        at_most(s, "res_w(order -3) = 0", wodzicki_residue(&low)?.norm(), ctx.exact),
    ])
}

fn commutator_traces(ctx: &Ctx) -> Result<Vec<Check>, Failure> {
    let s = Suite::Traces;
    let mut rng = ctx.rng(2);
    let sampler = SymbolSampler { depth: 4, ..ctx.sampler(2) };
    let dists = [
        ("uniform+", CosphereDistribution::uniform_plus()),
        ("uniform-", CosphereDistribution::uniform_minus()),
        ("delta:1.3:+", CosphereDistribution::delta(1.3, Sheet::Plus)),
        ("mode:1:-", CosphereDistribution::mode(1, Sheet::Minus)),
        ("d(delta:0.4:-)", CosphereDistribution::derivative(CosphereDistribution::delta(0.4, Sheet::Minus))),
    ];
    let orders = [(0, 0), (1, -1), (1, -2), (2, -1), (0, -1)];
    let mut worst_res = 0.0f64;
    let mut worst_tr = vec![0.0f64; dists.len()];
    for i in 0..25 {
        let (oa, ob) = orders[i % orders.len()];
        let a = sampler.symbol(&mut rng, Degree::from_int(oa));
        let b = sampler.symbol(&mut rng, Degree::from_int(ob));
        let c = commutator(&a, &b, 4)?;
        worst_res = worst_res.max(wodzicki_residue(&c)?.norm());
        if oa + ob <= 0 && oa <= 0 {
            for (w, (_, f)) in worst_tr.iter_mut().zip(&dists) {
                *w = w.max(symbol_trace(f, &c)?.norm());
            }
        }
    }
    let mut out = vec![at_most(s, "res_w([A,B]) = 0 over 25 pairs", worst_res, ctx.exact)];
    for (w, (name, _)) in worst_tr.iter().zip(&dists) {
        out.push(at_most(s, &format!("Tr^f([A,B]) = 0 for f = {name}"), *w, ctx.exact));
    }
    Ok(out)
}

fn fitted_a0(a: &ClassicalSymbol, modes: usize) -> Result<f64, Failure> {
    let weight = HeatWeight::new(&weight_matrix(1.0, modes, a.fiber_dim(), 1.0))?;
    let sweep = heat_trace_sweep(&quantize(a, modes)?, &weight, &default_grid())?;
    let fit = fit_expansion(&sweep.samples, &FitSpec::new(0, 2.0))?;
    Ok(fit.a0().map_or(f64::NAN, |z| z.re))
}

fn heat_identity(ctx: &Ctx) -> Result<Vec<Check>, Failure> {
    let s = Suite::Traces;
    let root_pi = PI.sqrt();
    let id3 = ClassicalSymbol::identity(3, 0);
    let predicted = predicted_a0(&id3, 2.0, &CosphereFunction::constant(1.0))?.re;
    Ok(vec![
        at_most(s, "heat a0(Id) = sqrt(pi), relative", (fitted_a0(&ClassicalSymbol::identity(1, 0), ctx.modes)? - root_pi).abs() / root_pi, 1e-3),
        at_most(s, "heat a0(Id_3) = predicted_a0, relative", (fitted_a0(&id3, ctx.modes)? - predicted).abs() / predicted, 1e-3),
        at_most(s, "predicted_a0(Id_3) = 3 sqrt(pi)", (predicted - 3.0 * root_pi).abs(), ctx.exact),
    ])
}

fn heat_log(_: &Ctx) -> Result<Vec<Check>, Failure> {
    let modes = 400_000;
    let a = weight_power_symbol(WeightSpec::new(-0.5), 1, 0)?;
    let weight = HeatWeight::new(&weight_matrix(0.5, modes, 1, 1.0))?;
    let sweep = heat_trace_sweep(&quantize(&a, modes)?, &weight, &default_grid())?;
    let fit = fit_expansion(&sweep.samples, &FitSpec::new(-1, 1.0))?;
    let b0 = fit.log_coefficient.unwrap_or_default();
    Ok(vec![at_most(Suite::Traces, "heat b0(Λ^{-1}) = -res_w/q", (b0 - predicted_b0(&a, 1.0)?).norm(), 1e-3)])
}

fn composition_laws(ctx: &Ctx) -> Result<Vec<Check>, Failure> {
    let s = Suite::Composition;
    let mut rng = ctx.rng(3);
    let depth = ctx.depth.max(2);
    let (mut assoc, mut lead, mut unit) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..20 {
        let dim = 1 + i % 2;
        let sampler = ctx.sampler(dim);
        let draw = |rng: &mut ChaCha8Rng| {
            let order = Degree::from_halves(rng.gen_range(-4..=4));
            sampler.symbol(rng, order)
        };
        let (a, b, c) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let left = compose(&compose(&a, &b, depth)?, &c, depth)?;
        let right = compose(&a, &compose(&b, &c, depth)?, depth)?;
        assoc = assoc.max(left.max_level_distance(&right)? / left.norm().max(1.0));
        let ab = compose(&a, &b, depth)?;
        for x in [0.0, 2.0] {
            for xi in [1.0, -1.0] {
                let direct = a.leading().eval(x, xi) * b.leading().eval(x, xi);
                lead = lead.max((ab.leading().eval(x, xi) - &direct).norm() / direct.norm().max(1.0));
            }
        }
        let id = ClassicalSymbol::identity(dim, depth);
        unit = unit.max(compose(&id, &a, depth)?.max_level_distance(&a.truncated(depth)?)?);
    }
    Ok(vec![
        at_most(s, "associativity (A∘B)∘C = A∘(B∘C), relative", assoc, ctx.exact),
        at_most(s, "leading symbol multiplicative, relative", lead, ctx.exact),
        at_most(s, "Id∘A = A", unit, ctx.exact),
    ])
}

fn quantization_defect(ctx: &Ctx) -> Result<Vec<Check>, Failure> {
    let s = Suite::Composition;
    let n = 512usize;
    let mut rng = ctx.rng(4);
    let sampler = SymbolSampler { dim: 2, band: 3, depth: 4, scale: 1.0, decay: 0.5 };
    let a = sampler.symbol(&mut rng, Degree::ZERO);
    let b = sampler.symbol(&mut rng, Degree::ZERO);
    let product = quantize(&a, n)?.mul(&quantize(&b, n)?)?;
    let (lo, hi) = ((n / 8) as u64, (n / 2) as u64);
    let defects = (1..=4)
        .map(|j| Ok(quantize(&compose(&a, &b, j)?, n)?.sub(&product)?.operator_norm(|k: i64| (lo..=hi).contains(&k.unsigned_abs()))))
        .collect::<Result<Vec<f64>, Failure>>()?;
    let ratio = defects.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    Ok(vec![
        at_most(s, "Op(A∘_J B) - Op(A)Op(B) decreasing in J (max ratio)", ratio, 1.0),
        at_most(s, "Op(A∘_4 B) - Op(A)Op(B) on N/8 <= |k| <= N/2", defects[3], 1e-6),
    ])
}

fn loops(ctx: &Ctx, stream: u64, lie: &LieAlgebra, count: usize) -> Vec<LoopAlgebraElement> {
    let mut rng = ctx.rng(stream);
    let cutoff = ctx.band.max(4);
    (0..count).map(|_| LoopAlgebraElement::random_real(&mut rng, lie.dim(), cutoff, 1.0, 0.6)).collect()
}

fn loop_curvatures(ctx: &Ctx) -> Result<Vec<Check>, Failure> {
    let s = Suite::Loopgroup;
    let lie = LieAlgebra::su2();
    let depth = ctx.depth.max(1);
    let lc = Connection::new(&lie, ConnectionKind::LeviCivita, 0.5, depth);
    let tilde = Connection::new(&lie, ConnectionKind::Conjugation, 0.5, depth);
    let ls = loops(ctx, 5, &lie, 6);
    let (mut lead, mut flat, mut zero, mut sub, mut res) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY, 0.0f64);
    for pair in ls.chunks(2) {
        let (u, v) = (&pair[0], &pair[1]);
        let theta = lc.apply(u)?;
        let ad = ad_loop(&lie, u)?;
        for sheet in Sheet::BOTH {
            lead = lead.max(theta.leading().sheet(sheet).sub(&ad)?.norm());
        }
        flat = flat.max(tilde.curvature(u, v)?.components().iter().map(|c| c.norm()).fold(0.0, f64::max));
        let omega = lc.curvature(u, v)?;
        zero = zero.max(omega.leading().norm());
        sub = sub.min(omega.component(Degree::from_int(-1))?.map_or(0.0, |c| c.norm()));
        res = res.max(wodzicki_residue(&omega)?.norm());
    }
    Ok(vec![
        at_most(s, "σ_0(θ^{1/2}(U)) = ad_U", lead, ctx.exact),
        at_most(s, "Ω̃(U,V) = 0", flat, 1e-8),
        at_most(s, "σ_0(Ω^{1/2}(U,V)) = 0", zero, ctx.exact),
        at_least(s, "|σ_{-1}(Ω^{1/2}(U,V))| nonzero", sub, 1e-6),
        at_most(s, "res_w(Ω^{1/2}(U,V)) ≈ 0", res, 1e-8),
    ])
}

fn loop_chern_agreement(ctx: &Ctx) -> Result<Vec<Check>, Failure> {
    let lie = LieAlgebra::su2();
    let depth = ctx.depth.max(1);
    let ls = loops(ctx, 6, &lie, 2);
    let c = weighted_first_chern(&lie, &ls[0], &ls[1], depth)?;
    let ct = chern_conditional_trace(&lie, &ls[0], &ls[1], depth, 4096)?;
    let reference = c.value.norm().max(ct.extrapolated.norm()).max(ct.absolute_mass);
    let gap = (c.value - ct.extrapolated).norm() / reference;
    Ok(vec![at_most(Suite::Loopgroup, "symbolic Chern value vs conditional trace, relative", gap, 1e-2)])
}

fn chern_closedness(ctx: &Ctx) -> Result<Vec<Check>, Failure> {
    let lie = LieAlgebra::su2();
    let depth = ctx.depth.max(1);
    let ls = loops(ctx, 7, &lie, 60);
    let mut worst = 0.0f64;
    for t in ls.chunks(3) {
        let scale = std::cell::Cell::new(0.0f64);
        let beta = |x: &LoopAlgebraElement, y: &LoopAlgebraElement| {
            let c = weighted_first_chern(&lie, x, y, depth)?;
            scale.set(scale.get().max(c.scale));
            Ok(c.value)
        };
        let d = ce_differential(&lie, beta, &t[0], &t[1], &t[2])?;
        worst = worst.max(d.norm() / scale.get().max(f64::MIN_POSITIVE));
    }
    Ok(vec![at_most(Suite::Chern, "dβ = 0 on 20 triples, relative to |σ_{-1}(Ω)|", worst, 1e-6)])
}

fn transgression(ctx: &Ctx) -> Result<Vec<Check>, Failure> {
    let mut rng = ctx.rng(8);
    let su2 = LieAlgebra::su2();
    let su3 = LieAlgebra::su(3)?;
    let mut residual = 0.0f64;
    for (base, k) in [(&su2, 1usize), (&su3, 1), (&su3, 2)] {
        let n = base.dim();
        let coeffs: Vec<Vec<CMatrix>> =
            (0..3).map(|_| (0..n).map(|_| random_matrix(&mut rng, 2, MatrixKind::SpecialUnitary)).collect()).collect();
        let family = |t: f64| {
            (0..n)
                .map(|i| &coeffs[0][i] + &coeffs[1][i] * Complex64::new(t.sin(), 0.0) + &coeffs[2][i] * Complex64::new(t * t, 0.0))
                .collect::<Vec<_>>()
        };
        residual = residual.max(transgression_check(base, family, |m: &CMatrix| m.trace(), k, 0.4, 1e-2)?.residual);
    }
    Ok(vec![at_most(Suite::Chern, "transgression ∂_t tr Ω^k = d(...)", residual, 1e-4)])
}

/// `tr Ω` and `tr Ω∧Ω` expanded over pairings.
fn trace_power_by_pairings(omega: &AlgebraValued2Form, xs: &[Vec<f64>]) -> Result<Complex64, Failure> {
    let w = |i: usize, j: usize| -> Result<CMatrix, Failure> {
        Ok(omega.eval(&xs[i], &xs[j])?.coeff(0).cloned().unwrap_or_else(|| CMatrix::zeros(omega.fiber_dim(), omega.fiber_dim())))
    };
    Ok(match xs.len() {
        2 => w(0, 1)?.trace(),
        _ => (w(0, 1)? * w(2, 3)? - w(0, 2)? * w(1, 3)? + w(0, 3)? * w(1, 2)?).trace(),
    })
}

fn pullback(ctx: &Ctx) -> Result<Vec<Check>, Failure> {
    let mut rng = ctx.rng(9);
    let mut worst = 0.0f64;
    for (n, kind) in [(2, MatrixKind::SpecialUnitary), (3, MatrixKind::Unitary)] {
        for _ in 0..10 {
            let omega = random_constant_form(&mut rng, 4, n, kind);
            for k in [1usize, 2] {
                let xs: Vec<Vec<f64>> = (0..2 * k).map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
                let pulled = ck_f_pointwise(&omega, &CosphereDistribution::uniform_plus(), k, &xs)?;
                worst = worst.max((pulled - trace_power_by_pairings(&omega, &xs)?).norm());
            }
        }
    }
    Ok(vec![at_most(Suite::Chern, "c_k^f(Ω) = tr Ω^k, k = 1, 2 (su(2), u(3))", worst, 1e-12)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Ctx {
        Ctx { seed: 3, depth: 3, band: 2, modes: 2000, exact: 1e-10 }
    }

    #[test]
    fn fast_checks_pass() {
        for f in [residue_examples, commutator_traces, composition_laws, loop_curvatures, chern_closedness, pullback] {
            for c in f(&ctx()).unwrap() {
                assert!(c.pass, "{} = {:e}", c.name, c.value);
            }
        }
    }

    #[test]
    fn bounds_compare_in_the_right_direction() {
        assert!(at_most(Suite::Traces, "x", 1.0, 2.0).pass);
        assert!(!at_most(Suite::Traces, "x", 3.0, 2.0).pass);
        assert!(at_least(Suite::Traces, "x", 3.0, 2.0).pass);
        assert!(!at_least(Suite::Traces, "x", f64::NAN, 2.0).pass);
    }

    #[test]
    fn suites_expand() {
        assert_eq!(Suite::All.members().len(), 4);
        assert!(Suite::members(Suite::All).iter().all(|s| !checks_for(*s).is_empty()));
    }
}
