use std::path::Path;

use serde::Serialize;
use symcalc::loop_geometry::{chern_conditional_trace, weighted_first_chern, Connection, ConnectionKind, LoopAlgebraElement};
use symcalc::spectral::{fit_expansion, heat_trace_sweep, log_grid, quantize, weight_matrix, FitSpec, HeatWeight};
use symcalc::traces::{self, predicted_a0, predicted_b0, wodzicki_residue, CosphereFunction};
use symcalc::{ClassicalSymbol, Complex64, CosphereDistribution, Degree, Sheet};

use crate::schema::{complex, lie_algebra, FitJson, JsonComplex, LoopJson, SymbolJson};
use crate::{emit, read_json, Failure, RunConfig};

/// Loads a symbol and applies `--band`, returning the dropped mass.
fn load_symbol(path: &Path, config: &RunConfig) -> Result<(ClassicalSymbol, Option<f64>), Failure> {
    let a = read_json::<SymbolJson>(path)?.to_symbol()?;
    Ok(match config.band {
        Some(b) => {
            let (a, dropped) = a.band_limited(b);
            (a, Some(dropped))
        }
        None => (a, None),
    })
}

#[derive(Serialize)]
struct ZeroModes {
    plus: JsonComplex,
    minus: JsonComplex,
}

#[derive(Serialize)]
struct ResidueReport {
    residue: JsonComplex,
    /// Zero Fourier modes of `tr σ₋₁` on each sheet; the residue is their sum.
    zero_modes: ZeroModes,
    band_truncation: Option<f64>,
    seed: u64,
    config: RunConfig,
}

pub fn residue(path: &Path, config: RunConfig) -> Result<(), Failure> {
    let (a, band_truncation) = load_symbol(path, &config)?;
    let residue = wodzicki_residue(&a)?;
    let (plus, minus) = match a.component(Degree::from_int(-1))? {
        Some(c) => {
            let (p, m) = c.trace();
            (p.mean(), m.mean())
        }
        None => Default::default(),
    };
    let report = ResidueReport {
        residue: complex(residue),
        zero_modes: ZeroModes { plus: complex(plus), minus: complex(minus) },
        band_truncation,
        seed: config.seed,
        config,
    };
    emit(&report, &report.config)
}

/// Parses `uniform+`, `uniform-`, `uniform`, `delta:X0:±`, `mode:K:±` and
/// `d(...)`.
pub fn parse_distribution(s: &str) -> Result<CosphereDistribution, Failure> {
    let bad = || Failure::Usage(format!("unknown distribution {s:?}"));
    let sheet = |t: &str| match t {
        "+" => Ok(Sheet::Plus),
        "-" => Ok(Sheet::Minus),
        _ => Err(bad()),
    };
    if let Some(inner) = s.strip_prefix("d(").and_then(|r| r.strip_suffix(')')) {
        return Ok(CosphereDistribution::derivative(parse_distribution(inner)?));
    }
    match s {
        "uniform+" => return Ok(CosphereDistribution::uniform_plus()),
        "uniform-" => return Ok(CosphereDistribution::uniform_minus()),
        "uniform" => return Ok(CosphereDistribution::uniform_both()),
        _ => {}
    }
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["delta", x0, sh] => Ok(CosphereDistribution::delta(x0.parse().map_err(|_| bad())?, sheet(sh)?)),
        ["mode", k, sh] => Ok(CosphereDistribution::mode(k.parse().map_err(|_| bad())?, sheet(sh)?)),
        _ => Err(bad()),
    }
}

#[derive(Serialize)]
struct TraceReport {
    trace: JsonComplex,
    band_truncation: Option<f64>,
    seed: u64,
    config: RunConfig,
}

pub fn symbol_trace(path: &Path, dist: &str, config: RunConfig) -> Result<(), Failure> {
    let f = parse_distribution(dist)?;
    let (a, band_truncation) = load_symbol(path, &config)?;
    let value = traces::symbol_trace(&f, &a)?;
    let report = TraceReport { trace: complex(value), band_truncation, seed: config.seed, config };
    emit(&report, &report.config)
}

#[derive(Serialize)]
struct Comparison {
    fitted: JsonComplex,
    predicted: JsonComplex,
    relative_diff: f64,
    error_bar: Option<f64>,
}

impl Comparison {
    fn new(fitted: Complex64, predicted: Complex64, error_bar: Option<f64>) -> Self {
        let diff = (fitted - predicted).norm();
        let relative_diff = if predicted.norm() > 0.0 { diff / predicted.norm() } else { diff };
        Comparison { fitted: complex(fitted), predicted: complex(predicted), relative_diff, error_bar }
    }
}

#[derive(Serialize)]
struct HeatFitReport {
    #[serde(flatten)]
    fit: FitJson,
    a0: Option<Comparison>,
    b0: Option<Comparison>,
    weight_order: f64,
    truncation_warning: Option<f64>,
    band_truncation: Option<f64>,
    seed: u64,
    config: RunConfig,
}

#[derive(Serialize)]
struct SweepRow {
    epsilon: f64,
    trace_re: f64,
    trace_im: f64,
}

pub fn heat_fit(path: &Path, s: f64, log: bool, csv_path: Option<&Path>, config: RunConfig) -> Result<(), Failure> {
    if !(s > 0.0) {
        return Err(Failure::Usage(format!("--weight-exponent must be positive, got {s}")));
    }
    let (a, band_truncation) = load_symbol(path, &config)?;
    let order = a
        .order()
        .as_int()
        .ok_or_else(|| Failure::Usage(format!("heat-fit needs an integer order, got {}", a.order())))?;
    let q = 2.0 * s;
    let weight = HeatWeight::new(&weight_matrix(s, config.modes, a.fiber_dim(), 1.0))?;
    let grid = log_grid(config.eps_min, config.eps_max, config.eps_count);
    let sweep = heat_trace_sweep(&quantize(&a, config.modes)?, &weight, &grid)?;

    if let Some(p) = csv_path {
        let mut w = csv::Writer::from_path(p).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display())))?;
        for &(epsilon, t) in &sweep.samples {
            w.serialize(SweepRow { epsilon, trace_re: t.re, trace_im: t.im }).map_err(|e| Failure::Usage(e.to_string()))?;
        }
        w.flush().map_err(|e| Failure::Usage(e.to_string()))?;
    }

    let mut spec = FitSpec::new(order, q);
    spec.with_log = log;
    spec.residual_threshold = config.tol;
    let fit = fit_expansion(&sweep.samples, &spec)?;
    // Weights here have scalar leading symbol |ξ|^q, so f_Q = 1.
    let a0 = match (fit.a0(), predicted_a0(&a, q, &CosphereFunction::constant(1.0))) {
        (Some(f), Ok(p)) => Some(Comparison::new(f, p, fit.a0_error_bar())),
        _ => None,
    };
    let b0 = match (fit.log_coefficient, predicted_b0(&a, q)) {
        (Some(f), Ok(p)) => Some(Comparison::new(f, p, fit.log_error_bar())),
        _ => None,
    };
    let report = HeatFitReport {
        fit: FitJson::from(&fit),
        a0,
        b0,
        weight_order: q,
        truncation_warning: sweep.truncation_warning,
        band_truncation,
        seed: config.seed,
        config,
    };
    emit(&report, &report.config)
}

#[derive(Serialize)]
struct CurvatureReport {
    curvature: SymbolJson,
    /// `(degree, norm)` for each homogeneous level.
    level_norms: Vec<(f64, f64)>,
    residue: JsonComplex,
    seed: u64,
    config: RunConfig,
}

fn load_pair(u: &Path, v: &Path, dim: usize) -> Result<(LoopAlgebraElement, LoopAlgebraElement), Failure> {
    Ok((read_json::<LoopJson>(u)?.to_loop(dim)?, read_json::<LoopJson>(v)?.to_loop(dim)?))
}

pub fn loop_curvature(u: &Path, v: &Path, algebra: &str, kind: ConnectionKind, s: f64, config: RunConfig) -> Result<(), Failure> {
    let lie = lie_algebra(algebra)?;
    let (u, v) = load_pair(u, v, lie.dim())?;
    let omega = Connection::new(&lie, kind, s, config.depth).curvature(&u, &v)?;
    let report = CurvatureReport {
        curvature: SymbolJson::from_symbol(&omega),
        level_norms: omega.components().iter().map(|c| (c.degree().value(), c.norm())).collect(),
        residue: complex(wodzicki_residue(&omega)?),
        seed: config.seed,
        config,
    };
    emit(&report, &report.config)
}

#[derive(Serialize)]
struct ConditionalJson {
    partial_sum: JsonComplex,
    extrapolated: JsonComplex,
    error_estimate: f64,
    absolute_mass: f64,
}

#[derive(Serialize)]
struct ChernReport {
    value: JsonComplex,
    /// Norm of the curvature component the value is computed from.
    scale: f64,
    conditional_trace: ConditionalJson,
    seed: u64,
    config: RunConfig,
}

pub fn chern(u: &Path, v: &Path, algebra: &str, config: RunConfig) -> Result<(), Failure> {
    let lie = lie_algebra(algebra)?;
    let (u, v) = load_pair(u, v, lie.dim())?;
    let c = weighted_first_chern(&lie, &u, &v, config.depth)?;
    let ct = chern_conditional_trace(&lie, &u, &v, config.depth, config.modes)?;
    let report = ChernReport {
        value: complex(c.value),
        scale: c.scale,
        conditional_trace: ConditionalJson {
            partial_sum: complex(ct.partial_sum),
            extrapolated: complex(ct.extrapolated),
            error_estimate: ct.error_estimate,
            absolute_mass: ct.absolute_mass,
        },
        seed: config.seed,
        config,
    };
    emit(&report, &report.config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use symcalc::traces::DistributionKind;

    #[test]
    fn distribution_names() {
        assert_eq!(parse_distribution("uniform+").unwrap(), CosphereDistribution::uniform_plus());
        assert_eq!(parse_distribution("delta:0.5:-").unwrap(), CosphereDistribution::delta(0.5, Sheet::Minus));
        assert_eq!(parse_distribution("mode:-2:+").unwrap(), CosphereDistribution::mode(-2, Sheet::Plus));
        let d = parse_distribution("d(d(uniform))").unwrap();
        let DistributionKind::Derivative(inner) = d.kind else { panic!("expected a derivative") };
        assert!(matches!(inner.kind, DistributionKind::Derivative(_)));
        for bad in ["", "uniform*", "delta:x:+", "mode:1:*", "d(uniform", "mode:1"] {
            assert!(parse_distribution(bad).is_err(), "{bad}");
        }
    }
}
