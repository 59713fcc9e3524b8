//! JSON shapes for symbols, Lie algebras, loop elements and reports, with
//! conversions to and from the library types.

use serde::{Deserialize, Serialize};
use symcalc::lie::LieAlgebra;
use symcalc::loop_geometry::LoopAlgebraElement;
use symcalc::spectral::AsymptoticFit;
use symcalc::{CMatrix, ClassicalSymbol, Complex64, Degree, HomogeneousComponent, MatrixLoop, Sheet};

use crate::Failure;

pub type JsonComplex = [f64; 2];
type JsonMatrix = Vec<Vec<JsonComplex>>;

pub fn complex(z: Complex64) -> JsonComplex {
    [z.re, z.im]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolJson {
    pub order: f64,
    pub fiber_dim: usize,
    pub components: Vec<ComponentJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentJson {
    pub degree: f64,
    #[serde(default)]
    pub plus: Vec<(i64, JsonMatrix)>,
    #[serde(default)]
    pub minus: Vec<(i64, JsonMatrix)>,
}

fn matrix(m: &JsonMatrix, d: usize, what: &str) -> Result<CMatrix, Failure> {
    if m.len() != d || m.iter().any(|r| r.len() != d) {
        return Err(Failure::Usage(format!("{what}: expected a {d}x{d} matrix")));
    }
    Ok(CMatrix::from_fn(d, d, |i, j| Complex64::new(m[i][j][0], m[i][j][1])))
}

fn matrix_json(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| complex(m[(i, j)])).collect()).collect()
}

fn sheet_loop(modes: &[(i64, JsonMatrix)], d: usize, what: &str) -> Result<MatrixLoop, Failure> {
    let mats = modes
        .iter()
        .map(|(k, m)| Ok((*k, matrix(m, d, &format!("{what}, mode {k}"))?)))
        .collect::<Result<Vec<_>, Failure>>()?;
    Ok(MatrixLoop::from_modes(d, mats)?)
}

fn sheet_json(l: &MatrixLoop) -> Vec<(i64, JsonMatrix)> {
    l.modes().filter(|(_, m)| m.iter().any(|z| z.norm() != 0.0)).map(|(k, m)| (k, matrix_json(m))).collect()
}

impl SymbolJson {
    pub fn to_symbol(&self) -> Result<ClassicalSymbol, Failure> {
        if self.fiber_dim == 0 {
            return Err(Failure::Usage("fiber_dim must be positive".into()));
        }
        let order = Degree::try_from_f64(self.order)?;
        let d = self.fiber_dim;
        let comps = self
            .components
            .iter()
            .map(|c| {
                let what = format!("component of degree {}", c.degree);
                HomogeneousComponent::new(
                    Degree::try_from_f64(c.degree)?,
                    sheet_loop(&c.plus, d, &format!("{what}, plus sheet"))?,
                    sheet_loop(&c.minus, d, &format!("{what}, minus sheet"))?,
                )
                .map_err(Failure::from)
            })
            .collect::<Result<Vec<_>, Failure>>()?;
        Ok(ClassicalSymbol::from_components(order, comps)?)
    }

    pub fn from_symbol(a: &ClassicalSymbol) -> Self {
        SymbolJson {
            order: a.order().value(),
            fiber_dim: a.fiber_dim(),
            components: a
                .components()
                .iter()
                .map(|c| ComponentJson {
                    degree: c.degree().value(),
                    plus: sheet_json(c.sheet(Sheet::Plus)),
                    minus: sheet_json(c.sheet(Sheet::Minus)),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LieJson {
    pub dim: usize,
    pub structure_constants: Vec<Vec<Vec<f64>>>,
}

/// `su2`, `su(n)`, or a path to a `{dim, structure_constants}` file.
pub fn lie_algebra(spec: &str) -> Result<LieAlgebra, Failure> {
    if spec == "su2" {
        return Ok(LieAlgebra::su2());
    }
    if let Some(n) = spec.strip_prefix("su(").and_then(|r| r.strip_suffix(')')) {
        let n: usize = n.parse().map_err(|_| Failure::Usage(format!("bad algebra name {spec}")))?;
        return Ok(LieAlgebra::su(n)?);
    }
    let parsed: LieJson = crate::read_json(std::path::Path::new(spec))?;
    Ok(LieAlgebra::new(parsed.dim, &parsed.structure_constants)?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopJson {
    pub modes: Vec<LoopModeJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopModeJson {
    pub k: i64,
    pub vector: Vec<JsonComplex>,
}

impl LoopJson {
    pub fn to_loop(&self, dim: usize) -> Result<LoopAlgebraElement, Failure> {
        if let Some(m) = self.modes.iter().find(|m| m.vector.len() != dim) {
            return Err(Failure::Usage(format!("mode {} has {} entries, algebra has dimension {dim}", m.k, m.vector.len())));
        }
        let modes = self.modes.iter().map(|m| (m.k, m.vector.iter().map(|v| Complex64::new(v[0], v[1])).collect()));
        Ok(LoopAlgebraElement::from_modes(dim, modes)?)
    }
}

/// Fit coefficients as JSON.
#[derive(Clone, Debug, Serialize)]
pub struct FitJson {
    pub exponents: Vec<f64>,
    pub coefficients: Vec<JsonComplex>,
    pub log_coefficient: Option<JsonComplex>,
    pub finite_part: JsonComplex,
    pub residual: f64,
    pub remainder: Vec<(f64, JsonComplex)>,
    pub error_bars: Vec<f64>,
}

impl From<&AsymptoticFit> for FitJson {
    fn from(f: &AsymptoticFit) -> Self {
        FitJson {
            exponents: f.exponents.clone(),
            coefficients: f.coefficients.iter().copied().map(complex).collect(),
            log_coefficient: f.log_coefficient.map(complex),
            finite_part: complex(f.finite_part),
            residual: f.residual,
            remainder: f.remainder.iter().map(|&(e, c)| (e, complex(c))).collect(),
            error_bars: f.error_bars.clone(),
        }
    }
}
