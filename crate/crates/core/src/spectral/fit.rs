use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Basis for the small-ε expansion
/// `Σ_j a_j ε^{(j−a−n)/q} + b₀ log ε + c + Σ_m r_m ε^{m/q}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FitSpec {
    /// Order `a` of the operator.
    pub order: i32,
    /// Dimension `n` of the base manifold (1 for the circle).
    pub base_dim: i32,
    /// Order `q` of the weight.
    pub weight_order: f64,
    /// Include `log ε`. Always included when `a = −n`.
    pub with_log: bool,
    /// Number of positive powers `ε^{m/q}`, `m = 1..`, modelling the leading
    /// part of the bounded remainder.
    pub remainder_terms: usize,
    /// Reject the fit when the RMS residual exceeds this value.
    pub residual_threshold: Option<f64>,
}

impl FitSpec {
    pub fn new(order: i32, weight_order: f64) -> Self {
        FitSpec {
            order,
            base_dim: 1,
            weight_order,
            with_log: false,
            remainder_terms: 1,
            residual_threshold: None,
        }
    }

    pub fn uses_log(&self) -> bool {
        self.with_log || self.order == -self.base_dim
    }

    /// Divergent exponents `(j−a−n)/q` for `j = 0..a+n`; the exponent 0 merges
    /// into the constant term.
    pub fn exponents(&self) -> Vec<f64> {
        let top = self.order + self.base_dim;
        (0..=top.max(-1))
            .map(|j| (j - top) as f64 / self.weight_order)
            .filter(|e| *e != 0.0)
            .collect()
    }

    fn remainder_exponents(&self) -> Vec<f64> {
        (1..=self.remainder_terms).map(|m| m as f64 / self.weight_order).collect()
    }
}

/// Least-squares coefficients of the small-ε expansion of a heat trace.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticFit {
    /// Exponents of the divergent powers, most singular first.
    pub exponents: Vec<f64>,
    /// Coefficients `a_j` of [`Self::exponents`].
    pub coefficients: Vec<Complex64>,
    pub log_coefficient: Option<Complex64>,
    /// The constant term: the finite part of the expansion.
    pub finite_part: Complex64,
    /// Positive powers fitted to the remainder, with their coefficients.
    pub remainder: Vec<(f64, Complex64)>,
    /// Root-mean-square residual over the grid.
    pub residual: f64,
    /// Error bars for `coefficients`, `log_coefficient`, `finite_part` (in that
    /// order): the coefficient shift a perturbation of size `max |residual|`
    /// can cause.
    pub error_bars: Vec<f64>,
    pub epsilon_grid: Vec<f64>,
}

impl AsymptoticFit {
    /// The leading coefficient `a₀`, if a divergent power was fitted.
    pub fn a0(&self) -> Option<Complex64> {
        self.coefficients.first().copied()
    }

    pub fn a0_error_bar(&self) -> Option<f64> {
        (!self.coefficients.is_empty()).then(|| self.error_bars[0])
    }

    pub fn log_error_bar(&self) -> Option<f64> {
        self.log_coefficient.map(|_| self.error_bars[self.coefficients.len()])
    }
}

enum Column {
    Power(f64),
    Log,
    Constant,
}

impl Column {
    fn eval(&self, eps: f64) -> f64 {
        match self {
            Column::Power(p) => eps.powf(*p),
            Column::Log => eps.ln(),
            Column::Constant => 1.0,
        }
    }
}

/// Fits `samples = [(ε, Tr(A e^{−εQ}))]` to the expansion described by `spec`.
pub fn fit_expansion(samples: &[(f64, Complex64)], spec: &FitSpec) -> Result<AsymptoticFit> {
    if !(spec.weight_order > 0.0) {
        return Err(Error::InvalidArgument(format!("weight order must be positive, got {}", spec.weight_order)));
    }
    let exponents = spec.exponents();
    let mut columns: Vec<Column> = exponents.iter().map(|&e| Column::Power(e)).collect();
    if spec.uses_log() {
        columns.push(Column::Log);
    }
    columns.push(Column::Constant);
    let remainder_exponents = spec.remainder_exponents();
    columns.extend(remainder_exponents.iter().map(|&e| Column::Power(e)));

    let (rows, cols) = (samples.len(), columns.len());
    if rows < cols + 2 {
        return Err(Error::TooFewSamples { have: rows, need: cols + 2 });
    }
    if samples.iter().any(|(e, _)| !(*e > 0.0)) {
        return Err(Error::InvalidArgument("ε samples must be positive".into()));
    }

    let raw = DMatrix::from_fn(rows, cols, |i, j| columns[j].eval(samples[i].0));
    let norms: Vec<f64> = (0..cols).map(|j| raw.column(j).norm()).collect();
    let scaled = DMatrix::from_fn(rows, cols, |i, j| raw[(i, j)] / norms[j]);
    let svd = scaled.clone().svd(true, true);
    let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
    if smin <= 1e-12 * smax {
        return Err(Error::RankDeficient(smax / smin.max(f64::MIN_POSITIVE)));
    }
    let pinv = svd.pseudo_inverse(0.0).map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let solve = |y: DVector<f64>| -> DVector<f64> {
        let c = &pinv * y;
        DVector::from_fn(cols, |j, _| c[j] / norms[j])
    };
    let y_re = DVector::from_fn(rows, |i, _| samples[i].1.re);
    let y_im = DVector::from_fn(rows, |i, _| samples[i].1.im);
    let c_re = solve(y_re.clone());
    let c_im = solve(y_im.clone());
    let coef: Vec<Complex64> = (0..cols).map(|j| Complex64::new(c_re[j], c_im[j])).collect();

    let r_re = &y_re - &raw * &c_re;
    let r_im = &y_im - &raw * &c_im;
    let res: Vec<f64> = (0..rows).map(|i| Complex64::new(r_re[i], r_im[i]).norm()).collect();
    let residual = (res.iter().map(|r| r * r).sum::<f64>() / rows as f64).sqrt();
    if let Some(threshold) = spec.residual_threshold {
        if residual > threshold {
            return Err(Error::ResidualTooLarge { residual, threshold });
        }
    }
    let rmax = res.iter().copied().fold(0.0, f64::max);
    let error_bars: Vec<f64> = (0..cols)
        .map(|j| rmax * pinv.row(j).iter().map(|v| v.abs()).sum::<f64>() / norms[j])
        .collect();

    let n_pow = exponents.len();
    let mut idx = n_pow;
    let log_coefficient = spec.uses_log().then(|| {
        idx += 1;
        coef[idx - 1]
    });
    let finite_part = coef[idx];
    let remainder = remainder_exponents.iter().copied().zip(coef[idx + 1..].iter().copied()).collect();
    Ok(AsymptoticFit {
        exponents,
        coefficients: coef[..n_pow].to_vec(),
        log_coefficient,
        finite_part,
        remainder,
        residual,
        error_bars: error_bars[..=idx].to_vec(),
        epsilon_grid: samples.iter().map(|(e, _)| *e).collect(),
    })
}
