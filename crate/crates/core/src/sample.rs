//! Seeded random generators for band-limited test data.

use num_complex::Complex64;
use rand::Rng;

use crate::degree::Degree;
use crate::fourier::{CMatrix, MatrixLoop};
use crate::symbol::{ClassicalSymbol, HomogeneousComponent};

/// Draws band-limited matrix loops and symbols with entries uniform in
/// `[-scale, scale]` (real and imaginary parts independently).
#[derive(Clone, Copy, Debug)]
pub struct SymbolSampler {
    pub dim: usize,
    pub band: usize,
    pub depth: usize,
    pub scale: f64,
    /// Coefficients of mode `k` are damped by `decay^|k|`.
    pub decay: f64,
}

impl Default for SymbolSampler {
    fn default() -> Self {
        SymbolSampler { dim: 1, band: 2, depth: 2, scale: 1.0, decay: 0.5 }
    }
}

impl SymbolSampler {
    pub fn complex<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * self.scale
    }

    pub fn matrix<R: Rng + ?Sized>(&self, rng: &mut R) -> CMatrix {
        CMatrix::from_fn(self.dim, self.dim, |_, _| self.complex(rng))
    }

    pub fn matrix_loop<R: Rng + ?Sized>(&self, rng: &mut R) -> MatrixLoop {
        let b = self.band as i64;
        MatrixLoop::from_modes(
            self.dim,
            (-b..=b).map(|k| (k, self.matrix(rng) * Complex64::new(self.decay.powi(k.abs() as i32), 0.0))),
        )
        .expect("sampler shapes are consistent")
    }

    /// A symbol of the given order with every level `0..=depth` populated.
    pub fn symbol<R: Rng + ?Sized>(&self, rng: &mut R, order: Degree) -> ClassicalSymbol {
        let comps = (0..=self.depth)
            .map(|j| {
                HomogeneousComponent::new(order.minus_steps(j), self.matrix_loop(rng), self.matrix_loop(rng))
                    .expect("sampler shapes are consistent")
            })
            .collect();
        ClassicalSymbol::from_components(order, comps).expect("sampler shapes are consistent")
    }
}
