//! Reproducible random fields.
//!
//! Every sampler is a ChaCha8 stream keyed by `(seed, stream)`, so parallel
//! trials can each take their own stream and still reproduce bit-for-bit.

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::grid::{inverse_transform, Field, Grid, Spectrum};
use num_traits::Float;

pub struct FieldSampler {
    rng: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl FieldSampler {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        FieldSampler { rng, seed, stream }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Gaussian random field with i.i.d. normal spectral coefficients on the
    /// modes with every `|k| < n/4`, zero elsewhere.
    pub fn band_limited(&mut self, grid: Grid) -> Field {
        self.band_limited_modes(grid, (grid.n() / 4).max(1))
    }

    /// Same as [`FieldSampler::band_limited`] with the modes `|k| < cutoff`.
    pub fn band_limited_modes(&mut self, grid: Grid, cutoff: usize) -> Field {
        let cutoff = cutoff as i64;
        let mut coefficients = alloc::vec![Complex64::new(0.0, 0.0); grid.len()];
        for (flat, c) in coefficients.iter_mut().enumerate() {
            let idx = grid.multi_index(flat);
            let inside = idx[..grid.dim()]
                .iter()
                .all(|&j| grid.wavenumber(j).abs() < cutoff);
            if inside {
                *c = Complex64::new(self.normal(), self.normal());
            }
        }
        let spectrum = Spectrum::from_parts(grid, coefficients);
        inverse_transform(&spectrum).expect("finite spectrum gives a finite field")
    }

    /// Band-limited field under a Gaussian envelope of the given radius,
    /// centred at a random point within `spread` of the origin.
    pub fn localized(&mut self, grid: Grid, radius: f64, spread: f64) -> Field {
        let noise = self.band_limited(grid);
        let mut center = [0.0; 3];
        for c in center.iter_mut().take(grid.dim()) {
            *c = spread * (2.0 * self.uniform() - 1.0);
        }
        let envelope = Field::from_fn(grid, |x| {
            let r2: f64 = x.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum();
            (-r2 / (radius * radius)).exp()
        });
        noise
            .zip_with(&envelope, |a, b| a * b)
            .expect("same grid")
    }
}
