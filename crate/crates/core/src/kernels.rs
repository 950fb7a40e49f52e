//! Bessel convolution kernel, and the singular-integral form of `(I-Δ)^α`.
//!
//! Both are independent routes to the operators that [`crate::grid`]
//! realizes spectrally, and serve as oracles against it.
//!
//! The kernel integral is written with `exp(-π|x|²/t)`, i.e. in the Fourier
//! convention with `2π` in the exponent. Evaluating its t-integral for
//! `N = 1, α = 2` gives exactly `½e^{-|x|}`, the kernel of the angular symbol
//! `(1+ω²)^{-1}`, so no argument rescaling is needed to pair `G_α` with the
//! multiplier `(1+|ξ|²)^{-α/2}` on angular frequencies.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::grid::{apply_multiplier, inverse_transform, make_grid, transform, Field, Grid, Spectrum};
use crate::quadrature;
use crate::special::{bessel_k, zeta};

/// One evaluation of `G_α(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub radius: f64,
    pub order: f64,
    pub dim: usize,
    pub value: f64,
    pub est_error: f64,
}

/// Relative accuracy targeted by [`bessel_kernel`].
pub const KERNEL_REL_TOL: f64 = 1e-9;

/// Evaluates `G_α` at `|x| = radius` in dimension `dim` by adaptive
/// quadrature of its t-integral after the substitution `t = e^s`.
pub fn bessel_kernel(radius: f64, alpha: f64, dim: usize) -> Result<KernelEval> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(invalid("radius", "must be positive"));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(invalid("alpha", "kernel order must be positive"));
    }
    if !(1..=3).contains(&dim) {
        return Err(invalid("dim", "must be 1, 2 or 3"));
    }
    let a = PI * radius * radius;
    let b = 1.0 / (4.0 * PI);
    let power = 0.5 * (alpha - dim as f64);
    let log_integrand = |s: f64| -a * (-s).exp() - b * s.exp() + power * s;
    // d/ds of the log-integrand is strictly decreasing; bisect for its root.
    let slope = |s: f64| a * (-s).exp() - b * s.exp() + power;
    let (mut lo, mut hi) = (-200.0, 200.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let peak_s = 0.5 * (lo + hi);
    let peak = log_integrand(peak_s);
    let cutoff = peak - 60.0;
    let mut s_lo = peak_s - 1.0;
    while log_integrand(s_lo) > cutoff {
        s_lo -= 1.0;
    }
    let mut s_hi = peak_s + 1.0;
    while log_integrand(s_hi) > cutoff {
        s_hi += 1.0;
    }
    let est = quadrature::integrate(
        |s| (log_integrand(s) - peak).exp(),
        s_lo,
        s_hi,
        0.01 * KERNEL_REL_TOL,
        0.0,
        2000,
    );
    let prefactor =
        peak.exp() / ((4.0 * PI).powf(0.5 * alpha) * libm::tgamma(0.5 * alpha));
    let value = est.value * prefactor;
    let est_error = est.est_error * prefactor;
    if !est.converged || !(value.is_finite() && value > 0.0) {
        return Err(Error::QuadratureFailed { value, est_error });
    }
    Ok(KernelEval {
        radius,
        order: alpha,
        dim,
        value,
        est_error,
    })
}

/// Fine-grid refinement factor used by the singular integral.
pub const DEFAULT_UPSAMPLE: usize = 8;

/// Largest `|u|` allowed on the box edge, relative to `max|u|`.
pub const EDGE_DECAY: f64 = 1e-6;

/// The pointwise operator
/// `u ↦ c·P.V.∫ (u(x)-u(y)) |x-y|^{-ν} K_ν(|x-y|) dy + u(x)`, `ν = (N+2α)/2`,
/// in one dimension, with `c` calibrated against the spectral multiplier.
///
/// The principal value is taken in symmetric form: for `z > 0` the integrand
/// `(2u(x) - u(x+z) - u(x-z)) k(z)` behaves like `z^{1-2α}` at the origin.
/// It is summed by the trapezoid rule on a spectrally refined grid, and the
/// leading endpoint error `-ζ(2α-1)·G₀·h^{2-2α}` is added back, with `G₀` fixed
/// by `u''(x)` and the small-argument limit of `K_ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseOperator {
    alpha: f64,
    constant: f64,
    upsample: usize,
}

impl PointwiseOperator {
    /// Uses a known constant.
    pub fn with_constant(alpha: f64, constant: f64) -> Result<Self> {
        check_order(alpha)?;
        if !(constant.is_finite() && constant > 0.0) {
            return Err(invalid("constant", "must be positive"));
        }
        Ok(PointwiseOperator {
            alpha,
            constant,
            upsample: DEFAULT_UPSAMPLE,
        })
    }

    /// Least-squares fit of the constant so that the operator matches
    /// `apply_multiplier(u, α)` on `u = e^{-x²}` (`n = 256`, `L = 40`).
    pub fn calibrate(alpha: f64) -> Result<Self> {
        check_order(alpha)?;
        let grid = make_grid(1, 256, 40.0)?;
        let reference = Field::from_fn(grid, |x| (-x[0] * x[0]).exp());
        let mut op = PointwiseOperator {
            alpha,
            constant: 1.0,
            upsample: DEFAULT_UPSAMPLE,
        };
        let integral = op.singular_integral(&reference)?;
        let target = apply_multiplier(&reference, alpha)?.sub(&reference)?;
        let num: f64 = integral.values().iter().zip(target.values()).map(|(a, b)| a * b).sum();
        let den: f64 = integral.values().iter().map(|a| a * a).sum();
        op.constant = num / den;
        Ok(op)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The calibrated `c_{1,α}`.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn upsample(&self) -> usize {
        self.upsample
    }

    pub fn with_upsample(mut self, factor: usize) -> Self {
        self.upsample = factor.max(1);
        self
    }

    /// `(I-Δ)^α u` at every grid point.
    pub fn apply(&self, u: &Field) -> Result<Field> {
        let integral = self.singular_integral(u)?;
        integral.zip_with(u, |j, v| self.constant * j + v)
    }

    /// `(I-Δ)^α u` at grid point `index`.
    pub fn apply_at(&self, u: &Field, index: usize) -> Result<f64> {
        if index >= u.grid().len() {
            return Err(invalid("index", "outside the grid"));
        }
        let fine = self.prepare(u)?;
        Ok(self.constant * fine.integral_at(index * self.upsample) + u.values()[index])
    }

    /// The principal-value integral without the constant, at every point.
    pub fn singular_integral(&self, u: &Field) -> Result<Field> {
        let fine = self.prepare(u)?;
        let values = (0..u.grid().len())
            .map(|i| fine.integral_at(i * self.upsample))
            .collect();
        Field::from_values(*u.grid(), values)
    }

    fn prepare(&self, u: &Field) -> Result<FineData> {
        let grid = u.grid();
        if grid.dim() != 1 {
            return Err(invalid("u", "the pointwise formula is implemented for dim = 1"));
        }
        let scale = u.max_abs();
        if u.boundary_max_abs() > EDGE_DECAY * scale {
            return Err(Error::NotLocalized {
                value: u.boundary_max_abs(),
            });
        }
        let fine_grid = Grid::new(1, grid.n() * self.upsample, grid.lengths()[0])?;
        let values = refine(u, fine_grid)?;
        let second = second_derivative(&values)?;
        let h = fine_grid.spacing(0);
        let nu = 0.5 + self.alpha;
        let half = fine_grid.n() / 2;
        let kernel: Vec<f64> = (1..=half)
            .map(|m| {
                let z = m as f64 * h;
                bessel_k(nu, z) / z.powf(nu)
            })
            .collect();
        // Symmetric integrand ~ G₀ z^β near 0, β = 1-2α.
        let beta = 1.0 - 2.0 * self.alpha;
        let small_limit = libm::tgamma(nu) * 2.0.powf(nu - 1.0);
        let correction = -zeta(-beta) * h.powf(1.0 + beta);
        Ok(FineData {
            values: values.into_values(),
            second: second.into_values(),
            kernel,
            h,
            small_limit,
            correction,
        })
    }
}

/// Calibrates and applies the pointwise operator at a single grid point.
pub fn pointwise_apply(u: &Field, index: usize, alpha: f64) -> Result<f64> {
    PointwiseOperator::calibrate(alpha)?.apply_at(u, index)
}

fn check_order(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid("alpha", "the singular-integral form needs 0 < alpha < 1"))
    }
}

struct FineData {
    values: Vec<f64>,
    second: Vec<f64>,
    kernel: Vec<f64>,
    h: f64,
    small_limit: f64,
    correction: f64,
}

impl FineData {
    fn integral_at(&self, i: usize) -> f64 {
        let n = self.values.len();
        let ux = self.values[i];
        let mut sum = 0.0;
        for (m, k) in self.kernel.iter().enumerate() {
            let step = m + 1;
            let plus = self.values[(i + step) % n];
            let minus = self.values[(i + n - step % n) % n];
            // The Nyquist offset is reached from both sides; count it once.
            let weight = if 2 * step == n { 0.5 } else { 1.0 };
            sum += weight * (2.0 * ux - plus - minus) * k;
        }
        let g0 = -self.second[i] * self.small_limit;
        sum * self.h + self.correction * g0
    }
}

/// Band-limited interpolation of `u` onto a finer grid of the same box.
fn refine(u: &Field, fine: Grid) -> Result<Field> {
    let coarse = u.grid();
    let n = coarse.n();
    let m = fine.n();
    let spectrum = transform(u);
    let mut padded = alloc::vec![Complex64::new(0.0, 0.0); m];
    let scale = m as f64 / n as f64;
    for (j, c) in spectrum.coefficients().iter().enumerate() {
        let k = coarse.wavenumber(j);
        if n.is_multiple_of(2) && 2 * j == n {
            padded[n / 2] += c * (0.5 * scale);
            padded[m - n / 2] += c * (0.5 * scale);
        } else {
            padded[k.rem_euclid(m as i64) as usize] += c * scale;
        }
    }
    inverse_transform(&Spectrum::from_parts(fine, padded))
}

fn second_derivative(u: &Field) -> Result<Field> {
    let grid = *u.grid();
    let mut spectrum = transform(u);
    for (j, c) in spectrum.coefficients_mut().iter_mut().enumerate() {
        let xi = grid.frequency(0, j);
        *c *= -xi * xi;
    }
    inverse_transform(&spectrum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_order_two_in_one_dimension() {
        let eval = bessel_kernel(1.0, 2.0, 1).unwrap();
        let exact = 0.5 * (-1.0f64).exp();
        assert!((eval.value - exact).abs() < 1e-9);
        assert!(eval.est_error < 1e-9 * eval.value);
    }

    #[test]
    fn kernel_decreases_with_radius() {
        for &(alpha, dim) in &[(0.5, 1), (1.5, 1), (1.0, 2), (2.5, 3)] {
            let mut prev = f64::INFINITY;
            for i in 0..30 {
                let r = 0.05 * 1.25f64.powi(i);
                let v = bessel_kernel(r, alpha, dim).unwrap().value;
                assert!(v > 0.0 && v < prev, "alpha={alpha} dim={dim} r={r}");
                prev = v;
            }
        }
    }

    #[test]
    fn kernel_rejects_bad_input() {
        assert!(bessel_kernel(0.0, 1.0, 1).is_err());
        assert!(bessel_kernel(1.0, 0.0, 1).is_err());
        assert!(bessel_kernel(1.0, 1.0, 4).is_err());
    }

    #[test]
    fn pointwise_of_constant_window_is_the_constant() {
        // With u constant on the integration window the P.V. term vanishes.
        let grid = make_grid(1, 64, 40.0).unwrap();
        let op = PointwiseOperator::with_constant(0.5, 0.3).unwrap();
        let fine = FineData {
            values: alloc::vec![2.5; 64],
            second: alloc::vec![0.0; 64],
            kernel: alloc::vec![1.0; 32],
            h: grid.spacing(0),
            small_limit: 1.0,
            correction: 1.0,
        };
        assert_eq!(op.constant * fine.integral_at(10) + 2.5, 2.5);
    }

    #[test]
    fn pointwise_rejects_out_of_contract() {
        let grid = make_grid(1, 64, 10.0).unwrap();
        let flat = Field::constant(grid, 1.0);
        let op = PointwiseOperator::with_constant(0.5, 0.3).unwrap();
        assert!(matches!(op.apply_at(&flat, 0), Err(Error::NotLocalized { .. })));
        assert!(PointwiseOperator::with_constant(1.0, 0.3).is_err());
        assert!(PointwiseOperator::calibrate(0.0).is_err());
    }
}
