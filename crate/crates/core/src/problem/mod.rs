//! Problem instances, the energy
//!
//! ```text
//! Φ(u) = ½‖u‖_λ² - ∫F(x,u) - (μ/p)∫ξ|u|^p
//! ```
//!
//! and its derivative. `DΦ(u)[v] = ⟨r(u), v⟩_{L²}` holds exactly on the grid,
//! where `r(u) = (I-Δ)^α u + λVu - f(x,u) - μξ|u|^{p-2}u` is the strong-form
//! residual.

mod assumptions;
mod model;

use alloc::vec::Vec;

use num_traits::Float;

pub use assumptions::{
    axis_ladder_points, ball_inverse_integral, ball_sublevel_measure, sublevel_measure, validate_assumptions, Assumption, AssumptionCheck,
    ValidationOptions, ValidationReport, Witness,
};
pub use model::{
    signed_power, Nonlinearity, PointFn, PointValueFn, Potential, PotentialClass, Weight,
};

use crate::error::{invalid, Error, Result};
use crate::grid::{apply_multiplier, bessel_norm_sq, potential_energy_sq, Field, Grid};
use crate::linalg;

/// Scalar parameters of the equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    pub alpha: f64,
    pub lambda: f64,
    pub mu: f64,
    pub p: f64,
}

/// `2N/(N-2α)`, or `+∞` when `N ≤ 2α`.
pub fn critical_exponent(dim: usize, alpha: f64) -> f64 {
    let n = dim as f64;
    if n <= 2.0 * alpha {
        f64::INFINITY
    } else {
        2.0 * n / (n - 2.0 * alpha)
    }
}

/// A complete, validated instance of the equation on a grid.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    params: Parameters,
    nonlinearity: Nonlinearity,
    potential: Potential,
    weight: Weight,
    grid: Grid,
    potential_samples: Field,
    weight_samples: Field,
    points: Vec<[f64; 3]>,
}

impl ProblemSpec {
    /// Validates the parameter ranges and, for custom nonlinearities, the
    /// growth and superquadraticity conditions by sampling.
    pub fn new(
        grid: Grid,
        params: Parameters,
        nonlinearity: Nonlinearity,
        potential: Potential,
        weight: Weight,
    ) -> Result<Self> {
        let spec = Self::new_unchecked(grid, params, nonlinearity, potential, weight)?;
        if !spec.nonlinearity.is_autonomous() {
            let report = validate_assumptions(&spec, &ValidationOptions::default());
            for a in [Assumption::F1, Assumption::F2, Assumption::F3] {
                let check = report.get(a).expect("nonlinearity checks always run");
                if !check.passed {
                    return Err(Error::AssumptionViolated(alloc::format!(
                        "{}: {}",
                        a.name(),
                        check.detail
                    )));
                }
            }
        }
        Ok(spec)
    }

    /// Range checks only; custom nonlinearities are taken on trust.
    pub fn new_unchecked(
        grid: Grid,
        params: Parameters,
        nonlinearity: Nonlinearity,
        potential: Potential,
        weight: Weight,
    ) -> Result<Self> {
        let Parameters { alpha, lambda, mu, p } = params;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid("alpha", alloc::format!("{alpha} is not in (0,1)")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", alloc::format!("{lambda} must be positive")));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(invalid("mu", alloc::format!("{mu} must be non-negative")));
        }
        if !(p > 1.0 && p < 2.0) {
            return Err(invalid("p", alloc::format!("{p} is not in (1,2)")));
        }
        let q = nonlinearity.q();
        let critical = critical_exponent(grid.dim(), alpha);
        if !(q > 2.0 && q < critical) {
            return Err(invalid(
                "q",
                alloc::format!("{q} is not in (2, {critical}) for N={} and alpha={alpha}", grid.dim()),
            ));
        }
        if !(nonlinearity.theta() > 2.0) {
            return Err(invalid("theta", "superquadraticity constant must exceed 2"));
        }
        let points: Vec<[f64; 3]> = (0..grid.len()).map(|i| grid.point(i)).collect();
        let dim = grid.dim();
        let potential_samples = Field::from_values(
            grid,
            points.iter().map(|x| potential.eval(&x[..dim])).collect(),
        )
        .map_err(|_| Error::NonFinite("potential samples"))?;
        let weight_samples = Field::from_values(
            grid,
            points.iter().map(|x| weight.eval(&x[..dim])).collect(),
        )
        .map_err(|_| Error::NonFinite("weight samples"))?;
        Ok(ProblemSpec {
            params,
            nonlinearity,
            potential,
            weight,
            grid,
            potential_samples,
            weight_samples,
            points,
        })
    }

    /// Same instance with different `λ` and `μ`.
    pub fn with_lambda_mu(&self, lambda: f64, mu: f64) -> Result<Self> {
        let params = Parameters {
            lambda,
            mu,
            ..self.params
        };
        Self::new_unchecked(
            self.grid,
            params,
            self.nonlinearity.clone(),
            self.potential.clone(),
            self.weight.clone(),
        )
    }

    /// Same data sampled on another grid.
    pub fn on_grid(&self, grid: Grid) -> Result<Self> {
        Self::new_unchecked(
            grid,
            self.params,
            self.nonlinearity.clone(),
            self.potential.clone(),
            self.weight.clone(),
        )
    }

    pub fn params(&self) -> Parameters {
        self.params
    }
    pub fn alpha(&self) -> f64 {
        self.params.alpha
    }
    pub fn lambda(&self) -> f64 {
        self.params.lambda
    }
    pub fn mu(&self) -> f64 {
        self.params.mu
    }
    pub fn p(&self) -> f64 {
        self.params.p
    }
    pub fn q(&self) -> f64 {
        self.nonlinearity.q()
    }
    pub fn theta(&self) -> f64 {
        self.nonlinearity.theta()
    }
    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }
    pub fn potential(&self) -> &Potential {
        &self.potential
    }
    pub fn weight(&self) -> &Weight {
        &self.weight
    }
    /// `V` sampled on the grid.
    pub fn potential_field(&self) -> &Field {
        &self.potential_samples
    }
    /// `ξ` sampled on the grid.
    pub fn weight_field(&self) -> &Field {
        &self.weight_samples
    }

    pub(crate) fn point(&self, i: usize) -> &[f64] {
        &self.points[i][..self.grid.dim()]
    }

    pub fn eval_f(&self, x: &[f64], u: f64) -> f64 {
        self.nonlinearity.f(x, u)
    }

    #[allow(non_snake_case)]
    pub fn eval_F(&self, x: &[f64], u: f64) -> f64 {
        self.nonlinearity.F(x, u)
    }

    /// `½·u·f(x,u) - F(x,u)`.
    pub fn eval_scr_f(&self, x: &[f64], u: f64) -> f64 {
        0.5 * u * self.eval_f(x, u) - self.eval_F(x, u)
    }

    /// `‖ξ‖` in `L^{2/(2-p)}`.
    pub fn weight_norm(&self) -> f64 {
        let r = 2.0 / (2.0 - self.p());
        crate::grid::lp_norm(&self.weight_samples, r).expect("r > 2")
    }

    /// `‖u‖_λ²`.
    pub fn norm_sq(&self, u: &Field) -> Result<f64> {
        self.check(u)?;
        Ok(bessel_norm_sq(u, self.alpha())?
            + self.lambda() * potential_energy_sq(u, &self.potential_samples)?)
    }

    pub fn norm(&self, u: &Field) -> Result<f64> {
        Ok(self.norm_sq(u)?.max(0.0).sqrt())
    }

    /// `⟨u, v⟩_λ`, the inner product of the weighted norm.
    pub fn inner(&self, u: &Field, v: &Field) -> Result<f64> {
        let au = apply_multiplier(u, self.alpha())?;
        let vu = u.zip_with(&self.potential_samples, |a, b| a * b)?;
        Ok(au.dot(v)? + self.lambda() * vu.dot(v)?)
    }

    pub fn energy(&self, u: &Field) -> Result<EnergyBreakdown> {
        self.check(u)?;
        let quad = 0.5 * self.norm_sq(u)?;
        let dv = self.grid.cell_volume();
        let values = u.values();
        let f_term = if self.nonlinearity.is_autonomous() {
            values.iter().map(|&v| self.nonlinearity.F(&[], v)).sum::<f64>() * dv
        } else {
            (0..values.len())
                .map(|i| self.nonlinearity.F(self.point(i), values[i]))
                .sum::<f64>()
                * dv
        };
        let p = self.p();
        let weighted: f64 = values
            .iter()
            .zip(self.weight_samples.values())
            .map(|(v, xi)| xi * v.abs().powf(p))
            .sum();
        let xi_term = self.mu() / p * weighted * dv;
        let breakdown = EnergyBreakdown {
            quad,
            f_term,
            xi_term,
            total: quad - f_term - xi_term,
        };
        if breakdown.is_finite() {
            Ok(breakdown)
        } else {
            Err(Error::NonFinite("energy"))
        }
    }

    /// `Φ(u)`.
    pub fn energy_total(&self, u: &Field) -> Result<f64> {
        Ok(self.energy(u)?.total)
    }

    /// The nonlinear part `f(x,u) + μξ|u|^{p-2}u`, pointwise.
    pub fn nonlinear_source(&self, u: &Field) -> Result<Field> {
        self.check(u)?;
        let mu = self.mu();
        let e = self.p() - 1.0;
        let values: Vec<f64> = (0..u.values().len())
            .map(|i| {
                let v = u.values()[i];
                let f = if self.nonlinearity.is_autonomous() {
                    self.nonlinearity.f(&[], v)
                } else {
                    self.nonlinearity.f(self.point(i), v)
                };
                f + mu * self.weight_samples.values()[i] * signed_power(v, e)
            })
            .collect();
        Field::from_values(self.grid, values).map_err(|_| Error::NonFinite("nonlinear source"))
    }

    /// Strong-form residual `r(u)`, the `L²` representative of `DΦ(u)`.
    pub fn residual(&self, u: &Field) -> Result<Field> {
        let au = apply_multiplier(u, self.alpha())?;
        let source = self.nonlinear_source(u)?;
        let lambda = self.lambda();
        let values: Vec<f64> = (0..u.values().len())
            .map(|i| {
                au.values()[i] + lambda * self.potential_samples.values()[i] * u.values()[i]
                    - source.values()[i]
            })
            .collect();
        Field::from_values(self.grid, values).map_err(|_| Error::NonFinite("residual"))
    }

    /// `‖r(u)‖_{L²}`.
    pub fn residual_norm(&self, u: &Field) -> Result<f64> {
        crate::grid::lp_norm(&self.residual(u)?, 2.0)
    }

    /// `DΦ(u)[v] = ⟨r(u), v⟩_{L²}`.
    pub fn derivative(&self, u: &Field, v: &Field) -> Result<f64> {
        self.residual(u)?.dot(v)
    }

    /// `(I-Δ)^{-α} r(u)`.
    pub fn precond_gradient(&self, u: &Field) -> Result<Field> {
        apply_multiplier(&self.residual(u)?, -self.alpha())
    }

    /// Applies `(I-Δ)^α + λV`.
    pub fn apply_riesz_operator(&self, v: &Field) -> Result<Field> {
        let av = apply_multiplier(v, self.alpha())?;
        let lambda = self.lambda();
        let weighted = v.zip_with(&self.potential_samples, |x, pv| lambda * pv * x)?;
        av.add(&weighted)
    }

    /// Solves `((I-Δ)^α + λV) g = r` by Jacobi-preconditioned CG: the
    /// representative of a functional in the weighted inner product.
    pub fn riesz_solve(&self, r: &Field) -> Result<Field> {
        self.check(r)?;
        let grid = self.grid;
        let alpha = self.alpha();
        let lambda = self.lambda();
        let freq_sq = grid.frequency_sq();
        let mean_symbol =
            freq_sq.iter().map(|&x| (1.0 + x).powf(alpha)).sum::<f64>() / grid.len() as f64;
        let diag: Vec<f64> = self
            .potential_samples
            .values()
            .iter()
            .map(|&v| mean_symbol + lambda * v)
            .collect();
        let pv = self.potential_samples.values();
        let apply = |x: &[f64]| -> Vec<f64> {
            let field = Field::from_values(grid, x.to_vec()).expect("finite iterate");
            let ax = apply_multiplier(&field, alpha).expect("finite exponent");
            ax.values()
                .iter()
                .zip(x)
                .zip(pv)
                .map(|((a, xi), v)| a + lambda * v * xi)
                .collect()
        };
        let precondition = |x: &[f64]| -> Vec<f64> { x.iter().zip(&diag).map(|(a, d)| a / d).collect() };
        let result = linalg::pcg(apply, precondition, r.values(), 1e-12, 2000);
        if !result.converged && result.residual_ratio > 1e-8 {
            return Err(Error::SolverFailed(alloc::format!(
                "weighted Riesz solve stalled at relative residual {:e}",
                result.residual_ratio
            )));
        }
        Field::from_values(grid, result.solution)
    }

    /// Gradient of `Φ` in the weighted inner product: `⟨g, v⟩_λ = DΦ(u)[v]`.
    pub fn riesz_gradient(&self, u: &Field) -> Result<Field> {
        self.riesz_solve(&self.residual(u)?)
    }

    /// Pointwise derivative of the nonlinear source, `f'(x,u) + μ(p-1)ξ|u|^{p-2}`.
    /// Where `|u|` is below `floor` the singular sublinear part is dropped.
    pub fn source_derivative(&self, u: &Field, floor: f64) -> Result<Field> {
        self.check(u)?;
        let mu = self.mu();
        let p = self.p();
        let values: Vec<f64> = (0..u.values().len())
            .map(|i| {
                let v = u.values()[i];
                let fp = if self.nonlinearity.is_autonomous() {
                    self.nonlinearity.derivative(&[], v)
                } else {
                    self.nonlinearity.derivative(self.point(i), v)
                };
                let sub = if v.abs() > floor {
                    mu * (p - 1.0) * self.weight_samples.values()[i] * v.abs().powf(p - 2.0)
                } else {
                    0.0
                };
                fp + sub
            })
            .collect();
        Field::from_values(self.grid, values).map_err(|_| Error::NonFinite("source derivative"))
    }

    fn check(&self, u: &Field) -> Result<()> {
        if *u.grid() == self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// The three parts of `Φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    /// `½‖u‖_λ²`
    pub quad: f64,
    /// `∫F(x,u)`
    pub f_term: f64,
    /// `(μ/p)∫ξ|u|^p`
    pub xi_term: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn is_finite(&self) -> bool {
        self.quad.is_finite() && self.f_term.is_finite() && self.xi_term.is_finite() && self.total.is_finite()
    }
}

#[cfg(test)]
mod tests;
