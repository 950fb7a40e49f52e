//! Critical points of `Φ`: the geometry probe, a mountain-pass solver for the
//! positive level, a ball-constrained minimizer for the negative level, and
//! diagnostics for Palais–Smale sequences.
//!
//! Both solvers descend along the gradient in the weighted inner product
//! `⟨·,·⟩_λ` (see [`ProblemSpec::riesz_gradient`]) and finish with a damped
//! Newton–GMRES polish once the residual is small.

mod ball_min;
mod mountain_pass;
mod newton;
mod palais_smale;
mod probe;
mod two_solution;

use alloc::vec::Vec;

pub use ball_min::ball_min_solve;
pub use mountain_pass::{mountain_pass_solve, PathState};
pub use palais_smale::{ps_diagnostics, ps_diagnostics_from_norms, PsDiagnostics, PsViolation};
pub use probe::{probe_geometry, GeometryProbe, ProbeOptions, SphereSample};
pub use two_solution::{
    two_solution_experiment, two_solution_sweep, SweepEntry, TwoSolutionOptions, TwoSolutionOutcome,
};

use crate::error::Result;
use crate::grid::Field;
use crate::problem::ProblemSpec;
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    MountainPass,
    LocalMin,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::MountainPass => "mountain_pass",
            Classification::LocalMin => "local_min",
        }
    }
}

/// One row of a convergence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub energy: f64,
    pub residual_norm: f64,
    pub step_size: f64,
    /// Path node being moved; 0 for the ball minimizer.
    pub max_node_index: usize,
    /// `‖u‖_λ` of the current iterate.
    pub norm: f64,
    pub newton: bool,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Field,
    pub energy: f64,
    pub residual_norm: f64,
    pub norm: f64,
    pub iterations: usize,
    pub classification: Classification,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Nodes on the path, endpoints included.
    pub path_nodes: usize,
    /// Target for the `L²` norm of the residual.
    pub tol: f64,
    pub max_iter: usize,
    pub armijo_shrink: f64,
    pub armijo_slope: f64,
    /// Residual norm below which Newton polishing is attempted; 0 disables it.
    pub polish_below: f64,
    pub newton_steps: usize,
    /// Sphere radius from the geometry probe. Mountain-pass iterates with
    /// `‖u‖_λ < ρ/10` count as collapse to zero; without it `‖e‖_λ/10` is used.
    pub rho: Option<f64>,
    /// Required distance to the sphere in the ball minimizer, as a fraction of `ρ`.
    pub interior_margin: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            path_nodes: 41,
            tol: 1e-8,
            max_iter: 5000,
            armijo_shrink: 0.5,
            armijo_slope: 1e-4,
            polish_below: 1e-3,
            newton_steps: 30,
            rho: None,
            interior_margin: 1e-3,
            restarts: 3,
            seed: 0,
        }
    }
}

/// `e^{-|x|²}`.
pub(crate) fn bump(spec: &ProblemSpec) -> Field {
    Field::from_fn(*spec.grid(), |x| (-x.iter().map(|c| c * c).sum::<f64>()).exp())
}

/// `field / ‖field‖_λ`.
pub(crate) fn normalized(spec: &ProblemSpec, field: &Field) -> Result<Field> {
    let n = spec.norm(field)?;
    Ok(field.scaled(1.0 / n))
}

/// `∫ξ|u|^p`.
pub(crate) fn weight_integral(spec: &ProblemSpec, u: &Field) -> f64 {
    let p = spec.p();
    u.values()
        .iter()
        .zip(spec.weight_field().values())
        .map(|(v, xi)| xi * v.abs().powf(p))
        .sum::<f64>()
        * spec.grid().cell_volume()
}

#[cfg(test)]
mod tests;
