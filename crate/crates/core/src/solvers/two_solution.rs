//! Two nontrivial solutions: a mountain-pass point at positive energy and a
//! local minimizer at negative energy inside the probe's ball.

use alloc::vec::Vec;

use super::{ball_min_solve, mountain_pass_solve, probe_geometry, GeometryProbe, ProbeOptions, SolveReport, SolverOptions};
use crate::error::{Error, Result};
use crate::grid::lp_norm;
use crate::problem::ProblemSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSolutionOptions {
    pub solver: SolverOptions,
    pub probe: ProbeOptions,
    /// Required `L²` distance between the two solutions.
    pub min_distance: f64,
}

impl Default for TwoSolutionOptions {
    fn default() -> Self {
        TwoSolutionOptions {
            solver: SolverOptions::default(),
            probe: ProbeOptions::default(),
            min_distance: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TwoSolutionOutcome {
    pub lambda: f64,
    pub mu: f64,
    pub probe: GeometryProbe,
    pub mountain_pass: SolveReport,
    pub ball_min: SolveReport,
    /// `‖u_mp - u_min‖_{L²}`.
    pub distinctness: f64,
    pub success: bool,
}

impl TwoSolutionOutcome {
    /// `m_λ < 0 < η ≤ c_λ`.
    pub fn levels_ordered(&self) -> bool {
        self.ball_min.energy < 0.0 && 0.0 < self.probe.eta && self.probe.eta <= self.mountain_pass.energy
    }
}

pub fn two_solution_experiment(spec: &ProblemSpec, opts: &TwoSolutionOptions) -> Result<TwoSolutionOutcome> {
    let stage = |name: &'static str| move |e: Error| Error::SolverFailed(alloc::format!("{name}: {e}"));
    let probe = probe_geometry(spec, &opts.probe).map_err(stage("probe_geometry"))?;
    let solver = SolverOptions {
        rho: Some(probe.rho),
        ..opts.solver.clone()
    };
    let mountain_pass = mountain_pass_solve(spec, &probe.e, &solver).map_err(stage("mountain_pass_solve"))?;
    let ball_min = ball_min_solve(spec, probe.rho, &solver).map_err(stage("ball_min_solve"))?;
    let distinctness = lp_norm(&mountain_pass.solution.sub(&ball_min.solution)?, 2.0)?;
    let success = mountain_pass.converged
        && ball_min.converged
        && mountain_pass.energy > 0.0
        && ball_min.energy < 0.0
        && distinctness > opts.min_distance;
    Ok(TwoSolutionOutcome {
        lambda: spec.lambda(),
        mu: spec.mu(),
        probe,
        mountain_pass,
        ball_min,
        distinctness,
        success,
    })
}

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub lambda: f64,
    pub mu: f64,
    pub outcome: core::result::Result<TwoSolutionOutcome, Error>,
}

impl SweepEntry {
    pub fn success(&self) -> bool {
        self.outcome.as_ref().is_ok_and(|o| o.success)
    }
}

/// Runs the experiment over `lambdas × mus` in order, stopping after the
/// first success when `stop_at_first` is set.
pub fn two_solution_sweep(
    spec: &ProblemSpec,
    lambdas: &[f64],
    mus: &[f64],
    opts: &TwoSolutionOptions,
    stop_at_first: bool,
) -> Result<Vec<SweepEntry>> {
    let mut out = Vec::new();
    for &lambda in lambdas {
        for &mu in mus {
            let candidate = spec.with_lambda_mu(lambda, mu)?;
            let entry = SweepEntry {
                lambda,
                mu,
                outcome: two_solution_experiment(&candidate, opts),
            };
            let done = stop_at_first && entry.success();
            out.push(entry);
            if done {
                return Ok(out);
            }
        }
    }
    Ok(out)
}
