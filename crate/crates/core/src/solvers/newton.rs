//! Damped Newton–GMRES on `r(u) = 0`, preconditioned by `(I-Δ)^α + λV`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{lp_norm, Field};
use crate::linalg::gmres;
use super::TraceRow;
use crate::problem::ProblemSpec;

pub(crate) struct NewtonStep {
    pub energy: f64,
    pub residual_norm: f64,
    pub damping: f64,
    pub norm: f64,
}

pub(crate) struct NewtonOutcome {
    pub solution: Field,
    pub residual_norm: f64,
    pub steps: Vec<NewtonStep>,
}

/// Runs until `‖r‖ ≤ tol`, a damped step fails to reduce `‖r‖`, or
/// `max_steps` is reached. Never returns a worse iterate than `u0`.
pub(crate) fn polish(spec: &ProblemSpec, u0: &Field, tol: f64, max_steps: usize) -> Result<NewtonOutcome> {
    let grid = *spec.grid();
    let mut u = u0.clone();
    let mut r = spec.residual(&u)?;
    let mut rn = lp_norm(&r, 2.0)?;
    let mut steps = Vec::new();
    for _ in 0..max_steps {
        if rn <= tol {
            break;
        }
        let floor = 1e-10 * u.max_abs();
        let slope = spec.source_derivative(&u, floor)?;
        let mut failure: Option<Error> = None;
        let rhs = spec.riesz_solve(&r)?;
        let apply = |x: &[f64]| -> Vec<f64> {
            let fx = Field::from_values(grid, x.to_vec()).expect("finite Krylov vector");
            let jx = spec
                .apply_riesz_operator(&fx)
                .and_then(|ax| ax.sub(&fx.zip_with(&slope, |a, b| a * b)?));
            match jx.and_then(|jx| spec.riesz_solve(&jx)) {
                Ok(y) => y.into_values(),
                Err(e) => {
                    failure = Some(e);
                    alloc::vec![0.0; x.len()]
                }
            }
        };
        let krylov = gmres(apply, rhs.values(), 1e-10, 300);
        if let Some(e) = failure {
            return Err(e);
        }
        let delta = Field::from_values(grid, krylov.solution)?;
        let mut damping = 1.0;
        let mut accepted = None;
        while damping > 1e-6 {
            let cand = u.axpy(-damping, &delta)?;
            if let Ok(rc) = spec.residual(&cand) {
                let rcn = lp_norm(&rc, 2.0)?;
                if rcn <= (1.0 - 1e-4 * damping) * rn {
                    accepted = Some((cand, rc, rcn));
                    break;
                }
            }
            damping *= 0.5;
        }
        let Some((cand, rc, rcn)) = accepted else {
            break;
        };
        u = cand;
        r = rc;
        rn = rcn;
        steps.push(NewtonStep {
            energy: spec.energy_total(&u)?,
            residual_norm: rn,
            damping,
            norm: spec.norm(&u)?,
        });
    }
    Ok(NewtonOutcome {
        solution: u,
        residual_norm: rn,
        steps,
    })
}

pub(crate) fn newton_row(iter: usize, s: &NewtonStep, node: usize) -> TraceRow {
    TraceRow {
        iter,
        energy: s.energy,
        residual_norm: s.residual_norm,
        step_size: s.damping,
        max_node_index: node,
        norm: s.norm,
        newton: true,
    }
}
