//! Minimization of `Φ` over the closed ball `‖u‖_λ ≤ ρ` by projected
//! gradient descent, started from a small multiple of a bump.

use alloc::vec::Vec;

use super::newton::{newton_row, polish};
use super::{bump, normalized, Classification, SolveReport, SolverOptions, TraceRow};
use crate::error::{invalid, Error, Result};
use crate::grid::{lp_norm, Field};
use crate::problem::ProblemSpec;

/// Requires `μ > 0` for a negative minimum to exist. Fails when no negative
/// energy is found along the starting ray, or when the limit sits on the
/// sphere instead of inside the ball.
pub fn ball_min_solve(spec: &ProblemSpec, rho: f64, opts: &SolverOptions) -> Result<SolveReport> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(invalid("rho", "must be positive"));
    }
    let phi0 = normalized(spec, &bump(spec))?;
    let mut u = start(spec, &phi0, rho)?;
    let mut energy = spec.energy_total(&u)?;
    let mut step = 1.0;
    let mut previous: Option<(Field, Field)> = None;
    let mut trace = Vec::new();
    let mut newton_gate = opts.polish_below;
    let margin = opts.interior_margin * rho;
    for iter in 0..opts.max_iter {
        let r = spec.residual(&u)?;
        let rn = lp_norm(&r, 2.0)?;
        let norm = spec.norm(&u)?;
        trace.push(TraceRow {
            iter,
            energy,
            residual_norm: rn,
            step_size: step,
            max_node_index: 0,
            norm,
            newton: false,
        });
        if rn <= opts.tol {
            return conclude(u, energy, rn, norm, iter, true, trace, rho, margin);
        }
        if rn <= newton_gate && norm < rho - margin {
            let out = polish(spec, &u, opts.tol, opts.newton_steps)?;
            let polished = spec.energy_total(&out.solution)?;
            let inside = spec.norm(&out.solution)? <= rho;
            if out.residual_norm <= opts.tol && inside && polished <= energy + 1e-12 {
                let mut it = iter;
                for s in &out.steps {
                    it += 1;
                    trace.push(newton_row(it, s, 0));
                }
                let norm = spec.norm(&out.solution)?;
                return conclude(out.solution, polished, out.residual_norm, norm, it, true, trace, rho, margin);
            }
            newton_gate = 0.1 * rn;
        }
        let g = spec.riesz_solve(&r)?;
        // Barzilai–Borwein initial step in the weighted metric.
        let mut s = match &previous {
            Some((du_prev, g_prev)) => {
                let dg = g.sub(g_prev)?;
                let num = spec.inner(du_prev, du_prev)?;
                let den = spec.inner(du_prev, &dg)?;
                if den > 0.0 {
                    (num / den).clamp(1e-6, 1e6)
                } else {
                    2.0 * step
                }
            }
            None => 1.0,
        };
        let accepted = loop {
            let cand = project(spec, &u.axpy(-s, &g)?, rho)?;
            let du = cand.sub(&u)?;
            let dist_sq = spec.norm_sq(&du)?;
            if let Ok(ec) = spec.energy_total(&cand) {
                if dist_sq > 0.0 && ec <= energy - opts.armijo_slope / s * dist_sq {
                    break Some((cand, du, ec));
                }
            }
            s *= opts.armijo_shrink;
            if s < 1e-14 {
                break None;
            }
        };
        let Some((cand, du, ec)) = accepted else {
            return conclude(u, energy, rn, norm, iter, false, trace, rho, margin);
        };
        previous = Some((du, g));
        step = s;
        u = cand;
        energy = ec;
    }
    let rn = spec.residual_norm(&u)?;
    let norm = spec.norm(&u)?;
    conclude(u, energy, rn, norm, opts.max_iter, rn <= opts.tol, trace, rho, margin)
}

/// First `t = ρ/2, ρ/4, …` with `Φ(tφ₀) < 0`.
fn start(spec: &ProblemSpec, phi0: &Field, rho: f64) -> Result<Field> {
    let mut t = 0.5 * rho;
    for _ in 0..60 {
        let u = phi0.scaled(t);
        if spec.energy_total(&u)? < 0.0 {
            return Ok(u);
        }
        t *= 0.5;
    }
    Err(Error::SolverFailed(alloc::format!(
        "no negative energy along the bump ray inside the ball (mu = {}); 0 is the local minimizer",
        spec.mu()
    )))
}

fn project(spec: &ProblemSpec, u: &Field, rho: f64) -> Result<Field> {
    let n = spec.norm(u)?;
    Ok(if n > rho { u.scaled(rho / n) } else { u.clone() })
}

#[allow(clippy::too_many_arguments)]
fn conclude(
    solution: Field,
    energy: f64,
    residual_norm: f64,
    norm: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<TraceRow>,
    rho: f64,
    margin: f64,
) -> Result<SolveReport> {
    if norm > rho - margin {
        return Err(Error::SolverFailed(alloc::format!(
            "minimizer pinned to the sphere (norm {norm:.6e}, rho {rho:.6e}); rho or mu is outside the negative-minimum regime"
        )));
    }
    Ok(SolveReport {
        solution,
        energy,
        residual_norm,
        norm,
        iterations,
        classification: Classification::LocalMin,
        converged,
        trace,
    })
}
