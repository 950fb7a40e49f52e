//! Mountain-pass solver.
//!
//! The path is kept in the shape `0 → T·u → e`: a ray through the current
//! peak `u` out to `T·u` with `Φ(T·u) < 0`, followed by a far arc of
//! negative energy to the fixed endpoint. Each deformation moves the peak node one Armijo step down the
//! weighted gradient, re-maximizes it along its own ray, and rebuilds the
//! path through it. Ray maxima stay on the ridge, so the discrete path cannot
//! slip past the pass. Newton polishing finishes the peak once its residual
//! is small.

use alloc::vec::Vec;

use super::newton::{newton_row, polish};
use super::{Classification, SolveReport, SolverOptions, TraceRow};
use crate::error::{invalid, Error, Result};
use crate::grid::{lp_norm, Field};
use crate::problem::ProblemSpec;
use crate::random::FieldSampler;

/// A discrete path `γ(t₀), …, γ(t_m)` from `0` to `e`.
#[derive(Debug, Clone)]
pub struct PathState {
    nodes: Vec<Field>,
    energies: Vec<f64>,
}

impl PathState {
    /// Linear path `t_k·e`, `t_k = k/(nodes-1)`.
    pub fn linear(spec: &ProblemSpec, e: &Field, nodes: usize) -> Result<Self> {
        if nodes < 5 {
            return Err(invalid("path_nodes", "need at least 5 nodes"));
        }
        let m = (nodes - 1) as f64;
        let nodes: Vec<Field> = (0..nodes)
            .map(|k| if k == nodes - 1 { e.clone() } else { e.scaled(k as f64 / m) })
            .collect();
        Self::from_nodes(spec, nodes)
    }

    fn from_nodes(spec: &ProblemSpec, nodes: Vec<Field>) -> Result<Self> {
        let energies = nodes
            .iter()
            .map(|u| spec.energy_total(u))
            .collect::<Result<Vec<f64>>>()?;
        Ok(PathState { nodes, energies })
    }

    pub fn nodes(&self) -> &[Field] {
        &self.nodes
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn start(&self) -> &Field {
        &self.nodes[0]
    }

    pub fn end(&self) -> &Field {
        &self.nodes[self.nodes.len() - 1]
    }

    /// Node of highest energy; ties within `1e-12` go to the smallest index.
    pub fn max_index(&self) -> usize {
        let top = self.energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.energies
            .iter()
            .position(|&v| v >= top - 1e-12)
            .expect("non-empty path")
    }

    /// Rebuilds the interior as `0 → peak → T·peak`, then an arc of radius
    /// `R` (in `‖·‖_λ`) from the direction of the peak to that of the end,
    /// with `R` doubled until every arc node has negative energy. Endpoints
    /// are carried over untouched.
    fn rebuild(&mut self, spec: &ProblemSpec, peak: &Field, far: f64) -> Result<()> {
        let m = self.nodes.len() - 1;
        let ray_end = m / 2;
        let peak_at = ray_end / 2;
        let end = self.end().clone();
        let peak_norm = spec.norm(peak)?;
        let end_norm = spec.norm(&end)?;
        let u_hat = peak.scaled(1.0 / peak_norm);
        let e_hat = end.scaled(1.0 / end_norm);
        let arc: Vec<Field> = (ray_end + 1..m)
            .map(|j| {
                let s = (j - ray_end) as f64 / (m - ray_end) as f64;
                let d = u_hat.scaled(1.0 - s).axpy(s, &e_hat)?;
                let n = spec.norm(&d)?;
                if n > 0.0 {
                    Ok(d.scaled(1.0 / n))
                } else {
                    Err(Error::GeometryFailed("peak and endpoint point in opposite directions".into()))
                }
            })
            .collect::<Result<Vec<Field>>>()?;
        let mut radius = (far * peak_norm).max(end_norm);
        let mut doublings = 0;
        while arc
            .iter()
            .map(|d| spec.energy_total(&d.scaled(radius)).map(|v| v >= 0.0))
            .collect::<Result<Vec<bool>>>()?
            .into_iter()
            .any(|b| b)
        {
            radius *= 2.0;
            doublings += 1;
            if doublings > 60 {
                return Err(Error::GeometryFailed("no negative-energy arc joins the peak ray to e".into()));
            }
        }
        let mut nodes = Vec::with_capacity(m + 1);
        nodes.push(self.nodes[0].clone());
        for j in 1..=ray_end {
            let t = if j <= peak_at {
                j as f64 / peak_at as f64
            } else {
                1.0 + (j - peak_at) as f64 / (ray_end - peak_at) as f64 * (far - 1.0)
            };
            nodes.push(peak.scaled(t));
        }
        nodes.extend(arc.iter().map(|d| d.scaled(radius)));
        nodes.push(end);
        *self = Self::from_nodes(spec, nodes)?;
        Ok(())
    }
}

/// `h(t) = DΦ(tu)[u]`.
fn ray_slope(spec: &ProblemSpec, u: &Field, t: f64) -> Result<f64> {
    spec.derivative(&u.scaled(t), u)
}

/// Scales `u` to the maximizer of `t ↦ Φ(tu)` on the far side of the
/// sublinear dip near 0, and returns the factor `T ≥ 2` with `Φ(T·u*) < 0`.
fn ray_maximize(spec: &ProblemSpec, u: &Field) -> Result<Option<(Field, f64)>> {
    let (mut lo, mut hi) = (1.0, 1.0);
    if ray_slope(spec, u, 1.0)? > 0.0 {
        while ray_slope(spec, u, hi)? > 0.0 {
            hi *= 2.0;
            if hi > 1e8 {
                return Ok(None);
            }
        }
        lo = 0.5 * hi;
    } else {
        while ray_slope(spec, u, lo)? <= 0.0 {
            lo *= 0.5;
            if lo < 1e-8 {
                return Ok(None);
            }
        }
        hi = 2.0 * lo;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ray_slope(spec, u, mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let peak = u.scaled(0.5 * (lo + hi));
    let mut far = 2.0;
    while spec.energy_total(&peak.scaled(far))? >= 0.0 {
        far *= 2.0;
        if far > 1e8 {
            return Ok(None);
        }
    }
    Ok(Some((peak, far)))
}

/// Requires `Φ(e) < 0`. Returns a report flagged non-converged when
/// `max_iter` runs out; collapse to zero triggers up to `opts.restarts`
/// restarts from a perturbed endpoint ray.
pub fn mountain_pass_solve(spec: &ProblemSpec, e: &Field, opts: &SolverOptions) -> Result<SolveReport> {
    let e_energy = spec.energy_total(e)?;
    if !(e_energy < 0.0) {
        return Err(invalid("e", alloc::format!("Phi(e) = {e_energy:e} is not negative")));
    }
    let rho = opts.rho.unwrap_or_else(|| spec.norm(e).unwrap_or(0.0) / 10.0);
    let mut attempt = 0;
    let mut path = PathState::linear(spec, e, opts.path_nodes)?;
    loop {
        let report = deform(spec, &mut path, opts)?;
        if !report.converged || report.norm >= rho / 10.0 {
            return Ok(report);
        }
        if attempt >= opts.restarts {
            return Err(Error::SolverFailed(alloc::format!(
                "mountain-pass iterate collapsed to zero (norm {:.3e} < rho/10) after {} restarts",
                report.norm, attempt
            )));
        }
        attempt += 1;
        path = PathState::linear(spec, e, opts.path_nodes)?;
        let k = path.max_index();
        let mut rng = FieldSampler::new(opts.seed, attempt as u64);
        let noise = rng.localized(*spec.grid(), 2.0, 1.0);
        let nudged = path.nodes[k].axpy(0.1 * path.nodes[k].max_abs() / noise.max_abs(), &noise)?;
        if let Some((peak, far)) = ray_maximize(spec, &nudged)? {
            path.rebuild(spec, &peak, far)?;
        }
    }
}

fn deform(spec: &ProblemSpec, path: &mut PathState, opts: &SolverOptions) -> Result<SolveReport> {
    let mut trace = Vec::new();
    let mut step = 1.0;
    let mut newton_gate = opts.polish_below;
    let last = path.nodes.len() - 1;
    for iter in 0..opts.max_iter {
        let k = path.max_index();
        if k == 0 || k == last {
            return Err(Error::GeometryFailed(
                "path maximum sits at an endpoint; e does not give mountain-pass geometry".into(),
            ));
        }
        let u = path.nodes[k].clone();
        let energy = path.energies[k];
        let r = spec.residual(&u)?;
        let rn = lp_norm(&r, 2.0)?;
        let norm = spec.norm(&u)?;
        trace.push(TraceRow {
            iter,
            energy,
            residual_norm: rn,
            step_size: step,
            max_node_index: k,
            norm,
            newton: false,
        });
        if rn <= opts.tol {
            return Ok(finish(u, energy, rn, norm, iter, true, trace));
        }
        if rn <= newton_gate {
            let out = polish(spec, &u, opts.tol, opts.newton_steps)?;
            if out.residual_norm <= opts.tol {
                let mut it = iter;
                for s in &out.steps {
                    it += 1;
                    trace.push(newton_row(it, s, k));
                }
                let solution = out.solution;
                let energy = spec.energy_total(&solution)?;
                let norm = spec.norm(&solution)?;
                return Ok(finish(solution, energy, out.residual_norm, norm, it, true, trace));
            }
            newton_gate = 0.1 * rn;
        }
        let g = spec.riesz_solve(&r)?;
        let slope = r.dot(&g)?;
        let mut s = (2.0 * step).min(1.0);
        let moved = loop {
            if let Some((peak, far)) = ray_maximize(spec, &u.axpy(-s, &g)?)? {
                let ec = spec.energy_total(&peak)?;
                if ec <= energy - opts.armijo_slope * s * slope {
                    break Some((peak, far));
                }
            }
            s *= opts.armijo_shrink;
            if s < 1e-14 {
                break None;
            }
        };
        let Some((peak, far)) = moved else {
            return Ok(finish(u, energy, rn, norm, iter, false, trace));
        };
        step = s;
        path.rebuild(spec, &peak, far)?;
    }
    let k = path.max_index();
    let u = path.nodes[k].clone();
    let rn = spec.residual_norm(&u)?;
    let norm = spec.norm(&u)?;
    let energy = path.energies[k];
    Ok(finish(u, energy, rn, norm, opts.max_iter, rn <= opts.tol, trace))
}

fn finish(
    solution: Field,
    energy: f64,
    residual_norm: f64,
    norm: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<TraceRow>,
) -> SolveReport {
    SolveReport {
        solution,
        energy,
        residual_norm,
        norm,
        iterations,
        classification: Classification::MountainPass,
        converged,
        trace,
    }
}
