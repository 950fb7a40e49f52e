//! Sampled mountain-pass geometry: a sphere `‖u‖_λ = ρ` on which `Φ` stays
//! above `η > 0`, and a far point `e` with `Φ(e) < 0`.

use alloc::string::ToString;
use alloc::vec::Vec;

use super::{bump, normalized, weight_integral};
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::problem::ProblemSpec;
use crate::random::FieldSampler;
use num_traits::Float;

/// Gaussian directions `e^{-|x|²/w²}`, `w ∈ {1, 1/4, 1/2, 2}`, always sampled first.
const FIXED_DIRECTIONS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOptions {
    /// Explicit increasing radii. `None` picks `rho_count` radii evenly up to
    /// half the maximizer of `t ↦ Φ(td)`, for the fixed Gaussian direction `d`
    /// whose ray maximum is lowest. Staying well inside that ray keeps the
    /// sampled minimum below the mountain-pass level.
    pub rho_grid: Option<Vec<f64>>,
    pub rho_count: usize,
    /// Unit directions per radius (four fixed Gaussians, the rest random).
    pub samples_per_rho: usize,
    pub seed: u64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            rho_grid: None,
            rho_count: 16,
            samples_per_rho: 32,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereSample {
    pub rho: f64,
    /// Smallest sampled `Φ` on the sphere.
    pub min_energy: f64,
    /// Largest `μ` for which every sample on this sphere keeps `Φ > 0`.
    pub mu_threshold: f64,
}

#[derive(Debug, Clone)]
pub struct GeometryProbe {
    pub rho: f64,
    /// Sampled minimum of `Φ` on the chosen sphere; an upper bound on the
    /// true infimum there.
    pub eta: f64,
    /// Largest `μ` keeping the sampled minimum positive on some tested sphere.
    pub mu0_estimate: f64,
    pub e: Field,
    pub e_norm: f64,
    pub e_energy: f64,
    pub sample_count: usize,
    pub seed: u64,
    pub ladder: Vec<SphereSample>,
}

pub fn probe_geometry(spec: &ProblemSpec, opts: &ProbeOptions) -> Result<GeometryProbe> {
    let phi0 = normalized(spec, &bump(spec))?;
    let (_, e_scale) = ray_scan(spec, &phi0)?;
    let directions = directions(spec, &phi0, opts)?;
    let rhos: Vec<f64> = match &opts.rho_grid {
        Some(grid) => {
            if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] <= 0.0 {
                return Err(crate::error::invalid("rho_grid", "must be a positive increasing ladder"));
            }
            grid.clone()
        }
        None => {
            // Half the ray maximizer of the direction with the lowest ray maximum.
            let mut best = (f64::INFINITY, 0.0);
            for d in directions.iter().take(FIXED_DIRECTIONS) {
                let (t, level) = ray_scan(spec, d).map(|(t, _)| (t, spec.energy_total(&d.scaled(t))))?;
                let level = level?;
                if level < best.0 {
                    best = (level, t);
                }
            }
            let count = opts.rho_count.max(1);
            (1..=count).map(|j| 0.5 * best.1 * j as f64 / count as f64).collect()
        }
    };
    let p = spec.p();
    let mut ladder = Vec::with_capacity(rhos.len());
    for &rho in &rhos {
        let mut min_energy = f64::INFINITY;
        let mut mu_threshold = f64::INFINITY;
        for d in &directions {
            let u = d.scaled(rho);
            let parts = spec.energy(&u)?;
            min_energy = min_energy.min(parts.total);
            let unperturbed = parts.quad - parts.f_term;
            let w = weight_integral(spec, &u);
            let ratio = if unperturbed <= 0.0 {
                0.0
            } else if w > 0.0 {
                p * unperturbed / w
            } else {
                f64::INFINITY
            };
            mu_threshold = mu_threshold.min(ratio);
        }
        ladder.push(SphereSample {
            rho,
            min_energy,
            mu_threshold,
        });
    }
    let best = ladder
        .iter()
        .copied()
        .max_by(|a, b| a.min_energy.total_cmp(&b.min_energy))
        .expect("at least one radius");
    let mu0_estimate = ladder.iter().map(|s| s.mu_threshold).fold(0.0, f64::max);
    if !(best.min_energy > 0.0) {
        return Err(Error::GeometryFailed(alloc::format!(
            "no tested sphere has a positive sampled minimum (best {:.3e} at rho = {:.3e}); \
             mu = {} exceeds the sampled threshold {:.3e}",
            best.min_energy,
            best.rho,
            spec.mu(),
            mu0_estimate
        )));
    }
    let e = phi0.scaled(e_scale);
    let e_energy = spec.energy_total(&e)?;
    let e_norm = spec.norm(&e)?;
    if !(e_energy < 0.0 && e_norm > best.rho) {
        return Err(Error::GeometryFailed(
            "endpoint check failed: need Phi(e) < 0 and |e| > rho".to_string(),
        ));
    }
    Ok(GeometryProbe {
        rho: best.rho,
        eta: best.min_energy,
        mu0_estimate,
        e,
        e_norm,
        e_energy,
        sample_count: directions.len() * rhos.len(),
        seed: opts.seed,
        ladder,
    })
}

/// Scans `t ↦ Φ(tφ₀)` on a geometric ladder. Returns the maximizing `t` and
/// the first `t` beyond it with negative energy.
fn ray_scan(spec: &ProblemSpec, phi0: &Field) -> Result<(f64, f64)> {
    let ratio = 2f64.powf(0.125);
    let mut t = 1e-4;
    let mut peak = (0.0, f64::NEG_INFINITY);
    for _ in 0..800 {
        let energy = spec.energy_total(&phi0.scaled(t))?;
        if energy > peak.1 {
            peak = (t, energy);
        } else if energy < 0.0 && peak.1 > 0.0 {
            return Ok((peak.0, t));
        }
        t *= ratio;
    }
    Err(Error::GeometryFailed(alloc::format!(
        "Phi(t phi0) never turns negative along the ray (max {:.3e} at t = {:.3e})",
        peak.1,
        peak.0
    )))
}

fn directions(spec: &ProblemSpec, phi0: &Field, opts: &ProbeOptions) -> Result<Vec<Field>> {
    let grid = *spec.grid();
    let count = opts.samples_per_rho.max(FIXED_DIRECTIONS);
    let mut out = Vec::with_capacity(count);
    out.push(phi0.clone());
    for width in [0.25, 0.5, 2.0] {
        let g = Field::from_fn(grid, |x| {
            (-x.iter().map(|c| c * c).sum::<f64>() / (width * width)).exp()
        });
        out.push(normalized(spec, &g)?);
    }
    let mut k = 0u64;
    while out.len() < count {
        let mut rng = FieldSampler::new(opts.seed, k);
        let raw = if k.is_multiple_of(2) {
            rng.band_limited(grid)
        } else {
            rng.localized(grid, 2.0, 2.0)
        };
        k += 1;
        if spec.norm(&raw)? > 0.0 {
            out.push(normalized(spec, &raw)?);
        }
    }
    Ok(out)
}
