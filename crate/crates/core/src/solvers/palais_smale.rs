//! Boundedness check for Palais–Smale sequences. Along such a sequence at
//! level `c`,
//!
//! ```text
//! (½ - 1/ϑ)‖u‖_λ² ≤ 1 + c + ‖u‖_λ + C(1/p - 1/ϑ)μ‖ξ‖_{2/(2-p)}‖u‖_λ^p
//! ```
//!
//! where `C` bounds `‖u‖_{L²}^p / ‖u‖_λ^p`.

use alloc::vec::Vec;

use crate::error::Result;
use crate::grid::Field;
use crate::problem::ProblemSpec;
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsViolation {
    pub index: usize,
    pub norm: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsDiagnostics {
    pub level: f64,
    pub embedding: f64,
    pub checked: usize,
    pub max_norm: f64,
    /// Largest `‖u‖_λ` compatible with the inequality.
    pub implied_bound: f64,
    pub violations: Vec<PsViolation>,
}

impl PsDiagnostics {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `level` is the energy level `c` of the sequence; `embedding` is `C`
/// (for instance `γ₂^p`, or 1, since `‖u‖_{L²} ≤ ‖u‖_λ` whenever `V ≥ 0`).
pub fn ps_diagnostics(spec: &ProblemSpec, iterates: &[Field], level: f64, embedding: f64) -> Result<PsDiagnostics> {
    let norms = iterates
        .iter()
        .map(|u| spec.norm(u))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ps_diagnostics_from_norms(spec, &norms, level, embedding))
}

pub fn ps_diagnostics_from_norms(spec: &ProblemSpec, norms: &[f64], level: f64, embedding: f64) -> PsDiagnostics {
    let theta = spec.theta();
    let p = spec.p();
    let a = 0.5 - 1.0 / theta;
    let k = embedding * (1.0 / p - 1.0 / theta) * spec.mu() * spec.weight_norm();
    let rhs = |t: f64| 1.0 + level + t + k * t.powf(p);
    let mut violations = Vec::new();
    for (index, &norm) in norms.iter().enumerate() {
        let lhs = a * norm * norm;
        let r = rhs(norm);
        if lhs > r {
            violations.push(PsViolation { index, norm, lhs, rhs: r });
        }
    }
    // a t² - rhs(t) is negative at 0 and eventually positive; bisect its root.
    let gap = |t: f64| a * t * t - rhs(t);
    let mut hi = 1.0;
    while gap(hi) <= 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    PsDiagnostics {
        level,
        embedding,
        checked: norms.len(),
        max_norm: norms.iter().copied().fold(0.0, f64::max),
        implied_bound: hi,
        violations,
    }
}
