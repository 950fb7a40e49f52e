//! Stand-alone numerical checks of the inequalities behind the existence
//! theory and of the regularity of computed solutions. Every checker is
//! deterministic given its seed and can summarize itself as a
//! [`CheckRecord`].

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::grid::{bessel_norm_sq, lp_norm, spectral_derivative, Field, Grid};
use crate::problem::{
    axis_ladder_points, ball_inverse_integral, ball_sublevel_measure, critical_exponent,
    sublevel_measure, Potential, ProblemSpec,
};
use crate::random::FieldSampler;
use num_traits::Float;

/// Scalar parameter of a check.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Real(f64),
    Int(u64),
    Text(String),
}

/// A named set of numbers pinpointing a failure or an extremal sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckWitness {
    pub label: String,
    pub values: Vec<(String, f64)>,
}

impl CheckWitness {
    fn new(label: &str, values: &[(&str, f64)]) -> Self {
        CheckWitness {
            label: label.to_string(),
            values: values.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

/// Uniform summary of a check: `{checker, params, seed, pass, witnesses}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub checker: String,
    pub params: Vec<(String, ParamValue)>,
    pub seed: u64,
    pub pass: bool,
    pub witnesses: Vec<CheckWitness>,
}

fn record(checker: &str, params: Vec<(&str, ParamValue)>, seed: u64, pass: bool, witnesses: Vec<CheckWitness>) -> CheckRecord {
    CheckRecord {
        checker: checker.to_string(),
        params: params.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        seed,
        pass,
        witnesses,
    }
}

// ---------------------------------------------------------------------------
// |f(u)|^τ / |u|^τ ≤ ½uf(u) - F(u) for large |u|

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCheck {
    pub tau: f64,
    pub range: (f64, f64),
    /// Smallest `R` in the range beyond which the inequality holds at every
    /// scanned `|u|`, refined by bisection between neighbouring samples.
    pub threshold: Option<f64>,
    pub pass: bool,
    pub detail: String,
}

impl ThresholdCheck {
    pub fn record(&self) -> CheckRecord {
        let mut w = Vec::new();
        if let Some(r) = self.threshold {
            w.push(CheckWitness::new("threshold", &[("R", r)]));
        }
        record(
            "superquadratic_threshold",
            vec![
                ("tau", ParamValue::Real(self.tau)),
                ("u_min", ParamValue::Real(self.range.0)),
                ("u_max", ParamValue::Real(self.range.1)),
            ],
            0,
            self.pass,
            w,
        )
    }
}

/// Admissible `τ`: `max(1, N/(2α)) < τ < q/(q-2)`.
pub fn tau_window(dim: usize, alpha: f64, q: f64) -> (f64, f64) {
    (f64::max(1.0, dim as f64 / (2.0 * alpha)), q / (q - 2.0))
}

/// Rejects `τ` outside [`tau_window`], then runs [`superquadratic_threshold`].
pub fn check_superquadratic_threshold(
    spec: &ProblemSpec,
    tau: f64,
    range: (f64, f64),
    samples: usize,
) -> Result<ThresholdCheck> {
    let (lo, hi) = tau_window(spec.grid().dim(), spec.alpha(), spec.q());
    if !(tau > lo && tau < hi) {
        return Err(invalid("tau", alloc::format!("{tau} is outside the admissible window ({lo}, {hi})")));
    }
    superquadratic_threshold(spec, tau, range, samples)
}

/// Scans `|u|` geometrically over `range` (both signs, and a spread of grid
/// points when `f` depends on `x`).
pub fn superquadratic_threshold(spec: &ProblemSpec, tau: f64, range: (f64, f64), samples: usize) -> Result<ThresholdCheck> {
    let (a, b) = range;
    if !(a > 0.0 && b > a && b.is_finite()) {
        return Err(invalid("range", "need 0 < u_min < u_max < inf"));
    }
    let samples = samples.max(2);
    let grid = spec.grid();
    let xs: Vec<Vec<f64>> = if spec.nonlinearity().is_autonomous() {
        vec![vec![0.0; grid.dim()]]
    } else {
        (0..16).map(|k| grid.point(k * grid.len() / 16)[..grid.dim()].to_vec()).collect()
    };
    let holds = |s: f64| -> bool {
        xs.iter().all(|x| {
            [s, -s].iter().all(|&u| {
                let lhs = (spec.eval_f(x, u).abs() / u.abs()).powf(tau);
                lhs <= spec.eval_scr_f(x, u)
            })
        })
    };
    let ladder: Vec<f64> = (0..samples)
        .map(|k| (a.ln() + (b.ln() - a.ln()) * k as f64 / (samples - 1) as f64).exp())
        .collect();
    let last_fail = ladder.iter().rposition(|&s| !holds(s));
    let threshold = match last_fail {
        None => Some(a),
        Some(i) if i + 1 == ladder.len() => None,
        Some(i) => {
            let (mut lo, mut hi) = (ladder[i], ladder[i + 1]);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if holds(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Some(hi)
        }
    };
    let detail = match threshold {
        Some(r) => alloc::format!("inequality holds for all scanned |u| >= {r:.6}"),
        None => alloc::format!("inequality fails at the top of the scan range |u| = {b:e}"),
    };
    Ok(ThresholdCheck {
        tau,
        range,
        threshold,
        pass: threshold.is_some(),
        detail,
    })
}

// ---------------------------------------------------------------------------
// ∫|δ|² ≤ (1/(λb))‖δ‖_λ² + ∫_{V<b}|δ|²

#[derive(Debug, Clone, PartialEq)]
pub struct SublevelBoundReport {
    pub lambda: f64,
    pub level: f64,
    pub trials: usize,
    pub seed: u64,
    pub violations: usize,
    /// Smallest `rhs - lhs` over the trials.
    pub min_slack: f64,
    /// Largest `lhs / rhs` over the trials.
    pub max_ratio: f64,
    pub witnesses: Vec<CheckWitness>,
}

impl SublevelBoundReport {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }

    pub fn record(&self) -> CheckRecord {
        record(
            "sublevel_l2_bound",
            vec![
                ("lambda", ParamValue::Real(self.lambda)),
                ("b", ParamValue::Real(self.level)),
                ("trials", ParamValue::Int(self.trials as u64)),
            ],
            self.seed,
            self.pass(),
            self.witnesses.clone(),
        )
    }
}

/// Both sides of the bound for one field: `(lhs, rhs)`.
pub fn sublevel_l2_sides(spec: &ProblemSpec, delta: &Field, level: f64) -> Result<(f64, f64)> {
    let lhs = delta.dot(delta)?;
    let dv = spec.grid().cell_volume();
    let inside: f64 = delta
        .values()
        .iter()
        .zip(spec.potential_field().values())
        .filter(|(_, &v)| v < level)
        .map(|(d, _)| d * d)
        .sum::<f64>()
        * dv;
    let rhs = spec.norm_sq(delta)? / (spec.lambda() * level) + inside;
    Ok((lhs, rhs))
}

/// Requires a well potential and `0 < b` below its height. `spec` supplies
/// everything but `λ`.
pub fn check_sublevel_l2_bound(spec: &ProblemSpec, lambda: f64, level: f64, trials: usize, seed: u64) -> Result<SublevelBoundReport> {
    match spec.potential() {
        Potential::Well { height, .. } if level > 0.0 && level < *height => {}
        Potential::Well { .. } => return Err(invalid("b", "must lie in (0, barrier height)")),
        _ => return Err(invalid("potential", "the sublevel bound is checked on a well potential")),
    }
    let spec = spec.with_lambda_mu(lambda, spec.mu())?;
    let grid = *spec.grid();
    let mut report = SublevelBoundReport {
        lambda,
        level,
        trials,
        seed,
        violations: 0,
        min_slack: f64::INFINITY,
        max_ratio: 0.0,
        witnesses: Vec::new(),
    };
    for t in 0..trials {
        let mut rng = FieldSampler::new(seed, t as u64);
        let delta = if t % 2 == 0 {
            rng.band_limited(grid)
        } else {
            let radius = 1.0 + 4.0 * rng.uniform();
            rng.localized(grid, radius, 4.0)
        };
        let (lhs, rhs) = sublevel_l2_sides(&spec, &delta, level)?;
        report.min_slack = report.min_slack.min(rhs - lhs);
        report.max_ratio = report.max_ratio.max(lhs / rhs);
        if lhs > rhs * (1.0 + 1e-12) {
            report.violations += 1;
            report
                .witnesses
                .push(CheckWitness::new("violation", &[("trial", t as f64), ("lhs", lhs), ("rhs", rhs)]));
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Φ(u₀ + w_s) ≈ Φ(w_s) + Φ(u₀) for far-apart bumps

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingRow {
    pub separation: f64,
    /// `|Φ(u_s) - Φ(u_s - u₀) - Φ(u₀)|`
    pub total: f64,
    /// Same split for `∫F(x,u)`.
    pub f_term: f64,
    /// Same split for `(μ/p)∫ξ|u|^p`.
    pub xi_term: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplittingTable {
    pub rows: Vec<SplittingRow>,
    /// Separation beyond which the effective supports are disjoint.
    pub overlap: f64,
    pub threshold: f64,
    pub monotone: bool,
    pub pass: bool,
}

impl SplittingTable {
    pub fn record(&self) -> CheckRecord {
        let witnesses = self
            .rows
            .iter()
            .map(|r| {
                CheckWitness::new(
                    "deviation",
                    &[("separation", r.separation), ("total", r.total), ("f_term", r.f_term), ("xi_term", r.xi_term)],
                )
            })
            .collect();
        record(
            "splitting",
            vec![("overlap", ParamValue::Real(self.overlap)), ("threshold", ParamValue::Real(self.threshold))],
            0,
            self.pass,
            witnesses,
        )
    }
}

/// Distance from the origin of the farthest point where `|u| > 1e-3·max|u|`.
fn effective_radius(u: &Field) -> f64 {
    let cut = 1e-3 * u.max_abs();
    let g = u.grid();
    u.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > cut)
        .map(|(i, _)| g.point(i)[..g.dim()].iter().map(|c| c * c).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// Translates `w` along axis 0 by each separation (snapped to whole cells).
/// Deviations must be non-increasing (to `1e-12`) beyond the overlap and
/// below `threshold` at the largest separation.
pub fn check_splitting(spec: &ProblemSpec, u0: &Field, w: &Field, separations: &[f64], threshold: f64) -> Result<SplittingTable> {
    let grid = *spec.grid();
    if separations.is_empty() || separations.windows(2).any(|p| p[1] <= p[0]) {
        return Err(invalid("separations", "need an increasing ladder"));
    }
    let edge = 1e-6 * u0.max_abs().max(w.max_abs()).max(f64::MIN_POSITIVE);
    if u0.boundary_max_abs() > edge || w.boundary_max_abs() > edge {
        return Err(invalid("u0/w", "supports reach the box boundary"));
    }
    let h = grid.spacing(0);
    let r_w = effective_radius(w);
    let half = 0.5 * grid.lengths()[0];
    if let Some(&s) = separations.iter().find(|&&s| s + r_w > half) {
        return Err(invalid("separations", alloc::format!("translated w at {s} reaches the box boundary")));
    }
    let base = spec.energy(u0)?;
    let mut rows = Vec::with_capacity(separations.len());
    for &s in separations {
        let shifted = w.roll(0, (s / h).round() as isize);
        let us = u0.add(&shifted)?;
        let whole = spec.energy(&us)?;
        let rest = spec.energy(&us.sub(u0)?)?;
        rows.push(SplittingRow {
            separation: s,
            total: (whole.total - rest.total - base.total).abs(),
            f_term: (whole.f_term - rest.f_term - base.f_term).abs(),
            xi_term: (whole.xi_term - rest.xi_term - base.xi_term).abs(),
        });
    }
    let overlap = effective_radius(u0) + r_w;
    let far: Vec<&SplittingRow> = rows.iter().filter(|r| r.separation >= overlap).collect();
    let monotone = far.windows(2).all(|p| p[1].total <= p[0].total + 1e-12);
    let last = rows.last().expect("non-empty ladder").total;
    Ok(SplittingTable {
        rows,
        overlap,
        threshold,
        monotone,
        pass: monotone && last < threshold,
    })
}

// ---------------------------------------------------------------------------
// ∫_{B(y,1)} dx/V along a ray

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityRow {
    /// `|y|`, snapped to the grid.
    pub radius: f64,
    pub ball_integral: f64,
    /// `ℒ(B(y,1) ∩ {V < b})`
    pub sublevel_measure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoercivityLadder {
    pub level: f64,
    pub rows: Vec<CoercivityRow>,
    /// Set when `V ≤ 0` somewhere, with the offending point.
    pub nonpositive_at: Option<(Vec<f64>, f64)>,
    pub pass: bool,
}

impl CoercivityLadder {
    pub fn record(&self) -> CheckRecord {
        let mut witnesses: Vec<CheckWitness> = self
            .rows
            .iter()
            .map(|r| {
                CheckWitness::new(
                    "ball",
                    &[("radius", r.radius), ("integral", r.ball_integral), ("sublevel_measure", r.sublevel_measure)],
                )
            })
            .collect();
        if let Some((x, v)) = &self.nonpositive_at {
            let mut values = vec![("V".to_string(), *v)];
            values.extend(x.iter().enumerate().map(|(i, c)| (alloc::format!("x{i}"), *c)));
            witnesses.push(CheckWitness { label: "nonpositive_potential".into(), values });
        }
        record("coercivity_probe", vec![("b", ParamValue::Real(self.level))], 0, self.pass, witnesses)
    }
}

/// Ball integrals of `1/V` at `|y| ∈ radii` along axis 0. Passes when the
/// ladder is non-increasing and its last value is below a tenth of the first.
pub fn coercivity_probe(potential: &Field, radii: &[f64], level: f64) -> Result<CoercivityLadder> {
    let grid = potential.grid();
    let nonpositive_at = potential
        .values()
        .iter()
        .enumerate()
        .find(|(_, &v)| v <= 0.0)
        .map(|(i, &v)| (grid.point(i)[..grid.dim()].to_vec(), v));
    let centers = axis_ladder_points(grid, radii)?;
    let rows: Vec<CoercivityRow> = centers
        .iter()
        .map(|&(c, radius)| CoercivityRow {
            radius,
            ball_integral: ball_inverse_integral(potential, c, 1.0),
            sublevel_measure: ball_sublevel_measure(potential, c, 1.0, level),
        })
        .collect();
    let finite = rows.iter().all(|r| r.ball_integral.is_finite());
    let monotone = rows.windows(2).all(|p| p[1].ball_integral <= p[0].ball_integral * (1.0 + 1e-12));
    let decayed = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) => b.ball_integral < 0.1 * a.ball_integral,
        _ => false,
    };
    Ok(CoercivityLadder {
        level,
        pass: nonpositive_at.is_none() && finite && monotone && decayed,
        rows,
        nonpositive_at,
    })
}

/// Grid measure of `V^b = {V < b}`.
pub fn superlevel_measure(potential: &Field, level: f64) -> f64 {
    sublevel_measure(potential, level)
}

// ---------------------------------------------------------------------------
// Hölder seminorms

/// Sup over grid pairs with `min_dist ≤ |x-y| ≤ L/4` of
/// `|u(x)-u(y)|/|x-y|^β` for `β ≤ 1`; for `1 < β < 2` the same quotient with
/// exponent `β-1` applied to each spectral partial derivative.
/// Distances are Euclidean in the box coordinates, not periodic.
pub fn holder_estimate(u: &Field, beta: f64) -> Result<f64> {
    holder_estimate_between(u, beta, 0.0)
}

pub fn holder_estimate_between(u: &Field, beta: f64, min_dist: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 2.0) {
        return Err(invalid("beta", alloc::format!("{beta} is not in (0,2)")));
    }
    if beta <= 1.0 {
        return Ok(holder_quotient(u, beta, min_dist));
    }
    let mut best: f64 = 0.0;
    for axis in 0..u.grid().dim() {
        let du = spectral_derivative(u, axis)?;
        best = best.max(holder_quotient(&du, beta - 1.0, min_dist));
    }
    Ok(best)
}

fn holder_quotient(u: &Field, exponent: f64, min_dist: f64) -> f64 {
    let g = u.grid();
    let max_dist = 0.25 * g.lengths().iter().copied().fold(f64::INFINITY, f64::min);
    let points: Vec<[f64; 3]> = (0..g.len()).map(|i| g.point(i)).collect();
    let vals = u.values();
    let dim = g.dim();
    let mut best: f64 = 0.0;
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            let d = (0..dim)
                .map(|a| (points[i][a] - points[j][a]).powi(2))
                .sum::<f64>()
                .sqrt();
            if d <= 0.0 || d < min_dist || d > max_dist {
                continue;
            }
            best = best.max((vals[i] - vals[j]).abs() / d.powf(exponent));
        }
    }
    best
}

// ---------------------------------------------------------------------------
// ‖u‖_{L^s} ≤ γ_s ‖u‖_{α,2}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRow {
    pub s: f64,
    pub gamma: f64,
    /// Running maximum after each trial.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub alpha: f64,
    pub trials: usize,
    pub seed: u64,
    pub rows: Vec<EmbeddingRow>,
}

impl EmbeddingTable {
    pub fn gamma(&self, s: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.s == s).map(|r| r.gamma)
    }

    pub fn record(&self) -> CheckRecord {
        let witnesses = self
            .rows
            .iter()
            .map(|r| CheckWitness::new("gamma", &[("s", r.s), ("gamma", r.gamma)]))
            .collect();
        record(
            "embedding_constants",
            vec![("alpha", ParamValue::Real(self.alpha)), ("trials", ParamValue::Int(self.trials as u64))],
            self.seed,
            true,
            witnesses,
        )
    }
}

/// Empirical `γ_s = max ‖u‖_{L^s}/‖u‖_{α,2}` over random fields: band-limited
/// ones (modes `|k| < max_mode`, default `n/4`) alternating with localized
/// ones. Requires `2 ≤ s < 2N/(N-2α)`.
pub fn estimate_embedding_constants(
    alpha: f64,
    grid: Grid,
    s_list: &[f64],
    trials: usize,
    seed: u64,
    max_mode: Option<usize>,
) -> Result<EmbeddingTable> {
    let critical = critical_exponent(grid.dim(), alpha);
    if let Some(&s) = s_list.iter().find(|&&s| !(s >= 2.0 && s < critical)) {
        return Err(invalid("s", alloc::format!("{s} is outside [2, {critical})")));
    }
    let cutoff = max_mode.unwrap_or((grid.n() / 4).max(1));
    let mut rows: Vec<EmbeddingRow> = s_list
        .iter()
        .map(|&s| EmbeddingRow { s, gamma: 0.0, history: Vec::with_capacity(trials) })
        .collect();
    for t in 0..trials {
        let mut rng = FieldSampler::new(seed, t as u64);
        let u = if t % 2 == 0 {
            rng.band_limited_modes(grid, cutoff)
        } else {
            let noise = rng.band_limited_modes(grid, cutoff);
            let radius = 0.5 + 2.0 * rng.uniform();
            let env = Field::from_fn(grid, |x| (-x.iter().map(|c| c * c).sum::<f64>() / (radius * radius)).exp());
            noise.zip_with(&env, |a, b| a * b)?
        };
        let denom = bessel_norm_sq(&u, alpha)?.sqrt();
        if denom == 0.0 {
            return Err(Error::NonFinite("zero random field"));
        }
        for row in rows.iter_mut() {
            let ratio = lp_norm(&u, row.s)? / denom;
            row.gamma = row.gamma.max(ratio);
            row.history.push(row.gamma);
        }
    }
    Ok(EmbeddingTable { alpha, trials, seed, rows })
}

#[cfg(test)]
mod tests;
