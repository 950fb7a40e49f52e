//! Sample-based checks of the structural assumptions on `f`, `V`, and `ξ`.
//!
//! Grids cannot certify limits or smoothness, so every check here is a
//! finite ladder with a hard threshold at its last rung. Checks that cannot
//! be decided on a grid at all are marked advisory.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::ProblemSpec;
use crate::error::{invalid, Result};
use crate::grid::{Field, Grid};
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Assumption {
    /// `|f(x,u)| ≤ c(1+|u|^{q-1})`
    F1,
    /// `f(x,u) = o(|u|)` as `u → 0`
    F2,
    /// `0 < ϑF(x,u) ≤ u f(x,u)` for `u ≠ 0`
    F3,
    /// `inf V > 0`
    V1,
    /// `∫_{B(y,1)} dx/V → 0` as `|y| → ∞`
    V2,
    /// `V ≥ 0`
    V3,
    /// `{V < b}` has finite measure
    V4,
    /// interior of `{V = 0}` nonempty, with closure equal to the zero set
    V5,
    /// `ξ > 0` and `ξ ∈ L^{2/(2-p)}`
    WeightIntegrable,
}

impl Assumption {
    pub const ALL: [Assumption; 9] = [
        Assumption::F1,
        Assumption::F2,
        Assumption::F3,
        Assumption::V1,
        Assumption::V2,
        Assumption::V3,
        Assumption::V4,
        Assumption::V5,
        Assumption::WeightIntegrable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Assumption::F1 => "f1",
            Assumption::F2 => "f2",
            Assumption::F3 => "f3",
            Assumption::V1 => "V1",
            Assumption::V2 => "V2",
            Assumption::V3 => "V3",
            Assumption::V4 => "V4",
            Assumption::V5 => "V5",
            Assumption::WeightIntegrable => "xi",
        }
    }
}

/// Where a check failed (or its extremal sample).
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub point: Vec<f64>,
    pub u: Option<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionCheck {
    pub assumption: Assumption,
    pub passed: bool,
    /// The grid can only suggest, not decide, this condition.
    pub advisory: bool,
    pub detail: String,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<AssumptionCheck>,
}

impl ValidationReport {
    pub fn get(&self, a: Assumption) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.assumption == a)
    }

    pub fn passed(&self, a: Assumption) -> bool {
        self.get(a).is_some_and(|c| c.passed)
    }

    pub fn all_passed(&self, which: &[Assumption]) -> bool {
        which.iter().all(|&a| self.passed(a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    /// Number of `|u|` values per nonlinearity ladder (at least 100).
    pub samples: usize,
    /// Level `b` of the sublevel set `{V < b}`.
    pub level: f64,
    /// Rungs of the ball-integral ladder.
    pub ladder_steps: usize,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            samples: 200,
            level: 1.0,
            ladder_steps: 10,
        }
    }
}

/// `∫_{B(y,radius)} dx/V` over grid cells within periodic distance `radius`
/// of grid point `center`; `+∞` when `V ≤ 0` inside the ball.
pub fn ball_inverse_integral(potential: &Field, center: usize, radius: f64) -> f64 {
    let grid = potential.grid();
    let mut sum = 0.0;
    for (i, &v) in potential.values().iter().enumerate() {
        if grid.periodic_distance(center, i) < radius {
            if v <= 0.0 {
                return f64::INFINITY;
            }
            sum += 1.0 / v;
        }
    }
    sum * grid.cell_volume()
}

/// Measure of `{V < b}` inside the ball around grid point `center`.
pub fn ball_sublevel_measure(potential: &Field, center: usize, radius: f64, level: f64) -> f64 {
    let grid = potential.grid();
    let count = potential
        .values()
        .iter()
        .enumerate()
        .filter(|(i, &v)| v < level && grid.periodic_distance(center, *i) < radius)
        .count();
    count as f64 * grid.cell_volume()
}

/// Grid measure of `{V < b}`.
pub fn sublevel_measure(potential: &Field, level: f64) -> f64 {
    let count = potential.values().iter().filter(|&&v| v < level).count();
    count as f64 * potential.grid().cell_volume()
}

/// Grid points on axis 0 (other axes at the origin) at distances `radii`
/// from the origin, each snapped to a whole number of cells. Returns
/// `(flat index, snapped distance)` pairs.
pub fn axis_ladder_points(grid: &Grid, radii: &[f64]) -> Result<Vec<(usize, f64)>> {
    let n = grid.n();
    let h = grid.spacing(0);
    radii
        .iter()
        .map(|&r| {
            let cells = (r / h).round();
            if !(cells >= 0.0) || n / 2 + cells as usize >= n {
                return Err(invalid("radii", alloc::format!("{r} lies outside the box")));
            }
            let mut idx = [n / 2; 3];
            idx[0] = n / 2 + cells as usize;
            Ok((grid.flat_index(&idx[..grid.dim()]), cells * h))
        })
        .collect()
}

/// Ladder from `|y| = 0` to `L/2 - 1 - h` in `steps` rungs; balls of radius 1
/// around the rungs stay inside the box.
pub(crate) fn axis_ladder(potential: &Field, steps: usize) -> Vec<(usize, f64)> {
    let grid = potential.grid();
    let h = grid.spacing(0);
    let top = (0.5 * grid.lengths()[0] - 1.0 - h).max(0.0);
    let steps = steps.max(2);
    let mut radii: Vec<f64> = (0..steps).map(|k| top * k as f64 / (steps - 1) as f64).map(|r| (r / h).floor() * h).collect();
    radii.dedup();
    axis_ladder_points(grid, &radii).expect("rungs lie inside the box")
}

pub fn validate_assumptions(spec: &ProblemSpec, opts: &ValidationOptions) -> ValidationReport {
    let mut checks = Vec::new();
    let samples = opts.samples.max(100);
    let xs = sample_points(spec);
    checks.push(check_growth(spec, &xs, samples));
    checks.push(check_small_u(spec, &xs));
    checks.push(check_superquadratic(spec, &xs, samples));
    let v = spec.potential_field();
    checks.push(check_positive_infimum(spec, v));
    checks.push(check_ball_integrals(spec, v, opts.ladder_steps));
    checks.push(check_nonnegative(spec, v));
    checks.push(check_finite_sublevel(spec, v, opts.level));
    checks.push(check_zero_set(spec, v));
    checks.push(check_weight(spec));
    ValidationReport { checks }
}

fn sample_points(spec: &ProblemSpec) -> Vec<Vec<f64>> {
    let grid = spec.grid();
    if spec.nonlinearity().is_autonomous() {
        return vec![vec![0.0; grid.dim()]];
    }
    let count = 16.min(grid.len());
    (0..count)
        .map(|k| spec.point(k * grid.len() / count).to_vec())
        .collect()
}

fn magnitude_ladder(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

fn check_growth(spec: &ProblemSpec, xs: &[Vec<f64>], samples: usize) -> AssumptionCheck {
    let q = spec.q();
    let mut low_max: f64 = 0.0;
    let mut high_max: f64 = 0.0;
    let mut worst: Option<Witness> = None;
    for s in magnitude_ladder(1e-6, 1e6, samples) {
        for u in [s, -s] {
            for x in xs {
                let ratio = spec.eval_f(x, u).abs() / (1.0 + u.abs().powf(q - 1.0));
                if !ratio.is_finite() {
                    return fail(Assumption::F1, "non-finite f", Some(witness(x, Some(u), ratio)));
                }
                let bucket = if s <= 1e3 { &mut low_max } else { &mut high_max };
                if ratio > *bucket {
                    *bucket = ratio;
                    if s > 1e3 {
                        worst = Some(witness(x, Some(u), ratio));
                    }
                }
            }
        }
    }
    let passed = high_max <= 1.05 * low_max + 1e-12;
    AssumptionCheck {
        assumption: Assumption::F1,
        passed,
        advisory: false,
        detail: alloc::format!(
            "sup |f|/(1+|u|^(q-1)): {low_max:.4e} for |u| <= 1e3, {high_max:.4e} above"
        ),
        witness: if passed { None } else { worst },
    }
}

fn check_small_u(spec: &ProblemSpec, xs: &[Vec<f64>]) -> AssumptionCheck {
    let mut ladder = Vec::new();
    for k in 1..=8 {
        let s = 10f64.powi(-k);
        let mut m: f64 = 0.0;
        for u in [s, -s] {
            for x in xs {
                m = m.max(spec.eval_f(x, u).abs() / s);
            }
        }
        ladder.push(m);
    }
    let monotone = ladder.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-300);
    let first = ladder[0];
    let last = *ladder.last().expect("eight rungs");
    let passed = monotone && last.is_finite() && last <= 0.5 * first;
    AssumptionCheck {
        assumption: Assumption::F2,
        passed,
        advisory: false,
        detail: alloc::format!("sup |f(u)|/|u| from {first:.3e} at |u|=0.1 to {last:.3e} at |u|=1e-8"),
        witness: if passed { None } else { Some(witness(&xs[0], Some(1e-8), last)) },
    }
}

fn check_superquadratic(spec: &ProblemSpec, xs: &[Vec<f64>], samples: usize) -> AssumptionCheck {
    let theta = spec.theta();
    for s in magnitude_ladder(1e-4, 1e4, samples) {
        for u in [s, -s] {
            for x in xs {
                let lhs = theta * spec.eval_F(x, u);
                let rhs = u * spec.eval_f(x, u);
                let ok = lhs > 0.0 && lhs <= rhs * (1.0 + 1e-12);
                if !ok {
                    return fail(
                        Assumption::F3,
                        "0 < theta F(x,u) <= u f(x,u) violated",
                        Some(witness(x, Some(u), lhs - rhs)),
                    );
                }
            }
        }
    }
    pass(Assumption::F3, alloc::format!("holds on the sampled ladder with theta = {theta}"))
}

fn argmin(v: &Field) -> (usize, f64) {
    v.values()
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty grid")
}

fn check_positive_infimum(spec: &ProblemSpec, v: &Field) -> AssumptionCheck {
    let (i, min) = argmin(v);
    if min > 0.0 {
        pass(Assumption::V1, alloc::format!("min V = {min:.4e}"))
    } else {
        fail(
            Assumption::V1,
            &alloc::format!("min V = {min:.4e} is not positive"),
            Some(witness(spec.point(i), None, min)),
        )
    }
}

fn check_ball_integrals(spec: &ProblemSpec, v: &Field, steps: usize) -> AssumptionCheck {
    let ladder: Vec<(f64, f64, usize)> = axis_ladder(v, steps)
        .into_iter()
        .map(|(center, r)| (r, ball_inverse_integral(v, center, 1.0), center))
        .collect();
    if let Some(&(r, value, center)) = ladder.iter().find(|l| !l.1.is_finite()) {
        return fail(
            Assumption::V2,
            &alloc::format!("1/V is not integrable on the ball at |y| = {r:.3} (V vanishes)"),
            Some(witness(spec.point(center), None, value)),
        );
    }
    let monotone = ladder.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-12));
    let first = ladder[0].1;
    let (r_last, last, center) = *ladder.last().expect("ladder has rungs");
    let passed = monotone && last < 0.1 * first;
    AssumptionCheck {
        assumption: Assumption::V2,
        passed,
        advisory: false,
        detail: alloc::format!(
            "ball integral of 1/V: {first:.4e} at |y|=0, {last:.4e} at |y|={r_last:.3}{}",
            if monotone { "" } else { " (ladder not monotone)" }
        ),
        witness: if passed { None } else { Some(witness(spec.point(center), None, last)) },
    }
}

fn check_nonnegative(spec: &ProblemSpec, v: &Field) -> AssumptionCheck {
    let (i, min) = argmin(v);
    if min >= 0.0 {
        pass(Assumption::V3, alloc::format!("min V = {min:.4e}"))
    } else {
        fail(Assumption::V3, "V takes negative values", Some(witness(spec.point(i), None, min)))
    }
}

fn check_finite_sublevel(spec: &ProblemSpec, v: &Field, level: f64) -> AssumptionCheck {
    let measure = sublevel_measure(v, level);
    let grid = v.grid();
    let n = grid.n();
    let touching = (0..grid.len()).find(|&i| {
        let idx = grid.multi_index(i);
        v.values()[i] < level && idx[..grid.dim()].iter().any(|&k| k == 0 || k == n - 1)
    });
    match touching {
        None => pass(
            Assumption::V4,
            alloc::format!("measure of {{V < {level}}} = {measure:.4e}, bounded away from the box edge"),
        ),
        Some(i) => fail(
            Assumption::V4,
            &alloc::format!("{{V < {level}}} reaches the box edge (measure {measure:.4e} is truncation-limited)"),
            Some(witness(spec.point(i), None, v.values()[i])),
        ),
    }
}

fn check_zero_set(spec: &ProblemSpec, v: &Field) -> AssumptionCheck {
    let grid = v.grid();
    let zero: Vec<bool> = v.values().iter().map(|&x| x.abs() <= 1e-14).collect();
    let neighbours = |i: usize| -> Vec<usize> {
        let idx = grid.multi_index(i);
        let n = grid.n();
        let mut out = Vec::new();
        for axis in 0..grid.dim() {
            for delta in [1, n - 1] {
                let mut j = idx;
                j[axis] = (j[axis] + delta) % n;
                out.push(grid.flat_index(&j[..grid.dim()]));
            }
        }
        out
    };
    let interior: Vec<bool> = (0..grid.len())
        .map(|i| zero[i] && neighbours(i).iter().all(|&j| zero[j]))
        .collect();
    let interior_count = interior.iter().filter(|&&b| b).count();
    // Zero cells that are neither interior nor next to the interior.
    let stray = (0..grid.len()).find(|&i| {
        zero[i] && !interior[i] && !neighbours(i).iter().any(|&j| interior[j])
    });
    // Connected components of the interior.
    let mut label = vec![usize::MAX; grid.len()];
    let mut components = 0;
    for start in 0..grid.len() {
        if !interior[start] || label[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        label[start] = components;
        while let Some(i) = stack.pop() {
            for j in neighbours(i) {
                if interior[j] && label[j] == usize::MAX {
                    label[j] = components;
                    stack.push(j);
                }
            }
        }
        components += 1;
    }
    let passed = interior_count > 0 && stray.is_none();
    AssumptionCheck {
        assumption: Assumption::V5,
        passed,
        advisory: true,
        detail: alloc::format!(
            "zero set: {} cells, interior {interior_count} cells in {components} component(s){}",
            zero.iter().filter(|&&b| b).count(),
            if stray.is_some() { ", with zero cells away from the interior" } else { "" }
        ),
        witness: stray.map(|i| witness(spec.point(i), None, v.values()[i])),
    }
}

fn check_weight(spec: &ProblemSpec) -> AssumptionCheck {
    let xi = spec.weight_field();
    let (i, min) = argmin(xi);
    if min <= 0.0 {
        return fail(
            Assumption::WeightIntegrable,
            "xi is not strictly positive",
            Some(witness(spec.point(i), None, min)),
        );
    }
    let r = 2.0 / (2.0 - spec.p());
    let grid = xi.grid();
    let mut total = 0.0;
    let mut shell = 0.0;
    for (k, &w) in xi.values().iter().enumerate() {
        let x = spec.point(k);
        let term = w.powf(r);
        total += term;
        let outer = x
            .iter()
            .zip(grid.lengths())
            .any(|(c, l)| c.abs() > 0.25 * l);
        if outer {
            shell += term;
        }
    }
    let passed = total.is_finite() && shell <= 1e-6 * total;
    AssumptionCheck {
        assumption: Assumption::WeightIntegrable,
        passed,
        advisory: false,
        detail: alloc::format!(
            "norm in L^{r:.3} = {:.4e}; outer half of the box carries {:.3e} of the integral",
            (total * grid.cell_volume()).powf(1.0 / r),
            shell / total
        ),
        witness: None,
    }
}

fn witness(x: &[f64], u: Option<f64>, value: f64) -> Witness {
    Witness {
        point: x.to_vec(),
        u,
        value,
    }
}

fn pass(a: Assumption, detail: String) -> AssumptionCheck {
    AssumptionCheck {
        assumption: a,
        passed: true,
        advisory: a == Assumption::V5,
        detail,
        witness: None,
    }
}

fn fail(a: Assumption, detail: &str, witness: Option<Witness>) -> AssumptionCheck {
    AssumptionCheck {
        assumption: a,
        passed: false,
        advisory: a == Assumption::V5,
        detail: detail.into(),
        witness,
    }
}
