use super::*;
use crate::grid::make_grid;
use crate::problem::{Nonlinearity, Parameters, Weight};

fn spec_with(potential: Potential, lambda: f64) -> ProblemSpec {
    ProblemSpec::new(
        make_grid(1, 256, 40.0).unwrap(),
        Parameters { alpha: 0.75, lambda, mu: 0.05, p: 1.5 },
        Nonlinearity::power(4.0),
        potential,
        Weight::Gaussian,
    )
    .unwrap()
}

fn well() -> Potential {
    Potential::Well { radius: 1.0, height: 50.0, width: 1.0 }
}

#[test]
fn quartic_threshold_is_four() {
    let s = spec_with(Potential::CoerciveQuadratic, 1.0);
    let c = check_superquadratic_threshold(&s, 1.5, (1e-2, 1e3), 2000).unwrap();
    assert!(c.pass);
    let r = c.threshold.unwrap();
    assert!((r - 4.0).abs() < 0.04, "R = {r}");
    assert!((r - 4.0).abs() < 1e-9);
    assert_eq!(c.record().checker, "superquadratic_threshold");
}

#[test]
fn tau_outside_window_rejected() {
    let s = spec_with(Potential::CoerciveQuadratic, 1.0);
    assert!(check_superquadratic_threshold(&s, 2.0, (1e-2, 1e3), 100).is_err());
    assert!(check_superquadratic_threshold(&s, 1.0, (1e-2, 1e3), 100).is_err());
    assert_eq!(tau_window(1, 0.75, 4.0), (1.0, 2.0));
    assert_eq!(tau_window(3, 0.75, 3.5), (2.0, 3.5 / 1.5));
}

#[test]
fn scan_below_threshold_fails() {
    let s = spec_with(Potential::CoerciveQuadratic, 1.0);
    let c = check_superquadratic_threshold(&s, 1.5, (1e-2, 3.0), 500).unwrap();
    assert!(!c.pass && c.threshold.is_none());
    assert!(c.detail.contains("fails"));
}

#[test]
fn sublevel_bound_trivial_and_supported_cases() {
    let s = spec_with(well(), 100.0);
    let (lhs, rhs) = sublevel_l2_sides(&s, &Field::zeros(*s.grid()), 10.0).unwrap();
    assert_eq!((lhs, rhs), (0.0, 0.0));
    // Supported where V ≥ 10: the sublevel term vanishes and the bound is the weighted one alone.
    let outside = Field::from_fn(*s.grid(), |x| (-(x[0] - 8.0).powi(2)).exp());
    let outside = outside.zip_with(s.potential_field(), |u, v| if v >= 10.0 { u } else { 0.0 }).unwrap();
    let (lhs, rhs) = sublevel_l2_sides(&s, &outside, 10.0).unwrap();
    assert!(lhs <= s.norm_sq(&outside).unwrap() / 1000.0);
    assert!((rhs - s.norm_sq(&outside).unwrap() / 1000.0).abs() <= 1e-15 * rhs);
}

#[test]
fn sublevel_bound_never_fails_on_random_fields() {
    let s = spec_with(well(), 100.0);
    let r = check_sublevel_l2_bound(&s, 100.0, 10.0, 100, 7).unwrap();
    assert_eq!(r.violations, 0);
    assert!(r.pass() && r.min_slack >= 0.0 && r.max_ratio <= 1.0);
    assert_eq!(r.record().seed, 7);
    assert!(check_sublevel_l2_bound(&s, 100.0, 60.0, 1, 0).is_err());
    let coercive = spec_with(Potential::CoerciveQuadratic, 1.0);
    assert!(check_sublevel_l2_bound(&coercive, 100.0, 10.0, 1, 0).is_err());
}

#[test]
fn splitting_cases() {
    let s = spec_with(Potential::CoerciveQuadratic, 1.0);
    let g = *s.grid();
    let u0 = Field::from_fn(g, |x| (-x[0] * x[0]).exp());
    let seps: Vec<f64> = (0..=15).map(f64::from).collect();
    let zero = check_splitting(&s, &u0, &Field::zeros(g), &seps, 1e-3).unwrap();
    assert!(zero.rows.iter().all(|r| r.total == 0.0 && r.f_term == 0.0 && r.xi_term == 0.0));

    let t = check_splitting(&s, &u0, &u0, &seps, 1e-3).unwrap();
    let two = s.energy_total(&u0.scaled(2.0)).unwrap();
    let one = s.energy_total(&u0).unwrap();
    assert!((t.rows[0].total - (two - 2.0 * one).abs()).abs() < 1e-12);
    assert!(t.rows[0].total > 0.0);
    assert!(t.monotone && t.pass);
    assert!(t.rows.last().unwrap().total < 1e-3);

    assert!(check_splitting(&s, &u0, &u0, &[0.0, 19.0], 1e-3).is_err());
    assert!(check_splitting(&s, &u0, &u0, &[2.0, 1.0], 1e-3).is_err());
}

#[test]
fn coercivity_ladders() {
    let g = make_grid(1, 1024, 40.0).unwrap();
    let radii: Vec<f64> = (0..10).map(|k| 2.0 * k as f64).collect();
    let v = Field::from_fn(g, |x| 1.0 + x[0] * x[0]);
    let l = coercivity_probe(&v, &radii, 1.0).unwrap();
    assert!(l.pass);
    for r in l.rows.iter().filter(|r| r.radius > 1.0) {
        let envelope = 2.0 / (1.0 + (r.radius - 1.0).powi(2));
        assert!(r.ball_integral <= envelope * 1.02, "{r:?}");
        assert_eq!(r.sublevel_measure, 0.0);
    }
    let one = Field::constant(g, 1.0);
    let l = coercivity_probe(&one, &radii, 1.0).unwrap();
    assert!(!l.pass);
    assert!(l.rows.iter().all(|r| (r.ball_integral - 2.0).abs() <= g.spacing(0) + 1e-12));
    let w = Field::from_fn(g, |x| well().eval(x));
    let l = coercivity_probe(&w, &radii, 1.0).unwrap();
    assert!(!l.pass);
    let (x, v) = l.nonpositive_at.clone().unwrap();
    assert!(x[0].abs() <= 1.0 && v == 0.0);
    assert_eq!(l.rows[0].ball_integral, f64::INFINITY);
    assert!(l.record().witnesses.iter().any(|w| w.label == "nonpositive_potential"));
}

#[test]
fn superlevel_measures() {
    let g = make_grid(1, 1024, 40.0).unwrap();
    let v = Field::from_fn(g, |x| 1.0 + x[0] * x[0]);
    assert_eq!(superlevel_measure(&v, 1.0), 0.0);
    let w = Field::from_fn(g, |x| well().eval(x));
    assert!((superlevel_measure(&w, 50.0) - 4.0).abs() <= g.spacing(0));
    assert_eq!(superlevel_measure(&w, 0.0), 0.0);
    assert_eq!(superlevel_measure(&w, -1.0), 0.0);
}

#[test]
fn holder_cases() {
    let g = make_grid(1, 128, 16.0).unwrap();
    let c = Field::constant(g, 3.0);
    for beta in [0.3, 1.0, 1.5] {
        assert_eq!(holder_estimate(&c, beta).unwrap(), 0.0);
    }
    let x = Field::from_fn(g, |x| x[0]);
    assert!((holder_estimate_between(&x, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
    assert!(holder_estimate(&x, 0.0).is_err());
    assert!(holder_estimate(&x, 2.0).is_err());
    // |sin x - sin y| ≤ |x - y|, with near-equality at short range.
    let s = Field::from_fn(g, |x| (2.0 * core::f64::consts::PI * x[0] / 16.0).sin());
    let lip = holder_estimate(&s, 1.0).unwrap();
    let k = 2.0 * core::f64::consts::PI / 16.0;
    assert!(lip <= k * (1.0 + 1e-12) && lip > 0.99 * k);
}

#[test]
fn embedding_constants() {
    let g = make_grid(1, 128, 40.0).unwrap();
    let t = estimate_embedding_constants(0.75, g, &[2.0, 4.0], 60, 3, None).unwrap();
    assert!(t.gamma(2.0).unwrap() <= 1.0);
    for row in &t.rows {
        assert_eq!(row.history.len(), 60);
        assert!(row.history.windows(2).all(|w| w[1] >= w[0]));
    }
    assert!(estimate_embedding_constants(0.75, g, &[1.5], 1, 0, None).is_err());
    let g3 = make_grid(3, 8, 10.0).unwrap();
    assert!(estimate_embedding_constants(0.75, g3, &[4.0], 1, 0, None).is_err());
}

#[test]
fn embedding_constant_stable_under_refinement() {
    let est = |n: usize| {
        let g = make_grid(1, n, 40.0).unwrap();
        estimate_embedding_constants(0.75, g, &[4.0], 200, 1, Some(32)).unwrap().gamma(4.0).unwrap()
    };
    let (a, b) = (est(128), est(256));
    assert!((a - b).abs() < 0.1 * a, "{a} vs {b}");
}
