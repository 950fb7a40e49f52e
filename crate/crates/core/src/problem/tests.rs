use super::*;
use alloc::sync::Arc;
use crate::grid::{make_grid, weighted_norm_sq};
use crate::random::FieldSampler;
use core::f64::consts::PI;
use num_complex::Complex64;

fn params(lambda: f64, mu: f64) -> Parameters {
    Parameters {
        alpha: 0.75,
        lambda,
        mu,
        p: 1.5,
    }
}

fn model(n: usize) -> ProblemSpec {
    ProblemSpec::new(
        make_grid(1, n, 40.0).unwrap(),
        params(1.0, 0.01),
        Nonlinearity::power(4.0),
        Potential::CoerciveQuadratic,
        Weight::Gaussian,
    )
    .unwrap()
}

fn well() -> ProblemSpec {
    ProblemSpec::new(
        make_grid(1, 256, 40.0).unwrap(),
        params(100.0, 0.05),
        Nonlinearity::power(4.0),
        Potential::Well {
            radius: 1.0,
            height: 50.0,
            width: 1.0,
        },
        Weight::Gaussian,
    )
    .unwrap()
}

fn linear(mu: f64) -> ProblemSpec {
    ProblemSpec::new_unchecked(
        make_grid(1, 128, 40.0).unwrap(),
        params(1.0, mu),
        Nonlinearity::zero(),
        Potential::CoerciveQuadratic,
        Weight::Gaussian,
    )
    .unwrap()
}

fn gaussian(grid: Grid) -> Field {
    Field::from_fn(grid, |x| (-x[0] * x[0]).exp())
}

#[test]
fn model_f_and_antiderivative() {
    let s = model(64);
    assert_eq!(s.eval_f(&[0.0], 2.0), 8.0);
    assert_eq!(s.eval_F(&[0.0], 2.0), 4.0);
    assert_eq!(s.eval_f(&[0.0], 0.0), 0.0);
    assert_eq!(s.eval_F(&[0.0], 0.0), 0.0);
    assert_eq!(s.eval_f(&[0.0], -2.0), -8.0);
    assert_eq!(s.eval_F(&[0.0], -2.0), 4.0);
}

#[test]
fn scr_f_values() {
    let s = model(64);
    assert_eq!(s.eval_scr_f(&[0.0], 2.0), 4.0);
    assert_eq!(s.eval_scr_f(&[0.0], 0.0), 0.0);
    let cubic = ProblemSpec::new(
        make_grid(1, 64, 40.0).unwrap(),
        params(1.0, 0.0),
        Nonlinearity::power(3.0),
        Potential::CoerciveQuadratic,
        Weight::Gaussian,
    )
    .unwrap();
    assert!((cubic.eval_scr_f(&[0.0], -1.0) - 1.0 / 6.0).abs() < 1e-15);
}

#[test]
fn parameter_ranges_rejected() {
    let g = make_grid(1, 64, 40.0).unwrap();
    let build = |p: Parameters, q: f64| {
        ProblemSpec::new(g, p, Nonlinearity::power(q), Potential::CoerciveQuadratic, Weight::Gaussian)
    };
    assert!(build(Parameters { alpha: 1.0, ..params(1.0, 0.0) }, 4.0).is_err());
    assert!(build(Parameters { p: 2.0, ..params(1.0, 0.0) }, 4.0).is_err());
    assert!(build(params(0.0, 0.0), 4.0).is_err());
    assert!(build(params(1.0, -1.0), 4.0).is_err());
    assert!(build(params(1.0, 0.0), 2.0).is_err());
    // 2* = 2N/(N-2α) = 4 for N=3, α=0.75.
    let g3 = make_grid(3, 8, 10.0).unwrap();
    let s3 = ProblemSpec::new(g3, params(1.0, 0.0), Nonlinearity::power(4.0), Potential::CoerciveQuadratic, Weight::Gaussian);
    assert!(s3.is_err());
    assert_eq!(critical_exponent(1, 0.75), f64::INFINITY);
}

#[test]
fn custom_nonlinearity_failing_superquadraticity_is_rejected() {
    let quadratic = Nonlinearity::Custom {
        label: "u".into(),
        f: Arc::new(|_, u| u),
        antiderivative: Arc::new(|_, u| 0.5 * u * u),
        q: 3.0,
        theta: 3.0,
    };
    let r = ProblemSpec::new(
        make_grid(1, 64, 40.0).unwrap(),
        params(1.0, 0.0),
        quadratic,
        Potential::CoerciveQuadratic,
        Weight::Gaussian,
    );
    assert!(matches!(r, Err(Error::AssumptionViolated(_))));
}

#[test]
fn x_dependent_custom_nonlinearity_accepted() {
    let f = Nonlinearity::Custom {
        label: "(2+cos x)|u|^2u".into(),
        f: Arc::new(|x, u| (2.0 + x[0].cos()) * u * u * u),
        antiderivative: Arc::new(|x, u| (2.0 + x[0].cos()) * u.powi(4) / 4.0),
        q: 4.0,
        theta: 4.0,
    };
    let s = ProblemSpec::new(
        make_grid(1, 64, 40.0).unwrap(),
        params(1.0, 0.0),
        f,
        Potential::CoerciveQuadratic,
        Weight::Gaussian,
    )
    .unwrap();
    assert!(!s.nonlinearity().is_autonomous());
}

#[test]
fn model_passes_validation() {
    let r = validate_assumptions(&model(256), &ValidationOptions::default());
    for a in [
        Assumption::F1,
        Assumption::F2,
        Assumption::F3,
        Assumption::V1,
        Assumption::V2,
        Assumption::WeightIntegrable,
    ] {
        assert!(r.passed(a), "{}: {}", a.name(), r.get(a).unwrap().detail);
    }
}

#[test]
fn constant_potential_fails_v2() {
    let s = ProblemSpec::new(
        make_grid(1, 256, 40.0).unwrap(),
        params(1.0, 0.0),
        Nonlinearity::power(4.0),
        Potential::Constant { value: 1.0 },
        Weight::Gaussian,
    )
    .unwrap();
    let r = validate_assumptions(&s, &ValidationOptions::default());
    assert!(r.passed(Assumption::V1));
    assert!(!r.passed(Assumption::V2));
    assert!(r.get(Assumption::V2).unwrap().witness.is_some());
}

#[test]
fn well_passes_v3_to_v5_and_fails_v1() {
    let r = validate_assumptions(&well(), &ValidationOptions { level: 10.0, ..Default::default() });
    for a in [Assumption::V3, Assumption::V4, Assumption::V5] {
        assert!(r.passed(a), "{}: {}", a.name(), r.get(a).unwrap().detail);
    }
    assert!(r.get(Assumption::V5).unwrap().advisory);
    let v1 = r.get(Assumption::V1).unwrap();
    assert!(!v1.passed);
    let w = v1.witness.as_ref().unwrap();
    assert!(w.point[0].abs() <= 1.0 && w.value == 0.0);
}

#[test]
fn sublevel_and_ball_integrals() {
    let g = make_grid(1, 1024, 40.0).unwrap();
    let v = Field::from_fn(g, |x| {
        Potential::Well { radius: 1.0, height: 50.0, width: 1.0 }.eval(x)
    });
    let h = g.spacing(0);
    assert!((sublevel_measure(&v, 50.0) - 4.0).abs() <= h + 1e-12);
    assert_eq!(sublevel_measure(&v, 0.0), 0.0);
    let one = Field::constant(g, 1.0);
    let center = g.flat_index(&[512]);
    assert!((ball_inverse_integral(&one, center, 1.0) - 2.0).abs() <= h + 1e-12);
    assert_eq!(ball_inverse_integral(&v, center, 1.0), f64::INFINITY);
}

#[test]
fn energy_of_zero() {
    let s = model(64);
    let e = s.energy(&Field::zeros(*s.grid())).unwrap();
    assert_eq!((e.quad, e.f_term, e.xi_term, e.total), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn quadratic_only_energy() {
    let s = linear(0.0);
    let u = FieldSampler::new(1, 0).band_limited(*s.grid());
    let e = s.energy(&u).unwrap();
    let expected = 0.5 * weighted_norm_sq(&u, 0.75, s.potential_field(), 1.0).unwrap();
    assert!((e.total - expected).abs() <= 1e-12 * expected);
    assert_eq!(e.total, e.quad - e.f_term - e.xi_term);
}

/// Direct DFT and trapezoid sums, no FFT.
fn energy_oracle(s: &ProblemSpec, u: &Field) -> f64 {
    let g = s.grid();
    let n = g.n();
    let l = g.lengths()[0];
    let h = g.spacing(0);
    let vals = u.values();
    let mut spectral = 0.0;
    for k in 0..n {
        let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        let omega = 2.0 * PI * kk / l;
        let mut c = Complex64::new(0.0, 0.0);
        for (j, &v) in vals.iter().enumerate() {
            let phase = -2.0 * PI * (k * j) as f64 / n as f64;
            c += Complex64::new(phase.cos(), phase.sin()) * v;
        }
        spectral += (1.0 + omega * omega).powf(0.75) * c.norm_sqr();
    }
    let quad = 0.5 * (spectral * h / n as f64);
    let mut pot = 0.0;
    let mut f_term = 0.0;
    let mut xi_term = 0.0;
    for (j, &v) in vals.iter().enumerate() {
        let x = -0.5 * l + j as f64 * h;
        pot += (1.0 + x * x) * v * v;
        f_term += v.powi(4) / 4.0;
        xi_term += (-x * x).exp() * v.abs().powf(1.5);
    }
    quad + 0.5 * s.lambda() * pot * h - f_term * h - s.mu() / 1.5 * xi_term * h
}

#[test]
fn energy_matches_direct_quadrature() {
    let s = model(256);
    let u = gaussian(*s.grid());
    let e = s.energy_total(&u).unwrap();
    let oracle = energy_oracle(&s, &u);
    assert!((e - oracle).abs() <= 1e-8 * oracle.abs(), "{e} vs {oracle}");
}

#[test]
fn energy_reports_overflow() {
    let s = model(64);
    let u = Field::constant(*s.grid(), 1e100);
    assert!(matches!(s.energy(&u), Err(Error::NonFinite(_))));
}

#[test]
fn residual_of_zero_is_zero() {
    let s = model(64);
    let r = s.residual(&Field::zeros(*s.grid())).unwrap();
    assert!(r.values().iter().all(|&v| v == 0.0));
}

#[test]
fn residual_linear_without_nonlinearity() {
    let s = linear(0.0);
    let mut rng = FieldSampler::new(2, 0);
    let a = rng.band_limited(*s.grid());
    let b = rng.band_limited(*s.grid());
    let lhs = s.residual(&a.add(&b).unwrap()).unwrap();
    let rhs = s.residual(&a).unwrap().add(&s.residual(&b).unwrap()).unwrap();
    let scale = lhs.max_abs().max(1.0);
    for (x, y) in lhs.values().iter().zip(rhs.values()) {
        assert!((x - y).abs() <= 1e-12 * scale);
    }
}

#[test]
fn weak_form_matches_finite_difference() {
    let s = model(256);
    let h = 1e-5;
    for trial in 0..5 {
        let mut rng = FieldSampler::new(3, trial);
        let u = rng.band_limited(*s.grid());
        let v = rng.band_limited(*s.grid());
        let weak = s.derivative(&u, &v).unwrap();
        let fd = (s.energy_total(&u.axpy(h, &v).unwrap()).unwrap()
            - s.energy_total(&u.axpy(-h, &v).unwrap()).unwrap())
            / (2.0 * h);
        assert!((weak - fd).abs() <= 1e-6 * (1.0 + weak.abs()), "{weak} vs {fd}");
    }
}

#[test]
fn precond_gradient_cases() {
    let s = linear(0.0);
    let g = *s.grid();
    let zero = s.precond_gradient(&Field::zeros(g)).unwrap();
    assert!(zero.values().iter().all(|&v| v == 0.0));

    // With f = 0, μ = 0 and V = 0, the residual of cos(ξ₁x) is (1+ξ₁²)^α cos(ξ₁x).
    let free = ProblemSpec::new_unchecked(
        g,
        params(1.0, 0.0),
        Nonlinearity::zero(),
        Potential::Constant { value: 0.0 },
        Weight::Gaussian,
    )
    .unwrap();
    let w = 2.0 * PI / 40.0;
    let c = Field::from_fn(g, |x| (w * x[0]).cos());
    let r = free.residual(&c).unwrap();
    let pg = free.precond_gradient(&c).unwrap();
    let sym = (1.0 + w * w).powf(0.75);
    for i in 0..g.len() {
        assert!((r.values()[i] - sym * c.values()[i]).abs() < 1e-12);
        assert!((pg.values()[i] - c.values()[i]).abs() < 1e-12);
    }

    let s = model(256);
    for trial in 0..3 {
        let u = FieldSampler::new(4, trial).band_limited(*s.grid());
        let d = s.precond_gradient(&u).unwrap();
        let slope = s.derivative(&u, &d.scaled(-1.0)).unwrap();
        assert!(slope <= 0.0);
        let h = 1e-6;
        let fd = (s.energy_total(&u.axpy(-h, &d).unwrap()).unwrap()
            - s.energy_total(&u.axpy(h, &d).unwrap()).unwrap())
            / (2.0 * h);
        assert!(fd <= 0.0);
    }
}

#[test]
fn riesz_gradient_represents_derivative() {
    let s = model(256);
    let mut rng = FieldSampler::new(5, 0);
    let u = rng.band_limited(*s.grid());
    let v = rng.band_limited(*s.grid());
    let g = s.riesz_gradient(&u).unwrap();
    let lhs = s.inner(&g, &v).unwrap();
    let rhs = s.derivative(&u, &v).unwrap();
    assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + rhs.abs()));
}

#[test]
fn source_derivative_matches_difference_quotient() {
    let s = model(64);
    let u = Field::from_fn(*s.grid(), |x| 0.5 + 0.1 * x[0].sin());
    let d = s.source_derivative(&u, 0.0).unwrap();
    let h = 1e-6;
    let up = s.nonlinear_source(&u.map(|v| v + h)).unwrap();
    let dn = s.nonlinear_source(&u.map(|v| v - h)).unwrap();
    for i in 0..u.values().len() {
        let fd = (up.values()[i] - dn.values()[i]) / (2.0 * h);
        assert!((fd - d.values()[i]).abs() < 1e-6);
    }
}

#[test]
fn grid_mismatch_rejected() {
    let s = model(64);
    let other = Field::zeros(make_grid(1, 32, 40.0).unwrap());
    assert!(matches!(s.energy(&other), Err(Error::GridMismatch)));
}
