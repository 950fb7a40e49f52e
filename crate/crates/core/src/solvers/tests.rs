use super::*;
use crate::error::Error;
use crate::grid::make_grid;
use crate::problem::{Nonlinearity, Parameters, Potential, Weight};

fn coercive(mu: f64) -> ProblemSpec {
    ProblemSpec::new(
        make_grid(1, 256, 40.0).unwrap(),
        Parameters { alpha: 0.75, lambda: 1.0, mu, p: 1.5 },
        Nonlinearity::power(4.0),
        Potential::CoerciveQuadratic,
        Weight::Gaussian,
    )
    .unwrap()
}

#[test]
fn probe_without_sublinear_term() {
    let s = coercive(0.0);
    let probe = probe_geometry(&s, &ProbeOptions::default()).unwrap();
    assert!(probe.eta > 0.0);
    assert!(probe.ladder.iter().all(|l| l.min_energy > 0.0));
    assert_eq!(probe.mu0_estimate, probe.ladder.iter().map(|l| l.mu_threshold).fold(0.0, f64::max));
    assert!(probe.e_energy < 0.0 && probe.e_norm > probe.rho);
    assert_eq!(s.energy_total(&probe.e).unwrap(), probe.e_energy);
    assert_eq!(probe.sample_count, 16 * 32);
}

#[test]
fn probe_fails_for_large_mu() {
    let s = coercive(0.01);
    let probe = probe_geometry(&s, &ProbeOptions::default()).unwrap();
    let inflated = s.with_lambda_mu(1.0, 1e3 * probe.mu0_estimate).unwrap();
    let err = probe_geometry(&inflated, &ProbeOptions::default()).unwrap_err();
    assert!(matches!(err, Error::GeometryFailed(_)));
}

#[test]
fn probe_accepts_explicit_ladder_and_rejects_bad_one() {
    let s = coercive(0.01);
    let opts = ProbeOptions { rho_grid: Some(alloc::vec![0.2, 0.4, 0.8]), ..Default::default() };
    let probe = probe_geometry(&s, &opts).unwrap();
    assert!([0.2, 0.4, 0.8].contains(&probe.rho));
    let bad = ProbeOptions { rho_grid: Some(alloc::vec![0.4, 0.2]), ..Default::default() };
    assert!(probe_geometry(&s, &bad).is_err());
}

#[test]
fn mountain_pass_certificate() {
    let s = coercive(0.01);
    let probe = probe_geometry(&s, &ProbeOptions::default()).unwrap();
    let opts = SolverOptions { rho: Some(probe.rho), ..Default::default() };
    let report = mountain_pass_solve(&s, &probe.e, &opts).unwrap();
    assert!(report.converged);
    assert_eq!(report.classification, Classification::MountainPass);
    assert!(report.residual_norm <= 1e-8);
    assert!(s.residual_norm(&report.solution).unwrap() <= 1e-8);
    assert!(report.energy >= probe.eta);
    assert!(report.norm >= probe.rho / 10.0);
    let descent: Vec<f64> = report.trace.iter().filter(|r| !r.newton).map(|r| r.energy).collect();
    assert!(descent.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

#[test]
fn ball_min_descends_to_negative_interior_minimum() {
    let s = coercive(0.01);
    let report = ball_min_solve(&s, 1.0, &SolverOptions::default()).unwrap();
    assert!(report.converged);
    assert_eq!(report.classification, Classification::LocalMin);
    assert!(report.energy < 0.0);
    assert!(report.norm < 1.0);
    assert!(s.residual_norm(&report.solution).unwrap() <= 1e-8);
    assert!(report.trace.windows(2).all(|w| w[1].energy <= w[0].energy + 1e-12));
    assert!(report.trace[0].energy < 0.0);
}

#[test]
fn ball_min_without_sublinear_term_fails() {
    let s = coercive(0.0);
    let err = ball_min_solve(&s, 1.0, &SolverOptions::default()).unwrap_err();
    assert!(matches!(err, Error::SolverFailed(_)));
}

#[test]
fn ps_bound_cases() {
    let s = coercive(0.01);
    let zeros = alloc::vec![Field::zeros(*s.grid()); 3];
    let d = ps_diagnostics(&s, &zeros, 0.0, 1.0).unwrap();
    assert!(d.passed() && d.max_norm == 0.0 && d.implied_bound > 0.0);

    let probe = probe_geometry(&s, &ProbeOptions::default()).unwrap();
    let report = mountain_pass_solve(&s, &probe.e, &SolverOptions::default()).unwrap();
    let norms: Vec<f64> = report.trace.iter().map(|r| r.norm).collect();
    let level = report.trace.iter().map(|r| r.energy).fold(f64::NEG_INFINITY, f64::max);
    let d = ps_diagnostics_from_norms(&s, &norms, level, 1.0);
    assert!(d.passed());
    assert!(d.max_norm <= d.implied_bound);

    let blown = report.solution.scaled(1e6);
    let d = ps_diagnostics(&s, &[blown], level, 1.0).unwrap();
    assert_eq!(d.violations.len(), 1);
}
