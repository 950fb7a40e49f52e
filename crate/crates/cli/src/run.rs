//! Mode orchestration. Stages run in order; a failing stage is recorded and
//! later stages that do not depend on it still run.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bessel_mp_core::kernels::bessel_kernel;
use bessel_mp_core::problem::{critical_exponent, validate_assumptions, Assumption, PotentialClass, ValidationOptions};
use bessel_mp_core::solvers::{
    mountain_pass_solve, probe_geometry, ps_diagnostics_from_norms, two_solution_experiment, GeometryProbe, SolveReport,
    TwoSolutionOutcome,
};
use bessel_mp_core::verify::{
    check_splitting, check_sublevel_l2_bound, check_superquadratic_threshold, coercivity_probe,
    estimate_embedding_constants, holder_estimate, superlevel_measure, tau_window, CheckRecord, CheckWitness, ParamValue,
};
use bessel_mp_core::{Field, Grid, ProblemSpec};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::bmpf;
use crate::config::{Checker, Mode, RunConfig};
use crate::report::{record_json, solve_json, write_kernel_table, write_profile, write_trace, KernelRow, RunReport, StageReport};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("cannot create output directory {path}: {source}")]
    OutputDir { path: PathBuf, source: std::io::Error },
    #[error("cannot write report: {0}")]
    Report(std::io::Error),
}

/// Holder quotients compare all point pairs; beyond this many points the
/// check is refused rather than left to run for hours.
const HOLDER_MAX_POINTS: usize = 8192;

struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn field(&mut self, name: &str, f: &Field) -> Result<(), String> {
        let p = self.path(name);
        bmpf::save_field(&p, f).map_err(|e| format!("{}: {e}", p.display()))
    }

    fn trace(&mut self, name: &str, r: &SolveReport) -> Result<(), String> {
        let p = self.path(name);
        write_trace(&p, &r.trace).map_err(|e| format!("{}: {e}", p.display()))
    }

    fn profile(&mut self, name: &str, f: &Field) -> Result<(), String> {
        let p = self.path(name);
        write_profile(&p, f).map_err(|e| format!("{}: {e}", p.display()))
    }
}

fn stage<T>(
    report: &mut RunReport,
    name: &str,
    f: impl FnOnce() -> Result<(bool, Value, T), String>,
) -> Option<T> {
    let start = Instant::now();
    let out = f();
    let seconds = start.elapsed().as_secs_f64();
    let (pass, result, error, value) = match out {
        Ok((pass, result, value)) => (pass, result, None, Some(value)),
        Err(e) => (false, Value::Null, Some(e), None),
    };
    report.push(StageReport { name: name.to_string(), pass, seconds, result, error });
    value
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Runs the configured mode, writing all outputs into `config.out`.
/// `report.passed()` decides the exit status.
pub fn run(config: &RunConfig) -> Result<RunReport, RunError> {
    fs::create_dir_all(&config.out).map_err(|source| RunError::OutputDir { path: config.out.clone(), source })?;
    let mut report = RunReport::new(config);
    let mut out = Outputs { dir: config.out.clone(), files: Vec::new() };
    match config.mode {
        Mode::KernelTable => kernel_table(config, &mut report, &mut out),
        mode => {
            let spec = stage(&mut report, "build_spec", || {
                let s = config.spec().map_err(err)?;
                let summary = json!({
                    "potential": s.potential().label(),
                    "weight": s.weight().label(),
                    "grid_points": s.grid().len(),
                    "power_of_two": s.grid().is_power_of_two(),
                });
                Ok((true, summary, s))
            });
            if let Some(spec) = spec {
                match mode {
                    Mode::Solve => solve(config, &spec, &mut report, &mut out),
                    Mode::TwoSolutions => two_solutions(config, &spec, &mut report, &mut out),
                    Mode::Verify => verify(config, &spec, &mut report),
                    Mode::ProbeGeometry => probe_only(config, &spec, &mut report, &mut out),
                    Mode::KernelTable => unreachable!(),
                }
            }
        }
    }
    let path = out.path("report.json");
    report.files = out.files;
    fs::write(&path, report.to_json()).map_err(RunError::Report)?;
    Ok(report)
}

fn relevant_assumptions(class: PotentialClass) -> &'static [Assumption] {
    use Assumption::*;
    match class {
        PotentialClass::Coercive => &[F1, F2, F3, V1, V2, WeightIntegrable],
        PotentialClass::Well => &[F1, F2, F3, V3, V4, WeightIntegrable],
        PotentialClass::Unspecified => &[F1, F2, F3, WeightIntegrable],
    }
}

fn assumptions_record(spec: &ProblemSpec, level: f64, seed: u64) -> CheckRecord {
    let opts = ValidationOptions { level, ..ValidationOptions::default() };
    let v = validate_assumptions(spec, &opts);
    let relevant = relevant_assumptions(spec.potential().class());
    let witnesses = v
        .checks
        .iter()
        .map(|c| {
            let mut values = vec![
                ("passed".to_string(), f64::from(u8::from(c.passed))),
                ("advisory".to_string(), f64::from(u8::from(c.advisory))),
                ("relevant".to_string(), f64::from(u8::from(relevant.contains(&c.assumption)))),
            ];
            if let Some(w) = &c.witness {
                values.extend(w.point.iter().enumerate().map(|(i, x)| (format!("x{i}"), *x)));
                if let Some(u) = w.u {
                    values.push(("u".into(), u));
                }
                values.push(("value".into(), w.value));
            }
            CheckWitness { label: c.assumption.name().to_string(), values }
        })
        .collect();
    CheckRecord {
        checker: "assumptions".into(),
        params: vec![
            ("class".into(), ParamValue::Text(format!("{:?}", spec.potential().class()).to_lowercase())),
            ("b".into(), ParamValue::Real(level)),
        ],
        seed,
        pass: v.all_passed(relevant),
        witnesses,
    }
}

fn assumptions_stage(config: &RunConfig, spec: &ProblemSpec, report: &mut RunReport) {
    stage(report, "assumptions", || {
        let r = assumptions_record(spec, config.verify.level_b, config.seed);
        Ok((r.pass, record_json(&r), ()))
    });
}

fn probe_json(p: &GeometryProbe) -> Value {
    let ladder: Vec<Value> = p
        .ladder
        .iter()
        .map(|s| json!({"rho": s.rho, "min_energy": s.min_energy, "mu_threshold": s.mu_threshold}))
        .collect();
    json!({
        "rho": p.rho,
        "eta": p.eta,
        "mu0_estimate": p.mu0_estimate,
        "e_norm": p.e_norm,
        "e_energy": p.e_energy,
        "sample_count": p.sample_count,
        "seed": p.seed,
        "ladder": ladder,
    })
}

fn probe_stage(config: &RunConfig, spec: &ProblemSpec, report: &mut RunReport) -> Option<GeometryProbe> {
    stage(report, "probe_geometry", || {
        let p = probe_geometry(spec, &config.probe_options()).map_err(err)?;
        Ok((p.eta > 0.0 && p.e_energy < 0.0, probe_json(&p), p))
    })
}

fn probe_only(config: &RunConfig, spec: &ProblemSpec, report: &mut RunReport, out: &mut Outputs) {
    if let Some(p) = probe_stage(config, spec, report) {
        stage(report, "write_outputs", || {
            out.field("e.bmpf", &p.e)?;
            out.profile("profile.csv", &p.e)?;
            Ok((true, json!({"files": ["e.bmpf", "profile.csv"]}), ()))
        });
    }
}

fn solve(config: &RunConfig, spec: &ProblemSpec, report: &mut RunReport, out: &mut Outputs) {
    assumptions_stage(config, spec, report);
    let Some(probe) = probe_stage(config, spec, report) else { return };
    let opts = bessel_mp_core::solvers::SolverOptions { rho: Some(probe.rho), ..config.solver_options() };
    let solved = stage(report, "mountain_pass_solve", || {
        let r = mountain_pass_solve(spec, &probe.e, &opts).map_err(err)?;
        let mut summary = solve_json(&r);
        summary["eta"] = json!(probe.eta);
        summary["energy_at_least_eta"] = json!(r.energy >= probe.eta);
        out.field("solution.bmpf", &r.solution)?;
        out.trace("trace.csv", &r)?;
        out.profile("profile.csv", &r.solution)?;
        Ok((r.converged && r.energy > 0.0, summary, r))
    });
    if let Some(r) = solved {
        stage(report, "ps_diagnostics", || {
            let norms: Vec<f64> = r.trace.iter().map(|t| t.norm).collect();
            let level = r.trace.iter().map(|t| t.energy).fold(r.energy, f64::max);
            let d = ps_diagnostics_from_norms(spec, &norms, level, 1.0);
            let summary = json!({
                "level": d.level,
                "embedding": d.embedding,
                "checked": d.checked,
                "max_norm": d.max_norm,
                "implied_bound": d.implied_bound,
                "violations": d.violations.len(),
            });
            Ok((d.passed(), summary, ()))
        });
    }
}

fn sweep_entry_json(lambda: f64, mu: f64, o: &Result<TwoSolutionOutcome, String>) -> Value {
    match o {
        Ok(o) => json!({
            "lambda": lambda,
            "mu": mu,
            "success": o.success,
            "eta": o.probe.eta,
            "rho": o.probe.rho,
            "m_lambda": o.ball_min.energy,
            "c_lambda": o.mountain_pass.energy,
            "distinctness": o.distinctness,
        }),
        Err(e) => json!({"lambda": lambda, "mu": mu, "success": false, "error": e}),
    }
}

fn two_solutions(config: &RunConfig, spec: &ProblemSpec, report: &mut RunReport, out: &mut Outputs) {
    assumptions_stage(config, spec, report);
    let lambdas = if config.sweep.lambdas.is_empty() { vec![spec.lambda()] } else { config.sweep.lambdas.clone() };
    let mus = if config.sweep.mus.is_empty() { vec![spec.mu()] } else { config.sweep.mus.clone() };
    let pairs: Vec<(f64, f64)> = lambdas.iter().flat_map(|&l| mus.iter().map(move |&m| (l, m))).collect();
    let opts = config.two_solution_options();

    let found = stage(report, "sweep", || {
        // Batches as wide as the thread pool; the reported prefix stops at the
        // first success in sweep order, whatever the batch width.
        let width = rayon::current_num_threads().max(1);
        let mut entries = Vec::new();
        let mut chosen = None;
        for batch in pairs.chunks(width) {
            let results: Vec<Result<TwoSolutionOutcome, String>> = batch
                .par_iter()
                .map(|&(l, m)| spec.with_lambda_mu(l, m).and_then(|s| two_solution_experiment(&s, &opts)).map_err(err))
                .collect();
            for (&(l, m), r) in batch.iter().zip(results) {
                entries.push(sweep_entry_json(l, m, &r));
                if let Ok(o) = r {
                    if o.success {
                        chosen = Some(o);
                        break;
                    }
                }
            }
            if chosen.is_some() {
                break;
            }
        }
        let selected = chosen.as_ref().map(|o| json!({"lambda": o.lambda, "mu": o.mu}));
        let summary = json!({"candidates": pairs.len(), "tried": entries, "selected": selected});
        Ok((chosen.is_some(), summary, chosen))
    })
    .flatten();

    if let Some(o) = found {
        stage(report, "two_solutions", || {
            out.field("mountain_pass.bmpf", &o.mountain_pass.solution)?;
            out.field("ball_min.bmpf", &o.ball_min.solution)?;
            out.trace("trace.csv", &o.mountain_pass)?;
            out.trace("trace_ball_min.csv", &o.ball_min)?;
            out.profile("profile.csv", &o.mountain_pass.solution)?;
            out.profile("profile_ball_min.csv", &o.ball_min.solution)?;
            let summary = json!({
                "lambda": o.lambda,
                "mu": o.mu,
                "m_lambda": o.ball_min.energy,
                "c_lambda": o.mountain_pass.energy,
                "eta": o.probe.eta,
                "levels_ordered": o.levels_ordered(),
                "distinctness": o.distinctness,
                "probe": probe_json(&o.probe),
                "mountain_pass": solve_json(&o.mountain_pass),
                "ball_min": solve_json(&o.ball_min),
            });
            Ok((o.success && o.levels_ordered(), summary, ()))
        });
    }
}

fn verify(config: &RunConfig, spec: &ProblemSpec, report: &mut RunReport) {
    let checks = if config.verify.checks.is_empty() {
        Checker::defaults_for(spec.potential().class())
    } else {
        config.verify.checks.clone()
    };
    let results: Vec<(Checker, Result<CheckRecord, String>, f64)> = checks
        .par_iter()
        .map(|&c| {
            let start = Instant::now();
            let r = run_checker(config, spec, c);
            (c, r, start.elapsed().as_secs_f64())
        })
        .collect();
    for (c, r, seconds) in results {
        let (pass, result, error) = match r {
            Ok(rec) => (rec.pass, record_json(&rec), None),
            Err(e) => (false, Value::Null, Some(e)),
        };
        report.push(StageReport { name: c.as_str().to_string(), pass, seconds, result, error });
    }
}

fn gaussian(grid: Grid) -> Field {
    Field::from_fn(grid, |x| (-x.iter().map(|c| c * c).sum::<f64>()).exp())
}

/// Resolved verify parameters, with the "auto" defaults filled in.
pub fn default_separations(box_length: f64) -> Vec<f64> {
    (0..).map(f64::from).take_while(|&s| s <= 0.375 * box_length).collect()
}

pub fn default_radii(box_length: f64) -> Vec<f64> {
    (0..).map(|k| 2.0 * f64::from(k)).take_while(|&r| r <= 0.5 * box_length - 2.0).collect()
}

fn run_checker(config: &RunConfig, spec: &ProblemSpec, checker: Checker) -> Result<CheckRecord, String> {
    let v = &config.verify;
    let grid = *spec.grid();
    let seed = config.seed;
    match checker {
        Checker::Assumptions => Ok(assumptions_record(spec, v.level_b, seed)),
        Checker::SuperquadraticThreshold => {
            let (lo, hi) = tau_window(grid.dim(), spec.alpha(), spec.q());
            let tau = v.tau.unwrap_or(if hi.is_finite() { 0.5 * (lo + hi) } else { lo + 1.0 });
            let c = check_superquadratic_threshold(spec, tau, (v.u_min, v.u_max), v.scan_samples).map_err(err)?;
            let mut rec = c.record();
            rec.seed = seed;
            if !c.pass {
                rec.witnesses.push(CheckWitness { label: format!("detail: {}", c.detail), values: Vec::new() });
            }
            Ok(rec)
        }
        Checker::SublevelL2Bound => {
            let r = check_sublevel_l2_bound(spec, spec.lambda(), v.level_b, v.trials, seed).map_err(err)?;
            Ok(r.record())
        }
        Checker::Splitting => {
            let seps = if v.separations.is_empty() { default_separations(grid.lengths()[0]) } else { v.separations.clone() };
            let u0 = gaussian(grid);
            let t = check_splitting(spec, &u0, &u0, &seps, v.splitting_threshold).map_err(err)?;
            let mut rec = t.record();
            rec.seed = seed;
            Ok(rec)
        }
        Checker::CoercivityProbe => {
            let radii = if v.radii.is_empty() { default_radii(grid.lengths()[0]) } else { v.radii.clone() };
            let mut rec = coercivity_probe(spec.potential_field(), &radii, v.level_b).map_err(err)?.record();
            rec.seed = seed;
            Ok(rec)
        }
        Checker::SuperlevelMeasure => {
            let m = superlevel_measure(spec.potential_field(), v.level_b);
            Ok(CheckRecord {
                checker: "superlevel_measure".into(),
                params: vec![("b".into(), ParamValue::Real(v.level_b))],
                seed,
                pass: m.is_finite(),
                witnesses: vec![CheckWitness { label: "measure".into(), values: vec![("measure".into(), m)] }],
            })
        }
        Checker::Holder => holder_refinement(config, spec),
        Checker::EmbeddingConstants => {
            let s_list: Vec<f64> = if v.embedding_s.is_empty() {
                let crit = critical_exponent(grid.dim(), spec.alpha());
                [2.0, 4.0].into_iter().filter(|&s| s < crit).collect()
            } else {
                v.embedding_s.clone()
            };
            let t = estimate_embedding_constants(spec.alpha(), grid, &s_list, v.embedding_trials, seed, v.embedding_max_mode)
                .map_err(err)?;
            let mut rec = t.record();
            if let Some(m) = v.embedding_max_mode {
                rec.params.push(("max_mode".into(), ParamValue::Int(m as u64)));
            }
            Ok(rec)
        }
    }
}

fn solve_on(config: &RunConfig, spec: &ProblemSpec) -> Result<SolveReport, String> {
    let probe = probe_geometry(spec, &config.probe_options()).map_err(err)?;
    let opts = bessel_mp_core::solvers::SolverOptions { rho: Some(probe.rho), ..config.solver_options() };
    mountain_pass_solve(spec, &probe.e, &opts).map_err(err)
}

/// Solves on the configured grid and on the doubled one, and compares the
/// Hölder quotients of the two solutions.
fn holder_refinement(config: &RunConfig, spec: &ProblemSpec) -> Result<CheckRecord, String> {
    let grid = *spec.grid();
    let fine = Grid::with_lengths(grid.dim(), 2 * grid.n(), grid.lengths()).map_err(err)?;
    if fine.len() > HOLDER_MAX_POINTS {
        return Err(format!("{} points on the refined grid; the pairwise check allows {HOLDER_MAX_POINTS}", fine.len()));
    }
    let beta = config.verify.holder_beta.unwrap_or((0.9 * 2.0 * spec.alpha()).min(1.99));
    let mut witnesses = Vec::new();
    let mut estimates = Vec::new();
    let mut converged = true;
    for g in [grid, fine] {
        let s = spec.on_grid(g).map_err(err)?;
        let r = solve_on(config, &s)?;
        let h = holder_estimate(&r.solution, beta).map_err(err)?;
        converged &= r.converged;
        estimates.push(h);
        witnesses.push(CheckWitness {
            label: "grid".into(),
            values: vec![
                ("n".into(), g.n() as f64),
                ("estimate".into(), h),
                ("energy".into(), r.energy),
                ("residual_norm".into(), r.residual_norm),
            ],
        });
    }
    let drift = (estimates[1] - estimates[0]).abs() / estimates[0].abs().max(f64::MIN_POSITIVE);
    witnesses.push(CheckWitness { label: "drift".into(), values: vec![("relative".into(), drift)] });
    Ok(CheckRecord {
        checker: "holder_refinement".into(),
        params: vec![
            ("beta".into(), ParamValue::Real(beta)),
            ("n".into(), ParamValue::Int(grid.n() as u64)),
            ("max_drift".into(), ParamValue::Real(0.05)),
        ],
        seed: config.seed,
        pass: converged && drift < 0.05,
        witnesses,
    })
}

fn kernel_table(config: &RunConfig, report: &mut RunReport, out: &mut Outputs) {
    let dim = config.grid.dim;
    let cases: Vec<(f64, f64)> = config
        .kernel
        .alphas
        .iter()
        .flat_map(|&a| config.kernel.radii.iter().map(move |&r| (a, r)))
        .collect();
    stage(report, "kernel_table", || {
        let evals: Vec<Result<KernelRow, String>> = cases
            .par_iter()
            .map(|&(alpha, radius)| {
                bessel_kernel(radius, alpha, dim)
                    .map(|k| KernelRow { radius, alpha, dim, g_value: k.value, est_error: k.est_error })
                    .map_err(|e| format!("alpha={alpha}, radius={radius}: {e}"))
            })
            .collect();
        let errors: Vec<String> = evals.iter().filter_map(|r| r.as_ref().err().cloned()).collect();
        let rows: Vec<KernelRow> = evals.into_iter().filter_map(Result::ok).collect();
        let path = out.path("kernel_table.csv");
        write_kernel_table(&path, &rows).map_err(|e| format!("{}: {e}", path.display()))?;
        let summary = json!({"rows": rows.len(), "errors": errors, "file": "kernel_table.csv"});
        Ok((errors.is_empty(), summary, ()))
    });
}

/// Reads `BESSELMP_THREADS` and sizes the global pool. Returns the thread count.
pub fn configure_threads() -> Result<usize, String> {
    if let Ok(text) = std::env::var("BESSELMP_THREADS") {
        let n: usize = text
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("BESSELMP_THREADS must be a positive integer, got `{text}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(err)?;
    }
    Ok(rayon::current_num_threads())
}

/// Reads the config file and applies command-line overrides.
pub fn load_config(path: &Path, mode: Mode, seed: Option<u64>, out: Option<PathBuf>) -> Result<RunConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut config = crate::config::parse_config(&text).map_err(|e| e.to_string())?;
    if config.mode_given && config.mode != mode {
        return Err(format!(
            "config says mode={} but the command line asks for {}",
            config.mode.as_str(),
            mode.as_str()
        ));
    }
    config.mode = mode;
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(o) = out {
        config.out = o;
    }
    Ok(config)
}
