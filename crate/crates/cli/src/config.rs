//! Run configuration.
//!
//! Two equivalent input forms with the same flat keys:
//!
//! ```text
//! # key=value, one per line, '#' starts a comment
//! mode = two-solutions
//! potential = well
//! lambda = 100
//! sweep_mus = 0.01, 0.05, 0.2
//! ```
//!
//! or a JSON object `{"mode": "two-solutions", "sweep_mus": [0.01, 0.05, 0.2]}`.
//! Every problem is reported, not only the first.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use bessel_mp_core::problem::{critical_exponent, Nonlinearity, Parameters, Potential, PotentialClass, Weight};
use bessel_mp_core::solvers::{ProbeOptions, SolverOptions, TwoSolutionOptions};
use bessel_mp_core::{Grid, ProblemSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Solve,
    TwoSolutions,
    Verify,
    ProbeGeometry,
    KernelTable,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::TwoSolutions => "two-solutions",
            Mode::Verify => "verify",
            Mode::ProbeGeometry => "probe-geometry",
            Mode::KernelTable => "kernel-table",
        }
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        [Mode::Solve, Mode::TwoSolutions, Mode::Verify, Mode::ProbeGeometry, Mode::KernelTable]
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode `{s}` (solve, two-solutions, verify, probe-geometry, kernel-table)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Checker {
    Assumptions,
    SuperquadraticThreshold,
    SublevelL2Bound,
    Splitting,
    CoercivityProbe,
    SuperlevelMeasure,
    Holder,
    EmbeddingConstants,
}

impl Checker {
    pub const ALL: [Checker; 8] = [
        Checker::Assumptions,
        Checker::SuperquadraticThreshold,
        Checker::SublevelL2Bound,
        Checker::Splitting,
        Checker::CoercivityProbe,
        Checker::SuperlevelMeasure,
        Checker::Holder,
        Checker::EmbeddingConstants,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Checker::Assumptions => "assumptions",
            Checker::SuperquadraticThreshold => "superquadratic_threshold",
            Checker::SublevelL2Bound => "sublevel_l2_bound",
            Checker::Splitting => "splitting",
            Checker::CoercivityProbe => "coercivity_probe",
            Checker::SuperlevelMeasure => "superlevel_measure",
            Checker::Holder => "holder",
            Checker::EmbeddingConstants => "embedding_constants",
        }
    }

    /// Checks that make sense for a potential class when none are requested.
    pub fn defaults_for(class: PotentialClass) -> Vec<Checker> {
        Checker::ALL
            .into_iter()
            .filter(|c| match (c, class) {
                (Checker::SublevelL2Bound, PotentialClass::Well) => true,
                (Checker::SublevelL2Bound, _) => false,
                (Checker::CoercivityProbe, PotentialClass::Well) => false,
                _ => true,
            })
            .collect()
    }
}

impl FromStr for Checker {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Checker::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| {
            let names: Vec<_> = Checker::ALL.iter().map(|c| c.as_str()).collect();
            format!("unknown checker `{s}` (one of {})", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialChoice {
    CoerciveQuadratic,
    Well { radius: f64, height: f64, width: f64 },
    Constant { value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightChoice {
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub dim: usize,
    pub n: usize,
    pub box_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub alpha: f64,
    pub lambda: f64,
    pub mu: f64,
    pub p: f64,
    pub q: f64,
    pub potential: PotentialChoice,
    pub weight: WeightChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub path_nodes: usize,
    pub polish_below: f64,
    pub newton_steps: usize,
    pub restarts: usize,
    pub rho_grid: Option<Vec<f64>>,
    pub rho_count: usize,
    pub samples_per_rho: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Empty means the single value `lambda`.
    pub lambdas: Vec<f64>,
    /// Empty means the single value `mu`.
    pub mus: Vec<f64>,
    pub min_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Empty means the defaults for the potential class.
    pub checks: Vec<Checker>,
    /// `None` means the midpoint of the admissible window.
    pub tau: Option<f64>,
    pub u_min: f64,
    pub u_max: f64,
    pub scan_samples: usize,
    pub level_b: f64,
    pub trials: usize,
    /// Empty means whole numbers from 0 up to `0.375·box_length`.
    pub separations: Vec<f64>,
    pub splitting_threshold: f64,
    /// Empty means `0, 2, 4, …` up to `box_length/2 - 2`.
    pub radii: Vec<f64>,
    /// `None` means `0.9·2α`.
    pub holder_beta: Option<f64>,
    /// Empty means 2 and 4, keeping those below the critical exponent.
    pub embedding_s: Vec<f64>,
    pub embedding_trials: usize,
    pub embedding_max_mode: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub radii: Vec<f64>,
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    pub out: PathBuf,
    pub grid: GridConfig,
    pub problem: ProblemConfig,
    pub solver: SolverConfig,
    pub sweep: SweepConfig,
    pub verify: VerifyConfig,
    pub kernel: KernelConfig,
    /// Whether the text named a mode, so a conflicting command line can be caught.
    #[serde(skip)]
    pub mode_given: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Solve,
            seed: 0,
            out: PathBuf::from("."),
            grid: GridConfig { dim: 1, n: 256, box_length: 40.0 },
            problem: ProblemConfig {
                alpha: 0.75,
                lambda: 1.0,
                mu: 0.01,
                p: 1.5,
                q: 4.0,
                potential: PotentialChoice::CoerciveQuadratic,
                weight: WeightChoice::Gaussian,
            },
            solver: SolverConfig {
                tol: 1e-8,
                max_iter: 5000,
                path_nodes: 41,
                polish_below: 1e-3,
                newton_steps: 30,
                restarts: 3,
                rho_grid: None,
                rho_count: 16,
                samples_per_rho: 32,
            },
            sweep: SweepConfig { lambdas: Vec::new(), mus: Vec::new(), min_distance: 1e-3 },
            verify: VerifyConfig {
                checks: Vec::new(),
                tau: None,
                u_min: 1e-3,
                u_max: 1e6,
                scan_samples: 2000,
                level_b: 10.0,
                trials: 100,
                separations: Vec::new(),
                splitting_threshold: 1e-3,
                radii: Vec::new(),
                holder_beta: None,
                embedding_s: Vec::new(),
                embedding_trials: 200,
                embedding_max_mode: None,
            },
            kernel: KernelConfig {
                radii: vec![0.25, 0.5, 1.0, 2.0, 4.0],
                alphas: vec![0.5, 1.5, 2.0],
            },
            mode_given: false,
        }
    }
}

pub const KEYS: &[&str] = &[
    "mode",
    "seed",
    "out",
    "dim",
    "n",
    "box_length",
    "alpha",
    "lambda",
    "mu",
    "p",
    "q",
    "potential",
    "well_radius",
    "well_height",
    "well_width",
    "potential_value",
    "weight",
    "tol",
    "max_iter",
    "path_nodes",
    "polish_below",
    "newton_steps",
    "restarts",
    "rho_grid",
    "rho_count",
    "samples_per_rho",
    "sweep_lambdas",
    "sweep_mus",
    "min_distance",
    "checks",
    "tau",
    "u_min",
    "u_max",
    "scan_samples",
    "level_b",
    "trials",
    "separations",
    "splitting_threshold",
    "radii",
    "holder_beta",
    "embedding_s",
    "embedding_trials",
    "embedding_max_mode",
    "kernel_radii",
    "kernel_alphas",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

/// Every problem found in one config text.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} configuration error(s):", self.0.len())?;
        for e in &self.0 {
            writeln!(f, "  {e}")?;
        }
        Ok(())
    }
}

impl ConfigErrors {
    pub fn mentions(&self, key: &str) -> bool {
        self.0.iter().any(|e| e.key == key)
    }
}

struct Reader {
    raw: BTreeMap<String, String>,
    errors: Vec<ConfigError>,
}

impl Reader {
    fn error(&mut self, key: &str, message: impl Into<String>) {
        self.errors.push(ConfigError { key: key.to_string(), message: message.into() });
    }

    fn has(&self, key: &str) -> bool {
        self.raw.contains_key(key)
    }

    fn parsed<T: FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        let text = self.raw.get(key)?.clone();
        match text.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.error(key, format!("`{text}` is not {what}"));
                None
            }
        }
    }

    fn real(&mut self, key: &str, slot: &mut f64) {
        if let Some(v) = self.parsed::<f64>(key, "a number") {
            if v.is_finite() {
                *slot = v;
            } else {
                self.error(key, "must be finite");
            }
        }
    }

    fn int(&mut self, key: &str, slot: &mut usize) {
        if let Some(v) = self.parsed::<usize>(key, "a non-negative integer") {
            *slot = v;
        }
    }

    fn list<T: FromStr>(&mut self, key: &str, what: &str) -> Option<Vec<T>> {
        let text = self.raw.get(key)?.clone();
        let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
        let mut out = Vec::new();
        for item in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item.trim_matches('"').parse::<T>() {
                Ok(v) => out.push(v),
                Err(_) => {
                    self.error(key, format!("`{item}` is not {what}"));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn reals(&mut self, key: &str) -> Option<Vec<f64>> {
        let v = self.list::<f64>(key, "a number")?;
        if v.iter().any(|x| !x.is_finite()) {
            self.error(key, "entries must be finite");
            return None;
        }
        Some(v)
    }
}

fn split_key_values(text: &str, errors: &mut Vec<ConfigError>) -> BTreeMap<String, String> {
    let mut raw = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errors.push(ConfigError {
                key: format!("line {}", lineno + 1),
                message: format!("expected key=value, got `{line}`"),
            });
            continue;
        };
        let key = key.trim().to_string();
        let value = value.trim().trim_matches('"').to_string();
        if raw.insert(key.clone(), value).is_some() {
            errors.push(ConfigError { key, message: format!("given more than once (line {})", lineno + 1) });
        }
    }
    raw
}

fn json_scalar(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        serde_json::Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn split_json(text: &str, errors: &mut Vec<ConfigError>) -> BTreeMap<String, String> {
    let mut raw = BTreeMap::new();
    let object: serde_json::Map<String, serde_json::Value> = match serde_json::from_str(text) {
        Ok(o) => o,
        Err(e) => {
            errors.push(ConfigError { key: "json".into(), message: e.to_string() });
            return raw;
        }
    };
    for (key, value) in object {
        let text = match &value {
            serde_json::Value::Array(items) => items.iter().map(json_scalar).collect::<Option<Vec<_>>>().map(|v| v.join(",")),
            serde_json::Value::Null => Some(String::new()),
            other => json_scalar(other),
        };
        match text {
            Some(t) => {
                raw.insert(key, t);
            }
            None => errors.push(ConfigError { key, message: "must be a scalar or a list of scalars".into() }),
        }
    }
    raw
}

/// Parses and validates a config. All problems are collected.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let raw = if text.trim_start().starts_with('{') {
        split_json(text, &mut errors)
    } else {
        split_key_values(text, &mut errors)
    };
    for key in raw.keys() {
        if !KEYS.contains(&key.as_str()) {
            errors.push(ConfigError { key: key.clone(), message: "unknown key".into() });
        }
    }
    let mut r = Reader { raw, errors };
    let mut c = RunConfig::default();

    if let Some(m) = r.raw.get("mode").cloned() {
        match m.parse() {
            Ok(mode) => {
                c.mode = mode;
                c.mode_given = true;
            }
            Err(e) => r.error("mode", e),
        }
    }
    if let Some(s) = r.parsed::<u64>("seed", "a non-negative integer") {
        c.seed = s;
    }
    if let Some(o) = r.raw.get("out") {
        c.out = PathBuf::from(o);
    }

    r.int("dim", &mut c.grid.dim);
    r.int("n", &mut c.grid.n);
    r.real("box_length", &mut c.grid.box_length);

    let pr = &mut c.problem;
    r.real("alpha", &mut pr.alpha);
    r.real("lambda", &mut pr.lambda);
    r.real("mu", &mut pr.mu);
    r.real("p", &mut pr.p);
    r.real("q", &mut pr.q);
    read_potential(&mut r, pr);
    if let Some(w) = r.raw.get("weight").cloned() {
        if w != "gaussian" {
            r.error("weight", format!("unknown weight `{w}` (only gaussian)"));
        }
    }

    let s = &mut c.solver;
    r.real("tol", &mut s.tol);
    r.int("max_iter", &mut s.max_iter);
    r.int("path_nodes", &mut s.path_nodes);
    r.real("polish_below", &mut s.polish_below);
    r.int("newton_steps", &mut s.newton_steps);
    r.int("restarts", &mut s.restarts);
    if let Some(g) = r.reals("rho_grid") {
        s.rho_grid = Some(g);
    }
    r.int("rho_count", &mut s.rho_count);
    r.int("samples_per_rho", &mut s.samples_per_rho);

    if let Some(v) = r.reals("sweep_lambdas") {
        c.sweep.lambdas = v;
    }
    if let Some(v) = r.reals("sweep_mus") {
        c.sweep.mus = v;
    }
    r.real("min_distance", &mut c.sweep.min_distance);

    let v = &mut c.verify;
    if let Some(list) = r.list::<Checker>("checks", "a checker name") {
        v.checks = list;
    }
    if r.has("tau") {
        let mut t = 0.0;
        r.real("tau", &mut t);
        v.tau = Some(t);
    }
    r.real("u_min", &mut v.u_min);
    r.real("u_max", &mut v.u_max);
    r.int("scan_samples", &mut v.scan_samples);
    r.real("level_b", &mut v.level_b);
    r.int("trials", &mut v.trials);
    if let Some(x) = r.reals("separations") {
        v.separations = x;
    }
    r.real("splitting_threshold", &mut v.splitting_threshold);
    if let Some(x) = r.reals("radii") {
        v.radii = x;
    }
    if r.has("holder_beta") {
        let mut b = 0.0;
        r.real("holder_beta", &mut b);
        v.holder_beta = Some(b);
    }
    if let Some(x) = r.reals("embedding_s") {
        v.embedding_s = x;
    }
    r.int("embedding_trials", &mut v.embedding_trials);
    if r.has("embedding_max_mode") {
        let mut m = 0;
        r.int("embedding_max_mode", &mut m);
        v.embedding_max_mode = Some(m);
    }

    if let Some(x) = r.reals("kernel_radii") {
        c.kernel.radii = x;
    }
    if let Some(x) = r.reals("kernel_alphas") {
        c.kernel.alphas = x;
    }

    validate(&c, &mut r);
    if r.errors.is_empty() {
        Ok(c)
    } else {
        Err(ConfigErrors(r.errors))
    }
}

fn read_potential(r: &mut Reader, pr: &mut ProblemConfig) {
    let kind = r.raw.get("potential").cloned().unwrap_or_else(|| "coercive_quadratic".into());
    let well_keys = ["well_radius", "well_height", "well_width"];
    match kind.as_str() {
        "coercive_quadratic" => pr.potential = PotentialChoice::CoerciveQuadratic,
        "well" => {
            let (mut radius, mut height, mut width) = (1.0, 50.0, 1.0);
            r.real("well_radius", &mut radius);
            r.real("well_height", &mut height);
            r.real("well_width", &mut width);
            pr.potential = PotentialChoice::Well { radius, height, width };
        }
        "constant" => {
            let mut value = 1.0;
            r.real("potential_value", &mut value);
            pr.potential = PotentialChoice::Constant { value };
        }
        other => {
            r.error("potential", format!("unknown potential `{other}` (coercive_quadratic, well, constant)"));
            return;
        }
    }
    for key in well_keys {
        if kind != "well" && r.has(key) {
            r.error(key, format!("only applies to potential=well, but potential={kind}"));
        }
    }
    if kind != "constant" && r.has("potential_value") {
        r.error("potential_value", format!("only applies to potential=constant, but potential={kind}"));
    }
}

fn validate(c: &RunConfig, r: &mut Reader) {
    let g = &c.grid;
    if !(1..=3).contains(&g.dim) {
        r.error("dim", format!("{} is not 1, 2 or 3", g.dim));
    }
    if g.n < 4 {
        r.error("n", format!("{} points per axis, need at least 4", g.n));
    }
    if !(g.box_length > 0.0) {
        r.error("box_length", "must be positive");
    }

    let p = &c.problem;
    if !(p.alpha > 0.0 && p.alpha < 1.0) {
        r.error("alpha", format!("alpha = {} must satisfy 0 < alpha < 1", p.alpha));
    }
    if !(p.lambda > 0.0) {
        r.error("lambda", format!("lambda = {} must be positive", p.lambda));
    }
    if !(p.mu >= 0.0) {
        r.error("mu", format!("mu = {} must be non-negative", p.mu));
    }
    if !(p.p > 1.0 && p.p < 2.0) {
        r.error("p", format!("p = {} must satisfy 1 < p < 2", p.p));
    }
    if !(p.q > 2.0) {
        r.error("q", format!("q = {} must exceed 2", p.q));
    } else if (1..=3).contains(&g.dim) && p.alpha > 0.0 && p.alpha < 1.0 {
        let crit = critical_exponent(g.dim, p.alpha);
        if p.q >= crit {
            r.error("q", format!("q = {} must be below the critical exponent {crit} for dim={} and alpha={}", p.q, g.dim, p.alpha));
        }
    }
    match p.potential {
        PotentialChoice::Well { radius, height, width } => {
            if !(radius > 0.0 && height > 0.0 && width > 0.0) {
                r.error("potential", "well radius, height and width must be positive");
            }
        }
        PotentialChoice::Constant { value } if !(value > 0.0) => {
            r.error("potential_value", "must be positive");
        }
        _ => {}
    }

    let s = &c.solver;
    if !(s.tol > 0.0) {
        r.error("tol", "must be positive");
    }
    if s.max_iter == 0 {
        r.error("max_iter", "must be at least 1");
    }
    if s.path_nodes < 5 {
        r.error("path_nodes", "need at least 5 nodes");
    }
    if !(s.polish_below >= 0.0) {
        r.error("polish_below", "must be non-negative");
    }
    if let Some(grid) = &s.rho_grid {
        if grid.is_empty() || grid[0] <= 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
            r.error("rho_grid", "must be a non-empty increasing list of positive radii");
        }
    }
    if s.rho_count == 0 {
        r.error("rho_count", "must be at least 1");
    }
    if s.samples_per_rho < 4 {
        r.error("samples_per_rho", "need at least 4 directions");
    }

    if c.sweep.lambdas.iter().any(|&l| !(l > 0.0)) {
        r.error("sweep_lambdas", "entries must be positive");
    }
    if c.sweep.mus.iter().any(|&m| !(m >= 0.0)) {
        r.error("sweep_mus", "entries must be non-negative");
    }
    if !(c.sweep.min_distance >= 0.0) {
        r.error("min_distance", "must be non-negative");
    }

    let v = &c.verify;
    if !(v.u_min > 0.0 && v.u_max > v.u_min) {
        r.error("u_max", format!("scan range ({}, {}) must satisfy 0 < u_min < u_max", v.u_min, v.u_max));
    }
    if let Some(beta) = v.holder_beta {
        if !(beta > 0.0 && beta < 2.0) {
            r.error("holder_beta", format!("{beta} is not in (0, 2)"));
        }
    }
    if v.separations.windows(2).any(|w| w[1] <= w[0]) {
        r.error("separations", "must be increasing");
    }
    if v.embedding_trials == 0 {
        r.error("embedding_trials", "must be at least 1");
    }
    if c.kernel.radii.iter().any(|&x| !(x > 0.0)) {
        r.error("kernel_radii", "entries must be positive");
    }
    if c.kernel.alphas.iter().any(|&x| !(x > 0.0)) {
        r.error("kernel_alphas", "entries must be positive");
    }
}

impl RunConfig {
    pub fn grid(&self) -> bessel_mp_core::Result<Grid> {
        Grid::new(self.grid.dim, self.grid.n, self.grid.box_length)
    }

    pub fn potential(&self) -> Potential {
        match self.problem.potential {
            PotentialChoice::CoerciveQuadratic => Potential::CoerciveQuadratic,
            PotentialChoice::Well { radius, height, width } => Potential::Well { radius, height, width },
            PotentialChoice::Constant { value } => Potential::Constant { value },
        }
    }

    pub fn spec(&self) -> bessel_mp_core::Result<ProblemSpec> {
        let p = &self.problem;
        let weight = match p.weight {
            WeightChoice::Gaussian => Weight::Gaussian,
        };
        ProblemSpec::new(
            self.grid()?,
            Parameters { alpha: p.alpha, lambda: p.lambda, mu: p.mu, p: p.p },
            Nonlinearity::power(p.q),
            self.potential(),
            weight,
        )
    }

    pub fn solver_options(&self) -> SolverOptions {
        let s = &self.solver;
        SolverOptions {
            path_nodes: s.path_nodes,
            tol: s.tol,
            max_iter: s.max_iter,
            polish_below: s.polish_below,
            newton_steps: s.newton_steps,
            restarts: s.restarts,
            seed: self.seed,
            ..SolverOptions::default()
        }
    }

    pub fn probe_options(&self) -> ProbeOptions {
        let s = &self.solver;
        ProbeOptions {
            rho_grid: s.rho_grid.clone(),
            rho_count: s.rho_count,
            samples_per_rho: s.samples_per_rho,
            seed: self.seed,
        }
    }

    pub fn two_solution_options(&self) -> TwoSolutionOptions {
        TwoSolutionOptions {
            solver: self.solver_options(),
            probe: self.probe_options(),
            min_distance: self.sweep.min_distance,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config("mode=solve\n").unwrap();
        assert_eq!(c.mode, Mode::Solve);
        assert!(c.mode_given);
        let d = RunConfig::default();
        assert_eq!(c.grid, d.grid);
        assert_eq!(c.problem, d.problem);
        assert_eq!(c.solver, d.solver);
        assert_eq!((c.grid.n, c.grid.box_length, c.problem.alpha, c.problem.q), (256, 40.0, 0.75, 4.0));
        assert!(parse_config("").is_ok());
    }

    #[test]
    fn p_out_of_range_names_interval() {
        let e = parse_config("p=2.5").unwrap_err();
        assert_eq!(e.0.len(), 1);
        assert_eq!(e.0[0].key, "p");
        assert!(e.0[0].message.contains("1 < p < 2"), "{}", e.0[0].message);
    }

    #[test]
    fn all_errors_are_collected() {
        let e = parse_config("p=2.5\nq=2\nalpha=1.5\nlambda=0\nmu=-1\nbogus=3\n").unwrap_err();
        for key in ["p", "q", "alpha", "lambda", "mu", "bogus"] {
            assert!(e.mentions(key), "missing {key} in {e}");
        }
    }

    #[test]
    fn conflicting_keys_both_reported() {
        let e = parse_config("potential=coercive_quadratic\nwell_radius=2\npotential_value=3\n").unwrap_err();
        assert!(e.mentions("well_radius") && e.mentions("potential_value"), "{e}");
        let e = parse_config("lambda=1\nlambda=2\nmu=1\nmu=2\n").unwrap_err();
        assert!(e.mentions("lambda") && e.mentions("mu"), "{e}");
    }

    #[test]
    fn unknown_key_rejected() {
        let e = parse_config("lamda=3").unwrap_err();
        assert_eq!(e.0, vec![ConfigError { key: "lamda".into(), message: "unknown key".into() }]);
    }

    #[test]
    fn json_and_key_value_agree() {
        let kv = parse_config(
            "mode = two-solutions  # comment\npotential = well\nlambda = 100\nmu = 0.05\nsweep_mus = 0.01, 0.05\nchecks = splitting, holder\nrho_grid = [0.5, 1.0]\n",
        )
        .unwrap();
        let js = parse_config(
            r#"{"mode": "two-solutions", "potential": "well", "lambda": 100, "mu": 0.05,
                "sweep_mus": [0.01, 0.05], "checks": ["splitting", "holder"], "rho_grid": [0.5, 1.0]}"#,
        )
        .unwrap();
        assert_eq!(kv, js);
        assert_eq!(kv.problem.potential, PotentialChoice::Well { radius: 1.0, height: 50.0, width: 1.0 });
        assert_eq!(kv.verify.checks, vec![Checker::Splitting, Checker::Holder]);
        assert_eq!(kv.solver.rho_grid, Some(vec![0.5, 1.0]));
    }

    #[test]
    fn bad_values_and_syntax() {
        let e = parse_config("n=abc\nthis line has no equals\ncheck=1\nchecks=splitting,nope\n").unwrap_err();
        assert!(e.mentions("n") && e.mentions("line 2") && e.mentions("check") && e.mentions("checks"), "{e}");
        let e = parse_config(r#"{"n": {"a": 1}}"#).unwrap_err();
        assert!(e.mentions("n"));
        assert!(parse_config("{ not json").unwrap_err().mentions("json"));
    }

    #[test]
    fn supercritical_q_rejected() {
        let e = parse_config("dim=3\nalpha=0.75\nq=4").unwrap_err();
        assert!(e.mentions("q"), "{e}");
        assert!(parse_config("dim=3\nalpha=0.75\nq=3.5").is_ok());
    }

    #[test]
    fn config_serializes_round_trip() {
        let c = parse_config("potential=well\nlambda=100\ntau=1.5").unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.problem, c.problem);
        assert_eq!(back.verify, c.verify);
    }

    #[test]
    fn builds_core_objects() {
        let c = parse_config("potential=well\nlambda=100\nmu=0.05\nn=128").unwrap();
        let s = c.spec().unwrap();
        assert_eq!((s.lambda(), s.mu(), s.grid().n()), (100.0, 0.05, 128));
        assert_eq!(s.potential().class(), PotentialClass::Well);
        assert_eq!(Checker::defaults_for(PotentialClass::Well).len(), 7);
        assert!(!Checker::defaults_for(PotentialClass::Coercive).contains(&Checker::SublevelL2Bound));
    }
}
