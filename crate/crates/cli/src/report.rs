//! `report.json` and the CSV outputs.

use std::path::Path;

use bessel_mp_core::solvers::{SolveReport, TraceRow};
use bessel_mp_core::verify::{CheckRecord, ParamValue};
use bessel_mp_core::Field;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::config::{Mode, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Passed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub name: String,
    pub pass: bool,
    pub seconds: f64,
    pub result: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub artifact: String,
    pub version: String,
    pub mode: Mode,
    pub seed: u64,
    pub status: Status,
    pub config: RunConfig,
    pub stages: Vec<StageReport>,
    /// Files written, relative to the output directory.
    pub files: Vec<String>,
}

impl RunReport {
    pub fn new(config: &RunConfig) -> Self {
        RunReport {
            artifact: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            mode: config.mode,
            seed: config.seed,
            status: Status::Passed,
            config: config.clone(),
            stages: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Passed
    }

    pub fn stage(&self, name: &str) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn push(&mut self, stage: StageReport) {
        if !stage.pass {
            self.status = Status::Failed;
        }
        self.stages.push(stage);
    }

    /// Copy with wall-clock times zeroed, for reproducibility comparisons.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        for s in &mut r.stages {
            s.seconds = 0.0;
        }
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

pub fn param_json(v: &ParamValue) -> Value {
    match v {
        ParamValue::Real(x) => json!(x),
        ParamValue::Int(i) => json!(i),
        ParamValue::Text(s) => json!(s),
    }
}

/// `{checker, params, seed, pass, witnesses[]}`
pub fn record_json(r: &CheckRecord) -> Value {
    let params: Map<String, Value> = r.params.iter().map(|(k, v)| (k.clone(), param_json(v))).collect();
    let witnesses: Vec<Value> = r
        .witnesses
        .iter()
        .map(|w| {
            let values: Map<String, Value> = w.values.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
            json!({ "label": w.label, "values": values })
        })
        .collect();
    json!({
        "checker": r.checker,
        "params": params,
        "seed": r.seed,
        "pass": r.pass,
        "witnesses": witnesses,
    })
}

pub fn solve_json(r: &SolveReport) -> Value {
    json!({
        "classification": r.classification.as_str(),
        "converged": r.converged,
        "energy": r.energy,
        "residual_norm": r.residual_norm,
        "norm": r.norm,
        "iterations": r.iterations,
        "newton_steps": r.trace.iter().filter(|t| t.newton).count(),
    })
}

#[derive(Serialize)]
struct TraceCsvRow {
    iter: usize,
    energy: f64,
    residual_norm: f64,
    step_size: f64,
    max_node_index: usize,
}

pub fn write_trace(path: &Path, trace: &[TraceRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for t in trace {
        w.serialize(TraceCsvRow {
            iter: t.iter,
            energy: t.energy,
            residual_norm: t.residual_norm,
            step_size: t.step_size,
            max_node_index: t.max_node_index,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Values along axis 0 through the box centre: every point in 1-D, the
/// line `x₁ = x₂ = 0` otherwise.
pub fn profile(field: &Field) -> Vec<(f64, f64)> {
    let g = field.grid();
    let mid = g.n() / 2;
    (0..g.n())
        .map(|i| {
            let mut idx = [mid; 3];
            idx[0] = i;
            (g.coordinate(0, i), field.values()[g.flat_index(&idx[..g.dim()])])
        })
        .collect()
}

pub fn write_profile(path: &Path, field: &Field) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "u"])?;
    for (x, u) in profile(field) {
        w.serialize((x, u))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub radius: f64,
    pub alpha: f64,
    pub dim: usize,
    #[serde(rename = "G_value")]
    pub g_value: f64,
    pub est_error: f64,
}

pub fn write_kernel_table(path: &Path, rows: &[KernelRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use bessel_mp_core::verify::CheckWitness;
    use bessel_mp_core::Grid;

    #[test]
    fn record_has_the_five_fields() {
        let r = CheckRecord {
            checker: "splitting".into(),
            params: vec![("threshold".into(), ParamValue::Real(1e-3)), ("trials".into(), ParamValue::Int(4))],
            seed: 9,
            pass: true,
            witnesses: vec![CheckWitness { label: "deviation".into(), values: vec![("total".into(), 0.5)] }],
        };
        let v = record_json(&r);
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["checker", "params", "pass", "seed", "witnesses"]);
        assert_eq!(v["params"]["trials"], 4);
        assert_eq!(v["witnesses"][0]["values"]["total"], 0.5);
    }

    #[test]
    fn report_round_trips() {
        let mut r = RunReport::new(&RunConfig::default());
        r.push(StageReport {
            name: "probe_geometry".into(),
            pass: true,
            seconds: 0.25,
            result: json!({"eta": 0.5, "ladder": [1.0, 2.0], "bound": f64::INFINITY}),
            error: None,
        });
        r.push(StageReport { name: "x".into(), pass: false, seconds: 0.0, result: Value::Null, error: Some("boom".into()) });
        assert_eq!(r.status, Status::Failed);
        let text = r.to_json();
        assert!(text.contains("\"FAILED\""));
        let back = RunReport::from_json(&text).unwrap();
        assert_eq!(back.stages, r.stages.iter().cloned().map(|mut s| {
            if s.name == "probe_geometry" {
                s.result["bound"] = Value::Null;
            }
            s
        }).collect::<Vec<_>>());
        assert_eq!(RunReport::from_json(&back.to_json()).unwrap(), back);
    }

    #[test]
    fn profile_takes_the_centre_line() {
        let g = Grid::new(2, 8, 8.0).unwrap();
        let f = Field::from_fn(g, |x| x[0] + 10.0 * x[1]);
        let p = profile(&f);
        assert_eq!(p.len(), 8);
        assert!(p.iter().all(|&(x, u)| (u - x).abs() < 1e-12));
        assert_eq!(p[0].0, -4.0);
    }
}
