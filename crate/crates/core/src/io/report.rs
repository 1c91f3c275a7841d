//! Evaluation reports as canonical JSON, CSV, or an aligned text table.
//!
//! Canonical JSON has sorted keys, two-space indentation and every
//! floating-point value printed with six decimals, so repeated runs produce
//! byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::metrics::{MetricTable, ThresholdScores};
use crate::postprocess::{ActivityReport, MeanStd};

use super::IoError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
    Table,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "table" => Ok(Self::Table),
            other => Err(format!("unknown format {other:?}, expected json, csv or table")),
        }
    }
}

/// Metrics for one slice of the benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitReport {
    pub instances: usize,
    pub gt_moments: usize,
    pub metrics: MetricTable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Effective configuration echoed verbatim.
    pub config: Map<String, Value>,
    pub overall: SplitReport,
    /// Activity diagnostics, keyed by stage (`raw`, `nms`).
    pub diagnostics: BTreeMap<String, ActivityReport>,
    pub splits: BTreeMap<String, SplitReport>,
}

pub const METRIC_KEYS: [&str; 4] = ["R1", "mAP", "Rm", "mAPm"];

fn tau_key(t: f64) -> String {
    format!("{t}")
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn scores_json(s: &ThresholdScores) -> Value {
    let mut m = Map::new();
    for (t, v) in &s.per_threshold {
        m.insert(tau_key(t.value()), num(*v));
    }
    m.insert("avg".into(), num(s.average));
    Value::Object(m)
}

fn metrics_in_order(t: &MetricTable) -> [(&'static str, &ThresholdScores); 4] {
    [("R1", &t.r1), ("mAP", &t.map), ("Rm", &t.r_m), ("mAPm", &t.map_m)]
}

fn split_json(s: &SplitReport) -> Value {
    let metrics: Map<String, Value> = metrics_in_order(&s.metrics)
        .into_iter()
        .map(|(k, v)| (k.to_string(), scores_json(v)))
        .collect();
    json!({
        "counts": {"instances": s.instances, "gt_moments": s.gt_moments},
        "metrics": metrics,
    })
}

fn mean_std_json(m: &MeanStd) -> Value {
    json!({"mean": num(m.mean), "std": num(m.std)})
}

pub fn activity_json(r: &ActivityReport) -> Value {
    let per_index = match &r.per_index_activation {
        Some(m) => Value::Object(m.iter().map(|(k, v)| (k.to_string(), num(*v))).collect()),
        None => Value::Null,
    };
    json!({
        "activation_threshold": num(r.activation_threshold),
        "match_tau": num(r.match_tau.value()),
        "instances": r.instances,
        "active_count": mean_std_json(&r.active_count),
        "pct_match_p": mean_std_json(&r.pct_match_p),
        "pct_match_gt": mean_std_json(&r.pct_match_gt),
        "instances_without_active": r.instances_without_active,
        "per_index_activation": per_index,
    })
}

impl EvalReport {
    pub fn to_json(&self) -> Value {
        let mut root = Map::new();
        root.insert("config".into(), Value::Object(self.config.clone()));
        let overall = split_json(&self.overall);
        root.insert("counts".into(), overall["counts"].clone());
        root.insert("metrics".into(), overall["metrics"].clone());
        root.insert(
            "diagnostics".into(),
            Value::Object(
                self.diagnostics
                    .iter()
                    .map(|(k, v)| (k.clone(), activity_json(v)))
                    .collect(),
            ),
        );
        if !self.splits.is_empty() {
            root.insert(
                "splits".into(),
                Value::Object(self.splits.iter().map(|(k, v)| (k.clone(), split_json(v))).collect()),
            );
        }
        Value::Object(root)
    }

    fn rows(&self) -> Vec<(&str, &SplitReport)> {
        let mut rows = vec![(self.config.get("split").and_then(Value::as_str).unwrap_or("all"), &self.overall)];
        rows.extend(self.splits.iter().map(|(k, v)| (k.as_str(), v)));
        rows
    }

    pub fn to_csv(&self) -> String {
        let taus: Vec<String> = self
            .overall
            .metrics
            .r1
            .per_threshold
            .iter()
            .map(|(t, _)| tau_key(t.value()))
            .collect();
        let mut out = format!("split,metric,{},avg\n", taus.join(","));
        for (name, split) in self.rows() {
            for (key, scores) in metrics_in_order(&split.metrics) {
                let _ = write!(out, "{name},{key}");
                for (_, v) in &scores.per_threshold {
                    let _ = write!(out, ",{v:.6}");
                }
                let _ = writeln!(out, ",{:.6}", scores.average);
            }
        }
        out
    }

    /// One row per split; column groups per metric with `@tau` and `Avg.`
    /// sub-columns, values in percent.
    pub fn to_table(&self) -> String {
        let taus: Vec<String> = self
            .overall
            .metrics
            .r1
            .per_threshold
            .iter()
            .map(|(t, _)| format!("@{}", tau_key(t.value())))
            .chain(["Avg.".to_string()])
            .collect();
        let cell_w = taus.iter().map(String::len).max().unwrap_or(4).max(6);
        let group_w = taus.len() * (cell_w + 1) - 1;
        let rows = self.rows();
        let label_w = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max("Split".len());

        let mut out = format!("{:<label_w$}", "");
        for key in METRIC_KEYS {
            let _ = write!(out, " | {key:^group_w$}");
        }
        out.push('\n');
        let _ = write!(out, "{:<label_w$}", "Split");
        for _ in METRIC_KEYS {
            out.push_str(" |");
            for t in &taus {
                let _ = write!(out, " {t:>cell_w$}");
            }
        }
        out.push('\n');
        out.push_str(&"-".repeat(label_w));
        for _ in METRIC_KEYS {
            out.push_str("-+-");
            out.push_str(&"-".repeat(group_w));
        }
        out.push('\n');
        for (name, split) in rows {
            let _ = write!(out, "{name:<label_w$}");
            for (_, scores) in metrics_in_order(&split.metrics) {
                out.push_str(" |");
                for v in scores.per_threshold.iter().map(|(_, v)| *v).chain([scores.average]) {
                    let _ = write!(out, " {:>cell_w$.2}", 100.0 * v);
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => canonical_json(&self.to_json()),
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Table => self.to_table(),
        }
    }
}

/// Pretty JSON with sorted keys and floats fixed at six decimals.
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    emit(value, 0, &mut out);
    out.push('\n');
    out
}

fn emit(value: &Value, depth: usize, out: &mut String) {
    let indent = |d: usize, out: &mut String| out.push_str(&"  ".repeat(d));
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let _ = write!(out, "{:.6}", n.as_f64().unwrap_or(0.0));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, v) in items.iter().enumerate() {
                indent(depth + 1, out);
                emit(v, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            indent(depth, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                indent(depth + 1, out);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                emit(&map[*k], depth + 1, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            indent(depth, out);
            out.push('}');
        }
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|e| IoError::io(path, e))
}

pub fn write_report(report: &EvalReport, path: &Path, format: ReportFormat) -> Result<(), IoError> {
    write_text(path, &report.render(format))
}
