use std::collections::BTreeMap;
use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use serde_json::{json, Map, Value};

use crate::domain::{IouThreshold, QueryInstance};
use crate::io::report::{activity_json, canonical_json, EvalReport, SplitReport};
use crate::io::{parse_benchmark, parse_predictions, ReportFormat};
use crate::metrics::{
    evaluate_all, DuplicatePolicy, FpDefinition, Interpolation, MetricError, MetricOptions, PredictionSet,
};
use crate::postprocess::{
    active_vs_moment_curve, activity_report, curve_csv, nms_all, NmsConfig, DEFAULT_ACTIVE_THRESHOLD,
    DEFAULT_DIAGNOSTIC_TAU, DEFAULT_NMS_THRESHOLD,
};

use super::config::TauList;
use super::{CliError, Context};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitSelection {
    #[default]
    All,
    Single,
    Multi,
}

impl SplitSelection {
    fn as_str(self) -> &'static str {
        match self {
            Self::All => "all",
            Self::Single => "single",
            Self::Multi => "multi",
        }
    }

    fn keeps(self, inst: &QueryInstance) -> bool {
        match self {
            Self::All => true,
            Self::Single => !inst.is_multi(),
            Self::Multi => inst.is_multi(),
        }
    }
}

impl FromStr for SplitSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(Self::All),
            "single" => Ok(Self::Single),
            "multi" => Ok(Self::Multi),
            other => Err(format!("unknown split {other:?}, expected single, multi or all")),
        }
    }
}

#[derive(Debug, Args)]
pub struct NmsArgs {
    /// Apply temporal NMS to predictions before scoring.
    #[arg(long, overrides_with = "no_nms")]
    nms: bool,
    #[arg(long, overrides_with = "nms")]
    no_nms: bool,
    /// Suppress predictions whose IoU with a kept one reaches this value [default: 0.7].
    #[arg(long)]
    nms_threshold: Option<f64>,
    /// Keep at most this many predictions per query after NMS.
    #[arg(long)]
    max_keep: Option<NonZeroUsize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Benchmark JSONL.
    #[arg(long)]
    benchmark: Option<PathBuf>,
    /// Prediction JSONL.
    #[arg(long)]
    predictions: Option<PathBuf>,
    /// Report path; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// json, csv or table [default: json].
    #[arg(long)]
    format: Option<ReportFormat>,
    /// Comma-separated IoU thresholds [default: 0.1,0.3,0.5].
    #[arg(long)]
    iou_thresholds: Option<TauList>,
    /// Confidence above which a prediction counts as active [default: 0.5].
    #[arg(long)]
    active_threshold: Option<f64>,
    /// IoU threshold used by the activity diagnostics [default: 0.1].
    #[arg(long)]
    diagnostic_tau: Option<f64>,
    #[command(flatten)]
    nms: NmsArgs,
    /// Restrict scoring to single-moment, multi-moment or all queries [default: all].
    #[arg(long)]
    split: Option<SplitSelection>,
    /// Also report the single and multi subsets separately.
    #[arg(long)]
    per_split: bool,
    /// Second prediction on an already-retrieved moment: fp or ignore [default: fp].
    #[arg(long)]
    duplicates: Option<DuplicatePolicy>,
    /// First-false-positive rule for R_m: prose or literal [default: prose].
    #[arg(long)]
    fp_definition: Option<FpDefinition>,
    /// all-point or 11-point [default: all-point].
    #[arg(long)]
    interpolation: Option<Interpolation>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    benchmark: Option<PathBuf>,
    #[arg(long)]
    predictions: Option<PathBuf>,
    /// Activity report path; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// CSV of mean active predictions per moment count; stdout when omitted.
    #[arg(long)]
    curve: Option<PathBuf>,
    #[arg(long)]
    active_threshold: Option<f64>,
    #[arg(long)]
    diagnostic_tau: Option<f64>,
    #[command(flatten)]
    nms: NmsArgs,
}

struct NmsSetting {
    enabled: bool,
    config: NmsConfig,
}

impl NmsSetting {
    fn resolve(a: &NmsArgs, ctx: &Context) -> Result<Self, CliError> {
        let s = ctx.settings;
        let enabled = s.switch(a.nms, a.no_nms, "nms", false)?;
        let threshold = s.or(a.nms_threshold, "nms_threshold", DEFAULT_NMS_THRESHOLD)?;
        let max_keep = s.get(a.max_keep, "max_keep")?;
        Ok(Self { enabled, config: NmsConfig::new(threshold, max_keep)? })
    }

    fn echo(&self, config: &mut Map<String, Value>) {
        config.insert("nms".into(), json!(self.enabled));
        config.insert("nms_threshold".into(), json!(self.config.iou_threshold()));
        config.insert("max_keep".into(), json!(self.config.max_keep.map(NonZeroUsize::get)));
    }

    fn apply(&self, predictions: &PredictionSet) -> Option<PredictionSet> {
        self.enabled.then(|| nms_all(predictions, &self.config))
    }
}

fn path_json(p: &std::path::Path) -> Value {
    json!(p.display().to_string())
}

fn split_report(
    instances: &[QueryInstance],
    predictions: &PredictionSet,
    taus: &[IouThreshold],
    opts: &MetricOptions,
) -> Result<SplitReport, MetricError> {
    Ok(SplitReport {
        instances: instances.len(),
        gt_moments: instances.iter().map(|i| i.moments().len()).sum(),
        metrics: evaluate_all(instances, predictions, taus, opts)?,
    })
}

fn diagnostic_tau(flag: Option<f64>, ctx: &Context) -> Result<IouThreshold, CliError> {
    let v = ctx.settings.or(flag, "diagnostic_tau", DEFAULT_DIAGNOSTIC_TAU)?;
    Ok(IouThreshold::new(v)?)
}

pub fn run_eval(a: EvalArgs, ctx: &mut Context) -> Result<(), CliError> {
    let s = ctx.settings;
    let benchmark: PathBuf = s.required(a.benchmark, "benchmark")?;
    let predictions_path: PathBuf = s.required(a.predictions, "predictions")?;
    let out: Option<PathBuf> = s.get(a.out, "out")?;
    let format = s.or(a.format, "format", ReportFormat::Json)?;
    let taus = s.or(a.iou_thresholds, "iou_thresholds", TauList::default())?.0;
    let active = s.or(a.active_threshold, "active_threshold", DEFAULT_ACTIVE_THRESHOLD)?;
    let diag_tau = diagnostic_tau(a.diagnostic_tau, ctx)?;
    let nms = NmsSetting::resolve(&a.nms, ctx)?;
    let split = s.or(a.split, "split", SplitSelection::All)?;
    let per_split = s.switch(a.per_split, false, "per_split", false)?;
    let opts = MetricOptions {
        interpolation: s.or(a.interpolation, "interpolation", Interpolation::default())?,
        duplicates: s.or(a.duplicates, "duplicates", DuplicatePolicy::default())?,
        fp_definition: s.or(a.fp_definition, "fp_definition", FpDefinition::default())?,
    };
    s.finish()?;

    let all = parse_benchmark(&benchmark)?;
    let raw = parse_predictions(&predictions_path)?;
    let selected: Vec<QueryInstance> = all.into_iter().filter(|i| split.keeps(i)).collect();
    if selected.is_empty() {
        return Err(match split {
            SplitSelection::All => MetricError::EmptyDataset.into(),
            _ => CliError::metric(format!("empty split: no {} queries in the benchmark", split.as_str())),
        });
    }
    let suppressed = nms.apply(&raw);
    let scored = suppressed.as_ref().unwrap_or(&raw);

    let overall = split_report(&selected, scored, &taus, &opts)?;
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("raw".to_string(), activity_report(&selected, &raw, active, diag_tau)?);
    if let Some(p) = &suppressed {
        diagnostics.insert("nms".to_string(), activity_report(&selected, p, active, diag_tau)?);
    }
    let mut splits = BTreeMap::new();
    if per_split {
        for sub in [SplitSelection::Single, SplitSelection::Multi] {
            let part: Vec<QueryInstance> = selected.iter().filter(|i| sub.keeps(i)).cloned().collect();
            if !part.is_empty() {
                splits.insert(sub.as_str().to_string(), split_report(&part, scored, &taus, &opts)?);
            }
        }
    }

    let mut config = Map::new();
    config.insert("benchmark".into(), path_json(&benchmark));
    config.insert("predictions".into(), path_json(&predictions_path));
    config.insert("iou_thresholds".into(), json!(taus.iter().map(|t| t.value()).collect::<Vec<_>>()));
    config.insert("active_threshold".into(), json!(active));
    config.insert("diagnostic_tau".into(), json!(diag_tau.value()));
    nms.echo(&mut config);
    config.insert("split".into(), json!(split.as_str()));
    config.insert("per_split".into(), json!(per_split));
    config.insert("duplicates".into(), json!(opts.duplicates.to_string()));
    config.insert("fp_definition".into(), json!(opts.fp_definition.to_string()));
    config.insert("interpolation".into(), json!(opts.interpolation.to_string()));

    let report = EvalReport { config, overall, diagnostics, splits };
    let text = report.render(format);
    ctx.emit(out.as_deref(), &text)
}

pub fn run_diagnose(a: DiagnoseArgs, ctx: &mut Context) -> Result<(), CliError> {
    let s = ctx.settings;
    let benchmark: PathBuf = s.required(a.benchmark, "benchmark")?;
    let predictions_path: PathBuf = s.required(a.predictions, "predictions")?;
    let out: Option<PathBuf> = s.get(a.out, "out")?;
    let curve_out: Option<PathBuf> = s.get(a.curve, "curve")?;
    let active = s.or(a.active_threshold, "active_threshold", DEFAULT_ACTIVE_THRESHOLD)?;
    let diag_tau = diagnostic_tau(a.diagnostic_tau, ctx)?;
    let nms = NmsSetting::resolve(&a.nms, ctx)?;
    s.finish()?;

    let instances = parse_benchmark(&benchmark)?;
    let raw = parse_predictions(&predictions_path)?;
    let suppressed = nms.apply(&raw);
    let used = suppressed.as_ref().unwrap_or(&raw);

    let mut diagnostics = Map::new();
    diagnostics.insert("raw".into(), activity_json(&activity_report(&instances, &raw, active, diag_tau)?));
    if let Some(p) = &suppressed {
        diagnostics.insert("nms".into(), activity_json(&activity_report(&instances, p, active, diag_tau)?));
    }
    let curve = active_vs_moment_curve(&instances, used, active)?;

    let mut config = Map::new();
    config.insert("benchmark".into(), path_json(&benchmark));
    config.insert("predictions".into(), path_json(&predictions_path));
    config.insert("active_threshold".into(), json!(active));
    config.insert("diagnostic_tau".into(), json!(diag_tau.value()));
    nms.echo(&mut config);

    let report = json!({"config": config, "diagnostics": diagnostics});
    ctx.emit(out.as_deref(), &canonical_json(&report))?;
    ctx.emit(curve_out.as_deref(), &curve_csv(&curve))
}
