//! Non-maximal suppression and active decoder-query diagnostics.

use std::collections::{BTreeMap, BTreeSet};
use std::num::NonZeroUsize;

use thiserror::Error;

use crate::domain::{matches, temporal_iou, IouThreshold, Prediction, QueryInstance, RankedPredictions};
use crate::metrics::{lookup, mean, MetricError, PredictionSet};

pub const DEFAULT_NMS_THRESHOLD: f64 = 0.7;
pub const DEFAULT_ACTIVE_THRESHOLD: f64 = 0.5;
pub const DEFAULT_DIAGNOSTIC_TAU: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PostprocessError {
    #[error("NMS threshold {0} outside (0, 1)")]
    NmsThreshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmsConfig {
    iou_threshold: f64,
    pub max_keep: Option<NonZeroUsize>,
}

impl NmsConfig {
    pub fn new(iou_threshold: f64, max_keep: Option<NonZeroUsize>) -> Result<Self, PostprocessError> {
        if iou_threshold > 0.0 && iou_threshold < 1.0 {
            Ok(Self { iou_threshold, max_keep })
        } else {
            Err(PostprocessError::NmsThreshold(iou_threshold))
        }
    }

    pub fn iou_threshold(&self) -> f64 {
        self.iou_threshold
    }
}

impl Default for NmsConfig {
    fn default() -> Self {
        Self {
            iou_threshold: DEFAULT_NMS_THRESHOLD,
            max_keep: None,
        }
    }
}

/// Greedy suppression in rank order: a prediction survives when its IoU with
/// every prediction kept so far is below the threshold.
pub fn nms(preds: &RankedPredictions, cfg: &NmsConfig) -> RankedPredictions {
    let limit = cfg.max_keep.map_or(usize::MAX, NonZeroUsize::get);
    let mut kept: Vec<&Prediction> = Vec::new();
    let mut keep_idx = BTreeSet::new();
    for (i, p) in preds.iter().enumerate() {
        if kept.len() >= limit {
            break;
        }
        if kept
            .iter()
            .all(|k| temporal_iou(&k.segment, &p.segment) < cfg.iou_threshold)
        {
            kept.push(p);
            keep_idx.insert(i);
        }
    }
    preds.filtered(|i, _| keep_idx.contains(&i))
}

pub fn nms_all(predictions: &PredictionSet, cfg: &NmsConfig) -> PredictionSet {
    predictions
        .iter()
        .map(|(k, v)| (k.clone(), nms(v, cfg)))
        .collect()
}

/// Number of predictions whose confidence exceeds `activation_threshold`.
pub fn count_active(preds: &[Prediction], activation_threshold: f64) -> usize {
    preds
        .iter()
        .filter(|p| p.confidence() > activation_threshold)
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Mean and population standard deviation; zeros for an empty sample.
    pub fn of(values: &[f64]) -> Self {
        let Some(m) = mean(values) else {
            return Self::default();
        };
        let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64;
        Self { mean: m, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivityReport {
    pub activation_threshold: f64,
    pub match_tau: IouThreshold,
    pub instances: usize,
    pub active_count: MeanStd,
    /// Fraction of active predictions overlapping some moment.
    pub pct_match_p: MeanStd,
    /// Fraction of moments hit by at least one active prediction.
    pub pct_match_gt: MeanStd,
    /// Instances with no active prediction; their `pct_match_p` enters the
    /// mean as 0.
    pub instances_without_active: usize,
    /// Share of instances in which each decoder-query index is active.
    /// `None` when some prediction carries no index.
    pub per_index_activation: Option<BTreeMap<usize, f64>>,
}

#[derive(Debug, Clone, PartialEq)]
struct InstanceActivity {
    active: usize,
    match_p: f64,
    match_gt: f64,
}

fn instance_activity(
    instance: &QueryInstance,
    preds: &RankedPredictions,
    activation_threshold: f64,
    tau: IouThreshold,
) -> InstanceActivity {
    let active: Vec<&Prediction> = preds
        .iter()
        .filter(|p| p.confidence() > activation_threshold)
        .collect();
    let gts = instance.moments();
    let matching_preds = active
        .iter()
        .filter(|p| gts.iter().any(|g| matches(p, g, tau)))
        .count();
    let matched_gts = gts
        .iter()
        .filter(|g| active.iter().any(|p| matches(p, g, tau)))
        .count();
    InstanceActivity {
        active: active.len(),
        match_p: if active.is_empty() {
            0.0
        } else {
            matching_preds as f64 / active.len() as f64
        },
        match_gt: matched_gts as f64 / gts.len() as f64,
    }
}

fn check_activation(threshold: f64) -> Result<(), MetricError> {
    if (0.0..=1.0).contains(&threshold) {
        Ok(())
    } else {
        Err(MetricError::ActivationThreshold(threshold))
    }
}

pub fn activity_report(
    instances: &[QueryInstance],
    predictions: &PredictionSet,
    activation_threshold: f64,
    match_tau: IouThreshold,
) -> Result<ActivityReport, MetricError> {
    check_activation(activation_threshold)?;
    if instances.is_empty() {
        return Err(MetricError::EmptyDataset);
    }
    let mut rows = Vec::with_capacity(instances.len());
    let mut index_hits: BTreeMap<usize, usize> = BTreeMap::new();
    let mut indexed = true;
    for inst in instances {
        let preds = lookup(predictions, inst)?;
        rows.push(instance_activity(inst, preds, activation_threshold, match_tau));
        let mut seen = BTreeSet::new();
        for p in preds {
            match p.query_index {
                Some(i) => {
                    index_hits.entry(i).or_insert(0);
                    if p.confidence() > activation_threshold {
                        seen.insert(i);
                    }
                }
                None => indexed = false,
            }
        }
        for i in seen {
            *index_hits.entry(i).or_insert(0) += 1;
        }
    }
    let n = instances.len();
    let pick = |f: fn(&InstanceActivity) -> f64| -> Vec<f64> { rows.iter().map(f).collect() };
    Ok(ActivityReport {
        activation_threshold,
        match_tau,
        instances: n,
        active_count: MeanStd::of(&pick(|r| r.active as f64)),
        pct_match_p: MeanStd::of(&pick(|r| r.match_p)),
        pct_match_gt: MeanStd::of(&pick(|r| r.match_gt)),
        instances_without_active: rows.iter().filter(|r| r.active == 0).count(),
        per_index_activation: indexed.then(|| {
            index_hits
                .into_iter()
                .map(|(i, c)| (i, c as f64 / n as f64))
                .collect()
        }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub mean_active: f64,
    pub std_active: f64,
    pub n: usize,
}

/// Mean active-prediction count bucketed by the number of moments per query.
pub fn active_vs_moment_curve(
    instances: &[QueryInstance],
    predictions: &PredictionSet,
    activation_threshold: f64,
) -> Result<BTreeMap<usize, CurvePoint>, MetricError> {
    check_activation(activation_threshold)?;
    let mut buckets: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for inst in instances {
        let preds = lookup(predictions, inst)?;
        buckets
            .entry(inst.moments().len())
            .or_default()
            .push(count_active(preds.as_slice(), activation_threshold) as f64);
    }
    Ok(buckets
        .into_iter()
        .map(|(k, v)| {
            let s = MeanStd::of(&v);
            (k, CurvePoint { mean_active: s.mean, std_active: s.std, n: v.len() })
        })
        .collect())
}

/// CSV with columns `gt_count,mean_active,std_active,n`.
pub fn curve_csv(curve: &BTreeMap<usize, CurvePoint>) -> String {
    let mut out = String::from("gt_count,mean_active,std_active,n\n");
    for (k, p) in curve {
        out.push_str(&format!("{k},{:.6},{:.6},{}\n", p.mean_active, p.std_active, p.n));
    }
    out
}
