//! Query-level baselines: Recall@1 and detection-style average precision.

use rayon::prelude::*;

use crate::domain::{matches, temporal_iou, IouThreshold, QueryInstance, RankedPredictions};

use super::{interpolated_ap, lookup, mean, Interpolation, MetricError, PredictionSet, ThresholdScores};

/// One point of a query-level precision-recall curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApCurvePoint {
    pub rank: usize,
    pub precision: f64,
    pub recall: f64,
}

/// 1 when the top-ranked prediction matches any moment of the instance.
pub fn recall_at_1(instance: &QueryInstance, preds: &RankedPredictions, tau: IouThreshold) -> bool {
    preds
        .top()
        .is_some_and(|p| instance.moments().iter().any(|g| matches(p, g, tau)))
}

/// Greedy one-to-one assignment in rank order. Each prediction claims the
/// unclaimed matching moment with the highest IoU (lowest index on ties);
/// predictions left without a claim are false positives.
pub fn greedy_assignment(
    instance: &QueryInstance,
    preds: &RankedPredictions,
    tau: IouThreshold,
) -> Vec<Option<usize>> {
    let gts = instance.moments();
    let mut claimed = vec![false; gts.len()];
    preds
        .iter()
        .map(|p| {
            let mut best: Option<(usize, f64)> = None;
            for (j, g) in gts.iter().enumerate() {
                if claimed[j] {
                    continue;
                }
                let iou = temporal_iou(&p.segment, &g.segment);
                if iou >= tau.value() && best.is_none_or(|(_, b)| iou > b) {
                    best = Some((j, iou));
                }
            }
            best.map(|(j, _)| {
                claimed[j] = true;
                j
            })
        })
        .collect()
}

pub fn precision_recall_curve(
    instance: &QueryInstance,
    preds: &RankedPredictions,
    tau: IouThreshold,
) -> Vec<ApCurvePoint> {
    let n = instance.moments().len() as f64;
    let mut tp = 0usize;
    greedy_assignment(instance, preds, tau)
        .into_iter()
        .enumerate()
        .map(|(k, claim)| {
            tp += usize::from(claim.is_some());
            ApCurvePoint {
                rank: k + 1,
                precision: tp as f64 / (k + 1) as f64,
                recall: tp as f64 / n,
            }
        })
        .collect()
}

pub fn average_precision(
    instance: &QueryInstance,
    preds: &RankedPredictions,
    tau: IouThreshold,
    interpolation: Interpolation,
) -> f64 {
    let hits: Vec<bool> = greedy_assignment(instance, preds, tau)
        .iter()
        .map(Option::is_some)
        .collect();
    interpolated_ap(&hits, instance.moments().len(), interpolation)
}

fn per_threshold<F>(
    instances: &[QueryInstance],
    predictions: &PredictionSet,
    taus: &[IouThreshold],
    score: F,
) -> Result<ThresholdScores, MetricError>
where
    F: Fn(&QueryInstance, &RankedPredictions, IouThreshold) -> f64 + Sync,
{
    if instances.is_empty() {
        return Err(MetricError::EmptyDataset);
    }
    if taus.is_empty() {
        return Err(MetricError::NoThresholds);
    }
    let rows: Vec<Vec<f64>> = instances
        .par_iter()
        .map(|inst| {
            let preds = lookup(predictions, inst)?;
            Ok(taus.iter().map(|&t| score(inst, preds, t)).collect())
        })
        .collect::<Result<_, MetricError>>()?;
    let values = (0..taus.len())
        .map(|t| {
            let column: Vec<f64> = rows.iter().map(|r| r[t]).collect();
            mean(&column).unwrap_or(0.0)
        })
        .collect();
    Ok(ThresholdScores::from_values(taus, values))
}

/// Mean R@1 over query instances, per threshold.
pub fn dataset_recall_at_1(
    instances: &[QueryInstance],
    predictions: &PredictionSet,
    taus: &[IouThreshold],
) -> Result<ThresholdScores, MetricError> {
    per_threshold(instances, predictions, taus, |i, p, t| {
        f64::from(u8::from(recall_at_1(i, p, t)))
    })
}

/// Mean per-instance AP, per threshold.
pub fn dataset_map(
    instances: &[QueryInstance],
    predictions: &PredictionSet,
    taus: &[IouThreshold],
    interpolation: Interpolation,
) -> Result<ThresholdScores, MetricError> {
    per_threshold(instances, predictions, taus, |i, p, t| {
        average_precision(i, p, t, interpolation)
    })
}
