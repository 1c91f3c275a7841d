//! Per-ground-truth metrics for queries with several correct moments.
//!
//! Every moment `g` is scored on its own. Predictions that match a different
//! moment of the same query are neither rewarded nor penalised when scoring
//! `g`: they are IGNORED. R_m(g) is 1 when the first prediction matching `g`
//! is ranked above the first false positive. AP_m(g) is the precision-recall
//! area of the ranking with the ignored predictions removed and a recall
//! denominator of one.
//!
//! The rank condition is `i* < i_fp` (a match strictly before any false
//! positive). The printed formula with `>=` contradicts the worked examples
//! and is not implemented. With no false positive `i_fp` is treated as
//! infinite; with no match the score is 0.
//!
//! Dataset scores weigh every moment equally, regardless of how many moments
//! share its query.

use rayon::prelude::*;

use crate::domain::{
    matches, DomainError, GroundTruthMoment, InstanceKey, IouThreshold, QueryInstance,
    RankedPredictions,
};

use super::{
    interpolated_ap, lookup, mean, DuplicatePolicy, FpDefinition, MetricError, MetricOptions,
    PredictionSet, ThresholdScores,
};

/// Role of one prediction when scoring one ground-truth moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    TruePositive,
    FalsePositive,
    Ignored,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerGtOutcome {
    pub key: InstanceKey,
    pub gt_id: String,
    pub tau: IouThreshold,
    pub r_m: bool,
    pub ap_m: f64,
    /// 1-based rank of the first prediction matching the moment.
    pub first_match_rank: Option<usize>,
    /// 1-based rank of the first false positive, per the configured definition.
    pub first_fp_rank: Option<usize>,
}

/// `hits[i][j]`: prediction `i` matches moment `j` at `tau`.
fn match_matrix(instance: &QueryInstance, preds: &RankedPredictions, tau: IouThreshold) -> Vec<Vec<bool>> {
    preds
        .iter()
        .map(|p| instance.moments().iter().map(|g| matches(p, g, tau)).collect())
        .collect()
}

fn labels_from_matrix(hits: &[Vec<bool>], j: usize, duplicates: DuplicatePolicy) -> Vec<Label> {
    let mut retrieved = false;
    hits.iter()
        .map(|row| {
            let own = row[j];
            let other = row.iter().enumerate().any(|(k, &m)| k != j && m);
            if own && !retrieved {
                retrieved = true;
                Label::TruePositive
            } else if other {
                Label::Ignored
            } else if own {
                match duplicates {
                    DuplicatePolicy::FalsePositive => Label::FalsePositive,
                    DuplicatePolicy::Ignore => Label::Ignored,
                }
            } else {
                Label::FalsePositive
            }
        })
        .collect()
}

fn outcome_from_matrix(
    instance: &QueryInstance,
    hits: &[Vec<bool>],
    j: usize,
    tau: IouThreshold,
    opts: &MetricOptions,
) -> PerGtOutcome {
    let labels = labels_from_matrix(hits, j, opts.duplicates);
    let first_match = hits.iter().position(|row| row[j]);
    let first_fp = hits.iter().position(|row| {
        let other = row.iter().enumerate().any(|(k, &m)| k != j && m);
        match opts.fp_definition {
            FpDefinition::Prose => !row[j] && !other,
            FpDefinition::Literal => !row[j] && other,
        }
    });
    let r_m = match (first_match, first_fp) {
        (Some(m), Some(fp)) => m < fp,
        (Some(_), None) => true,
        (None, _) => false,
    };
    let kept: Vec<bool> = labels
        .iter()
        .filter(|l| **l != Label::Ignored)
        .map(|l| *l == Label::TruePositive)
        .collect();
    PerGtOutcome {
        key: instance.key(),
        gt_id: instance.moments()[j].id.clone(),
        tau,
        r_m,
        ap_m: interpolated_ap(&kept, 1, opts.interpolation),
        first_match_rank: first_match.map(|i| i + 1),
        first_fp_rank: first_fp.map(|i| i + 1),
    }
}

fn gt_position(gt: &GroundTruthMoment, instance: &QueryInstance) -> Result<usize, MetricError> {
    instance
        .moment_index(&gt.id)
        .ok_or_else(|| DomainError::UnknownMoment(gt.id.clone()).into())
}

/// Labels every ranked prediction relative to `gt`.
///
/// The first prediction matching `gt` is the true positive. A later
/// prediction matching another moment is ignored; a later one matching only
/// `gt` follows the duplicate policy. Everything else is a false positive.
pub fn classify_predictions(
    gt: &GroundTruthMoment,
    instance: &QueryInstance,
    preds: &RankedPredictions,
    tau: IouThreshold,
    duplicates: DuplicatePolicy,
) -> Result<Vec<Label>, MetricError> {
    let j = gt_position(gt, instance)?;
    Ok(labels_from_matrix(&match_matrix(instance, preds, tau), j, duplicates))
}

pub fn evaluate_gt(
    gt: &GroundTruthMoment,
    instance: &QueryInstance,
    preds: &RankedPredictions,
    tau: IouThreshold,
    opts: &MetricOptions,
) -> Result<PerGtOutcome, MetricError> {
    let j = gt_position(gt, instance)?;
    Ok(outcome_from_matrix(instance, &match_matrix(instance, preds, tau), j, tau, opts))
}

pub fn r_m_single(
    gt: &GroundTruthMoment,
    instance: &QueryInstance,
    preds: &RankedPredictions,
    tau: IouThreshold,
    opts: &MetricOptions,
) -> Result<bool, MetricError> {
    evaluate_gt(gt, instance, preds, tau, opts).map(|o| o.r_m)
}

pub fn ap_m_single(
    gt: &GroundTruthMoment,
    instance: &QueryInstance,
    preds: &RankedPredictions,
    tau: IouThreshold,
    opts: &MetricOptions,
) -> Result<f64, MetricError> {
    evaluate_gt(gt, instance, preds, tau, opts).map(|o| o.ap_m)
}

/// Outcomes for every moment of one instance, in moment order.
pub fn evaluate_instance(
    instance: &QueryInstance,
    preds: &RankedPredictions,
    tau: IouThreshold,
    opts: &MetricOptions,
) -> Vec<PerGtOutcome> {
    let hits = match_matrix(instance, preds, tau);
    (0..instance.moments().len())
        .map(|j| outcome_from_matrix(instance, &hits, j, tau, opts))
        .collect()
}

/// Per-moment outcomes for a dataset, grouped by threshold: `result[t]` holds
/// every moment's outcome at `taus[t]` in instance order.
pub fn per_gt_outcomes(
    instances: &[QueryInstance],
    predictions: &PredictionSet,
    taus: &[IouThreshold],
    opts: &MetricOptions,
) -> Result<Vec<Vec<PerGtOutcome>>, MetricError> {
    if instances.is_empty() {
        return Err(MetricError::EmptyDataset);
    }
    if taus.is_empty() {
        return Err(MetricError::NoThresholds);
    }
    let rows: Vec<Vec<Vec<PerGtOutcome>>> = instances
        .par_iter()
        .map(|inst| {
            let preds = lookup(predictions, inst)?;
            Ok(taus
                .iter()
                .map(|&t| evaluate_instance(inst, preds, t, opts))
                .collect())
        })
        .collect::<Result<_, MetricError>>()?;
    Ok((0..taus.len())
        .map(|t| rows.iter().flat_map(|r| r[t].iter().cloned()).collect())
        .collect())
}

/// Aggregates outcomes produced by [`per_gt_outcomes`].
pub fn aggregate(
    outcomes: &[Vec<PerGtOutcome>],
    taus: &[IouThreshold],
) -> Result<(ThresholdScores, ThresholdScores), MetricError> {
    let mut r_m = Vec::with_capacity(taus.len());
    let mut ap_m = Vec::with_capacity(taus.len());
    for column in outcomes {
        let rs: Vec<f64> = column.iter().map(|o| f64::from(u8::from(o.r_m))).collect();
        let aps: Vec<f64> = column.iter().map(|o| o.ap_m).collect();
        r_m.push(mean(&rs).ok_or(MetricError::EmptyDataset)?);
        ap_m.push(mean(&aps).ok_or(MetricError::EmptyDataset)?);
    }
    Ok((
        ThresholdScores::from_values(taus, r_m),
        ThresholdScores::from_values(taus, ap_m),
    ))
}

pub fn dataset_r_m(
    instances: &[QueryInstance],
    predictions: &PredictionSet,
    taus: &[IouThreshold],
    opts: &MetricOptions,
) -> Result<ThresholdScores, MetricError> {
    let outcomes = per_gt_outcomes(instances, predictions, taus, opts)?;
    aggregate(&outcomes, taus).map(|(r, _)| r)
}

pub fn dataset_map_m(
    instances: &[QueryInstance],
    predictions: &PredictionSet,
    taus: &[IouThreshold],
    opts: &MetricOptions,
) -> Result<ThresholdScores, MetricError> {
    let outcomes = per_gt_outcomes(instances, predictions, taus, opts)?;
    aggregate(&outcomes, taus).map(|(_, ap)| ap)
}
