//! Ranking metrics over temporal predictions.
//!
//! [`standard`] holds the query-level baselines (R@1 and detection AP);
//! [`multi`] holds the per-ground-truth metrics R_m and mAP_m. Both share the
//! precision-recall integration in this module.

pub mod multi;
pub mod standard;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::domain::{DomainError, InstanceKey, IouThreshold, QueryInstance, RankedPredictions};

/// Predictions for a whole dataset, keyed by (video, query).
pub type PredictionSet = BTreeMap<InstanceKey, RankedPredictions>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("empty dataset: no query instances to evaluate")]
    EmptyDataset,
    #[error("at least one IoU threshold is required")]
    NoThresholds,
    #[error("activation threshold {0} outside [0, 1]")]
    ActivationThreshold(f64),
    #[error("no prediction entry for {0}")]
    MissingPredictions(InstanceKey),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// How the precision-recall curve is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    /// Area under the monotone precision envelope at every recall change.
    #[default]
    AllPoint,
    /// Mean of the envelope sampled at recall 0.0, 0.1, ..., 1.0.
    ElevenPoint,
}

/// Treatment of a second prediction matching an already-retrieved moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DuplicatePolicy {
    #[default]
    FalsePositive,
    Ignore,
}

/// Which predictions count as the first false positive for R_m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FpDefinition {
    /// A prediction matching no ground-truth moment at all.
    #[default]
    Prose,
    /// A prediction that misses the evaluated moment but matches another one.
    Literal,
}

macro_rules! keyword_enum {
    ($ty:ty { $($name:literal => $variant:expr),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok($variant),)+
                    other => Err(format!(
                        "unknown value {other:?}, expected one of: {}",
                        [$($name),+].join(", ")
                    )),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                $(if *self == $variant { return f.write_str($name); })+
                unreachable!()
            }
        }
    };
}

keyword_enum!(Interpolation { "all-point" => Interpolation::AllPoint, "11-point" => Interpolation::ElevenPoint });
keyword_enum!(DuplicatePolicy { "fp" => DuplicatePolicy::FalsePositive, "ignore" => DuplicatePolicy::Ignore });
keyword_enum!(FpDefinition { "prose" => FpDefinition::Prose, "literal" => FpDefinition::Literal });

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MetricOptions {
    pub interpolation: Interpolation,
    pub duplicates: DuplicatePolicy,
    pub fp_definition: FpDefinition,
}

/// A metric evaluated at several IoU thresholds plus their arithmetic mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdScores {
    pub per_threshold: Vec<(IouThreshold, f64)>,
    pub average: f64,
}

impl ThresholdScores {
    pub(crate) fn from_values(taus: &[IouThreshold], values: Vec<f64>) -> Self {
        let average = mean(&values).unwrap_or(0.0);
        Self {
            per_threshold: taus.iter().copied().zip(values).collect(),
            average,
        }
    }

    pub fn at(&self, tau: f64) -> Option<f64> {
        self.per_threshold
            .iter()
            .find(|(t, _)| t.value() == tau)
            .map(|(_, v)| *v)
    }
}

/// The four headline metrics of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub r1: ThresholdScores,
    pub map: ThresholdScores,
    pub r_m: ThresholdScores,
    pub map_m: ThresholdScores,
}

pub fn evaluate_all(
    instances: &[QueryInstance],
    predictions: &PredictionSet,
    taus: &[IouThreshold],
    opts: &MetricOptions,
) -> Result<MetricTable, MetricError> {
    let r1 = standard::dataset_recall_at_1(instances, predictions, taus)?;
    let map = standard::dataset_map(instances, predictions, taus, opts.interpolation)?;
    let outcomes = multi::per_gt_outcomes(instances, predictions, taus, opts)?;
    let (r_m, map_m) = multi::aggregate(&outcomes, taus)?;
    Ok(MetricTable { r1, map, r_m, map_m })
}

/// Sequential left-to-right mean, so results never depend on scheduling.
pub(crate) fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

pub(crate) fn lookup<'a>(
    predictions: &'a PredictionSet,
    instance: &QueryInstance,
) -> Result<&'a RankedPredictions, MetricError> {
    let key = instance.key();
    predictions
        .get(&key)
        .ok_or(MetricError::MissingPredictions(key))
}

/// Average precision of a ranked hit list with `relevant` retrievable items.
///
/// `hits[k]` is true when the prediction at rank `k + 1` is a true positive.
pub fn interpolated_ap(hits: &[bool], relevant: usize, interpolation: Interpolation) -> f64 {
    if relevant == 0 || hits.is_empty() {
        return 0.0;
    }
    let mut tp = 0usize;
    let mut curve = Vec::with_capacity(hits.len());
    for (k, &hit) in hits.iter().enumerate() {
        if hit {
            tp += 1;
        }
        curve.push((tp, tp as f64 / (k + 1) as f64));
    }
    // Precision envelope: best precision at this or any deeper rank.
    let mut envelope: Vec<f64> = curve.iter().map(|&(_, p)| p).collect();
    for k in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[k] = envelope[k].max(envelope[k + 1]);
    }
    match interpolation {
        Interpolation::AllPoint => {
            let step = 1.0 / relevant as f64;
            hits.iter()
                .zip(&envelope)
                .filter(|(hit, _)| **hit)
                .map(|(_, p)| step * p)
                .sum::<f64>()
                .min(1.0)
        }
        Interpolation::ElevenPoint => {
            let mut total = 0.0;
            for level in 0..=10usize {
                // recall >= level / 10, kept in integers
                let first = curve.iter().position(|&(tp, _)| tp * 10 >= level * relevant);
                total += first.map_or(0.0, |k| envelope[k]);
            }
            total / 11.0
        }
    }
}
