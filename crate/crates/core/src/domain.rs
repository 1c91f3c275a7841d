//! Domain types shared by every metric: temporal segments, ground-truth
//! moments, ranked predictions and the IoU matching predicates.
//!
//! Segments are half-open intervals `[start, end)` measured in seconds. Two
//! segments that only share an endpoint have zero intersection.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

/// Frame rate assumed when converting frame-indexed annotations to seconds.
pub const DEFAULT_FPS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("segment bounds must be finite")]
    NonFinite,
    #[error("start < 0")]
    NegativeStart,
    #[error("end < start")]
    Inverted,
    #[error("zero-length segment")]
    ZeroLength,
    #[error("confidence {0} outside [0, 1]")]
    Confidence(f64),
    #[error("IoU threshold {0} outside (0, 1]")]
    Threshold(f64),
    #[error("fps must be positive and finite, got {0}")]
    Fps(f64),
    #[error("query instance has no ground-truth moments")]
    NoMoments,
    #[error("duplicate moment id {0:?}")]
    DuplicateMomentId(String),
    #[error("moment {id:?} lies outside the instance window")]
    OutsideWindow { id: String },
    #[error("moment {0:?} is not part of the instance")]
    UnknownMoment(String),
}

/// A half-open interval `[start, end)` on a video timeline, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalSegment {
    start: f64,
    end: f64,
}

impl TemporalSegment {
    pub fn new(start: f64, end: f64) -> Result<Self, DomainError> {
        if !start.is_finite() || !end.is_finite() {
            return Err(DomainError::NonFinite);
        }
        if start < 0.0 {
            return Err(DomainError::NegativeStart);
        }
        if end < start {
            return Err(DomainError::Inverted);
        }
        if end == start {
            return Err(DomainError::ZeroLength);
        }
        Ok(Self { start, end })
    }

    /// Converts a frame-indexed interval into seconds.
    pub fn from_frames(start_frame: f64, end_frame: f64, fps: f64) -> Result<Self, DomainError> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(DomainError::Fps(fps));
        }
        Self::new(start_frame / fps, end_frame / fps)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.start + self.end)
    }

    pub fn intersection(&self, other: &Self) -> f64 {
        (self.end.min(other.end) - self.start.max(other.start)).max(0.0)
    }

    /// True when `other` lies entirely inside `self`.
    pub fn contains(&self, other: &Self) -> bool {
        other.start >= self.start && other.end <= self.end
    }

    /// Restricts the segment to `window`; `None` when nothing of positive
    /// length remains.
    pub fn clip_to(&self, window: &Self) -> Option<Self> {
        Self::new(self.start.max(window.start), self.end.min(window.end)).ok()
    }
}

impl fmt::Display for TemporalSegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// Intersection over union of two segments, in `[0, 1]`.
pub fn temporal_iou(a: &TemporalSegment, b: &TemporalSegment) -> f64 {
    if a == b {
        return 1.0;
    }
    let inter = a.intersection(b);
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.length() + b.length() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// IoU threshold `tau` in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct IouThreshold(f64);

impl IouThreshold {
    pub fn new(value: f64) -> Result<Self, DomainError> {
        if value.is_finite() && value > 0.0 && value <= 1.0 {
            Ok(Self(value))
        } else {
            Err(DomainError::Threshold(value))
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// The thresholds the evaluation protocol reports by default.
    pub fn defaults() -> Vec<Self> {
        [0.1, 0.3, 0.5].into_iter().map(Self).collect()
    }
}

impl fmt::Display for IouThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthMoment {
    pub id: String,
    pub segment: TemporalSegment,
    /// Caption-level annotation this moment was grouped from.
    pub source_caption_id: Option<String>,
}

impl GroundTruthMoment {
    pub fn new(id: impl Into<String>, segment: TemporalSegment) -> Self {
        Self {
            id: id.into(),
            segment,
            source_caption_id: None,
        }
    }

    pub fn with_source(mut self, caption_id: impl Into<String>) -> Self {
        self.source_caption_id = Some(caption_id.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub segment: TemporalSegment,
    confidence: f64,
    /// Decoder-query slot that produced this prediction, when known.
    pub query_index: Option<usize>,
}

impl Prediction {
    pub fn new(segment: TemporalSegment, confidence: f64) -> Result<Self, DomainError> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(DomainError::Confidence(confidence));
        }
        Ok(Self {
            segment,
            confidence,
            query_index: None,
        })
    }

    pub fn with_query_index(mut self, index: usize) -> Self {
        self.query_index = Some(index);
        self
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }
}

/// Canonical rank order: confidence descending, then earlier start, then
/// smaller query index (slots without an index after those with one), then
/// earlier end. Input order breaks the remaining ties because the sort is
/// stable.
fn rank_order(a: &Prediction, b: &Prediction) -> Ordering {
    b.confidence
        .total_cmp(&a.confidence)
        .then_with(|| a.segment.start.total_cmp(&b.segment.start))
        .then_with(|| match (a.query_index, b.query_index) {
            (Some(x), Some(y)) => x.cmp(&y),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        })
        .then_with(|| a.segment.end.total_cmp(&b.segment.end))
}

/// Predictions for one query instance in canonical rank order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedPredictions {
    items: Vec<Prediction>,
}

impl RankedPredictions {
    pub fn new(mut items: Vec<Prediction>) -> Self {
        items.sort_by(rank_order);
        Self { items }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn as_slice(&self) -> &[Prediction] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Prediction> {
        self.items.iter()
    }

    pub fn top(&self) -> Option<&Prediction> {
        self.items.first()
    }

    pub fn into_vec(self) -> Vec<Prediction> {
        self.items
    }

    /// Keeps the predictions for which `keep` holds. Rank order is preserved.
    pub fn filtered(&self, mut keep: impl FnMut(usize, &Prediction) -> bool) -> Self {
        let items = self
            .items
            .iter()
            .enumerate()
            .filter(|(i, p)| keep(*i, p))
            .map(|(_, p)| p.clone())
            .collect();
        Self { items }
    }
}

impl<'a> IntoIterator for &'a RankedPredictions {
    type Item = &'a Prediction;
    type IntoIter = std::slice::Iter<'a, Prediction>;

    fn into_iter(self) -> Self::IntoIter {
        self.items.iter()
    }
}

/// One video-query pair with its ground-truth moments.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryInstance {
    pub query_id: String,
    pub video_id: String,
    pub query_text: String,
    moments: Vec<GroundTruthMoment>,
    window: Option<TemporalSegment>,
}

impl QueryInstance {
    pub fn new(
        query_id: impl Into<String>,
        video_id: impl Into<String>,
        query_text: impl Into<String>,
        moments: Vec<GroundTruthMoment>,
        window: Option<TemporalSegment>,
    ) -> Result<Self, DomainError> {
        if moments.is_empty() {
            return Err(DomainError::NoMoments);
        }
        let mut seen = HashSet::with_capacity(moments.len());
        for m in &moments {
            if !seen.insert(m.id.as_str()) {
                return Err(DomainError::DuplicateMomentId(m.id.clone()));
            }
            if let Some(w) = &window {
                if !w.contains(&m.segment) {
                    return Err(DomainError::OutsideWindow { id: m.id.clone() });
                }
            }
        }
        Ok(Self {
            query_id: query_id.into(),
            video_id: video_id.into(),
            query_text: query_text.into(),
            moments,
            window,
        })
    }

    /// Builds an instance whose moment ids are their positions (`"0"`, `"1"`, ...).
    pub fn from_segments(
        query_id: impl Into<String>,
        video_id: impl Into<String>,
        query_text: impl Into<String>,
        segments: impl IntoIterator<Item = TemporalSegment>,
    ) -> Result<Self, DomainError> {
        let moments = segments
            .into_iter()
            .enumerate()
            .map(|(i, s)| GroundTruthMoment::new(i.to_string(), s))
            .collect();
        Self::new(query_id, video_id, query_text, moments, None)
    }

    pub fn moments(&self) -> &[GroundTruthMoment] {
        &self.moments
    }

    pub fn window(&self) -> Option<&TemporalSegment> {
        self.window.as_ref()
    }

    pub fn is_multi(&self) -> bool {
        self.moments.len() > 1
    }

    pub fn key(&self) -> InstanceKey {
        InstanceKey::new(&self.video_id, &self.query_id)
    }

    pub fn moment_index(&self, id: &str) -> Option<usize> {
        self.moments.iter().position(|m| m.id == id)
    }
}

/// Lookup key joining benchmark instances with their predictions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InstanceKey {
    pub video_id: String,
    pub query_id: String,
}

impl InstanceKey {
    pub fn new(video_id: impl Into<String>, query_id: impl Into<String>) -> Self {
        Self {
            video_id: video_id.into(),
            query_id: query_id.into(),
        }
    }
}

impl fmt::Display for InstanceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "qid={:?} vid={:?}", self.query_id, self.video_id)
    }
}

pub fn matches(p: &Prediction, g: &GroundTruthMoment, tau: IouThreshold) -> bool {
    temporal_iou(&p.segment, &g.segment) >= tau.value()
}

/// True when `p` matches some moment of `all` other than `g`.
///
/// Errors when `g` is not a member of `all`.
pub fn matches_other(
    p: &Prediction,
    g: &GroundTruthMoment,
    all: &[GroundTruthMoment],
    tau: IouThreshold,
) -> Result<bool, DomainError> {
    if !all.iter().any(|m| m.id == g.id) {
        return Err(DomainError::UnknownMoment(g.id.clone()));
    }
    Ok(all
        .iter()
        .filter(|m| m.id != g.id)
        .any(|m| matches(p, m, tau)))
}
