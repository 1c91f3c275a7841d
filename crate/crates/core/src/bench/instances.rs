use std::collections::{BTreeMap, HashMap};

use crate::domain::{GroundTruthMoment, QueryInstance, TemporalSegment};

use super::{BenchError, CaptionRecord, MomentGroup};

/// One instance per group; each member caption contributes one moment whose
/// id and provenance are the caption id. With `dedup_moments`, members whose
/// segment repeats an earlier member's are dropped.
pub fn groups_to_instances(
    groups: &[MomentGroup],
    records: &[CaptionRecord],
    dedup_moments: bool,
) -> Result<Vec<QueryInstance>, BenchError> {
    let by_id: HashMap<&str, &CaptionRecord> =
        records.iter().map(|r| (r.caption_id.as_str(), r)).collect();
    groups
        .iter()
        .map(|g| {
            let mut moments: Vec<GroundTruthMoment> = Vec::with_capacity(g.member_caption_ids.len());
            for id in &g.member_caption_ids {
                let r = by_id
                    .get(id.as_str())
                    .ok_or_else(|| BenchError::UnknownCaption(id.clone()))?;
                if dedup_moments && moments.iter().any(|m| m.segment == r.segment) {
                    continue;
                }
                moments.push(GroundTruthMoment::new(id.clone(), r.segment).with_source(id.clone()));
            }
            Ok(QueryInstance::new(
                g.group_id.clone(),
                g.video_id.clone(),
                g.representative_text.clone(),
                moments,
                None,
            )?)
        })
        .collect()
}

/// Cuts every video timeline into consecutive windows of
/// `window_frames / fps` seconds starting at 0 and re-emits each query once
/// per window that holds at least one of its moments.
///
/// A moment belongs to the window containing its midpoint and is clipped to
/// it. The emitted query id is `<qid>@w<k>` for window index `k`.
pub fn window_dataset(
    instances: &[QueryInstance],
    window_frames: u32,
    fps: f64,
) -> Result<Vec<QueryInstance>, BenchError> {
    if window_frames == 0 || !(fps.is_finite() && fps > 0.0) {
        return Err(BenchError::InvalidWindow);
    }
    let length = f64::from(window_frames) / fps;
    let mut out = Vec::new();
    for inst in instances {
        let mut per_window: BTreeMap<u64, Vec<GroundTruthMoment>> = BTreeMap::new();
        for m in inst.moments() {
            let mut k = (m.segment.midpoint() / length).floor() as u64;
            // guard the floor against rounding at window edges
            while k > 0 && m.segment.midpoint() < k as f64 * length {
                k -= 1;
            }
            while m.segment.midpoint() >= (k + 1) as f64 * length {
                k += 1;
            }
            let window = TemporalSegment::new(k as f64 * length, (k + 1) as f64 * length)?;
            if let Some(segment) = m.segment.clip_to(&window) {
                per_window.entry(k).or_default().push(GroundTruthMoment {
                    id: m.id.clone(),
                    segment,
                    source_caption_id: m.source_caption_id.clone(),
                });
            }
        }
        for (k, moments) in per_window {
            let window = TemporalSegment::new(k as f64 * length, (k + 1) as f64 * length)?;
            out.push(QueryInstance::new(
                format!("{}@w{k}", inst.query_id),
                inst.video_id.clone(),
                inst.query_text.clone(),
                moments,
                Some(window),
            )?);
        }
    }
    Ok(out)
}
