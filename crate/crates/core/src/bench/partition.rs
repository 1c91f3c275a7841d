use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::domain::{GroundTruthMoment, QueryInstance};

use super::{BenchError, CaptionRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SplitLabel {
    CaptionSingle,
    CaptionMulti,
    SearchSingle,
    SearchMulti,
}

impl SplitLabel {
    pub const ALL: [SplitLabel; 4] = [
        SplitLabel::CaptionSingle,
        SplitLabel::CaptionMulti,
        SplitLabel::SearchSingle,
        SplitLabel::SearchMulti,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SplitLabel::CaptionSingle => "caption_single",
            SplitLabel::CaptionMulti => "caption_multi",
            SplitLabel::SearchSingle => "search_single",
            SplitLabel::SearchMulti => "search_multi",
        }
    }
}

impl fmt::Display for SplitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Search queries split by moment count, each paired with caption-query
/// counterparts over exactly the same moments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Partition {
    pub caption_single: Vec<QueryInstance>,
    pub caption_multi: Vec<QueryInstance>,
    pub search_single: Vec<QueryInstance>,
    pub search_multi: Vec<QueryInstance>,
}

impl Partition {
    pub fn get(&self, label: SplitLabel) -> &[QueryInstance] {
        match label {
            SplitLabel::CaptionSingle => &self.caption_single,
            SplitLabel::CaptionMulti => &self.caption_multi,
            SplitLabel::SearchSingle => &self.search_single,
            SplitLabel::SearchMulti => &self.search_multi,
        }
    }

    pub fn moment_count(&self, label: SplitLabel) -> usize {
        self.get(label).iter().map(|i| i.moments().len()).sum()
    }
}

/// Splits search instances into single- and multi-moment sets. Every moment
/// of a search instance also yields a one-moment caption instance (query id =
/// source caption id, query text = original caption) on the matching side.
pub fn partition_single_multi(
    search_instances: &[QueryInstance],
    caption_records: &[CaptionRecord],
) -> Result<Partition, BenchError> {
    let mut by_id: HashMap<&str, &CaptionRecord> = HashMap::with_capacity(caption_records.len());
    for r in caption_records {
        if by_id.insert(r.caption_id.as_str(), r).is_some() {
            return Err(BenchError::DuplicateCaption(r.caption_id.clone()));
        }
    }
    let mut used: HashSet<(String, String)> = HashSet::new();
    let mut out = Partition::default();
    for inst in search_instances {
        let mut captions = Vec::with_capacity(inst.moments().len());
        for m in inst.moments() {
            let unresolved = || BenchError::UnresolvedProvenance {
                query: inst.query_id.clone(),
                moment: m.id.clone(),
            };
            let source = m.source_caption_id.as_deref().ok_or_else(unresolved)?;
            let record = by_id.get(source).ok_or_else(unresolved)?;
            if record.video_id != inst.video_id {
                return Err(unresolved());
            }
            if !used.insert((inst.video_id.clone(), source.to_string())) {
                return Err(BenchError::ReusedProvenance(source.to_string()));
            }
            captions.push(QueryInstance::new(
                source,
                inst.video_id.clone(),
                record.caption_text.clone(),
                vec![GroundTruthMoment {
                    id: m.id.clone(),
                    segment: m.segment,
                    source_caption_id: Some(source.to_string()),
                }],
                inst.window().copied(),
            )?);
        }
        if inst.is_multi() {
            out.search_multi.push(inst.clone());
            out.caption_multi.extend(captions);
        } else {
            out.search_single.push(inst.clone());
            out.caption_single.extend(captions);
        }
    }
    Ok(out)
}
