//! Caption-record JSONL consumed by the benchmark builder:
//!
//! ```text
//! {"caption_id": "c1", "vid": "v1", "caption": "...", "query": "...",
//!  "segment": [12.0, 15.5], "embedding": [0.1, ...], "duration": 954.0}
//! ```
//!
//! `frames: [start_frame, end_frame]` may replace `segment` and is converted
//! with the declared fps. `embedding` and `duration` are optional.
//!
//! Representative texts: `{"members": ["c1", "c4"], "query": "..."}`.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use crate::bench::{CaptionRecord, RepresentativeTexts};
use crate::domain::TemporalSegment;

use super::json::Record;
use super::{for_each_line, open, IoError};

pub fn parse_captions(path: &Path, fps: f64) -> Result<Vec<CaptionRecord>, IoError> {
    read_captions(open(path)?, fps)
}

pub fn read_captions<R: BufRead>(reader: R, fps: f64) -> Result<Vec<CaptionRecord>, IoError> {
    let mut out = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for_each_line(reader, |line, text| {
        let rec = Record::parse(line, text)?;
        let caption_id = rec.id("caption_id")?;
        let segment = match (rec.get("segment"), rec.get("frames")) {
            (Some(v), _) => rec.segment_at("segment", v)?,
            (None, Some(v)) => {
                let f = rec.tuple_at("frames", v, 2)?;
                TemporalSegment::from_frames(f[0], f[1], fps)
                    .map_err(|e| rec.error("frames", e.to_string()))?
            }
            (None, None) => return Err(rec.error("segment", "missing required field")),
        };
        let embedding = rec
            .opt_array("embedding")?
            .map(|values| {
                values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| rec.number_at(&format!("embedding[{i}]"), v).map(|x| x as f32))
                    .collect::<Result<Vec<f32>, _>>()
            })
            .transpose()?;
        let video_duration = rec.opt_number("duration")?;
        if video_duration.is_some_and(|d| d <= 0.0) {
            return Err(rec.error("duration", "must be positive"));
        }
        if let Some(&first_line) = seen.get(&caption_id) {
            return Err(IoError::Duplicate {
                line,
                first_line,
                key: format!("caption_id {caption_id:?}"),
            });
        }
        seen.insert(caption_id.clone(), line);
        out.push(CaptionRecord {
            caption_id,
            video_id: rec.id("vid")?,
            caption_text: rec.string("caption")?,
            rewritten_text: rec.string("query")?,
            segment,
            embedding,
            video_duration,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn parse_representatives(path: &Path) -> Result<RepresentativeTexts, IoError> {
    read_representatives(open(path)?)
}

pub fn read_representatives<R: BufRead>(reader: R) -> Result<RepresentativeTexts, IoError> {
    let mut out = RepresentativeTexts::new();
    for_each_line(reader, |line, text| {
        let rec = Record::parse(line, text)?;
        let members = rec
            .array("members")?
            .iter()
            .enumerate()
            .map(|(i, v)| rec.string_at(&format!("members[{i}]"), v))
            .collect::<Result<Vec<_>, _>>()?;
        if members.is_empty() {
            return Err(rec.error("members", "must not be empty"));
        }
        out.insert(members, rec.string("query")?);
        Ok(())
    })?;
    Ok(out)
}
