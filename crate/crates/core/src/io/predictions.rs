//! Prediction JSONL: `{"qid", "vid", "pred": [[start, end, confidence], ...],
//! "query_index": [slot, ...]}` with `query_index` optional and aligned with
//! `pred`. Predictions are re-ranked on load regardless of file order.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::Serialize;

use crate::domain::{InstanceKey, Prediction, RankedPredictions};
use crate::metrics::PredictionSet;

use super::json::Record;
use super::{for_each_line, open, IoError};

pub fn parse_predictions(path: &Path) -> Result<PredictionSet, IoError> {
    read_predictions(open(path)?)
}

pub fn read_predictions<R: BufRead>(reader: R) -> Result<PredictionSet, IoError> {
    let mut out = PredictionSet::new();
    let mut first_seen: HashMap<InstanceKey, usize> = HashMap::new();
    for_each_line(reader, |line, text| {
        let rec = Record::parse(line, text)?;
        let key = InstanceKey::new(rec.id("vid")?, rec.id("qid")?);
        let raw = rec.array("pred")?;
        let slots = rec.opt_array("query_index")?;
        if let Some(s) = slots {
            if s.len() != raw.len() {
                return Err(rec.error(
                    "query_index",
                    format!("has {} entries for {} predictions", s.len(), raw.len()),
                ));
            }
        }
        let mut preds = Vec::with_capacity(raw.len());
        for (i, v) in raw.iter().enumerate() {
            let path = format!("pred[{i}]");
            let t = rec.tuple_at(&path, v, 3)?;
            let segment = rec.segment(&path, t[0], t[1])?;
            let mut p = Prediction::new(segment, t[2]).map_err(|e| rec.error(&path, e.to_string()))?;
            if let Some(s) = slots {
                p = p.with_query_index(rec.index_at(&format!("query_index[{i}]"), &s[i])?);
            }
            preds.push(p);
        }
        if let Some(&first_line) = first_seen.get(&key) {
            return Err(IoError::Duplicate {
                line,
                first_line,
                key: format!("prediction entry ({key})"),
            });
        }
        first_seen.insert(key.clone(), line);
        out.insert(key, RankedPredictions::new(preds));
        Ok(())
    })?;
    Ok(out)
}

#[derive(Serialize)]
struct Line<'a> {
    qid: &'a str,
    vid: &'a str,
    pred: Vec<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    query_index: Option<Vec<usize>>,
}

/// Writes one line per key in key order; `query_index` is emitted only when
/// every prediction of the entry has one.
pub fn write_predictions<W: Write>(mut out: W, predictions: &PredictionSet) -> std::io::Result<()> {
    for (key, preds) in predictions {
        let line = Line {
            qid: &key.query_id,
            vid: &key.video_id,
            pred: preds
                .iter()
                .map(|p| [p.segment.start(), p.segment.end(), p.confidence()])
                .collect(),
            query_index: if preds.is_empty() {
                None
            } else {
                preds.iter().map(|p| p.query_index).collect()
            },
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}
