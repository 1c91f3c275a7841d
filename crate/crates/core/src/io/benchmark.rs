//! Benchmark JSONL: one query instance per line.
//!
//! ```text
//! {"qid": "q1", "vid": "v1", "query": "cut the onion",
//!  "moments": [[12.0, 15.5], [40.2, 44.0]],
//!  "sources": ["c7", "c9"], "window": [0.0, 166.7]}
//! ```
//!
//! `sources` and `window` are optional. Moment ids are the source caption ids
//! when `sources` is present and the moment positions otherwise.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::Serialize;

use crate::domain::{DomainError, GroundTruthMoment, QueryInstance};

use super::json::Record;
use super::{for_each_line, open, IoError};

pub fn parse_benchmark(path: &Path) -> Result<Vec<QueryInstance>, IoError> {
    read_benchmark(open(path)?)
}

pub fn read_benchmark<R: BufRead>(reader: R) -> Result<Vec<QueryInstance>, IoError> {
    let mut out = Vec::new();
    let mut seen: HashMap<(String, String), usize> = HashMap::new();
    for_each_line(reader, |line, text| {
        let inst = parse_line(&Record::parse(line, text)?)?;
        let key = (inst.video_id.clone(), inst.query_id.clone());
        if let Some(&first_line) = seen.get(&key) {
            return Err(IoError::Duplicate {
                line,
                first_line,
                key: format!("query (qid={:?}, vid={:?})", key.1, key.0),
            });
        }
        seen.insert(key, line);
        out.push(inst);
        Ok(())
    })?;
    Ok(out)
}

fn parse_line(rec: &Record) -> Result<QueryInstance, IoError> {
    let qid = rec.id("qid")?;
    let vid = rec.id("vid")?;
    let query = rec.string("query")?;
    let raw = rec.array("moments")?;
    if raw.is_empty() {
        return Err(rec.error("moments", "at least one moment is required"));
    }
    let sources = rec
        .opt_array("sources")?
        .map(|s| {
            s.iter()
                .enumerate()
                .map(|(i, v)| rec.string_at(&format!("sources[{i}]"), v))
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    if let Some(s) = &sources {
        if s.len() != raw.len() {
            return Err(rec.error(
                "sources",
                format!("has {} entries for {} moments", s.len(), raw.len()),
            ));
        }
    }
    let mut moments = Vec::with_capacity(raw.len());
    for (i, v) in raw.iter().enumerate() {
        let segment = rec.segment_at(&format!("moments[{i}]"), v)?;
        moments.push(match &sources {
            Some(s) => GroundTruthMoment::new(s[i].clone(), segment).with_source(s[i].clone()),
            None => GroundTruthMoment::new(i.to_string(), segment),
        });
    }
    let window = rec
        .get("window")
        .map(|v| rec.segment_at("window", v))
        .transpose()?;
    QueryInstance::new(qid, vid, query, moments, window).map_err(|e| match e {
        DomainError::DuplicateMomentId(id) => rec.error("sources", format!("caption {id:?} listed twice")),
        DomainError::OutsideWindow { id } => rec.error("moments", format!("moment {id:?} lies outside window")),
        other => rec.error("moments", other.to_string()),
    })
}

#[derive(Serialize)]
struct Line<'a> {
    qid: &'a str,
    vid: &'a str,
    query: &'a str,
    moments: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sources: Option<Vec<&'a str>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    window: Option<[f64; 2]>,
}

/// Writes instances as JSONL. `sources` is emitted only when every moment
/// carries provenance.
pub fn write_benchmark<W: Write>(mut out: W, instances: &[QueryInstance]) -> std::io::Result<()> {
    for inst in instances {
        let sources: Option<Vec<&str>> = inst
            .moments()
            .iter()
            .map(|m| m.source_caption_id.as_deref())
            .collect();
        let line = Line {
            qid: &inst.query_id,
            vid: &inst.video_id,
            query: &inst.query_text,
            moments: inst
                .moments()
                .iter()
                .map(|m| [m.segment.start(), m.segment.end()])
                .collect(),
            sources,
            window: inst.window().map(|w| [w.start(), w.end()]),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_benchmark_file(path: &Path, instances: &[QueryInstance]) -> Result<(), IoError> {
    let file = std::fs::File::create(path).map_err(|e| IoError::io(path, e))?;
    write_benchmark(std::io::BufWriter::new(file), instances).map_err(|e| IoError::io(path, e))
}
