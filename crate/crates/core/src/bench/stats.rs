use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::domain::QueryInstance;
use crate::postprocess::MeanStd;

use super::graph::cosine_similarity;
use super::CaptionRecord;

/// Mean pairwise cosine of rewritten queries inside groups versus across
/// groups of the same video.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityDiagnostics {
    pub intra_mean: Option<f64>,
    pub intra_pairs: usize,
    pub inter_mean: Option<f64>,
    pub inter_pairs: usize,
}

/// Dataset composition in the usual benchmark-statistics layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsTable {
    pub videos: usize,
    pub queries: usize,
    pub mean_video_duration: f64,
    pub moments_per_query: f64,
    /// Mean over multi-moment queries only; 0 when there are none.
    pub moments_per_query_multi: f64,
    pub multi_queries: usize,
    pub pct_multi: f64,
    /// Whitespace-token count of the query text.
    pub query_length: MeanStd,
    pub similarity: Option<SimilarityDiagnostics>,
}

pub const STATS_COLUMNS: [&str; 8] = [
    "# videos",
    "# queries",
    "Duration per video (s)",
    "Moments per query",
    "Moments per query (multi)",
    "# multi. queries",
    "% multi. queries",
    "Query length",
];

fn mean_or_zero(values: &[f64]) -> f64 {
    MeanStd::of(values).mean
}

/// Statistics for `instances`. `records` supply video durations and
/// embeddings when available; otherwise a video's duration is the furthest
/// window or moment end seen for it.
pub fn dataset_stats(instances: &[QueryInstance], records: &[CaptionRecord]) -> StatsTable {
    let mut extent: BTreeMap<&str, f64> = BTreeMap::new();
    for inst in instances {
        let mut end = inst.moments().iter().map(|m| m.segment.end()).fold(0.0, f64::max);
        if let Some(w) = inst.window() {
            end = end.max(w.end());
        }
        let e = extent.entry(inst.video_id.as_str()).or_insert(0.0);
        *e = e.max(end);
    }
    let mut declared: HashMap<&str, f64> = HashMap::new();
    for r in records {
        if let Some(d) = r.video_duration {
            declared.insert(r.video_id.as_str(), d);
        }
    }
    let durations: Vec<f64> = extent
        .iter()
        .map(|(v, e)| declared.get(v).copied().unwrap_or(*e))
        .collect();

    let sizes: Vec<f64> = instances.iter().map(|i| i.moments().len() as f64).collect();
    let multi: Vec<f64> = sizes.iter().copied().filter(|&n| n > 1.0).collect();
    let lengths: Vec<f64> = instances
        .iter()
        .map(|i| i.query_text.split_whitespace().count() as f64)
        .collect();
    let pct_multi = if instances.is_empty() {
        0.0
    } else {
        100.0 * multi.len() as f64 / instances.len() as f64
    };

    StatsTable {
        videos: extent.len(),
        queries: instances.len(),
        mean_video_duration: mean_or_zero(&durations),
        moments_per_query: mean_or_zero(&sizes),
        moments_per_query_multi: mean_or_zero(&multi),
        multi_queries: multi.len(),
        pct_multi,
        query_length: MeanStd::of(&lengths),
        similarity: similarity_diagnostics(instances, records),
    }
}

fn similarity_diagnostics(instances: &[QueryInstance], records: &[CaptionRecord]) -> Option<SimilarityDiagnostics> {
    let embeddings: HashMap<(&str, &str), &[f32]> = records
        .iter()
        .filter_map(|r| Some(((r.video_id.as_str(), r.caption_id.as_str()), r.embedding.as_deref()?)))
        .collect();
    if embeddings.is_empty() {
        return None;
    }
    // video -> group index -> member embeddings
    let mut videos: BTreeMap<&str, Vec<Vec<&[f32]>>> = BTreeMap::new();
    for inst in instances {
        let mut seen = BTreeSet::new();
        let members: Vec<&[f32]> = inst
            .moments()
            .iter()
            .filter_map(|m| m.source_caption_id.as_deref())
            .filter(|id| seen.insert(*id))
            .filter_map(|id| embeddings.get(&(inst.video_id.as_str(), id)).copied())
            .collect();
        videos.entry(inst.video_id.as_str()).or_default().push(members);
    }
    let (mut intra, mut inter) = (Vec::new(), Vec::new());
    for groups in videos.values() {
        for (gi, g) in groups.iter().enumerate() {
            for (a, va) in g.iter().enumerate() {
                for vb in &g[a + 1..] {
                    intra.push(cosine_similarity(va, vb));
                }
                for h in &groups[gi + 1..] {
                    for vb in h {
                        inter.push(cosine_similarity(va, vb));
                    }
                }
            }
        }
    }
    let avg = |v: &[f64]| (!v.is_empty()).then(|| mean_or_zero(v));
    Some(SimilarityDiagnostics {
        intra_mean: avg(&intra),
        intra_pairs: intra.len(),
        inter_mean: avg(&inter),
        inter_pairs: inter.len(),
    })
}

impl StatsTable {
    fn cells(&self) -> [String; 8] {
        [
            self.videos.to_string(),
            self.queries.to_string(),
            format!("{:.2}", self.mean_video_duration),
            format!("{:.3}", self.moments_per_query),
            format!("{:.3}", self.moments_per_query_multi),
            self.multi_queries.to_string(),
            format!("{:.2}", self.pct_multi),
            format!("{:.2} ± {:.2}", self.query_length.mean, self.query_length.std),
        ]
    }

    /// Aligned text table with one row labelled `name`.
    pub fn render_table(&self, name: &str) -> String {
        let cells = self.cells();
        let mut widths: Vec<usize> = STATS_COLUMNS.iter().map(|c| c.chars().count()).collect();
        for (w, c) in widths.iter_mut().zip(&cells) {
            *w = (*w).max(c.chars().count());
        }
        let label_w = name.chars().count().max("Dataset".len());
        let pad = |s: &str, w: usize| format!("{s}{}", " ".repeat(w - s.chars().count()));
        let mut out = pad("Dataset", label_w);
        for (c, w) in STATS_COLUMNS.iter().zip(&widths) {
            out.push_str(" | ");
            out.push_str(&pad(c, *w));
        }
        out.push('\n');
        out.push_str(&"-".repeat(label_w));
        for w in &widths {
            out.push_str("-+-");
            out.push_str(&"-".repeat(*w));
        }
        out.push('\n');
        out.push_str(&pad(name, label_w));
        for (c, w) in cells.iter().zip(&widths) {
            out.push_str(" | ");
            out.push_str(&pad(c, *w));
        }
        out.push('\n');
        if let Some(s) = &self.similarity {
            out.push_str(&format!(
                "similarity: intra {} ({} pairs), inter {} ({} pairs)\n",
                fmt_opt(s.intra_mean),
                s.intra_pairs,
                fmt_opt(s.inter_mean),
                s.inter_pairs
            ));
        }
        out
    }

    /// CSV with a header row; the query length is split into mean and std.
    pub fn render_csv(&self, name: &str) -> String {
        let mut out = String::from(
            "dataset,videos,queries,duration_per_video_s,moments_per_query,moments_per_query_multi,multi_queries,pct_multi_queries,query_length_mean,query_length_std",
        );
        let sim = self.similarity.is_some();
        if sim {
            out.push_str(",intra_similarity,inter_similarity");
        }
        out.push('\n');
        out.push_str(&format!(
            "{name},{},{},{:.2},{:.3},{:.3},{},{:.2},{:.2},{:.2}",
            self.videos,
            self.queries,
            self.mean_video_duration,
            self.moments_per_query,
            self.moments_per_query_multi,
            self.multi_queries,
            self.pct_multi,
            self.query_length.mean,
            self.query_length.std
        ));
        if let Some(s) = &self.similarity {
            out.push_str(&format!(",{},{}", fmt_opt(s.intra_mean), fmt_opt(s.inter_mean)));
        }
        out.push('\n');
        out
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"))
}
