use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::bench::{
    attach_representatives, build_similarity_graph, connected_components, dataset_stats, group_by_video,
    groups_to_instances, partition_single_multi, window_dataset, BenchError, CaptionRecord, MomentGroup,
    RepresentativeTexts, SplitLabel, DEFAULT_GROUP_THRESHOLD, DEFAULT_WINDOW_FRAMES,
};
use crate::domain::DEFAULT_FPS;
use crate::io::report::canonical_json;
use crate::io::{
    attach_embeddings, parse_benchmark, parse_captions, parse_representatives, write_benchmark,
    write_benchmark_file,
};

use super::{CliError, Context};

#[derive(Debug, Args)]
pub struct GroupArgs {
    /// Caption-record JSONL.
    #[arg(long)]
    captions: Option<PathBuf>,
    /// Embedding sidecar; row i belongs to the i-th caption record.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Representative query text per multi-member group (JSONL).
    #[arg(long)]
    representatives: Option<PathBuf>,
    /// Cosine similarity at or above which two queries are linked [default: 0.85].
    #[arg(long)]
    group_threshold: Option<f64>,
    /// Frame rate for frame-indexed inputs and windowing [default: 3].
    #[arg(long)]
    fps: Option<f64>,
    /// Drop members whose segment repeats another member's.
    #[arg(long)]
    dedup_moments: bool,
    /// Cut videos into fixed windows and emit one instance per window.
    #[arg(long, overrides_with = "no_window")]
    window: bool,
    #[arg(long, overrides_with = "window")]
    no_window: bool,
    /// Window length in frames [default: 500].
    #[arg(long)]
    window_frames: Option<u32>,
    /// Benchmark JSONL output; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Writes the groups (members and their rewritten queries) as JSONL.
    #[arg(long)]
    groups_out: Option<PathBuf>,
    /// Grouping diagnostics JSON.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    benchmark: Option<PathBuf>,
    /// Caption records supplying video durations and embeddings.
    #[arg(long)]
    captions: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    fps: Option<f64>,
    /// Row label [default: benchmark file stem].
    #[arg(long)]
    name: Option<String>,
    /// table or csv [default: table].
    #[arg(long)]
    format: Option<StatsFormat>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Search-query benchmark with moment provenance.
    #[arg(long)]
    benchmark: Option<PathBuf>,
    #[arg(long)]
    captions: Option<PathBuf>,
    #[arg(long)]
    fps: Option<f64>,
    /// Directory receiving caption_single.jsonl, caption_multi.jsonl,
    /// search_single.jsonl and search_multi.jsonl.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatsFormat {
    Table,
    Csv,
}

impl FromStr for StatsFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(Self::Table),
            "csv" => Ok(Self::Csv),
            other => Err(format!("unknown format {other:?}, expected table or csv")),
        }
    }
}

fn load_records(
    captions: &Path,
    embeddings: Option<&Path>,
    fps: f64,
) -> Result<Vec<CaptionRecord>, CliError> {
    let mut records = parse_captions(captions, fps)?;
    if let Some(e) = embeddings {
        attach_embeddings(&mut records, e)?;
    }
    Ok(records)
}

fn missing_embeddings(records: &[CaptionRecord]) -> Option<String> {
    let missing: Vec<&str> = records
        .iter()
        .filter(|r| r.embedding.is_none())
        .map(|r| r.caption_id.as_str())
        .collect();
    if missing.is_empty() {
        return None;
    }
    let shown: Vec<String> = missing.iter().take(10).map(|id| format!("{id:?}")).collect();
    let more = if missing.len() > 10 {
        format!(" and {} more", missing.len() - 10)
    } else {
        String::new()
    };
    Some(format!(
        "{} caption records have no embedding: {}{more}",
        missing.len(),
        shown.join(", ")
    ))
}

fn groups_jsonl(groups: &[MomentGroup], records: &[CaptionRecord]) -> String {
    let by_id: BTreeMap<&str, &CaptionRecord> =
        records.iter().map(|r| (r.caption_id.as_str(), r)).collect();
    let mut out = String::new();
    for g in groups {
        let queries: Vec<&str> = g
            .member_caption_ids
            .iter()
            .filter_map(|id| by_id.get(id.as_str()).map(|r| r.rewritten_text.as_str()))
            .collect();
        let line = json!({
            "group_id": g.group_id,
            "vid": g.video_id,
            "members": g.member_caption_ids,
            "queries": queries,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}

fn opt_json(x: Option<f64>) -> Value {
    x.map_or(Value::Null, |v| json!(v))
}

pub fn run_group(a: GroupArgs, ctx: &mut Context) -> Result<(), CliError> {
    let s = ctx.settings;
    let captions: PathBuf = s.required(a.captions, "captions")?;
    let embeddings: Option<PathBuf> = s.get(a.embeddings, "embeddings")?;
    let reps_path: Option<PathBuf> = s.get(a.representatives, "representatives")?;
    let threshold = s.or(a.group_threshold, "group_threshold", DEFAULT_GROUP_THRESHOLD)?;
    let fps = s.or(a.fps, "fps", DEFAULT_FPS)?;
    let dedup = s.switch(a.dedup_moments, false, "dedup_moments", false)?;
    let window = s.switch(a.window, a.no_window, "window", false)?;
    let window_frames = s.or(a.window_frames, "window_frames", DEFAULT_WINDOW_FRAMES)?;
    let out: Option<PathBuf> = s.get(a.out, "out")?;
    let groups_out: Option<PathBuf> = s.get(a.groups_out, "groups_out")?;
    let diagnostics_out: Option<PathBuf> = s.get(a.diagnostics, "diagnostics")?;
    s.finish()?;
    if !(-1.0..=1.0).contains(&threshold) {
        return Err(CliError::input(format!("group threshold {threshold} outside [-1, 1]")));
    }

    let records = load_records(&captions, embeddings.as_deref(), fps)?;
    if let Some(msg) = missing_embeddings(&records) {
        return Err(CliError::input(msg));
    }
    let per_video: Vec<Vec<MomentGroup>> = group_by_video(&records)
        .into_par_iter()
        .map(|(_, recs)| build_similarity_graph(recs, threshold).map(|g| connected_components(&g)))
        .collect::<Result<_, BenchError>>()?;
    let groups: Vec<MomentGroup> = per_video.into_iter().flatten().collect();
    if let Some(p) = &groups_out {
        crate::io::report::write_text(p, &groups_jsonl(&groups, &records))?;
    }
    let reps = match &reps_path {
        Some(p) => parse_representatives(p)?,
        None => RepresentativeTexts::new(),
    };
    let groups = attach_representatives(groups, &reps, &records)?;
    let mut instances = groups_to_instances(&groups, &records, dedup)?;
    let grouped = instances.len();
    if window {
        instances = window_dataset(&instances, window_frames, fps)?;
    }

    let mut buf = Vec::new();
    write_benchmark(&mut buf, &instances).map_err(|e| CliError::input(e.to_string()))?;
    ctx.emit(out.as_deref(), &String::from_utf8_lossy(&buf))?;

    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for g in &groups {
        *sizes.entry(g.member_caption_ids.len()).or_insert(0) += 1;
    }
    ctx.note(&format!(
        "grouped {} captions into {} queries ({} multi-moment), {} instances written",
        records.len(),
        grouped,
        groups.iter().filter(|g| g.member_caption_ids.len() > 1).count(),
        instances.len()
    ));
    if let Some(p) = &diagnostics_out {
        let sim = dataset_stats(&groups_to_instances(&groups, &records, false)?, &records).similarity;
        let mut config = Map::new();
        config.insert("captions".into(), json!(captions.display().to_string()));
        config.insert("embeddings".into(), json!(embeddings.as_ref().map(|p| p.display().to_string())));
        config.insert(
            "representatives".into(),
            json!(reps_path.as_ref().map(|p| p.display().to_string())),
        );
        config.insert("group_threshold".into(), json!(threshold));
        config.insert("fps".into(), json!(fps));
        config.insert("dedup_moments".into(), json!(dedup));
        config.insert("window".into(), json!(window));
        config.insert("window_frames".into(), json!(window_frames));
        let report = json!({
            "config": config,
            "captions": records.len(),
            "groups": groups.len(),
            "instances": instances.len(),
            "group_sizes": sizes.iter().map(|(k, v)| json!({"size": k, "count": v})).collect::<Vec<_>>(),
            "similarity": {
                "intra_mean": opt_json(sim.and_then(|s| s.intra_mean)),
                "intra_pairs": sim.map_or(0, |s| s.intra_pairs),
                "inter_mean": opt_json(sim.and_then(|s| s.inter_mean)),
                "inter_pairs": sim.map_or(0, |s| s.inter_pairs),
            },
        });
        crate::io::report::write_text(p, &canonical_json(&report))?;
    }
    Ok(())
}

pub fn run_stats(a: StatsArgs, ctx: &mut Context) -> Result<(), CliError> {
    let s = ctx.settings;
    let benchmark: PathBuf = s.required(a.benchmark, "benchmark")?;
    let captions: Option<PathBuf> = s.get(a.captions, "captions")?;
    let embeddings: Option<PathBuf> = s.get(a.embeddings, "embeddings")?;
    let fps = s.or(a.fps, "fps", DEFAULT_FPS)?;
    let name = s.get(a.name, "name")?.unwrap_or_else(|| {
        benchmark
            .file_stem()
            .map_or_else(|| "benchmark".to_string(), |n| n.to_string_lossy().into_owned())
    });
    let format = s.or(a.format, "format", StatsFormat::Table)?;
    let out: Option<PathBuf> = s.get(a.out, "out")?;
    s.finish()?;
    if embeddings.is_some() && captions.is_none() {
        return Err(CliError::input("--embeddings requires --captions"));
    }

    let instances = parse_benchmark(&benchmark)?;
    let records = match &captions {
        Some(c) => load_records(c, embeddings.as_deref(), fps)?,
        None => Vec::new(),
    };
    let table = dataset_stats(&instances, &records);
    let text = match format {
        StatsFormat::Table => table.render_table(&name),
        StatsFormat::Csv => table.render_csv(&name),
    };
    ctx.emit(out.as_deref(), &text)
}

pub fn run_split(a: SplitArgs, ctx: &mut Context) -> Result<(), CliError> {
    let s = ctx.settings;
    let benchmark: PathBuf = s.required(a.benchmark, "benchmark")?;
    let captions: PathBuf = s.required(a.captions, "captions")?;
    let fps = s.or(a.fps, "fps", DEFAULT_FPS)?;
    let out_dir: PathBuf = s.required(a.out_dir, "out_dir")?;
    s.finish()?;

    let search = parse_benchmark(&benchmark)?;
    let records = parse_captions(&captions, fps)?;
    let partition = partition_single_multi(&search, &records)?;
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::input(format!("{}: {e}", out_dir.display())))?;
    let mut summary = String::from("split\tinstances\tmoments\n");
    for label in SplitLabel::ALL {
        let path = out_dir.join(format!("{label}.jsonl"));
        write_benchmark_file(&path, partition.get(label))?;
        summary.push_str(&format!(
            "{label}\t{}\t{}\n",
            partition.get(label).len(),
            partition.moment_count(label)
        ));
    }
    ctx.emit(None, &summary)
}
