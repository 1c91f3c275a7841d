//! Acceptance suite: one line per criterion, non-zero exit on any failure.
//!
//! Random criteria use fixed seeds, so every run checks the same cases.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::num::NonZeroUsize;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use moment_eval::bench::{
    build_similarity_graph, connected_components, partition_single_multi, CaptionRecord, SimilarityGraph,
    SplitLabel, STATS_COLUMNS,
};
use moment_eval::domain::{GroundTruthMoment, IouThreshold, QueryInstance, TemporalSegment};
use moment_eval::metrics::multi::{ap_m_single, classify_predictions, dataset_map_m, dataset_r_m, r_m_single, Label};
use moment_eval::metrics::standard::{average_precision, dataset_map, dataset_recall_at_1, recall_at_1};
use moment_eval::metrics::{Interpolation, MetricOptions, PredictionSet};
use moment_eval::postprocess::{nms, NmsConfig};
use rand::Rng;
use serde_json::json;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn taus() -> Vec<IouThreshold> {
    IouThreshold::defaults()
}

/// Median wall time of `f` over `reps` calls after one warm-up call.
fn median_time(reps: usize, mut f: impl FnMut()) -> Duration {
    f();
    let mut times: Vec<Duration> = (0..reps)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed()
        })
        .collect();
    times.sort();
    times[reps / 2]
}

fn two_moment_query() -> QueryInstance {
    instance("q", "v", &[(0.0, 10.0), (50.0, 60.0)])
}

fn criterion_1() -> Check {
    let inst = two_moment_query();
    let preds = ranked(&[
        (0.0, 10.0, 0.9),
        (20.0, 25.0, 0.8),
        (30.0, 35.0, 0.7),
        (40.0, 45.0, 0.6),
        (50.0, 60.0, 0.5),
    ]);
    let tau = IouThreshold::new(0.5).unwrap();
    let opts = MetricOptions::default();
    let score = || {
        let classic = average_precision(&inst, &preds, tau, Interpolation::AllPoint);
        let per_gt: Vec<f64> = inst
            .moments()
            .iter()
            .map(|g| ap_m_single(g, &inst, &preds, tau, &opts).unwrap())
            .collect();
        (classic, per_gt)
    };
    let (classic, per_gt) = score();
    let mut set = PredictionSet::new();
    set.insert(inst.key(), preds.clone());
    let map = dataset_map(std::slice::from_ref(&inst), &set, &[tau], Interpolation::AllPoint).unwrap();
    let map_m = dataset_map_m(std::slice::from_ref(&inst), &set, &[tau], &opts).unwrap();
    ensure!((classic - 0.7).abs() < 1e-9 && (map.average - 0.7).abs() < 1e-9, "classic AP {classic}");
    ensure!(
        (per_gt[0] - 1.0).abs() < 1e-9 && (per_gt[1] - 0.25).abs() < 1e-9,
        "per-moment AP_m {per_gt:?}"
    );
    ensure!((map_m.average - 0.625).abs() < 1e-9, "mAP_m {}", map_m.average);
    let t = median_time(101, || {
        std::hint::black_box(score());
    });
    ensure!(t < Duration::from_millis(1), "took {t:?}");
    Ok(format!(
        "mAP {:.6}, mAP_m {:.6}, per-moment {{{}, {}}}, {t:?}",
        map.average, map_m.average, per_gt[0], per_gt[1]
    ))
}

fn criterion_2() -> Check {
    let inst = two_moment_query();
    let tau = IouThreshold::new(0.5).unwrap();
    let opts = MetricOptions::default();
    let scenarios = [
        ranked(&[(0.0, 10.0, 0.9), (20.0, 30.0, 0.8), (50.0, 60.0, 0.7)]),
        ranked(&[(0.0, 10.0, 0.9), (50.0, 60.0, 0.8)]),
        ranked(&[(20.0, 30.0, 0.9), (0.0, 10.0, 0.8), (50.0, 60.0, 0.7)]),
    ];
    let expected = [(1u8, 0u8), (1, 1), (0, 0)];
    let score = |preds| -> (u8, u8) {
        let r: Vec<u8> = inst
            .moments()
            .iter()
            .map(|g| u8::from(r_m_single(g, &inst, preds, tau, &opts).unwrap()))
            .collect();
        (r[0], r[1])
    };
    let got: Vec<(u8, u8)> = scenarios.iter().map(score).collect();
    ensure!(got == expected, "got {got:?}, expected {expected:?}");
    let t = median_time(101, || {
        for s in &scenarios {
            std::hint::black_box(score(s));
        }
    });
    ensure!(t < Duration::from_millis(1), "took {t:?}");
    Ok(format!("{got:?}, {t:?}"))
}

fn criterion_3() -> Check {
    let mut rng = rng(3);
    let n = 10_000;
    let opts = MetricOptions::default();
    let mut instances = Vec::with_capacity(n);
    let mut set = PredictionSet::new();
    for i in 0..n {
        let (gts, preds) = random_case(&mut rng, 1, 10);
        let inst = instance(&format!("q{i}"), "v", &gts);
        let preds = ranked(&preds);
        let g = &inst.moments()[0];
        for tau in taus() {
            let r1 = recall_at_1(&inst, &preds, tau);
            let rm = r_m_single(g, &inst, &preds, tau, &opts).unwrap();
            ensure!(r1 == rm, "instance {i} tau {tau}: R@1 {r1} vs R_m {rm}");
            let ap = average_precision(&inst, &preds, tau, Interpolation::AllPoint);
            let apm = ap_m_single(g, &inst, &preds, tau, &opts).unwrap();
            ensure!(ap == apm, "instance {i} tau {tau}: AP {ap} vs AP_m {apm}");
        }
        set.insert(inst.key(), preds);
        instances.push(inst);
    }
    let r1 = dataset_recall_at_1(&instances, &set, &taus()).unwrap();
    let rm = dataset_r_m(&instances, &set, &taus(), &opts).unwrap();
    let map = dataset_map(&instances, &set, &taus(), Interpolation::AllPoint).unwrap();
    let map_m = dataset_map_m(&instances, &set, &taus(), &opts).unwrap();
    ensure!(r1 == rm && map == map_m, "dataset scores differ");
    Ok(format!(
        "{n} instances, R@1 = R_m = {:.4} and mAP = mAP_m = {:.4} (avg)",
        r1.average, map.average
    ))
}

fn random_multi_cases(seed: u64, n: usize) -> Vec<(Vec<Seg>, Vec<Pred>)> {
    let mut rng = rng(seed);
    (0..n).map(|_| random_case(&mut rng, 4, 8)).collect()
}

fn criterion_4() -> Check {
    let start = Instant::now();
    let cases = random_multi_cases(4, 10_000);
    let variants = [
        (MetricOptions::default(), false, false),
        (
            MetricOptions { duplicates: "ignore".parse().unwrap(), ..MetricOptions::default() },
            true,
            false,
        ),
        (
            MetricOptions { fp_definition: "literal".parse().unwrap(), ..MetricOptions::default() },
            false,
            true,
        ),
    ];
    let mut checked = 0usize;
    let mut retrieved = 0usize;
    for (i, (gts, preds)) in cases.iter().enumerate() {
        let inst = instance("q", "v", gts);
        let lib_preds = ranked(preds);
        let order = oracle_order(preds);
        for tau in taus() {
            for (j, g) in inst.moments().iter().enumerate() {
                for (opts, ignore_dups, literal) in &variants {
                    let labels = oracle_labels(gts, j, &order, tau.value(), *ignore_dups);
                    let want_ap = oracle_ap_m(&labels);
                    let want_r = oracle_r_m(gts, j, &order, tau.value(), *literal);
                    let ap = ap_m_single(g, &inst, &lib_preds, tau, opts).unwrap();
                    let r = r_m_single(g, &inst, &lib_preds, tau, opts).unwrap();
                    ensure!(
                        (ap - want_ap).abs() <= 1e-9 && r == want_r,
                        "case {i} moment {j} tau {tau} {opts:?}: got ({r}, {ap}), oracle ({want_r}, {want_ap})"
                    );
                    checked += 1;
                    retrieved += usize::from(r);
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!(
        "10000 instances, {checked} moment scores ({retrieved} retrieved) agree, {elapsed:.2?}"
    ))
}

fn criterion_5() -> Check {
    let cases = random_multi_cases(4, 10_000);
    let opts = MetricOptions::default();
    let mut removed = 0usize;
    for (i, (gts, preds)) in cases.iter().enumerate() {
        let inst = instance("q", "v", gts);
        let preds = ranked(preds);
        for tau in taus() {
            for (j, g) in inst.moments().iter().enumerate() {
                let labels = classify_predictions(g, &inst, &preds, tau, opts.duplicates).unwrap();
                let kept = preds.filtered(|k, _| labels[k] != Label::Ignored);
                removed += preds.len() - kept.len();
                let before = (
                    r_m_single(g, &inst, &preds, tau, &opts).unwrap(),
                    ap_m_single(g, &inst, &preds, tau, &opts).unwrap(),
                );
                let after = (
                    r_m_single(g, &inst, &kept, tau, &opts).unwrap(),
                    ap_m_single(g, &inst, &kept, tau, &opts).unwrap(),
                );
                ensure!(before == after, "case {i} moment {j} tau {tau}: {before:?} -> {after:?}");
            }
        }
    }
    Ok(format!("10000 instances, {removed} ignored predictions removed without effect"))
}

fn criterion_6() -> Check {
    let mut rng = rng(6);
    let mut kept_total = 0usize;
    for case in 0..1000 {
        let n = rng.gen_range(0..30);
        let preds: Vec<Pred> = (0..n)
            .map(|_| {
                let s = random_segment(&mut rng, 20.0);
                (s.0, s.1, rng.gen_range(0..=20) as f64 / 20.0)
            })
            .collect();
        let input = ranked(&preds);
        let threshold = rng.gen_range(0.05..0.95);
        let max_keep = if rng.gen_bool(0.3) { NonZeroUsize::new(rng.gen_range(1..6)) } else { None };
        let cfg = NmsConfig::new(threshold, max_keep).unwrap();
        let out = nms(&input, &cfg);
        let kept: Vec<Pred> = out
            .iter()
            .map(|p| (p.segment.start(), p.segment.end(), p.confidence()))
            .collect();
        let all: Vec<Pred> = input
            .iter()
            .map(|p| (p.segment.start(), p.segment.end(), p.confidence()))
            .collect();
        for a in 0..kept.len() {
            for b in a + 1..kept.len() {
                let v = iou((kept[a].0, kept[a].1), (kept[b].0, kept[b].1));
                ensure!(v < threshold, "case {case}: kept pair with IoU {v} >= {threshold}");
            }
        }
        // kept must be a subsequence of the input ranking
        let mut cursor = 0;
        for k in &kept {
            match all[cursor..].iter().position(|p| p == k) {
                Some(off) => cursor += off + 1,
                None => return Err(format!("case {case}: rank order not preserved")),
            }
        }
        if let Some(m) = max_keep {
            ensure!(kept.len() <= m.get(), "case {case}: kept {} > max_keep {m}", kept.len());
        }
        ensure!(nms(&out, &cfg) == out, "case {case}: not idempotent");
        kept_total += kept.len();
    }
    Ok(format!("1000 sets, {kept_total} predictions kept"))
}

fn id(i: usize) -> String {
    format!("c{i:02}")
}

fn member_sets(graph: &SimilarityGraph) -> BTreeSet<Vec<String>> {
    connected_components(graph)
        .into_iter()
        .map(|g| g.member_caption_ids)
        .collect()
}

fn record(video: &str, i: usize, embedding: Vec<f32>) -> CaptionRecord {
    CaptionRecord {
        caption_id: id(i),
        video_id: video.into(),
        caption_text: format!("caption {i}"),
        rewritten_text: format!("query {i}"),
        segment: TemporalSegment::new(i as f64, i as f64 + 1.0).unwrap(),
        embedding: Some(embedding),
        video_duration: None,
    }
}

fn criterion_7() -> Check {
    let mut rng = rng(7);
    for case in 0..1000 {
        let n = rng.gen_range(1..=12);
        let p = rng.gen_range(0.0..0.4);
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|_| rng.gen_bool(p))
            .collect();
        let graph = SimilarityGraph::from_edges("v", (0..n).map(id).collect(), &edges);
        let want: BTreeSet<Vec<String>> = closure_components(n, &edges)
            .into_iter()
            .map(|c| c.into_iter().map(id).collect())
            .collect();
        let got = member_sets(&graph);
        ensure!(got == want, "graph {case}: {got:?} vs closure {want:?}");
    }
    let mut refinements = 0usize;
    for case in 0..1000 {
        let n = rng.gen_range(2..=12);
        let centers: Vec<[f32; 3]> = (0..rng.gen_range(1..4))
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let records: Vec<CaptionRecord> = (0..n)
            .map(|i| {
                let c = centers[rng.gen_range(0..centers.len())];
                let v = c.iter().map(|x| x + rng.gen_range(-0.3..0.3f32)).collect::<Vec<f32>>();
                let v = if v.iter().all(|x| *x == 0.0) { vec![1.0, 0.0, 0.0] } else { v };
                record("v", i, v)
            })
            .collect();
        let lo = rng.gen_range(0.3..0.95);
        let hi = rng.gen_range(lo..1.0);
        let g_lo = build_similarity_graph(&records, lo).unwrap();
        let g_hi = build_similarity_graph(&records, hi).unwrap();
        let e_lo: BTreeSet<(usize, usize)> = g_lo.edges().into_iter().collect();
        ensure!(
            g_hi.edges().iter().all(|e| e_lo.contains(e)),
            "set {case}: edges at {hi} not contained in edges at {lo}"
        );
        let coarse = member_sets(&g_lo);
        for fine in member_sets(&g_hi) {
            let inside = coarse.iter().any(|c| fine.iter().all(|m| c.contains(m)));
            ensure!(inside, "set {case}: group {fine:?} at {hi} splits across groups at {lo}");
            refinements += 1;
        }
    }
    Ok(format!("1000 graphs match closure; 1000 embedding sets monotone ({refinements} groups checked)"))
}

fn moment_multiset(instances: &[QueryInstance]) -> Vec<(String, String, u64, u64)> {
    let mut out: Vec<_> = instances
        .iter()
        .flat_map(|i| {
            i.moments().iter().map(move |m| {
                (
                    i.video_id.clone(),
                    m.source_caption_id.clone().unwrap_or_default(),
                    m.segment.start().to_bits(),
                    m.segment.end().to_bits(),
                )
            })
        })
        .collect();
    out.sort();
    out
}

fn criterion_8() -> Check {
    let mut rng = rng(8);
    let mut totals = [0usize; 4];
    for case in 0..300 {
        let mut records = Vec::new();
        let mut search = Vec::new();
        for v in 0..rng.gen_range(1..=5) {
            let vid = format!("v{v}");
            let n = rng.gen_range(1..=15);
            let mut ids: Vec<usize> = (0..n).collect();
            for k in 0..n {
                let s = random_segment(&mut rng, 100.0);
                records.push(CaptionRecord {
                    caption_id: format!("{vid}c{k}"),
                    video_id: vid.clone(),
                    caption_text: format!("caption {k} of {vid}"),
                    rewritten_text: format!("query {k}"),
                    segment: seg(s),
                    embedding: None,
                    video_duration: None,
                });
                let j = rng.gen_range(0..=k);
                ids.swap(k, j);
            }
            let mut q = 0;
            while !ids.is_empty() {
                let take = rng.gen_range(1..=4).min(ids.len());
                let moments = ids
                    .drain(..take)
                    .map(|k| {
                        let cid = format!("{vid}c{k}");
                        let r = records.iter().find(|r| r.caption_id == cid).unwrap();
                        GroundTruthMoment::new(cid.clone(), r.segment).with_source(cid)
                    })
                    .collect();
                search.push(QueryInstance::new(format!("{vid}q{q}"), vid.clone(), "search", moments, None).unwrap());
                q += 1;
            }
        }
        let part = partition_single_multi(&search, &records).map_err(|e| format!("case {case}: {e}"))?;
        let mut union: Vec<QueryInstance> = part.search_single.iter().chain(&part.search_multi).cloned().collect();
        union.sort_by(|a, b| a.key().cmp(&b.key()));
        let mut input = search.clone();
        input.sort_by(|a, b| a.key().cmp(&b.key()));
        ensure!(union == input, "case {case}: single+multi differs from input");
        ensure!(
            part.search_single.iter().all(|i| !i.is_multi()) && part.search_multi.iter().all(|i| i.is_multi()),
            "case {case}: instance on wrong side"
        );
        for (caption, search_side) in [
            (SplitLabel::CaptionSingle, SplitLabel::SearchSingle),
            (SplitLabel::CaptionMulti, SplitLabel::SearchMulti),
        ] {
            ensure!(
                moment_multiset(part.get(caption)) == moment_multiset(part.get(search_side)),
                "case {case}: {caption} and {search_side} moments differ"
            );
            for c in part.get(caption) {
                let m = &c.moments()[0];
                let r = records.iter().find(|r| Some(&r.caption_id) == m.source_caption_id.as_ref()).unwrap();
                ensure!(
                    c.moments().len() == 1 && c.query_id == r.caption_id && c.query_text == r.caption_text,
                    "case {case}: malformed caption instance {}",
                    c.query_id
                );
            }
        }
        for (t, label) in totals.iter_mut().zip(SplitLabel::ALL) {
            *t += part.moment_count(label);
        }
    }
    Ok(format!(
        "300 benchmarks; moments caption/search single {}/{}, multi {}/{}",
        totals[0], totals[2], totals[1], totals[3]
    ))
}

fn write_lines(path: &Path, lines: &[serde_json::Value]) {
    let text: String = lines.iter().map(|l| format!("{l}\n")).collect();
    std::fs::write(path, text).unwrap();
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_moment-eval"))
}

/// Runs the binary and returns (exit code, stdout).
fn run(args: &[&str], env_threads: Option<&str>) -> (i32, Vec<u8>) {
    let mut cmd = bin();
    cmd.args(args).env_remove("MOMENT_EVAL_THREADS");
    if let Some(t) = env_threads {
        cmd.env("MOMENT_EVAL_THREADS", t);
    }
    let out = cmd.output().expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn determinism_fixture(dir: &Path) {
    let mut rng = rng(9);
    let mut bench = Vec::new();
    let mut preds = Vec::new();
    for i in 0..400 {
        let (gts, p) = random_case(&mut rng, 4, 12);
        let vid = format!("v{}", i % 25);
        bench.push(json!({"qid": format!("q{i}"), "vid": vid, "query": format!("query number {i}"), "moments": gts}));
        let idx: Vec<usize> = (0..p.len()).collect();
        preds.push(json!({"qid": format!("q{i}"), "vid": vid, "pred": p.iter().map(|x| [x.0, x.1, x.2]).collect::<Vec<_>>(), "query_index": idx}));
    }
    write_lines(&dir.join("bench.jsonl"), &bench);
    write_lines(&dir.join("pred.jsonl"), &preds);
    let mut captions = Vec::new();
    for v in 0..12 {
        let centers: Vec<[f32; 4]> = (0..4)
            .map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
            .collect();
        for k in 0..15 {
            let c = centers[rng.gen_range(0..centers.len())];
            let e: Vec<f32> = c.iter().map(|x| x + rng.gen_range(-0.15..0.15f32)).collect();
            let s = random_segment(&mut rng, 300.0);
            captions.push(json!({
                "caption_id": format!("v{v}c{k}"), "vid": format!("v{v}"),
                "caption": format!("a person does thing {k}"), "query": format!("do thing {k}"),
                "segment": [s.0, s.1], "embedding": e, "duration": 320.0,
            }));
        }
    }
    write_lines(&dir.join("captions.jsonl"), &captions);
}

fn criterion_9() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    determinism_fixture(d);
    let p = |name: &str| d.join(name).display().to_string();

    // first pass only discovers the groups that need a representative text
    let (code, _) = run(&["group", "--captions", &p("captions.jsonl"), "--groups-out", &p("groups.jsonl"), "-o", &p("unused.jsonl")], None);
    ensure!(code == 1, "group without representatives exited {code}, expected 1");
    let reps: Vec<serde_json::Value> = std::fs::read_to_string(d.join("groups.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .filter(|g| g["members"].as_array().unwrap().len() > 1)
        .map(|g| json!({"members": g["members"], "query": format!("shared query for {}", g["group_id"].as_str().unwrap())}))
        .collect();
    ensure!(!reps.is_empty(), "fixture produced no multi-member group");
    write_lines(&d.join("reps.jsonl"), &reps);

    let variants: [(Option<&str>, Option<&str>); 5] =
        [(Some("1"), None), (Some("4"), None), (Some("1"), None), (Some("4"), None), (None, Some("4"))];
    let mut outputs: Vec<BTreeMap<&str, Vec<u8>>> = Vec::new();
    for (k, (flag, env)) in variants.iter().enumerate() {
        let mut files = BTreeMap::new();
        let threads: Vec<&str> = flag.map(|t| vec!["--threads", t]).unwrap_or_default();
        let eval_out = p(&format!("report{k}.json"));
        let bench_path = p("bench.jsonl");
        let pred_path = p("pred.jsonl");
        let mut args = vec!["eval", "--benchmark", &bench_path, "--predictions", &pred_path, "--nms", "--per-split", "-o", &eval_out];
        args.extend(&threads);
        let (code, _) = run(&args, *env);
        ensure!(code == 0, "eval exited {code}");
        files.insert("eval", std::fs::read(&eval_out).unwrap());

        let captions = p("captions.jsonl");
        let reps_path = p("reps.jsonl");
        let diag = p(&format!("group_diag{k}.json"));
        let mut args = vec!["group", "--captions", &captions, "--representatives", &reps_path, "--window", "--diagnostics", &diag];
        args.extend(&threads);
        let (code, stdout) = run(&args, *env);
        ensure!(code == 0, "group exited {code}");
        files.insert("group", stdout);
        files.insert("group diagnostics", std::fs::read(&diag).unwrap());

        let mut args = vec!["stats", "--benchmark", &bench_path, "--format", "csv"];
        args.extend(&threads);
        let (code, stdout) = run(&args, *env);
        ensure!(code == 0, "stats exited {code}");
        files.insert("stats", stdout);
        outputs.push(files);
    }
    for (k, o) in outputs.iter().enumerate().skip(1) {
        for (name, bytes) in o {
            ensure!(bytes == &outputs[0][name], "{name} output of run {k} differs from run 0");
            ensure!(!bytes.is_empty(), "{name} output is empty");
        }
    }
    let sizes: Vec<String> = outputs[0].iter().map(|(n, b)| format!("{n} {}B", b.len())).collect();
    Ok(format!("5 runs (threads 1, 4, env 4) identical: {}", sizes.join(", ")))
}

fn criterion_10() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("demo.jsonl");
    write_lines(
        &path,
        &[
            json!({"qid": "a", "vid": "v1", "query": "open the door", "moments": [[0, 5]]}),
            json!({"qid": "b", "vid": "v1", "query": "pour some water", "moments": [[6, 9]]}),
            json!({"qid": "c", "vid": "v2", "query": "cut it", "moments": [[0, 2], [4, 6], [10, 12]]}),
        ],
    );
    let path = path.display().to_string();
    let (code, csv) = run(&["stats", "--benchmark", &path, "--format", "csv"], None);
    ensure!(code == 0, "stats exited {code}");
    let csv = String::from_utf8(csv).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    let header: Vec<&str> = lines[0].split(',').collect();
    let row: Vec<&str> = lines[1].split(',').collect();
    let field = |name: &str| header.iter().position(|h| *h == name).map(|i| row[i]);
    ensure!(field("videos") == Some("2") && field("queries") == Some("3"), "counts in {csv}");
    ensure!(field("moments_per_query") == Some("1.667"), "moments per query in {csv}");
    ensure!(field("pct_multi_queries") == Some("33.33"), "% multi in {csv}");
    let multi: f64 = field("moments_per_query_multi").unwrap_or("").parse().map_err(|_| format!("multi column in {csv}"))?;
    ensure!(multi == 3.0, "moments per multi query {multi}");
    let (code, table) = run(&["stats", "--benchmark", &path], None);
    ensure!(code == 0, "stats table exited {code}");
    let table = String::from_utf8(table).unwrap();
    let head = table.lines().next().unwrap_or("");
    for col in STATS_COLUMNS {
        ensure!(head.contains(col), "table lacks column {col:?}:\n{table}");
    }
    Ok(format!(
        "moments/query {}, % multi {}, moments/query (multi) {}, {} columns",
        field("moments_per_query").unwrap(),
        field("pct_multi_queries").unwrap(),
        field("moments_per_query_multi").unwrap(),
        STATS_COLUMNS.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("worked AP example", criterion_1),
        ("worked recall example", criterion_2),
        ("single-moment equivalence", criterion_3),
        ("brute-force oracle", criterion_4),
        ("ignored predictions are inert", criterion_5),
        ("NMS postconditions", criterion_6),
        ("grouping correctness", criterion_7),
        ("partition integrity", criterion_8),
        ("determinism", criterion_9),
        ("statistics table", criterion_10),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", n + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", n + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
