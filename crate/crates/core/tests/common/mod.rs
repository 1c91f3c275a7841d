//! Seeded generators and brute-force reference implementations shared by the
//! integration tests. The oracles work on plain tuples and never call the
//! library's matching, labelling or integration code.

#![allow(dead_code)]

use moment_eval::domain::{Prediction, QueryInstance, RankedPredictions, TemporalSegment};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type Seg = (f64, f64);
/// `(start, end, confidence)`.
pub type Pred = (f64, f64, f64);

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Segments on a half-second grid produce exact IoU ties at the usual
/// thresholds; a continuous draw covers everything else.
pub fn random_segment(rng: &mut ChaCha8Rng, horizon: f64) -> Seg {
    if rng.gen_bool(0.5) {
        let steps = (horizon * 2.0) as u32;
        let s = rng.gen_range(0..steps) as f64 / 2.0;
        let len = rng.gen_range(1..=steps / 3 + 1) as f64 / 2.0;
        (s, s + len)
    } else {
        let s = rng.gen_range(0.0..horizon);
        (s, s + rng.gen_range(0.05..horizon / 3.0))
    }
}

/// A prediction near one of `gts` most of the time, otherwise anywhere.
pub fn random_prediction(rng: &mut ChaCha8Rng, gts: &[Seg], horizon: f64) -> Pred {
    let (s, e) = if !gts.is_empty() && rng.gen_bool(0.6) {
        let (gs, ge) = gts[rng.gen_range(0..gts.len())];
        let len = ge - gs;
        let shift = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(-0.6..0.6) * len };
        let stretch = if rng.gen_bool(0.3) { 1.0 } else { rng.gen_range(0.5..1.5) };
        let s = (gs + shift).max(0.0);
        (s, s + (len * stretch).max(0.05))
    } else {
        random_segment(rng, horizon)
    };
    // coarse confidences force rank ties
    let c = if rng.gen_bool(0.3) {
        rng.gen_range(0..=4) as f64 / 4.0
    } else {
        rng.gen_range(0.0..=1.0)
    };
    (s, e, c)
}

pub fn random_case(rng: &mut ChaCha8Rng, max_gts: usize, max_preds: usize) -> (Vec<Seg>, Vec<Pred>) {
    let horizon = 30.0;
    let n_gt = rng.gen_range(1..=max_gts);
    let gts: Vec<Seg> = (0..n_gt).map(|_| random_segment(rng, horizon)).collect();
    let n_pred = rng.gen_range(0..=max_preds);
    let preds = (0..n_pred).map(|_| random_prediction(rng, &gts, horizon)).collect();
    (gts, preds)
}

pub fn seg(s: Seg) -> TemporalSegment {
    TemporalSegment::new(s.0, s.1).expect("valid segment")
}

pub fn instance(qid: &str, vid: &str, gts: &[Seg]) -> QueryInstance {
    QueryInstance::from_segments(qid, vid, "query", gts.iter().map(|&g| seg(g))).expect("valid instance")
}

pub fn ranked(preds: &[Pred]) -> RankedPredictions {
    RankedPredictions::new(
        preds
            .iter()
            .map(|&(s, e, c)| Prediction::new(seg((s, e)), c).expect("valid prediction"))
            .collect(),
    )
}

pub fn iou(a: Seg, b: Seg) -> f64 {
    let inter = (a.1.min(b.1) - a.0.max(b.0)).max(0.0);
    let union = (a.1 - a.0) + (b.1 - b.0) - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Rank order without query indices: confidence descending, then start,
/// then end, then input position.
pub fn oracle_order(preds: &[Pred]) -> Vec<Pred> {
    let mut idx: Vec<usize> = (0..preds.len()).collect();
    idx.sort_by(|&i, &j| {
        let (a, b) = (preds[i], preds[j]);
        b.2.partial_cmp(&a.2)
            .unwrap()
            .then(a.0.partial_cmp(&b.0).unwrap())
            .then(a.1.partial_cmp(&b.1).unwrap())
            .then(i.cmp(&j))
    });
    idx.into_iter().map(|i| preds[i]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    Tp,
    Fp,
    Ign,
}

/// Role of every ranked prediction when scoring moment `j`.
pub fn oracle_labels(gts: &[Seg], j: usize, ranked: &[Pred], tau: f64, ignore_duplicates: bool) -> Vec<Tag> {
    let mut found = false;
    ranked
        .iter()
        .map(|&(s, e, _)| {
            let hits_j = iou((s, e), gts[j]) >= tau;
            let hits_other = (0..gts.len()).any(|k| k != j && iou((s, e), gts[k]) >= tau);
            if hits_j && !found {
                found = true;
                Tag::Tp
            } else if hits_other {
                Tag::Ign
            } else if hits_j && ignore_duplicates {
                Tag::Ign
            } else {
                Tag::Fp
            }
        })
        .collect()
}

pub fn oracle_r_m(gts: &[Seg], j: usize, ranked: &[Pred], tau: f64, literal: bool) -> bool {
    let matched = |p: &Pred, k: usize| iou((p.0, p.1), gts[k]) >= tau;
    let first_match = ranked.iter().position(|p| matched(p, j));
    let first_fp = ranked.iter().position(|p| {
        let any_other = (0..gts.len()).any(|k| k != j && matched(p, k));
        if literal {
            !matched(p, j) && any_other
        } else {
            !matched(p, j) && !any_other
        }
    });
    match (first_match, first_fp) {
        (None, _) => false,
        (Some(_), None) => true,
        (Some(m), Some(f)) => m < f,
    }
}

/// All-point interpolated AP from explicit (recall, precision) points:
/// the area under `p_interp(r) = max_{r' >= r} p(r')`.
pub fn oracle_ap(hits: &[bool], relevant: usize) -> f64 {
    if relevant == 0 {
        return 0.0;
    }
    let mut points = Vec::new();
    let mut tp = 0;
    for (k, &h) in hits.iter().enumerate() {
        tp += usize::from(h);
        points.push((tp as f64 / relevant as f64, tp as f64 / (k + 1) as f64));
    }
    let mut area = 0.0;
    let mut prev_recall = 0.0;
    for (i, &(r, _)) in points.iter().enumerate() {
        if r > prev_recall {
            let p_interp = points[i..].iter().map(|&(_, p)| p).fold(0.0, f64::max);
            area += (r - prev_recall) * p_interp;
            prev_recall = r;
        }
    }
    area
}

pub fn oracle_ap_m(labels: &[Tag]) -> f64 {
    let hits: Vec<bool> = labels.iter().filter(|t| **t != Tag::Ign).map(|t| *t == Tag::Tp).collect();
    oracle_ap(&hits, 1)
}

/// Detection AP with greedy one-to-one matching: each prediction claims the
/// unclaimed moment of highest IoU (lowest index on ties).
pub fn oracle_classic_ap(gts: &[Seg], ranked: &[Pred], tau: f64) -> f64 {
    let mut claimed = vec![false; gts.len()];
    let hits: Vec<bool> = ranked
        .iter()
        .map(|&(s, e, _)| {
            let mut best: Option<(usize, f64)> = None;
            for (k, &g) in gts.iter().enumerate() {
                let v = iou((s, e), g);
                if !claimed[k] && v >= tau && best.map_or(true, |(_, b)| v > b) {
                    best = Some((k, v));
                }
            }
            match best {
                Some((k, _)) => {
                    claimed[k] = true;
                    true
                }
                None => false,
            }
        })
        .collect();
    oracle_ap(&hits, gts.len())
}

/// Connected components by transitive closure of the adjacency matrix.
pub fn closure_components(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in edges {
        reach[a][b] = true;
        reach[b][a] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        if !seen[i] {
            let comp: Vec<usize> = (0..n).filter(|&j| reach[i][j]).collect();
            for &j in &comp {
                seen[j] = true;
            }
            out.push(comp);
        }
    }
    out
}
