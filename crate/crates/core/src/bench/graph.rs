use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{BenchError, CaptionRecord};

/// Captions of one video connected when their rewrites are near-duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    video_id: String,
    nodes: Vec<String>,
    adjacency: Vec<BTreeSet<usize>>,
}

impl SimilarityGraph {
    /// Graph over `nodes` (caption ids) with undirected `edges` by node index.
    /// Self-loops and out-of-range endpoints are dropped.
    pub fn from_edges(video_id: impl Into<String>, nodes: Vec<String>, edges: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![BTreeSet::new(); nodes.len()];
        for &(a, b) in edges {
            if a != b && a < nodes.len() && b < nodes.len() {
                adjacency[a].insert(b);
                adjacency[b].insert(a);
            }
        }
        Self {
            video_id: video_id.into(),
            nodes,
            adjacency,
        }
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[node].iter().copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency.get(a).is_some_and(|n| n.contains(&b))
    }

    /// Edges as `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, n)| n.range(a + 1..).map(move |&b| (a, b)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).sum::<usize>() / 2
    }
}

/// Cosine similarity computed in double precision.
pub fn cosine_similarity(a: &[f32], b: &[f32]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (f64::from(x), f64::from(y));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    dot / (na.sqrt() * nb.sqrt())
}

fn norm(v: &[f32]) -> f64 {
    v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt()
}

/// Records bucketed per video; similarity is never computed across videos.
pub fn group_by_video(records: &[CaptionRecord]) -> BTreeMap<&str, Vec<&CaptionRecord>> {
    let mut out: BTreeMap<&str, Vec<&CaptionRecord>> = BTreeMap::new();
    for r in records {
        out.entry(r.video_id.as_str()).or_default().push(r);
    }
    out
}

/// One node per record, an edge wherever cosine similarity >= `threshold`.
pub fn build_similarity_graph<'a>(
    records: impl IntoIterator<Item = &'a CaptionRecord>,
    threshold: f64,
) -> Result<SimilarityGraph, BenchError> {
    let records: Vec<&CaptionRecord> = records.into_iter().collect();
    let mut vectors = Vec::with_capacity(records.len());
    let mut dim = None;
    for r in &records {
        if r.video_id != records[0].video_id {
            return Err(BenchError::MixedVideos(records[0].video_id.clone(), r.video_id.clone()));
        }
        let v = r
            .embedding
            .as_deref()
            .ok_or_else(|| BenchError::MissingEmbedding(r.caption_id.clone()))?;
        let expected = *dim.get_or_insert(v.len());
        if v.len() != expected {
            return Err(BenchError::Dimension {
                id: r.caption_id.clone(),
                expected,
                found: v.len(),
            });
        }
        if !(norm(v) > 0.0) {
            return Err(BenchError::ZeroNorm(r.caption_id.clone()));
        }
        vectors.push(v);
    }
    let mut edges = Vec::new();
    for a in 0..vectors.len() {
        for b in a + 1..vectors.len() {
            if cosine_similarity(vectors[a], vectors[b]) >= threshold {
                edges.push((a, b));
            }
        }
    }
    let video = records.first().map(|r| r.video_id.clone()).unwrap_or_default();
    let nodes = records.iter().map(|r| r.caption_id.clone()).collect();
    Ok(SimilarityGraph::from_edges(video, nodes, &edges))
}

/// Captions that share one under-specified query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentGroup {
    pub group_id: String,
    pub video_id: String,
    /// Sorted caption ids.
    pub member_caption_ids: Vec<String>,
    pub representative_text: String,
}

/// Maximal connected components, members sorted, groups ordered by their
/// smallest member. Group ids are `<video>:g<k>` in that order.
pub fn connected_components(graph: &SimilarityGraph) -> Vec<MomentGroup> {
    let n = graph.nodes.len();
    let mut seen = vec![false; n];
    let mut components: Vec<Vec<String>> = Vec::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![root];
        let mut members = Vec::new();
        while let Some(node) = stack.pop() {
            members.push(graph.nodes[node].clone());
            for next in graph.neighbors(node) {
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        members.sort();
        components.push(members);
    }
    components.sort();
    components
        .into_iter()
        .enumerate()
        .map(|(k, members)| MomentGroup {
            group_id: format!("{}:g{k}", graph.video_id),
            video_id: graph.video_id.clone(),
            member_caption_ids: members,
            representative_text: String::new(),
        })
        .collect()
}

/// Upstream aggregator output, keyed by the sorted member caption ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RepresentativeTexts(BTreeMap<Vec<String>, String>);

impl RepresentativeTexts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, members: impl IntoIterator<Item = String>, text: impl Into<String>) {
        let mut key: Vec<String> = members.into_iter().collect();
        key.sort();
        self.0.insert(key, text.into());
    }

    pub fn get(&self, sorted_members: &[String]) -> Option<&str> {
        self.0.get(sorted_members).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Fills `representative_text` for every group. Singletons fall back to their
/// member's rewritten text; multi-member groups must be covered by `reps`.
pub fn attach_representatives(
    groups: Vec<MomentGroup>,
    reps: &RepresentativeTexts,
    records: &[CaptionRecord],
) -> Result<Vec<MomentGroup>, BenchError> {
    let by_id: HashMap<&str, &CaptionRecord> =
        records.iter().map(|r| (r.caption_id.as_str(), r)).collect();
    let mut missing = Vec::new();
    let mut out = Vec::with_capacity(groups.len());
    for mut g in groups {
        let text = match reps.get(&g.member_caption_ids) {
            Some(t) if !t.trim().is_empty() => Some(t.to_string()),
            _ if g.member_caption_ids.len() == 1 => {
                let id = &g.member_caption_ids[0];
                let r = by_id
                    .get(id.as_str())
                    .ok_or_else(|| BenchError::UnknownCaption(id.clone()))?;
                Some(r.rewritten_text.clone())
            }
            _ => None,
        };
        match text {
            Some(t) => g.representative_text = t,
            None => missing.push(g.group_id.clone()),
        }
        out.push(g);
    }
    if missing.is_empty() {
        Ok(out)
    } else {
        Err(BenchError::MissingRepresentative(missing))
    }
}
