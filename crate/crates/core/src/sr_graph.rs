//! Precomputed semantic-relatedness tables and per-learner topic graphs.
//!
//! Two CSV layouts are accepted, detected from the header:
//!
//! * long: `topic_a,topic_b,metric,value`
//! * wide: `topic_a,topic_b,mw,w2v,pmi,lm,jaccard,cp,ba` (any subset of the
//!   metric columns)
//!
//! Pairs are unordered. A pair that is not listed has relatedness `0`, and a
//! topic is related to itself with relatedness `1`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::TopicId;

#[derive(Debug, Error)]
pub enum SrError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("metric {requested} not present; available: {available}")]
    UnknownMetric { requested: String, available: String },
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("unrecognised SR header {0:?}")]
    BadHeader(Vec<String>),
}

/// The seven relatedness families distributed with the WAT annotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SrMetric {
    #[serde(rename = "mw")]
    MilneWitten,
    #[serde(rename = "w2v")]
    EntityEmbedding,
    #[serde(rename = "pmi")]
    Pmi,
    #[serde(rename = "lm")]
    LanguageModel,
    #[serde(rename = "jaccard")]
    Jaccard,
    #[serde(rename = "cp")]
    ConditionalProbability,
    #[serde(rename = "ba")]
    BarabasiAlbert,
}

impl SrMetric {
    pub const ALL: [SrMetric; 7] = [
        SrMetric::MilneWitten,
        SrMetric::EntityEmbedding,
        SrMetric::Pmi,
        SrMetric::LanguageModel,
        SrMetric::Jaccard,
        SrMetric::ConditionalProbability,
        SrMetric::BarabasiAlbert,
    ];

    /// Lower-case column / flag name.
    pub fn key(self) -> &'static str {
        match self {
            SrMetric::MilneWitten => "mw",
            SrMetric::EntityEmbedding => "w2v",
            SrMetric::Pmi => "pmi",
            SrMetric::LanguageModel => "lm",
            SrMetric::Jaccard => "jaccard",
            SrMetric::ConditionalProbability => "cp",
            SrMetric::BarabasiAlbert => "ba",
        }
    }

    /// Name used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            SrMetric::MilneWitten => "M&W",
            SrMetric::EntityEmbedding => "W2V",
            SrMetric::Pmi => "PMI",
            SrMetric::LanguageModel => "LM",
            SrMetric::Jaccard => "Jaccard",
            SrMetric::ConditionalProbability => "CP",
            SrMetric::BarabasiAlbert => "BA",
        }
    }
}

impl fmt::Display for SrMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for SrMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let norm = s.trim().to_ascii_lowercase();
        Ok(match norm.as_str() {
            "mw" | "m&w" | "milne-witten" | "milnewitten" => SrMetric::MilneWitten,
            "w2v" | "entity-embedding" | "embedding" => SrMetric::EntityEmbedding,
            "pmi" => SrMetric::Pmi,
            "lm" | "language-model" => SrMetric::LanguageModel,
            "jaccard" => SrMetric::Jaccard,
            "cp" | "conditional-probability" => SrMetric::ConditionalProbability,
            "ba" | "barabasi-albert" => SrMetric::BarabasiAlbert,
            _ => {
                return Err(format!(
                    "unknown SR metric {s:?}; expected one of {}",
                    SrMetric::ALL.map(SrMetric::key).join(", ")
                ))
            }
        })
    }
}

fn pair_key(a: TopicId, b: TopicId) -> (TopicId, TopicId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Sparse symmetric relatedness map for one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct SrTable {
    metric: SrMetric,
    entries: HashMap<(TopicId, TopicId), f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrLoadReport {
    pub rows: usize,
    pub stored_pairs: usize,
    pub clamped: usize,
    pub duplicates: usize,
    pub self_pairs: usize,
}

impl SrTable {
    pub fn new(metric: SrMetric) -> Self {
        Self {
            metric,
            entries: HashMap::new(),
        }
    }

    pub fn metric(&self) -> SrMetric {
        self.metric
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Stores `value` for the unordered pair, clamped into `[0, 1]`.
    /// Returns the previous value. Self pairs are ignored.
    pub fn insert(&mut self, a: TopicId, b: TopicId, value: f64) -> Option<f64> {
        if a == b {
            return None;
        }
        self.entries.insert(pair_key(a, b), value.clamp(0.0, 1.0))
    }

    pub fn lookup(&self, a: TopicId, b: TopicId) -> f64 {
        if a == b {
            return 1.0;
        }
        self.entries.get(&pair_key(a, b)).copied().unwrap_or(0.0)
    }

    /// Stored pairs in ascending `(topic_a, topic_b)` order.
    pub fn pairs(&self) -> Vec<(TopicId, TopicId, f64)> {
        let mut out: Vec<_> = self.entries.iter().map(|(&(a, b), &v)| (a, b, v)).collect();
        out.sort_by_key(|x| (x.0, x.1));
        out
    }

    /// Writes the table in the long layout.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), SrError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["topic_a", "topic_b", "metric", "value"])?;
        for (a, b, v) in self.pairs() {
            w.write_record([
                a.to_string(),
                b.to_string(),
                self.metric.key().to_string(),
                v.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

enum Layout {
    Long { metric: usize, value: usize },
    Wide { value: usize },
}

fn record_line(r: &csv::StringRecord) -> u64 {
    r.position().map_or(0, |p| p.line())
}

pub fn load_sr_table_from<R: Read>(
    reader: R,
    metric: SrMetric,
) -> Result<(SrTable, SrLoadReport), SrError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(c_a), Some(c_b)) = (col("topic_a"), col("topic_b")) else {
        return Err(SrError::BadHeader(headers));
    };
    let metric_columns: Vec<SrMetric> = headers
        .iter()
        .filter_map(|h| h.parse::<SrMetric>().ok())
        .collect();
    let layout = match (col("metric"), col("value")) {
        (Some(m), Some(v)) => Layout::Long { metric: m, value: v },
        _ => match headers.iter().position(|h| h.parse::<SrMetric>() == Ok(metric)) {
            Some(v) => Layout::Wide { value: v },
            None if metric_columns.is_empty() => return Err(SrError::BadHeader(headers)),
            None => {
                return Err(SrError::UnknownMetric {
                    requested: metric.key().to_string(),
                    available: metric_columns
                        .iter()
                        .map(|m| m.key())
                        .collect::<Vec<_>>()
                        .join(", "),
                })
            }
        },
    };

    let mut table = SrTable::new(metric);
    let mut report = SrLoadReport::default();
    let mut metrics_present = BTreeSet::new();
    for record in rdr.records() {
        let record = record?;
        let line = record_line(&record);
        let malformed = |message: String| SrError::Malformed { line, message };
        let value_col = match layout {
            Layout::Long { metric: m, value } => {
                let name = record.get(m).unwrap_or("");
                let row_metric: SrMetric = name.parse().map_err(malformed)?;
                metrics_present.insert(row_metric);
                if row_metric != metric {
                    continue;
                }
                value
            }
            Layout::Wide { value } => value,
        };
        let raw_value = record.get(value_col).unwrap_or("");
        if raw_value.is_empty() {
            continue;
        }
        report.rows += 1;
        let parse_topic = |i: usize| -> Result<TopicId, SrError> {
            let raw = record.get(i).unwrap_or("");
            raw.parse()
                .map_err(|_| malformed(format!("bad topic id {raw:?}")))
        };
        let a = parse_topic(c_a)?;
        let b = parse_topic(c_b)?;
        let value: f64 = raw_value
            .parse()
            .ok()
            .filter(|v: &f64| !v.is_nan())
            .ok_or_else(|| malformed(format!("bad relatedness value {raw_value:?}")))?;
        if a == b {
            report.self_pairs += 1;
            continue;
        }
        if !(0.0..=1.0).contains(&value) {
            report.clamped += 1;
        }
        if table.insert(a, b, value).is_some() {
            report.duplicates += 1;
        }
    }
    if let Layout::Long { .. } = layout {
        if report.rows == 0 && !metrics_present.is_empty() {
            return Err(SrError::UnknownMetric {
                requested: metric.key().to_string(),
                available: metrics_present
                    .iter()
                    .map(|m| m.key())
                    .collect::<Vec<_>>()
                    .join(", "),
            });
        }
    }
    report.stored_pairs = table.len();
    if report.clamped > 0 {
        log::warn!("clamped {} relatedness value(s) into [0, 1]", report.clamped);
    }
    if report.duplicates > 0 {
        log::warn!(
            "{} duplicate pair(s) in SR table; last value kept",
            report.duplicates
        );
    }
    Ok((table, report))
}

pub fn load_sr_table(
    path: impl AsRef<Path>,
    metric: SrMetric,
) -> Result<(SrTable, SrLoadReport), SrError> {
    load_sr_table_from(File::open(path)?, metric)
}

/// How many related seen topics feed a propagated prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Omega {
    Top(usize),
    All,
}

impl Omega {
    pub const SWEEP: [Omega; 5] = [
        Omega::Top(1),
        Omega::Top(3),
        Omega::Top(5),
        Omega::Top(10),
        Omega::All,
    ];
}

impl fmt::Display for Omega {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Omega::Top(k) => write!(f, "{k}"),
            Omega::All => f.write_str("all"),
        }
    }
}

impl FromStr for Omega {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(Omega::All);
        }
        match s.parse::<usize>() {
            Ok(k) if k > 0 => Ok(Omega::Top(k)),
            _ => Err(format!("omega must be a positive count or \"all\", got {s:?}")),
        }
    }
}

impl From<Omega> for String {
    fn from(o: Omega) -> String {
        o.to_string()
    }
}

impl TryFrom<String> for Omega {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

/// Seen topics related to `target`, strongest first.
///
/// Only pairs with positive relatedness qualify. Equal relatedness is broken
/// by ascending topic id, and the list is cut to `k` entries.
pub fn related_seen_topics(
    table: &SrTable,
    target: TopicId,
    seen: &BTreeSet<TopicId>,
    k: Omega,
) -> Vec<(TopicId, f64)> {
    let mut related: Vec<(TopicId, f64)> = seen
        .iter()
        .filter(|&&j| j != target)
        .map(|&j| (j, table.lookup(target, j)))
        .filter(|&(_, rho)| rho > 0.0)
        .collect();
    // `seen` iterates in ascending id order and the sort is stable.
    related.sort_by(|a, b| b.1.total_cmp(&a.1));
    if let Omega::Top(k) = k {
        related.truncate(k);
    }
    related
}

/// Undirected simple graph over the topics of one learner session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearnerTopicGraph {
    nodes: Vec<TopicId>,
    adjacency: Vec<Vec<usize>>,
}

impl LearnerTopicGraph {
    /// Connects two session topics when their relatedness exceeds `threshold`.
    pub fn from_topics<I>(topics: I, table: &SrTable, threshold: f64) -> Self
    where
        I: IntoIterator<Item = TopicId>,
    {
        let nodes: Vec<TopicId> = topics.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let mut edges = Vec::new();
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                if table.lookup(nodes[i], nodes[j]) > threshold {
                    edges.push((i, j));
                }
            }
        }
        Self::from_edges(nodes, &edges)
    }

    /// Builds a graph from index pairs into `nodes`; duplicate edges and self
    /// loops are dropped.
    pub fn from_edges(nodes: Vec<TopicId>, edges: &[(usize, usize)]) -> Self {
        let n = nodes.len();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            assert!(a < n && b < n, "edge ({a}, {b}) out of range for {n} nodes");
            if a != b {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        for list in adjacency.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        Self { nodes, adjacency }
    }

    pub fn nodes(&self) -> &[TopicId] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n_nodes();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &u in &self.adjacency[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
        count == n
    }
}

/// Mean node degree; `0` for an empty graph.
pub fn avg_connectedness(g: &LearnerTopicGraph) -> f64 {
    if g.n_nodes() == 0 {
        log::warn!("average connectedness of an empty topic graph taken as 0");
        return 0.0;
    }
    2.0 * g.n_edges() as f64 / g.n_nodes() as f64
}

/// Unit-capacity max-flow network (Dinic).
struct FlowNetwork {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u32>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl FlowNetwork {
    fn new(n: usize) -> Self {
        Self {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
            level: vec![0; n],
            iter: vec![0; n],
        }
    }

    fn add_edge(&mut self, a: usize, b: usize, cap: u32) {
        self.head[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(cap);
        self.head[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(0);
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.head[v] {
                let u = self.to[e];
                if self.cap[e] > 0 && self.level[u] < 0 {
                    self.level[u] = self.level[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, v: usize, t: usize, pushed: u32) -> u32 {
        if v == t {
            return pushed;
        }
        while self.iter[v] < self.head[v].len() {
            let e = self.head[v][self.iter[v]];
            let u = self.to[e];
            if self.cap[e] > 0 && self.level[u] == self.level[v] + 1 {
                let got = self.dfs(u, t, pushed.min(self.cap[e]));
                if got > 0 {
                    self.cap[e] -= got;
                    self.cap[e ^ 1] += got;
                    return got;
                }
            }
            self.iter[v] += 1;
        }
        0
    }

    /// Max flow from `s` to `t`, stopping early once `limit` is reached.
    fn max_flow(&mut self, s: usize, t: usize, limit: u32) -> u32 {
        let mut flow = 0;
        while flow < limit && self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, limit - flow);
                if f == 0 {
                    break;
                }
                flow += f;
                if flow >= limit {
                    break;
                }
            }
        }
        flow
    }
}

/// Number of internally vertex-disjoint paths between non-adjacent `s`, `t`
/// (capped at `limit`), via the split-vertex flow network.
fn local_vertex_connectivity(g: &LearnerTopicGraph, s: usize, t: usize, limit: u32) -> u32 {
    let n = g.n_nodes();
    let big = n as u32 + 1;
    let mut net = FlowNetwork::new(2 * n);
    for v in 0..n {
        let cap = if v == s || v == t { big } else { 1 };
        net.add_edge(2 * v, 2 * v + 1, cap);
        for &u in g.neighbours(v) {
            net.add_edge(2 * v + 1, 2 * u, big);
        }
    }
    net.max_flow(2 * s + 1, 2 * t, limit)
}

/// Vertex connectivity: the fewest topics whose removal disconnects the
/// graph. `0` for disconnected graphs or fewer than two nodes, `n - 1` for
/// complete graphs.
pub fn min_cut_set_size(g: &LearnerTopicGraph) -> usize {
    let n = g.n_nodes();
    if n < 2 || !g.is_connected() {
        return 0;
    }
    // Even's scheme: some vertex among the first best+1 lies outside a
    // minimum separator, and every pair involving it is checked.
    let mut best = (0..n).map(|v| g.degree(v)).min().unwrap_or(0);
    let mut i = 0;
    while i <= best && i < n {
        for j in i + 1..n {
            if !g.has_edge(i, j) {
                let k = local_vertex_connectivity(g, i, j, best as u32) as usize;
                best = best.min(k);
            }
        }
        i += 1;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn ids(n: usize) -> Vec<TopicId> {
        (0..n as u64).map(TopicId).collect()
    }

    fn complete(n: usize) -> LearnerTopicGraph {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j));
            }
        }
        LearnerTopicGraph::from_edges(ids(n), &edges)
    }

    /// Exponential oracle: smallest vertex subset whose removal leaves at
    /// least two components.
    fn brute_force_connectivity(n: usize, edges: &[(usize, usize)]) -> usize {
        let connected_without = |removed: u32| -> bool {
            let alive: Vec<usize> = (0..n).filter(|v| removed & (1 << v) == 0).collect();
            if alive.len() < 2 {
                return true;
            }
            let mut comp = vec![usize::MAX; n];
            let mut stack = vec![alive[0]];
            comp[alive[0]] = 0;
            while let Some(v) = stack.pop() {
                for &(a, b) in edges {
                    for (x, y) in [(a, b), (b, a)] {
                        if x == v && removed & (1 << y) == 0 && comp[y] == usize::MAX {
                            comp[y] = 0;
                            stack.push(y);
                        }
                    }
                }
            }
            alive.iter().all(|&v| comp[v] == 0)
        };
        if !connected_without(0) {
            return 0;
        }
        let mut best = n - 1;
        for mask in 0u32..(1 << n) {
            let size = mask.count_ones() as usize;
            if size < best && (n - size) >= 2 && !connected_without(mask) {
                best = size;
            }
        }
        best
    }

    #[test]
    fn metric_names_parse() {
        for m in SrMetric::ALL {
            assert_eq!(m.key().parse::<SrMetric>().unwrap(), m);
        }
        assert_eq!("M&W".parse::<SrMetric>().unwrap(), SrMetric::MilneWitten);
        assert!("cosine".parse::<SrMetric>().is_err());
    }

    #[test]
    fn wide_file_symmetry_and_default() {
        let src = "topic_a,topic_b,mw,w2v\n1,2,0.3,0.8\n";
        let (t, _) = load_sr_table_from(src.as_bytes(), SrMetric::EntityEmbedding).unwrap();
        assert_eq!(t.lookup(TopicId(2), TopicId(1)), 0.8);
        assert_eq!(t.lookup(TopicId(1), TopicId(2)), 0.8);
        assert_eq!(t.lookup(TopicId(1), TopicId(999)), 0.0);
        assert_eq!(t.lookup(TopicId(5), TopicId(5)), 1.0);
    }

    #[test]
    fn duplicate_pairs_last_write_wins() {
        let src = "topic_a,topic_b,metric,value\n1,2,w2v,0.8\n2,1,w2v,0.7\n1,3,mw,0.5\n";
        let (t, r) = load_sr_table_from(src.as_bytes(), SrMetric::EntityEmbedding).unwrap();
        assert_eq!(t.lookup(TopicId(1), TopicId(2)), 0.7);
        assert_eq!(r.duplicates, 1);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn clamps_out_of_range() {
        let src = "topic_a,topic_b,metric,value\n1,2,pmi,1.7\n1,3,pmi,-0.2\n";
        let (t, r) = load_sr_table_from(src.as_bytes(), SrMetric::Pmi).unwrap();
        assert_eq!(r.clamped, 2);
        assert_eq!(t.lookup(TopicId(1), TopicId(2)), 1.0);
        assert_eq!(t.lookup(TopicId(1), TopicId(3)), 0.0);
    }

    #[test]
    fn missing_metric_lists_available() {
        let src = "topic_a,topic_b,mw,w2v\n1,2,0.3,0.8\n";
        let err = load_sr_table_from(src.as_bytes(), SrMetric::Jaccard).unwrap_err();
        match err {
            SrError::UnknownMetric { available, .. } => assert_eq!(available, "mw, w2v"),
            other => panic!("unexpected {other:?}"),
        }
        let src = "topic_a,topic_b,metric,value\n1,2,mw,0.5\n";
        assert!(matches!(
            load_sr_table_from(src.as_bytes(), SrMetric::Jaccard),
            Err(SrError::UnknownMetric { .. })
        ));
    }

    #[test]
    fn related_topics_ordering() {
        let (target, a, b, c) = (TopicId(100), TopicId(1), TopicId(2), TopicId(3));
        let mut t = SrTable::new(SrMetric::EntityEmbedding);
        t.insert(target, a, 0.9);
        t.insert(target, b, 0.2);
        t.insert(target, c, 0.0);
        let seen: BTreeSet<_> = [a, b, c].into();
        assert_eq!(related_seen_topics(&t, target, &seen, Omega::Top(1)), vec![(a, 0.9)]);
        assert_eq!(
            related_seen_topics(&t, target, &seen, Omega::All),
            vec![(a, 0.9), (b, 0.2)]
        );
        let mut tie = SrTable::new(SrMetric::EntityEmbedding);
        tie.insert(target, b, 0.5);
        tie.insert(target, a, 0.5);
        assert_eq!(related_seen_topics(&tie, target, &seen, Omega::Top(1)), vec![(a, 0.5)]);
    }

    #[test]
    fn omega_parse() {
        assert_eq!("all".parse::<Omega>().unwrap(), Omega::All);
        assert_eq!("5".parse::<Omega>().unwrap(), Omega::Top(5));
        assert!("0".parse::<Omega>().is_err());
    }

    #[test]
    fn connectedness_examples() {
        let tri = LearnerTopicGraph::from_edges(ids(3), &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(avg_connectedness(&tri), 2.0);
        assert_eq!(min_cut_set_size(&tri), 2);
        let path = LearnerTopicGraph::from_edges(ids(3), &[(0, 1), (1, 2)]);
        assert!((avg_connectedness(&path) - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(min_cut_set_size(&path), 1);
        assert_eq!(min_cut_set_size(&complete(4)), 3);
        let empty = LearnerTopicGraph::from_edges(vec![], &[]);
        assert_eq!(avg_connectedness(&empty), 0.0);
        assert_eq!(min_cut_set_size(&empty), 0);
        let split = LearnerTopicGraph::from_edges(ids(4), &[(0, 1), (2, 3)]);
        assert_eq!(min_cut_set_size(&split), 0);
    }

    #[test]
    fn graph_from_table_uses_threshold() {
        let mut t = SrTable::new(SrMetric::EntityEmbedding);
        t.insert(TopicId(1), TopicId(2), 0.4);
        t.insert(TopicId(2), TopicId(3), 0.05);
        let topics = [TopicId(3), TopicId(1), TopicId(2), TopicId(1)];
        let g = LearnerTopicGraph::from_topics(topics, &t, 0.0);
        assert_eq!(g.n_nodes(), 3);
        assert_eq!(g.n_edges(), 2);
        let g = LearnerTopicGraph::from_topics(topics, &t, 0.1);
        assert_eq!(g.n_edges(), 1);
    }

    #[test]
    fn random_graphs_match_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let n = rng.random_range(2..=8usize);
            let p: f64 = rng.random_range(0.2..0.9);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.random_bool(p) {
                        edges.push((i, j));
                    }
                }
            }
            let g = LearnerTopicGraph::from_edges(ids(n), &edges);
            assert_eq!(
                min_cut_set_size(&g),
                brute_force_connectivity(n, &edges),
                "n={n} edges={edges:?}"
            );
            let degree_sum: usize = (0..n)
                .map(|v| edges.iter().filter(|&&(a, b)| a == v || b == v).count())
                .sum();
            assert!((avg_connectedness(&g) - degree_sum as f64 / n as f64).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn complete_graph_connectivity(n in 2usize..12) {
            prop_assert_eq!(min_cut_set_size(&complete(n)), n - 1);
        }

        #[test]
        fn adding_edges_never_lowers_connectivity(
            n in 3usize..9,
            seed in any::<u64>(),
        ) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.random_bool(0.5) {
                        edges.push((i, j));
                    }
                }
            }
            let before = min_cut_set_size(&LearnerTopicGraph::from_edges(ids(n), &edges));
            let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
            edges.push((a, b));
            let after = min_cut_set_size(&LearnerTopicGraph::from_edges(ids(n), &edges));
            prop_assert!(after >= before);
        }

        #[test]
        fn loaded_tables_are_symmetric(
            rows in proptest::collection::vec((0u64..20, 0u64..20, 0.0f64..=1.0), 0..40)
        ) {
            let mut src = String::from("topic_a,topic_b,metric,value\n");
            for (a, b, v) in &rows {
                src.push_str(&format!("{a},{b},lm,{v}\n"));
            }
            let (t, _) = load_sr_table_from(src.as_bytes(), SrMetric::LanguageModel).unwrap();
            for a in 0..20 {
                for b in 0..20 {
                    prop_assert_eq!(t.lookup(TopicId(a), TopicId(b)), t.lookup(TopicId(b), TopicId(a)));
                    let v = t.lookup(TopicId(a), TopicId(b));
                    prop_assert!((0.0..=1.0).contains(&v));
                }
            }
        }

        #[test]
        fn all_is_superset_with_same_prefix(
            rhos in proptest::collection::vec(0.0f64..1.0, 1..25),
            k in 1usize..12,
        ) {
            let target = TopicId(1000);
            let mut t = SrTable::new(SrMetric::Jaccard);
            let mut seen = BTreeSet::new();
            for (i, rho) in rhos.iter().enumerate() {
                // quantise so ties occur
                let rho = (rho * 5.0).floor() / 5.0;
                t.insert(target, TopicId(i as u64), rho);
                seen.insert(TopicId(i as u64));
            }
            let all = related_seen_topics(&t, target, &seen, Omega::All);
            let top = related_seen_topics(&t, target, &seen, Omega::Top(k));
            prop_assert!(top.len() <= k);
            prop_assert_eq!(&all[..top.len()], &top[..]);
        }
    }
}
