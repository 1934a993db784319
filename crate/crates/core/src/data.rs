//! Engagement events, learner state and dataset ingestion.
//!
//! On disk an event is one CSV row `learner_id,order_index,label,topics` where
//! `topics` is a semicolon-joined list of `topic_id:depth` pairs and `label` is
//! `0`/`1`. The same fields may arrive as JSON lines. In memory labels are the
//! signed outcome `+1` (engaged) / `-1` (not engaged).

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gaussian::Gaussian1D;

/// Upper bound on topics carried by one event.
pub const MAX_TOPICS_PER_EVENT: usize = 10;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{count} malformed row(s); first at line {first_line}: {message}")]
    Malformed {
        count: usize,
        first_line: u64,
        message: String,
    },
    #[error("duplicate order_index {order_index} for learner {learner_id:?}")]
    DuplicateOrder { learner_id: String, order_index: u64 },
    #[error("need at least 2 learners to split, found {0}")]
    TooFewLearners(usize),
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),
}

/// Wikipedia concept id of a knowledge component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TopicId(pub u64);

impl fmt::Display for TopicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for TopicId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim().parse().map(TopicId)
    }
}

/// Binary engagement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Label {
    Engaged,
    NotEngaged,
}

impl Label {
    pub fn sign(self) -> i8 {
        match self {
            Label::Engaged => 1,
            Label::NotEngaged => -1,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Engaged
    }

    /// Disk encoding `1`/`0`.
    pub fn from_disk(v: u8) -> Option<Self> {
        match v {
            1 => Some(Label::Engaged),
            0 => Some(Label::NotEngaged),
            _ => None,
        }
    }

    pub fn to_disk(self) -> u8 {
        match self {
            Label::Engaged => 1,
            Label::NotEngaged => 0,
        }
    }
}

impl From<Label> for i8 {
    fn from(l: Label) -> i8 {
        l.sign()
    }
}

impl TryFrom<i8> for Label {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, String> {
        match v {
            1 => Ok(Label::Engaged),
            -1 => Ok(Label::NotEngaged),
            other => Err(format!("label must be +1 or -1, got {other}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopicCoverage {
    pub topic: TopicId,
    /// Depth of coverage in `[0, 1]`.
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngagementEvent {
    pub learner_id: String,
    pub order_index: u64,
    pub topics: Vec<TopicCoverage>,
    pub label: Label,
}

impl EngagementEvent {
    pub fn topic_ids(&self) -> impl Iterator<Item = TopicId> + '_ {
        self.topics.iter().map(|c| c.topic)
    }
}

/// Per-learner skill beliefs. Topics absent from `skills` sit at the prior.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LearnerModel {
    pub skills: BTreeMap<TopicId, Gaussian1D>,
    pub events_seen: usize,
    pub topics_seen: BTreeSet<TopicId>,
}

impl LearnerModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn skill(&self, topic: TopicId) -> Option<Gaussian1D> {
        self.skills.get(&topic).copied()
    }

    pub fn has_seen(&self, topic: TopicId) -> bool {
        self.topics_seen.contains(&topic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Learner sessions keyed by learner id, each sorted by `order_index`.
///
/// `assignment` is empty until [`Dataset::split_learners`] is called, after
/// which every learner has exactly one split.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub sessions: BTreeMap<String, Vec<EngagementEvent>>,
    pub assignment: BTreeMap<String, Split>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventFormat {
    #[default]
    Csv,
    Jsonl,
}

impl FromStr for EventFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(EventFormat::Csv),
            "jsonl" | "json-lines" | "ndjson" => Ok(EventFormat::Jsonl),
            other => Err(format!("unknown event format {other:?} (expected csv or jsonl)")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct FormatConfig {
    pub format: EventFormat,
    /// Keep only the first `k` topics of each event, in file order.
    pub top_k: Option<usize>,
}

/// Counters gathered while loading an event file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub events_loaded: usize,
    pub dropped_empty: usize,
    pub clamped_depths: usize,
    pub truncated_events: usize,
}

impl Dataset {
    pub fn n_learners(&self) -> usize {
        self.sessions.len()
    }

    pub fn n_events(&self) -> usize {
        self.sessions.values().map(Vec::len).sum()
    }

    pub fn is_split(&self) -> bool {
        !self.assignment.is_empty()
    }

    pub fn learners_in(&self, split: Split) -> impl Iterator<Item = &str> + '_ {
        self.assignment
            .iter()
            .filter(move |(_, s)| **s == split)
            .map(|(id, _)| id.as_str())
    }

    pub fn session(&self, learner_id: &str) -> Option<&[EngagementEvent]> {
        self.sessions.get(learner_id).map(Vec::as_slice)
    }

    /// Builds a dataset from loose events, sorting each session.
    pub fn from_events<I>(events: I) -> Result<Self, DataError>
    where
        I: IntoIterator<Item = EngagementEvent>,
    {
        let mut sessions: BTreeMap<String, Vec<EngagementEvent>> = BTreeMap::new();
        for ev in events {
            sessions.entry(ev.learner_id.clone()).or_default().push(ev);
        }
        for (learner_id, events) in sessions.iter_mut() {
            events.sort_by_key(|e| e.order_index);
            if let Some(w) = events.windows(2).find(|w| w[0].order_index == w[1].order_index) {
                return Err(DataError::DuplicateOrder {
                    learner_id: learner_id.clone(),
                    order_index: w[0].order_index,
                });
            }
        }
        Ok(Self {
            sessions,
            assignment: BTreeMap::new(),
        })
    }

    /// Learner-level split; deterministic for a fixed seed.
    ///
    /// The train side holds `round(train_fraction * n)` learners, kept within
    /// `1..=n-1` so that neither side is empty.
    pub fn split_learners(&self, train_fraction: f64, seed: u64) -> Result<Dataset, DataError> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(DataError::InvalidFraction(train_fraction));
        }
        let n = self.sessions.len();
        if n < 2 {
            return Err(DataError::TooFewLearners(n));
        }
        let n_train = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);
        let mut ids: Vec<&String> = self.sessions.keys().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ids.shuffle(&mut rng);
        let assignment = ids
            .into_iter()
            .enumerate()
            .map(|(i, id)| {
                let split = if i < n_train { Split::Train } else { Split::Test };
                (id.clone(), split)
            })
            .collect();
        Ok(Dataset {
            sessions: self.sessions.clone(),
            assignment,
        })
    }

    /// Keeps the `n` learners with the most events, ties broken by id.
    pub fn top_learners(&self, n: usize) -> Dataset {
        let mut ranked: Vec<(&String, usize)> =
            self.sessions.iter().map(|(id, ev)| (id, ev.len())).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let keep: HashSet<&String> = ranked.into_iter().take(n).map(|(id, _)| id).collect();
        Dataset {
            sessions: self
                .sessions
                .iter()
                .filter(|(id, _)| keep.contains(id))
                .map(|(id, ev)| (id.clone(), ev.clone()))
                .collect(),
            assignment: self
                .assignment
                .iter()
                .filter(|(id, _)| keep.contains(id))
                .map(|(id, s)| (id.clone(), *s))
                .collect(),
        }
    }

    /// Writes every event as CSV in the ingestion schema.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["learner_id", "order_index", "label", "topics"])?;
        for events in self.sessions.values() {
            for ev in events {
                let topics = ev
                    .topics
                    .iter()
                    .map(|c| format!("{}:{}", c.topic, c.depth))
                    .collect::<Vec<_>>()
                    .join(";");
                w.write_record([
                    ev.learner_id.as_str(),
                    &ev.order_index.to_string(),
                    &ev.label.to_disk().to_string(),
                    &topics,
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Collects row problems so the error can report a count and the first line.
#[derive(Default)]
struct RowErrors {
    count: usize,
    first: Option<(u64, String)>,
}

impl RowErrors {
    fn push(&mut self, line: u64, message: String) {
        self.count += 1;
        if self.first.is_none() {
            self.first = Some((line, message));
        }
    }

    fn into_result(self) -> Result<(), DataError> {
        match self.first {
            None => Ok(()),
            Some((first_line, message)) => Err(DataError::Malformed {
                count: self.count,
                first_line,
                message,
            }),
        }
    }
}

fn parse_topic_list(raw: &str) -> Result<Vec<(TopicId, f64)>, String> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    raw.split(';')
        .map(|pair| {
            let (id, depth) = pair
                .split_once(':')
                .ok_or_else(|| format!("topic entry {pair:?} is not topic_id:depth"))?;
            let id: TopicId = id
                .parse()
                .map_err(|_| format!("bad topic id {id:?}"))?;
            let depth: f64 = depth
                .trim()
                .parse()
                .map_err(|_| format!("bad depth {depth:?}"))?;
            Ok((id, depth))
        })
        .collect()
}

struct RawRow {
    learner_id: String,
    order_index: u64,
    label: u8,
    topics: Vec<(TopicId, f64)>,
}

/// Validates one raw row into an event. `Ok(None)` means the event had no
/// topics and is dropped.
fn build_event(
    row: RawRow,
    cfg: &FormatConfig,
    report: &mut IngestReport,
) -> Result<Option<EngagementEvent>, String> {
    let label = Label::from_disk(row.label)
        .ok_or_else(|| format!("label must be 0 or 1, got {}", row.label))?;
    if row.learner_id.is_empty() {
        return Err("empty learner_id".to_string());
    }
    let mut topics = row.topics;
    if let Some(k) = cfg.top_k {
        if topics.len() > k {
            topics.truncate(k);
            report.truncated_events += 1;
        }
    }
    if topics.len() > MAX_TOPICS_PER_EVENT {
        return Err(format!(
            "{} topics exceeds the maximum of {MAX_TOPICS_PER_EVENT}",
            topics.len()
        ));
    }
    let mut seen = HashSet::new();
    let mut coverage = Vec::with_capacity(topics.len());
    for (topic, depth) in topics {
        if !seen.insert(topic) {
            return Err(format!("topic {topic} repeated within one event"));
        }
        if depth.is_nan() {
            return Err(format!("depth of topic {topic} is NaN"));
        }
        let clamped = depth.clamp(0.0, 1.0);
        if clamped != depth {
            report.clamped_depths += 1;
        }
        coverage.push(TopicCoverage {
            topic,
            depth: clamped,
        });
    }
    if coverage.is_empty() {
        report.dropped_empty += 1;
        return Ok(None);
    }
    Ok(Some(EngagementEvent {
        learner_id: row.learner_id,
        order_index: row.order_index,
        topics: coverage,
        label,
    }))
}

fn read_csv_rows<R: Read>(
    reader: R,
    cfg: &FormatConfig,
    report: &mut IngestReport,
    errors: &mut RowErrors,
) -> Result<Vec<EngagementEvent>, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Ok(Vec::new());
    }
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(c_learner), Some(c_order), Some(c_label), Some(c_topics)) =
        (col("learner_id"), col("order_index"), col("label"), col("topics"))
    else {
        errors.push(
            1,
            format!("header must contain learner_id,order_index,label,topics; got {headers:?}"),
        );
        return Ok(Vec::new());
    };

    let mut events = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        report.rows_read += 1;
        let parsed = (|| -> Result<RawRow, String> {
            let field = |i: usize| record.get(i).ok_or_else(|| format!("missing column {i}"));
            Ok(RawRow {
                learner_id: field(c_learner)?.to_string(),
                order_index: field(c_order)?
                    .parse()
                    .map_err(|_| format!("bad order_index {:?}", &record[c_order]))?,
                label: field(c_label)?
                    .parse()
                    .map_err(|_| format!("bad label {:?}", &record[c_label]))?,
                topics: parse_topic_list(field(c_topics)?)?,
            })
        })();
        match parsed.and_then(|row| build_event(row, cfg, report)) {
            Ok(Some(ev)) => events.push(ev),
            Ok(None) => {}
            Err(msg) => errors.push(line, msg),
        }
    }
    Ok(events)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonId {
    Text(String),
    Number(u64),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonTopics {
    Joined(String),
    Pairs(Vec<(u64, f64)>),
}

#[derive(Deserialize)]
struct JsonRow {
    learner_id: JsonId,
    order_index: u64,
    label: u8,
    topics: JsonTopics,
}

fn read_jsonl_rows<R: Read>(
    reader: R,
    cfg: &FormatConfig,
    report: &mut IngestReport,
    errors: &mut RowErrors,
) -> Result<Vec<EngagementEvent>, DataError> {
    let mut events = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        report.rows_read += 1;
        let line_no = i as u64 + 1;
        let parsed = serde_json::from_str::<JsonRow>(&line)
            .map_err(|e| e.to_string())
            .and_then(|row| {
                let topics = match row.topics {
                    JsonTopics::Joined(s) => parse_topic_list(&s)?,
                    JsonTopics::Pairs(p) => p.into_iter().map(|(id, d)| (TopicId(id), d)).collect(),
                };
                Ok(RawRow {
                    learner_id: match row.learner_id {
                        JsonId::Text(s) => s,
                        JsonId::Number(n) => n.to_string(),
                    },
                    order_index: row.order_index,
                    label: row.label,
                    topics,
                })
            });
        match parsed.and_then(|row| build_event(row, cfg, report)) {
            Ok(Some(ev)) => events.push(ev),
            Ok(None) => {}
            Err(msg) => errors.push(line_no, msg),
        }
    }
    Ok(events)
}

/// Loads an event file into a dataset.
///
/// Every malformed row is counted and the load fails with the first one;
/// depths outside `[0, 1]` are clamped and events without topics are
/// dropped, both recorded in the returned [`IngestReport`].
pub fn load_events_from<R: Read>(
    reader: R,
    cfg: &FormatConfig,
) -> Result<(Dataset, IngestReport), DataError> {
    let mut report = IngestReport::default();
    let mut errors = RowErrors::default();
    let events = match cfg.format {
        EventFormat::Csv => read_csv_rows(reader, cfg, &mut report, &mut errors)?,
        EventFormat::Jsonl => read_jsonl_rows(reader, cfg, &mut report, &mut errors)?,
    };
    errors.into_result()?;
    report.events_loaded = events.len();
    let dataset = Dataset::from_events(events)?;
    if report.rows_read == 0 {
        log::warn!("event file contains no rows");
    }
    if report.clamped_depths > 0 {
        log::warn!("clamped {} depth value(s) into [0, 1]", report.clamped_depths);
    }
    if report.dropped_empty > 0 {
        log::warn!("dropped {} event(s) without topics", report.dropped_empty);
    }
    Ok((dataset, report))
}

pub fn load_events(
    path: impl AsRef<Path>,
    cfg: &FormatConfig,
) -> Result<(Dataset, IngestReport), DataError> {
    load_events_from(File::open(path)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn load_str(s: &str) -> Result<(Dataset, IngestReport), DataError> {
        load_events_from(s.as_bytes(), &FormatConfig::default())
    }

    #[test]
    fn three_rows_one_learner() {
        let (d, r) = load_str(
            "learner_id,order_index,label,topics\n\
             u1,0,1,10:0.5\n\
             u1,1,0,10:0.2;11:0.3\n\
             u1,2,1,12:1.0\n",
        )
        .unwrap();
        assert_eq!(d.n_learners(), 1);
        let labels: Vec<i8> = d.sessions["u1"].iter().map(|e| e.label.sign()).collect();
        assert_eq!(labels, vec![1, -1, 1]);
        assert_eq!(r.events_loaded, 3);
    }

    #[test]
    fn empty_file_is_empty_dataset() {
        let (d, r) = load_str("").unwrap();
        assert_eq!(d.n_learners(), 0);
        assert_eq!(r.rows_read, 0);
        let (d, _) = load_str("learner_id,order_index,label,topics\n").unwrap();
        assert_eq!(d.n_events(), 0);
    }

    #[test]
    fn five_topics_keep_file_order() {
        let (d, _) = load_str(
            "learner_id,order_index,label,topics\nu,0,1,5:0.3;4:0.4;3:0.5;2:0.6;1:0.7\n",
        )
        .unwrap();
        let ev = &d.sessions["u"][0];
        let ids: Vec<u64> = ev.topics.iter().map(|c| c.topic.0).collect();
        assert_eq!(ids, vec![5, 4, 3, 2, 1]);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let (back, _) = load_events_from(buf.as_slice(), &FormatConfig::default()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn malformed_rows_are_counted() {
        let err = load_str(
            "learner_id,order_index,label,topics\n\
             u,0,1,1:0.5\n\
             u,1,2,1:0.5\n\
             u,x,1,1:0.5\n",
        )
        .unwrap_err();
        match err {
            DataError::Malformed {
                count, first_line, ..
            } => {
                assert_eq!(count, 2);
                assert_eq!(first_line, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_order_is_hard_error() {
        let err = load_str("learner_id,order_index,label,topics\nu,3,1,1:0.5\nu,3,0,2:0.5\n")
            .unwrap_err();
        assert!(matches!(err, DataError::DuplicateOrder { order_index: 3, .. }));
    }

    #[test]
    fn repeated_topic_and_oversized_events_rejected() {
        assert!(load_str("learner_id,order_index,label,topics\nu,0,1,1:0.5;1:0.2\n").is_err());
        let many = (0..11).map(|i| format!("{i}:0.1")).collect::<Vec<_>>().join(";");
        let csv = format!("learner_id,order_index,label,topics\nu,0,1,{many}\n");
        assert!(load_str(&csv).is_err());
        let cfg = FormatConfig {
            top_k: Some(3),
            ..Default::default()
        };
        let (d, r) = load_events_from(csv.as_bytes(), &cfg).unwrap();
        assert_eq!(d.sessions["u"][0].topics.len(), 3);
        assert_eq!(r.truncated_events, 1);
    }

    #[test]
    fn clamps_depth_and_drops_empty() {
        let (d, r) = load_str(
            "learner_id,order_index,label,topics\nu,0,1,1:1.5;2:-0.1\nu,1,0,\n",
        )
        .unwrap();
        assert_eq!(r.clamped_depths, 2);
        assert_eq!(r.dropped_empty, 1);
        let depths: Vec<f64> = d.sessions["u"][0].topics.iter().map(|c| c.depth).collect();
        assert_eq!(depths, vec![1.0, 0.0]);
    }

    #[test]
    fn sorts_by_order_index() {
        let (d, _) = load_str(
            "learner_id,order_index,label,topics\nu,5,1,1:0.5\nu,2,0,1:0.5\nv,1,1,2:0.1\n",
        )
        .unwrap();
        let order: Vec<u64> = d.sessions["u"].iter().map(|e| e.order_index).collect();
        assert_eq!(order, vec![2, 5]);
    }

    #[test]
    fn jsonl_accepts_both_topic_shapes() {
        let src = r#"{"learner_id":"a","order_index":0,"label":1,"topics":"7:0.25;8:0.5"}
{"learner_id":12,"order_index":1,"label":0,"topics":[[7,0.1]]}
"#;
        let cfg = FormatConfig {
            format: EventFormat::Jsonl,
            top_k: None,
        };
        let (d, r) = load_events_from(src.as_bytes(), &cfg).unwrap();
        assert_eq!(r.events_loaded, 2);
        assert_eq!(d.sessions["a"][0].topics.len(), 2);
        assert_eq!(d.sessions["12"][0].label, Label::NotEngaged);
    }

    fn learners(n: usize) -> Dataset {
        let events = (0..n).map(|i| EngagementEvent {
            learner_id: format!("l{i:05}"),
            order_index: 0,
            topics: vec![TopicCoverage {
                topic: TopicId(1),
                depth: 0.5,
            }],
            label: Label::Engaged,
        });
        Dataset::from_events(events).unwrap()
    }

    #[test]
    fn split_is_deterministic() {
        let d = learners(10);
        let a = d.split_learners(0.7, 42).unwrap();
        let b = d.split_learners(0.7, 42).unwrap();
        assert_eq!(a.assignment, b.assignment);
        assert_eq!(a.learners_in(Split::Train).count(), 7);
        assert_eq!(a.learners_in(Split::Test).count(), 3);
    }

    #[test]
    fn split_two_learners_half() {
        let d = learners(2).split_learners(0.5, 1).unwrap();
        assert_eq!(d.learners_in(Split::Train).count(), 1);
        assert_eq!(d.learners_in(Split::Test).count(), 1);
    }

    #[test]
    fn split_large_partition() {
        let d = learners(20_000).split_learners(0.7, 3).unwrap();
        let train: BTreeSet<&str> = d.learners_in(Split::Train).collect();
        let test: BTreeSet<&str> = d.learners_in(Split::Test).collect();
        assert_eq!(train.len(), 14_000);
        assert_eq!(test.len(), 6_000);
        assert!(train.is_disjoint(&test));
        let all: BTreeSet<&str> = d.sessions.keys().map(String::as_str).collect();
        let union: BTreeSet<&str> = train.union(&test).copied().collect();
        assert_eq!(union, all);
    }

    #[test]
    fn split_errors() {
        assert!(matches!(
            learners(1).split_learners(0.7, 0),
            Err(DataError::TooFewLearners(1))
        ));
        assert!(learners(4).split_learners(1.0, 0).is_err());
        assert!(learners(4).split_learners(0.0, 0).is_err());
    }

    #[test]
    fn top_learners_by_activity() {
        let mut events = Vec::new();
        for (id, n) in [("a", 2), ("b", 5), ("c", 5), ("d", 1)] {
            for k in 0..n {
                events.push(EngagementEvent {
                    learner_id: id.into(),
                    order_index: k,
                    topics: vec![TopicCoverage {
                        topic: TopicId(1),
                        depth: 1.0,
                    }],
                    label: Label::Engaged,
                });
            }
        }
        let d = Dataset::from_events(events).unwrap().top_learners(2);
        let ids: Vec<&String> = d.sessions.keys().collect();
        assert_eq!(ids, vec!["b", "c"]);
    }

    fn arb_event(learner: usize, order: u64) -> impl Strategy<Value = EngagementEvent> {
        (
            proptest::collection::btree_map(0u64..50, 0.0f64..=1.0, 1..=MAX_TOPICS_PER_EVENT),
            any::<bool>(),
        )
            .prop_map(move |(topics, engaged)| EngagementEvent {
                learner_id: format!("learner-{learner}"),
                order_index: order,
                topics: topics
                    .into_iter()
                    .map(|(t, depth)| TopicCoverage {
                        topic: TopicId(t),
                        depth,
                    })
                    .collect(),
                label: if engaged {
                    Label::Engaged
                } else {
                    Label::NotEngaged
                },
            })
    }

    proptest! {
        #[test]
        fn csv_round_trip(events in proptest::collection::vec(
            (0usize..4, 0u64..1000).prop_flat_map(|(l, o)| arb_event(l, o)), 0..30)) {
            let mut seen = HashSet::new();
            let events: Vec<_> = events
                .into_iter()
                .filter(|e| seen.insert((e.learner_id.clone(), e.order_index)))
                .collect();
            let d = Dataset::from_events(events).unwrap();
            let mut buf = Vec::new();
            d.write_csv(&mut buf).unwrap();
            let (back, _) = load_events_from(buf.as_slice(), &FormatConfig::default()).unwrap();
            prop_assert_eq!(back, d);
        }
    }
}
