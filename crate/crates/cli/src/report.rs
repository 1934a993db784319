use std::io::Write;

use anyhow::Result;
use serde::{Deserialize, Serialize};
use truelearn_core::data::IngestReport;
use truelearn_core::eval::{LearnerScore, PairedTTest, WeightedMetrics};
use truelearn_core::semantic::PropagationConfig;
use truelearn_core::sr_graph::{Omega, SrLoadReport, SrMetric};

use crate::args::ModelKind;
use crate::manifest::RunManifest;

pub const SUMMARY_HEADER: [&str; 8] = [
    "Algorithm",
    "SR Metric",
    "Omega",
    "Prec.",
    "Rec.",
    "F1",
    "Rec. p",
    "F1 p",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub learners: usize,
    pub events: usize,
    pub train_learners: usize,
    pub test_learners: usize,
    pub ingest: IngestReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sr_table: Option<SrLoadReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model_id: String,
    pub model: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propagation: Option<PropagationConfig>,
    pub weighted: WeightedMetrics,
    pub excluded_empty: usize,
    pub learners: Vec<LearnerScore>,
}

impl ModelReport {
    pub fn sr_metric(&self) -> Option<SrMetric> {
        self.propagation.map(|p| p.sr_metric)
    }

    pub fn omega(&self) -> Option<Omega> {
        self.propagation.map(|p| p.omega)
    }

    /// Human-readable column label, unique within a report.
    pub fn label(&self) -> String {
        match self.propagation {
            None => self.model.label().to_string(),
            Some(p) => format!("{} ({}, omega={})", self.model.label(), p.sr_metric.label(), p.omega),
        }
    }
}

pub fn model_id(kind: ModelKind, propagation: Option<&PropagationConfig>) -> String {
    match propagation {
        None => "truelearn-novel".to_string(),
        Some(p) => format!(
            "{}:{}:omega={}",
            match kind {
                ModelKind::TruelearnNovel => "truelearn-novel",
                ModelKind::SemanticTruelearn => "semantic-truelearn",
            },
            p.sr_metric.key(),
            p.omega
        ),
    }
}

/// A paired one-tailed test of `candidate > baseline` on one metric.
///
/// `t` is `None` when the differences have zero variance; `p` then follows
/// the sign of `mean_diff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSummary {
    pub n: usize,
    pub mean_diff: f64,
    pub t: Option<f64>,
    pub p: f64,
}

impl From<PairedTTest> for TestSummary {
    fn from(r: PairedTTest) -> Self {
        Self {
            n: r.n,
            mean_diff: r.mean_diff,
            t: r.t.is_finite().then_some(r.t),
            p: r.p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub baseline: String,
    pub candidate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<TestSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recall: Option<TestSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1: Option<TestSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub manifest_digest: String,
    pub manifest: RunManifest,
    pub notes: Vec<String>,
    pub dataset: DatasetSummary,
    pub models: Vec<ModelReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub comparisons: Vec<Comparison>,
}

pub const REPORT_NOTES: [&str; 3] = [
    "metrics are computed on test-split learners only",
    "per-learner metrics are combined as an event-weighted mean",
    "paired t-tests are one-tailed with alternative candidate > baseline",
];

fn fmt_metric(x: f64) -> String {
    format!("{x:.4}")
}

fn fmt_p(p: f64) -> String {
    format!("{p:.3e}")
}

impl EvalReport {
    pub fn comparison_for(&self, model_id: &str) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.candidate == model_id)
    }

    /// One row per model, led by a `# manifest <digest>` comment line.
    pub fn write_summary_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# manifest {}", self.manifest_digest)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SUMMARY_HEADER)?;
        for m in &self.models {
            let cmp = self.comparison_for(&m.model_id);
            let p_of = |t: Option<TestSummary>| t.map(|t| fmt_p(t.p)).unwrap_or_default();
            w.write_record([
                m.model.label().to_string(),
                m.sr_metric().map(|s| s.label().to_string()).unwrap_or_default(),
                m.omega().map(|o| o.to_string()).unwrap_or_default(),
                fmt_metric(m.weighted.precision),
                fmt_metric(m.weighted.recall),
                fmt_metric(m.weighted.f1),
                p_of(cmp.and_then(|c| c.recall)),
                p_of(cmp.and_then(|c| c.f1)),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}
