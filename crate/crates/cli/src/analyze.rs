use std::collections::{BTreeMap, BTreeSet};

use anyhow::{anyhow, Context};
use serde::{Deserialize, Serialize};
use truelearn_core::eval::{
    feature_correlations, recall_by_event_index, rq4_feature_table, FeatureCorrelation,
    RecallPoint, Rq4Row,
};

use crate::args::{AnalyzeArgs, DataArgs};
use crate::config::RunConfig;
use crate::manifest::{InputDigest, RunManifest};
use crate::report::{EvalReport, ModelReport};
use crate::{load_dataset, load_table, with_workers, write_file, Classify, CmdResult, Failure};

pub const SROCC_FILE: &str = "srocc.csv";
pub const RECALL_FILE: &str = "recall_by_event.csv";
pub const ANALYSIS_FILE: &str = "analysis.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelAnalysis {
    pub model_id: String,
    pub label: String,
    pub correlations: Vec<FeatureCorrelation>,
    pub recall_by_event: Vec<RecallPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub manifest_digest: String,
    pub manifest: RunManifest,
    /// Manifest digests of the reports analysed, in input order.
    pub source_reports: Vec<String>,
    pub notes: Vec<String>,
    pub features: Vec<Rq4Row>,
    pub models: Vec<ModelAnalysis>,
}

pub const ANALYSIS_NOTES: [&str; 3] = [
    "recall at event n is cumulative over events 1..n",
    "session graph features use each learner's full session",
    "correlation cells with p >= 0.01 are left empty in the CSV",
];

fn read_report(path: &std::path::Path) -> anyhow::Result<EvalReport> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing report {}", path.display()))
}

fn learner_set(m: &ModelReport) -> BTreeSet<&str> {
    m.learners.iter().map(|s| s.learner_id.as_str()).collect()
}

pub fn run(args: &AnalyzeArgs) -> CmdResult {
    let mut cfg = RunConfig::load(args.config.as_deref()).usage_err()?;
    let reports: Vec<EvalReport> = args
        .reports
        .iter()
        .map(|p| read_report(p))
        .collect::<anyhow::Result<_>>()
        .data_err()?;

    let data_digest = InputDigest::of_file("data", &args.data).data_err()?;
    let table_digest = InputDigest::of_file("sr_table", &args.sr_table).data_err()?;
    for (path, r) in args.reports.iter().zip(&reports) {
        let recorded = r.manifest.input("data").map(|d| d.sha256.as_str());
        if recorded != Some(data_digest.sha256.as_str()) {
            return Err(Failure::data(anyhow!(
                "{} was produced from a different event log than {}",
                path.display(),
                args.data.display()
            )));
        }
    }
    let first = &reports[0].manifest;
    if reports
        .iter()
        .any(|r| r.manifest.format != first.format || r.manifest.top_k != first.top_k)
    {
        return Err(Failure::data(anyhow!("reports were loaded with different ingestion settings")));
    }

    let all: Vec<&ModelReport> = reports.iter().flat_map(|r| &r.models).collect();
    if all.is_empty() {
        return Err(Failure::data(anyhow!("the reports contain no models")));
    }
    let reference = learner_set(all[0]);
    if let Some(m) = all.iter().find(|m| learner_set(m) != reference) {
        return Err(Failure::data(anyhow!(
            "learner sets differ between {} and {}",
            all[0].model_id,
            m.model_id
        )));
    }
    let mut models: Vec<&ModelReport> = Vec::new();
    for m in all {
        if !models.iter().any(|seen| seen.model_id == m.model_id) {
            models.push(m);
        }
    }

    let metric = args.sr_metric.unwrap_or(cfg.propagation.sr_metric);
    cfg.propagation.sr_metric = metric;
    let data_args = DataArgs {
        data: args.data.clone(),
        format: first.format,
        top_k: first.top_k,
    };
    let (dataset, _) = load_dataset(&data_args)?;
    let (table, _) = load_table(&args.sr_table, metric)?;

    let analysis_cfg = cfg.analysis;
    let base = models[0];
    let features: Vec<Rq4Row> = with_workers(args.workers, || {
        rq4_feature_table(&dataset, &base.learners, &table, analysis_cfg.edge_threshold)
    })?;

    let per_model: Vec<ModelAnalysis> = models
        .iter()
        .map(|m| {
            let recall: BTreeMap<&str, f64> =
                m.learners.iter().map(|s| (s.learner_id.as_str(), s.recall)).collect();
            let rows: Vec<Rq4Row> = features
                .iter()
                .map(|row| Rq4Row {
                    recall: recall[row.learner_id.as_str()],
                    ..row.clone()
                })
                .collect();
            let traces: Vec<&[_]> = m.learners.iter().map(|s| s.trace.as_slice()).collect();
            ModelAnalysis {
                model_id: m.model_id.clone(),
                label: m.label(),
                correlations: feature_correlations(&rows),
                recall_by_event: recall_by_event_index(&traces, analysis_cfg.max_event_index),
            }
        })
        .collect();

    let mut manifest = RunManifest::new("analyze", first.format, first.top_k, cfg);
    manifest.inputs.push(data_digest);
    manifest.inputs.push(table_digest);
    for p in &args.reports {
        manifest.inputs.push(InputDigest::of_file("report", p).data_err()?);
    }
    manifest.outputs = vec![SROCC_FILE.into(), RECALL_FILE.into(), ANALYSIS_FILE.into()];
    let analysis = Analysis {
        manifest_digest: manifest.digest(),
        manifest,
        source_reports: reports.iter().map(|r| r.manifest_digest.clone()).collect(),
        notes: ANALYSIS_NOTES.iter().map(|s| s.to_string()).collect(),
        features,
        models: per_model,
    };

    let srocc = srocc_csv(&analysis).usage_err()?;
    let recall = recall_csv(&analysis).usage_err()?;
    let mut json = serde_json::to_string_pretty(&analysis).usage_err()?;
    json.push('\n');
    write_file(&args.out_dir, SROCC_FILE, &srocc)?;
    write_file(&args.out_dir, RECALL_FILE, &recall)?;
    write_file(&args.out_dir, ANALYSIS_FILE, json.as_bytes())?;
    print!("{}", String::from_utf8_lossy(&srocc));
    Ok(())
}

/// Feature rows by model columns; non-significant or undefined cells are empty.
pub fn srocc_csv(a: &Analysis) -> anyhow::Result<Vec<u8>> {
    let mut out = format!("# manifest {}\n", a.manifest_digest).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let mut header = vec!["Feature".to_string()];
        header.extend(a.models.iter().map(|m| m.label.clone()));
        w.write_record(&header)?;
        for (i, feature) in Rq4Row::FEATURES.iter().enumerate() {
            let mut row = vec![feature.to_string()];
            for m in &a.models {
                let c = &m.correlations[i];
                row.push(match c.spearman {
                    Some(s) if c.significant => format!("{:.4}", s.rho),
                    _ => String::new(),
                });
            }
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    Ok(out)
}

/// Mean cumulative recall at each event index, one column per model.
pub fn recall_csv(a: &Analysis) -> anyhow::Result<Vec<u8>> {
    let mut out = format!("# manifest {}\n", a.manifest_digest).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let mut header = vec!["n".to_string(), "learners".to_string()];
        header.extend(a.models.iter().map(|m| m.label.clone()));
        w.write_record(&header)?;
        let len = a.models.iter().map(|m| m.recall_by_event.len()).max().unwrap_or(0);
        for i in 0..len {
            let first = &a.models[0].recall_by_event[i];
            let mut row = vec![first.n.to_string(), first.learners.to_string()];
            for m in &a.models {
                row.push(
                    m.recall_by_event
                        .get(i)
                        .map(|p| format!("{:.6}", p.mean_recall))
                        .unwrap_or_default(),
                );
            }
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    Ok(out)
}
