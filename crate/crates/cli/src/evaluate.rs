use std::collections::BTreeMap;

use anyhow::anyhow;
use truelearn_core::data::{Dataset, IngestReport, Split};
use truelearn_core::eval::{aggregate, paired_t_test_one_tailed, replay_learners, LearnerScore};
use truelearn_core::semantic::{PropagationConfig, SemanticPrior};
use truelearn_core::sr_graph::{SrLoadReport, SrTable};
use truelearn_core::truelearn::{DefaultPrior, ModelConfig};

use crate::args::{EvaluateArgs, ModelKind, RunArgs};
use crate::config::RunConfig;
use crate::manifest::{InputDigest, RunManifest};
use crate::report::{
    model_id, Comparison, DatasetSummary, EvalReport, ModelReport, TestSummary, REPORT_NOTES,
};
use crate::{load_dataset, load_table, with_workers, write_file, Classify, CmdResult, Failure};

pub const REPORT_FILE: &str = "report.json";
pub const SUMMARY_FILE: &str = "summary.csv";

/// Inputs loaded, subset and split, ready for replay.
pub(crate) struct Prepared {
    pub dataset: Dataset,
    pub ingest: IngestReport,
    pub table: Option<(SrTable, SrLoadReport)>,
    pub cfg: RunConfig,
    pub manifest: RunManifest,
}

pub(crate) fn prepare(run: &RunArgs, command: &str, needs_table: bool) -> CmdResult<Prepared> {
    let mut cfg = RunConfig::load(run.config.as_deref()).usage_err()?;
    if let Some(metric) = run.sr_metric {
        cfg.propagation.sr_metric = metric;
    }
    if !(run.train_fraction > 0.0 && run.train_fraction < 1.0) {
        return Err(Failure::usage(anyhow!(
            "--train-fraction must lie strictly between 0 and 1, got {}",
            run.train_fraction
        )));
    }
    if run.top_learners == Some(0) {
        return Err(Failure::usage(anyhow!("--top-learners must be positive")));
    }
    if needs_table && run.sr_table.is_none() {
        return Err(Failure::usage(anyhow!(
            "semantic-truelearn needs --sr-table (metric {})",
            cfg.propagation.sr_metric.key()
        )));
    }

    let mut manifest = RunManifest::new(command, run.data.format, run.data.top_k, cfg);
    manifest.inputs.push(InputDigest::of_file("data", &run.data.data).data_err()?);
    let (mut dataset, ingest) = load_dataset(&run.data)?;
    let table = match &run.sr_table {
        Some(path) => {
            manifest.inputs.push(InputDigest::of_file("sr_table", path).data_err()?);
            Some(load_table(path, cfg.propagation.sr_metric)?)
        }
        None => None,
    };
    if let Some(n) = run.top_learners {
        dataset = dataset.top_learners(n);
    }
    let dataset = dataset.split_learners(run.train_fraction, run.seed).data_err()?;
    manifest.seed = Some(run.seed);
    manifest.train_fraction = Some(run.train_fraction);
    manifest.top_learners = run.top_learners;
    Ok(Prepared {
        dataset,
        ingest,
        table,
        cfg,
        manifest,
    })
}

pub(crate) fn learners(dataset: &Dataset, split: Split) -> Vec<String> {
    dataset.learners_in(split).map(String::from).collect()
}

/// Replays `ids` with the baseline (`propagation = None`) or the semantic model.
pub(crate) fn replay_model(
    dataset: &Dataset,
    ids: &[String],
    model: &ModelConfig,
    kind: ModelKind,
    semantic: Option<(&SrTable, PropagationConfig)>,
) -> CmdResult<ModelReport> {
    let outcome = match semantic {
        None => replay_learners(dataset, ids, model, &DefaultPrior),
        Some((table, p)) => replay_learners(dataset, ids, model, &SemanticPrior::new(table, p)),
    };
    let weighted = aggregate(&outcome.scores)
        .ok_or_else(|| Failure::data(anyhow!("no learner with events to score")))?;
    let propagation = semantic.map(|(_, p)| p);
    Ok(ModelReport {
        model_id: model_id(kind, propagation.as_ref()),
        model: kind,
        propagation,
        weighted,
        excluded_empty: outcome.excluded_empty,
        learners: outcome.scores,
    })
}

fn paired(
    base: &[LearnerScore],
    cand: &[LearnerScore],
    metric: fn(&LearnerScore) -> f64,
) -> Option<TestSummary> {
    let by_id: BTreeMap<&str, &LearnerScore> =
        base.iter().map(|s| (s.learner_id.as_str(), s)).collect();
    let (a, b): (Vec<f64>, Vec<f64>) = cand
        .iter()
        .filter_map(|c| by_id.get(c.learner_id.as_str()).map(|s| (metric(s), metric(c))))
        .unzip();
    match paired_t_test_one_tailed(&a, &b) {
        Ok(r) => Some(r.into()),
        Err(e) => {
            log::warn!("paired t-test skipped: {e}");
            None
        }
    }
}

pub(crate) fn compare(base: &ModelReport, cand: &ModelReport) -> Comparison {
    Comparison {
        baseline: base.model_id.clone(),
        candidate: cand.model_id.clone(),
        precision: paired(&base.learners, &cand.learners, |s| s.precision),
        recall: paired(&base.learners, &cand.learners, |s| s.recall),
        f1: paired(&base.learners, &cand.learners, |s| s.f1),
    }
}

pub fn run(args: &EvaluateArgs) -> CmdResult {
    let semantic = args.compare || args.run.model == ModelKind::SemanticTruelearn;
    let prep = prepare(&args.run, "evaluate", semantic)?;
    let Prepared {
        dataset,
        ingest,
        table,
        cfg,
        mut manifest,
    } = prep;

    let mut omegas = Vec::new();
    if semantic {
        let requested = if args.omega.is_empty() {
            vec![cfg.propagation.omega]
        } else {
            args.omega.clone()
        };
        for o in requested {
            if !omegas.contains(&o) {
                omegas.push(o);
            }
        }
    } else if !args.omega.is_empty() {
        log::warn!("--omega has no effect on truelearn-novel without --compare");
    }

    let test_ids = learners(&dataset, Split::Test);
    let train_count = dataset.learners_in(Split::Train).count();
    let model_cfg = cfg.model;
    let table_ref = table.as_ref().map(|(t, _)| t);
    let models: Vec<ModelReport> = with_workers(args.run.workers, || -> CmdResult<Vec<ModelReport>> {
        let mut models = Vec::new();
        if args.compare || !semantic {
            models.push(replay_model(&dataset, &test_ids, &model_cfg, ModelKind::TruelearnNovel, None)?);
        }
        if semantic {
            let t = table_ref.expect("table presence checked in prepare");
            for &omega in &omegas {
                let p = PropagationConfig {
                    omega,
                    ..cfg.propagation
                };
                models.push(replay_model(
                    &dataset,
                    &test_ids,
                    &model_cfg,
                    ModelKind::SemanticTruelearn,
                    Some((t, p)),
                )?);
            }
        }
        Ok(models)
    })??;

    let comparisons = if args.compare {
        let base = &models[0];
        models[1..].iter().map(|m| compare(base, m)).collect()
    } else {
        Vec::new()
    };

    manifest.model = Some(args.run.model);
    manifest.compare = args.compare;
    manifest.omegas = omegas;
    manifest.outputs = vec![REPORT_FILE.to_string(), SUMMARY_FILE.to_string()];
    let report = EvalReport {
        manifest_digest: manifest.digest(),
        manifest,
        notes: REPORT_NOTES.iter().map(|s| s.to_string()).collect(),
        dataset: DatasetSummary {
            learners: dataset.n_learners(),
            events: dataset.n_events(),
            train_learners: train_count,
            test_learners: test_ids.len(),
            ingest,
            sr_table: table.map(|(_, r)| r),
        },
        models,
        comparisons,
    };

    let json = report.to_json().usage_err()?;
    let mut summary = Vec::new();
    report.write_summary_csv(&mut summary).usage_err()?;
    write_file(&args.run.out_dir, REPORT_FILE, json.as_bytes())?;
    write_file(&args.run.out_dir, SUMMARY_FILE, &summary)?;
    print!("{}", String::from_utf8_lossy(&summary));
    Ok(())
}
