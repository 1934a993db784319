use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use truelearn_core::data::Split;
use truelearn_core::semantic::PropagationConfig;
use truelearn_core::truelearn::ModelConfig;

use crate::args::{ModelKind, TuneArgs};
use crate::evaluate::{learners, prepare, replay_model, Prepared};
use crate::manifest::InputDigest;
use crate::{with_workers, write_file, Classify, CmdResult, Failure};

pub const RESULTS_FILE: &str = "tune_results.csv";
pub const CONFIG_FILE: &str = "tuned_config.toml";

/// One grid point: the column overrides applied to the base model config.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub values: Vec<(String, f64)>,
    pub config: ModelConfig,
}

/// Reads a CSV grid. Column names are `[model]` keys; unset keys keep the
/// values of `base`.
pub fn load_grid(path: &Path, base: &ModelConfig) -> Result<Vec<GridPoint>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("opening grid {}", path.display()))?;
    let headers: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
    if headers.is_empty() {
        bail!("grid {} has no columns", path.display());
    }
    let base_value = serde_json::to_value(base)?;
    let mut points = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let mut value = base_value.clone();
        let mut values = Vec::new();
        for (name, cell) in headers.iter().zip(rec.iter()) {
            let x: f64 = cell
                .parse()
                .map_err(|_| anyhow!("grid row {}: {name} = {cell:?} is not a number", i + 1))?;
            value[name.as_str()] = serde_json::json!(x);
            values.push((name.clone(), x));
        }
        let config: ModelConfig = serde_json::from_value(value)
            .map_err(|e| anyhow!("grid row {}: {e}", i + 1))?;
        config.validate().map_err(|e| anyhow!("grid row {}: {e}", i + 1))?;
        points.push(GridPoint { values, config });
    }
    if points.is_empty() {
        bail!("grid {} has no points", path.display());
    }
    Ok(points)
}

/// Index of the best score; the earliest point wins ties.
pub fn select_best(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        match best {
            None => best = Some(i),
            Some(b) if s > scores[b] => best = Some(i),
            Some(b) if s == scores[b] => {
                log::info!("grid point {} ties point {} on F1; keeping the earlier one", i + 1, b + 1)
            }
            _ => {}
        }
    }
    best
}

pub fn run(args: &TuneArgs) -> CmdResult {
    let semantic = args.run.model == ModelKind::SemanticTruelearn;
    let Prepared {
        dataset,
        table,
        mut cfg,
        mut manifest,
        ..
    } = prepare(&args.run, "tune", semantic)?;
    if let Some(o) = args.omega {
        cfg.propagation.omega = o;
    }
    manifest.inputs.push(InputDigest::of_file("grid", &args.grid).data_err()?);
    let grid = load_grid(&args.grid, &cfg.model).data_err()?;
    let train_ids = learners(&dataset, Split::Train);
    let propagation: Option<PropagationConfig> = semantic.then_some(cfg.propagation);
    let table_ref = table.as_ref().map(|(t, _)| t);

    let reports = with_workers(args.run.workers, || {
        grid.iter()
            .map(|p| {
                replay_model(
                    &dataset,
                    &train_ids,
                    &p.config,
                    args.run.model,
                    table_ref.zip(propagation),
                )
            })
            .collect::<CmdResult<Vec<_>>>()
    })??;
    let f1: Vec<f64> = reports.iter().map(|r| r.weighted.f1).collect();
    let best = select_best(&f1).ok_or_else(|| Failure::data(anyhow!("empty grid")))?;
    log::info!("selected grid point {} with weighted F1 {:.4}", best + 1, f1[best]);

    cfg.model = grid[best].config;
    manifest.model = Some(args.run.model);
    manifest.config = cfg;
    manifest.outputs = vec![RESULTS_FILE.to_string(), CONFIG_FILE.to_string()];
    let digest = manifest.digest();

    let mut results = format!("# manifest {digest}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut results);
        let mut header = vec!["point".to_string()];
        header.extend(grid[0].values.iter().map(|(n, _)| n.clone()));
        header.extend(["Prec.", "Rec.", "F1", "selected"].map(String::from));
        w.write_record(&header).usage_err()?;
        for (i, (p, r)) in grid.iter().zip(&reports).enumerate() {
            let mut row = vec![(i + 1).to_string()];
            row.extend(p.values.iter().map(|(_, v)| v.to_string()));
            row.push(format!("{:.4}", r.weighted.precision));
            row.push(format!("{:.4}", r.weighted.recall));
            row.push(format!("{:.4}", r.weighted.f1));
            row.push((i == best).to_string());
            w.write_record(&row).usage_err()?;
        }
        w.flush().usage_err()?;
    }
    let toml = format!("# manifest {digest}\n{}", cfg.to_toml().usage_err()?);
    write_file(&args.run.out_dir, RESULTS_FILE, &results)?;
    write_file(&args.run.out_dir, CONFIG_FILE, toml.as_bytes())?;
    print!("{toml}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn first_point_wins_ties() {
        assert_eq!(select_best(&[0.5, 0.7, 0.7, 0.1]), Some(1));
        assert_eq!(select_best(&[0.3]), Some(0));
        assert_eq!(select_best(&[]), None);
    }

    #[test]
    fn grid_overrides_named_fields_only() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "draw_margin,beta\n0.2,1.5\n0.4,0.5").unwrap();
        let base = ModelConfig::default();
        let grid = load_grid(f.path(), &base).unwrap();
        assert_eq!(grid.len(), 2);
        assert_eq!(grid[0].config.draw_margin, 0.2);
        assert_eq!(grid[0].config.beta, 1.5);
        assert_eq!(grid[1].config.perf_noise, base.perf_noise);
    }

    #[test]
    fn grid_errors() {
        let base = ModelConfig::default();
        let mut empty = tempfile::NamedTempFile::new().unwrap();
        writeln!(empty, "draw_margin").unwrap();
        assert!(load_grid(empty.path(), &base).is_err());
        let mut unknown = tempfile::NamedTempFile::new().unwrap();
        writeln!(unknown, "learning_rate\n0.1").unwrap();
        assert!(load_grid(unknown.path(), &base).is_err());
        let mut invalid = tempfile::NamedTempFile::new().unwrap();
        writeln!(invalid, "beta\n-1").unwrap();
        assert!(load_grid(invalid.path(), &base).is_err());
    }
}
