//! Writes a synthetic cohort as `events.csv` and `sr.csv` into a directory.
//!
//! cargo run --example synthetic_cohort -- <out-dir> [n_learners] [seed]

use std::fs::File;
use std::path::PathBuf;

use anyhow::{Context, Result};
use truelearn_core::synthetic::{generate, synthetic_model_config, CohortConfig};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().context("usage: synthetic_cohort <out-dir> [n_learners] [seed]")?);
    let mut cfg = CohortConfig::default();
    if let Some(n) = args.next() {
        cfg.n_learners = n.parse().context("n_learners")?;
    }
    if let Some(s) = args.next() {
        cfg.seed = s.parse().context("seed")?;
    }
    std::fs::create_dir_all(&dir)?;
    let cohort = generate(&cfg);
    cohort.dataset.write_csv(File::create(dir.join("events.csv"))?)?;
    cohort.table.write_csv(File::create(dir.join("sr.csv"))?)?;
    let model = synthetic_model_config();
    std::fs::write(
        dir.join("config.toml"),
        format!(
            "[model]\nbeta = {:?}\nperf_noise = {:?}\ndraw_margin = {:?}\n",
            model.beta, model.perf_noise, model.draw_margin
        ),
    )?;
    println!(
        "{} learners, {} events, {} related pairs -> {}",
        cohort.dataset.n_learners(),
        cohort.dataset.n_events(),
        cohort.table.len(),
        dir.display()
    );
    Ok(())
}
