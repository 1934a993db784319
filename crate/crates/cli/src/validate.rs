use std::collections::BTreeSet;

use truelearn_core::data::TopicId;
use truelearn_core::sr_graph::SrMetric;

use crate::args::ValidateArgs;
use crate::{load_dataset, load_table, CmdResult};

/// Loads the inputs and prints what was found. Any malformed row fails the
/// command with the data exit code.
pub fn run(args: &ValidateArgs) -> CmdResult {
    let (dataset, ingest) = load_dataset(&args.data)?;
    let topics: BTreeSet<TopicId> = dataset
        .sessions
        .values()
        .flatten()
        .flat_map(|e| e.topic_ids())
        .collect();
    let positives = dataset
        .sessions
        .values()
        .flatten()
        .filter(|e| e.label.is_positive())
        .count();
    println!("file: {}", args.data.data.display());
    println!("rows read: {}", ingest.rows_read);
    println!("events loaded: {}", ingest.events_loaded);
    println!("learners: {}", dataset.n_learners());
    println!("distinct topics: {}", topics.len());
    println!(
        "positive label rate: {:.4}",
        positives as f64 / dataset.n_events().max(1) as f64
    );
    println!("dropped (no topics): {}", ingest.dropped_empty);
    println!("depths clamped to [0, 1]: {}", ingest.clamped_depths);
    println!("events with topics truncated: {}", ingest.truncated_events);

    if let Some(path) = &args.sr_table {
        let metric = args.sr_metric.unwrap_or(SrMetric::EntityEmbedding);
        let (table, report) = load_table(path, metric)?;
        let mut covered = BTreeSet::new();
        for (a, b, rho) in table.pairs() {
            if rho > 0.0 && topics.contains(&a) && topics.contains(&b) {
                covered.insert(a);
                covered.insert(b);
            }
        }
        let covered = covered.len();
        println!("sr table: {} ({})", path.display(), metric.label());
        println!("sr rows: {}", report.rows);
        println!("sr stored pairs: {}", report.stored_pairs);
        println!("sr clamped to [0, 1]: {}", report.clamped);
        println!("sr duplicate pairs: {}", report.duplicates);
        println!("sr self pairs ignored: {}", report.self_pairs);
        println!("topics with a related topic in the log: {covered}/{}", topics.len());
    }
    Ok(())
}
