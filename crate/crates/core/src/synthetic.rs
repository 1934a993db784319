//! Seeded synthetic cohorts with a known topic graph.
//!
//! Topics are grouped into clusters. Every within-cluster pair gets a high
//! relatedness score and cross-cluster pairs are absent from the table. Each
//! learner has one latent level per cluster and topic skills scatter tightly
//! around it, so skills are correlated exactly along the relatedness graph.
//! Labels are drawn from the same draw-margin story the models assume.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, EngagementEvent, Label, TopicCoverage, TopicId};
use crate::sr_graph::{SrMetric, SrTable};
use crate::truelearn::ModelConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortConfig {
    pub n_learners: usize,
    pub n_clusters: usize,
    pub topics_per_cluster: usize,
    /// Range of within-cluster relatedness scores.
    pub rho_range: (f64, f64),
    pub events_per_learner: (usize, usize),
    /// Clusters a learner's session draws from.
    pub clusters_per_learner: usize,
    /// Share of learners whose cluster levels sit near the resource level.
    pub engaged_share: f64,
    /// Spread of cluster levels for engaged learners.
    pub engaged_spread: f64,
    /// Distance of cluster levels from the resource level for the others.
    pub disengaged_offset: f64,
    /// Standard deviation of topic skills around their cluster level.
    pub topic_jitter: f64,
    pub depth_range: (f64, f64),
    /// Draw-margin and noise settings used to sample labels.
    pub generator: ModelConfig,
    pub seed: u64,
}

impl Default for CohortConfig {
    fn default() -> Self {
        Self {
            n_learners: 600,
            n_clusters: 24,
            topics_per_cluster: 12,
            rho_range: (0.6, 0.95),
            events_per_learner: (15, 40),
            clusters_per_learner: 3,
            engaged_share: 0.7,
            engaged_spread: 0.1,
            disengaged_offset: 1.0,
            topic_jitter: 0.05,
            depth_range: (0.4, 0.6),
            generator: synthetic_model_config(),
            seed: 7,
        }
    }
}

/// Model settings matched to the default cohort.
///
/// With these values an unseen topic under the `N(0, beta)` prior sits just
/// below the decision threshold, so the two models differ mainly on first
/// encounters.
pub fn synthetic_model_config() -> ModelConfig {
    ModelConfig {
        beta: 1.0,
        perf_noise: 0.1,
        draw_margin: 0.3,
        ..ModelConfig::default()
    }
}

#[derive(Debug, Clone)]
pub struct Cohort {
    pub dataset: Dataset,
    pub table: SrTable,
    /// Cluster index of every topic, indexed by topic id.
    pub cluster_of: Vec<usize>,
}

fn topic_id(cluster: usize, k: usize, per_cluster: usize) -> TopicId {
    TopicId((cluster * per_cluster + k) as u64)
}

/// Builds the cohort. Identical configs give identical cohorts.
pub fn generate(cfg: &CohortConfig) -> Cohort {
    assert!(cfg.n_clusters >= cfg.clusters_per_learner && cfg.clusters_per_learner > 0);
    assert!(cfg.topics_per_cluster > 0 && cfg.events_per_learner.0 > 0);
    assert!(cfg.events_per_learner.0 <= cfg.events_per_learner.1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let per = cfg.topics_per_cluster;

    let mut table = SrTable::new(SrMetric::EntityEmbedding);
    for c in 0..cfg.n_clusters {
        for a in 0..per {
            for b in a + 1..per {
                let rho = rng.random_range(cfg.rho_range.0..=cfg.rho_range.1);
                table.insert(topic_id(c, a, per), topic_id(c, b, per), rho);
            }
        }
    }
    let cluster_of: Vec<usize> = (0..cfg.n_clusters * per).map(|t| t / per).collect();

    let level = cfg.generator.depth_skill;
    let engaged_levels = Normal::new(level, cfg.engaged_spread).expect("finite spread");
    let jitter = Normal::new(0.0, cfg.topic_jitter).expect("finite jitter");
    let clusters: Vec<usize> = (0..cfg.n_clusters).collect();

    let mut events = Vec::new();
    for l in 0..cfg.n_learners {
        let learner_id = format!("s{l:05}");
        let engaged = rng.random_bool(cfg.engaged_share);
        let chosen: Vec<usize> = clusters
            .choose_multiple(&mut rng, cfg.clusters_per_learner)
            .copied()
            .collect();
        let centres: Vec<f64> = chosen
            .iter()
            .map(|_| {
                if engaged {
                    engaged_levels.sample(&mut rng)
                } else {
                    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    level + sign * cfg.disengaged_offset
                }
            })
            .collect();
        let skills: Vec<Vec<f64>> = centres
            .iter()
            .map(|&m| (0..per).map(|_| m + jitter.sample(&mut rng)).collect())
            .collect();

        let n_events = rng.random_range(cfg.events_per_learner.0..=cfg.events_per_learner.1);
        for order in 0..n_events {
            let slot = rng.random_range(0..chosen.len());
            let k = rng.random_range(0..per);
            let depth = rng.random_range(cfg.depth_range.0..=cfg.depth_range.1);
            let label = sample_label(&mut rng, skills[slot][k], depth, &cfg.generator);
            events.push(EngagementEvent {
                learner_id: learner_id.clone(),
                order_index: order as u64,
                topics: vec![TopicCoverage {
                    topic: topic_id(chosen[slot], k, per),
                    depth,
                }],
                label,
            });
        }
    }
    events.shuffle(&mut rng);
    let dataset = Dataset::from_events(events).expect("generated order indices are unique");
    Cohort {
        dataset,
        table,
        cluster_of,
    }
}

/// Engaged iff the noisy performance difference lands inside the margin.
fn sample_label(rng: &mut ChaCha8Rng, skill: f64, depth: f64, m: &ModelConfig) -> Label {
    let noise = Normal::new(0.0, (2.0 * m.perf_noise).sqrt() * depth).expect("finite noise");
    let diff = depth * (skill - m.depth_skill) + noise.sample(rng);
    if diff.abs() <= m.draw_margin {
        Label::Engaged
    } else {
        Label::NotEngaged
    }
}
