//! Informed priors for unseen topics, propagated from related seen topics.
//!
//! When a learner meets a topic for the first time its prior is built from
//! the beliefs of already-seen topics that are semantically related to it.
//! With `Ω` the related seen topics (see [`related_seen_topics`]) and weights
//! `w_j`, the prior is the distribution of `Σ w_j θ_j` for independent
//! `θ_j ~ N(μ_j, σ_j²)`:
//!
//! ```text
//! mean     = Σ_{j∈Ω} w_j μ_j
//! variance = Σ_{j∈Ω} w_j² σ_j²
//! ```
//!
//! By default `w_j = ρ_ij / |Ω|`. If `Ω` is empty the usual `N(0, beta)`
//! applies, so a table without related pairs reproduces the baseline exactly.
//! Once a topic has been observed it is never re-propagated; correlations
//! among seen topics are not modelled.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{EngagementEvent, LearnerModel, TopicId};
use crate::gaussian::Gaussian1D;
use crate::sr_graph::{related_seen_topics, Omega, SrMetric, SrTable};
use crate::truelearn::{predict_update, ModelConfig, Prediction, PriorSource};

/// How the source beliefs are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingMode {
    /// `w_j = ρ_ij / |Ω|`.
    #[default]
    SemanticRelatedness,
    /// `w_j = (1/σ_j) / Σ_k (1/σ_k)`: a convex combination favouring the
    /// better-observed topics.
    InverseStandardError,
}

impl FromStr for MixingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "semantic_relatedness" | "sr" | "rho" => Ok(MixingMode::SemanticRelatedness),
            "inverse_standard_error" | "inverse_se" => Ok(MixingMode::InverseStandardError),
            other => Err(format!("unknown mixing mode {other:?}")),
        }
    }
}

/// Which variance enters the propagated prior for each source topic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceSource {
    /// The source topic's own posterior variance `σ_j²`.
    #[default]
    SourceTopic,
    /// The fixed prior variance `beta`, for sensitivity analysis.
    FixedBeta,
}

impl FromStr for VarianceSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "source_topic" | "source" => Ok(VarianceSource::SourceTopic),
            "fixed_beta" | "beta" => Ok(VarianceSource::FixedBeta),
            other => Err(format!("unknown variance source {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationConfig {
    pub sr_metric: SrMetric,
    pub omega: Omega,
    pub mixing: MixingMode,
    pub variance_source: VarianceSource,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            sr_metric: SrMetric::EntityEmbedding,
            omega: Omega::All,
            mixing: MixingMode::default(),
            variance_source: VarianceSource::default(),
        }
    }
}

impl fmt::Display for PropagationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} omega={}", self.sr_metric.label(), self.omega)
    }
}

/// Prior for `target` propagated from related seen topics.
///
/// Falls back to `N(0, beta)` when no seen topic is related, or when the
/// weights are so small that the combined variance underflows.
pub fn propagate_prior(
    model: &LearnerModel,
    target: TopicId,
    table: &SrTable,
    cfg: &PropagationConfig,
    base: &ModelConfig,
) -> Gaussian1D {
    let omega = related_seen_topics(table, target, &model.topics_seen, cfg.omega);
    if omega.is_empty() {
        return base.default_prior();
    }
    let sources: Vec<(f64, Gaussian1D)> = omega
        .iter()
        .map(|&(j, rho)| (rho, model.skill(j).unwrap_or_else(|| base.default_prior())))
        .collect();
    let source_variance = |g: &Gaussian1D| match cfg.variance_source {
        VarianceSource::SourceTopic => g.variance(),
        VarianceSource::FixedBeta => base.beta,
    };
    let weights: Vec<f64> = match cfg.mixing {
        MixingMode::SemanticRelatedness => {
            let size = sources.len() as f64;
            sources.iter().map(|(rho, _)| rho / size).collect()
        }
        MixingMode::InverseStandardError => {
            let inv: Vec<f64> = sources
                .iter()
                .map(|(_, g)| 1.0 / source_variance(g).sqrt())
                .collect();
            let total: f64 = inv.iter().sum();
            inv.iter().map(|x| x / total).collect()
        }
    };
    let mut mean = 0.0;
    let mut variance = 0.0;
    for (w, (_, g)) in weights.iter().zip(&sources) {
        mean += w * g.mean();
        variance += w * w * source_variance(g);
    }
    Gaussian1D::try_new(mean, variance).unwrap_or_else(|_| base.default_prior())
}

/// [`PriorSource`] that propagates from the learner's related seen topics.
#[derive(Debug, Clone, Copy)]
pub struct SemanticPrior<'a> {
    pub table: &'a SrTable,
    pub cfg: PropagationConfig,
}

impl<'a> SemanticPrior<'a> {
    pub fn new(table: &'a SrTable, cfg: PropagationConfig) -> Self {
        Self { table, cfg }
    }
}

impl PriorSource for SemanticPrior<'_> {
    fn prior(&self, model: &LearnerModel, topic: TopicId, base: &ModelConfig) -> Gaussian1D {
        propagate_prior(model, topic, self.table, &self.cfg, base)
    }
}

/// One sequential step of Semantic TrueLearn: predict with propagated priors
/// for first-seen topics, then run the baseline update from those priors.
pub fn semantic_predict_update(
    model: &mut LearnerModel,
    event: &EngagementEvent,
    table: &SrTable,
    base: &ModelConfig,
    cfg: &PropagationConfig,
) -> Prediction {
    predict_update(model, event, base, &SemanticPrior::new(table, *cfg))
}
