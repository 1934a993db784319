//! TrueLearn Novel: per-topic Gaussian skills updated online from engagement.
//!
//! Each event is read as a draw-style comparison between the learner and the
//! resource. With `d_k` the coverage depth of topic `k`,
//!
//! ```text
//! learner performance  = Σ d_k · s_k + N(0, perf_noise · Σ d_k²)
//! resource performance = Σ d_k · depth_skill + N(0, perf_noise · Σ d_k²)
//! D = learner − resource,   engaged ⇔ |D| ≤ draw_margin
//! ```
//!
//! Prediction is `P(|D| ≤ draw_margin)` under the current beliefs. An update
//! moment-matches `D` to the observed outcome and hands the correction back to
//! each skill in proportion to its share of `Var(D)`. A negative label
//! conditions on the side of the draw region the prior expectation of `D`
//! already sits on.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{EngagementEvent, Label, LearnerModel, TopicId};
use crate::gaussian::{norm_interval, truncated_moments_above, truncated_moments_within, Gaussian1D};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{name} must be {requirement}, got {value}")]
    OutOfRange {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
}

/// Hyperparameters of the baseline model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Prior variance of an unseen skill.
    pub beta: f64,
    /// Per-side performance noise variance, scaled by `Σ d_k²`.
    pub perf_noise: f64,
    /// Half-width of the engagement (draw) region.
    pub draw_margin: f64,
    /// Standard deviation added to a skill before each update.
    pub dynamics_tau: f64,
    pub decision_threshold: f64,
    /// Skill level attributed to the resource side of each topic.
    pub depth_skill: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            beta: 0.5,
            perf_noise: 0.5,
            draw_margin: 0.3,
            dynamics_tau: 0.0,
            decision_threshold: 0.5,
            depth_skill: 0.0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let check = |name, ok: bool, requirement, value| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange {
                    name,
                    requirement,
                    value,
                })
            }
        };
        check("beta", self.beta > 0.0 && self.beta.is_finite(), "positive", self.beta)?;
        check(
            "perf_noise",
            self.perf_noise > 0.0 && self.perf_noise.is_finite(),
            "positive",
            self.perf_noise,
        )?;
        check(
            "draw_margin",
            self.draw_margin > 0.0,
            "positive",
            self.draw_margin,
        )?;
        check(
            "dynamics_tau",
            self.dynamics_tau >= 0.0 && self.dynamics_tau.is_finite(),
            "non-negative",
            self.dynamics_tau,
        )?;
        check(
            "decision_threshold",
            self.decision_threshold > 0.0 && self.decision_threshold < 1.0,
            "in (0, 1)",
            self.decision_threshold,
        )?;
        check(
            "depth_skill",
            self.depth_skill.is_finite(),
            "finite",
            self.depth_skill,
        )
    }

    pub fn default_prior(&self) -> Gaussian1D {
        Gaussian1D::new(0.0, self.beta)
    }
}

/// Supplies the belief for a topic the learner has not encountered yet.
pub trait PriorSource: Sync {
    fn prior(&self, model: &LearnerModel, topic: TopicId, cfg: &ModelConfig) -> Gaussian1D;
}

/// `N(0, beta)` for every unseen topic.
#[derive(Debug, Clone, Copy, Default)]
pub struct DefaultPrior;

impl PriorSource for DefaultPrior {
    fn prior(&self, _model: &LearnerModel, _topic: TopicId, cfg: &ModelConfig) -> Gaussian1D {
        cfg.default_prior()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub p_engage: f64,
    pub label: Label,
}

/// One replayed event: the prediction made before the label was revealed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub order_index: u64,
    pub p_engage: f64,
    pub prediction: Label,
    pub label: Label,
}

/// Current beliefs for the topics of `event`, in event order.
pub fn resolve_beliefs(
    model: &LearnerModel,
    event: &EngagementEvent,
    cfg: &ModelConfig,
    priors: &dyn PriorSource,
) -> Vec<Gaussian1D> {
    event
        .topics
        .iter()
        .map(|c| match model.skill(c.topic) {
            Some(g) if model.has_seen(c.topic) => g,
            _ => priors.prior(model, c.topic, cfg),
        })
        .collect()
}

/// Mean and variance of the performance difference `D`.
fn difference(event: &EngagementEvent, beliefs: &[Gaussian1D], cfg: &ModelConfig) -> (f64, f64) {
    let mut mean = 0.0;
    let mut var = 0.0;
    let mut depth_sq = 0.0;
    for (c, g) in event.topics.iter().zip(beliefs) {
        mean += c.depth * (g.mean() - cfg.depth_skill);
        var += c.depth * c.depth * g.variance();
        depth_sq += c.depth * c.depth;
    }
    (mean, var + 2.0 * cfg.perf_noise * depth_sq)
}

/// Engagement probability for explicit beliefs (one per event topic).
pub fn predict_from_beliefs(
    event: &EngagementEvent,
    beliefs: &[Gaussian1D],
    cfg: &ModelConfig,
) -> Prediction {
    let (mean, var) = difference(event, beliefs, cfg);
    let eps = cfg.draw_margin;
    let p_engage = if var > 0.0 {
        let sd = var.sqrt();
        norm_interval((-eps - mean) / sd, (eps - mean) / sd)
    } else if mean.abs() <= eps {
        1.0
    } else {
        0.0
    };
    let label = if p_engage >= cfg.decision_threshold {
        Label::Engaged
    } else {
        Label::NotEngaged
    };
    Prediction { p_engage, label }
}

pub fn predict_with(
    model: &LearnerModel,
    event: &EngagementEvent,
    cfg: &ModelConfig,
    priors: &dyn PriorSource,
) -> Prediction {
    predict_from_beliefs(event, &resolve_beliefs(model, event, cfg, priors), cfg)
}

/// Baseline prediction: unseen topics sit at `N(0, beta)`.
pub fn predict(model: &LearnerModel, event: &EngagementEvent, cfg: &ModelConfig) -> Prediction {
    predict_with(model, event, cfg, &DefaultPrior)
}

/// Posterior beliefs for the event topics given the observed label.
pub fn posterior_beliefs(
    event: &EngagementEvent,
    beliefs: &[Gaussian1D],
    label: Label,
    cfg: &ModelConfig,
) -> Vec<Gaussian1D> {
    let tau2 = cfg.dynamics_tau * cfg.dynamics_tau;
    let inflated: Vec<Gaussian1D> = if tau2 > 0.0 {
        beliefs
            .iter()
            .map(|g| Gaussian1D::new(g.mean(), g.variance() + tau2))
            .collect()
    } else {
        beliefs.to_vec()
    };
    let (mean, var) = difference(event, &inflated, cfg);
    if var.is_nan() || var <= 0.0 {
        return inflated;
    }
    let sd = var.sqrt();
    let t = mean / sd;
    let eps = cfg.draw_margin / sd;
    let (v, w) = match label {
        Label::Engaged => truncated_moments_within(t, eps),
        Label::NotEngaged if mean >= 0.0 => truncated_moments_above(t, eps),
        Label::NotEngaged => {
            let (v, w) = truncated_moments_above(-t, eps);
            (-v, w)
        }
    };
    event
        .topics
        .iter()
        .zip(&inflated)
        .map(|(c, g)| {
            let s2 = g.variance();
            let share = c.depth * s2;
            Gaussian1D::new(
                g.mean() + share * v / sd,
                s2 * (1.0 - c.depth * share * w / var),
            )
        })
        .collect()
}

fn commit(model: &mut LearnerModel, event: &EngagementEvent, posterior: Vec<Gaussian1D>) {
    for (c, g) in event.topics.iter().zip(posterior) {
        model.skills.insert(c.topic, g);
        model.topics_seen.insert(c.topic);
    }
    model.events_seen += 1;
}

pub fn update_with(
    model: &mut LearnerModel,
    event: &EngagementEvent,
    cfg: &ModelConfig,
    priors: &dyn PriorSource,
) {
    let beliefs = resolve_beliefs(model, event, cfg, priors);
    let posterior = posterior_beliefs(event, &beliefs, event.label, cfg);
    commit(model, event, posterior);
}

/// Baseline update. Only the event's topics change.
pub fn update(model: &mut LearnerModel, event: &EngagementEvent, cfg: &ModelConfig) {
    update_with(model, event, cfg, &DefaultPrior)
}

/// Predicts `event` from the current state, then learns from its label.
///
/// Priors for unseen topics are resolved once, against the state before the
/// event, and shared by the prediction and the update.
pub fn predict_update(
    model: &mut LearnerModel,
    event: &EngagementEvent,
    cfg: &ModelConfig,
    priors: &dyn PriorSource,
) -> Prediction {
    let beliefs = resolve_beliefs(model, event, cfg, priors);
    let prediction = predict_from_beliefs(event, &beliefs, cfg);
    let posterior = posterior_beliefs(event, &beliefs, event.label, cfg);
    commit(model, event, posterior);
    prediction
}

/// Sequential replay: event `t` is predicted from events `1..t-1` only.
pub fn replay_session_with_state(
    events: &[EngagementEvent],
    cfg: &ModelConfig,
    priors: &dyn PriorSource,
) -> (Vec<TraceEntry>, LearnerModel) {
    let mut model = LearnerModel::new();
    let trace = events
        .iter()
        .map(|ev| {
            let p = predict_update(&mut model, ev, cfg, priors);
            TraceEntry {
                order_index: ev.order_index,
                p_engage: p.p_engage,
                prediction: p.label,
                label: ev.label,
            }
        })
        .collect();
    (trace, model)
}

pub fn replay_session(
    events: &[EngagementEvent],
    cfg: &ModelConfig,
    priors: &dyn PriorSource,
) -> Vec<TraceEntry> {
    replay_session_with_state(events, cfg, priors).0
}

#[cfg(test)]
pub(crate) mod oracle {
    use crate::data::Label;
    use crate::gaussian::norm_cdf;

    /// Posterior mean and variance of one skill `s ~ N(mean, var)` seen at
    /// `depth`, by trapezoid integration of prior × likelihood on a grid.
    /// The likelihood integrates the performance noise analytically.
    pub fn grid_posterior(
        mean: f64,
        var: f64,
        depth: f64,
        eps: f64,
        perf_noise: f64,
        depth_skill: f64,
        label: Label,
    ) -> (f64, f64) {
        let noise_sd = (2.0 * perf_noise * depth * depth).sqrt();
        let prior_diff = depth * (mean - depth_skill);
        let likelihood = |s: f64| {
            let m = depth * (s - depth_skill);
            let upper = norm_cdf((eps - m) / noise_sd);
            let lower = norm_cdf((-eps - m) / noise_sd);
            match label {
                Label::Engaged => upper - lower,
                Label::NotEngaged if prior_diff >= 0.0 => 1.0 - upper,
                Label::NotEngaged => lower,
            }
        };
        let sd = var.sqrt();
        let n = 40_000;
        let lo = mean - 14.0 * sd;
        let h = 28.0 * sd / n as f64;
        let (mut z0, mut z1, mut z2) = (0.0, 0.0, 0.0);
        for i in 0..=n {
            let s = lo + i as f64 * h;
            let weight = if i == 0 || i == n { 0.5 } else { 1.0 };
            let f = weight * (-0.5 * (s - mean) * (s - mean) / var).exp() * likelihood(s);
            z0 += f;
            z1 += f * s;
            z2 += f * s * s;
        }
        let m = z1 / z0;
        (m, z2 / z0 - m * m)
    }
}
