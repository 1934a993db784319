//! Sequential-prediction scoring, aggregation and significance statistics.
//!
//! Metrics are computed per learner and combined as an event-count weighted
//! mean. Zero denominators score `0`: precision with no positive predictions,
//! recall with no positive labels, and F1 when both are zero.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::data::{Dataset, EngagementEvent, Label};
use crate::sr_graph::{avg_connectedness, min_cut_set_size, LearnerTopicGraph, SrTable};
use crate::truelearn::{replay_session, ModelConfig, PriorSource, TraceEntry};

/// Largest sample size whose SROCC p-value is found by full enumeration.
pub const EXACT_PERMUTATION_MAX: usize = 10;

/// Significance level for correlation cells and model comparisons.
pub const SIGNIFICANCE: f64 = 0.01;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("correlation undefined for a constant vector")]
    ConstantInput,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn from_pairs<I: IntoIterator<Item = (Label, Label)>>(pairs: I) -> Self {
        let mut c = Confusion::default();
        for (pred, label) in pairs {
            match (pred.is_positive(), label.is_positive()) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerScore {
    pub learner_id: String,
    pub n_events: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub trace: Vec<TraceEntry>,
}

/// Scores one learner's trace; `None` for an empty trace.
pub fn score_learner(learner_id: &str, trace: Vec<TraceEntry>) -> Option<LearnerScore> {
    if trace.is_empty() {
        return None;
    }
    let c = Confusion::from_pairs(trace.iter().map(|e| (e.prediction, e.label)));
    Some(LearnerScore {
        learner_id: learner_id.to_string(),
        n_events: trace.len(),
        precision: c.precision(),
        recall: c.recall(),
        f1: c.f1(),
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub n_learners: usize,
    pub n_events: usize,
}

/// Event-weighted means of the per-learner metrics. `F1` is the weighted mean
/// of per-learner F1 scores, not F1 of pooled counts.
pub fn aggregate(scores: &[LearnerScore]) -> Option<WeightedMetrics> {
    let total: usize = scores.iter().map(|s| s.n_events).sum();
    if total == 0 {
        return None;
    }
    // Summation in learner-id order keeps the result independent of input order.
    let mut ordered: Vec<&LearnerScore> = scores.iter().collect();
    ordered.sort_by(|a, b| a.learner_id.cmp(&b.learner_id));
    let weighted = |f: fn(&LearnerScore) -> f64| {
        ordered
            .iter()
            .map(|s| f(s) * s.n_events as f64)
            .sum::<f64>()
            / total as f64
    };
    Some(WeightedMetrics {
        precision: weighted(|s| s.precision),
        recall: weighted(|s| s.recall),
        f1: weighted(|s| s.f1),
        n_learners: scores.len(),
        n_events: total,
    })
}

/// Result of replaying a set of learners with one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayOutcome {
    pub scores: Vec<LearnerScore>,
    /// Learners with no events, left out of aggregation.
    pub excluded_empty: usize,
}

/// Replays each listed learner independently and scores the traces.
///
/// Learners are processed in parallel on the current rayon pool; results come
/// back in the order of `learner_ids`, so output does not depend on the
/// number of workers.
pub fn replay_learners(
    dataset: &Dataset,
    learner_ids: &[String],
    cfg: &ModelConfig,
    priors: &dyn PriorSource,
) -> ReplayOutcome {
    let results: Vec<Option<LearnerScore>> = learner_ids
        .par_iter()
        .map(|id| {
            let events: &[EngagementEvent] = dataset.session(id).unwrap_or(&[]);
            score_learner(id, replay_session(events, cfg, priors))
        })
        .collect();
    let excluded_empty = results.iter().filter(|r| r.is_none()).count();
    ReplayOutcome {
        scores: results.into_iter().flatten().collect(),
        excluded_empty,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTTest {
    pub n: usize,
    pub mean_diff: f64,
    pub t: f64,
    /// Upper-tail p-value for `mean(b - a) > 0`.
    pub p: f64,
}

/// Paired t-test with alternative `mean(b - a) > 0`, `n - 1` degrees of freedom.
///
/// When the differences have zero variance the statistic is infinite (or
/// zero) and `p` is `0`, `1` or `0.5` for a positive, negative or zero mean.
pub fn paired_t_test_one_tailed(a: &[f64], b: &[f64]) -> Result<PairedTTest, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(StatsError::TooFew { needed: 2, got: n });
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1) as f64;
    if var == 0.0 {
        let (t, p) = if mean > 0.0 {
            (f64::INFINITY, 0.0)
        } else if mean < 0.0 {
            (f64::NEG_INFINITY, 1.0)
        } else {
            (0.0, 0.5)
        };
        return Ok(PairedTTest {
            n,
            mean_diff: mean,
            t,
            p,
        });
    }
    let t = mean / (var / n as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive degrees of freedom");
    Ok(PairedTTest {
        n,
        mean_diff: mean,
        t,
        p: dist.sf(t),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    ExactPermutation,
    TApproximation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spearman {
    pub n: usize,
    pub rho: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub method: PValueMethod,
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &k in &idx[start..end] {
            ranks[k] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
    }
}

/// Fraction of permutations of `y` whose centred cross-product with `x` is at
/// least as extreme as the observed one (Heap's algorithm).
fn permutation_p_value(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mx = x.iter().sum::<f64>() / n as f64;
    let xc: Vec<f64> = x.iter().map(|v| v - mx).collect();
    let cross = |perm: &[f64]| -> f64 { xc.iter().zip(perm).map(|(a, b)| a * b).sum() };
    let observed = cross(y).abs();
    let tol = 1e-9 * (1.0 + observed);
    let mut perm = y.to_vec();
    let mut counter = vec![0usize; n];
    let mut extreme: u64 = u64::from(cross(&perm).abs() >= observed - tol);
    let mut total: u64 = 1;
    let mut i = 0;
    while i < n {
        if counter[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counter[i], i);
            }
            total += 1;
            if cross(&perm).abs() >= observed - tol {
                extreme += 1;
            }
            counter[i] += 1;
            i = 0;
        } else {
            counter[i] = 0;
            i += 1;
        }
    }
    extreme as f64 / total as f64
}

/// Spearman rank correlation with a two-sided p-value.
///
/// For `n ≤ EXACT_PERMUTATION_MAX` the p-value enumerates every permutation;
/// above that it uses `t = ρ √((n-2)/(1-ρ²))` with `n - 2` degrees of freedom.
pub fn srocc(x: &[f64], y: &[f64]) -> Result<Spearman, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFew { needed: 3, got: n });
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let rho = pearson(&rx, &ry).ok_or(StatsError::ConstantInput)?;
    if n <= EXACT_PERMUTATION_MAX {
        return Ok(Spearman {
            n,
            rho,
            p: permutation_p_value(&rx, &ry),
            method: PValueMethod::ExactPermutation,
        });
    }
    let p = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * ((n - 2) as f64 / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, (n - 2) as f64).expect("positive degrees of freedom");
        (2.0 * dist.sf(t.abs())).min(1.0)
    };
    Ok(Spearman {
        n,
        rho,
        p,
        method: PValueMethod::TApproximation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecallPoint {
    pub n: usize,
    pub mean_recall: f64,
    pub learners: usize,
}

/// Mean cumulative recall over each learner's first `n` events, for
/// `n = 1..=max_n`, among learners with at least `n` events. The series stops
/// at the first `n` no learner reaches.
pub fn recall_by_event_index(traces: &[&[TraceEntry]], max_n: usize) -> Vec<RecallPoint> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        let recalls: Vec<f64> = traces
            .iter()
            .filter(|t| t.len() >= n)
            .map(|t| Confusion::from_pairs(t[..n].iter().map(|e| (e.prediction, e.label))).recall())
            .collect();
        if recalls.is_empty() {
            break;
        }
        out.push(RecallPoint {
            n,
            mean_recall: recalls.iter().sum::<f64>() / recalls.len() as f64,
            learners: recalls.len(),
        });
    }
    out
}

/// `1 - distinct topics / topic slots` over a learner's events.
pub fn topic_sparsity_rate(events: &[EngagementEvent]) -> f64 {
    let slots: usize = events.iter().map(|e| e.topics.len()).sum();
    if slots == 0 {
        return 0.0;
    }
    let unique: BTreeSet<_> = events.iter().flat_map(|e| e.topic_ids()).collect();
    1.0 - unique.len() as f64 / slots as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rq4Row {
    pub learner_id: String,
    pub n_events: usize,
    pub n_unique_topics: usize,
    pub topic_sparsity_rate: f64,
    pub positive_label_rate: f64,
    pub avg_connectedness: f64,
    pub min_cut_set_size: usize,
    pub recall: f64,
}

impl Rq4Row {
    pub const FEATURES: [&'static str; 6] = [
        "Number of Events",
        "Number of Unique Topics",
        "Topic Sparsity Rate",
        "Positive Label Rate",
        "Avg. Connectedness",
        "Min. Cut Set Size",
    ];

    pub fn features(&self) -> [f64; 6] {
        [
            self.n_events as f64,
            self.n_unique_topics as f64,
            self.topic_sparsity_rate,
            self.positive_label_rate,
            self.avg_connectedness,
            self.min_cut_set_size as f64,
        ]
    }
}

/// Session features of one learner, computed over the full session.
pub fn learner_features(
    learner_id: &str,
    events: &[EngagementEvent],
    table: &SrTable,
    edge_threshold: f64,
    recall: f64,
) -> Rq4Row {
    let topics: BTreeSet<_> = events.iter().flat_map(|e| e.topic_ids()).collect();
    let graph = LearnerTopicGraph::from_topics(topics.iter().copied(), table, edge_threshold);
    let positives = events.iter().filter(|e| e.label.is_positive()).count();
    Rq4Row {
        learner_id: learner_id.to_string(),
        n_events: events.len(),
        n_unique_topics: topics.len(),
        topic_sparsity_rate: topic_sparsity_rate(events),
        positive_label_rate: ratio(positives, events.len()),
        avg_connectedness: avg_connectedness(&graph),
        min_cut_set_size: min_cut_set_size(&graph),
        recall,
    }
}

/// One feature row per scored learner.
pub fn rq4_feature_table(
    dataset: &Dataset,
    scores: &[LearnerScore],
    table: &SrTable,
    edge_threshold: f64,
) -> Vec<Rq4Row> {
    scores
        .par_iter()
        .map(|s| {
            let events = dataset.session(&s.learner_id).unwrap_or(&[]);
            learner_features(&s.learner_id, events, table, edge_threshold, s.recall)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCorrelation {
    pub feature: String,
    /// `None` when the correlation is undefined (constant column).
    pub spearman: Option<Spearman>,
    pub significant: bool,
}

/// SROCC of every feature against recall; cells with `p ≥ 0.01` are marked
/// non-significant.
pub fn feature_correlations(rows: &[Rq4Row]) -> Vec<FeatureCorrelation> {
    let recall: Vec<f64> = rows.iter().map(|r| r.recall).collect();
    Rq4Row::FEATURES
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let column: Vec<f64> = rows.iter().map(|r| r.features()[i]).collect();
            let spearman = srocc(&column, &recall).ok();
            FeatureCorrelation {
                feature: name.to_string(),
                significant: spearman.is_some_and(|s| s.p < SIGNIFICANCE),
                spearman,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{TopicCoverage, TopicId};
    use crate::gaussian::quadrature::adaptive_simpson;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn lbl(b: bool) -> Label {
        if b {
            Label::Engaged
        } else {
            Label::NotEngaged
        }
    }

    fn trace(pairs: &[(bool, bool)]) -> Vec<TraceEntry> {
        pairs
            .iter()
            .enumerate()
            .map(|(i, &(p, l))| TraceEntry {
                order_index: i as u64,
                p_engage: if p { 0.9 } else { 0.1 },
                prediction: lbl(p),
                label: lbl(l),
            })
            .collect()
    }

    fn score(id: &str, n: usize, f1: f64) -> LearnerScore {
        LearnerScore {
            learner_id: id.into(),
            n_events: n,
            precision: f1,
            recall: f1,
            f1,
            trace: Vec::new(),
        }
    }

    /// Student-t upper tail by integrating the density from 0 to |t|.
    fn t_upper_tail_oracle(t: f64, df: f64) -> f64 {
        let ln_c = statrs::function::gamma::ln_gamma((df + 1.0) / 2.0)
            - statrs::function::gamma::ln_gamma(df / 2.0)
            - 0.5 * (df * std::f64::consts::PI).ln();
        let dens = |x: f64| (ln_c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp();
        let half = adaptive_simpson(&dens, 0.0, t.abs(), 1e-14);
        if t >= 0.0 {
            0.5 - half
        } else {
            0.5 + half
        }
    }

    #[test]
    fn perfect_and_all_positive() {
        let s = score_learner("a", trace(&[(true, true); 4])).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        let s = score_learner(
            "a",
            trace(&[(true, true), (true, false), (true, true), (true, false)]),
        )
        .unwrap();
        assert_eq!(s.precision, 0.5);
        assert_eq!(s.recall, 1.0);
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert!(score_learner("a", Vec::new()).is_none());
    }

    #[test]
    fn zero_denominators() {
        let s = score_learner("a", trace(&[(false, false), (false, true)])).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn random_trace_matches_recount() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let pairs: Vec<(bool, bool)> = (0..50)
            .map(|_| (rng.random_bool(0.6), rng.random_bool(0.5)))
            .collect();
        let s = score_learner("a", trace(&pairs)).unwrap();
        let tp = pairs.iter().filter(|&&(p, l)| p && l).count() as f64;
        let pp = pairs.iter().filter(|&&(p, _)| p).count() as f64;
        let lp = pairs.iter().filter(|&&(_, l)| l).count() as f64;
        let (p, r) = (tp / pp, tp / lp);
        assert!((s.precision - p).abs() < 1e-15);
        assert!((s.recall - r).abs() < 1e-15);
        assert!((s.f1 - 2.0 * p * r / (p + r)).abs() < 1e-15);
    }

    #[test]
    fn aggregate_examples() {
        let one = aggregate(&[score("a", 7, 0.3)]).unwrap();
        assert_eq!(one.f1, 0.3);
        let two = aggregate(&[score("a", 10, 0.8), score("b", 30, 0.4)]).unwrap();
        assert!((two.f1 - 0.5).abs() < 1e-15);
        assert!(aggregate(&[]).is_none());
    }

    #[test]
    fn aggregate_random_matches_recount() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let scores: Vec<LearnerScore> = (0..100)
            .map(|i| score(&format!("l{i}"), rng.random_range(1..80), rng.random_range(0.0..1.0)))
            .collect();
        let agg = aggregate(&scores).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for s in &scores {
            num += s.f1 * s.n_events as f64;
            den += s.n_events as f64;
        }
        assert!((agg.f1 - num / den).abs() < 1e-12);
        let mut reversed = scores.clone();
        reversed.reverse();
        assert_eq!(aggregate(&reversed).unwrap(), agg);
    }

    #[test]
    fn t_test_conventions() {
        let a = [0.25, 0.5, 0.75];
        let r = paired_t_test_one_tailed(&a, &a).unwrap();
        assert_eq!((r.t, r.p), (0.0, 0.5));
        let b: Vec<f64> = a.iter().map(|x| x + 1.0).collect();
        assert_eq!(paired_t_test_one_tailed(&a, &b).unwrap().p, 0.0);
        assert_eq!(paired_t_test_one_tailed(&b, &a).unwrap().p, 1.0);
        assert!(paired_t_test_one_tailed(&a, &a[..2]).is_err());
        assert!(paired_t_test_one_tailed(&a[..1], &a[..1]).is_err());
    }

    #[test]
    fn t_test_hand_computation() {
        let diffs = [0.1, 0.2, 0.05, 0.15];
        let a = [0.0; 4];
        let r = paired_t_test_one_tailed(&a, &diffs).unwrap();
        let mean = 0.125;
        let sd = ((0.025f64.powi(2) + 0.075f64.powi(2) + 0.075f64.powi(2) + 0.025f64.powi(2)) / 3.0).sqrt();
        let t = mean / (sd / 2.0);
        assert!((r.t - t).abs() < 1e-12);
        assert!((r.p - t_upper_tail_oracle(t, 3.0)).abs() < 1e-9, "{} vs {}", r.p, t_upper_tail_oracle(t, 3.0));
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
    }

    #[test]
    fn srocc_monotone_cases() {
        let x: Vec<f64> = (0..15).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        assert_eq!(srocc(&x, &y).unwrap().rho, 1.0);
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        let s = srocc(&x, &rev).unwrap();
        assert_eq!(s.rho, -1.0);
        assert_eq!(s.p, 0.0);
        assert_eq!(srocc(&x, &[1.0; 15]), Err(StatsError::ConstantInput));
        assert!(srocc(&x[..2], &y[..2]).is_err());
    }

    #[test]
    fn srocc_ties_match_rank_oracle() {
        let x = [1.0, 2.0, 2.0, 3.0, 5.0, 5.0, 5.0, 8.0, 9.0, 1.0, 4.0, 4.0];
        let y = [2.0, 1.0, 4.0, 4.0, 3.0, 7.0, 6.0, 9.0, 9.0, 0.0, 3.0, 5.0];
        // independent: rank by counting, then textbook Pearson
        let rank = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .map(|&a| {
                    let less = v.iter().filter(|&&b| b < a).count() as f64;
                    let eq = v.iter().filter(|&&b| b == a).count() as f64;
                    less + (eq + 1.0) / 2.0
                })
                .collect()
        };
        let (rx, ry) = (rank(&x), rank(&y));
        let n = rx.len() as f64;
        let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
        let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
        let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
        let oracle = cov / (vx * vy).sqrt();
        assert!((srocc(&x, &y).unwrap().rho - oracle).abs() < 1e-12);
    }

    #[test]
    fn small_sample_uses_exact_permutation() {
        // n = 4, perfectly concordant: 2 of 24 orderings reach |ρ| = 1.
        let s = srocc(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.method, PValueMethod::ExactPermutation);
        assert!((s.p - 2.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn recall_series() {
        let t = trace(&[(true, true); 5]);
        let series = recall_by_event_index(&[&t], 8);
        assert_eq!(series.len(), 5);
        assert!(series.iter().all(|p| p.mean_recall == 1.0));

        let a = trace(&[(false, true), (true, true), (true, false)]);
        let b = trace(&[(true, true), (false, true)]);
        let s = recall_by_event_index(&[&a, &b], 4);
        // n=1: a → 0/1, b → 1/1; n=2: a → 1/2, b → 1/2; n=3: a only → 1/2
        let got: Vec<(usize, f64, usize)> = s.iter().map(|p| (p.n, p.mean_recall, p.learners)).collect();
        assert_eq!(got, vec![(1, 0.5, 2), (2, 0.5, 2), (3, 0.5, 1)]);
    }

    #[test]
    fn rq4_basic_features() {
        let mut table = SrTable::new(crate::sr_graph::SrMetric::EntityEmbedding);
        table.insert(TopicId(1), TopicId(2), 0.5);
        table.insert(TopicId(2), TopicId(3), 0.5);
        table.insert(TopicId(1), TopicId(3), 0.5);
        let topic_cycle = [1u64, 2, 3, 4];
        let events: Vec<EngagementEvent> = (0..10)
            .map(|i| EngagementEvent {
                learner_id: "u".into(),
                order_index: i,
                topics: vec![TopicCoverage {
                    topic: TopicId(topic_cycle[i as usize % 4]),
                    depth: 0.5,
                }],
                label: lbl(i < 7),
            })
            .collect();
        let row = learner_features("u", &events, &table, 0.0, 0.4);
        assert_eq!(row.n_events, 10);
        assert_eq!(row.n_unique_topics, 4);
        assert!((row.positive_label_rate - 0.7).abs() < 1e-15);
        assert!((row.topic_sparsity_rate - 0.6).abs() < 1e-15);
        // topic 4 is isolated
        assert_eq!(row.min_cut_set_size, 0);

        let tri: Vec<EngagementEvent> = events.into_iter().filter(|e| e.topics[0].topic.0 != 4).collect();
        let row = learner_features("u", &tri, &table, 0.0, 0.4);
        assert_eq!(row.avg_connectedness, 2.0);
        assert_eq!(row.min_cut_set_size, 2);
    }

    proptest! {
        #[test]
        fn t_test_of_identical_vectors(a in proptest::collection::vec(-5.0f64..5.0, 2..30)) {
            prop_assert_eq!(paired_t_test_one_tailed(&a, &a).unwrap().p, 0.5);
        }

        #[test]
        fn aggregate_is_order_invariant(
            items in proptest::collection::vec((1usize..50, 0.0f64..1.0), 1..20),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            let scores: Vec<LearnerScore> =
                items.iter().enumerate().map(|(i, &(n, f))| score(&format!("l{i:03}"), n, f)).collect();
            let mut shuffled = scores.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(aggregate(&scores), aggregate(&shuffled));
        }
    }
}
