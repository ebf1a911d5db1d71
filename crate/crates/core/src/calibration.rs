//! Threshold calibration from labeled same/different distance pairs.
//!
//! The conditional probabilities in the threshold equation are estimated
//! with empirical CDFs of the labeled sample: the integral-balance condition
//! discretizes to finding the smallest threshold `t` minimizing
//! `|FPR(t) − (β + α·FNR(t))|`, where `FPR(t)` is the fraction of
//! different-class pairs at distance ≤ t and `FNR(t)` the fraction of
//! same-class pairs at distance > t. At α = 1, β = 0 this reproduces the
//! equal-error-rate threshold exactly.
//!
//! Candidate thresholds are the midpoints between consecutive sorted
//! distinct distances plus the extremes (one candidate below every distance,
//! and the maximum distance itself), which enumerate every achievable
//! operating point of the empirical CDFs.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::graph::Store;
use crate::id::EntityId;
use crate::metrics::MetricDescriptor;
use crate::value::AttributeValue;
use crate::{Error, Result};

/// One labeled calibration observation: a measured distance and the
/// ground-truth verdict of the identity oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPair {
    pub distance: f64,
    pub same: bool,
}

impl CalibrationPair {
    pub fn same(distance: f64) -> Self {
        CalibrationPair {
            distance,
            same: true,
        }
    }

    pub fn diff(distance: f64) -> Self {
        CalibrationPair {
            distance,
            same: false,
        }
    }
}

/// A calibrated threshold with the error rates measured on the input sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub threshold: f64,
    pub alpha: f64,
    pub beta: f64,
    pub fnr_at_t: f64,
    pub fpr_at_t: f64,
    pub n_same: usize,
    pub n_diff: usize,
}

/// Solves for the smallest candidate threshold minimizing
/// `|FPR(t) − (β + α·FNR(t))|`.
///
/// Ties at the threshold resolve to "equal" (the ≤ comparison), and when
/// several candidates achieve the same objective the smallest is returned,
/// so identical inputs give bit-identical results.
pub fn calibrate(pairs: &[CalibrationPair], alpha: f64, beta: f64) -> Result<CalibrationResult> {
    if alpha < 0.0 || !alpha.is_finite() {
        return Err(Error::NegativeAlpha(alpha));
    }
    if pairs.iter().any(|p| !p.distance.is_finite()) {
        return Err(Error::NonFiniteDistance);
    }
    let mut same: Vec<f64> = pairs
        .iter()
        .filter(|p| p.same)
        .map(|p| p.distance)
        .collect();
    let mut diff: Vec<f64> = pairs
        .iter()
        .filter(|p| !p.same)
        .map(|p| p.distance)
        .collect();
    if same.is_empty() || diff.is_empty() {
        return Err(Error::EmptyCalibrationClass);
    }
    same.sort_unstable_by(f64::total_cmp);
    diff.sort_unstable_by(f64::total_cmp);

    let candidates = candidate_thresholds(&same, &diff);

    // fraction of diff pairs accepted at t (distance ≤ t)
    let fpr = |t: f64| diff.partition_point(|d| *d <= t) as f64 / diff.len() as f64;
    // fraction of same pairs rejected at t (distance > t)
    let fnr = |t: f64| (same.len() - same.partition_point(|d| *d <= t)) as f64 / same.len() as f64;

    let mut best: Option<(f64, f64)> = None; // (objective, threshold)
    let mut last_rates: Option<(f64, f64)> = None;
    for &t in &candidates {
        let (p_false_accept, p_false_reject) = (fpr(t), fnr(t));
        if let Some((prev_fpr, prev_fnr)) = last_rates {
            debug_assert!(
                p_false_accept >= prev_fpr && p_false_reject <= prev_fnr,
                "empirical rates must be monotone over sorted candidates"
            );
        }
        last_rates = Some((p_false_accept, p_false_reject));
        let objective = (p_false_accept - (beta + alpha * p_false_reject)).abs();
        if best.is_none_or(|(b, _)| objective < b) {
            best = Some((objective, t));
        }
    }
    let (_, threshold) = best.expect("candidate list is never empty");

    Ok(CalibrationResult {
        threshold,
        alpha,
        beta,
        fnr_at_t: fnr(threshold),
        fpr_at_t: fpr(threshold),
        n_same: same.len(),
        n_diff: diff.len(),
    })
}

/// The candidate thresholds: one value strictly below every distance, the
/// midpoint of each consecutive pair of distinct distances, and the maximum
/// distance. Sorted ascending.
pub fn candidate_thresholds(sorted_same: &[f64], sorted_diff: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = sorted_same.iter().chain(sorted_diff).copied().collect();
    all.sort_unstable_by(f64::total_cmp);
    all.dedup();
    let mut candidates = Vec::with_capacity(all.len() + 1);
    candidates.push(all[0] - 1.0);
    for window in all.windows(2) {
        candidates.push((window[0] + window[1]) / 2.0);
    }
    candidates.push(all[all.len() - 1]);
    candidates
}

/// The calibrated equality operator: true iff the measured distance is at or
/// below the threshold. Infinite distances (disjoint histogram supports)
/// exceed every finite threshold.
pub fn is_equal(
    metric: &MetricDescriptor,
    calibration: &CalibrationResult,
    a: &AttributeValue,
    b: &AttributeValue,
) -> Result<bool> {
    let distance = metric.distance(a, b)?;
    Ok(distance <= calibration.threshold)
}

/// Outcome of similarity inference over a vertex set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityInference {
    /// Created edge ids, two per accepted pair (both directions).
    pub edges: Vec<EntityId>,
    /// Vertices skipped because they lack the metric's field.
    pub skipped: usize,
}

impl Store {
    /// Looks up the registered calibration for (metric, field) and applies
    /// the calibrated equality operator. Errors when no calibration has been
    /// recorded for the pair.
    pub fn check_equal(
        &self,
        metric: &str,
        field: &str,
        a: &AttributeValue,
        b: &AttributeValue,
    ) -> Result<bool> {
        let descriptor = self
            .metric(metric, field)
            .ok_or(Error::CalibrationMismatch {
                expected: alloc::format!("registered metric for ({metric}, {field})"),
                got: String::from("none"),
            })?;
        let calibration = self
            .calibration(metric, field)
            .ok_or(Error::CalibrationMismatch {
                expected: alloc::format!("calibration for ({metric}, {field})"),
                got: String::from("none"),
            })?;
        is_equal(descriptor, calibration, a, b)
    }
}

/// For every unordered pair of vertices judged equal under the calibrated
/// metric, materializes a pair of directed `IS_SIMILAR_AS_<METRIC>_ON_<FIELD>`
/// edges annotated with the measured distance. Vertices lacking the field
/// are skipped and counted, never an error. Pairs are evaluated in sorted id
/// order so results are deterministic.
pub fn infer_similarity_edges(
    store: &mut Store,
    vertex_set: &[EntityId],
    metric: &MetricDescriptor,
    calibration: &CalibrationResult,
) -> Result<SimilarityInference> {
    let mut eligible: Vec<EntityId> = Vec::new();
    let mut skipped = 0usize;
    for id in vertex_set {
        let vertex = store.vertex(*id).ok_or(Error::UnknownEntity(*id))?;
        if vertex.attributes.contains_key(&metric.field) {
            eligible.push(*id);
        } else {
            skipped += 1;
        }
    }
    eligible.sort_unstable();
    eligible.dedup();

    let edge_type = alloc::format!(
        "IS_SIMILAR_AS_{}_ON_{}",
        metric.metric.token(),
        metric.field
    );
    store.ensure_edge_schema(
        crate::schema::TypeSchema::new(edge_type.clone())
            .with_key("distance", crate::value::ValueDictionary::scalar()),
    )?;

    let mut edges = Vec::new();
    for (i, a) in eligible.iter().enumerate() {
        for b in eligible.iter().skip(i + 1) {
            let value_a = &store.vertex(*a).expect("checked above").attributes[&metric.field];
            let value_b = &store.vertex(*b).expect("checked above").attributes[&metric.field];
            let distance = metric.distance(value_a, value_b)?;
            if distance <= calibration.threshold {
                let mut attrs = alloc::collections::BTreeMap::new();
                attrs.insert("distance".into(), AttributeValue::scalar(distance));
                edges.push(store.add_edge(&edge_type, *a, *b, attrs.clone())?);
                edges.push(store.add_edge(&edge_type, *b, *a, attrs)?);
            }
        }
    }
    Ok(SimilarityInference { edges, skipped })
}
