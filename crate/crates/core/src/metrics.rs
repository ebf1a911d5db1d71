//! Distance metrics over attribute values.
//!
//! Every dictionary kind admits at least one metric; schema registration
//! rejects dictionaries for which [`admissible_metrics`] comes back empty.
//! Histogram overlap uses the Bhattacharyya coefficient
//! `BC(p, q) = Σ √(p(x)·q(x))` and its negative log as the distance; zero
//! overlap maps to an infinite distance, never a floating overflow.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::value::{AttributeValue, AxisRole, DictionaryKind, ValueDictionary};
use crate::{Error, Result};

/// The registered metric functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricId {
    /// Histogram overlap distance `-ln(BC)`.
    Bhattacharyya,
    /// L2 norm of the difference; absolute difference on scalars.
    Euclidean,
    /// `1 - cos(a, b)`; undefined for zero vectors.
    CosineDistance,
    /// Minimal edit count between strings.
    Levenshtein,
    /// Dynamic-time-warping alignment cost over the temporal axis.
    Dtw,
    /// Exact-match metric on enum tokens: 0 when equal, 1 otherwise.
    Discrete,
}

impl MetricId {
    pub fn token(self) -> &'static str {
        match self {
            MetricId::Bhattacharyya => "bhattacharyya",
            MetricId::Euclidean => "euclidean",
            MetricId::CosineDistance => "cosine_distance",
            MetricId::Levenshtein => "levenshtein",
            MetricId::Dtw => "dtw",
            MetricId::Discrete => "discrete",
        }
    }
}

impl core::str::FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bhattacharyya" => Ok(MetricId::Bhattacharyya),
            "euclidean" => Ok(MetricId::Euclidean),
            "cosine_distance" => Ok(MetricId::CosineDistance),
            "levenshtein" => Ok(MetricId::Levenshtein),
            "dtw" => Ok(MetricId::Dtw),
            "discrete" => Ok(MetricId::Discrete),
            other => Err(Error::MetricNotAdmissible {
                metric: other.into(),
                field: String::new(),
            }),
        }
    }
}

impl core::fmt::Display for MetricId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.token())
    }
}

/// Extra parameters a metric may take.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricParams {
    /// Sakoe-Chiba band half-width for DTW; unrestricted when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    /// Index of the temporal axis for DTW; defaults to the first axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temporal_axis: Option<usize>,
}

/// Binds a metric to the attribute key it measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDescriptor {
    pub metric: MetricId,
    pub field: String,
    #[serde(default)]
    pub params: MetricParams,
}

impl MetricDescriptor {
    pub fn new(metric: MetricId, field: impl Into<String>) -> Self {
        MetricDescriptor {
            metric,
            field: field.into(),
            params: MetricParams::default(),
        }
    }

    /// Whether this metric is admissible for values under the dictionary.
    pub fn admissible_for(&self, dict: &ValueDictionary) -> bool {
        admissible_metrics(dict).contains(&self.metric)
    }

    /// Evaluates the metric on two values of the bound field.
    pub fn distance(&self, a: &AttributeValue, b: &AttributeValue) -> Result<f64> {
        distance(self, a, b)
    }
}

/// The metrics admissible for a dictionary. A composite admits the union of
/// its leaves' metrics, so a composite with no metric-admitting leaf admits
/// nothing and is rejected at schema registration.
pub fn admissible_metrics(dict: &ValueDictionary) -> Vec<MetricId> {
    match &dict.kind {
        DictionaryKind::Scalar { .. } => vec![MetricId::Euclidean],
        DictionaryKind::Enum { .. } => vec![MetricId::Discrete],
        DictionaryKind::Text => vec![MetricId::Levenshtein],
        DictionaryKind::Histogram { .. } => vec![MetricId::Bhattacharyya],
        DictionaryKind::Tensor { axes, .. } => {
            let mut out = vec![MetricId::Euclidean, MetricId::CosineDistance];
            let temporal = axes.iter().filter(|a| **a == AxisRole::Temporal).count();
            if temporal == 1 {
                out.push(MetricId::Dtw);
            }
            out
        }
        DictionaryKind::Composite { schema } => {
            let mut out: Vec<MetricId> = schema.values().flat_map(admissible_metrics).collect();
            out.sort();
            out.dedup();
            out
        }
    }
}

/// Bhattacharyya coefficient `Σ √(p(x)·q(x))` over histograms with matching
/// bin counts. Counts are normalized by their totals first, so raw counts and
/// probability vectors are both accepted. The result is clamped to [0, 1].
pub fn bhattacharyya_coefficient(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::BinCountMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let mass = |h: &[f64]| -> Result<f64> {
        if h.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::MetricKindMismatch {
                expected: "nonnegative finite histogram counts",
                got: "invalid count",
            });
        }
        let total: f64 = h.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroMassHistogram);
        }
        Ok(total)
    };
    let (mp, mq) = (mass(p)?, mass(q)?);
    let bc: f64 = p
        .iter()
        .zip(q)
        .map(|(a, b)| libm::sqrt((a / mp) * (b / mq)))
        .sum();
    Ok(bc.clamp(0.0, 1.0))
}

/// Bhattacharyya distance `-ln(BC)`. Disjoint supports give `+∞`.
pub fn bhattacharyya_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    let bc = bhattacharyya_coefficient(p, q)?;
    if bc == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(-libm::log(bc))
    }
}

/// L2 norm of the elementwise difference.
pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch);
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(libm::sqrt(sum))
}

/// `1 - cosine similarity`; errors on zero vectors.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = libm::sqrt(a.iter().map(|x| x * x).sum());
    let nb = libm::sqrt(b.iter().map(|x| x * x).sum());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((1.0 - dot / (na * nb)).clamp(0.0, 2.0))
}

/// Minimal number of single-character insertions, deletions, and
/// substitutions turning `a` into `b`.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let substitute = prev[j] + usize::from(ca != cb);
            cur[j + 1] = substitute.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Classic DTW alignment cost between two frame sequences with the symmetric
/// step pattern (match/insert/delete, unit weights) and euclidean frame cost.
/// The optional Sakoe-Chiba half-width is widened to at least the length
/// difference so an alignment always exists.
pub fn dtw(frames_a: &[Vec<f64>], frames_b: &[Vec<f64>], window: Option<usize>) -> Result<f64> {
    let (n, m) = (frames_a.len(), frames_b.len());
    if n == 0 || m == 0 {
        return Err(Error::EmptySequence);
    }
    let band = window.map(|w| w.max(n.abs_diff(m))).unwrap_or(usize::MAX);

    let mut prev = vec![f64::INFINITY; m + 1];
    let mut cur = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for i in 1..=n {
        cur.fill(f64::INFINITY);
        let lo = if i > band { i - band } else { 1 };
        let hi = m.min(i.saturating_add(band));
        for j in lo..=hi {
            let cost = euclidean(&frames_a[i - 1], &frames_b[j - 1])?;
            let best = prev[j].min(cur[j - 1]).min(prev[j - 1]);
            cur[j] = cost + best;
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m])
}

/// Splits a dense row-major tensor into frames along `temporal_axis`.
pub fn tensor_frames(shape: &[usize], data: &[f64], temporal_axis: usize) -> Result<Vec<Vec<f64>>> {
    if temporal_axis >= shape.len() {
        return Err(Error::ShapeMismatch);
    }
    let volume: usize = shape.iter().product();
    if data.len() != volume {
        return Err(Error::ShapeMismatch);
    }
    let steps = shape[temporal_axis];
    // row-major strides
    let mut stride = vec![1usize; shape.len()];
    for d in (0..shape.len().saturating_sub(1)).rev() {
        stride[d] = stride[d + 1] * shape[d + 1];
    }
    let outer: usize = shape[..temporal_axis].iter().product();
    let inner: usize = shape[temporal_axis + 1..].iter().product();
    let mut frames = Vec::with_capacity(steps);
    for t in 0..steps {
        let mut frame = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let base = o * stride[temporal_axis] * steps + t * stride[temporal_axis];
            frame.extend_from_slice(&data[base..base + inner]);
        }
        frames.push(frame);
    }
    Ok(frames)
}

/// Evaluates a metric descriptor on two attribute values, checking that the
/// value kinds match the metric's admissible kind.
pub fn distance(
    descriptor: &MetricDescriptor,
    a: &AttributeValue,
    b: &AttributeValue,
) -> Result<f64> {
    let mismatch = |expected: &'static str, got: &AttributeValue| Error::MetricKindMismatch {
        expected,
        got: got.kind_name(),
    };
    match descriptor.metric {
        MetricId::Bhattacharyya => match (a, b) {
            (
                AttributeValue::Histogram { counts: p, .. },
                AttributeValue::Histogram { counts: q, .. },
            ) => bhattacharyya_distance(p, q),
            (AttributeValue::Histogram { .. }, other) | (other, _) => {
                Err(mismatch("histogram", other))
            }
        },
        MetricId::Euclidean => match (a, b) {
            (AttributeValue::Scalar(x), AttributeValue::Scalar(y)) => Ok((x - y).abs()),
            (
                AttributeValue::Tensor {
                    shape: sa,
                    data: da,
                },
                AttributeValue::Tensor {
                    shape: sb,
                    data: db,
                },
            ) => {
                if sa != sb {
                    return Err(Error::ShapeMismatch);
                }
                euclidean(da, db)
            }
            (AttributeValue::Tensor { .. } | AttributeValue::Scalar(_), other) | (other, _) => {
                Err(mismatch("tensor or scalar", other))
            }
        },
        MetricId::CosineDistance => match (a, b) {
            (
                AttributeValue::Tensor {
                    shape: sa,
                    data: da,
                },
                AttributeValue::Tensor {
                    shape: sb,
                    data: db,
                },
            ) => {
                if sa != sb {
                    return Err(Error::ShapeMismatch);
                }
                cosine_distance(da, db)
            }
            (AttributeValue::Tensor { .. }, other) | (other, _) => Err(mismatch("tensor", other)),
        },
        MetricId::Levenshtein => match (a, b) {
            (AttributeValue::Text(x), AttributeValue::Text(y)) => Ok(levenshtein(x, y) as f64),
            (AttributeValue::Text(_), other) | (other, _) => Err(mismatch("string", other)),
        },
        MetricId::Dtw => match (a, b) {
            (
                AttributeValue::Tensor {
                    shape: sa,
                    data: da,
                },
                AttributeValue::Tensor {
                    shape: sb,
                    data: db,
                },
            ) => {
                let axis = descriptor.params.temporal_axis.unwrap_or(0);
                let fa = tensor_frames(sa, da, axis)?;
                let fb = tensor_frames(sb, db, axis)?;
                if fa.first().map(Vec::len) != fb.first().map(Vec::len) {
                    return Err(Error::ShapeMismatch);
                }
                dtw(&fa, &fb, descriptor.params.window)
            }
            (AttributeValue::Tensor { .. }, other) | (other, _) => Err(mismatch("tensor", other)),
        },
        MetricId::Discrete => match (a, b) {
            (AttributeValue::Enum(x), AttributeValue::Enum(y)) => {
                Ok(if x == y { 0.0 } else { 1.0 })
            }
            (AttributeValue::Enum(_), other) | (other, _) => Err(mismatch("enum", other)),
        },
    }
}
