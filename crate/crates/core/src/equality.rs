//! Kernel-smoothed equality: the expansion from exact comparison to
//! observer-scoped, Gaussian-blurred comparison.
//!
//! Exact equality is the degenerate case of a Gaussian kernel with zero
//! standard deviation. A comparison convolves both observables' masked
//! fields with the kernel, then measures the normalized L2 discrepancy per
//! field; the score aggregates fields with max (the strictest combiner).

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::graph::{Store, Vertex};
use crate::id::EntityId;
use crate::value::AttributeValue;
use crate::{Error, Result};

/// Guard against 0/0 in the normalized discrepancy.
const MACHINE_FLOOR: f64 = f64::MIN_POSITIVE;

/// The three senses in which two observables may be declared equal. The
/// token affects edge typing and provenance only, never the numeric
/// comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EqualityType {
    /// Corporal continuity observed between the two (tracking pipelines).
    Embodiment,
    /// Same behavior under the same input and context.
    Functional,
    /// Equality of a subset of observable attributes.
    Representation,
}

impl EqualityType {
    pub fn token(self) -> &'static str {
        match self {
            EqualityType::Embodiment => "embodiment",
            EqualityType::Functional => "functional",
            EqualityType::Representation => "representation",
        }
    }
}

impl core::str::FromStr for EqualityType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "embodiment" => Ok(EqualityType::Embodiment),
            "functional" => Ok(EqualityType::Functional),
            "representation" => Ok(EqualityType::Representation),
            other => Err(Error::InvalidAttribute {
                key: "equality_type".into(),
                reason: format!("unknown equality type `{other}`"),
            }),
        }
    }
}

/// The fields an observer can access, under the observer's id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObserverScope {
    pub observer_id: String,
    pub field_mask: BTreeSet<String>,
}

impl ObserverScope {
    pub fn new<I, S>(observer_id: impl Into<String>, mask: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let scope = ObserverScope {
            observer_id: observer_id.into(),
            field_mask: mask.into_iter().map(Into::into).collect(),
        };
        scope.validate()?;
        Ok(scope)
    }

    pub fn validate(&self) -> Result<()> {
        if self.field_mask.is_empty() {
            return Err(Error::EmptyObserverMask);
        }
        Ok(())
    }
}

/// Comparison kernel: exact (Dirac) or Gaussian with per-axis sigma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Dirac,
    /// Per-axis standard deviations; a single entry broadcasts to all axes.
    /// Sigma zero degenerates to Dirac.
    Gaussian {
        sigma: Vec<f64>,
    },
}

impl KernelKind {
    pub fn gaussian(sigma: f64) -> Self {
        KernelKind::Gaussian {
            sigma: alloc::vec![sigma],
        }
    }

    fn sigma_for_axis(&self, axis: usize, axis_count: usize) -> Result<f64> {
        match self {
            KernelKind::Dirac => Ok(0.0),
            KernelKind::Gaussian { sigma } => {
                if sigma.len() == 1 {
                    Ok(sigma[0])
                } else if sigma.len() == axis_count {
                    Ok(sigma[axis])
                } else {
                    Err(Error::ShapeMismatch)
                }
            }
        }
    }

    /// Short token recording the kernel parameters on derived edges.
    pub fn token(&self) -> String {
        match self {
            KernelKind::Dirac => "dirac".into(),
            KernelKind::Gaussian { sigma } => {
                let parts: Vec<String> = sigma.iter().map(|s| format!("{s}")).collect();
                format!("gaussian:{}", parts.join(","))
            }
        }
    }
}

/// A comparison kernel bound to an equality type and an observer scope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDescriptor {
    pub kind: KernelKind,
    pub equality_type: EqualityType,
    pub observer: ObserverScope,
}

impl KernelDescriptor {
    pub fn new(
        kind: KernelKind,
        equality_type: EqualityType,
        observer: ObserverScope,
    ) -> Result<Self> {
        let descriptor = KernelDescriptor {
            kind,
            equality_type,
            observer,
        };
        descriptor.validate()?;
        Ok(descriptor)
    }

    pub fn validate(&self) -> Result<()> {
        if let KernelKind::Gaussian { sigma } = &self.kind {
            if sigma.is_empty() || sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
                return Err(Error::NegativeSigma);
            }
        }
        self.observer.validate()
    }
}

/// Outcome of one kernel comparison: the truth value and the [0, 1] score it
/// was derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualityJudgement {
    pub verdict: bool,
    pub score: f64,
    pub kernel: KernelDescriptor,
    pub epsilon: f64,
}

/// Discretized Gaussian: radius `ceil(3σ)`, weights renormalized to unit
/// mass. Sigma zero yields the identity kernel.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::NegativeSigma);
    }
    if sigma == 0.0 {
        return Ok(alloc::vec![1.0]);
    }
    let radius = libm::ceil(3.0 * sigma) as i64;
    let mut weights = Vec::with_capacity((2 * radius + 1) as usize);
    for k in -radius..=radius {
        let x = k as f64;
        weights.push(libm::exp(-(x * x) / (2.0 * sigma * sigma)));
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok(weights)
}

/// Symmetric reflection fold of an index into [0, n): out-of-range indices
/// mirror back in with the edge sample repeated, which preserves total mass
/// under symmetric kernels.
fn reflect(index: i64, n: usize) -> usize {
    let period = 2 * n as i64;
    let m = index.rem_euclid(period);
    if m < n as i64 {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

/// 1-D convolution with reflection padding.
fn convolve_reflect(signal: &[f64], kernel: &[f64]) -> Vec<f64> {
    let n = signal.len();
    let radius = (kernel.len() / 2) as i64;
    let mut out = Vec::with_capacity(n);
    for i in 0..n as i64 {
        let mut acc = 0.0;
        for (k, w) in kernel.iter().enumerate() {
            let offset = k as i64 - radius;
            acc += w * signal[reflect(i - offset, n)];
        }
        out.push(acc);
    }
    out
}

/// Separable per-axis Gaussian smoothing of a dense row-major tensor.
pub fn smooth_tensor(shape: &[usize], data: &[f64], kind: &KernelKind) -> Result<Vec<f64>> {
    let mut current = data.to_vec();
    for axis in 0..shape.len() {
        let sigma = kind.sigma_for_axis(axis, shape.len())?;
        if sigma == 0.0 {
            continue;
        }
        let kernel = gaussian_kernel(sigma)?;
        current = convolve_axis(shape, &current, axis, &kernel);
    }
    Ok(current)
}

fn convolve_axis(shape: &[usize], data: &[f64], axis: usize, kernel: &[f64]) -> Vec<f64> {
    let n = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out = data.to_vec();
    let mut lane = Vec::with_capacity(n);
    for o in 0..outer {
        for i in 0..inner {
            lane.clear();
            for t in 0..n {
                lane.push(data[o * n * inner + t * inner + i]);
            }
            let smoothed = convolve_reflect(&lane, kernel);
            for (t, v) in smoothed.iter().enumerate() {
                out[o * n * inner + t * inner + i] = *v;
            }
        }
    }
    out
}

fn l2_norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

/// Normalized L2 discrepancy `‖a − b‖₂ / (‖a‖₂ + ‖b‖₂ + floor)`.
fn normalized_discrepancy(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    libm::sqrt(diff) / (l2_norm(a) + l2_norm(b) + MACHINE_FLOOR)
}

/// Per-field discrepancy after kernel smoothing. Non-numeric fields compare
/// exactly: discrepancy 0 when equal, 1 otherwise.
fn field_discrepancy(
    key: &str,
    a: &AttributeValue,
    b: &AttributeValue,
    kind: &KernelKind,
) -> Result<f64> {
    match (a, b) {
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
            let sa_smooth = smooth_tensor(sa, da, kind)?;
            let sb_smooth = smooth_tensor(sb, db, kind)?;
            Ok(normalized_discrepancy(&sa_smooth, &sb_smooth))
        }
        (
            AttributeValue::Histogram { counts: ca, .. },
            AttributeValue::Histogram { counts: cb, .. },
        ) => {
            if ca.len() != cb.len() {
                return Err(Error::BinCountMismatch {
                    left: ca.len(),
                    right: cb.len(),
                });
            }
            let shape = [ca.len()];
            let ca_smooth = smooth_tensor(&shape, ca, kind)?;
            let cb_smooth = smooth_tensor(&shape, cb, kind)?;
            Ok(normalized_discrepancy(&ca_smooth, &cb_smooth))
        }
        (AttributeValue::Scalar(x), AttributeValue::Scalar(y)) => {
            Ok((x - y).abs() / (x.abs() + y.abs() + MACHINE_FLOOR))
        }
        _ => {
            let _ = key;
            Ok(if a == b { 0.0 } else { 1.0 })
        }
    }
}

fn masked_compare(
    a: &Vertex,
    b: &Vertex,
    mask: &BTreeSet<String>,
    kernel: &KernelDescriptor,
    epsilon: f64,
) -> Result<EqualityJudgement> {
    if mask.is_empty() {
        return Err(Error::EmptyObserverMask);
    }
    let mut worst = 0.0f64;
    for key in mask {
        let value_a = a
            .attributes
            .get(key)
            .ok_or_else(|| Error::MissingAttribute {
                vertex: a.id,
                key: key.clone(),
            })?;
        let value_b = b
            .attributes
            .get(key)
            .ok_or_else(|| Error::MissingAttribute {
                vertex: b.id,
                key: key.clone(),
            })?;
        let discrepancy = field_discrepancy(key, value_a, value_b, &kernel.kind)?;
        worst = worst.max(discrepancy);
    }
    let score = 1.0 - worst;
    Ok(EqualityJudgement {
        verdict: score >= 1.0 - epsilon,
        score,
        kernel: kernel.clone(),
        epsilon,
    })
}

/// Compares two vertices through the kernel's observer scope.
///
/// With a Dirac kernel and epsilon 0 the verdict is exact equality of all
/// masked fields.
pub fn kernel_compare(
    a: &Vertex,
    b: &Vertex,
    kernel: &KernelDescriptor,
    epsilon: f64,
) -> Result<EqualityJudgement> {
    kernel.validate()?;
    masked_compare(a, b, &kernel.observer.field_mask, kernel, epsilon)
}

/// Cross-observer comparison under a jointly agreed kernel.
///
/// The two masks must be identical as sets (the functional-overlap
/// precondition); `a` is read through `obs_x` and `b` through `obs_y`. The
/// returned judgement's kernel carries a joint observer scope naming both
/// ids.
pub fn kernel_compare_cross_observer(
    a: &Vertex,
    b: &Vertex,
    kernel: &KernelDescriptor,
    obs_x: &ObserverScope,
    obs_y: &ObserverScope,
    epsilon: f64,
) -> Result<EqualityJudgement> {
    obs_x.validate()?;
    obs_y.validate()?;
    if obs_x.field_mask != obs_y.field_mask {
        return Err(Error::MaskMismatch);
    }
    let joint = KernelDescriptor {
        kind: kernel.kind.clone(),
        equality_type: kernel.equality_type,
        observer: ObserverScope {
            observer_id: if obs_x.observer_id == obs_y.observer_id {
                obs_x.observer_id.clone()
            } else {
                format!("{}+{}", obs_x.observer_id, obs_y.observer_id)
            },
            field_mask: obs_x.field_mask.clone(),
        },
    };
    joint.validate()?;
    masked_compare(a, b, &obs_x.field_mask, &joint, epsilon)
}

/// Materializes an `EQUALS_<type>` edge from a true judgement, carrying the
/// score, kernel parameters, and observer id.
pub fn annotate_equality_edge(
    store: &mut Store,
    a: EntityId,
    b: EntityId,
    judgement: &EqualityJudgement,
) -> Result<EntityId> {
    if !judgement.verdict {
        return Err(Error::VerdictFalse);
    }
    let edge_type = format!("EQUALS_{}", judgement.kernel.equality_type.token());
    store.ensure_edge_schema(
        crate::schema::TypeSchema::new(edge_type.clone())
            .with_key("score", crate::value::ValueDictionary::scalar())
            .with_key("epsilon", crate::value::ValueDictionary::scalar())
            .with_key("kernel", crate::value::ValueDictionary::text())
            .with_key("observer", crate::value::ValueDictionary::text()),
    )?;
    let mut attributes = alloc::collections::BTreeMap::new();
    attributes.insert("score".into(), AttributeValue::scalar(judgement.score));
    attributes.insert("epsilon".into(), AttributeValue::scalar(judgement.epsilon));
    attributes.insert(
        "kernel".into(),
        AttributeValue::text(judgement.kernel.kind.token()),
    );
    attributes.insert(
        "observer".into(),
        AttributeValue::text(judgement.kernel.observer.observer_id.clone()),
    );
    store.add_edge(&edge_type, a, b, attributes)
}
