//! Attribute values and the per-key dictionaries that constrain them.
//!
//! Every attribute key of a vertex or edge type is bound to a
//! [`ValueDictionary`] describing the set of admissible values: a quantized
//! scalar range, an enumeration, free text, a fixed-bin histogram, a
//! named-axis tensor, or a nested composite. Stored values are the
//! observables; they are validated against the dictionary on every write.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Histogram normalization tolerance: declared-normalized counts must sum to
/// 1 within this bound.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Role of one tensor axis.
///
/// The perceptual tensor volume combines three spatial axes, a chronological
/// axis, a spectral (frequency band) axis, and an axis reserved for the
/// observer; `Anonymous` covers plain embedding dimensions with no assigned
/// role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisRole {
    SpatialX,
    SpatialY,
    SpatialZ,
    Temporal,
    Spectral,
    Observer,
    Anonymous,
}

/// The shape of one value dictionary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictionaryKind {
    /// A real scalar, optionally restricted to `[range.0, range.1]` and to a
    /// quantization grid anchored at the range start (or 0 when unbounded).
    Scalar {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        range: Option<(f64, f64)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quantization: Option<f64>,
    },
    /// One token out of a fixed set.
    Enum { tokens: BTreeSet<String> },
    /// Free-form text.
    #[serde(rename = "string")]
    Text,
    /// Nonnegative counts over a fixed number of bins.
    Histogram { bins: usize },
    /// A dense tensor of fixed shape with one role per axis.
    Tensor {
        shape: Vec<usize>,
        axes: Vec<AxisRole>,
    },
    /// A nested map of dictionaries.
    Composite {
        schema: BTreeMap<String, ValueDictionary>,
    },
}

/// Constraint on the values admissible under one attribute key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueDictionary {
    #[serde(flatten)]
    pub kind: DictionaryKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
}

impl ValueDictionary {
    pub fn new(kind: DictionaryKind) -> Self {
        ValueDictionary { kind, units: None }
    }

    pub fn with_units(kind: DictionaryKind, units: impl Into<String>) -> Self {
        ValueDictionary {
            kind,
            units: Some(units.into()),
        }
    }

    /// Plain unbounded scalar.
    pub fn scalar() -> Self {
        ValueDictionary::new(DictionaryKind::Scalar {
            range: None,
            quantization: None,
        })
    }

    pub fn text() -> Self {
        ValueDictionary::new(DictionaryKind::Text)
    }

    pub fn histogram(bins: usize) -> Self {
        ValueDictionary::new(DictionaryKind::Histogram { bins })
    }

    /// Tensor with every axis anonymous.
    pub fn tensor(shape: impl Into<Vec<usize>>) -> Self {
        let shape = shape.into();
        let axes = shape.iter().map(|_| AxisRole::Anonymous).collect();
        ValueDictionary::new(DictionaryKind::Tensor { shape, axes })
    }

    pub fn tensor_with_axes(shape: impl Into<Vec<usize>>, axes: impl Into<Vec<AxisRole>>) -> Self {
        ValueDictionary::new(DictionaryKind::Tensor {
            shape: shape.into(),
            axes: axes.into(),
        })
    }

    pub fn enumeration<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ValueDictionary::new(DictionaryKind::Enum {
            tokens: tokens.into_iter().map(Into::into).collect(),
        })
    }

    pub fn composite(schema: BTreeMap<String, ValueDictionary>) -> Self {
        ValueDictionary::new(DictionaryKind::Composite { schema })
    }

    /// Structural validity of the dictionary itself.
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            DictionaryKind::Scalar {
                range,
                quantization,
            } => {
                if let Some((lo, hi)) = range {
                    if !lo.is_finite() || !hi.is_finite() || lo > hi {
                        return Err(Error::InvalidDictionary(format!(
                            "scalar range [{lo}, {hi}] is not a finite interval"
                        )));
                    }
                }
                if let Some(q) = quantization {
                    if !q.is_finite() || *q <= 0.0 {
                        return Err(Error::InvalidDictionary(format!(
                            "quantization step {q} must be positive and finite"
                        )));
                    }
                }
            }
            DictionaryKind::Enum { tokens } => {
                if tokens.is_empty() {
                    return Err(Error::InvalidDictionary(
                        "enum dictionary admits no tokens".into(),
                    ));
                }
            }
            DictionaryKind::Text => {}
            DictionaryKind::Histogram { bins } => {
                if *bins == 0 {
                    return Err(Error::InvalidDictionary(
                        "histogram must have at least one bin".into(),
                    ));
                }
            }
            DictionaryKind::Tensor { shape, axes } => {
                if shape.is_empty() || shape.contains(&0) {
                    return Err(Error::InvalidDictionary(format!(
                        "tensor shape {shape:?} must be nonempty with entries >= 1"
                    )));
                }
                if axes.len() != shape.len() {
                    return Err(Error::InvalidDictionary(format!(
                        "tensor declares {} axes for {} dimensions",
                        axes.len(),
                        shape.len()
                    )));
                }
            }
            DictionaryKind::Composite { schema } => {
                for dict in schema.values() {
                    dict.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Checks a value against this dictionary.
    pub fn check_value(&self, key: &str, value: &AttributeValue) -> Result<()> {
        let reject = |reason: String| {
            Err(Error::ValueRejected {
                key: key.into(),
                reason,
            })
        };
        match (&self.kind, value) {
            (
                DictionaryKind::Scalar {
                    range,
                    quantization,
                },
                AttributeValue::Scalar(v),
            ) => {
                if !v.is_finite() {
                    return reject(format!("scalar {v} is not finite"));
                }
                if let Some((lo, hi)) = range {
                    if v < lo || v > hi {
                        return reject(format!("scalar {v} outside range [{lo}, {hi}]"));
                    }
                }
                if let Some(q) = quantization {
                    let anchor = range.map(|(lo, _)| lo).unwrap_or(0.0);
                    let steps = (v - anchor) / q;
                    if (steps - libm::round(steps)).abs() > 1e-9 {
                        return reject(format!(
                            "scalar {v} is off the quantization grid (step {q})"
                        ));
                    }
                }
                Ok(())
            }
            (DictionaryKind::Enum { tokens }, AttributeValue::Enum(token)) => {
                if tokens.contains(token) {
                    Ok(())
                } else {
                    reject(format!("token `{token}` not in the enum dictionary"))
                }
            }
            (DictionaryKind::Text, AttributeValue::Text(_)) => Ok(()),
            (
                DictionaryKind::Histogram { bins },
                AttributeValue::Histogram { counts, normalized },
            ) => {
                if counts.len() != *bins {
                    return reject(format!(
                        "histogram has {} bins, expected {bins}",
                        counts.len()
                    ));
                }
                if counts.iter().any(|c| !c.is_finite() || *c < 0.0) {
                    return reject("histogram counts must be finite and nonnegative".into());
                }
                if *normalized {
                    let total: f64 = counts.iter().sum();
                    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
                        return reject(format!("declared-normalized histogram sums to {total}"));
                    }
                }
                Ok(())
            }
            (DictionaryKind::Tensor { shape, .. }, AttributeValue::Tensor { shape: vs, data }) => {
                if vs != shape {
                    return reject(format!(
                        "tensor shape {vs:?} does not match declared {shape:?}"
                    ));
                }
                let expected: usize = shape.iter().product();
                if data.len() != expected {
                    return reject(format!(
                        "tensor payload length {} does not equal shape volume {expected}",
                        data.len()
                    ));
                }
                if data.iter().any(|v| !v.is_finite()) {
                    return reject("tensor payload must be finite".into());
                }
                Ok(())
            }
            (DictionaryKind::Composite { schema }, AttributeValue::Composite(entries)) => {
                for (k, v) in entries {
                    match schema.get(k) {
                        Some(dict) => dict.check_value(k, v)?,
                        None => {
                            return reject(format!("composite key `{k}` not in the nested schema"))
                        }
                    }
                }
                Ok(())
            }
            (expected, got) => reject(format!(
                "expected a {} value, got {}",
                expected.kind_name(),
                got.kind_name()
            )),
        }
    }
}

impl DictionaryKind {
    pub fn kind_name(&self) -> &'static str {
        match self {
            DictionaryKind::Scalar { .. } => "scalar",
            DictionaryKind::Enum { .. } => "enum",
            DictionaryKind::Text => "string",
            DictionaryKind::Histogram { .. } => "histogram",
            DictionaryKind::Tensor { .. } => "tensor",
            DictionaryKind::Composite { .. } => "composite",
        }
    }
}

/// One stored attribute value: the observable, restricted by its key's
/// dictionary. Tensor payloads are dense row-major 64-bit floats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeValue {
    Scalar(f64),
    Enum(String),
    #[serde(rename = "string")]
    Text(String),
    Histogram {
        counts: Vec<f64>,
        #[serde(default)]
        normalized: bool,
    },
    Tensor {
        shape: Vec<usize>,
        data: Vec<f64>,
    },
    Composite(BTreeMap<String, AttributeValue>),
}

impl AttributeValue {
    pub fn scalar(v: f64) -> Self {
        AttributeValue::Scalar(v)
    }

    pub fn text(s: impl Into<String>) -> Self {
        AttributeValue::Text(s.into())
    }

    pub fn token(s: impl Into<String>) -> Self {
        AttributeValue::Enum(s.into())
    }

    pub fn histogram(counts: impl Into<Vec<f64>>) -> Self {
        AttributeValue::Histogram {
            counts: counts.into(),
            normalized: false,
        }
    }

    pub fn normalized_histogram(counts: impl Into<Vec<f64>>) -> Self {
        AttributeValue::Histogram {
            counts: counts.into(),
            normalized: true,
        }
    }

    /// 1-D tensor.
    pub fn vector(data: impl Into<Vec<f64>>) -> Self {
        let data = data.into();
        AttributeValue::Tensor {
            shape: alloc::vec![data.len()],
            data,
        }
    }

    pub fn tensor(shape: impl Into<Vec<usize>>, data: impl Into<Vec<f64>>) -> Self {
        AttributeValue::Tensor {
            shape: shape.into(),
            data: data.into(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            AttributeValue::Scalar(_) => "scalar",
            AttributeValue::Enum(_) => "enum",
            AttributeValue::Text(_) => "string",
            AttributeValue::Histogram { .. } => "histogram",
            AttributeValue::Tensor { .. } => "tensor",
            AttributeValue::Composite(_) => "composite",
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            AttributeValue::Scalar(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            AttributeValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_token(&self) -> Option<&str> {
        match self {
            AttributeValue::Enum(s) => Some(s),
            _ => None,
        }
    }
}
