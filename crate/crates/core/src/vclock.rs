//! Vector clocks and the happens-before partial order over them.

use alloc::collections::BTreeMap;
use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::value::AttributeValue;
use crate::{Error, Result};

/// A vector clock: one nonnegative counter per process token.
///
/// Absent processes count as zero, so clocks over different process sets
/// remain comparable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorClock {
    entries: BTreeMap<String, u64>,
}

impl VectorClock {
    pub fn new() -> Self {
        VectorClock::default()
    }

    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        VectorClock {
            entries: entries.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    pub fn get(&self, process: &str) -> u64 {
        self.entries.get(process).copied().unwrap_or(0)
    }

    pub fn tick(&mut self, process: impl Into<String>) {
        *self.entries.entry(process.into()).or_insert(0) += 1;
    }

    /// Componentwise maximum, as applied on message receipt.
    pub fn merge(&mut self, other: &VectorClock) {
        for (process, counter) in &other.entries {
            let entry = self.entries.entry(process.clone()).or_insert(0);
            *entry = (*entry).max(*counter);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// True iff `self ≤ other` componentwise with at least one strict
    /// inequality: the happens-before relation.
    pub fn happens_before(&self, other: &VectorClock) -> bool {
        let mut strictly_less = false;
        for (process, counter) in &self.entries {
            let theirs = other.get(process);
            if *counter > theirs {
                return false;
            }
            if *counter < theirs {
                strictly_less = true;
            }
        }
        for (process, counter) in &other.entries {
            if self.get(process) < *counter {
                strictly_less = true;
            }
        }
        strictly_less
    }

    /// Neither clock happens before the other and they are not equal.
    pub fn concurrent_with(&self, other: &VectorClock) -> bool {
        !self.happens_before(other) && !other.happens_before(self) && self != other
    }

    /// Encodes the clock as a composite attribute of scalar counters, the
    /// form in which clocks are stored on vertices.
    pub fn to_attribute(&self) -> AttributeValue {
        AttributeValue::Composite(
            self.entries
                .iter()
                .map(|(k, v)| (k.clone(), AttributeValue::Scalar(*v as f64)))
                .collect(),
        )
    }

    /// Decodes a clock from a composite attribute of scalar counters.
    /// Counters must be nonnegative integers.
    pub fn from_attribute(value: &AttributeValue) -> Result<Self> {
        let entries = match value {
            AttributeValue::Composite(map) => map,
            other => {
                return Err(Error::InvalidAttribute {
                    key: String::new(),
                    reason: alloc::format!(
                        "vector clock must be a composite of scalar counters, got {}",
                        other.kind_name()
                    ),
                })
            }
        };
        let mut clock = VectorClock::new();
        for (process, counter) in entries {
            let v = counter.as_scalar().ok_or_else(|| Error::InvalidAttribute {
                key: process.clone(),
                reason: "clock counter must be a scalar".into(),
            })?;
            if !v.is_finite() || v < 0.0 || libm::floor(v) != v {
                return Err(Error::InvalidAttribute {
                    key: process.clone(),
                    reason: alloc::format!("clock counter {v} is not a nonnegative integer"),
                });
            }
            clock.entries.insert(process.clone(), v as u64);
        }
        Ok(clock)
    }
}

impl PartialOrd for VectorClock {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        use core::cmp::Ordering;
        if self == other {
            Some(Ordering::Equal)
        } else if self.happens_before(other) {
            Some(Ordering::Less)
        } else if other.happens_before(self) {
            Some(Ordering::Greater)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vc(pairs: &[(&str, u64)]) -> VectorClock {
        VectorClock::from_entries(pairs.iter().map(|(k, v)| (*k, *v)))
    }

    #[test]
    fn componentwise_dominance() {
        let a = vc(&[("p", 1), ("q", 0)]);
        let b = vc(&[("p", 2), ("q", 1)]);
        assert!(a.happens_before(&b));
        assert!(!b.happens_before(&a));
    }

    #[test]
    fn incomparable_clocks_are_concurrent() {
        let a = vc(&[("p", 1), ("q", 0)]);
        let b = vc(&[("p", 0), ("q", 1)]);
        assert!(!a.happens_before(&b));
        assert!(!b.happens_before(&a));
        assert!(a.concurrent_with(&b));
        assert_eq!(a.partial_cmp(&b), None);
    }

    #[test]
    fn equal_clocks_are_not_strictly_before() {
        let a = vc(&[("p", 3)]);
        assert!(!a.happens_before(&a.clone()));
        assert_eq!(a.partial_cmp(&a.clone()), Some(core::cmp::Ordering::Equal));
    }

    #[test]
    fn absent_processes_count_as_zero() {
        let a = vc(&[("p", 1)]);
        let b = vc(&[("p", 1), ("q", 2)]);
        assert!(a.happens_before(&b));
    }

    #[test]
    fn merge_takes_componentwise_max() {
        let mut a = vc(&[("p", 4), ("q", 1)]);
        a.merge(&vc(&[("q", 3), ("r", 2)]));
        assert_eq!(a, vc(&[("p", 4), ("q", 3), ("r", 2)]));
    }

    #[test]
    fn attribute_roundtrip() {
        let a = vc(&[("p", 1), ("q", 7)]);
        let attr = a.to_attribute();
        assert_eq!(VectorClock::from_attribute(&attr).unwrap(), a);
    }

    #[test]
    fn attribute_decoding_rejects_non_integers() {
        let mut map = alloc::collections::BTreeMap::new();
        map.insert("p".into(), AttributeValue::Scalar(1.5));
        assert!(VectorClock::from_attribute(&AttributeValue::Composite(map)).is_err());
        assert!(VectorClock::from_attribute(&AttributeValue::scalar(1.0)).is_err());
    }
}
