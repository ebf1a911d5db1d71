//! Per-type schemas: the allowed key set of a vertex or edge type and the
//! dictionary restricting each key's values.

use alloc::collections::BTreeMap;
use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::metrics::admissible_metrics;
use crate::value::{AttributeValue, ValueDictionary};
use crate::{Error, Result};

/// Schema of one vertex or edge type.
///
/// An empty key set is legal (a pure relationship type carries no
/// attributes). Every declared dictionary must admit at least one metric;
/// registration walks composite dictionaries exhaustively and rejects any
/// key whose dictionary tree contains no metric-admitting leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeSchema {
    pub type_name: String,
    #[serde(default)]
    pub keys: BTreeMap<String, ValueDictionary>,
}

impl TypeSchema {
    pub fn new(type_name: impl Into<String>) -> Self {
        TypeSchema {
            type_name: type_name.into(),
            keys: BTreeMap::new(),
        }
    }

    pub fn with_key(mut self, key: impl Into<String>, dict: ValueDictionary) -> Self {
        self.keys.insert(key.into(), dict);
        self
    }

    /// Registration-time validity: structural dictionary checks plus the
    /// metric-admissibility requirement on every key.
    pub fn validate(&self) -> Result<()> {
        for (key, dict) in &self.keys {
            dict.validate()?;
            if admissible_metrics(dict).is_empty() {
                return Err(Error::NoAdmissibleMetric {
                    type_name: self.type_name.clone(),
                    key: key.clone(),
                });
            }
        }
        Ok(())
    }

    /// Validates one attribute write against this schema.
    pub fn check_attribute(&self, key: &str, value: &AttributeValue) -> Result<()> {
        match self.keys.get(key) {
            Some(dict) => dict.check_value(key, value),
            None => Err(Error::UnknownKey {
                type_name: self.type_name.clone(),
                key: key.into(),
            }),
        }
    }

    /// Validates a whole attribute map.
    pub fn check_attributes<'a>(
        &self,
        attributes: impl IntoIterator<Item = (&'a String, &'a AttributeValue)>,
    ) -> Result<()> {
        for (key, value) in attributes {
            self.check_attribute(key, value)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::DictionaryKind;
    use alloc::vec;

    #[test]
    fn minimal_embedding_schema_registers() {
        let schema =
            TypeSchema::new("Face").with_key("embedding", ValueDictionary::tensor(vec![128]));
        assert!(schema.validate().is_ok());
    }

    #[test]
    fn empty_key_set_is_legal() {
        assert!(TypeSchema::new("OWNS").validate().is_ok());
    }

    #[test]
    fn composite_without_admitting_leaf_rejected() {
        // Exhaustive walk of the dictionary tree: a composite nesting only an
        // empty composite has no leaf admitting any metric.
        let inner = ValueDictionary::composite(BTreeMap::new());
        let mut schema_map = BTreeMap::new();
        schema_map.insert("nested".into(), inner);
        let outer = ValueDictionary::composite(schema_map);
        let schema = TypeSchema::new("Bad").with_key("payload", outer);
        assert_eq!(
            schema.validate(),
            Err(Error::NoAdmissibleMetric {
                type_name: "Bad".into(),
                key: "payload".into(),
            })
        );
    }

    #[test]
    fn composite_with_one_admitting_leaf_accepted() {
        let mut inner_map = BTreeMap::new();
        inner_map.insert("depth".into(), ValueDictionary::scalar());
        let mut schema_map = BTreeMap::new();
        schema_map.insert("empty".into(), ValueDictionary::composite(BTreeMap::new()));
        schema_map.insert("inner".into(), ValueDictionary::composite(inner_map));
        let schema =
            TypeSchema::new("Ok").with_key("payload", ValueDictionary::composite(schema_map));
        assert!(schema.validate().is_ok());
    }

    #[test]
    fn structural_dictionary_errors_surface() {
        let schema = TypeSchema::new("T").with_key(
            "q",
            ValueDictionary::new(DictionaryKind::Scalar {
                range: Some((5.0, 1.0)),
                quantization: None,
            }),
        );
        assert!(matches!(
            schema.validate(),
            Err(Error::InvalidDictionary(_))
        ));
    }

    #[test]
    fn unknown_key_rejected_on_write() {
        let schema =
            TypeSchema::new("Face").with_key("embedding", ValueDictionary::tensor(vec![4]));
        assert!(matches!(
            schema.check_attribute("age", &AttributeValue::scalar(3.0)),
            Err(Error::UnknownKey { .. })
        ));
    }
}
