//! Flow scenario JSON: the document driving Kirchhoff checks and max-flow.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use ngf_core::flow::{CargoType, FlowAssignment};
use ngf_core::EntityId;

use crate::Result;

/// One edge entry in a scenario: measured flux and optional capacity bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioEdge {
    pub edge_id: EntityId,
    #[serde(default)]
    pub flux: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<f64>,
}

/// A flow scenario: cargo, per-edge flux/capacity, and the boundary sets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowScenario {
    pub cargo: CargoType,
    pub edges: Vec<ScenarioEdge>,
    #[serde(default)]
    pub sources: BTreeSet<EntityId>,
    #[serde(default)]
    pub sinks: BTreeSet<EntityId>,
}

impl FlowScenario {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Ok(serde_json::from_slice(&bytes)?)
    }

    /// The assignment described by this scenario.
    pub fn assignment(&self) -> FlowAssignment {
        let mut assignment = FlowAssignment::new(self.cargo.clone());
        for edge in &self.edges {
            assignment.flux.insert(edge.edge_id, edge.flux);
            if let Some(capacity) = edge.capacity {
                assignment.capacities.insert(edge.edge_id, capacity);
            }
        }
        assignment
    }

    /// The capacity map for max-flow; edges without a declared capacity are
    /// excluded from the network.
    pub fn capacities(&self) -> BTreeMap<EntityId, f64> {
        self.edges
            .iter()
            .filter_map(|e| e.capacity.map(|c| (e.edge_id, c)))
            .collect()
    }
}
