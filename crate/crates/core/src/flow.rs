//! Typed flows over the multigraph: per-cargo flux assignments, Kirchhoff
//! conservation checking, capacity bounds, and max-flow feasibility.
//!
//! Flux is stored per concrete edge. Superposed edges must be projected
//! through the expected-adjacency view before flow analysis; flow over
//! superpositions is undefined here. Assignments of distinct cargo types
//! never interact.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::graph::{SchemaSide, Store};
use crate::id::EntityId;
use crate::schema::TypeSchema;
use crate::value::{AttributeValue, ValueDictionary};
use crate::{Error, Result};

/// Conservation tolerance: interior vertices must balance within this bound.
pub const CONSERVATION_TOLERANCE: f64 = 1e-9;

/// A transportable observable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CargoType {
    pub cargo_id: String,
    pub unit: String,
}

impl CargoType {
    pub fn new(cargo_id: impl Into<String>, unit: impl Into<String>) -> Self {
        CargoType {
            cargo_id: cargo_id.into(),
            unit: unit.into(),
        }
    }
}

/// Per-cargo flux over edges. Flux is signed: negative values flow against
/// the edge direction. Capacities, where present, bound `|flux|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowAssignment {
    pub cargo: CargoType,
    pub flux: BTreeMap<EntityId, f64>,
    #[serde(default)]
    pub capacities: BTreeMap<EntityId, f64>,
}

impl FlowAssignment {
    pub fn new(cargo: CargoType) -> Self {
        FlowAssignment {
            cargo,
            flux: BTreeMap::new(),
            capacities: BTreeMap::new(),
        }
    }

    pub fn with_flux(mut self, edge: EntityId, flux: f64) -> Self {
        self.flux.insert(edge, flux);
        self
    }

    pub fn with_capacity(mut self, edge: EntityId, capacity: f64) -> Self {
        self.capacities.insert(edge, capacity);
        self
    }
}

/// Topology kinds for generated scaffolds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    /// Orthogonal lattice with all axis-neighbor connections materialized in
    /// both directions.
    DenseLattice { extents: Vec<usize> },
    /// Empty scaffold for caller-driven edges.
    Sparse,
}

/// One conservation violation: a vertex whose net flux does not balance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationViolation {
    pub vertex: EntityId,
    pub residual: f64,
}

/// One capacity violation: flux magnitude exceeding the declared bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityViolation {
    pub edge: EntityId,
    pub flux: f64,
    pub capacity: f64,
}

/// Outcome of a Kirchhoff check. Violations are report content, not errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KirchhoffReport {
    pub passed: bool,
    pub conservation: Vec<ConservationViolation>,
    pub capacity: Vec<CapacityViolation>,
}

/// Net flux at a vertex: inbound minus outbound, with signed fluxes handled
/// by edge orientation.
pub fn divergence(store: &Store, assignment: &FlowAssignment, vertex: EntityId) -> Result<f64> {
    let mut net = 0.0;
    for (edge_id, flux) in &assignment.flux {
        let edge = store
            .edge(*edge_id)
            .ok_or(Error::UnknownFluxEdge(*edge_id))?;
        if edge.target == vertex {
            net += flux;
        }
        if edge.source == vertex {
            net -= flux;
        }
    }
    Ok(net)
}

/// Checks conservation at every vertex touched by the assignment that is
/// neither a source nor a sink, plus all capacity bounds.
pub fn check_kirchhoff(
    store: &Store,
    assignment: &FlowAssignment,
    sources: &BTreeSet<EntityId>,
    sinks: &BTreeSet<EntityId>,
) -> Result<KirchhoffReport> {
    if sources.intersection(sinks).next().is_some() {
        return Err(Error::SourcesMeetSinks);
    }
    let mut touched: BTreeSet<EntityId> = BTreeSet::new();
    for edge_id in assignment.flux.keys() {
        let edge = store
            .edge(*edge_id)
            .ok_or(Error::UnknownFluxEdge(*edge_id))?;
        touched.insert(edge.source);
        touched.insert(edge.target);
    }

    let mut conservation = Vec::new();
    for vertex in &touched {
        if sources.contains(vertex) || sinks.contains(vertex) {
            continue;
        }
        let residual = divergence(store, assignment, *vertex)?;
        if residual.abs() > CONSERVATION_TOLERANCE {
            conservation.push(ConservationViolation {
                vertex: *vertex,
                residual,
            });
        }
    }

    let mut capacity = Vec::new();
    for (edge_id, cap) in &assignment.capacities {
        if *cap < 0.0 || !cap.is_finite() {
            return Err(Error::NegativeCapacity);
        }
        let flux = assignment.flux.get(edge_id).copied().unwrap_or(0.0);
        if flux.abs() > *cap {
            capacity.push(CapacityViolation {
                edge: *edge_id,
                flux,
                capacity: *cap,
            });
        }
    }

    Ok(KirchhoffReport {
        passed: conservation.is_empty() && capacity.is_empty(),
        conservation,
        capacity,
    })
}

/// Maximal feasible throughput from `source` to `sink` over the edges named
/// in `capacities`, via breadth-first augmenting paths. Returns the value
/// and a witness assignment that passes the Kirchhoff check with
/// `{source}`/`{sink}`. An unreachable sink yields value 0.
pub fn max_flow(
    store: &Store,
    cargo: CargoType,
    source: EntityId,
    sink: EntityId,
    capacities: &BTreeMap<EntityId, f64>,
) -> Result<(f64, FlowAssignment)> {
    if source == sink {
        return Err(Error::SourceIsSink);
    }

    // residual arcs: forward arcs carry the edge id, reverse arcs are paired
    struct Arc {
        to: EntityId,
        residual: f64,
        partner: usize,
        edge: Option<EntityId>,
    }
    let mut arcs: Vec<Arc> = Vec::with_capacity(capacities.len() * 2);
    let mut adjacency: BTreeMap<EntityId, Vec<usize>> = BTreeMap::new();
    for (edge_id, cap) in capacities {
        if *cap < 0.0 || !cap.is_finite() {
            return Err(Error::NegativeCapacity);
        }
        let edge = store
            .edge(*edge_id)
            .ok_or(Error::UnknownFluxEdge(*edge_id))?;
        let forward = arcs.len();
        arcs.push(Arc {
            to: edge.target,
            residual: *cap,
            partner: forward + 1,
            edge: Some(*edge_id),
        });
        arcs.push(Arc {
            to: edge.source,
            residual: 0.0,
            partner: forward,
            edge: None,
        });
        adjacency.entry(edge.source).or_default().push(forward);
        adjacency.entry(edge.target).or_default().push(forward + 1);
    }

    let mut total = 0.0;
    loop {
        // BFS for the shortest augmenting path
        let mut parent_arc: BTreeMap<EntityId, usize> = BTreeMap::new();
        let mut queue: alloc::collections::VecDeque<EntityId> = [source].into_iter().collect();
        let mut reached = false;
        let mut visited: BTreeSet<EntityId> = [source].into_iter().collect();
        while let Some(vertex) = queue.pop_front() {
            if vertex == sink {
                reached = true;
                break;
            }
            for &arc_idx in adjacency.get(&vertex).into_iter().flatten() {
                let arc = &arcs[arc_idx];
                if arc.residual > 0.0 && visited.insert(arc.to) {
                    parent_arc.insert(arc.to, arc_idx);
                    queue.push_back(arc.to);
                }
            }
        }
        if !reached {
            break;
        }
        // bottleneck along the path
        let mut bottleneck = f64::INFINITY;
        let mut cursor = sink;
        while cursor != source {
            let arc_idx = parent_arc[&cursor];
            bottleneck = bottleneck.min(arcs[arc_idx].residual);
            cursor = arcs[arcs[arc_idx].partner].to;
        }
        // augment
        let mut cursor = sink;
        while cursor != source {
            let arc_idx = parent_arc[&cursor];
            arcs[arc_idx].residual -= bottleneck;
            let partner = arcs[arc_idx].partner;
            arcs[partner].residual += bottleneck;
            cursor = arcs[partner].to;
        }
        total += bottleneck;
    }

    let mut assignment = FlowAssignment::new(cargo);
    assignment.capacities = capacities.clone();
    for arc in &arcs {
        if let Some(edge_id) = arc.edge {
            let cap = capacities[&edge_id];
            assignment.flux.insert(edge_id, cap - arc.residual);
        }
    }
    Ok((total, assignment))
}

/// Vertices and edges created by topology generation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedTopology {
    pub vertices: Vec<EntityId>,
    pub edges: Vec<EntityId>,
}

/// Vertex type used by generated lattices.
pub const LATTICE_VERTEX_TYPE: &str = "cell";
/// Edge type used by generated lattices.
pub const LATTICE_EDGE_TYPE: &str = "ADJACENT_TO";

/// Materializes a topology scaffold in the store.
///
/// Dense lattices create one vertex per lattice point, carrying its
/// coordinates, and a pair of directed edges between every axis-neighbor
/// pair. Sparse topologies create nothing; edges are caller-driven.
pub fn generate_topology(store: &mut Store, kind: &TopologyKind) -> Result<GeneratedTopology> {
    match kind {
        TopologyKind::Sparse => Ok(GeneratedTopology {
            vertices: Vec::new(),
            edges: Vec::new(),
        }),
        TopologyKind::DenseLattice { extents } => {
            if extents.is_empty() || extents.contains(&0) {
                return Err(Error::ZeroExtent(extents.clone()));
            }
            let dims = extents.len();
            if store.vertex_schema(LATTICE_VERTEX_TYPE).is_none() {
                store.register_schema(
                    TypeSchema::new(LATTICE_VERTEX_TYPE)
                        .with_key("coords", ValueDictionary::tensor(alloc::vec![dims])),
                    SchemaSide::Vertex,
                )?;
            }
            store.ensure_edge_schema(TypeSchema::new(LATTICE_EDGE_TYPE))?;

            let total: usize = extents.iter().product();
            let mut vertices = Vec::with_capacity(total);
            for flat in 0..total {
                let coords = unflatten(flat, extents);
                let mut attrs = BTreeMap::new();
                attrs.insert(
                    "coords".into(),
                    AttributeValue::vector(coords.iter().map(|c| *c as f64).collect::<Vec<f64>>()),
                );
                vertices.push(store.add_vertex(LATTICE_VERTEX_TYPE, attrs)?);
            }

            let mut edges = Vec::new();
            for flat in 0..total {
                let coords = unflatten(flat, extents);
                for axis in 0..dims {
                    if coords[axis] + 1 < extents[axis] {
                        let mut neighbor = coords.clone();
                        neighbor[axis] += 1;
                        let other = flatten(&neighbor, extents);
                        edges.push(store.add_edge(
                            LATTICE_EDGE_TYPE,
                            vertices[flat],
                            vertices[other],
                            BTreeMap::new(),
                        )?);
                        edges.push(store.add_edge(
                            LATTICE_EDGE_TYPE,
                            vertices[other],
                            vertices[flat],
                            BTreeMap::new(),
                        )?);
                    }
                }
            }
            Ok(GeneratedTopology { vertices, edges })
        }
    }
}

fn unflatten(mut flat: usize, extents: &[usize]) -> Vec<usize> {
    let mut coords = alloc::vec![0usize; extents.len()];
    for axis in (0..extents.len()).rev() {
        coords[axis] = flat % extents[axis];
        flat /= extents[axis];
    }
    coords
}

fn flatten(coords: &[usize], extents: &[usize]) -> usize {
    let mut flat = 0usize;
    for (c, e) in coords.iter().zip(extents) {
        flat = flat * e + c;
    }
    flat
}
