//! The typed directed multigraph store.
//!
//! A store instance owns the schema registries, the vertex/edge/virtual-node
//! populations, hypergram cells, and the metric/kernel/calibration
//! registries that persistence serializes alongside them. Parallel edges of
//! the same or different types between the same endpoints are permitted.
//!
//! Concurrency contract: single writer, multiple readers. All mutation goes
//! through `&mut self`; readers see a consistent snapshot. Derived-edge
//! operations read then batch-write and must be serialized with other
//! writers by the caller, which `&mut self` enforces in-process.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::calibration::CalibrationResult;
use crate::equality::KernelDescriptor;
use crate::hypergram::{CellLayout, HypergramCell};
use crate::id::{EntityId, IdGenerator, IdKind};
use crate::metrics::MetricDescriptor;
use crate::schema::TypeSchema;
use crate::superposition::{SuperpositionDescriptor, VirtualNode};
use crate::value::AttributeValue;
use crate::vclock::VectorClock;
use crate::{Error, Result};

/// Reserved attribute key for axis-aligned bounding boxes: a tensor of shape
/// [2, 3] holding the min corner (row 0) and max corner (row 1).
pub const BBOX_KEY: &str = "bbox";

/// Which side of the schema registry a type belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemaSide {
    Vertex,
    Edge,
}

/// Names the dimensional-reduction map that produced an embedding attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingProvenance {
    pub map_id: String,
    pub version: String,
}

impl EmbeddingProvenance {
    pub fn new(map_id: impl Into<String>, version: impl Into<String>) -> Result<Self> {
        let map_id = map_id.into();
        if map_id.is_empty() {
            return Err(Error::InvalidAttribute {
                key: "provenance".into(),
                reason: "map_id must be nonempty".into(),
            });
        }
        Ok(EmbeddingProvenance {
            map_id,
            version: version.into(),
        })
    }
}

/// A typed, attributed vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: EntityId,
    pub type_name: String,
    pub attributes: BTreeMap<String, AttributeValue>,
    /// Per-attribute embedding provenance, when ingested.
    pub provenance: BTreeMap<String, EmbeddingProvenance>,
}

/// A typed, attributed, directed edge; optionally in superposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: EntityId,
    pub type_name: String,
    pub source: EntityId,
    pub target: EntityId,
    pub attributes: BTreeMap<String, AttributeValue>,
    pub superposition: Option<SuperpositionDescriptor>,
    pub provenance: BTreeMap<String, EmbeddingProvenance>,
}

/// Declarative replication metadata: stored and echoed, never enforced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicationMeta {
    pub replica_count: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub durability_note: Option<String>,
}

impl Default for ReplicationMeta {
    fn default() -> Self {
        ReplicationMeta {
            replica_count: 1,
            durability_note: None,
        }
    }
}

/// Comparator functions usable by the sequencing template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparator {
    /// Compares a scalar attribute numerically.
    Numeric { attribute: String },
}

impl Comparator {
    fn token(&self) -> String {
        match self {
            Comparator::Numeric { attribute } => format!("numeric_{attribute}"),
        }
    }
}

/// Collations usable by the ordinator sequencing template. Full Unicode
/// collation (DUCET) is out of scope; byte order and numeric order cover the
/// supported collations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordinator {
    /// Bytewise comparison of a string attribute.
    ByteOrder { attribute: String },
    /// Parses a string attribute as a number and compares numerically.
    NumericOrder { attribute: String },
}

impl Ordinator {
    fn token(&self) -> String {
        match self {
            Ordinator::ByteOrder { attribute } => format!("byte_order_{attribute}"),
            Ordinator::NumericOrder { attribute } => format!("numeric_order_{attribute}"),
        }
    }

    fn attribute(&self) -> &str {
        match self {
            Ordinator::ByteOrder { attribute } | Ordinator::NumericOrder { attribute } => attribute,
        }
    }
}

/// The six axis-aligned directions supported by the directional part-of
/// template. Richer named cross-sections are not addressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisDirection {
    XPos,
    XNeg,
    YPos,
    YNeg,
    ZPos,
    ZNeg,
}

impl AxisDirection {
    pub fn token(self) -> &'static str {
        match self {
            AxisDirection::XPos => "X_POS",
            AxisDirection::XNeg => "X_NEG",
            AxisDirection::YPos => "Y_POS",
            AxisDirection::YNeg => "Y_NEG",
            AxisDirection::ZPos => "Z_POS",
            AxisDirection::ZNeg => "Z_NEG",
        }
    }

    fn axis(self) -> usize {
        match self {
            AxisDirection::XPos | AxisDirection::XNeg => 0,
            AxisDirection::YPos | AxisDirection::YNeg => 1,
            AxisDirection::ZPos | AxisDirection::ZNeg => 2,
        }
    }

    fn positive(self) -> bool {
        matches!(
            self,
            AxisDirection::XPos | AxisDirection::YPos | AxisDirection::ZPos
        )
    }
}

impl core::str::FromStr for AxisDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x_pos" | "+x" => Ok(AxisDirection::XPos),
            "x_neg" | "-x" => Ok(AxisDirection::XNeg),
            "y_pos" | "+y" => Ok(AxisDirection::YPos),
            "y_neg" | "-y" => Ok(AxisDirection::YNeg),
            "z_pos" | "+z" => Ok(AxisDirection::ZPos),
            "z_neg" | "-z" => Ok(AxisDirection::ZNeg),
            other => Err(Error::NotComparable(format!("unknown direction `{other}`"))),
        }
    }
}

/// The built-in edge-type templates for derived comparison edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonTemplate {
    /// Edges from the larger to the smaller value of a scalar attribute.
    IsLargerThanBy { attribute: String },
    /// Sequencing by a named comparator; edges trace the sequence in
    /// ascending order.
    IsSequencedAfterByComparator { comparator: Comparator },
    /// Sequencing by a named collation over a string attribute.
    IsSequencedAfterByOrdinator { ordinator: Ordinator },
    /// Strict bbox inclusion, container to contained.
    SpatiallyContains,
    /// Bbox intersection (tangential counts); both directions emitted.
    SpatiallyOverlaps,
    /// Category vertex to member vertex, matched on token equality between
    /// `member_key` on members and `category_key` on categories.
    CategoricallyContains {
        member_key: String,
        category_key: String,
    },
    /// Member to category, same matching rule.
    BelongsTo {
        member_key: String,
        category_key: String,
    },
    /// Member to category, same matching rule.
    In {
        member_key: String,
        category_key: String,
    },
    /// Owner (category) to owned (member): the complement of IN/BELONGS_TO.
    Owns {
        member_key: String,
        category_key: String,
    },
    /// Contained box lying in the named axis-aligned half of the container.
    IsPartOf { direction: AxisDirection },
}

impl ComparisonTemplate {
    /// The edge type token this template materializes.
    pub fn edge_type(&self) -> String {
        match self {
            ComparisonTemplate::IsLargerThanBy { attribute } => {
                format!("IS_LARGER_THAN_BY_{attribute}")
            }
            ComparisonTemplate::IsSequencedAfterByComparator { comparator } => {
                format!("IS_SEQUENCED_AFTER_BY_{}", comparator.token())
            }
            ComparisonTemplate::IsSequencedAfterByOrdinator { ordinator } => {
                format!("IS_SEQUENCED_AFTER_BY_{}", ordinator.token())
            }
            ComparisonTemplate::SpatiallyContains => "SPATIALLY_CONTAINS".into(),
            ComparisonTemplate::SpatiallyOverlaps => "SPATIALLY_OVERLAPS".into(),
            ComparisonTemplate::CategoricallyContains { .. } => "CATEGORICALLY_CONTAINS".into(),
            ComparisonTemplate::BelongsTo { .. } => "BELONGS_TO".into(),
            ComparisonTemplate::In { .. } => "IN".into(),
            ComparisonTemplate::Owns { .. } => "OWNS".into(),
            ComparisonTemplate::IsPartOf { direction } => {
                format!("IS_{}_PART_OF", direction.token())
            }
        }
    }
}

/// Axis-aligned bounding box: min and max corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl BoundingBox {
    pub fn from_attribute(value: &AttributeValue) -> Result<Self> {
        match value {
            AttributeValue::Tensor { shape, data } if shape == &[2usize, 3] && data.len() == 6 => {
                let min = [data[0], data[1], data[2]];
                let max = [data[3], data[4], data[5]];
                if min.iter().zip(&max).any(|(lo, hi)| lo > hi) {
                    return Err(Error::InvalidAttribute {
                        key: BBOX_KEY.into(),
                        reason: "bbox min corner exceeds max corner".into(),
                    });
                }
                Ok(BoundingBox { min, max })
            }
            other => Err(Error::InvalidAttribute {
                key: BBOX_KEY.into(),
                reason: format!(
                    "bbox must be a tensor of shape [2, 3], got {}",
                    other.kind_name()
                ),
            }),
        }
    }

    /// Proper inclusion: `self` contains `other` and they differ.
    pub fn contains(&self, other: &BoundingBox) -> bool {
        self != other
            && self.min.iter().zip(&other.min).all(|(a, b)| a <= b)
            && other.max.iter().zip(&self.max).all(|(b, a)| b <= a)
    }

    /// Closed-box intersection; tangential contact counts as overlap.
    pub fn overlaps(&self, other: &BoundingBox) -> bool {
        self.min.iter().zip(&other.max).all(|(a, b)| a <= b)
            && other.min.iter().zip(&self.max).all(|(b, a)| b <= a)
    }

    fn center(&self, axis: usize) -> f64 {
        (self.min[axis] + self.max[axis]) / 2.0
    }
}

/// The store aggregate.
pub struct Store {
    ids: IdGenerator,
    vertex_schemas: BTreeMap<String, TypeSchema>,
    edge_schemas: BTreeMap<String, TypeSchema>,
    vertices: BTreeMap<EntityId, Vertex>,
    edges: BTreeMap<EntityId, Edge>,
    virtual_nodes: BTreeMap<EntityId, VirtualNode>,
    cells: BTreeMap<EntityId, HypergramCell>,
    metric_registry: BTreeMap<(String, String), MetricDescriptor>,
    kernel_registry: BTreeMap<String, KernelDescriptor>,
    calibrations: BTreeMap<(String, String), CalibrationResult>,
    replication: ReplicationMeta,
    outgoing: BTreeMap<EntityId, BTreeSet<EntityId>>,
    incoming: BTreeMap<EntityId, BTreeSet<EntityId>>,
}

impl core::fmt::Debug for Store {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Store")
            .field("vertices", &self.vertices.len())
            .field("edges", &self.edges.len())
            .field("virtual_nodes", &self.virtual_nodes.len())
            .field("cells", &self.cells.len())
            .finish_non_exhaustive()
    }
}

impl Store {
    pub fn new(ids: IdGenerator) -> Self {
        Store {
            ids,
            vertex_schemas: BTreeMap::new(),
            edge_schemas: BTreeMap::new(),
            vertices: BTreeMap::new(),
            edges: BTreeMap::new(),
            virtual_nodes: BTreeMap::new(),
            cells: BTreeMap::new(),
            metric_registry: BTreeMap::new(),
            kernel_registry: BTreeMap::new(),
            calibrations: BTreeMap::new(),
            replication: ReplicationMeta::default(),
            outgoing: BTreeMap::new(),
            incoming: BTreeMap::new(),
        }
    }

    // ------------------------------------------------------------------
    // schema registry
    // ------------------------------------------------------------------

    pub fn register_schema(&mut self, schema: TypeSchema, side: SchemaSide) -> Result<()> {
        schema.validate()?;
        let registry = match side {
            SchemaSide::Vertex => &mut self.vertex_schemas,
            SchemaSide::Edge => &mut self.edge_schemas,
        };
        if registry.contains_key(&schema.type_name) {
            return Err(Error::DuplicateType(schema.type_name));
        }
        registry.insert(schema.type_name.clone(), schema);
        Ok(())
    }

    pub fn vertex_schema(&self, type_name: &str) -> Option<&TypeSchema> {
        self.vertex_schemas.get(type_name)
    }

    pub fn edge_schema(&self, type_name: &str) -> Option<&TypeSchema> {
        self.edge_schemas.get(type_name)
    }

    pub fn vertex_schemas(&self) -> impl Iterator<Item = &TypeSchema> {
        self.vertex_schemas.values()
    }

    pub fn edge_schemas(&self) -> impl Iterator<Item = &TypeSchema> {
        self.edge_schemas.values()
    }

    /// Registers a derived edge type if absent; existing registrations win.
    pub(crate) fn ensure_edge_schema(&mut self, schema: TypeSchema) -> Result<()> {
        if self.edge_schemas.contains_key(&schema.type_name) {
            return Ok(());
        }
        self.register_schema(schema, SchemaSide::Edge)
    }

    // ------------------------------------------------------------------
    // id management
    // ------------------------------------------------------------------

    fn contains_id(&self, id: EntityId) -> bool {
        self.vertices.contains_key(&id)
            || self.edges.contains_key(&id)
            || self.virtual_nodes.contains_key(&id)
            || self.cells.contains_key(&id)
    }

    /// Draws a fresh id of the given kind, unique within this store.
    pub fn new_id(&mut self, kind: IdKind) -> EntityId {
        let vertices = &self.vertices;
        let edges = &self.edges;
        let vnodes = &self.virtual_nodes;
        let cells = &self.cells;
        self.ids.generate(kind, |id| {
            vertices.contains_key(&id)
                || edges.contains_key(&id)
                || vnodes.contains_key(&id)
                || cells.contains_key(&id)
        })
    }

    // ------------------------------------------------------------------
    // vertices
    // ------------------------------------------------------------------

    pub fn add_vertex(
        &mut self,
        type_name: &str,
        attributes: BTreeMap<String, AttributeValue>,
    ) -> Result<EntityId> {
        let schema = self
            .vertex_schemas
            .get(type_name)
            .ok_or_else(|| Error::UnknownType(type_name.into()))?;
        schema.check_attributes(attributes.iter())?;
        let id = self.new_id(IdKind::Vertex);
        self.vertices.insert(
            id,
            Vertex {
                id,
                type_name: type_name.into(),
                attributes,
                provenance: BTreeMap::new(),
            },
        );
        Ok(id)
    }

    pub fn vertex(&self, id: EntityId) -> Option<&Vertex> {
        self.vertices.get(&id)
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.values()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn update_vertex_attribute(
        &mut self,
        id: EntityId,
        key: &str,
        value: AttributeValue,
    ) -> Result<()> {
        let vertex = self.vertices.get(&id).ok_or(Error::UnknownEntity(id))?;
        let schema = self
            .vertex_schemas
            .get(&vertex.type_name)
            .ok_or_else(|| Error::UnknownType(vertex.type_name.clone()))?;
        schema.check_attribute(key, &value)?;
        self.vertices
            .get_mut(&id)
            .expect("checked above")
            .attributes
            .insert(key.into(), value);
        Ok(())
    }

    /// Deletes a vertex and exactly the edges incident to it, returning the
    /// removed edge ids. Rejected while the vertex is a constituent of a
    /// virtual node.
    pub fn delete_vertex(&mut self, id: EntityId) -> Result<Vec<EntityId>> {
        if !self.vertices.contains_key(&id) {
            return Err(Error::UnknownEntity(id));
        }
        for vnode in self.virtual_nodes.values() {
            if vnode.constituents().iter().any(|(c, _)| *c == id) {
                return Err(Error::ConstituentInUse {
                    vertex: id,
                    vnode: vnode.id(),
                });
            }
        }
        let mut incident: BTreeSet<EntityId> = BTreeSet::new();
        if let Some(out) = self.outgoing.get(&id) {
            incident.extend(out.iter().copied());
        }
        if let Some(inc) = self.incoming.get(&id) {
            incident.extend(inc.iter().copied());
        }
        for edge_id in &incident {
            self.delete_edge(*edge_id)?;
        }
        self.vertices.remove(&id);
        Ok(incident.into_iter().collect())
    }

    pub fn set_vertex_provenance(
        &mut self,
        id: EntityId,
        key: &str,
        provenance: EmbeddingProvenance,
    ) -> Result<()> {
        let vertex = self.vertices.get_mut(&id).ok_or(Error::UnknownEntity(id))?;
        if !vertex.attributes.contains_key(key) {
            return Err(Error::MissingAttribute {
                vertex: id,
                key: key.into(),
            });
        }
        vertex.provenance.insert(key.into(), provenance);
        Ok(())
    }

    pub fn set_edge_provenance(
        &mut self,
        id: EntityId,
        key: &str,
        provenance: EmbeddingProvenance,
    ) -> Result<()> {
        let edge = self.edges.get_mut(&id).ok_or(Error::UnknownEntity(id))?;
        if !edge.attributes.contains_key(key) {
            return Err(Error::MissingAttribute {
                vertex: id,
                key: key.into(),
            });
        }
        edge.provenance.insert(key.into(), provenance);
        Ok(())
    }

    // ------------------------------------------------------------------
    // edges
    // ------------------------------------------------------------------

    fn endpoint_exists(&self, id: EntityId) -> bool {
        self.vertices.contains_key(&id) || self.virtual_nodes.contains_key(&id)
    }

    pub fn add_edge(
        &mut self,
        type_name: &str,
        source: EntityId,
        target: EntityId,
        attributes: BTreeMap<String, AttributeValue>,
    ) -> Result<EntityId> {
        self.add_edge_inner(type_name, source, target, attributes, None)
    }

    /// Adds an edge whose direction is in superposition.
    pub fn add_superposed_edge(
        &mut self,
        type_name: &str,
        source: EntityId,
        target: EntityId,
        attributes: BTreeMap<String, AttributeValue>,
        descriptor: SuperpositionDescriptor,
    ) -> Result<EntityId> {
        descriptor.direction.validate()?;
        self.add_edge_inner(type_name, source, target, attributes, Some(descriptor))
    }

    fn add_edge_inner(
        &mut self,
        type_name: &str,
        source: EntityId,
        target: EntityId,
        attributes: BTreeMap<String, AttributeValue>,
        superposition: Option<SuperpositionDescriptor>,
    ) -> Result<EntityId> {
        let schema = self
            .edge_schemas
            .get(type_name)
            .ok_or_else(|| Error::UnknownType(type_name.into()))?;
        schema.check_attributes(attributes.iter())?;
        if !self.endpoint_exists(source) {
            return Err(Error::DanglingEndpoint(source));
        }
        if !self.endpoint_exists(target) {
            return Err(Error::DanglingEndpoint(target));
        }
        let id = self.new_id(IdKind::Edge);
        self.edges.insert(
            id,
            Edge {
                id,
                type_name: type_name.into(),
                source,
                target,
                attributes,
                superposition,
                provenance: BTreeMap::new(),
            },
        );
        self.outgoing.entry(source).or_default().insert(id);
        self.incoming.entry(target).or_default().insert(id);
        Ok(id)
    }

    pub fn edge(&self, id: EntityId) -> Option<&Edge> {
        self.edges.get(&id)
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn update_edge_attribute(
        &mut self,
        id: EntityId,
        key: &str,
        value: AttributeValue,
    ) -> Result<()> {
        let edge = self.edges.get(&id).ok_or(Error::UnknownEntity(id))?;
        let schema = self
            .edge_schemas
            .get(&edge.type_name)
            .ok_or_else(|| Error::UnknownType(edge.type_name.clone()))?;
        schema.check_attribute(key, &value)?;
        self.edges
            .get_mut(&id)
            .expect("checked above")
            .attributes
            .insert(key.into(), value);
        Ok(())
    }

    pub fn delete_edge(&mut self, id: EntityId) -> Result<()> {
        let edge = self.edges.remove(&id).ok_or(Error::UnknownEntity(id))?;
        if let Some(out) = self.outgoing.get_mut(&edge.source) {
            out.remove(&id);
        }
        if let Some(inc) = self.incoming.get_mut(&edge.target) {
            inc.remove(&id);
        }
        Ok(())
    }

    /// Edge ids leaving the given endpoint.
    pub fn outgoing_edges(&self, id: EntityId) -> impl Iterator<Item = &Edge> {
        self.outgoing
            .get(&id)
            .into_iter()
            .flat_map(|set| set.iter())
            .filter_map(|eid| self.edges.get(eid))
    }

    /// Edge ids arriving at the given endpoint.
    pub fn incoming_edges(&self, id: EntityId) -> impl Iterator<Item = &Edge> {
        self.incoming
            .get(&id)
            .into_iter()
            .flat_map(|set| set.iter())
            .filter_map(|eid| self.edges.get(eid))
    }

    // ------------------------------------------------------------------
    // virtual nodes
    // ------------------------------------------------------------------

    /// Registers a virtual node over existing concrete vertices. Weights are
    /// validated and renormalized by [`VirtualNode::new`]; nesting is
    /// rejected.
    pub fn register_virtual_node<I>(&mut self, constituents: I) -> Result<EntityId>
    where
        I: IntoIterator<Item = (EntityId, f64)>,
    {
        let constituents: Vec<(EntityId, f64)> = constituents.into_iter().collect();
        for (cid, _) in &constituents {
            if self.virtual_nodes.contains_key(cid) {
                return Err(Error::NestedVirtualNode(*cid));
            }
            if !self.vertices.contains_key(cid) {
                return Err(Error::UnknownEntity(*cid));
            }
        }
        let id = self.new_id(IdKind::Vertex);
        let node = VirtualNode::new(id, constituents)?;
        self.virtual_nodes.insert(id, node);
        Ok(id)
    }

    pub fn virtual_node(&self, id: EntityId) -> Option<&VirtualNode> {
        self.virtual_nodes.get(&id)
    }

    pub fn virtual_nodes(&self) -> impl Iterator<Item = &VirtualNode> {
        self.virtual_nodes.values()
    }

    // ------------------------------------------------------------------
    // hypergram cells
    // ------------------------------------------------------------------

    /// Creates a hypergram cell with the given layout and shard count.
    pub fn add_cell(&mut self, layout: CellLayout, shard_count: usize) -> Result<EntityId> {
        let id = self.new_id(IdKind::Vertex);
        let cell = HypergramCell::new(id, layout, shard_count)?;
        self.cells.insert(id, cell);
        Ok(id)
    }

    pub fn cell(&self, id: EntityId) -> Option<&HypergramCell> {
        self.cells.get(&id)
    }

    pub fn cell_mut(&mut self, id: EntityId) -> Option<&mut HypergramCell> {
        self.cells.get_mut(&id)
    }

    pub fn cells(&self) -> impl Iterator<Item = &HypergramCell> {
        self.cells.values()
    }

    // ------------------------------------------------------------------
    // metric / kernel / calibration registries
    // ------------------------------------------------------------------

    /// Registers a metric descriptor. At least one registered schema must
    /// declare the bound field with a dictionary the metric is admissible
    /// for.
    pub fn register_metric(&mut self, descriptor: MetricDescriptor) -> Result<()> {
        let admissible_somewhere = self
            .vertex_schemas
            .values()
            .chain(self.edge_schemas.values())
            .filter_map(|schema| schema.keys.get(&descriptor.field))
            .any(|dict| descriptor.admissible_for(dict));
        if !admissible_somewhere {
            return Err(Error::MetricNotAdmissible {
                metric: descriptor.metric.token().into(),
                field: descriptor.field.clone(),
            });
        }
        self.metric_registry.insert(
            (descriptor.metric.token().into(), descriptor.field.clone()),
            descriptor,
        );
        Ok(())
    }

    pub fn metric(&self, metric: &str, field: &str) -> Option<&MetricDescriptor> {
        self.metric_registry.get(&(metric.into(), field.into()))
    }

    pub fn metrics(&self) -> impl Iterator<Item = &MetricDescriptor> {
        self.metric_registry.values()
    }

    pub fn register_kernel(
        &mut self,
        name: impl Into<String>,
        kernel: KernelDescriptor,
    ) -> Result<()> {
        kernel.validate()?;
        self.kernel_registry.insert(name.into(), kernel);
        Ok(())
    }

    pub fn kernel(&self, name: &str) -> Option<&KernelDescriptor> {
        self.kernel_registry.get(name)
    }

    pub fn kernels(&self) -> impl Iterator<Item = (&str, &KernelDescriptor)> {
        self.kernel_registry.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Records a calibration result for a (metric, field) pair.
    pub fn record_calibration(
        &mut self,
        metric: &str,
        field: &str,
        result: CalibrationResult,
    ) -> Result<()> {
        self.calibrations
            .insert((metric.into(), field.into()), result);
        Ok(())
    }

    pub fn calibration(&self, metric: &str, field: &str) -> Option<&CalibrationResult> {
        self.calibrations.get(&(metric.into(), field.into()))
    }

    pub fn calibrations(&self) -> impl Iterator<Item = (&str, &str, &CalibrationResult)> {
        self.calibrations
            .iter()
            .map(|((m, f), r)| (m.as_str(), f.as_str(), r))
    }

    pub fn replication(&self) -> &ReplicationMeta {
        &self.replication
    }

    pub fn set_replication(&mut self, meta: ReplicationMeta) {
        self.replication = meta;
    }

    // ------------------------------------------------------------------
    // queries and scans
    // ------------------------------------------------------------------

    /// Vertices filtered by type and an optional attribute-equality predicate.
    pub fn query_vertices<'a>(
        &'a self,
        type_name: Option<&'a str>,
        predicate: Option<(&'a str, &'a AttributeValue)>,
    ) -> impl Iterator<Item = &'a Vertex> {
        self.vertices.values().filter(move |v| {
            type_name.is_none_or(|t| v.type_name == t)
                && predicate.is_none_or(|(key, value)| v.attributes.get(key) == Some(value))
        })
    }

    /// Edges filtered by type and an optional attribute-equality predicate.
    pub fn query_edges<'a>(
        &'a self,
        type_name: Option<&'a str>,
        predicate: Option<(&'a str, &'a AttributeValue)>,
    ) -> impl Iterator<Item = &'a Edge> {
        self.edges.values().filter(move |e| {
            type_name.is_none_or(|t| e.type_name == t)
                && predicate.is_none_or(|(key, value)| e.attributes.get(key) == Some(value))
        })
    }

    /// Full-scan schema soundness check: every stored attribute key is
    /// declared by its type and every value satisfies its dictionary.
    pub fn check_schema_soundness(&self) -> Result<()> {
        for vertex in self.vertices.values() {
            let schema = self
                .vertex_schemas
                .get(&vertex.type_name)
                .ok_or_else(|| Error::UnknownType(vertex.type_name.clone()))?;
            schema.check_attributes(vertex.attributes.iter())?;
        }
        for edge in self.edges.values() {
            let schema = self
                .edge_schemas
                .get(&edge.type_name)
                .ok_or_else(|| Error::UnknownType(edge.type_name.clone()))?;
            schema.check_attributes(edge.attributes.iter())?;
            if !self.endpoint_exists(edge.source) {
                return Err(Error::DanglingEndpoint(edge.source));
            }
            if !self.endpoint_exists(edge.target) {
                return Err(Error::DanglingEndpoint(edge.target));
            }
        }
        Ok(())
    }

    // ------------------------------------------------------------------
    // derived edges: happens-before
    // ------------------------------------------------------------------

    /// Derives a HAPPENS_BEFORE edge a → b iff the vector clock of `a`
    /// strictly precedes the clock of `b`. Concurrent or equal clocks derive
    /// nothing.
    pub fn derive_happens_before(
        &mut self,
        a: EntityId,
        b: EntityId,
        clock_key: &str,
    ) -> Result<Option<EntityId>> {
        let clock_of = |store: &Store, id: EntityId| -> Result<VectorClock> {
            let vertex = store.vertices.get(&id).ok_or(Error::UnknownEntity(id))?;
            let attr = vertex
                .attributes
                .get(clock_key)
                .ok_or_else(|| Error::MissingAttribute {
                    vertex: id,
                    key: clock_key.into(),
                })?;
            VectorClock::from_attribute(attr)
        };
        let clock_a = clock_of(self, a)?;
        let clock_b = clock_of(self, b)?;
        if !clock_a.happens_before(&clock_b) {
            return Ok(None);
        }
        self.ensure_edge_schema(
            TypeSchema::new("HAPPENS_BEFORE")
                .with_key("clock_key", crate::value::ValueDictionary::text()),
        )?;
        let mut attributes = BTreeMap::new();
        attributes.insert("clock_key".into(), AttributeValue::text(clock_key));
        let id = self.add_edge("HAPPENS_BEFORE", a, b, attributes)?;
        Ok(Some(id))
    }

    // ------------------------------------------------------------------
    // derived edges: comparison templates
    // ------------------------------------------------------------------

    /// Materializes edges for a comparison template over a vertex set.
    ///
    /// Comparator-based templates produce a strict partial order: no
    /// self-edges and antisymmetric by construction. They emit the covering
    /// relation (adjacent ranks) by default; `materialize_closure` emits the
    /// full transitive closure instead.
    pub fn derive_comparison_edges(
        &mut self,
        vertex_set: &[EntityId],
        template: &ComparisonTemplate,
        materialize_closure: bool,
    ) -> Result<Vec<EntityId>> {
        for id in vertex_set {
            if !self.vertices.contains_key(id) {
                return Err(Error::UnknownEntity(*id));
            }
        }
        let edge_type = template.edge_type();
        self.ensure_edge_schema(TypeSchema::new(edge_type.clone()))?;

        match template {
            ComparisonTemplate::IsLargerThanBy { attribute } => {
                let ranked = self.rank_by_scalar(vertex_set, attribute)?;
                // edges point from the larger to the smaller value
                self.emit_order_edges(&edge_type, &ranked, materialize_closure, true)
            }
            ComparisonTemplate::IsSequencedAfterByComparator { comparator } => {
                let ranked = match comparator {
                    Comparator::Numeric { attribute } => {
                        self.rank_by_scalar(vertex_set, attribute)?
                    }
                };
                // edges trace the sequence in ascending order
                self.emit_order_edges(&edge_type, &ranked, materialize_closure, false)
            }
            ComparisonTemplate::IsSequencedAfterByOrdinator { ordinator } => {
                let ranked = self.rank_by_ordinator(vertex_set, ordinator)?;
                self.emit_order_edges(&edge_type, &ranked, materialize_closure, false)
            }
            ComparisonTemplate::SpatiallyContains => {
                let boxes = self.boxes_of(vertex_set)?;
                let mut created = Vec::new();
                for (a, box_a) in &boxes {
                    for (b, box_b) in &boxes {
                        if a != b && box_a.contains(box_b) {
                            created.push(self.add_edge(&edge_type, *a, *b, BTreeMap::new())?);
                        }
                    }
                }
                Ok(created)
            }
            ComparisonTemplate::SpatiallyOverlaps => {
                let boxes = self.boxes_of(vertex_set)?;
                let mut created = Vec::new();
                for (i, (a, box_a)) in boxes.iter().enumerate() {
                    for (b, box_b) in boxes.iter().skip(i + 1) {
                        if box_a.overlaps(box_b) {
                            created.push(self.add_edge(&edge_type, *a, *b, BTreeMap::new())?);
                            created.push(self.add_edge(&edge_type, *b, *a, BTreeMap::new())?);
                        }
                    }
                }
                Ok(created)
            }
            ComparisonTemplate::CategoricallyContains {
                member_key,
                category_key,
            }
            | ComparisonTemplate::Owns {
                member_key,
                category_key,
            } => self.emit_membership_edges(&edge_type, vertex_set, member_key, category_key, true),
            ComparisonTemplate::BelongsTo {
                member_key,
                category_key,
            }
            | ComparisonTemplate::In {
                member_key,
                category_key,
            } => {
                self.emit_membership_edges(&edge_type, vertex_set, member_key, category_key, false)
            }
            ComparisonTemplate::IsPartOf { direction } => {
                let boxes = self.boxes_of(vertex_set)?;
                let mut created = Vec::new();
                let axis = direction.axis();
                for (part, box_part) in &boxes {
                    for (whole, box_whole) in &boxes {
                        if part == whole || !box_whole.contains(box_part) {
                            continue;
                        }
                        let split = box_whole.center(axis);
                        let in_half = if direction.positive() {
                            box_part.min[axis] >= split
                        } else {
                            box_part.max[axis] <= split
                        };
                        if in_half {
                            created.push(self.add_edge(
                                &edge_type,
                                *part,
                                *whole,
                                BTreeMap::new(),
                            )?);
                        }
                    }
                }
                Ok(created)
            }
        }
    }

    /// Groups the vertex set by ascending scalar attribute value; equal
    /// values share a rank.
    fn rank_by_scalar(
        &self,
        vertex_set: &[EntityId],
        attribute: &str,
    ) -> Result<Vec<Vec<EntityId>>> {
        let mut keyed: Vec<(f64, EntityId)> = Vec::with_capacity(vertex_set.len());
        for id in vertex_set {
            let vertex = &self.vertices[id];
            let value =
                vertex
                    .attributes
                    .get(attribute)
                    .ok_or_else(|| Error::MissingAttribute {
                        vertex: *id,
                        key: attribute.into(),
                    })?;
            let scalar = value.as_scalar().ok_or_else(|| {
                Error::NotComparable(format!(
                    "attribute `{attribute}` of {id} is {}, expected scalar",
                    value.kind_name()
                ))
            })?;
            if !scalar.is_finite() {
                return Err(Error::NotComparable(format!(
                    "attribute `{attribute}` of {id} is not finite"
                )));
            }
            keyed.push((scalar, *id));
        }
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Ok(group_ranks(keyed, |a, b| a == b))
    }

    fn rank_by_ordinator(
        &self,
        vertex_set: &[EntityId],
        ordinator: &Ordinator,
    ) -> Result<Vec<Vec<EntityId>>> {
        let attribute = ordinator.attribute();
        let mut keyed: Vec<(OrdinatorKey, EntityId)> = Vec::with_capacity(vertex_set.len());
        for id in vertex_set {
            let vertex = &self.vertices[id];
            let value =
                vertex
                    .attributes
                    .get(attribute)
                    .ok_or_else(|| Error::MissingAttribute {
                        vertex: *id,
                        key: attribute.into(),
                    })?;
            let text = value.as_text().or(value.as_token()).ok_or_else(|| {
                Error::NotComparable(format!(
                    "attribute `{attribute}` of {id} is {}, expected string",
                    value.kind_name()
                ))
            })?;
            let key = match ordinator {
                Ordinator::ByteOrder { .. } => OrdinatorKey::Bytes(text.as_bytes().to_vec()),
                Ordinator::NumericOrder { .. } => {
                    let parsed: f64 = text.parse().map_err(|_| {
                        Error::NotComparable(format!(
                            "attribute `{attribute}` of {id} (`{text}`) is not numeric"
                        ))
                    })?;
                    if !parsed.is_finite() {
                        return Err(Error::NotComparable(format!(
                            "attribute `{attribute}` of {id} is not finite"
                        )));
                    }
                    OrdinatorKey::Number(parsed)
                }
            };
            keyed.push((key, *id));
        }
        keyed.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        Ok(group_ranks(keyed, |a, b| a == b))
    }

    /// Emits edges between ranks. `descending` points edges from higher
    /// ranks to lower ranks; otherwise edges run in ascending rank order.
    fn emit_order_edges(
        &mut self,
        edge_type: &str,
        ranks: &[Vec<EntityId>],
        closure: bool,
        descending: bool,
    ) -> Result<Vec<EntityId>> {
        let mut created = Vec::new();
        for i in 0..ranks.len() {
            let upper_bound = if closure {
                ranks.len()
            } else {
                (i + 2).min(ranks.len())
            };
            for j in (i + 1)..upper_bound {
                for low in &ranks[i] {
                    for high in &ranks[j] {
                        let (source, target) = if descending {
                            (*high, *low)
                        } else {
                            (*low, *high)
                        };
                        created.push(self.add_edge(edge_type, source, target, BTreeMap::new())?);
                    }
                }
            }
        }
        Ok(created)
    }

    fn emit_membership_edges(
        &mut self,
        edge_type: &str,
        vertex_set: &[EntityId],
        member_key: &str,
        category_key: &str,
        category_to_member: bool,
    ) -> Result<Vec<EntityId>> {
        let token_of = |attrs: &BTreeMap<String, AttributeValue>, key: &str| -> Option<String> {
            attrs
                .get(key)
                .and_then(|v| v.as_token().or(v.as_text()))
                .map(String::from)
        };
        let mut members: Vec<(EntityId, String)> = Vec::new();
        let mut categories: Vec<(EntityId, String)> = Vec::new();
        for id in vertex_set {
            let vertex = &self.vertices[id];
            if let Some(token) = token_of(&vertex.attributes, member_key) {
                members.push((*id, token));
            }
            if let Some(token) = token_of(&vertex.attributes, category_key) {
                categories.push((*id, token));
            }
        }
        let mut created = Vec::new();
        for (member, member_token) in &members {
            for (category, category_token) in &categories {
                if member == category || member_token != category_token {
                    continue;
                }
                let (source, target) = if category_to_member {
                    (*category, *member)
                } else {
                    (*member, *category)
                };
                created.push(self.add_edge(edge_type, source, target, BTreeMap::new())?);
            }
        }
        Ok(created)
    }

    fn boxes_of(&self, vertex_set: &[EntityId]) -> Result<Vec<(EntityId, BoundingBox)>> {
        vertex_set
            .iter()
            .map(|id| {
                let vertex = &self.vertices[id];
                let attr =
                    vertex
                        .attributes
                        .get(BBOX_KEY)
                        .ok_or_else(|| Error::MissingAttribute {
                            vertex: *id,
                            key: BBOX_KEY.into(),
                        })?;
                Ok((*id, BoundingBox::from_attribute(attr)?))
            })
            .collect()
    }

    // ------------------------------------------------------------------
    // persistence support: raw restoration with full validation
    // ------------------------------------------------------------------

    /// Inserts a fully-formed vertex, validating schema and id uniqueness.
    /// Intended for persistence layers rebuilding a store.
    pub fn restore_vertex(&mut self, vertex: Vertex) -> Result<()> {
        let schema = self
            .vertex_schemas
            .get(&vertex.type_name)
            .ok_or_else(|| Error::UnknownType(vertex.type_name.clone()))?;
        schema.check_attributes(vertex.attributes.iter())?;
        if self.contains_id(vertex.id) {
            return Err(Error::DuplicateConstituent(vertex.id));
        }
        self.vertices.insert(vertex.id, vertex);
        Ok(())
    }

    /// Inserts a fully-formed edge, validating schema, endpoints, and id
    /// uniqueness.
    pub fn restore_edge(&mut self, edge: Edge) -> Result<()> {
        let schema = self
            .edge_schemas
            .get(&edge.type_name)
            .ok_or_else(|| Error::UnknownType(edge.type_name.clone()))?;
        schema.check_attributes(edge.attributes.iter())?;
        if let Some(superposition) = &edge.superposition {
            superposition.direction.validate()?;
        }
        if !self.endpoint_exists(edge.source) {
            return Err(Error::DanglingEndpoint(edge.source));
        }
        if !self.endpoint_exists(edge.target) {
            return Err(Error::DanglingEndpoint(edge.target));
        }
        if self.contains_id(edge.id) {
            return Err(Error::DuplicateConstituent(edge.id));
        }
        self.outgoing
            .entry(edge.source)
            .or_default()
            .insert(edge.id);
        self.incoming
            .entry(edge.target)
            .or_default()
            .insert(edge.id);
        self.edges.insert(edge.id, edge);
        Ok(())
    }

    /// Re-registers a virtual node under its stored id.
    pub fn restore_virtual_node(&mut self, node: VirtualNode) -> Result<()> {
        for (cid, _) in node.constituents() {
            if !self.vertices.contains_key(cid) {
                return Err(Error::UnknownEntity(*cid));
            }
        }
        if self.contains_id(node.id()) {
            return Err(Error::DuplicateConstituent(node.id()));
        }
        self.virtual_nodes.insert(node.id(), node);
        Ok(())
    }

    /// Re-registers a hypergram cell under its stored id.
    pub fn restore_cell(&mut self, cell: HypergramCell) -> Result<()> {
        if self.contains_id(cell.id()) {
            return Err(Error::DuplicateConstituent(cell.id()));
        }
        self.cells.insert(cell.id(), cell);
        Ok(())
    }
}

#[derive(PartialEq, PartialOrd)]
enum OrdinatorKey {
    Number(f64),
    Bytes(Vec<u8>),
}

impl OrdinatorKey {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        use core::cmp::Ordering;
        match (self, other) {
            (OrdinatorKey::Number(a), OrdinatorKey::Number(b)) => a.total_cmp(b),
            (OrdinatorKey::Bytes(a), OrdinatorKey::Bytes(b)) => a.cmp(b),
            (OrdinatorKey::Number(_), OrdinatorKey::Bytes(_)) => Ordering::Less,
            (OrdinatorKey::Bytes(_), OrdinatorKey::Number(_)) => Ordering::Greater,
        }
    }
}

/// Groups a sorted keyed list into ranks of equal keys.
fn group_ranks<K>(sorted: Vec<(K, EntityId)>, eq: impl Fn(&K, &K) -> bool) -> Vec<Vec<EntityId>> {
    let mut ranks: Vec<Vec<EntityId>> = Vec::new();
    let mut last_key: Option<K> = None;
    for (key, id) in sorted {
        match &last_key {
            Some(prev) if eq(prev, &key) => ranks.last_mut().expect("nonempty").push(id),
            _ => {
                ranks.push(alloc::vec![id]);
                last_key = Some(key);
                continue;
            }
        }
        last_key = Some(key);
    }
    ranks
}
