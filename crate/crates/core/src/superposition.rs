//! Virtual nodes in superposition and direction-superposed edges.
//!
//! A virtual node is a probability-weighted mixture of concrete vertices;
//! its weights are bounded by unit total probability and renormalized on
//! construction. An edge's direction may likewise be in superposition:
//! three nonnegative amplitudes under a unit-L2 quadratic constraint whose
//! squares are the direction probabilities.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::graph::Store;
use crate::id::EntityId;
use crate::{Error, Result};

/// Tolerance on the quadratic normalization constraint and on constituent
/// weight totals.
pub const SUPERPOSITION_TOLERANCE: f64 = 1e-9;

/// Amplitudes over the three possible directions of an edge. The squares
/// are probabilities: `fwd² + bwd² + bidir² = 1` within tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionAmplitudes {
    pub forward: f64,
    pub backward: f64,
    pub bidirectional: f64,
}

impl DirectionAmplitudes {
    /// Validates nonnegativity and the quadratic normalization constraint.
    pub fn new(forward: f64, backward: f64, bidirectional: f64) -> Result<Self> {
        let amplitudes = DirectionAmplitudes {
            forward,
            backward,
            bidirectional,
        };
        amplitudes.validate()?;
        Ok(amplitudes)
    }

    /// The fixed amplitude of a concrete (deterministic forward) edge.
    pub const fn concrete_forward() -> Self {
        DirectionAmplitudes {
            forward: 1.0,
            backward: 0.0,
            bidirectional: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.forward, self.backward, self.bidirectional];
        if parts.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::NegativeAmplitude);
        }
        let norm_sq = self.squared_norm();
        if (norm_sq - 1.0).abs() > SUPERPOSITION_TOLERANCE {
            return Err(Error::UnnormalizedAmplitudes(norm_sq));
        }
        Ok(())
    }

    pub fn squared_norm(&self) -> f64 {
        self.forward * self.forward
            + self.backward * self.backward
            + self.bidirectional * self.bidirectional
    }

    /// The direction probabilities: squared amplitudes
    /// `(p_fwd, p_bwd, p_bidir)`. Sums to 1 within twice the normalization
    /// tolerance.
    pub fn probabilities(&self) -> (f64, f64, f64) {
        (
            self.forward * self.forward,
            self.backward * self.backward,
            self.bidirectional * self.bidirectional,
        )
    }
}

/// Superposition state carried by an edge. Concrete edges use the fixed
/// forward amplitude (1, 0, 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionDescriptor {
    pub direction: DirectionAmplitudes,
}

impl SuperpositionDescriptor {
    pub fn new(direction: DirectionAmplitudes) -> Self {
        SuperpositionDescriptor { direction }
    }
}

/// A probability-weighted superposition of concrete vertices.
///
/// Weights are validated nonnegative with total in (0, 1] (re-normalized to
/// exactly sum 1) and constituents must be distinct. Nesting is rejected at
/// store registration so collapse stays single-stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualNode {
    id: EntityId,
    constituents: Vec<(EntityId, f64)>,
}

impl VirtualNode {
    /// Validates and renormalizes the constituent weights. Totals above
    /// 1 + tolerance violate the bounded-probability rule; totals in (0, 1]
    /// are scaled up to sum exactly 1.
    pub fn new<I>(id: EntityId, constituents: I) -> Result<Self>
    where
        I: IntoIterator<Item = (EntityId, f64)>,
    {
        let mut constituents: Vec<(EntityId, f64)> = constituents.into_iter().collect();
        if constituents.is_empty() {
            return Err(Error::EmptyConstituents);
        }
        if constituents.iter().any(|(_, w)| !w.is_finite() || *w < 0.0) {
            return Err(Error::NegativeWeight);
        }
        constituents.sort_by_key(|(id, _)| *id);
        for pair in constituents.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::DuplicateConstituent(pair[0].0));
            }
        }
        let total: f64 = constituents.iter().map(|(_, w)| w).sum();
        if total > 1.0 + SUPERPOSITION_TOLERANCE {
            return Err(Error::WeightOverflow(total));
        }
        if total <= 0.0 {
            return Err(Error::ZeroTotalWeight);
        }
        for (_, w) in &mut constituents {
            *w /= total;
        }
        Ok(VirtualNode { id, constituents })
    }

    /// Rebuilds a node from already-normalized constituents without
    /// re-dividing, so persisted weights round-trip bit-exactly. The weights
    /// must still be nonnegative, distinct per id, and sum to 1 within
    /// tolerance.
    pub fn restore<I>(id: EntityId, constituents: I) -> Result<Self>
    where
        I: IntoIterator<Item = (EntityId, f64)>,
    {
        let mut constituents: Vec<(EntityId, f64)> = constituents.into_iter().collect();
        if constituents.is_empty() {
            return Err(Error::EmptyConstituents);
        }
        if constituents.iter().any(|(_, w)| !w.is_finite() || *w < 0.0) {
            return Err(Error::NegativeWeight);
        }
        constituents.sort_by_key(|(id, _)| *id);
        for pair in constituents.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::DuplicateConstituent(pair[0].0));
            }
        }
        let total: f64 = constituents.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > SUPERPOSITION_TOLERANCE {
            return Err(Error::WeightOverflow(total));
        }
        Ok(VirtualNode { id, constituents })
    }

    pub fn id(&self) -> EntityId {
        self.id
    }

    /// Constituents in id order with renormalized weights.
    pub fn constituents(&self) -> &[(EntityId, f64)] {
        &self.constituents
    }

    /// Samples one constituent according to the declared weights.
    /// Reproducible under a fixed-seed randomness source.
    pub fn collapse(&self, rng: &mut dyn RngCore) -> EntityId {
        // 53-bit uniform draw in [0, 1)
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let mut cumulative = 0.0;
        for (id, w) in &self.constituents {
            cumulative += w;
            if u < cumulative {
                return *id;
            }
        }
        // float slack at the top of the cumulative walk
        self.constituents[self.constituents.len() - 1].0
    }
}

/// Weighted adjacency over concrete vertices, keyed by (source, target).
pub type WeightedAdjacency = BTreeMap<(EntityId, EntityId), f64>;

/// Deterministic projection of all edges onto expected concrete adjacency.
///
/// Each edge contributes its forward direction probability to (s, t), its
/// backward probability to (t, s), and its bidirectional probability to both;
/// endpoints that are virtual nodes distribute mass over their constituents
/// by weight.
pub fn expected_adjacency(store: &Store) -> WeightedAdjacency {
    let mut table = WeightedAdjacency::new();
    for edge in store.edges() {
        let (p_fwd, p_bwd, p_bidir) = edge
            .superposition
            .map(|s| s.direction.probabilities())
            .unwrap_or((1.0, 0.0, 0.0));
        let sources = endpoint_weights(store, edge.source);
        let targets = endpoint_weights(store, edge.target);
        for &(s, ws) in &sources {
            for &(t, wt) in &targets {
                let w = ws * wt;
                if p_fwd + p_bidir > 0.0 {
                    *table.entry((s, t)).or_insert(0.0) += w * (p_fwd + p_bidir);
                }
                if p_bwd + p_bidir > 0.0 {
                    *table.entry((t, s)).or_insert(0.0) += w * (p_bwd + p_bidir);
                }
            }
        }
    }
    table
}

fn endpoint_weights(store: &Store, endpoint: EntityId) -> Vec<(EntityId, f64)> {
    match store.virtual_node(endpoint) {
        Some(vnode) => vnode.constituents().to_vec(),
        None => alloc::vec![(endpoint, 1.0)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::id::IdKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn vid(n: u64) -> EntityId {
        EntityId::from_parts(IdKind::Vertex, n, n)
    }

    #[test]
    fn bounded_probability_rule() {
        let ok = VirtualNode::new(
            vid(0),
            [(vid(1), 0.4), (vid(2), 0.3), (vid(3), 0.2), (vid(4), 0.1)],
        );
        assert!(ok.is_ok());

        let over = VirtualNode::new(vid(0), [(vid(1), 0.8), (vid(2), 0.8)]);
        assert!(matches!(over, Err(Error::WeightOverflow(t)) if (t - 1.6).abs() < 1e-12));

        assert_eq!(
            VirtualNode::new(vid(0), core::iter::empty()),
            Err(Error::EmptyConstituents)
        );
        assert_eq!(
            VirtualNode::new(vid(0), [(vid(1), 0.0)]),
            Err(Error::ZeroTotalWeight)
        );
        assert_eq!(
            VirtualNode::new(vid(0), [(vid(1), -0.5)]),
            Err(Error::NegativeWeight)
        );
        assert_eq!(
            VirtualNode::new(vid(0), [(vid(1), 0.3), (vid(1), 0.3)]),
            Err(Error::DuplicateConstituent(vid(1)))
        );
    }

    #[test]
    fn under_unit_totals_renormalize() {
        let node = VirtualNode::new(vid(0), [(vid(1), 0.25), (vid(2), 0.25)]).unwrap();
        let total: f64 = node.constituents().iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() <= 1e-12);
        assert_eq!(node.constituents()[0].1, 0.5);
    }

    #[test]
    fn degenerate_superposition_always_collapses_to_its_alias() {
        let node = VirtualNode::new(vid(0), [(vid(9), 1.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(node.collapse(&mut rng), vid(9));
        }
    }

    #[test]
    fn collapse_even_split_frequency() {
        let node = VirtualNode::new(vid(0), [(vid(1), 0.5), (vid(2), 0.5)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws = 100_000;
        let mut b = 0u32;
        for _ in 0..draws {
            if node.collapse(&mut rng) == vid(1) {
                b += 1;
            }
        }
        let freq = f64::from(b) / f64::from(draws);
        assert!((freq - 0.5).abs() <= 0.01, "frequency {freq}");
    }

    #[test]
    fn collapse_matches_multinomial_weights_within_three_sigma() {
        let weights = [0.4, 0.3, 0.2, 0.1];
        let ids = [vid(1), vid(2), vid(3), vid(4)];
        let node =
            VirtualNode::new(vid(0), ids.iter().copied().zip(weights.iter().copied())).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 100_000u32;
        let mut counts = [0u32; 4];
        for _ in 0..draws {
            let picked = node.collapse(&mut rng);
            let slot = ids.iter().position(|i| *i == picked).unwrap();
            counts[slot] += 1;
        }
        for (count, weight) in counts.iter().zip(weights) {
            let n = f64::from(draws);
            let mean = n * weight;
            let sigma = libm::sqrt(n * weight * (1.0 - weight));
            let deviation = (f64::from(*count) - mean).abs();
            assert!(
                deviation <= 3.0 * sigma,
                "count {count} outside 3 sigma of {mean}"
            );
        }
    }

    #[test]
    fn quadratic_constraint_enforced() {
        assert!(DirectionAmplitudes::new(1.0, 0.0, 0.0).is_ok());
        assert!(DirectionAmplitudes::new(0.6, 0.8, 0.0).is_ok());
        assert!(matches!(
            DirectionAmplitudes::new(0.5, 0.5, 0.0),
            Err(Error::UnnormalizedAmplitudes(_))
        ));
        assert!(matches!(
            DirectionAmplitudes::new(-0.6, 0.8, 0.0),
            Err(Error::NegativeAmplitude)
        ));
    }

    mod adjacency {
        use super::*;
        use crate::graph::SchemaSide;
        use crate::id::{IdGenerator, StepClock};
        use crate::schema::TypeSchema;
        use alloc::collections::BTreeMap;

        fn store_with_vertices(n: usize) -> (Store, alloc::vec::Vec<EntityId>) {
            let mut store = Store::new(IdGenerator::new(
                StepClock::new(1, 1),
                ChaCha8Rng::seed_from_u64(0),
            ));
            store
                .register_schema(TypeSchema::new("T"), SchemaSide::Vertex)
                .unwrap();
            store
                .register_schema(TypeSchema::new("E"), SchemaSide::Edge)
                .unwrap();
            let vertices = (0..n)
                .map(|_| store.add_vertex("T", BTreeMap::new()).unwrap())
                .collect();
            (store, vertices)
        }

        #[test]
        fn concrete_edge_contributes_unit_mass() {
            let (mut store, v) = store_with_vertices(2);
            store.add_edge("E", v[0], v[1], BTreeMap::new()).unwrap();
            let table = expected_adjacency(&store);
            assert_eq!(table.len(), 1);
            assert_eq!(table[&(v[0], v[1])], 1.0);
        }

        #[test]
        fn superposed_direction_distributes_squared_amplitudes() {
            // direct-arithmetic oracle: squares of the amplitudes
            let (mut store, v) = store_with_vertices(2);
            store
                .add_superposed_edge(
                    "E",
                    v[0],
                    v[1],
                    BTreeMap::new(),
                    SuperpositionDescriptor::new(DirectionAmplitudes::new(0.6, 0.8, 0.0).unwrap()),
                )
                .unwrap();
            let table = expected_adjacency(&store);
            assert_eq!(table[&(v[0], v[1])], 0.6 * 0.6);
            assert_eq!(table[&(v[1], v[0])], 0.8 * 0.8);
        }

        #[test]
        fn virtual_endpoint_distributes_by_constituent_weight() {
            let (mut store, v) = store_with_vertices(3);
            let vnode = store
                .register_virtual_node([(v[1], 0.5), (v[2], 0.5)])
                .unwrap();
            store.add_edge("E", v[0], vnode, BTreeMap::new()).unwrap();
            let table = expected_adjacency(&store);
            assert_eq!(table[&(v[0], v[1])], 0.5);
            assert_eq!(table[&(v[0], v[2])], 0.5);
            assert_eq!(table.len(), 2);
        }

        #[test]
        fn row_mass_of_one_edge_counts_bidirectional_once_per_direction() {
            let (mut store, v) = store_with_vertices(2);
            let third = 1.0 / libm::sqrt(3.0);
            let direction = DirectionAmplitudes::new(third, third, third).unwrap();
            store
                .add_superposed_edge(
                    "E",
                    v[0],
                    v[1],
                    BTreeMap::new(),
                    SuperpositionDescriptor::new(direction),
                )
                .unwrap();
            let (p_fwd, p_bwd, p_bidir) = direction.probabilities();
            let table = expected_adjacency(&store);
            let total: f64 = table.values().sum();
            assert_eq!(total, p_fwd + p_bwd + 2.0 * p_bidir);
        }
    }

    #[test]
    fn probabilities_are_squared_amplitudes() {
        // direct-arithmetic oracle: squares of the amplitudes
        let d = DirectionAmplitudes::new(0.6, 0.8, 0.0).unwrap();
        assert_eq!(d.probabilities(), (0.6 * 0.6, 0.8 * 0.8, 0.0));

        let concrete = DirectionAmplitudes::concrete_forward();
        assert_eq!(concrete.probabilities(), (1.0, 0.0, 0.0));

        let third = 1.0 / libm::sqrt(3.0);
        let sym = DirectionAmplitudes::new(third, third, third).unwrap();
        let (pf, pb, pbi) = sym.probabilities();
        assert!((pf - 1.0 / 3.0).abs() <= 1e-12);
        assert!((pb - 1.0 / 3.0).abs() <= 1e-12);
        assert!((pbi - 1.0 / 3.0).abs() <= 1e-12);
        assert!((pf + pb + pbi - 1.0).abs() <= 2e-9);
    }
}
