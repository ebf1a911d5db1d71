//! Acceptance suite: the release gate, one test per criterion.
//!
//! Each criterion prints one `ACCEPTANCE <n> PASS` line on success (visible
//! with `cargo test --test acceptance -- --nocapture`); a failed assertion
//! fails the test and the line is not printed.

use std::collections::BTreeMap;
use std::time::Instant;

use ngf_core::calibration::{
    calibrate, candidate_thresholds, infer_similarity_edges, CalibrationPair,
};
use ngf_core::equality::{
    kernel_compare, EqualityType, KernelDescriptor, KernelKind, ObserverScope,
};
use ngf_core::flow::{check_kirchhoff, divergence, max_flow, CargoType, FlowAssignment};
use ngf_core::graph::{EmbeddingProvenance, ReplicationMeta, SchemaSide, Vertex};
use ngf_core::hypergram::{CellLayout, CellValue};
use ngf_core::id::{IdGenerator, StepClock};
use ngf_core::metrics::{
    bhattacharyya_coefficient, bhattacharyya_distance, MetricDescriptor, MetricId,
};
use ngf_core::superposition::{DirectionAmplitudes, SuperpositionDescriptor, VirtualNode};
use ngf_core::value::{AttributeValue, DictionaryKind, ValueDictionary};
use ngf_core::vclock::VectorClock;
use ngf_core::{EntityId, Store, TypeSchema};
use ngf_store::{from_bytes, to_bytes};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn deterministic_ids(seed: u64) -> IdGenerator {
    IdGenerator::new(StepClock::new(1, 1), ChaCha8Rng::seed_from_u64(seed))
}

fn normal(rng: &mut ChaCha8Rng, mean: f64, sd: f64) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-12);
    let u2: f64 = rng.random();
    mean + sd * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Criterion 1: Bhattacharyya suite over 1,000 random histogram pairs.
#[test]
fn acceptance_1_bhattacharyya_suite() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..1000 {
        let bins = rng.random_range(2..=64usize);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..bins).map(|_| rng.random::<f64>().max(1e-9)).collect()
        };
        let p = draw(&mut rng);
        let q = draw(&mut rng);

        let bc = bhattacharyya_coefficient(&p, &q).unwrap();
        assert!((0.0..=1.0).contains(&bc), "BC out of range: {bc}");

        let self_distance = bhattacharyya_distance(&p, &p).unwrap();
        assert!(self_distance <= 1e-12, "D_B(p,p) = {self_distance}");

        let gap = (bc - bhattacharyya_coefficient(&q, &p).unwrap()).abs();
        assert!(gap <= 1e-12, "symmetry gap {gap}");
    }

    // worked pair, arithmetic oracle: -ln(sqrt(0.45) + sqrt(0.05))
    let db = bhattacharyya_distance(&[0.5, 0.5], &[0.9, 0.1]).unwrap();
    assert!((db - 0.111572).abs() <= 1e-6, "worked pair D_B = {db}");
    let oracle = -(0.45f64.sqrt() + 0.05f64.sqrt()).ln();
    assert!((db - oracle).abs() <= 1e-12);

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "runtime {elapsed:?}");
    println!("ACCEPTANCE 1 PASS — bhattacharyya suite (1000 pairs) in {elapsed:?}");
}

/// Criterion 2: EER anchor — the calibrated threshold achieves the
/// brute-force minimal |FNR − FPR| exactly.
#[test]
fn acceptance_2_eer_anchor() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    // two overlapping distance distributions, 200 pairs each
    let mut pairs: Vec<CalibrationPair> = Vec::with_capacity(400);
    for _ in 0..200 {
        pairs.push(CalibrationPair::same(normal(&mut rng, 0.3, 0.1).max(0.0)));
        pairs.push(CalibrationPair::diff(normal(&mut rng, 0.6, 0.15).max(0.0)));
    }
    let result = calibrate(&pairs, 1.0, 0.0).unwrap();
    let achieved = (result.fnr_at_t - result.fpr_at_t).abs();

    // independent brute-force sweep over all candidate thresholds
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
    same.sort_unstable_by(f64::total_cmp);
    diff.sort_unstable_by(f64::total_cmp);
    let mut best = f64::INFINITY;
    for t in candidate_thresholds(&same, &diff) {
        let mut false_accepts = 0usize;
        let mut false_rejects = 0usize;
        for p in &pairs {
            if p.same && p.distance > t {
                false_rejects += 1;
            }
            if !p.same && p.distance <= t {
                false_accepts += 1;
            }
        }
        let gap = (false_accepts as f64 / diff.len() as f64
            - false_rejects as f64 / same.len() as f64)
            .abs();
        best = best.min(gap);
    }
    assert_eq!(
        achieved, best,
        "threshold gap {achieved} vs brute-force {best}"
    );
    assert!(achieved > 0.0 || result.fnr_at_t == result.fpr_at_t);

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "runtime {elapsed:?}");
    println!(
        "ACCEPTANCE 2 PASS — EER anchor t={} |FNR-FPR|={achieved} in {elapsed:?}",
        result.threshold
    );
}

/// Criterion 3: Dirac degeneracy — sigma 0, epsilon 0 agrees with bitwise
/// field equality on 500 random vertex pairs.
#[test]
fn acceptance_3_dirac_degeneracy() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let kernel = KernelDescriptor::new(
        KernelKind::Gaussian { sigma: vec![0.0] },
        EqualityType::Representation,
        ObserverScope::new("acceptance", ["embedding", "grade", "label"]).unwrap(),
    )
    .unwrap();

    let mut agreements = 0usize;
    for round in 0..500 {
        let len = rng.random_range(1..=16usize);
        let embedding: Vec<f64> = (0..len).map(|_| rng.random_range(-5.0..5.0)).collect();
        let grade: f64 = rng.random_range(0.0..10.0);
        let label: String = format!("item-{}", rng.random_range(0..50u32));

        let copy = rng.random_bool(0.5);
        let mut other_embedding = embedding.clone();
        let mut other_grade = grade;
        let mut other_label = label.clone();
        if !copy {
            // perturb one field at random
            match rng.random_range(0..3u8) {
                0 => {
                    let slot = rng.random_range(0..other_embedding.len());
                    other_embedding[slot] += rng.random_range(1e-9..1.0);
                }
                1 => other_grade += 0.5,
                _ => other_label.push('!'),
            }
        }

        let build = |id: u64, e: &[f64], g: f64, l: &str| Vertex {
            id: EntityId::from_parts(ngf_core::IdKind::Vertex, id, id),
            type_name: "T".into(),
            attributes: [
                ("embedding".to_string(), AttributeValue::vector(e.to_vec())),
                ("grade".to_string(), AttributeValue::scalar(g)),
                ("label".to_string(), AttributeValue::text(l)),
            ]
            .into_iter()
            .collect(),
            provenance: BTreeMap::new(),
        };
        let a = build(round * 2 + 1, &embedding, grade, &label);
        let b = build(round * 2 + 2, &other_embedding, other_grade, &other_label);

        let bitwise_equal = a.attributes == b.attributes;
        let judgement = kernel_compare(&a, &b, &kernel, 0.0).unwrap();
        if judgement.verdict == bitwise_equal {
            agreements += 1;
        }
    }
    assert_eq!(agreements, 500, "dirac degeneracy agreed {agreements}/500");
    println!("ACCEPTANCE 3 PASS — dirac degeneracy 500/500");
}

/// Criterion 4: flow conservation and max-flow/min-cut on 200 random graphs.
#[test]
fn acceptance_4_flow_conservation_and_min_cut() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for round in 0..200 {
        let n = rng.random_range(2..=8usize);
        let mut store = Store::new(deterministic_ids(round));
        store
            .register_schema(TypeSchema::new("node"), SchemaSide::Vertex)
            .unwrap();
        store
            .register_schema(TypeSchema::new("pipe"), SchemaSide::Edge)
            .unwrap();
        let vertices: Vec<EntityId> = (0..n)
            .map(|_| store.add_vertex("node", BTreeMap::new()).unwrap())
            .collect();

        let edge_count = rng.random_range(1..=12usize);
        let mut arcs: Vec<(usize, usize, f64)> = Vec::new();
        let mut capacities: BTreeMap<EntityId, f64> = BTreeMap::new();
        let mut assignment = FlowAssignment::new(CargoType::new("cargo", "u"));
        for _ in 0..edge_count {
            let from = rng.random_range(0..n);
            let to = rng.random_range(0..n);
            if from == to {
                continue;
            }
            let edge = store
                .add_edge("pipe", vertices[from], vertices[to], BTreeMap::new())
                .unwrap();
            let cap = f64::from(rng.random_range(0..=5u8));
            capacities.insert(edge, cap);
            arcs.push((from, to, cap));
            assignment.flux.insert(edge, rng.random_range(-10.0..10.0));
        }
        if arcs.is_empty() {
            continue;
        }

        // global conservation: divergences telescope to zero
        let total: f64 = vertices
            .iter()
            .map(|v| divergence(&store, &assignment, *v).unwrap())
            .sum();
        assert!(total.abs() <= 1e-9, "global divergence {total}");

        // max flow equals brute-force min cut
        let source = 0usize;
        let sink = n - 1;
        let (value, witness) = max_flow(
            &store,
            CargoType::new("cargo", "u"),
            vertices[source],
            vertices[sink],
            &capacities,
        )
        .unwrap();

        let middle: Vec<usize> = (1..n - 1).collect();
        let mut min_cut = f64::INFINITY;
        for mask in 0u32..(1 << middle.len()) {
            let mut s_side = vec![false; n];
            s_side[source] = true;
            for (bit, vertex) in middle.iter().enumerate() {
                s_side[*vertex] = mask & (1 << bit) != 0;
            }
            let cut: f64 = arcs
                .iter()
                .filter(|(from, to, _)| s_side[*from] && !s_side[*to])
                .map(|(_, _, cap)| cap)
                .sum();
            min_cut = min_cut.min(cut);
        }
        assert_eq!(
            value, min_cut,
            "round {round}: flow {value} != cut {min_cut}"
        );

        let report = check_kirchhoff(
            &store,
            &witness,
            &[vertices[source]].into(),
            &[vertices[sink]].into(),
        )
        .unwrap();
        assert!(report.passed, "witness violates conservation: {report:?}");
    }
    println!("ACCEPTANCE 4 PASS — conservation + min-cut on 200 random graphs");
}

/// Criterion 5: superposition statistics.
#[test]
fn acceptance_5_superposition_statistics() {
    let ids: Vec<EntityId> = (1..=4)
        .map(|i| EntityId::from_parts(ngf_core::IdKind::Vertex, i, i))
        .collect();
    let weights = [0.4, 0.3, 0.2, 0.1];
    let node = VirtualNode::new(
        EntityId::from_parts(ngf_core::IdKind::Vertex, 9, 9),
        ids.iter().copied().zip(weights.iter().copied()),
    )
    .unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let draws = 100_000u32;
    let mut counts = [0u64; 4];
    for _ in 0..draws {
        let picked = node.collapse(&mut rng);
        counts[ids.iter().position(|i| *i == picked).unwrap()] += 1;
    }
    // chi-square goodness of fit, df = 3, significance 0.001
    let chi_square: f64 = counts
        .iter()
        .zip(weights)
        .map(|(observed, weight)| {
            let expected = f64::from(draws) * weight;
            let delta = *observed as f64 - expected;
            delta * delta / expected
        })
        .sum();
    const CHI2_CRIT_DF3_P001: f64 = 16.266_236_196_238;
    assert!(
        chi_square < CHI2_CRIT_DF3_P001,
        "chi-square {chi_square} exceeds the 0.001 critical value"
    );

    // direction probabilities: zero-tolerance equality against the
    // direct-arithmetic oracle (squares of the amplitudes)
    let direction = DirectionAmplitudes::new(0.6, 0.8, 0.0).unwrap();
    assert_eq!(direction.probabilities(), (0.6 * 0.6, 0.8 * 0.8, 0.0));

    println!("ACCEPTANCE 5 PASS — collapse chi-square {chi_square:.3} < 16.266; squares exact");
}

/// Criterion 6: hypergram convergence under 4 concurrent writers.
#[test]
fn acceptance_6_hypergram_convergence() {
    use std::sync::Arc;
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for round in 0..100u64 {
        let integer_round = round % 2 == 0;
        let count = rng.random_range(16..=200usize);
        let deltas: Vec<f64> = (0..count)
            .map(|_| {
                if integer_round {
                    f64::from(rng.random_range(-100..=100i32))
                } else {
                    rng.random_range(-10.0..10.0)
                }
            })
            .collect();
        let hints: Vec<Option<usize>> = (0..count)
            .map(|_| {
                if rng.random_bool(0.5) {
                    Some(rng.random_range(0..8))
                } else {
                    None
                }
            })
            .collect();
        let sequential: f64 = deltas.iter().sum();

        let cell = Arc::new(
            ngf_core::hypergram::HypergramCell::new(
                EntityId::from_parts(ngf_core::IdKind::Vertex, round, round),
                CellLayout::Scalar,
                8,
            )
            .unwrap(),
        );
        let chunk = count.div_ceil(4);
        let mut handles = Vec::new();
        for writer in 0..4 {
            let cell = Arc::clone(&cell);
            let slice: Vec<(f64, Option<usize>)> = deltas
                .iter()
                .zip(&hints)
                .skip(writer * chunk)
                .take(chunk)
                .map(|(d, h)| (*d, *h))
                .collect();
            handles.push(std::thread::spawn(move || {
                for (delta, hint) in slice {
                    cell.accumulate(&CellValue::Scalar(delta), hint).unwrap();
                }
            }));
        }
        for handle in handles {
            handle.join().unwrap();
        }
        let mut cell = Arc::try_unwrap(cell).expect("writers joined");
        let CellValue::Scalar(reconciled) = cell.reconcile() else {
            unreachable!()
        };
        if integer_round {
            assert_eq!(
                reconciled, sequential,
                "round {round}: integer sums must be exact"
            );
        } else {
            assert!(
                (reconciled - sequential).abs() <= 1e-9,
                "round {round}: {reconciled} vs {sequential}"
            );
        }
    }
    println!("ACCEPTANCE 6 PASS — 100 concurrent multisets reconcile to the sequential sum");
}

/// Criterion 7: happens-before edges form a strict partial order.
#[test]
fn acceptance_7_happens_before_strict_partial_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let processes = ["p0", "p1", "p2", "p3"];
    for round in 0..300u64 {
        let clock_count = rng.random_range(2..=8usize);
        let process_count = rng.random_range(1..=4usize);
        let clocks: Vec<VectorClock> = (0..clock_count)
            .map(|_| {
                VectorClock::from_entries(
                    processes[..process_count]
                        .iter()
                        .map(|p| (*p, rng.random_range(0..4u64))),
                )
            })
            .collect();

        let mut store = Store::new(deterministic_ids(round));
        store
            .register_schema(
                TypeSchema::new("Event").with_key(
                    "clock",
                    ValueDictionary::composite(
                        processes
                            .iter()
                            .map(|p| (p.to_string(), ValueDictionary::scalar()))
                            .collect(),
                    ),
                ),
                SchemaSide::Vertex,
            )
            .unwrap();
        let vertices: Vec<EntityId> = clocks
            .iter()
            .map(|clock| {
                let mut attrs = BTreeMap::new();
                attrs.insert("clock".to_string(), clock.to_attribute());
                store.add_vertex("Event", attrs).unwrap()
            })
            .collect();

        let mut related = vec![vec![false; clock_count]; clock_count];
        for a in 0..clock_count {
            for b in 0..clock_count {
                if a == b {
                    continue;
                }
                let edge = store
                    .derive_happens_before(vertices[a], vertices[b], "clock")
                    .unwrap();
                related[a][b] = edge.is_some();
            }
        }

        // exhaustive strict-partial-order check
        for a in 0..clock_count {
            assert!(!related[a][a], "irreflexivity violated");
            for b in 0..clock_count {
                if related[a][b] {
                    assert!(!related[b][a], "antisymmetry violated at round {round}");
                    for (c, reachable) in related[b].iter().enumerate() {
                        if *reachable {
                            assert!(
                                related[a][c],
                                "transitivity violated at round {round}: {a}->{b}->{c}"
                            );
                        }
                    }
                }
            }
        }
    }
    println!("ACCEPTANCE 7 PASS — 300 random clock sets derive strict partial orders");
}

/// Builds a randomized store exercising every persisted feature.
fn randomized_store(seed: u64) -> Store {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = Store::new(deterministic_ids(seed));

    store.set_replication(ReplicationMeta {
        replica_count: rng.random_range(1..=5),
        durability_note: if rng.random_bool(0.5) {
            Some(format!("note-{seed}"))
        } else {
            None
        },
    });

    let dim = rng.random_range(2..=16usize);
    let bins = rng.random_range(2..=8usize);
    store
        .register_schema(
            TypeSchema::new("Entity")
                .with_key("embedding", ValueDictionary::tensor(vec![dim]))
                .with_key("histogram", ValueDictionary::histogram(bins))
                .with_key("name", ValueDictionary::text())
                .with_key("kind", ValueDictionary::enumeration(["a", "b", "c"]))
                .with_key("grade", ValueDictionary::scalar())
                .with_key(
                    "quantized",
                    ValueDictionary::new(DictionaryKind::Scalar {
                        range: Some((0.0, 100.0)),
                        quantization: Some(0.25),
                    }),
                )
                .with_key(
                    "clock",
                    ValueDictionary::composite(
                        [
                            ("p".to_string(), ValueDictionary::scalar()),
                            ("q".to_string(), ValueDictionary::scalar()),
                        ]
                        .into_iter()
                        .collect(),
                    ),
                )
                .with_key(
                    "track",
                    ValueDictionary::tensor_with_axes(
                        vec![4, 2],
                        vec![ngf_core::value::AxisRole::Temporal, ngf_core::value::AxisRole::Anonymous],
                    ),
                ),
            SchemaSide::Vertex,
        )
        .unwrap();
    store
        .register_schema(
            TypeSchema::new("LINK").with_key("weight", ValueDictionary::scalar()),
            SchemaSide::Edge,
        )
        .unwrap();

    let vertex_count = rng.random_range(2..=10usize);
    let mut vertices = Vec::with_capacity(vertex_count);
    for i in 0..vertex_count {
        let mut attrs = BTreeMap::new();
        attrs.insert(
            "embedding".to_string(),
            AttributeValue::vector(
                (0..dim)
                    .map(|_| rng.random_range(-3.0..3.0))
                    .collect::<Vec<f64>>(),
            ),
        );
        attrs.insert(
            "histogram".to_string(),
            AttributeValue::histogram(
                (0..bins)
                    .map(|_| rng.random_range(0.0..9.0))
                    .collect::<Vec<f64>>(),
            ),
        );
        attrs.insert("name".to_string(), AttributeValue::text(format!("v{i}")));
        attrs.insert(
            "kind".to_string(),
            AttributeValue::token(["a", "b", "c"][rng.random_range(0..3usize)]),
        );
        attrs.insert(
            "grade".to_string(),
            AttributeValue::scalar(rng.random_range(-100.0..100.0)),
        );
        attrs.insert(
            "quantized".to_string(),
            AttributeValue::scalar(f64::from(rng.random_range(0..=400u16)) * 0.25),
        );
        let clock = VectorClock::from_entries([
            ("p", rng.random_range(0..5u64)),
            ("q", rng.random_range(0..5u64)),
        ]);
        attrs.insert("clock".to_string(), clock.to_attribute());
        attrs.insert(
            "track".to_string(),
            AttributeValue::tensor(
                vec![4, 2],
                (0..8).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>(),
            ),
        );
        let id = store.add_vertex("Entity", attrs).unwrap();
        if rng.random_bool(0.3) {
            store
                .set_vertex_provenance(
                    id,
                    "embedding",
                    EmbeddingProvenance::new(format!("map-{seed}"), "v1").unwrap(),
                )
                .unwrap();
        }
        vertices.push(id);
    }

    for _ in 0..rng.random_range(1..=12usize) {
        let a = vertices[rng.random_range(0..vertices.len())];
        let b = vertices[rng.random_range(0..vertices.len())];
        let mut attrs = BTreeMap::new();
        attrs.insert(
            "weight".to_string(),
            AttributeValue::scalar(rng.random_range(0.0..1.0)),
        );
        if rng.random_bool(0.4) {
            // random unit-L2 amplitudes
            let raw: [f64; 3] = [rng.random(), rng.random(), rng.random()];
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            let direction =
                DirectionAmplitudes::new(raw[0] / norm, raw[1] / norm, raw[2] / norm).unwrap();
            store
                .add_superposed_edge("LINK", a, b, attrs, SuperpositionDescriptor::new(direction))
                .unwrap();
        } else {
            store.add_edge("LINK", a, b, attrs).unwrap();
        }
    }

    // derived edges from clocks
    let a = vertices[0];
    let b = vertices[vertices.len() - 1];
    if a != b {
        let _ = store.derive_happens_before(a, b, "clock").unwrap();
    }

    // a virtual node over a couple of constituents
    if vertices.len() >= 2 {
        let total = rng.random_range(0.2..=1.0);
        store
            .register_virtual_node([(vertices[0], total * 0.5), (vertices[1], total * 0.5)])
            .unwrap();
    }

    // cells of each layout with residues in various states
    let layouts = [
        CellLayout::Scalar,
        CellLayout::Histogram { bins: 3 },
        CellLayout::Tensor { shape: vec![2, 2] },
    ];
    for layout in layouts {
        let shards = rng.random_range(1..=8usize);
        let cell = store.add_cell(layout.clone(), shards).unwrap();
        let deltas = rng.random_range(0..=6usize);
        for _ in 0..deltas {
            let delta = match &layout {
                CellLayout::Scalar => CellValue::Scalar(rng.random_range(-5.0..5.0)),
                CellLayout::Histogram { bins } => {
                    CellValue::Histogram((0..*bins).map(|_| rng.random_range(0.0..3.0)).collect())
                }
                CellLayout::Tensor { shape } => CellValue::Tensor {
                    shape: shape.clone(),
                    data: (0..4).map(|_| rng.random_range(-2.0..2.0)).collect(),
                },
            };
            let hint = if rng.random_bool(0.5) {
                Some(rng.random_range(0..shards))
            } else {
                None
            };
            store.cell(cell).unwrap().accumulate(&delta, hint).unwrap();
        }
        if rng.random_bool(0.5) {
            store.cell_mut(cell).unwrap().reconcile();
        }
    }

    // registries
    store
        .register_metric(MetricDescriptor::new(MetricId::Euclidean, "embedding"))
        .unwrap();
    store
        .register_metric(MetricDescriptor::new(MetricId::Bhattacharyya, "histogram"))
        .unwrap();
    store
        .register_kernel(
            "default",
            KernelDescriptor::new(
                KernelKind::gaussian(rng.random_range(0.0..3.0)),
                EqualityType::Functional,
                ObserverScope::new("obs", ["embedding"]).unwrap(),
            )
            .unwrap(),
        )
        .unwrap();
    let mut dtw = MetricDescriptor::new(MetricId::Dtw, "track");
    dtw.params.window = Some(rng.random_range(1..=3));
    store.register_metric(dtw).unwrap();
    let pairs: Vec<CalibrationPair> = (0..rng.random_range(4..=20usize))
        .map(|i| {
            if i % 2 == 0 {
                CalibrationPair::same(rng.random_range(0.0..0.5))
            } else {
                CalibrationPair::diff(rng.random_range(0.3..1.0))
            }
        })
        .collect();
    if let Ok(result) = calibrate(&pairs, 1.0, 0.0) {
        store
            .record_calibration("euclidean", "embedding", result.clone())
            .unwrap();
        // derived similarity edges, so the manifest carries those too
        let descriptor = MetricDescriptor::new(MetricId::Euclidean, "embedding");
        let subset: Vec<EntityId> = vertices.iter().take(4).copied().collect();
        infer_similarity_edges(&mut store, &subset, &descriptor, &result).unwrap();
    }

    // an equality edge from a kernel judgement
    if vertices.len() >= 2 {
        let kernel = KernelDescriptor::new(
            KernelKind::gaussian(rng.random_range(0.5..2.0)),
            EqualityType::Representation,
            ObserverScope::new("auditor", ["name"]).unwrap(),
        )
        .unwrap();
        let judgement = kernel_compare(
            store.vertex(vertices[0]).unwrap(),
            store.vertex(vertices[1]).unwrap(),
            &kernel,
            1.0,
        )
        .unwrap();
        if judgement.verdict {
            ngf_core::equality::annotate_equality_edge(
                &mut store,
                vertices[0],
                vertices[1],
                &judgement,
            )
            .unwrap();
        }
    }
    store
}

/// Criterion 8: 50 randomized stores round-trip byte-identically and
/// double-save deterministically.
#[test]
fn acceptance_8_persistence_roundtrips() {
    for seed in 0..50u64 {
        let store = randomized_store(seed);
        let bytes = to_bytes(&store).unwrap();
        let again = to_bytes(&store).unwrap();
        assert_eq!(bytes, again, "seed {seed}: double save differs");

        let restored = from_bytes(&bytes, deterministic_ids(1000 + seed)).unwrap();
        let roundtripped = to_bytes(&restored).unwrap();
        assert_eq!(bytes, roundtripped, "seed {seed}: roundtrip differs");
        restored.check_schema_soundness().unwrap();
    }
    println!("ACCEPTANCE 8 PASS — 50 randomized stores roundtrip byte-identically");
}

/// Criterion 9: end-to-end face-clustering scenario.
///
/// 20 synthetic face vertices with 128-d embeddings from 4 planted clusters
/// whose centers sit at least 5 intra-cluster radii apart; calibrate on the
/// labeled pairs, infer similarity edges, and verify edges connect only
/// intra-cluster pairs.
#[test]
fn acceptance_9_face_clustering_end_to_end() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(909);

    const DIM: usize = 128;
    const CLUSTERS: usize = 4;
    const PER_CLUSTER: usize = 5;
    const RADIUS: f64 = 1.0;
    const SEPARATION: f64 = 5.0 * RADIUS;

    // orthogonal cluster centers scaled to the required separation: any two
    // centers are then sqrt(2) * scale apart, so pick scale = separation
    let mut centers = vec![vec![0.0f64; DIM]; CLUSTERS];
    for (i, center) in centers.iter_mut().enumerate() {
        center[i] = SEPARATION;
    }

    let mut store = Store::new(deterministic_ids(99));
    store
        .register_schema(
            TypeSchema::new("Face").with_key("embedding", ValueDictionary::tensor(vec![DIM])),
            SchemaSide::Vertex,
        )
        .unwrap();

    let mut cluster_of: BTreeMap<EntityId, usize> = BTreeMap::new();
    let mut by_cluster: Vec<Vec<Vec<f64>>> = vec![Vec::new(); CLUSTERS];
    let mut vertices = Vec::new();
    for (cluster, center) in centers.iter().enumerate() {
        for _ in 0..PER_CLUSTER {
            // a point within RADIUS of the center along a random direction
            let mut noise: Vec<f64> = (0..DIM).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = noise.iter().map(|x| x * x).sum::<f64>().sqrt();
            let scale = rng.random_range(0.0..RADIUS) / norm;
            for (n, c) in noise.iter_mut().zip(center) {
                *n = c + *n * scale;
            }
            let mut attrs = BTreeMap::new();
            attrs.insert(
                "embedding".to_string(),
                AttributeValue::vector(noise.clone()),
            );
            let id = store.add_vertex("Face", attrs).unwrap();
            cluster_of.insert(id, cluster);
            by_cluster[cluster].push(noise);
            vertices.push(id);
        }
    }
    assert_eq!(vertices.len(), 20);

    // labeled calibration pairs from the construction
    let euclid = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let mut pairs = Vec::new();
    for (c, members) in by_cluster.iter().enumerate() {
        for (i, a) in members.iter().enumerate() {
            for b in members.iter().skip(i + 1) {
                pairs.push(CalibrationPair::same(euclid(a, b)));
            }
            for other in by_cluster.iter().skip(c + 1) {
                for b in other {
                    pairs.push(CalibrationPair::diff(euclid(a, b)));
                }
            }
        }
    }
    let calibration = calibrate(&pairs, 1.0, 0.0).unwrap();
    // construction guarantees separability, so the threshold is clean
    assert_eq!(calibration.fnr_at_t, 0.0);
    assert_eq!(calibration.fpr_at_t, 0.0);

    let metric = MetricDescriptor::new(MetricId::Euclidean, "embedding");
    let inference = infer_similarity_edges(&mut store, &vertices, &metric, &calibration).unwrap();
    assert_eq!(inference.skipped, 0);

    // every edge joins an intra-cluster pair, and all intra pairs are joined
    let expected_edges = CLUSTERS * (PER_CLUSTER * (PER_CLUSTER - 1) / 2) * 2;
    assert_eq!(inference.edges.len(), expected_edges);
    for edge_id in &inference.edges {
        let edge = store.edge(*edge_id).unwrap();
        assert_eq!(
            cluster_of[&edge.source], cluster_of[&edge.target],
            "edge crosses clusters"
        );
        assert_eq!(edge.type_name, "IS_SIMILAR_AS_euclidean_ON_embedding");
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "runtime {elapsed:?}");
    println!(
        "ACCEPTANCE 9 PASS — 20 faces, {} intra-cluster edges, 0 cross-cluster, in {elapsed:?}",
        inference.edges.len()
    );
}
