//! Problem instances: required nodes with disk neighborhoods, required edges,
//! fleet limits, the JSON file format and a seeded generator.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{dist, Disk, Point2};

/// Slack allowed when checking a route length against the flight range.
pub const RANGE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequiredNode {
    pub id: u32,
    pub center: Point2,
    pub radius: f64,
}

impl RequiredNode {
    pub fn disk(&self) -> Disk {
        Disk::new(self.center, self.radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequiredEdge {
    pub id: u32,
    pub a: Point2,
    pub b: Point2,
}

impl RequiredEdge {
    pub fn length(&self) -> f64 {
        dist(self.a, self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FleetSpec {
    /// Maximum route length per vehicle.
    pub flight_range: f64,
    /// Maximum number of required nodes per route. Edges do not count.
    pub node_capacity: u32,
    /// `None` means unbounded.
    pub max_vehicles: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Node,
    Edge,
}

/// Orientation-free identity of a task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaskKey {
    pub kind: TaskKind,
    pub id: u32,
}

impl TaskKey {
    pub const fn node(id: u32) -> Self {
        Self { kind: TaskKind::Node, id }
    }

    pub const fn edge(id: u32) -> Self {
        Self { kind: TaskKind::Edge, id }
    }
}

impl fmt::Display for TaskKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TaskKind::Node => write!(f, "node {}", self.id),
            TaskKind::Edge => write!(f, "edge {}", self.id),
        }
    }
}

/// Direction of an edge traversal. `Forward` runs a→b.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Orientation {
    Forward,
    Reverse,
}

impl Orientation {
    pub fn flipped(self) -> Self {
        match self {
            Orientation::Forward => Orientation::Reverse,
            Orientation::Reverse => Orientation::Forward,
        }
    }
}

/// A task as it appears in a route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TaskRef {
    Node(u32),
    Edge(u32, Orientation),
}

impl TaskRef {
    pub fn key(&self) -> TaskKey {
        match *self {
            TaskRef::Node(id) => TaskKey::node(id),
            TaskRef::Edge(id, _) => TaskKey::edge(id),
        }
    }

    pub fn is_node(&self) -> bool {
        matches!(self, TaskRef::Node(_))
    }

    pub fn is_edge(&self) -> bool {
        matches!(self, TaskRef::Edge(..))
    }

    /// Same task traversed the other way. Nodes are unchanged.
    pub fn flipped(&self) -> Self {
        match *self {
            TaskRef::Node(id) => TaskRef::Node(id),
            TaskRef::Edge(id, o) => TaskRef::Edge(id, o.flipped()),
        }
    }

    /// Orientations worth trying when placing this task.
    pub fn orientations(key: TaskKey) -> impl Iterator<Item = TaskRef> {
        let (first, second) = match key.kind {
            TaskKind::Node => (TaskRef::Node(key.id), None),
            TaskKind::Edge => (
                TaskRef::Edge(key.id, Orientation::Forward),
                Some(TaskRef::Edge(key.id, Orientation::Reverse)),
            ),
        };
        std::iter::once(first).chain(second)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum InstanceError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: duplicate id {id}")]
    DuplicateId { path: String, id: u32 },
    #[error("{path}: zero-length edge")]
    ZeroLengthEdge { path: String },
    #[error("{path}: non-finite coordinate")]
    NonFinite { path: String },
    #[error("{path}: {message}")]
    InvalidValue { path: String, message: String },
    #[error("instance has no tasks")]
    NoTasks,
}

/// Immutable problem instance. Construct via [`Instance::new`] or [`parse_instance`].
#[derive(Debug, Clone)]
pub struct Instance {
    name: String,
    depot: Point2,
    nodes: Vec<RequiredNode>,
    edges: Vec<RequiredEdge>,
    fleet: FleetSpec,
    node_pos: HashMap<u32, usize>,
    edge_pos: HashMap<u32, usize>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.depot == other.depot
            && self.nodes == other.nodes
            && self.edges == other.edges
            && self.fleet == other.fleet
    }
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        depot: Point2,
        nodes: Vec<RequiredNode>,
        edges: Vec<RequiredEdge>,
        fleet: FleetSpec,
    ) -> Result<Self, InstanceError> {
        if !depot.is_finite() {
            return Err(InstanceError::NonFinite { path: "depot".into() });
        }
        let mut node_pos = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if !n.center.is_finite() {
                return Err(InstanceError::NonFinite { path: format!("nodes[{i}].center") });
            }
            if !n.radius.is_finite() {
                return Err(InstanceError::NonFinite { path: format!("nodes[{i}].radius") });
            }
            if n.radius < 0.0 {
                return Err(InstanceError::InvalidValue {
                    path: format!("nodes[{i}].radius"),
                    message: "radius must be non-negative".into(),
                });
            }
            if node_pos.insert(n.id, i).is_some() {
                return Err(InstanceError::DuplicateId { path: format!("nodes[{i}].id"), id: n.id });
            }
        }
        let mut edge_pos = HashMap::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            if !e.a.is_finite() {
                return Err(InstanceError::NonFinite { path: format!("edges[{i}].a") });
            }
            if !e.b.is_finite() {
                return Err(InstanceError::NonFinite { path: format!("edges[{i}].b") });
            }
            if e.length() <= 0.0 {
                return Err(InstanceError::ZeroLengthEdge { path: format!("edges[{i}]") });
            }
            if edge_pos.insert(e.id, i).is_some() {
                return Err(InstanceError::DuplicateId { path: format!("edges[{i}].id"), id: e.id });
            }
        }
        if !fleet.flight_range.is_finite() {
            return Err(InstanceError::NonFinite { path: "fleet.L".into() });
        }
        if fleet.flight_range <= 0.0 {
            return Err(InstanceError::InvalidValue {
                path: "fleet.L".into(),
                message: "flight range must be positive".into(),
            });
        }
        if fleet.node_capacity < 1 {
            return Err(InstanceError::InvalidValue {
                path: "fleet.Q".into(),
                message: "node capacity must be at least 1".into(),
            });
        }
        if fleet.max_vehicles == Some(0) {
            return Err(InstanceError::InvalidValue {
                path: "fleet.max_vehicles".into(),
                message: "must be at least 1 or null".into(),
            });
        }
        if nodes.is_empty() && edges.is_empty() {
            return Err(InstanceError::NoTasks);
        }
        Ok(Self { name: name.into(), depot, nodes, edges, fleet, node_pos, edge_pos })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn depot(&self) -> Point2 {
        self.depot
    }

    pub fn nodes(&self) -> &[RequiredNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[RequiredEdge] {
        &self.edges
    }

    pub fn fleet(&self) -> &FleetSpec {
        &self.fleet
    }

    pub fn node(&self, id: u32) -> Option<&RequiredNode> {
        self.node_pos.get(&id).map(|&i| &self.nodes[i])
    }

    pub fn edge(&self, id: u32) -> Option<&RequiredEdge> {
        self.edge_pos.get(&id).map(|&i| &self.edges[i])
    }

    pub fn contains(&self, key: TaskKey) -> bool {
        match key.kind {
            TaskKind::Node => self.node_pos.contains_key(&key.id),
            TaskKind::Edge => self.edge_pos.contains_key(&key.id),
        }
    }

    pub fn task_count(&self) -> usize {
        self.nodes.len() + self.edges.len()
    }

    /// All tasks: nodes in file order, then edges in file order.
    pub fn task_keys(&self) -> Vec<TaskKey> {
        self.nodes
            .iter()
            .map(|n| TaskKey::node(n.id))
            .chain(self.edges.iter().map(|e| TaskKey::edge(e.id)))
            .collect()
    }

    /// Entry and exit coordinates of a task (node centers for nodes).
    ///
    /// Panics on an unknown id; routes are validated against the instance
    /// before they reach the search.
    #[inline]
    pub fn endpoints(&self, task: TaskRef) -> (Point2, Point2) {
        self.try_endpoints(task).unwrap_or_else(|| panic!("unknown task {}", task.key()))
    }

    pub fn try_endpoints(&self, task: TaskRef) -> Option<(Point2, Point2)> {
        match task {
            TaskRef::Node(id) => self.node(id).map(|n| (n.center, n.center)),
            TaskRef::Edge(id, Orientation::Forward) => self.edge(id).map(|e| (e.a, e.b)),
            TaskRef::Edge(id, Orientation::Reverse) => self.edge(id).map(|e| (e.b, e.a)),
        }
    }

    /// Length flown while servicing the task itself.
    #[inline]
    pub fn service_length(&self, task: TaskRef) -> f64 {
        match task {
            TaskRef::Node(_) => 0.0,
            TaskRef::Edge(id, _) => self.edge(id).map_or(0.0, |e| e.length()),
        }
    }

    /// Length of the single-task route depot → task → depot (centers).
    pub fn round_trip(&self, key: TaskKey) -> f64 {
        let t = TaskRef::orientations(key).next().expect("at least one orientation");
        let (entry, exit) = self.endpoints(t);
        dist(self.depot, entry) + self.service_length(t) + dist(exit, self.depot)
    }

    /// Tasks that no single vehicle can serve within the flight range.
    pub fn infeasible_tasks(&self) -> Vec<TaskKey> {
        self.task_keys()
            .into_iter()
            .filter(|&k| self.round_trip(k) > self.fleet.flight_range + RANGE_EPS)
            .collect()
    }

    /// Copy of this instance with every node radius replaced by `radius`.
    pub fn with_radius(&self, radius: f64) -> Self {
        let mut out = self.clone();
        for n in &mut out.nodes {
            n.radius = radius;
        }
        out
    }

    pub fn with_fleet(&self, fleet: FleetSpec) -> Self {
        let mut out = self.clone();
        out.fleet = fleet;
        out
    }

    pub fn with_name(&self, name: impl Into<String>) -> Self {
        let mut out = self.clone();
        out.name = name.into();
        out
    }
}

// ---------------------------------------------------------------------------
// JSON format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: u32,
    center: [f64; 2],
    radius: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    id: u32,
    a: [f64; 2],
    b: [f64; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FleetDoc {
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "Q")]
    q: u32,
    // Required key; `null` means unbounded.
    #[serde(deserialize_with = "required_nullable")]
    max_vehicles: Option<u32>,
}

fn required_nullable<'de, D>(d: D) -> Result<Option<u32>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    Option::<u32>::deserialize(d)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    name: String,
    depot: [f64; 2],
    nodes: Vec<NodeDoc>,
    edges: Vec<EdgeDoc>,
    fleet: FleetDoc,
}

/// Parses and validates an instance document.
pub fn parse_instance(document: &str) -> Result<Instance, InstanceError> {
    let de = &mut serde_json::Deserializer::from_str(document);
    let doc: InstanceDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        InstanceError::Schema { path, message: e.into_inner().to_string() }
    })?;
    Instance::new(
        doc.name,
        doc.depot.into(),
        doc.nodes
            .into_iter()
            .map(|n| RequiredNode { id: n.id, center: n.center.into(), radius: n.radius })
            .collect(),
        doc.edges
            .into_iter()
            .map(|e| RequiredEdge { id: e.id, a: e.a.into(), b: e.b.into() })
            .collect(),
        FleetSpec { flight_range: doc.fleet.l, node_capacity: doc.fleet.q, max_vehicles: doc.fleet.max_vehicles },
    )
}

/// Canonical pretty-printed JSON of an instance.
pub fn serialize_instance(instance: &Instance) -> String {
    let doc = InstanceDoc {
        name: instance.name.clone(),
        depot: instance.depot.into(),
        nodes: instance
            .nodes
            .iter()
            .map(|n| NodeDoc { id: n.id, center: n.center.into(), radius: n.radius })
            .collect(),
        edges: instance.edges.iter().map(|e| EdgeDoc { id: e.id, a: e.a.into(), b: e.b.into() }).collect(),
        fleet: FleetDoc {
            l: instance.fleet.flight_range,
            q: instance.fleet.node_capacity,
            max_vehicles: instance.fleet.max_vehicles,
        },
    };
    serde_json::to_string_pretty(&doc).expect("instance documents always serialize")
}

// ---------------------------------------------------------------------------
// Generator
// ---------------------------------------------------------------------------

/// Shape parameters for [`generate_instance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorParams {
    pub n_nodes: usize,
    pub n_edges: usize,
    /// Side of the square `[0, area]^2`.
    pub area: f64,
    pub radius: f64,
    pub fleet: FleetSpec,
}

/// Seeded random instance: nodes uniform in the square, edges as segments of
/// length in `[0.05, 0.4] * area` fully inside it, depot at the center.
pub fn generate_instance(seed: u64, params: &GeneratorParams) -> Result<Instance, InstanceError> {
    let GeneratorParams { n_nodes, n_edges, area, radius, fleet } = *params;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depot = Point2::new(area / 2.0, area / 2.0);

    let nodes = (0..n_nodes)
        .map(|i| RequiredNode {
            id: i as u32 + 1,
            center: Point2::new(rng.gen_range(0.0..=area), rng.gen_range(0.0..=area)),
            radius,
        })
        .collect();

    let inside = |p: Point2| (0.0..=area).contains(&p.x) && (0.0..=area).contains(&p.y);
    let mut edges = Vec::with_capacity(n_edges);
    for i in 0..n_edges {
        let edge = loop {
            let a = Point2::new(rng.gen_range(0.0..=area), rng.gen_range(0.0..=area));
            let len = rng.gen_range(0.05 * area..=0.4 * area);
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let b = a + Point2::new(angle.cos(), angle.sin()) * len;
            if inside(b) && dist(a, b) > 0.0 {
                break RequiredEdge { id: i as u32 + 1, a, b };
            }
        };
        edges.push(edge);
    }

    Instance::new(format!("gen_s{seed}_n{n_nodes}_e{n_edges}"), depot, nodes, edges, fleet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = r#"{
        "name": "tiny",
        "depot": [0, 0],
        "nodes": [{"id": 1, "center": [5, 0], "radius": 0}],
        "edges": [],
        "fleet": {"L": 100, "Q": 1, "max_vehicles": null}
    }"#;

    fn c1_fleet() -> FleetSpec {
        FleetSpec { flight_range: 3000.0, node_capacity: 4, max_vehicles: None }
    }

    #[test]
    fn parses_minimal_document() {
        let inst = parse_instance(MINIMAL).unwrap();
        assert_eq!(inst.task_count(), 1);
        assert_eq!(inst.fleet().max_vehicles, None);
        assert_eq!(inst.node(1).unwrap().center, Point2::new(5.0, 0.0));
    }

    #[test]
    fn rejects_zero_length_edge() {
        let doc = MINIMAL.replace(r#""edges": []"#, r#""edges": [{"id": 1, "a": [1, 1], "b": [1, 1]}]"#);
        let err = parse_instance(&doc).unwrap_err();
        assert_eq!(err, InstanceError::ZeroLengthEdge { path: "edges[0]".into() });
        assert!(err.to_string().contains("zero-length edge"));
    }

    #[test]
    fn rejects_duplicate_ids() {
        let doc = MINIMAL.replace(
            r#""nodes": [{"id": 1, "center": [5, 0], "radius": 0}]"#,
            r#""nodes": [{"id": 1, "center": [5, 0], "radius": 0}, {"id": 1, "center": [1, 0], "radius": 0}]"#,
        );
        assert!(matches!(parse_instance(&doc), Err(InstanceError::DuplicateId { id: 1, .. })));
    }

    #[test]
    fn schema_errors_carry_path() {
        let doc = MINIMAL.replace(r#""radius": 0"#, r#""radius": "big""#);
        match parse_instance(&doc) {
            Err(InstanceError::Schema { path, .. }) => assert_eq!(path, "nodes[0].radius"),
            other => panic!("unexpected {other:?}"),
        }
        let doc = MINIMAL.replace(r#", "max_vehicles": null"#, "");
        match parse_instance(&doc) {
            Err(InstanceError::Schema { path, message }) => {
                assert_eq!(path, "fleet");
                assert!(message.contains("max_vehicles"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_negative_radius_and_empty() {
        let doc = MINIMAL.replace(r#""radius": 0"#, r#""radius": -1"#);
        assert!(matches!(parse_instance(&doc), Err(InstanceError::InvalidValue { .. })));
        let doc = MINIMAL.replace(r#"[{"id": 1, "center": [5, 0], "radius": 0}]"#, "[]");
        assert_eq!(parse_instance(&doc), Err(InstanceError::NoTasks));
    }

    #[test]
    fn generator_matches_c1_shape() {
        let params = GeneratorParams { n_nodes: 6, n_edges: 15, area: 1000.0, radius: 50.0, fleet: c1_fleet() };
        let inst = generate_instance(1, &params).unwrap();
        assert_eq!(inst.nodes().len(), 6);
        assert_eq!(inst.edges().len(), 15);
        assert_eq!(inst.depot(), Point2::new(500.0, 500.0));
        for e in inst.edges() {
            assert!(e.length() >= 50.0 - 1e-9 && e.length() <= 400.0 + 1e-9);
            for p in [e.a, e.b] {
                assert!((0.0..=1000.0).contains(&p.x) && (0.0..=1000.0).contains(&p.y));
            }
        }
        for n in inst.nodes() {
            assert_eq!(n.radius, 50.0);
        }
        assert!(inst.infeasible_tasks().is_empty());
    }

    #[test]
    fn generator_is_deterministic() {
        let params = GeneratorParams { n_nodes: 6, n_edges: 15, area: 1000.0, radius: 50.0, fleet: c1_fleet() };
        let a = serialize_instance(&generate_instance(1, &params).unwrap());
        let b = serialize_instance(&generate_instance(1, &params).unwrap());
        assert_eq!(a, b);
        let c = serialize_instance(&generate_instance(2, &params).unwrap());
        assert_ne!(a, c);
    }

    #[test]
    fn pure_arc_instance() {
        let params = GeneratorParams { n_nodes: 0, n_edges: 1, area: 100.0, radius: 0.0, fleet: c1_fleet() };
        let inst = generate_instance(3, &params).unwrap();
        assert_eq!(inst.task_keys(), vec![TaskKey::edge(1)]);
    }

    #[test]
    fn round_trip_and_infeasibility() {
        let inst = parse_instance(MINIMAL).unwrap();
        assert_eq!(inst.round_trip(TaskKey::node(1)), 10.0);
        let tight = inst.with_fleet(FleetSpec { flight_range: 9.0, node_capacity: 1, max_vehicles: None });
        assert_eq!(tight.infeasible_tasks(), vec![TaskKey::node(1)]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn generated_round_trip(seed in 0u64..1000, n in 0usize..6, m in 0usize..6) {
            prop_assume!(n + m >= 1);
            let params = GeneratorParams { n_nodes: n, n_edges: m, area: 500.0, radius: 20.0, fleet: c1_fleet() };
            let inst = generate_instance(seed, &params).unwrap();
            let text = serialize_instance(&inst);
            let back = parse_instance(&text).unwrap();
            prop_assert_eq!(&back, &inst);
            prop_assert_eq!(serialize_instance(&back), text);
        }
    }
}
