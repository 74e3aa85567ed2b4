//! Routes, solutions, objective evaluation and the feasibility validator.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{dist, Disk, Point2};
use crate::instance::{Instance, Orientation, TaskKey, TaskKind, TaskRef, RANGE_EPS};

/// Tolerance for point feasibility (inside disk, fixed points unmoved).
pub const POINT_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SolutionError {
    #[error("unknown task {0}")]
    UnknownTask(TaskKey),
    #[error("route {route}: expected {expected} points, got {actual}")]
    PointCountMismatch { route: usize, expected: usize, actual: usize },
    #[error("route count mismatch: {routes} routes but {assigned} point lists")]
    RouteCountMismatch { routes: usize, assigned: usize },
    #[error("malformed solution document: {0}")]
    Format(String),
}

/// One vehicle tour; the depot at both ends is implicit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Route {
    pub tasks: Vec<TaskRef>,
}

impl Route {
    pub fn new(tasks: Vec<TaskRef>) -> Self {
        Self { tasks }
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.tasks.iter().filter(|t| t.is_node()).count()
    }

    /// The route driven backwards: task order reversed, every edge flipped.
    pub fn reversed(&self) -> Route {
        Route::new(self.tasks.iter().rev().map(TaskRef::flipped).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Solution {
    pub routes: Vec<Route>,
}

impl Solution {
    pub fn new(routes: Vec<Route>) -> Self {
        let mut s = Self { routes };
        s.drop_empty_routes();
        s
    }

    pub fn drop_empty_routes(&mut self) {
        self.routes.retain(|r| !r.is_empty());
    }

    pub fn task_count(&self) -> usize {
        self.routes.iter().map(Route::len).sum()
    }

    pub fn tasks(&self) -> impl Iterator<Item = TaskRef> + '_ {
        self.routes.iter().flat_map(|r| r.tasks.iter().copied())
    }

    /// `(route, position)` of a task, if present.
    pub fn locate(&self, key: TaskKey) -> Option<(usize, usize)> {
        self.routes.iter().enumerate().find_map(|(ri, r)| {
            r.tasks.iter().position(|t| t.key() == key).map(|pos| (ri, pos))
        })
    }
}

/// Representative points per route, one per visited vertex including the
/// depot at both ends.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointAssignment {
    pub routes: Vec<Vec<Point2>>,
}

/// Visited-vertex chain of a route as disks: depot, then each node's disk or
/// the two edge endpoints in traversal order, then depot. Fixed vertices have
/// radius zero.
pub fn vertex_sequence(route: &Route, instance: &Instance) -> Result<Vec<Disk>, SolutionError> {
    let depot = Disk::point(instance.depot());
    let mut out = Vec::with_capacity(route.len() * 2 + 2);
    out.push(depot);
    for &t in &route.tasks {
        match t {
            TaskRef::Node(id) => {
                let n = instance.node(id).ok_or(SolutionError::UnknownTask(t.key()))?;
                out.push(n.disk());
            }
            TaskRef::Edge(..) => {
                let (entry, exit) = instance.try_endpoints(t).ok_or(SolutionError::UnknownTask(t.key()))?;
                out.push(Disk::point(entry));
                out.push(Disk::point(exit));
            }
        }
    }
    out.push(depot);
    Ok(out)
}

/// Center-evaluated length of a task sequence. Panics on unknown tasks; the
/// search only handles validated routes.
#[inline]
pub fn tasks_length(tasks: &[TaskRef], instance: &Instance) -> f64 {
    let mut pos = instance.depot();
    let mut total = 0.0;
    for &t in tasks {
        let (entry, exit) = instance.endpoints(t);
        total += dist(pos, entry) + instance.service_length(t);
        pos = exit;
    }
    total + dist(pos, instance.depot())
}

/// Route length through `points` if given, else through node centers.
pub fn route_length(route: &Route, instance: &Instance, points: Option<&[Point2]>) -> Result<f64, SolutionError> {
    for t in &route.tasks {
        if !instance.contains(t.key()) {
            return Err(SolutionError::UnknownTask(t.key()));
        }
    }
    match points {
        None => Ok(tasks_length(&route.tasks, instance)),
        Some(pts) => {
            let expected = vertex_count(route);
            if pts.len() != expected {
                return Err(SolutionError::PointCountMismatch { route: 0, expected, actual: pts.len() });
            }
            Ok(chain_length(pts))
        }
    }
}

pub fn vertex_count(route: &Route) -> usize {
    2 + route.tasks.iter().map(|t| if t.is_edge() { 2 } else { 1 }).sum::<usize>()
}

pub fn chain_length(points: &[Point2]) -> f64 {
    points.windows(2).map(|w| dist(w[0], w[1])).sum()
}

pub fn total_distance(
    solution: &Solution,
    instance: &Instance,
    points: Option<&PointAssignment>,
) -> Result<f64, SolutionError> {
    match points {
        None => solution.routes.iter().map(|r| route_length(r, instance, None)).sum(),
        Some(pa) => {
            if pa.routes.len() != solution.routes.len() {
                return Err(SolutionError::RouteCountMismatch {
                    routes: solution.routes.len(),
                    assigned: pa.routes.len(),
                });
            }
            let mut total = 0.0;
            for (i, (r, pts)) in solution.routes.iter().zip(&pa.routes).enumerate() {
                total += route_length(r, instance, Some(pts)).map_err(|e| match e {
                    SolutionError::PointCountMismatch { expected, actual, .. } => {
                        SolutionError::PointCountMismatch { route: i, expected, actual }
                    }
                    other => other,
                })?;
            }
            Ok(total)
        }
    }
}

/// Center-evaluated objective for solutions known to reference valid tasks.
pub fn solution_length(solution: &Solution, instance: &Instance) -> f64 {
    solution.routes.iter().map(|r| tasks_length(&r.tasks, instance)).sum()
}

/// Capacity and flight-range check for one task sequence.
pub fn route_is_feasible(tasks: &[TaskRef], instance: &Instance) -> bool {
    let nodes = tasks.iter().filter(|t| t.is_node()).count();
    nodes <= instance.fleet().node_capacity as usize
        && tasks_length(tasks, instance) <= instance.fleet().flight_range + RANGE_EPS
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationClass {
    UnknownTask,
    Uncovered,
    DuplicateCoverage,
    CapacityExceeded,
    RangeExceeded,
    TooManyRoutes,
    EmptyRoute,
    PointOutsideDisk,
    FixedPointMoved,
    PointCountMismatch,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    UnknownTask { route: usize, task: TaskKey },
    Uncovered { task: TaskKey },
    DuplicateCoverage { task: TaskKey, count: usize },
    CapacityExceeded { route: usize, nodes: usize, capacity: u32 },
    RangeExceeded { route: usize, length: f64, limit: f64 },
    TooManyRoutes { routes: usize, limit: u32 },
    EmptyRoute { route: usize },
    PointOutsideDisk { route: usize, vertex: usize, excess: f64 },
    FixedPointMoved { route: usize, vertex: usize, offset: f64 },
    PointCountMismatch { route: usize, expected: usize, actual: usize },
}

impl Violation {
    pub fn class(&self) -> ViolationClass {
        match self {
            Violation::UnknownTask { .. } => ViolationClass::UnknownTask,
            Violation::Uncovered { .. } => ViolationClass::Uncovered,
            Violation::DuplicateCoverage { .. } => ViolationClass::DuplicateCoverage,
            Violation::CapacityExceeded { .. } => ViolationClass::CapacityExceeded,
            Violation::RangeExceeded { .. } => ViolationClass::RangeExceeded,
            Violation::TooManyRoutes { .. } => ViolationClass::TooManyRoutes,
            Violation::EmptyRoute { .. } => ViolationClass::EmptyRoute,
            Violation::PointOutsideDisk { .. } => ViolationClass::PointOutsideDisk,
            Violation::FixedPointMoved { .. } => ViolationClass::FixedPointMoved,
            Violation::PointCountMismatch { .. } => ViolationClass::PointCountMismatch,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownTask { route, task } => write!(f, "route {route}: unknown task {task}"),
            Violation::Uncovered { task } => write!(f, "uncovered task: {task}"),
            Violation::DuplicateCoverage { task, count } => {
                write!(f, "duplicate coverage: {task} served {count} times")
            }
            Violation::CapacityExceeded { route, nodes, capacity } => {
                write!(f, "route {route}: capacity exceeded ({nodes} nodes > Q = {capacity})")
            }
            Violation::RangeExceeded { route, length, limit } => {
                write!(f, "route {route}: range exceeded ({length:.6} > L = {limit})")
            }
            Violation::TooManyRoutes { routes, limit } => write!(f, "too many routes ({routes} > {limit})"),
            Violation::EmptyRoute { route } => write!(f, "route {route}: empty"),
            Violation::PointOutsideDisk { route, vertex, excess } => {
                write!(f, "route {route} vertex {vertex}: point outside its disk by {excess:e}")
            }
            Violation::FixedPointMoved { route, vertex, offset } => {
                write!(f, "route {route} vertex {vertex}: fixed point moved by {offset:e}")
            }
            Violation::PointCountMismatch { route, expected, actual } => {
                write!(f, "route {route}: expected {expected} points, got {actual}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, class: ViolationClass) -> bool {
        self.violations.iter().any(|v| v.class() == class)
    }
}

/// Checks coverage, capacity, flight range and fleet size.
///
/// Flow conservation and subtour elimination need no check: a route is a
/// single sequence anchored at the depot, so it is connected and balanced by
/// construction. Range is measured through node centers, which bounds the
/// length after point optimization from above.
pub fn validate(solution: &Solution, instance: &Instance) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen: HashMap<TaskKey, usize> = HashMap::new();
    let fleet = instance.fleet();

    for (ri, route) in solution.routes.iter().enumerate() {
        if route.is_empty() {
            violations.push(Violation::EmptyRoute { route: ri });
            continue;
        }
        let mut all_known = true;
        for t in &route.tasks {
            let key = t.key();
            if instance.contains(key) {
                *seen.entry(key).or_default() += 1;
            } else {
                all_known = false;
                violations.push(Violation::UnknownTask { route: ri, task: key });
            }
        }
        let nodes = route.node_count();
        if nodes > fleet.node_capacity as usize {
            violations.push(Violation::CapacityExceeded { route: ri, nodes, capacity: fleet.node_capacity });
        }
        if all_known {
            let length = tasks_length(&route.tasks, instance);
            if length > fleet.flight_range + RANGE_EPS {
                violations.push(Violation::RangeExceeded { route: ri, length, limit: fleet.flight_range });
            }
        }
    }

    for key in instance.task_keys() {
        match seen.get(&key).copied().unwrap_or(0) {
            0 => violations.push(Violation::Uncovered { task: key }),
            1 => {}
            count => violations.push(Violation::DuplicateCoverage { task: key, count }),
        }
    }

    if let Some(limit) = fleet.max_vehicles {
        if solution.routes.len() > limit as usize {
            violations.push(Violation::TooManyRoutes { routes: solution.routes.len(), limit });
        }
    }
    ValidationReport { violations }
}

/// Checks that representative points are feasible: each node point inside its
/// disk, depot and edge endpoints at their fixed coordinates.
pub fn validate_points(solution: &Solution, instance: &Instance, points: &PointAssignment) -> ValidationReport {
    let mut violations = Vec::new();
    for (ri, route) in solution.routes.iter().enumerate() {
        let Ok(disks) = vertex_sequence(route, instance) else {
            continue;
        };
        let Some(pts) = points.routes.get(ri) else {
            violations.push(Violation::PointCountMismatch { route: ri, expected: disks.len(), actual: 0 });
            continue;
        };
        if pts.len() != disks.len() {
            violations.push(Violation::PointCountMismatch { route: ri, expected: disks.len(), actual: pts.len() });
            continue;
        }
        for (vi, (d, p)) in disks.iter().zip(pts).enumerate() {
            let off = dist(*p, d.center);
            if d.is_fixed() {
                if off > POINT_EPS {
                    violations.push(Violation::FixedPointMoved { route: ri, vertex: vi, offset: off });
                }
            } else if off > d.radius + POINT_EPS {
                violations.push(Violation::PointOutsideDisk { route: ri, vertex: vi, excess: off - d.radius });
            }
        }
    }
    if points.routes.len() > solution.routes.len() {
        violations.push(Violation::PointCountMismatch {
            route: solution.routes.len(),
            expected: 0,
            actual: points.routes[solution.routes.len()].len(),
        });
    }
    ValidationReport { violations }
}

// ---------------------------------------------------------------------------
// JSON format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TaskDoc {
    kind: TaskKind,
    id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    orientation: Option<OrientationDoc>,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum OrientationDoc {
    Fwd,
    Rev,
}

#[derive(Serialize, Deserialize)]
struct RouteDoc {
    tasks: Vec<TaskDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct SolutionDoc {
    instance: String,
    routes: Vec<RouteDoc>,
    total_distance: f64,
}

/// A solution file as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub instance: String,
    pub solution: Solution,
    pub points: Option<PointAssignment>,
    pub total_distance: f64,
}

pub fn serialize_solution(
    instance_name: &str,
    solution: &Solution,
    points: Option<&PointAssignment>,
    total_distance: f64,
) -> String {
    let routes = solution
        .routes
        .iter()
        .enumerate()
        .map(|(i, r)| RouteDoc {
            tasks: r
                .tasks
                .iter()
                .map(|t| match *t {
                    TaskRef::Node(id) => TaskDoc { kind: TaskKind::Node, id, orientation: None },
                    TaskRef::Edge(id, o) => TaskDoc {
                        kind: TaskKind::Edge,
                        id,
                        orientation: Some(match o {
                            Orientation::Forward => OrientationDoc::Fwd,
                            Orientation::Reverse => OrientationDoc::Rev,
                        }),
                    },
                })
                .collect(),
            points: points.and_then(|p| p.routes.get(i)).map(|pts| pts.iter().map(|&p| p.into()).collect()),
        })
        .collect();
    let doc = SolutionDoc { instance: instance_name.to_string(), routes, total_distance };
    serde_json::to_string_pretty(&doc).expect("solution documents always serialize")
}

pub fn parse_solution(document: &str) -> Result<SolutionFile, SolutionError> {
    let doc: SolutionDoc = serde_json::from_str(document).map_err(|e| SolutionError::Format(e.to_string()))?;
    let mut routes = Vec::with_capacity(doc.routes.len());
    let mut point_routes = Vec::with_capacity(doc.routes.len());
    let mut all_points = true;
    for (ri, r) in doc.routes.into_iter().enumerate() {
        let tasks = r
            .tasks
            .into_iter()
            .enumerate()
            .map(|(ti, t)| match (t.kind, t.orientation) {
                (TaskKind::Node, None) => Ok(TaskRef::Node(t.id)),
                (TaskKind::Edge, Some(OrientationDoc::Fwd)) => Ok(TaskRef::Edge(t.id, Orientation::Forward)),
                (TaskKind::Edge, Some(OrientationDoc::Rev)) => Ok(TaskRef::Edge(t.id, Orientation::Reverse)),
                (TaskKind::Node, Some(_)) => {
                    Err(SolutionError::Format(format!("routes[{ri}].tasks[{ti}]: node task with orientation")))
                }
                (TaskKind::Edge, None) => {
                    Err(SolutionError::Format(format!("routes[{ri}].tasks[{ti}]: edge task without orientation")))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        routes.push(Route::new(tasks));
        match r.points {
            Some(pts) => point_routes.push(pts.into_iter().map(Point2::from).collect()),
            None => all_points = false,
        }
    }
    Ok(SolutionFile {
        instance: doc.instance,
        // Keep empty routes so the validator can report them.
        solution: Solution { routes },
        points: (all_points && !point_routes.is_empty()).then_some(PointAssignment { routes: point_routes }),
        total_distance: doc.total_distance,
    })
}
