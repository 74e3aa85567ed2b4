//! Solver for the close-enough multi-vehicle general routing problem.
//!
//! A fleet leaves a depot to serve required edges (traversed end to end) and
//! required nodes (served anywhere inside a disk around them), minimizing total
//! Euclidean travel. The search alternates a general routing phase, where
//! nodes are treated as fixed points, with a close-enough phase that picks the
//! best representative point of each disk for the fixed task order.

pub mod cli;
pub mod close_enough;
pub mod construction;
pub mod driver;
pub mod exact_oracle;
pub mod geometry;
pub mod insertion;
pub mod instance;
pub mod neighborhoods;
pub mod perturbation;
pub mod solution;

pub use geometry::{dist, Disk, Point2};
pub use instance::{FleetSpec, Instance, Orientation, RequiredEdge, RequiredNode, TaskKey, TaskKind, TaskRef};
pub use solution::{PointAssignment, Route, Solution};
