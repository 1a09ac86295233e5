//! Multi-floor multi-agent path finding with elevators.
//!
//! Agents move on a stack of grid floors and change floor only by riding an
//! elevator, at most once. The solver is conflict-based search with
//! elevator-aware conflicts, range constraints for overlapping rides and
//! decision diagrams for conflict selection and bypassing.

pub mod bench;
pub mod cbs;
pub mod constraint;
pub mod elevator;
pub mod mdd;
pub mod model;
pub mod oracle;
pub mod path;
pub mod sipp;

pub use cbs::{solve, validate, Conflict, Solution, SolveError, SolveStats, SolverConfig};
pub use constraint::{Constraint, ConstraintSet, IntervalSet};
pub use elevator::{ElevatorConflict, ElevatorUsage};
pub use model::{Agent, Elevator, FloorGrid, Instance, ModelError, MultiFloorGraph, Time, Vertex};
pub use path::{Path, TimedVertex};
