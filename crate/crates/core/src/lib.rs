//! Optimal tabletop object rearrangement with overhand grasps.
//!
//! The crate splits the problem along its two cost terms:
//!
//! * **grasp count**: objects whose goal footprint overlaps another object's
//!   start footprint induce a dependency digraph ([`depgraph`]); the objects
//!   parked in external buffers form a feedback vertex set ([`fvs`]).
//! * **end-effector travel**: without overlaps the problem reduces to a
//!   traveling-salesman tour ([`tsp`]); with overlaps a time-expanded 0/1
//!   program ([`mindist`]) picks the shortest schedule using the minimum
//!   number of grasps.
//!
//! [`pipeline`] wires the pieces into end-to-end solvers and [`ilp`] is the
//! small exact 0/1 engine the FVS and travel models are solved with.

pub mod bench;
pub mod depgraph;
pub mod fvs;
pub mod ilp;
pub mod instance;
pub mod mindist;
pub mod pipeline;
pub mod tsp;

pub use depgraph::{build_dependency_graph, DependencyDigraph, SccDecomposition};
pub use fvs::{FeedbackVertexSet, FvsMethod};
pub use ilp::{Budget, Engine, IlpModel, IlpSolution, SolveStatus};
pub use instance::{
    overlaps, Action, ActionPlan, CostParams, Instance, Location, Move, ObjectSpec, Pose,
    Workspace,
};
pub use pipeline::SolveReport;
pub use tsp::TspMode;
