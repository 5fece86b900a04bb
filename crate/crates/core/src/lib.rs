//! Distributed minimum-enclosing-ball solving via core-set consensus.
//!
//! Networked nodes, each holding a slice of a point set, agree on a small
//! core-set whose enclosing ball covers the whole set to a chosen accuracy,
//! by repeatedly exchanging candidate core-sets over a (possibly disconnected
//! at every instant) time-varying digraph and locally refining the best one
//! they have seen. Because two-norm soft-margin SVMs, SVDD, and one-class
//! SVMs reduce to enclosing-ball problems in kernel space, the same machinery
//! trains those models distributively.
//!
//! Module map:
//!
//! * [`point_space`] — points plus the inner-product geometries (explicit,
//!   SVM-augmented kernel, SVDD kernel).
//! * [`meb`] — enclosing-ball solver and the exact reference oracle.
//! * [`coreset`] — farthest-point/swap refinement of fixed-size core-sets.
//! * [`netsim`] — time-varying digraph and node-activity processes.
//! * [`consensus`] — the per-node routine, the synchronous round loop, and
//!   result verification.
//! * [`reductions`] — SVM/SVDD/one-class reductions and classifier recovery.

// Compiles and runs the README's code example alongside the doctests so it
// can't drift from the API.
#[doc = include_str!("../../../README.md")]
#[cfg(doctest)]
pub struct ReadmeDoctests;

pub mod consensus;
pub mod coreset;
mod error;
pub mod meb;
pub mod netsim;
pub mod point_space;
pub mod reductions;
pub mod seed;

pub use consensus::{
    detect_consensus, fixed_point_check, local_routine, run_consensus, verify_epsilon,
    ConsensusConfig, Message, NodeState, RunOutcome, Trace, VerificationReport,
};
pub use coreset::{
    best_removal, core_set_size, coreset_refine, coreset_refine_with_history, farthest_point,
    CoreSet,
};
pub use error::{Error, Result};
pub use meb::{meb_oracle, solve_meb, Ball, SolverConfig};
pub use netsim::{is_strongly_connected, union_graph, ActivityProcess, Digraph, GraphProcess};
pub use point_space::{load_points_csv, Kernel, Label, PointId, PointSpace, RawPoint};
pub use reductions::{
    extract_classifier, oneclass_to_meb, predict, svdd_to_meb, svm2norm_to_meb, Classifier,
    SupportVector, SvmProblem,
};
pub use seed::{stream_rng, StreamPurpose};
