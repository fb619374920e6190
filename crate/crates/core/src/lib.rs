//! Discrete potential theory and heat-kernel diagnostics for weighted graphs.
//!
//! The crate computes capacities, exit times, Poincaré constants and heat
//! kernels on finite pieces of weighted graphs, audits volume growth,
//! Poincaré and capacity conditions scale by scale, checks two-sided
//! sub-Gaussian heat kernel bounds, and replays the level-set argument that
//! turns these hypotheses into an exit-time lower bound.

pub mod audit;
pub mod error;
pub mod fit;
pub mod generators;
pub mod graph;
pub mod heat_kernel;
pub mod inequalities;
pub mod io;
pub mod linalg;
pub mod potential;
pub mod proof_trace;
pub mod report;

pub use audit::{auto_center, run_audit, AuditConfig, AuditReport};
pub use error::{Error, Result};
pub use fit::{linear_fit, ExponentFit, LinearFit};
pub use graph::{Coordinates, FieldKind, ScalarField, VertexId, VertexSet, WeightedGraph};
pub use heat_kernel::{HeatKernelEvolution, HeatKernelRow};
pub use linalg::{CgOptions, OperatorMode, QuadraticForm, RayleighOptions, SparseSymOperator};
pub use potential::{Capacity, CapacityResult};
pub use proof_trace::{ContentBounds, Cover, ProofTrace};
pub use report::{hypothesis_gate, to_stable_json, Condition, ConditionReport, Rule, ScaleConstant, Verdict};
