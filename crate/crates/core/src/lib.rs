//! Exact MBLP embeddings of rectangle strip packing with clearances, an
//! exact simplex and branch-and-bound, and an idealness prover for the
//! pairwise relaxations.
//!
//! All arithmetic is over [`Rational`].

pub mod bnb;
pub mod formulations;
pub mod ideal;
pub mod lp;
pub mod matrix;
pub mod model;
pub mod oracle;
pub mod packing;
pub mod rational;
pub mod strip;

pub use bnb::{solve_milp, BnbResult, BnbStatus, BranchRule, NodeOrder, SolveOptions};
pub use formulations::{build, build_strip_packing, FormulationError, Selection, StripPacking};
pub use ideal::{check_pairwise_ideal, EnumMethod, IdealError, IdealnessReport, Verdict};
pub use lp::{solve_lp, LpSolution, LpStatus};
pub use model::{FormulationKind, FormulationOptions, LinearRow, MblpModel, RowTag, Var};
pub use oracle::{disjunction_oracle, OracleError, OracleResult};
pub use packing::{
    derive_parameters, generate_instance, greedy_initial_layout, validate_layout, Clearance, DerivedParams, Dir,
    GenConfig, Instance, ObjectSpec, PackingError, PackingSolution, Region,
};
pub use rational::Rational;
pub use strip::{solve_strip, StripOutcome};
