//! Dense optimization engines: simplex LP, cutting planes, rectangle oracle, and the γ₂ cone program.

mod lazy;
mod lp;
mod rect_oracle;
mod sdp;
mod simplex;

pub use lazy::{solve_lp_lazy, solve_lp_lazy_with, violation_of, ConstraintOracle, LazyOptions, LazySolution, Separation, DEFAULT_MAX_CUTS};
pub use lp::{Constraint, LinearProgram, LpSolution, LpStatus, Relation, Sense};
pub use rect_oracle::{
    max_rect_exact, max_rect_heuristic, rect_weight, OracleAnswer, OracleMode, RectOracle, WeightedRect,
    EXACT_SIDE_CAP, HEURISTIC_RESTARTS,
};
pub use sdp::{
    certify_dual, diag_epigraph, solve_sdp, ConeProgram, DualCertificate, SdpOptions, SdpSolution, SdpStatus,
    UpperCertificate, MAX_ORDER,
};
pub use simplex::{solve_lp, solve_lp_with, IncrementalLp, SolveOptions, MAX_CONSTRAINTS, MAX_VARS};
