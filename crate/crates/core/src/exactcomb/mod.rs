//! Exact combinatorial measures by search.

mod budget;
mod cover;
mod protocol;
mod rank;
mod signrank;
mod vc;

pub use budget::{Meter, SearchBudget};
pub use cover::{
    boolean_rank, cover_number, cover_total, cover_with_witness, maximal_rectangles, min_exact_cover, min_set_cover,
    n_z, ones_partition_number, partition_number, rank_plus_bracket,
};
pub use protocol::{
    deterministic_cc, deterministic_protocol, protocol_partition_number, protocol_partition_tree, ProtocolNode,
    ProtocolTree, Speaker,
};
pub use rank::{rank_exact, rank_integer, rank_with, ExactInt};
pub use signrank::{signrank_le_2, verify_sign_factorization, SignRankDecision, SignWitness, SIGN_MARGIN};
pub use vc::{sauer_shelah_check, sq_dimension_uniform, vc_dimension, CappedDim, SauerShelah};

/// Nonnegative sign-rank of a Boolean matrix (equal to its 1-cover number).
pub use cover::boolean_rank as signrank_plus;
