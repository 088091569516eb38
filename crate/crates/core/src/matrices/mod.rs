//! Matrix types, generator families, and file IO.

mod bits;
mod comm;
mod dist;
mod generators;
mod hypercube;
mod io;
mod rect;

pub use bits::BitString;
pub use comm::{ceil_log2, distinct_row_count, one_way_cc, CommMatrix, Convention};
pub use dist::{DistKind, Distribution};
pub use generators::{
    gen_equality, gen_greater_than, gen_hadamard, gen_hamming_distance, gen_projective_intervals,
    gen_sign_inner_product_3d, greater_than_witness, random_matrix, sip3d_instance, sip3d_points,
    ProjectivePlane,
};
pub use hypercube::{binomial, hypercube_spectrum, hypercube_trace_lower};
pub use io::{format_matrix, load_matrix, parse_matrix, save_matrix};
pub use rect::{BitSet, Rectangle};
