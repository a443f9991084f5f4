//! Linking expander, hashing schemes and their desk-scale verifiers.

pub mod graph;
pub mod hashing;
pub mod verify;

pub use graph::{gen_regular_expander, RegularGraph};
pub use hashing::{gen_one_layer, gen_two_layer, prf, reduce, Bipartite, ExplicitScheme, OneLayerScheme, TwoLayerScheme};
pub use verify::{
    gen_out_regular_digraph, neighborhood_profile, removal_check, unique_neighbor_counts, verify_expansion,
    verify_expansion_with_mode, verify_isolation, CheckMode, CheckReport, RemovalReport,
};
