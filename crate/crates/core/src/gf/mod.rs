mod excursion;
mod kernels;
mod passage;

pub use excursion::{
    excursion_gf_given_height, k_infinity, k_n, k_n_by_heights, k_n_constant, last_visit_gf, meander_gf,
};
pub use kernels::{gamma_turn, kernels, strata_pair, Dir, Kernels};
pub use passage::{lambda_homog, GfTable, Passage};
