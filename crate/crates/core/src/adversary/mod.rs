//! Adversarial sets: backtracks, spiral chains, zig-zag and backtracking sets.

mod atlas;
mod case;
mod lines;
mod params;
mod spiral;
mod zigzag;

pub use atlas::{build_atlas, BacktrackAtlas};
pub use case::{run_case_dichotomy, CaseKind, CaseReport, Inequality};
pub use lines::{
    backtracking_set, backtracking_set_partial, best_backtracking_set, estimate_sigma_expectation,
    passes_through, sample_line, sample_line_at, BacktrackingSet, BadScale, LineSample,
    SigmaEstimate,
};
pub use params::{default_params, icbrt, Params};
pub use spiral::{
    cells_in_rect, find_backtrack, radial_ray, search_square, secant_observation_check,
    spiral_chain, spiral_chain_with, spiral_friendly_oracle, verify_backtrack, Backtrack, Ray,
    SpiralChain, Termination, TieBreak, LAW_TOL,
};
pub use zigzag::{chain_walk, zigzag_set, ZigzagSet};

#[cfg(test)]
mod tests;
