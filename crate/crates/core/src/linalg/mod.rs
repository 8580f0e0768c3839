//! Nonnegative-matrix primitives: payoff matrices, their positivity graphs, strongly
//! connected components, simplex vectors and certified Perron pairs.

mod graph;
mod matrix;
mod perron;
mod simplex;

pub use graph::{build_graph, is_irreducible, scc_decompose, DirectedGraph, SccDecomposition};
pub use matrix::{parse_vector, PayoffMatrix};
pub use perron::{
    perron, perron_with, ratio_bracket, ratio_bracket_left, PerronOptions, PerronPair,
    RatioBracket, Side, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
pub use simplex::{SimplexVector, SIMPLEX_TOL};
