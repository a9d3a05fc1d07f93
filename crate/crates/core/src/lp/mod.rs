//! The sampled Chebyshev LP over the simplex, its projected least-squares
//! fallback, and Euclidean simplex projection.

mod chebyshev;
mod projection;
pub mod simplex;

pub use chebyshev::{
    solve_block_chebyshev, solve_chebyshev, solve_grouped_least_squares,
    solve_simplex_least_squares, Backend, ChebyshevSolution, LpConfig,
};
pub use projection::{project_simplex, project_simplex_into};
