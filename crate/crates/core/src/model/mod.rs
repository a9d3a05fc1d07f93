//! Max-structured DC programs `g(x) - Σ_ℓ w_ℓ max_i ψ_ℓi(x) + c`.

mod block;
mod column;
mod convex;
mod piece;
mod program;

pub use block::{BlockActive, BlockKind, Elem, MaxBlock, Signs, SubsetActive};
pub use column::{BlockGradients, Candidate, Column};
pub use convex::{ConvexKind, ConvexPart};
pub use piece::SmoothPiece;
pub use program::{ActiveSet, Bounds, DcProgram, QuboAttachment};
