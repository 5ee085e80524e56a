//! Exact representation and algebra of piecewise-linear paths on [0, 1]:
//! the slope-code correspondence, linear evaluation, and the Schauder (tent
//! function) decomposition with its dyadic partial sums.
//!
//! All types are immutable after construction and all operations are pure
//! functions; everything here is safe to share and call concurrently.

mod code;
mod dyadic;
mod path;
mod schauder;

pub use code::BinaryCode;
pub use dyadic::DyadicRational;
pub use path::{PathGrid, PiecewiseLinearPath, Segment};
pub use schauder::{schauder_basis, SchauderCoeffs, SchauderIndex};
