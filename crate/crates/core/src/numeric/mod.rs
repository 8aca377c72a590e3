//! Numerical building blocks: quadrature, root finding, normal-law helpers,
//! sample summaries.

pub mod quadrature;
pub mod roots;
pub mod special;
pub mod summary;

pub use quadrature::{integrate, integrate_pieces, Integral, Tolerance};
pub use roots::{brent, expand_bracket};
