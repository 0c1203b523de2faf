//! Scalar numerical kernels shared by the solvers: adaptive Gauss-Kronrod
//! quadrature, Brent bracketing, and monotone cubic interpolation.

pub mod interp;
pub mod quad;
pub mod roots;

pub use interp::MonotoneCubic;
pub use quad::{integrate, QuadOptions, QuadResult};
pub use roots::brent;
