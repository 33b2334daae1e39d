//! Exponentially small separatrix splitting for the discretized pendulum
//! `q(t+ε) + q(t−ε) − 2q(t) = ε² sin q(t)`.
//!
//! Two independent routes are provided:
//!
//! * [`series`]: the exact formal separatrix series in `d = 2 arcsinh(ε/2)`
//!   with polynomial coefficients in `u = tanh(dt/ε)`, and the splitting
//!   constant `α` read from its Gevrey-1 tail.
//! * [`dynamics`]: multiprecision stable and unstable manifolds of the map
//!   and the measured vertical distance between them.

pub mod dynamics;
pub mod json;
pub mod mp;
pub mod poly;
pub mod series;
pub mod tau;
pub mod validate;

pub use poly::{Poly, PolyError};
pub use series::{DSeries, FormalSolution, SeriesError};
pub use tau::{TauBasis, TauExpansion};
