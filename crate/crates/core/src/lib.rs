//! Certification of convenience and non-degeneracy at infinity for polynomial
//! inequality systems `f_1 ≤ 0, …, f_p ≤ 0`, the explicit Hölder exponent of
//! the resulting global error bound, and sampling-based verification of that
//! bound.
//!
//! The pipeline is
//! [`polysys`] (parse) → [`newton`] (polytopes, faces at infinity) →
//! [`nondegen`] (rank of `M_Δ` on the torus) → [`bounds`] (exponents) →
//! [`verify`] (residuals, distances, slopes, fitted constant).

pub mod bounds;
pub mod exec;
pub mod newton;
pub mod nondegen;
mod optim;
pub mod polysys;
pub mod rng;
pub mod verify;

pub use exec::Execution;
pub use polysys::{ExponentVector, PolySystem, Polynomial};
