//! Sobolev calculus and flow duality on weighted metric graphs.
//!
//! The library models a desk-scale metric measure space as a finite graph
//! embedded in a normed space: edges carry lengths and linear measure
//! densities, vertices carry point masses. On top of that it provides
//!
//! * finite-dimensional norms with closed-form duals ([`normed`]),
//! * the discrete differential, its adjoint, and the slope energies
//!   ([`calculus`]),
//! * a Beckmann minimal-flow solver computing Fenchel conjugates through
//!   the dual p-Laplacian potential ([`beckmann`]),
//! * exact-rational 1-currents with cycle removal ([`currents`]),
//! * path superposition of acyclic flows into weighted plans
//!   ([`superposition`]),
//! * the two Sobolev energies and the duality chain tying them together
//!   ([`sobolev`]).
//!
//! Combinatorial quantities (boundaries, masses, occupations) are computed
//! in exact rational arithmetic; analytic quantities (energies, dual
//! norms, solver output) in `f64`.

pub mod beckmann;
pub mod calculus;
pub mod currents;
mod error;
pub mod exact;
pub mod normed;
mod rng;
pub mod sobolev;
pub mod space;
pub mod superposition;

pub use error::{Error, Violation};

pub type Result<T> = std::result::Result<T, Error>;
