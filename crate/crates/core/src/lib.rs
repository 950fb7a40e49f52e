//! Spectral discretization and variational solvers for
//!
//! ```text
//! (I-Δ)^α u + λV(x)u = f(x,u) + μξ(x)|u|^{p-2}u
//! ```
//!
//! on a periodic box. The crate is `no_std` (it needs `alloc`); file formats,
//! configuration, and the command line live in the `bessel-mp` crate.
//!
//! - [`grid`]: grids, fields, transforms, the multiplier `(1+|ξ|²)^s`, norms.
//! - [`kernels`]: the Bessel kernel `G_α`, `K_ν`, and the singular-integral
//!   form of `(I-Δ)^α`.
//! - [`problem`]: problem instances, assumption checks, the energy and its
//!   derivative.
//! - [`solvers`]: geometry probe, mountain-pass and ball-constrained solvers.
//! - [`verify`]: stand-alone numerical checks of the inequalities the
//!   existence theory relies on.
#![no_std]
// `Float` supplies the float math; whenever std is in the crate graph (tests,
// std dependents) its inherent methods shadow the trait and the import looks unused.
#![allow(unused_imports)]
// `!(x > 0.0)` style range checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod fft;
pub mod grid;
pub mod kernels;
pub mod linalg;
pub mod problem;
pub mod quadrature;
pub mod random;
pub mod solvers;
pub mod special;
pub mod verify;


pub use error::{Error, Result};
pub use grid::{Field, Grid, Spectrum};
pub use problem::{EnergyBreakdown, ProblemSpec};

