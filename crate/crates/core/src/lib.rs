//! Direct, inverse and mixed problems for convolution integro-differential
//! equations `u″ = h∗Au + f` and `u′ = l∗Au + f` in a separable Hilbert
//! space, realized through the spectral decomposition of a self-adjoint
//! operator `A`.
//!
//! The crate is organized bottom-up:
//!
//! * [`timegrid`] — uniform grids, trapezoidal convolution quadrature,
//!   numerical differentiation of sampled data;
//! * [`volterra`] — marching solvers for Volterra equations of the second
//!   and first kind, resolvent kernels and their Neumann-series oracle,
//!   growth bounds;
//! * [`spectral`] — the operator `A` as a finite list of eigenvalues, the
//!   1-D Dirichlet Laplacian eigenbasis, projection and synthesis;
//! * [`direct`] — modal Cauchy problems for the second- and first-order
//!   equations and measurement traces `g(t) = (u(t), φ)`;
//! * [`bvp`] — modal two-point problems with `u(0), u(T)` or
//!   `u′(0), u(T)` data, solvability reports, sign conditions and
//!   convergence diagnostics;
//! * [`identify`] — recovery of the memory kernel `h` (or `l`) from the
//!   measurement trace, plus compatibility checking of the data.
//!
//! All numerics are generic over the floating-point [`Scalar`]; the
//! `*64`/`*32` aliases below pin the common concrete choices.

pub mod bvp;
pub mod direct;
mod error;
pub mod identify;
mod scalar;
pub mod spectral;
pub mod timegrid;
pub mod volterra;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use timegrid::{convolve, differentiate, lift1, DerivOrder, GridFunction, TimeGrid};

/// `f64` aliases for the core value types.
pub type TimeGrid64 = timegrid::TimeGrid<f64>;
pub type GridFunction64 = timegrid::GridFunction<f64>;
pub type Kernel64 = volterra::Kernel<f64>;
pub type ResolventKernel64 = volterra::ResolventKernel<f64>;
pub type SpectralOperator64 = spectral::SpectralOperator<f64>;
pub type ModalProblemData64 = spectral::ModalProblemData<f64>;
pub type ModalSolution64 = direct::ModalSolution<f64>;
pub type MeasurementTrace64 = direct::MeasurementTrace<f64>;
pub type IdentificationInput64 = identify::IdentificationInput<f64>;

/// `f32` aliases, mostly exercised by tests that pin down genericity.
pub type TimeGrid32 = timegrid::TimeGrid<f32>;
pub type GridFunction32 = timegrid::GridFunction<f32>;
pub type Kernel32 = volterra::Kernel<f32>;
