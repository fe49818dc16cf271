//! Travelling polarisation and depolarisation waves in a one-dimensional
//! model of collective cell migration.
//!
//! Cells carry a position and a scalar polarity `a`; a cell migrates with
//! unit active speed once its polarity exceeds a threshold `alpha`, and
//! neighbouring cells are coupled by springs of stiffness `kappa`. The crate
//! covers
//!
//! * [`model`]: the closed-form travelling waves S1-S4, the maps between
//!   them and the travelling-wave ODE,
//! * [`particles`]: the discrete spring-chain model,
//! * [`continuum`]: a Lax-Friedrichs type finite-volume solver for the
//!   continuum model, front tracking and the threshold-polarity experiment,
//! * [`spectra`]: asymptotic matrices, Fredholm borders, absolute spectrum
//!   and exponential weights,
//! * [`evans`]: the Evans function of the linearised problem and
//!   argument-principle winding numbers.

pub mod continuum;
pub mod evans;
mod fit;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod particles;
pub mod spectra;

pub use num_complex::Complex64;
