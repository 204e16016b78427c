//! Fractional Poisson processes, their special functions, and Monte Carlo
//! checks of their limit theorems.
//!
//! The fractional non-homogeneous Poisson process is the time change
//! N_α(t) = N_1(Λ(Y_α(t))) of a standard Poisson process by the inverse
//! α-stable subordinator. This crate provides:
//!
//! - [`specfun`]: the Mittag-Leffler function on the negative axis and the
//!   one-sided stable density g_α;
//! - [`laplace`]: Post-Widder/Gaver numerical transform inversion with
//!   Salzer acceleration;
//! - [`subordinator`]: densities, grids and samplers for Y_α(t);
//! - [`rates`]: linear, Weibull and Makeham cumulative rate functions;
//! - [`processes`]: samplers for Poisson, fractional and compound processes
//!   by renewal, time-change and record-value constructions;
//! - [`experiments`]: seeded, worker-count-invariant Monte Carlo experiments
//!   reproducing the limit theorems at desk scale.

pub mod experiments;
pub mod laplace;
mod numeric;
pub mod processes;
pub mod rates;
pub mod rng;
pub mod specfun;
pub mod subordinator;

pub use rng::RngStream;
pub use specfun::{EvalAccuracy, StabilityIndex};
