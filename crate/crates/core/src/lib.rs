//! Numerical laboratory for moment growth of parabolic stochastic PDEs
//! `∂ₜu = 𝓛u + σ(u)ẇ` on the real line, where `ẇ` is space-time white noise
//! and `𝓛` generates a symmetric Lévy process with characteristic exponent Ψ.
//!
//! Three routes to the same quantities, kept deliberately independent so they
//! can cross-check each other:
//!
//! * **analytic** — the potential integral `Υ(β) = (1/2π)∫ dξ/(β+2ReΨ(ξ))`,
//!   Hermite-zero constants `z_p`, and the upper/lower moment-growth bounds
//!   built from them ([`upsilon`], [`hermite`], [`bounds`]);
//! * **deterministic** — the scalar Volterra renewal equation satisfied by
//!   `E|u(t,·)|²` in the linear, spatially homogeneous case ([`renewal`]);
//! * **stochastic** — spectral exponential-Euler Monte Carlo on a periodic
//!   grid with ensemble moment estimation ([`simulator`]).

pub mod bounds;
pub mod error;
pub mod hermite;
pub mod kernel;
pub mod levy;
pub mod quad;
pub mod renewal;
pub mod simulator;
pub mod upsilon;

pub use bounds::{BoundsReport, InitialData, ModelSpec, Sigma};
pub use error::{CoreError, Result};
pub use kernel::KernelEvaluator;
pub use levy::{LevySymbol, Recurrence};
pub use renewal::VolterraProblem;
pub use simulator::{Field, GridSpec, MomentCurve};
pub use upsilon::UpsilonEvaluator;
