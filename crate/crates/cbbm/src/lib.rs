//! Branching Brownian motion with a single point catalyst at the origin.
//!
//! A particle diffuses as a standard Brownian motion and branches into two
//! at the origin: its lifetime `T` satisfies `P(T > t | path) = exp(-βL_t)`,
//! where `L_t` is the local time at zero. Children restart at the origin and
//! behave independently like their parent.
//!
//! The crate has four layers:
//!
//! * [`analytics`] — deterministic evaluation of the closed-form quantities
//!   attached to the model: the exponential boundary measure μ, the invariant
//!   measure π, the speed-class exponent Δ_λ, the exact transition density and
//!   first moment, second-moment envelopes and the mixed-Poisson limit laws
//!   for particles near the critical front βt/2.
//! * [`sampling`] — exact (discretisation-free) samplers for everything the
//!   event-driven engine needs: first passage to the origin, zero-avoiding
//!   endpoints, joint (|position|, local time) over a window, inverse local
//!   time and truncated normal tails.
//! * [`simulate`] — the event-driven engine itself plus ensemble running with
//!   deterministic per-particle random streams.
//! * [`verify`] — a statistical harness confronting ensemble output with the
//!   analytics predictions, including an independent Euler-discretised oracle.

pub mod analytics;
pub mod interval;
pub mod quad;
pub mod rng;
pub mod sampling;
pub mod simulate;
pub mod special;
pub mod stats;
pub mod verify;

pub use interval::IntervalSet;
pub use simulate::{CountingWindow, ModelParams, ReplicateRecord, SimConfig, WindowSide};
