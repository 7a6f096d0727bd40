//! Scheduling malleable jobs on unrelated, restricted, and uniform machines.
//!
//! A malleable job may run on any set of machines simultaneously, finishing
//! after `f_j(sigma_j(S))` time units, where `sigma_j(S)` aggregates the
//! speeds the machines in `S` offer job `j` and `f_j` is a non-increasing
//! processing-time function with non-decreasing work `s * f_j(s)`.
//!
//! The crate provides, end to end:
//!
//! * exact-rational instance data with four function families ([`model`])
//! * the assignment relaxation for a makespan guess `C` and an exact
//!   two-phase simplex over big rationals ([`lp`])
//! * rounding schemes turning an extreme point into a schedule, with
//!   constant-factor guarantees per machine environment ([`rounding`])
//! * binary search driving the relaxation to a proven makespan ([`search`])
//! * interval-indexed relaxation and bucket rounding for the weighted
//!   completion-time objective ([`weighted`])
//! * a brute-force optimum for desk-size instances ([`oracle`])
//! * generators for worst-case families and random instances ([`instances`])
//!
//! All scheduling arithmetic is exact `BigRational`; the only approximated
//! quantities are fractional powers, computed deterministically to far
//! below the crate-wide comparison tolerance of `1e-9`.

pub mod instances;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod rounding;
pub mod search;
pub mod simplex;
pub mod weighted;

pub use model::{Instance, PNorm, ProcTimeFn, Schedule, Variant};
pub use rational::Rat;
