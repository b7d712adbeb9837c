//! Task scheduling game for user-centric participatory sensing.
//!
//! Mobile users each pick an ordered set of location-bound, time-windowed
//! sensing tasks. Rewards of a task are shared equally among everyone who
//! executes it, so users compete. The game is an exact potential game, which
//! gives a constructive route to Nash equilibria (best-response dynamics or
//! potential maximization) that can be compared with the welfare optimum.
//!
//! Module map:
//!
//! - [`model`]: tasks, users, instances, schedules, profiles and validation.
//! - [`feasibility`]: earliest start times and schedule feasibility.
//! - [`payoff`]: execution counts, payoffs, potential, welfare and fairness.
//! - [`best_response`]: exact single-user optimization by branch-and-bound.
//! - [`dynamics`]: best-response dynamics and equilibrium verification.
//! - [`optimizer`]: exact potential and welfare maximization plus a greedy heuristic.
//! - [`instance_gen`]: seeded random instances.
//! - [`experiments`]: sweeps and single-instance reports.
//! - [`io`]: JSON instance and profile files.

pub mod best_response;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod feasibility;
pub mod instance_gen;
pub mod io;
pub mod model;
pub mod optimizer;
pub mod payoff;

pub use error::{Error, Result};
pub use model::{Instance, Location, Profile, Schedule, Task, TaskId, User, UserId, EPSILON};
