//! Schedule feasibility: time windows, travel and the execution budget.
//!
//! A schedule is feasible iff the greedy earliest-start propagation never
//! starts a task after its window closes and the summed execution cost fits
//! the budget. Waiting for a window to open is free.

use crate::model::{Instance, Schedule, User, EPSILON};
use crate::payoff::execution_cost;

/// A schedule with the start time of each of its tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedSchedule {
    pub schedule: Schedule,
    pub start_times: Vec<f64>,
}

/// The first task of a schedule that cannot be started inside its window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowMissed {
    /// Zero-based position in the schedule.
    pub index: usize,
    /// Earliest possible start at that position.
    pub earliest_start: f64,
    pub window_close: f64,
}

/// Propagates earliest start times along `sched`.
///
/// The first task starts at `max(open, travel time from the user's start)`;
/// each later one at `max(open, previous start + previous execution time +
/// travel time)`. Any other feasible vector for the same order is
/// componentwise no earlier.
pub fn earliest_schedule(
    user: &User,
    sched: &Schedule,
    inst: &Instance,
) -> Result<TimedSchedule, WindowMissed> {
    let mut start_times = Vec::with_capacity(sched.len());
    let mut here = user.start;
    let mut free_at = 0.0;
    for (index, &id) in sched.iter().enumerate() {
        let task = inst.task_unchecked(id);
        let arrival = free_at + user.travel_time(&here, &task.location);
        let start = arrival.max(task.window_open);
        if start > task.window_close + EPSILON {
            return Err(WindowMissed {
                index,
                earliest_start: start,
                window_close: task.window_close,
            });
        }
        start_times.push(start);
        free_at = start + user.exec_time_of(id);
        here = task.location;
    }
    Ok(TimedSchedule {
        schedule: sched.clone(),
        start_times,
    })
}

/// Time windows, travel and budget all satisfied.
pub fn is_feasible(user: &User, sched: &Schedule, inst: &Instance) -> bool {
    execution_cost(user, sched) <= user.budget + EPSILON
        && earliest_schedule(user, sched, inst).is_ok()
}
