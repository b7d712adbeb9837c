//! Scalar functions of a profile: execution counts, rewards, costs, payoffs,
//! the exact potential, social welfare and Jain's fairness index.

use std::collections::BTreeMap;

use crate::model::{distance, Instance, Profile, Schedule, TaskId, User};

/// Number of users executing each task. Tasks in no schedule read as zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExecutionCounts(BTreeMap<TaskId, usize>);

impl ExecutionCounts {
    pub fn get(&self, task: TaskId) -> usize {
        self.0.get(&task).copied().unwrap_or(0)
    }

    pub fn add(&mut self, sched: &Schedule) {
        for &task in sched.iter() {
            *self.0.entry(task).or_insert(0) += 1;
        }
    }

    pub fn remove(&mut self, sched: &Schedule) {
        for &task in sched.iter() {
            if let Some(count) = self.0.get_mut(&task) {
                *count -= 1;
                if *count == 0 {
                    self.0.remove(&task);
                }
            }
        }
    }

    /// Nonzero counts in task id order.
    pub fn iter(&self) -> impl Iterator<Item = (TaskId, usize)> + '_ {
        self.0.iter().map(|(&k, &m)| (k, m))
    }

    /// Total number of task executions, the sum of all counts.
    pub fn total(&self) -> usize {
        self.0.values().sum()
    }
}

pub fn execution_counts(profile: &Profile) -> ExecutionCounts {
    let mut counts = ExecutionCounts::default();
    for sched in profile.schedules() {
        counts.add(sched);
    }
    counts
}

/// Counts from every schedule except `user`'s.
pub fn opponent_counts(profile: &Profile, user: usize) -> ExecutionCounts {
    let mut counts = ExecutionCounts::default();
    for (i, sched) in profile.schedules().iter().enumerate() {
        if i != user {
            counts.add(sched);
        }
    }
    counts
}

fn reward_with_counts(sched: &Schedule, counts: &ExecutionCounts, inst: &Instance) -> f64 {
    sched
        .iter()
        .map(|&k| inst.task_unchecked(k).reward / counts.get(k) as f64)
        .sum()
}

/// Equal-share reward of `user`: each executed task pays `V_k / M_k`.
pub fn user_reward(profile: &Profile, user: usize, inst: &Instance) -> f64 {
    let counts = execution_counts(profile);
    reward_with_counts(profile.schedule(user), &counts, inst)
}

pub fn execution_cost(user: &User, sched: &Schedule) -> f64 {
    sched.iter().map(|&k| user.exec_cost_of(k)).sum()
}

/// Chained travel distance from the user's start through the schedule, priced
/// at the user's travel cost rate.
pub fn travel_cost(user: &User, sched: &Schedule, inst: &Instance) -> f64 {
    let mut here = user.start;
    let mut meters = 0.0;
    for &k in sched.iter() {
        let next = inst.task_unchecked(k).location;
        meters += distance(&here, &next);
        here = next;
    }
    meters * user.travel_cost_rate
}

/// Both cost terms of a schedule.
pub fn total_cost(user: &User, sched: &Schedule, inst: &Instance) -> f64 {
    execution_cost(user, sched) + travel_cost(user, sched, inst)
}

pub fn user_payoff(profile: &Profile, user: usize, inst: &Instance) -> f64 {
    let counts = execution_counts(profile);
    payoff_with_counts(profile, user, &counts, inst)
}

fn payoff_with_counts(
    profile: &Profile,
    i: usize,
    counts: &ExecutionCounts,
    inst: &Instance,
) -> f64 {
    let sched = profile.schedule(i);
    let user = inst.user(i);
    reward_with_counts(sched, counts, inst)
        - execution_cost(user, sched)
        - travel_cost(user, sched, inst)
}

/// Payoffs of all users, in user order.
pub fn payoffs(profile: &Profile, inst: &Instance) -> Vec<f64> {
    let counts = execution_counts(profile);
    (0..profile.num_users())
        .map(|i| payoff_with_counts(profile, i, &counts, inst))
        .collect()
}

/// `1 + 1/2 + ... + 1/m`, zero for `m = 0`.
pub fn harmonic(m: usize) -> f64 {
    (1..=m).map(|j| 1.0 / j as f64).sum()
}

fn total_costs(profile: &Profile, inst: &Instance) -> f64 {
    profile
        .schedules()
        .iter()
        .zip(inst.users())
        .map(|(sched, user)| total_cost(user, sched, inst))
        .sum()
}

/// Exact potential: harmonic-weighted rewards minus all costs.
///
/// Any unilateral change of schedule moves this by exactly the deviator's
/// payoff change.
pub fn potential(profile: &Profile, inst: &Instance) -> f64 {
    let rewards: f64 = execution_counts(profile)
        .iter()
        .map(|(k, m)| inst.task_unchecked(k).reward * harmonic(m))
        .sum();
    rewards - total_costs(profile, inst)
}

/// Rewards of executed tasks, each counted once, minus all costs.
pub fn social_welfare(profile: &Profile, inst: &Instance) -> f64 {
    let rewards: f64 = execution_counts(profile)
        .iter()
        .map(|(k, _)| inst.task_unchecked(k).reward)
        .sum();
    rewards - total_costs(profile, inst)
}

/// Jain's index `(sum u)^2 / (n * sum u^2)`; 1 when every payoff is zero
/// and for an empty population.
pub fn jain_index_of(values: &[f64]) -> f64 {
    let sum_sq: f64 = values.iter().map(|u| u * u).sum();
    if values.is_empty() || sum_sq == 0.0 {
        return 1.0;
    }
    let sum: f64 = values.iter().sum();
    sum * sum / (values.len() as f64 * sum_sq)
}

pub fn jain_index(profile: &Profile, inst: &Instance) -> f64 {
    jain_index_of(&payoffs(profile, inst))
}
