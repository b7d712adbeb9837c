//! Joint-profile optimization: the potential maximizer (always a Nash
//! equilibrium), the welfare maximizer (the socially efficient baseline) and a
//! greedy insertion heuristic for instances too large for exact search.
//!
//! Both objectives are a function of the execution-count vector minus the sum
//! of per-user schedule costs. The exact search therefore works user by user
//! over the count vector built so far, memoizing the best completion for each
//! `(user, counts)` state. Per user only the cheapest feasible order of each
//! task set is kept, since the order only affects the (own) travel cost.

use std::collections::{BTreeSet, HashMap};

use crate::best_response::enumerate_feasible_schedules;
use crate::error::{Error, Result};
use crate::feasibility::is_feasible;
use crate::model::{Instance, Profile, Schedule, TaskId, EPSILON};
use crate::payoff::{
    execution_counts, harmonic, potential, social_welfare, total_cost, travel_cost,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JointSearchConfig {
    /// Largest number of available tasks per user that is enumerated.
    pub schedule_cap: usize,
    /// Largest number of memoized `(user, counts)` states.
    pub state_cap: usize,
}

impl Default for JointSearchConfig {
    fn default() -> Self {
        JointSearchConfig {
            schedule_cap: crate::best_response::DEFAULT_ENUMERATION_CAP,
            state_cap: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub profile: Profile,
    /// Objective evaluated on `profile`.
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Objective {
    Potential,
    Welfare,
}

struct Choice {
    schedule: Schedule,
    /// Positions of the schedule's tasks in `Instance::tasks`.
    tasks: Vec<usize>,
    cost: f64,
}

/// One choice per feasible task set, using its cheapest feasible order.
/// Sets appear in the order their first order is enumerated; the empty
/// schedule is always first.
fn choices_for(inst: &Instance, user: usize, cap: usize) -> Result<Vec<Choice>> {
    let owner = inst.user(user);
    let mut by_set: HashMap<BTreeSet<TaskId>, usize> = HashMap::new();
    let mut out: Vec<Choice> = Vec::new();
    for schedule in enumerate_feasible_schedules(inst, user, cap)? {
        let cost = total_cost(owner, &schedule, inst);
        let set: BTreeSet<TaskId> = schedule.iter().copied().collect();
        match by_set.get(&set) {
            Some(&slot) => {
                if cost < out[slot].cost - EPSILON {
                    out[slot].cost = cost;
                    out[slot].schedule = schedule;
                }
            }
            None => {
                by_set.insert(set, out.len());
                let tasks = schedule
                    .iter()
                    .map(|&k| inst.task_position(k).expect("validated task id"))
                    .collect();
                out.push(Choice {
                    schedule,
                    tasks,
                    cost,
                });
            }
        }
    }
    Ok(out)
}

struct SearchContext {
    objective: Objective,
    choices: Vec<Vec<Choice>>,
    rewards: Vec<f64>,
    harmonics: Vec<f64>,
}

/// Best completion value and choice index per `(user, counts)` state.
struct Memo {
    levels: Vec<HashMap<Vec<u16>, (f64, u32)>>,
    states: usize,
    cap: usize,
}

impl SearchContext {
    fn terminal(&self, counts: &[u16]) -> f64 {
        counts
            .iter()
            .zip(&self.rewards)
            .map(|(&m, &v)| match self.objective {
                Objective::Potential => v * self.harmonics[m as usize],
                Objective::Welfare if m > 0 => v,
                Objective::Welfare => 0.0,
            })
            .sum()
    }

    fn apply(&self, counts: &mut [u16], tasks: &[usize], undo: &mut Vec<(usize, u16)>) {
        for &t in tasks {
            undo.push((t, counts[t]));
            counts[t] = match self.objective {
                Objective::Potential => counts[t] + 1,
                // Welfare only sees whether a task is covered.
                Objective::Welfare => 1,
            };
        }
    }

    /// Best value of `terminal(final counts) - sum of costs` over choices of
    /// users `user..`, given the counts contributed by earlier users.
    fn best_completion(&self, memo: &mut Memo, user: usize, counts: &mut Vec<u16>) -> Result<f64> {
        if user == self.choices.len() {
            return Ok(self.terminal(counts));
        }
        if let Some(&(value, _)) = memo.levels[user].get(counts.as_slice()) {
            return Ok(value);
        }

        let mut best = f64::NEG_INFINITY;
        let mut best_choice = 0u32;
        let mut undo = Vec::new();
        for (c, choice) in self.choices[user].iter().enumerate() {
            undo.clear();
            self.apply(counts, &choice.tasks, &mut undo);
            let value = self.best_completion(memo, user + 1, counts)? - choice.cost;
            for &(t, old) in undo.iter().rev() {
                counts[t] = old;
            }
            if c == 0 || value > best + EPSILON {
                best = value;
                best_choice = c as u32;
            }
        }

        memo.states += 1;
        if memo.states > memo.cap {
            return Err(Error::CapExceeded {
                what: "joint search states",
                cap: memo.cap,
                actual: memo.states,
            });
        }
        memo.levels[user].insert(counts.clone(), (best, best_choice));
        Ok(best)
    }

    fn solve(&self, num_tasks: usize, cap: usize) -> Result<Profile> {
        let n = self.choices.len();
        let mut memo = Memo {
            levels: vec![HashMap::new(); n],
            states: 0,
            cap,
        };
        let mut counts = vec![0u16; num_tasks];
        self.best_completion(&mut memo, 0, &mut counts)?;

        let mut schedules = Vec::with_capacity(n);
        let mut undo = Vec::new();
        for user in 0..n {
            let (_, c) = memo.levels[user][counts.as_slice()];
            let choice = &self.choices[user][c as usize];
            schedules.push(choice.schedule.clone());
            self.apply(&mut counts, &choice.tasks, &mut undo);
        }
        Ok(Profile::new(schedules))
    }
}

fn maximize(inst: &Instance, objective: Objective, cfg: &JointSearchConfig) -> Result<Profile> {
    if inst.num_users() > u16::MAX as usize {
        return Err(Error::CapExceeded {
            what: "users in joint search",
            cap: u16::MAX as usize,
            actual: inst.num_users(),
        });
    }
    let choices = (0..inst.num_users())
        .map(|i| choices_for(inst, i, cfg.schedule_cap))
        .collect::<Result<Vec<_>>>()?;
    let ctx = SearchContext {
        objective,
        choices,
        rewards: inst.tasks().iter().map(|t| t.reward).collect(),
        harmonics: (0..=inst.num_users()).map(harmonic).collect(),
    };
    ctx.solve(inst.num_tasks(), cfg.state_cap)
}

/// Exact maximizer of the potential. Every such profile is a Nash
/// equilibrium. Ties within [`EPSILON`] go to the earliest choice of the
/// lowest-indexed user.
pub fn maximize_potential(inst: &Instance, cfg: &JointSearchConfig) -> Result<Optimum> {
    let profile = maximize(inst, Objective::Potential, cfg)?;
    let value = potential(&profile, inst);
    Ok(Optimum { profile, value })
}

/// Exact maximizer of social welfare, with the same tie rule as
/// [`maximize_potential`].
pub fn maximize_welfare(inst: &Instance, cfg: &JointSearchConfig) -> Result<Optimum> {
    let profile = maximize(inst, Objective::Welfare, cfg)?;
    let value = social_welfare(&profile, inst);
    Ok(Optimum { profile, value })
}

/// Greedy insertion: repeatedly commits the feasible `(user, task, position)`
/// insertion with the largest positive welfare gain until none is left.
///
/// The result is feasible and its welfare is a lower bound on the optimum.
pub fn greedy_welfare_heuristic(inst: &Instance) -> Profile {
    greedy_welfare_from(inst, inst.empty_profile())
}

/// Greedy insertion continued from a feasible `start`. Only tasks nobody
/// executes yet are inserted, so the welfare never decreases.
pub fn greedy_welfare_from(inst: &Instance, start: Profile) -> Profile {
    let mut profile = start;
    loop {
        let counts = execution_counts(&profile);
        let mut best: Option<(f64, usize, Schedule)> = None;
        for (i, user) in inst.users().iter().enumerate() {
            let current = profile.schedule(i);
            let base_travel = travel_cost(user, current, inst);
            let mut ids = user.available_tasks.clone();
            ids.sort_unstable();
            for k in ids {
                if current.contains(&k) || counts.get(k) > 0 {
                    continue;
                }
                let reward = inst.task_unchecked(k).reward;
                for pos in 0..=current.len() {
                    let mut next = current.clone();
                    next.insert(pos, k);
                    if !is_feasible(user, &next, inst) {
                        continue;
                    }
                    let gain = reward
                        - user.exec_cost_of(k)
                        - (travel_cost(user, &next, inst) - base_travel);
                    if gain > EPSILON && best.as_ref().is_none_or(|(g, _, _)| gain > *g + EPSILON) {
                        best = Some((gain, i, next));
                    }
                }
            }
        }
        match best {
            Some((_, i, next)) => {
                profile.set(i, next);
            }
            None => return profile,
        }
    }
}

/// Drops repeated executions: each shared task stays with the executor whose
/// schedule gets cheapest without it, ties to the lowest user index. Removing
/// a task keeps a schedule feasible and never raises its cost, so welfare
/// cannot drop.
pub fn without_shared_executions(inst: &Instance, profile: &Profile) -> Profile {
    let mut out = profile.clone();
    let counts = execution_counts(profile);
    for (k, m) in counts.iter() {
        if m < 2 {
            continue;
        }
        let holders: Vec<usize> = (0..out.num_users())
            .filter(|&i| out.schedule(i).contains(&k))
            .collect();
        let saving = |i: usize| {
            let user = inst.user(i);
            let s = out.schedule(i);
            let rest: Schedule = s.iter().copied().filter(|&t| t != k).collect();
            total_cost(user, s, inst) - total_cost(user, &rest, inst)
        };
        // Keep the task where dropping it would save least.
        let keep = holders
            .iter()
            .copied()
            .fold(None::<(usize, f64)>, |acc, i| {
                let c = saving(i);
                match acc {
                    Some((_, best)) if c >= best - EPSILON => acc,
                    _ => Some((i, c)),
                }
            })
            .map(|(i, _)| i);
        for i in holders {
            if Some(i) != keep {
                let rest = out
                    .schedule(i)
                    .iter()
                    .copied()
                    .filter(|&t| t != k)
                    .collect();
                out.set(i, rest);
            }
        }
    }
    out
}

/// Welfare lower bound used when exact search is out of reach: the better
/// of greedy from scratch and greedy continued from `seed` (typically an
/// equilibrium) with shared executions removed. Never below `seed`'s welfare.
pub fn heuristic_welfare(inst: &Instance, seed: &Profile) -> Profile {
    let scratch = greedy_welfare_heuristic(inst);
    let seeded = greedy_welfare_from(inst, without_shared_executions(inst, seed));
    if social_welfare(&seeded, inst) > social_welfare(&scratch, inst) + EPSILON {
        seeded
    } else {
        scratch
    }
}
