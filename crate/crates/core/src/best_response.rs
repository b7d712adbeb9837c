//! Exact best response of one user against fixed opponents.
//!
//! Choosing which tasks to execute and in what order is a prize-collecting
//! orienteering problem with time windows. It is solved exactly by a
//! depth-first branch-and-bound over ordered task sequences. A node's bound is
//! its accrued payoff plus the positive margin (share minus execution cost) of
//! every unused task still directly reachable from it. Travel costs only
//! lower the payoff and detours only delay arrival, so the bound is
//! admissible.

use crate::error::{Error, Result};
use crate::model::{distance, Instance, Location, Profile, Schedule, TaskId, User, EPSILON};
use crate::payoff::{opponent_counts, user_payoff, ExecutionCounts};

/// Largest number of available tasks [`enumerate_feasible_schedules`] accepts by default.
pub const DEFAULT_ENUMERATION_CAP: usize = 8;

/// Share of `task`'s reward a user receives by executing it.
///
/// With `includes_self` false, `counts` holds opponents only and the share is
/// `V / (M + 1)`. With it true the user is already counted and the share is
/// `V / M`.
pub fn marginal_share(
    inst: &Instance,
    task: TaskId,
    counts: &ExecutionCounts,
    includes_self: bool,
) -> f64 {
    let mut executors = counts.get(task);
    if !includes_self || executors == 0 {
        executors += 1;
    }
    inst.task_unchecked(task).reward / executors as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    pub schedule: Schedule,
    pub payoff: f64,
}

/// True when `(payoff, seq)` beats `(best_payoff, best)`: higher payoff by
/// more than [`EPSILON`], otherwise fewer tasks, then the lexicographically
/// smaller sequence.
pub(crate) fn beats<T: Ord>(payoff: f64, seq: &[T], best_payoff: f64, best: &[T]) -> bool {
    if payoff > best_payoff + EPSILON {
        return true;
    }
    if payoff < best_payoff - EPSILON {
        return false;
    }
    (seq.len(), seq) < (best.len(), best)
}

struct Candidate {
    id: TaskId,
    location: Location,
    open: f64,
    close: f64,
    exec_time: f64,
    exec_cost: f64,
    share: f64,
}

struct Search<'a> {
    user: &'a User,
    cands: Vec<Candidate>,
    used: Vec<bool>,
    path: Vec<usize>,
    best_payoff: f64,
    best: Vec<usize>,
}

impl Search<'_> {
    fn worth_exploring(&self, bound: f64, depth: usize) -> bool {
        // Descendants have more than `depth` tasks, so a tie only helps them
        // when the incumbent is longer still.
        bound > self.best_payoff + EPSILON
            || (bound >= self.best_payoff - EPSILON && self.best.len() > depth + 1)
    }

    fn visit(&mut self, here: Location, free_at: f64, spent: f64, payoff: f64) {
        if beats(payoff, &self.path, self.best_payoff, &self.best) {
            self.best_payoff = payoff;
            self.best.clone_from(&self.path);
        }

        // (candidate, start time, leg length) for every directly reachable task.
        let mut children = Vec::new();
        let mut bound = payoff;
        for (c, cand) in self.cands.iter().enumerate() {
            if self.used[c] || spent + cand.exec_cost > self.user.budget + EPSILON {
                continue;
            }
            let leg = distance(&here, &cand.location);
            let start = (free_at + leg / self.user.speed).max(cand.open);
            if start > cand.close + EPSILON {
                continue;
            }
            bound += (cand.share - cand.exec_cost).max(0.0);
            children.push((c, start, leg));
        }

        let depth = self.path.len();
        for (c, start, leg) in children {
            if !self.worth_exploring(bound, depth) {
                return;
            }
            let cand = &self.cands[c];
            let (location, finish, cost) = (cand.location, start + cand.exec_time, cand.exec_cost);
            let gain = cand.share - cand.exec_cost - leg * self.user.travel_cost_rate;
            self.used[c] = true;
            self.path.push(c);
            self.visit(location, finish, spent + cost, payoff + gain);
            self.path.pop();
            self.used[c] = false;
        }
    }
}

/// Payoff-maximizing feasible schedule for user `user` against the other
/// schedules in `profile`.
///
/// Ties within [`EPSILON`] go to fewer tasks, then the lexicographically
/// smaller id sequence. The returned payoff is evaluated on the resulting
/// profile and is never negative, since the empty schedule pays zero.
pub fn best_response(inst: &Instance, profile: &Profile, user: usize) -> BestResponse {
    let counts = opponent_counts(profile, user);
    let owner = inst.user(user);

    let mut ids = owner.available_tasks.clone();
    ids.sort_unstable();
    let cands = ids
        .into_iter()
        .map(|id| {
            let task = inst.task_unchecked(id);
            Candidate {
                id,
                location: task.location,
                open: task.window_open,
                close: task.window_close,
                exec_time: owner.exec_time_of(id),
                exec_cost: owner.exec_cost_of(id),
                share: marginal_share(inst, id, &counts, false),
            }
        })
        .collect::<Vec<_>>();

    let mut search = Search {
        user: owner,
        used: vec![false; cands.len()],
        cands,
        path: Vec::new(),
        best_payoff: 0.0,
        best: Vec::new(),
    };
    search.visit(owner.start, 0.0, 0.0, 0.0);

    let schedule: Schedule = search.best.iter().map(|&c| search.cands[c].id).collect();
    let payoff = user_payoff(&profile.with(user, schedule.clone()), user, inst);
    BestResponse { schedule, payoff }
}

/// Every feasible schedule of user `user`, each exactly once, in
/// lexicographic order of task ids (the empty schedule first).
///
/// Infeasible prefixes are not extended, since no extension of an infeasible
/// schedule is feasible. Fails when the user has more than `cap` available
/// tasks.
pub fn enumerate_feasible_schedules(
    inst: &Instance,
    user: usize,
    cap: usize,
) -> Result<Vec<Schedule>> {
    let owner = inst.user(user);
    if owner.available_tasks.len() > cap {
        return Err(Error::CapExceeded {
            what: "available tasks of one user",
            cap,
            actual: owner.available_tasks.len(),
        });
    }
    let mut ids = owner.available_tasks.clone();
    ids.sort_unstable();

    struct Walk<'a> {
        inst: &'a Instance,
        user: &'a User,
        ids: Vec<TaskId>,
        used: Vec<bool>,
        path: Vec<TaskId>,
        out: Vec<Schedule>,
    }

    impl Walk<'_> {
        fn visit(&mut self, here: Location, free_at: f64, spent: f64) {
            self.out.push(Schedule::new(self.path.clone()));
            for c in 0..self.ids.len() {
                if self.used[c] {
                    continue;
                }
                let id = self.ids[c];
                let task = self.inst.task_unchecked(id);
                let cost = spent + self.user.exec_cost_of(id);
                if cost > self.user.budget + EPSILON {
                    continue;
                }
                let start =
                    (free_at + self.user.travel_time(&here, &task.location)).max(task.window_open);
                if start > task.window_close + EPSILON {
                    continue;
                }
                self.used[c] = true;
                self.path.push(id);
                self.visit(task.location, start + self.user.exec_time_of(id), cost);
                self.path.pop();
                self.used[c] = false;
            }
        }
    }

    let mut walk = Walk {
        inst,
        user: owner,
        used: vec![false; ids.len()],
        ids,
        path: Vec::new(),
        out: Vec::new(),
    };
    walk.visit(owner.start, 0.0, 0.0);
    Ok(walk.out)
}
