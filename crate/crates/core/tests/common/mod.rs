//! Brute-force oracles and random instance builders shared by the
//! integration tests. Nothing here calls the searches it is used to check.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tsg_core::feasibility::is_feasible;
use tsg_core::instance_gen::{generate, GenConfig, TypeMix, UserType};
use tsg_core::model::{Instance, Location, Profile, Schedule, Task, TaskId, User, UserId};
use tsg_core::payoff::{potential, social_welfare, user_payoff};

pub const TOL: f64 = 1e-9;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every ordered subset of `ids` (the empty sequence included), no pruning.
pub fn all_sequences(ids: &[TaskId]) -> Vec<Schedule> {
    fn extend(
        ids: &[TaskId],
        used: &mut Vec<bool>,
        path: &mut Vec<TaskId>,
        out: &mut Vec<Schedule>,
    ) {
        out.push(Schedule::new(path.clone()));
        for c in 0..ids.len() {
            if !used[c] {
                used[c] = true;
                path.push(ids[c]);
                extend(ids, used, path, out);
                path.pop();
                used[c] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(ids, &mut vec![false; ids.len()], &mut Vec::new(), &mut out);
    out
}

/// All feasible schedules of user `i` by filtering every ordered subset.
pub fn feasible_by_filter(inst: &Instance, i: usize) -> Vec<Schedule> {
    let user = inst.user(i);
    let mut ids = user.available_tasks.clone();
    ids.sort();
    all_sequences(&ids)
        .into_iter()
        .filter(|s| is_feasible(user, s, inst))
        .collect()
}

/// Exhaustive best response with the declared tie rule: highest payoff
/// (within `TOL`), then fewer tasks, then the lexicographically smaller ids.
pub fn brute_best_response(inst: &Instance, profile: &Profile, i: usize) -> (Schedule, f64) {
    let mut best: Option<(Schedule, f64)> = None;
    for sched in feasible_by_filter(inst, i) {
        let payoff = user_payoff(&profile.with(i, sched.clone()), i, inst);
        let better = match &best {
            None => true,
            Some((b, bp)) => {
                payoff > bp + TOL
                    || (payoff >= bp - TOL && (sched.len(), sched.tasks()) < (b.len(), b.tasks()))
            }
        };
        if better {
            best = Some((sched, payoff));
        }
    }
    best.expect("the empty schedule is always feasible")
}

/// Maxima of potential and welfare over the full product of feasible
/// schedules. Only for tiny instances.
pub fn brute_joint_optima(inst: &Instance) -> (f64, f64) {
    let per_user: Vec<Vec<Schedule>> = (0..inst.num_users())
        .map(|i| feasible_by_filter(inst, i))
        .collect();
    let mut idx = vec![0usize; per_user.len()];
    let (mut best_phi, mut best_w) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    loop {
        let profile = Profile::new(
            idx.iter()
                .zip(&per_user)
                .map(|(&j, s)| s[j].clone())
                .collect(),
        );
        best_phi = best_phi.max(potential(&profile, inst));
        best_w = best_w.max(social_welfare(&profile, inst));
        // odometer increment
        let mut u = 0;
        loop {
            if u == idx.len() {
                return (best_phi, best_w);
            }
            idx[u] += 1;
            if idx[u] < per_user[u].len() {
                break;
            }
            idx[u] = 0;
            u += 1;
        }
    }
}

pub fn joint_product_size(inst: &Instance) -> usize {
    (0..inst.num_users())
        .map(|i| feasible_by_filter(inst, i).len())
        .fold(1usize, |a, b| a.saturating_mul(b))
}

/// A generated instance with `n_tasks` tasks and `n_users` users of a
/// random type mix.
pub fn random_instance(seed: u64, n_tasks: usize, n_users: usize) -> Instance {
    let mut r = rng(seed ^ 0xa5a5);
    let kind = UserType::ALL[r.random_range(0..3)];
    generate(&GenConfig {
        n_tasks,
        n_users,
        type_mix: TypeMix::only(kind),
        seed,
        ..GenConfig::default()
    })
    .unwrap()
}

/// Small dense instance: a 1.5 km square and a one hour horizon so that
/// users reach several tasks and compete. Some users get a binding budget.
pub fn crowded_instance(seed: u64, n_tasks: usize, n_users: usize) -> Instance {
    let mut r = rng(seed);
    let tasks: Vec<Task> = (1..=n_tasks as u32)
        .map(|id| {
            let open = r.random_range(0.0..2400.0);
            Task {
                id: TaskId(id),
                location: Location::new(r.random_range(0.0..1500.0), r.random_range(0.0..1500.0)),
                reward: r.random_range(1.0..15.0),
                window_open: open,
                window_close: (open + r.random_range(0.0..2400.0)).min(3600.0),
            }
        })
        .collect();
    let users = (1..=n_users as u32)
        .map(|id| {
            let mut available: Vec<TaskId> = tasks
                .iter()
                .map(|t| t.id)
                .filter(|_| r.random_bool(0.85))
                .collect();
            available.shuffle(&mut r);
            let exec_time: BTreeMap<_, _> = available
                .iter()
                .map(|&k| (k, r.random_range(0.0..600.0)))
                .collect();
            let exec_cost: BTreeMap<_, _> = available
                .iter()
                .map(|&k| (k, r.random_range(0.0..4.0)))
                .collect();
            User {
                id: UserId(id),
                start: Location::new(r.random_range(0.0..1500.0), r.random_range(0.0..1500.0)),
                speed: r.random_range(1.0..12.0),
                travel_cost_rate: r.random_range(0.0..0.003),
                budget: if r.random_bool(0.3) {
                    r.random_range(1.0..8.0)
                } else {
                    f64::INFINITY
                },
                available_tasks: available,
                exec_time,
                exec_cost,
            }
        })
        .collect();
    Instance::new(tasks, users, 3600.0)
}

/// Each user gets a uniformly chosen feasible schedule.
pub fn random_profile(inst: &Instance, r: &mut impl Rng) -> Profile {
    Profile::new(
        (0..inst.num_users())
            .map(|i| {
                let options = feasible_by_filter(inst, i);
                options[r.random_range(0..options.len())].clone()
            })
            .collect(),
    )
}

/// Micro instance with integral geometry and times: tasks and the user on a
/// line, speed 1 m/s, windows of at most 200 s.
pub fn micro_instance(seed: u64) -> Instance {
    let mut r = rng(seed);
    let n_tasks = r.random_range(1..=3u32);
    let tasks: Vec<Task> = (1..=n_tasks)
        .map(|id| {
            let open = r.random_range(0..=150) as f64;
            Task {
                id: TaskId(id),
                location: Location::new(r.random_range(0..=60) as f64, 0.0),
                reward: 5.0,
                window_open: open,
                window_close: open + r.random_range(0..=200) as f64,
            }
        })
        .collect();
    let horizon = tasks.iter().map(|t| t.window_close).fold(0.0, f64::max);
    let available: Vec<TaskId> = tasks.iter().map(|t| t.id).collect();
    let user = User {
        id: UserId(1),
        start: Location::new(r.random_range(0..=60) as f64, 0.0),
        speed: 1.0,
        travel_cost_rate: 0.0,
        budget: r.random_range(0..=6) as f64,
        exec_time: available
            .iter()
            .map(|&k| (k, r.random_range(0..=40) as f64))
            .collect(),
        exec_cost: available
            .iter()
            .map(|&k| (k, r.random_range(0..=3) as f64))
            .collect(),
        available_tasks: available,
    };
    Instance::new(tasks, vec![user], horizon)
}

/// Grid oracle for one schedule: for every position, the set of integer
/// start times reachable from some reachable start of the previous position.
/// Returns the componentwise earliest feasible vector, if any.
pub fn grid_earliest(inst: &Instance, user: &User, sched: &Schedule) -> Option<Vec<i64>> {
    let mut reachable: Vec<i64> = vec![0];
    let mut here = user.start;
    let mut prev_exec = 0i64;
    let mut earliest = Vec::new();
    for (j, &k) in sched.iter().enumerate() {
        let task = inst.task(k).unwrap();
        let travel = (here.distance_to(&task.location) / user.speed).round() as i64;
        let gap = travel + if j == 0 { 0 } else { prev_exec };
        let lo = task.window_open as i64;
        let hi = task.window_close as i64;
        let next: Vec<i64> = (lo..=hi)
            .filter(|&t| reachable.iter().any(|&p| p + gap <= t))
            .collect();
        earliest.push(*next.first()?);
        reachable = next;
        here = task.location;
        prev_exec = user.exec_time[&k] as i64;
    }
    Some(earliest)
}

/// Feasibility by grid search plus an independent budget sum.
pub fn grid_feasible(inst: &Instance, user: &User, sched: &Schedule) -> bool {
    let cost: f64 = sched.iter().map(|k| user.exec_cost[k]).sum();
    cost <= user.budget + TOL && grid_earliest(inst, user, sched).is_some()
}
