//! JSON instance and profile files.
//!
//! Instance files carry `tasks`, `users` and `horizon_s` plus an optional
//! `gen_meta` block. A missing or null `budget_usd` means an unlimited
//! budget. Key order is irrelevant and unknown keys are ignored.
//!
//! ```json
//! {
//!   "horizon_s": 100,
//!   "tasks": [{"id": 1, "x_m": 0, "y_m": 0, "reward_usd": 10,
//!              "window_open_s": 0, "window_close_s": 100}],
//!   "users": [{"id": 1, "x_m": 0, "y_m": 0, "speed_mps": 1,
//!              "travel_cost_per_m": 0, "budget_usd": null,
//!              "tasks": [{"id": 1, "exec_time_s": 0, "exec_cost_usd": 4.8}]}]
//! }
//! ```
//!
//! Profile files list schedules by user id; users left out execute nothing:
//! `{"profile": [{"user": 1, "tasks": [3, 1]}]}`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, Location, Profile, Schedule, Task, TaskId, User, UserId};

#[derive(Debug, Serialize, Deserialize)]
struct InstanceWire {
    tasks: Vec<TaskWire>,
    users: Vec<UserWire>,
    horizon_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gen_meta: Option<serde_json::Value>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TaskWire {
    id: u32,
    x_m: f64,
    y_m: f64,
    reward_usd: f64,
    window_open_s: f64,
    window_close_s: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct UserWire {
    id: u32,
    x_m: f64,
    y_m: f64,
    speed_mps: f64,
    travel_cost_per_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    budget_usd: Option<f64>,
    tasks: Vec<UserTaskWire>,
}

// Execution fields are optional on the wire so that a missing value surfaces
// as a validation violation naming the user and task.
#[derive(Debug, Serialize, Deserialize)]
struct UserTaskWire {
    id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exec_time_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exec_cost_usd: Option<f64>,
}

/// A parsed instance file.
#[derive(Debug, Clone)]
pub struct InstanceDocument {
    pub instance: Instance,
    pub gen_meta: Option<serde_json::Value>,
}

/// Parses an instance file without validating it.
pub fn parse_instance(text: &str) -> Result<InstanceDocument> {
    let wire: InstanceWire = serde_json::from_str(text)?;
    let tasks = wire
        .tasks
        .into_iter()
        .map(|t| Task {
            id: TaskId(t.id),
            location: Location::new(t.x_m, t.y_m),
            reward: t.reward_usd,
            window_open: t.window_open_s,
            window_close: t.window_close_s,
        })
        .collect();
    let users = wire
        .users
        .into_iter()
        .map(|u| {
            let mut exec_time = BTreeMap::new();
            let mut exec_cost = BTreeMap::new();
            let mut available = Vec::with_capacity(u.tasks.len());
            for entry in u.tasks {
                let id = TaskId(entry.id);
                available.push(id);
                if let Some(t) = entry.exec_time_s {
                    exec_time.insert(id, t);
                }
                if let Some(c) = entry.exec_cost_usd {
                    exec_cost.insert(id, c);
                }
            }
            User {
                id: UserId(u.id),
                start: Location::new(u.x_m, u.y_m),
                speed: u.speed_mps,
                travel_cost_rate: u.travel_cost_per_m,
                budget: u.budget_usd.unwrap_or(f64::INFINITY),
                available_tasks: available,
                exec_time,
                exec_cost,
            }
        })
        .collect();
    Ok(InstanceDocument {
        instance: Instance::new(tasks, users, wire.horizon_s),
        gen_meta: wire.gen_meta,
    })
}

/// Parses and validates an instance file.
pub fn read_instance(text: &str) -> Result<Instance> {
    let doc = parse_instance(text)?;
    doc.instance.validate().into_result()?;
    Ok(doc.instance)
}

/// Pretty-printed instance file. Infinite budgets are omitted.
pub fn instance_to_json(inst: &Instance, gen_meta: Option<serde_json::Value>) -> String {
    let wire = InstanceWire {
        tasks: inst
            .tasks()
            .iter()
            .map(|t| TaskWire {
                id: t.id.0,
                x_m: t.location.x,
                y_m: t.location.y,
                reward_usd: t.reward,
                window_open_s: t.window_open,
                window_close_s: t.window_close,
            })
            .collect(),
        users: inst
            .users()
            .iter()
            .map(|u| UserWire {
                id: u.id.0,
                x_m: u.start.x,
                y_m: u.start.y,
                speed_mps: u.speed,
                travel_cost_per_m: u.travel_cost_rate,
                budget_usd: u.budget.is_finite().then_some(u.budget),
                tasks: u
                    .available_tasks
                    .iter()
                    .map(|&k| UserTaskWire {
                        id: k.0,
                        exec_time_s: u.exec_time.get(&k).copied(),
                        exec_cost_usd: u.exec_cost.get(&k).copied(),
                    })
                    .collect(),
            })
            .collect(),
        horizon_s: inst.horizon(),
        gen_meta,
    };
    let mut text = serde_json::to_string_pretty(&wire).expect("instance serializes");
    text.push('\n');
    text
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub user: UserId,
    pub tasks: Schedule,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileFile {
    pub profile: Vec<ScheduleEntry>,
}

impl ProfileFile {
    pub fn from_profile(inst: &Instance, profile: &Profile) -> Self {
        ProfileFile {
            profile: inst
                .users()
                .iter()
                .zip(profile.schedules())
                .map(|(u, s)| ScheduleEntry {
                    user: u.id,
                    tasks: s.clone(),
                })
                .collect(),
        }
    }

    /// Resolves user ids against `inst` and checks every schedule.
    pub fn into_profile(self, inst: &Instance) -> Result<Profile> {
        let mut profile = inst.empty_profile();
        let mut seen = BTreeSet::new();
        for entry in self.profile {
            if !seen.insert(entry.user) {
                return Err(Error::Profile(format!(
                    "{} appears more than once",
                    entry.user
                )));
            }
            let i = inst
                .user_position(entry.user)
                .ok_or_else(|| Error::Profile(format!("{} is not in the instance", entry.user)))?;
            entry
                .tasks
                .check_for(inst.user(i))
                .map_err(Error::Profile)?;
            profile.set(i, entry.tasks);
        }
        Ok(profile)
    }
}

/// Parses a profile file against a validated instance.
pub fn parse_profile(text: &str, inst: &Instance) -> Result<Profile> {
    let file: ProfileFile = serde_json::from_str(text)?;
    file.into_profile(inst)
}

pub fn profile_to_json(inst: &Instance, profile: &Profile) -> String {
    let mut text = serde_json::to_string_pretty(&ProfileFile::from_profile(inst, profile))
        .expect("profile serializes");
    text.push('\n');
    text
}
