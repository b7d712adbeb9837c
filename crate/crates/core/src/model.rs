//! Problem instances: tasks, users, schedules and joint profiles.
//!
//! Coordinates are planar meters, times are seconds from the start of the
//! simulated period and money is real-valued dollars. All tolerance-sensitive
//! comparisons in the crate go through [`EPSILON`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

/// Absolute tolerance shared by every numeric comparison in the crate.
pub const EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub u32);

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "task {}", self.0)
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "user {}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Location {
    pub x: f64,
    pub y: f64,
}

impl Location {
    pub const fn new(x: f64, y: f64) -> Self {
        Location { x, y }
    }

    pub fn distance_to(&self, other: &Location) -> f64 {
        distance(self, other)
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Euclidean distance in meters.
pub fn distance(a: &Location, b: &Location) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub id: TaskId,
    pub location: Location,
    /// Total reward in dollars, split equally among all executors.
    pub reward: f64,
    /// Earliest allowed start time.
    pub window_open: f64,
    /// Latest allowed start time. The task may finish after it.
    pub window_close: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct User {
    pub id: UserId,
    pub start: Location,
    /// Meters per second.
    pub speed: f64,
    /// Dollars per meter travelled.
    pub travel_cost_rate: f64,
    /// Bound on the summed execution cost of a schedule. May be infinite.
    pub budget: f64,
    pub available_tasks: Vec<TaskId>,
    pub exec_time: BTreeMap<TaskId, f64>,
    pub exec_cost: BTreeMap<TaskId, f64>,
}

impl User {
    pub fn can_execute(&self, task: TaskId) -> bool {
        self.available_tasks.contains(&task)
    }

    /// Execution time of an available task.
    ///
    /// Panics if the task has no entry; validated instances always have one.
    pub fn exec_time_of(&self, task: TaskId) -> f64 {
        self.exec_time[&task]
    }

    /// Execution cost of an available task. Panics like [`User::exec_time_of`].
    pub fn exec_cost_of(&self, task: TaskId) -> f64 {
        self.exec_cost[&task]
    }

    pub fn travel_time(&self, a: &Location, b: &Location) -> f64 {
        distance(a, b) / self.speed
    }
}

/// Immutable bundle of tasks, users and the simulated period.
#[derive(Debug, Clone)]
pub struct Instance {
    tasks: Vec<Task>,
    users: Vec<User>,
    horizon: f64,
    task_index: HashMap<TaskId, usize>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.tasks == other.tasks && self.users == other.users && self.horizon == other.horizon
    }
}

impl Instance {
    /// Bundles the parts without checking them; see [`Instance::validate`].
    pub fn new(tasks: Vec<Task>, users: Vec<User>, horizon: f64) -> Self {
        let mut task_index = HashMap::with_capacity(tasks.len());
        for (pos, task) in tasks.iter().enumerate() {
            task_index.entry(task.id).or_insert(pos);
        }
        Instance {
            tasks,
            users,
            horizon,
            task_index,
        }
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn users(&self) -> &[User] {
        &self.users
    }

    pub fn user(&self, index: usize) -> &User {
        &self.users[index]
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn task(&self, id: TaskId) -> Option<&Task> {
        self.task_index.get(&id).map(|&pos| &self.tasks[pos])
    }

    /// Position of a task in [`Instance::tasks`].
    pub fn task_position(&self, id: TaskId) -> Option<usize> {
        self.task_index.get(&id).copied()
    }

    pub(crate) fn task_unchecked(&self, id: TaskId) -> &Task {
        match self.task(id) {
            Some(task) => task,
            None => panic!("{id} is not part of the instance"),
        }
    }

    pub fn user_position(&self, id: UserId) -> Option<usize> {
        self.users.iter().position(|u| u.id == id)
    }

    /// A profile in which nobody executes anything.
    pub fn empty_profile(&self) -> Profile {
        Profile::empty(self.users.len())
    }

    /// Checks every structural invariant and reports all violations found.
    pub fn validate(&self) -> ValidationReport {
        validate_instance(self)
    }
}

/// One user's strategy: distinct task ids in execution order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schedule(Vec<TaskId>);

impl Schedule {
    pub fn new(tasks: Vec<TaskId>) -> Self {
        Schedule(tasks)
    }

    pub fn empty() -> Self {
        Schedule(Vec::new())
    }

    pub fn tasks(&self) -> &[TaskId] {
        &self.0
    }

    pub fn into_tasks(self) -> Vec<TaskId> {
        self.0
    }

    pub fn push(&mut self, task: TaskId) {
        self.0.push(task);
    }

    pub fn insert(&mut self, position: usize, task: TaskId) {
        self.0.insert(position, task);
    }

    /// Checks distinctness and availability for `user`.
    pub fn check_for(&self, user: &User) -> Result<(), String> {
        let mut seen = BTreeSet::new();
        for &task in &self.0 {
            if !seen.insert(task) {
                return Err(format!("{} lists {task} twice", user.id));
            }
            if !user.can_execute(task) {
                return Err(format!("{task} is not available to {}", user.id));
            }
        }
        Ok(())
    }
}

impl Deref for Schedule {
    type Target = [TaskId];

    fn deref(&self) -> &[TaskId] {
        &self.0
    }
}

impl From<Vec<TaskId>> for Schedule {
    fn from(tasks: Vec<TaskId>) -> Self {
        Schedule(tasks)
    }
}

impl FromIterator<TaskId> for Schedule {
    fn from_iter<I: IntoIterator<Item = TaskId>>(iter: I) -> Self {
        Schedule(iter.into_iter().collect())
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (j, task) in self.0.iter().enumerate() {
            if j > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", task.0)?;
        }
        f.write_str("]")
    }
}

/// Joint strategy: one schedule per user, aligned with [`Instance::users`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Profile {
    schedules: Vec<Schedule>,
}

impl Profile {
    pub fn new(schedules: Vec<Schedule>) -> Self {
        Profile { schedules }
    }

    pub fn empty(num_users: usize) -> Self {
        Profile {
            schedules: vec![Schedule::empty(); num_users],
        }
    }

    pub fn schedules(&self) -> &[Schedule] {
        &self.schedules
    }

    pub fn schedule(&self, user: usize) -> &Schedule {
        &self.schedules[user]
    }

    pub fn num_users(&self) -> usize {
        self.schedules.len()
    }

    pub fn set(&mut self, user: usize, schedule: Schedule) -> Schedule {
        std::mem::replace(&mut self.schedules[user], schedule)
    }

    /// Copy of `self` with `user`'s schedule replaced (s_i', s_-i).
    pub fn with(&self, user: usize, schedule: Schedule) -> Profile {
        let mut next = self.clone();
        next.schedules[user] = schedule;
        next
    }

    /// Checks the shape against `inst` and every schedule against its owner.
    pub fn check(&self, inst: &Instance) -> Result<(), String> {
        if self.schedules.len() != inst.num_users() {
            return Err(format!(
                "profile has {} schedules for {} users",
                self.schedules.len(),
                inst.num_users()
            ));
        }
        for (sched, user) in self.schedules.iter().zip(inst.users()) {
            sched.check_for(user)?;
        }
        Ok(())
    }
}

/// One broken invariant, naming the entity it was found on.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateTaskId(TaskId),
    DuplicateUserId(UserId),
    NonFiniteTask {
        task: TaskId,
        field: &'static str,
    },
    NegativeReward(TaskId),
    InvertedWindow {
        task: TaskId,
        open: f64,
        close: f64,
    },
    WindowPastHorizon {
        task: TaskId,
        close: f64,
        horizon: f64,
    },
    BadHorizon(f64),
    NonFiniteUser {
        user: UserId,
        field: &'static str,
    },
    NonPositiveSpeed {
        user: UserId,
        speed: f64,
    },
    NegativeTravelCostRate(UserId),
    NegativeBudget(UserId),
    UnknownTask {
        user: UserId,
        task: TaskId,
    },
    DuplicateAvailableTask {
        user: UserId,
        task: TaskId,
    },
    MissingExecTime {
        user: UserId,
        task: TaskId,
    },
    MissingExecCost {
        user: UserId,
        task: TaskId,
    },
    StrayExecEntry {
        user: UserId,
        task: TaskId,
    },
    BadExecTime {
        user: UserId,
        task: TaskId,
        value: f64,
    },
    BadExecCost {
        user: UserId,
        task: TaskId,
        value: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            DuplicateTaskId(t) => write!(f, "{t}: id used more than once"),
            DuplicateUserId(u) => write!(f, "{u}: id used more than once"),
            NonFiniteTask { task, field } => write!(f, "{task}: {field} is not finite"),
            NegativeReward(t) => write!(f, "{t}: reward is negative"),
            InvertedWindow { task, open, close } => {
                write!(
                    f,
                    "{task}: window opens at {open} s after it closes at {close} s"
                )
            }
            WindowPastHorizon {
                task,
                close,
                horizon,
            } => write!(
                f,
                "{task}: window closes at {close} s, past the horizon {horizon} s"
            ),
            BadHorizon(h) => write!(f, "horizon {h} s is not a finite nonnegative number"),
            NonFiniteUser { user, field } => write!(f, "{user}: {field} is not finite"),
            NonPositiveSpeed { user, speed } => {
                write!(f, "{user}: speed {speed} m/s is not positive")
            }
            NegativeTravelCostRate(u) => write!(f, "{u}: travel cost rate is negative"),
            NegativeBudget(u) => write!(f, "{u}: budget is negative"),
            UnknownTask { user, task } => write!(f, "{user}: available {task} does not exist"),
            DuplicateAvailableTask { user, task } => {
                write!(f, "{user}: {task} is listed as available twice")
            }
            MissingExecTime { user, task } => write!(f, "{user}: no execution time for {task}"),
            MissingExecCost { user, task } => write!(f, "{user}: no execution cost for {task}"),
            StrayExecEntry { user, task } => {
                write!(f, "{user}: execution data for unavailable {task}")
            }
            BadExecTime { user, task, value } => {
                write!(
                    f,
                    "{user}: execution time {value} for {task} is not a finite nonnegative number"
                )
            }
            BadExecCost { user, task, value } => {
                write!(
                    f,
                    "{user}: execution cost {value} for {task} is not a finite nonnegative number"
                )
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> crate::Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(crate::Error::Invalid(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (n, v) in self.violations.iter().enumerate() {
            if n > 0 {
                f.write_str("\n")?;
            }
            write!(f, "  - {v}")?;
        }
        Ok(())
    }
}

fn nonneg_finite(value: f64) -> bool {
    value.is_finite() && value >= 0.0
}

pub fn validate_instance(inst: &Instance) -> ValidationReport {
    use Violation::*;

    let mut out = Vec::new();
    let horizon = inst.horizon;
    if !nonneg_finite(horizon) {
        out.push(BadHorizon(horizon));
    }

    let mut task_ids = BTreeSet::new();
    for task in &inst.tasks {
        let id = task.id;
        if !task_ids.insert(id) {
            out.push(DuplicateTaskId(id));
        }
        for (field, value) in [
            ("x", task.location.x),
            ("y", task.location.y),
            ("reward", task.reward),
            ("window_open", task.window_open),
            ("window_close", task.window_close),
        ] {
            if !value.is_finite() {
                out.push(NonFiniteTask { task: id, field });
            }
        }
        if task.reward < 0.0 {
            out.push(NegativeReward(id));
        }
        if task.window_open > task.window_close {
            out.push(InvertedWindow {
                task: id,
                open: task.window_open,
                close: task.window_close,
            });
        }
        if task.window_close > horizon {
            out.push(WindowPastHorizon {
                task: id,
                close: task.window_close,
                horizon,
            });
        }
    }

    let mut user_ids = BTreeSet::new();
    for user in &inst.users {
        let id = user.id;
        if !user_ids.insert(id) {
            out.push(DuplicateUserId(id));
        }
        if !user.start.is_finite() {
            out.push(NonFiniteUser {
                user: id,
                field: "start",
            });
        }
        if !(user.speed.is_finite() && user.speed > 0.0) {
            out.push(NonPositiveSpeed {
                user: id,
                speed: user.speed,
            });
        }
        if !user.travel_cost_rate.is_finite() {
            out.push(NonFiniteUser {
                user: id,
                field: "travel_cost_rate",
            });
        } else if user.travel_cost_rate < 0.0 {
            out.push(NegativeTravelCostRate(id));
        }
        // An infinite budget is allowed and means "never binding".
        if user.budget.is_nan() {
            out.push(NonFiniteUser {
                user: id,
                field: "budget",
            });
        } else if user.budget < 0.0 {
            out.push(NegativeBudget(id));
        }

        let mut available = BTreeSet::new();
        for &task in &user.available_tasks {
            if !available.insert(task) {
                out.push(DuplicateAvailableTask { user: id, task });
            }
            if inst.task(task).is_none() {
                out.push(UnknownTask { user: id, task });
            }
            match user.exec_time.get(&task) {
                None => out.push(MissingExecTime { user: id, task }),
                Some(&value) if !nonneg_finite(value) => out.push(BadExecTime {
                    user: id,
                    task,
                    value,
                }),
                Some(_) => {}
            }
            match user.exec_cost.get(&task) {
                None => out.push(MissingExecCost { user: id, task }),
                Some(&value) if !nonneg_finite(value) => out.push(BadExecCost {
                    user: id,
                    task,
                    value,
                }),
                Some(_) => {}
            }
        }
        let stray: BTreeSet<TaskId> = user
            .exec_time
            .keys()
            .chain(user.exec_cost.keys())
            .filter(|t| !available.contains(t))
            .copied()
            .collect();
        out.extend(
            stray
                .into_iter()
                .map(|task| StrayExecEntry { user: id, task }),
        );
    }

    ValidationReport { violations: out }
}
