//! Seeded random instances in a square region.
//!
//! Draw order is part of the output contract: one ChaCha8 stream per
//! instance, consumed as
//!
//! 1. per task, in id order: x, y, window open, window length, reward;
//! 2. per user, in id order: x, y, a type draw, then per task execution
//!    time and execution cost, then (only when the availability probability
//!    is below one) one availability draw per task.
//!
//! Users are drawn after all tasks, and each user only consumes its own
//! draws, so the first `n` users of a seed are the same for every user count.
//! Changing the draw order requires bumping [`GENERATOR_VERSION`].

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as NormalCdf};

use crate::error::{Error, Result};
use crate::model::{Instance, Location, Task, TaskId, User, UserId};

pub const GENERATOR_VERSION: u32 = 1;

/// Rejection sampling is refused below this acceptance probability.
const MIN_ACCEPTANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserType {
    Walking,
    Bike,
    Driving,
}

impl UserType {
    pub const ALL: [UserType; 3] = [UserType::Walking, UserType::Bike, UserType::Driving];

    pub fn params(self) -> UserTypeParams {
        // km/h and $/km
        let (kmh, per_km) = match self {
            UserType::Walking => (5.0, 0.2),
            UserType::Bike => (15.0, 0.5),
            UserType::Driving => (45.0, 1.0),
        };
        UserTypeParams {
            speed: kmh / 3.6,
            travel_cost_rate: per_km / 1000.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            UserType::Walking => "walking",
            UserType::Bike => "bike",
            UserType::Driving => "driving",
        }
    }
}

impl fmt::Display for UserType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UserType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "walking" | "walk" => Ok(UserType::Walking),
            "bike" | "biking" => Ok(UserType::Bike),
            "driving" | "drive" | "car" => Ok(UserType::Driving),
            other => Err(Error::Config(format!("unknown user type {other:?}"))),
        }
    }
}

/// Speed in m/s and travel cost in $/m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserTypeParams {
    pub speed: f64,
    pub travel_cost_rate: f64,
}

/// Proportions of walking, bike and driving users; must sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeMix {
    pub walking: f64,
    pub bike: f64,
    pub driving: f64,
}

impl TypeMix {
    pub fn only(kind: UserType) -> Self {
        let mut mix = TypeMix {
            walking: 0.0,
            bike: 0.0,
            driving: 0.0,
        };
        match kind {
            UserType::Walking => mix.walking = 1.0,
            UserType::Bike => mix.bike = 1.0,
            UserType::Driving => mix.driving = 1.0,
        }
        mix
    }

    /// Maps a uniform draw in `[0, 1)` to a type by cumulative share.
    fn pick(&self, u: f64) -> UserType {
        let shares = [
            (UserType::Walking, self.walking),
            (UserType::Bike, self.bike),
            (UserType::Driving, self.driving),
        ];
        let mut acc = 0.0;
        for (kind, share) in shares {
            acc += share;
            if share > 0.0 && u < acc {
                return kind;
            }
        }
        // Shares summing to slightly under one.
        shares
            .iter()
            .rev()
            .find(|(_, share)| *share > 0.0)
            .map_or(UserType::Walking, |(kind, _)| *kind)
    }
}

/// Normal distribution truncated to `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedNormal {
    pub mean: f64,
    pub std: f64,
    pub lo: f64,
    pub hi: f64,
}

impl TruncatedNormal {
    /// Standard deviation a third of the mean, truncated to `[mean/10, 3 mean]`.
    pub fn around(mean: f64) -> Self {
        TruncatedNormal {
            mean,
            std: mean / 3.0,
            lo: mean / 10.0,
            hi: 3.0 * mean,
        }
    }

    fn check(&self) -> Result<()> {
        let finite = [self.mean, self.std, self.lo, self.hi]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.std > 0.0) || !(self.lo < self.hi) {
            return Err(Error::Config(format!(
                "truncated normal needs finite parameters, std > 0 and lo < hi, got {self:?}"
            )));
        }
        let base = NormalCdf::new(self.mean, self.std).map_err(|e| Error::Config(e.to_string()))?;
        let acceptance = base.cdf(self.hi) - base.cdf(self.lo);
        if !(acceptance >= MIN_ACCEPTANCE) {
            return Err(Error::Config(format!(
                "truncation [{}, {}] keeps only {acceptance:e} of normal({}, {})",
                self.lo, self.hi, self.mean, self.std
            )));
        }
        Ok(())
    }
}

/// Draws from `dist` by rejection. Fails on invalid parameters or when the
/// interval holds less than one millionth of the untruncated mass.
pub fn sample_truncated_normal<R: Rng + ?Sized>(
    dist: &TruncatedNormal,
    rng: &mut R,
) -> Result<f64> {
    dist.check()?;
    Ok(draw_checked(dist, rng))
}

fn draw_checked<R: Rng + ?Sized>(dist: &TruncatedNormal, rng: &mut R) -> f64 {
    let normal = Normal::new(dist.mean, dist.std).expect("checked parameters");
    loop {
        let x = normal.sample(rng);
        if (dist.lo..=dist.hi).contains(&x) {
            return x;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub region_side_m: f64,
    pub horizon_s: f64,
    pub n_tasks: usize,
    pub n_users: usize,
    pub type_mix: TypeMix,
    pub reward_usd: TruncatedNormal,
    pub window_length_s: TruncatedNormal,
    pub exec_time_s: TruncatedNormal,
    pub exec_cost_usd: TruncatedNormal,
    /// Per-user execution budget; `None` is unlimited.
    pub budget_usd: Option<f64>,
    /// Probability that a given task is available to a given user.
    pub availability: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            region_side_m: 5000.0,
            horizon_s: 7200.0,
            n_tasks: 8,
            n_users: 10,
            type_mix: TypeMix::only(UserType::Walking),
            reward_usd: TruncatedNormal::around(10.0),
            window_length_s: TruncatedNormal::around(1800.0),
            exec_time_s: TruncatedNormal::around(600.0),
            exec_cost_usd: TruncatedNormal::around(1.0),
            budget_usd: None,
            availability: 1.0,
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.region_side_m.is_finite() && self.region_side_m > 0.0) {
            return bad(format!(
                "region side must be positive, got {}",
                self.region_side_m
            ));
        }
        if !(self.horizon_s.is_finite() && self.horizon_s > 0.0) {
            return bad(format!("horizon must be positive, got {}", self.horizon_s));
        }
        let mix = [
            self.type_mix.walking,
            self.type_mix.bike,
            self.type_mix.driving,
        ];
        if mix.iter().any(|p| !(p.is_finite() && *p >= 0.0))
            || (mix.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return bad(format!(
                "user type proportions must be nonnegative and sum to 1, got {mix:?}"
            ));
        }
        for (name, dist) in [
            ("reward", &self.reward_usd),
            ("window length", &self.window_length_s),
            ("execution time", &self.exec_time_s),
            ("execution cost", &self.exec_cost_usd),
        ] {
            if !(dist.mean > 0.0) {
                return bad(format!("{name} mean must be positive, got {}", dist.mean));
            }
            dist.check()?;
            if dist.lo < 0.0 {
                return bad(format!(
                    "{name} truncation must stay nonnegative, got lo = {}",
                    dist.lo
                ));
            }
        }
        if let Some(b) = self.budget_usd {
            if !(b >= 0.0) {
                return bad(format!("budget must be nonnegative, got {b}"));
            }
        }
        if !(0.0..=1.0).contains(&self.availability) {
            return bad(format!(
                "availability must lie in [0, 1], got {}",
                self.availability
            ));
        }
        if self.n_tasks > u32::MAX as usize || self.n_users > u32::MAX as usize {
            return bad("too many tasks or users".into());
        }
        Ok(())
    }
}

/// Provenance block written next to generated instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenMeta {
    pub generator: String,
    pub generator_version: u32,
    pub seed: u64,
    pub config: GenConfig,
}

impl GenMeta {
    pub fn for_config(config: &GenConfig) -> Self {
        GenMeta {
            generator: env!("CARGO_PKG_NAME").to_string(),
            generator_version: GENERATOR_VERSION,
            seed: config.seed,
            config: config.clone(),
        }
    }
}

/// Builds an instance from `config`. Task and user ids run from 1.
pub fn generate(config: &GenConfig) -> Result<Instance> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let side = config.region_side_m;
    let horizon = config.horizon_s;

    let tasks: Vec<Task> = (1..=config.n_tasks as u32)
        .map(|id| {
            let location = Location::new(rng.random::<f64>() * side, rng.random::<f64>() * side);
            let open = rng.random::<f64>() * horizon;
            let length = draw_checked(&config.window_length_s, &mut rng);
            let reward = draw_checked(&config.reward_usd, &mut rng);
            Task {
                id: TaskId(id),
                location,
                reward,
                window_open: open,
                window_close: (open + length).min(horizon),
            }
        })
        .collect();

    let users = (1..=config.n_users as u32)
        .map(|id| {
            let start = Location::new(rng.random::<f64>() * side, rng.random::<f64>() * side);
            let kind = config.type_mix.pick(rng.random::<f64>());
            let params = kind.params();
            let mut exec_time = BTreeMap::new();
            let mut exec_cost = BTreeMap::new();
            for task in &tasks {
                exec_time.insert(task.id, draw_checked(&config.exec_time_s, &mut rng));
                exec_cost.insert(task.id, draw_checked(&config.exec_cost_usd, &mut rng));
            }
            let mut available: Vec<TaskId> = tasks.iter().map(|t| t.id).collect();
            if config.availability < 1.0 {
                available.retain(|_| rng.random::<f64>() < config.availability);
                exec_time.retain(|k, _| available.contains(k));
                exec_cost.retain(|k, _| available.contains(k));
            }
            User {
                id: UserId(id),
                start,
                speed: params.speed,
                travel_cost_rate: params.travel_cost_rate,
                budget: config.budget_usd.unwrap_or(f64::INFINITY),
                available_tasks: available,
                exec_time,
                exec_cost,
            }
        })
        .collect();

    Ok(Instance::new(tasks, users, horizon))
}
