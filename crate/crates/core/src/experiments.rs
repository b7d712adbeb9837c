//! Monte-Carlo sweeps over user counts and user types, and single-instance
//! reports.
//!
//! A replication generates one instance, runs best-response dynamics from the
//! empty profile, and computes a welfare baseline: exact in
//! [`SolverMode::Exact`] (which also computes the potential-maximizing
//! equilibrium), greedy in [`SolverMode::Heuristic`], where the baseline is
//! only a lower bound on the optimum (though never below the equilibrium). Every equilibrium is re-verified and the
//! payoff-sum identity is checked on every profile before a row is produced.
//!
//! Replication seeds depend on the seed base, the user type and the
//! replication index but not on the user count. Since users are generated
//! after tasks, replication `r` at `n` users extends replication `r` at fewer
//! users with extra users (common random numbers across the sweep).

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    best_response_dynamics, verify_ne, DynamicsConfig, DynamicsTrace, Move, NeCheck, Termination,
};
use crate::error::{Error, Result};
use crate::instance_gen::{generate, GenConfig, TypeMix, UserType};
use crate::io::ProfileFile;
use crate::model::{Instance, Profile, EPSILON};
use crate::optimizer::{
    heuristic_welfare, maximize_potential, maximize_welfare, JointSearchConfig,
};
use crate::payoff::{execution_counts, jain_index_of, payoffs, potential, social_welfare};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    /// Exact welfare optimum and potential maximizer.
    Exact,
    /// Greedy welfare lower bound; no potential maximizer.
    Heuristic,
}

impl fmt::Display for SolverMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverMode::Exact => "exact",
            SolverMode::Heuristic => "heuristic",
        })
    }
}

impl FromStr for SolverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(SolverMode::Exact),
            "heuristic" => Ok(SolverMode::Heuristic),
            other => Err(Error::Config(format!("unknown solver mode {other:?}"))),
        }
    }
}

/// `W(NE) / W(SE)`.
///
/// Both welfares zero (nothing worth doing) reads as 1. Otherwise a
/// nonpositive baseline gives `None`.
pub fn welfare_ratio(ne: f64, se: f64) -> Option<f64> {
    if se.abs() <= EPSILON && ne.abs() <= EPSILON {
        Some(1.0)
    } else if se <= EPSILON {
        None
    } else {
        Some(ne / se)
    }
}

/// Parses `2,4,6`, `2..6` or `2..20:2` (ranges are inclusive).
pub fn parse_user_counts(text: &str) -> Result<Vec<usize>> {
    let bad = |why: &str| Error::Config(format!("bad user counts {text:?}: {why}"));
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| bad("expected a nonnegative integer"))
    };

    let text_trim = text.trim();
    let counts = if let Some((lo, rest)) = text_trim.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (num(hi)?, num(step)?),
            None => (num(rest)?, 1),
        };
        let lo = num(lo)?;
        if step == 0 {
            return Err(bad("step must be positive"));
        }
        if lo > hi {
            return Err(bad("range is empty"));
        }
        if (hi - lo) / step >= 100_000 {
            return Err(bad("too many points"));
        }
        (lo..=hi).step_by(step).collect()
    } else {
        text_trim.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if counts.is_empty() {
        return Err(bad("no user counts"));
    }
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub user_counts: Vec<usize>,
    pub user_types: Vec<UserType>,
    pub reps: usize,
    pub seed_base: u64,
    pub mode: SolverMode,
    /// Instance parameters; `n_users`, `type_mix` and `seed` are set per replication.
    pub base: GenConfig,
    pub dynamics: DynamicsConfig,
    pub joint: JointSearchConfig,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            user_counts: vec![2, 4, 6],
            user_types: UserType::ALL.to_vec(),
            reps: 200,
            seed_base: 0,
            mode: SolverMode::Exact,
            base: GenConfig {
                n_tasks: 5,
                ..GenConfig::default()
            },
            dynamics: DynamicsConfig::default(),
            joint: JointSearchConfig::default(),
        }
    }
}

/// One line of the results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n_users: usize,
    pub user_type: UserType,
    pub mode: SolverMode,
    pub rep: usize,
    pub sw_se: f64,
    pub sw_ne_dyn: f64,
    pub sw_ne_phi: Option<f64>,
    /// Dynamics equilibrium welfare over the baseline.
    pub ratio: Option<f64>,
    /// Jain index at the dynamics equilibrium.
    pub jain: f64,
    pub sum_mk_ne: usize,
    pub sum_mk_se: usize,
    pub rounds: usize,
}

pub const CSV_HEADER: &str =
    "n_users,user_type,mode,rep,sw_se,sw_ne_dyn,sw_ne_phi,ratio,jain,sum_mk_ne,sum_mk_se,rounds";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Results CSV with the header line; missing values are empty fields.
pub fn rows_to_csv<'a>(rows: impl IntoIterator<Item = &'a SweepRow>) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n_users,
            r.user_type,
            r.mode,
            r.rep,
            r.sw_se,
            r.sw_ne_dyn,
            opt(r.sw_ne_phi),
            opt(r.ratio),
            r.jain,
            r.sum_mk_ne,
            r.sum_mk_se,
            r.rounds
        );
    }
    out
}

/// Everything a replication produced, for callers that need the profiles.
#[derive(Debug, Clone)]
pub struct Replication {
    pub row: SweepRow,
    pub instance: Instance,
    pub se: Profile,
    pub ne_dyn: Profile,
    pub ne_phi: Option<Profile>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator seed of replication `rep` for `user_type`. Independent of the
/// user count.
pub fn replication_seed(seed_base: u64, user_type: UserType, rep: usize) -> u64 {
    let kind = UserType::ALL.iter().position(|&t| t == user_type).unwrap() as u64;
    splitmix64(splitmix64(splitmix64(seed_base) ^ kind) ^ rep as u64)
}

/// Fails unless the payoffs of `profile` sum to its welfare.
pub fn check_payoff_sum(inst: &Instance, profile: &Profile) -> Result<()> {
    let sum: f64 = payoffs(profile, inst).iter().sum();
    let welfare = social_welfare(profile, inst);
    if (sum - welfare).abs() > EPSILON {
        return Err(Error::Consistency(format!(
            "payoffs sum to {sum} but welfare is {welfare}"
        )));
    }
    Ok(())
}

/// Dynamics still improving after the round cap count as an exceeded cap:
/// the final profile is not an equilibrium and is never reported as one.
fn require_converged(trace: &DynamicsTrace, cfg: &DynamicsConfig) -> Result<()> {
    match trace.status {
        Termination::Converged => Ok(()),
        Termination::RoundCap => Err(Error::CapExceeded {
            what: "best-response dynamics rounds",
            cap: cfg.max_rounds,
            actual: cfg.max_rounds + 1,
        }),
    }
}

fn require_equilibrium(
    inst: &Instance,
    profile: &Profile,
    threshold: f64,
    what: &str,
) -> Result<()> {
    match verify_ne(inst, profile, threshold) {
        NeCheck::Equilibrium => Ok(()),
        NeCheck::Deviation {
            user,
            schedule,
            old_payoff,
            new_payoff,
        } => Err(Error::Consistency(format!(
            "{what} is not an equilibrium: user index {user} improves from {old_payoff} to {new_payoff} with {schedule}"
        ))),
    }
}

/// Generates and solves one replication of a sweep point.
pub fn run_replication(
    spec: &SweepSpec,
    n_users: usize,
    user_type: UserType,
    rep: usize,
) -> Result<Replication> {
    let config = GenConfig {
        n_users,
        type_mix: TypeMix::only(user_type),
        seed: replication_seed(spec.seed_base, user_type, rep),
        ..spec.base.clone()
    };
    let inst = generate(&config)?;

    let (ne_dyn, trace) = best_response_dynamics(&inst, inst.empty_profile(), &spec.dynamics);
    require_converged(&trace, &spec.dynamics)?;
    require_equilibrium(&inst, &ne_dyn, spec.dynamics.threshold, "dynamics outcome")?;

    let (se, ne_phi) = match spec.mode {
        SolverMode::Exact => {
            let se = maximize_welfare(&inst, &spec.joint)?.profile;
            let phi = maximize_potential(&inst, &spec.joint)?.profile;
            require_equilibrium(&inst, &phi, spec.dynamics.threshold, "potential maximizer")?;
            (se, Some(phi))
        }
        SolverMode::Heuristic => (heuristic_welfare(&inst, &ne_dyn), None),
    };

    for profile in [&ne_dyn, &se].into_iter().chain(ne_phi.as_ref()) {
        check_payoff_sum(&inst, profile)?;
    }

    let sw_se = social_welfare(&se, &inst);
    let sw_ne_dyn = social_welfare(&ne_dyn, &inst);
    let row = SweepRow {
        n_users,
        user_type,
        mode: spec.mode,
        rep,
        sw_se,
        sw_ne_dyn,
        sw_ne_phi: ne_phi.as_ref().map(|p| social_welfare(p, &inst)),
        ratio: welfare_ratio(sw_ne_dyn, sw_se),
        jain: jain_index_of(&payoffs(&ne_dyn, &inst)),
        sum_mk_ne: execution_counts(&ne_dyn).total(),
        sum_mk_se: execution_counts(&se).total(),
        rounds: trace.rounds,
    };
    Ok(Replication {
        row,
        instance: inst,
        se,
        ne_dyn,
        ne_phi,
    })
}

/// Runs every `(user count, user type, replication)` point in parallel.
/// Output order is user count, then type, then replication, regardless of
/// scheduling.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<Replication>> {
    if spec.user_types.is_empty() || spec.user_counts.is_empty() {
        return Err(Error::Config(
            "a sweep needs at least one user count and one user type".into(),
        ));
    }
    spec.base.validate()?;
    let points: Vec<(usize, UserType, usize)> = spec
        .user_counts
        .iter()
        .flat_map(|&n| {
            spec.user_types
                .iter()
                .flat_map(move |&t| (0..spec.reps).map(move |r| (n, t, r)))
        })
        .collect();
    points
        .into_par_iter()
        .map(|(n, t, r)| run_replication(spec, n, t, r))
        .collect()
}

/// Mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    pub fn of(values: &[f64]) -> Option<Estimate> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Some(Estimate { mean, stderr, n })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub n_users: usize,
    pub user_type: UserType,
    pub mode: SolverMode,
    pub sw_se: Estimate,
    pub sw_ne_dyn: Estimate,
    pub sw_ne_phi: Option<Estimate>,
    /// Over replications with a defined ratio only.
    pub ratio: Option<Estimate>,
    pub jain: Estimate,
    pub sum_mk_ne: Estimate,
    pub sum_mk_se: Estimate,
    pub rounds: Estimate,
}

/// Aggregates rows per `(n_users, user_type, mode)` in first-seen order.
pub fn summarize<'a>(rows: impl IntoIterator<Item = &'a SweepRow>) -> Vec<SummaryRow> {
    type Key = (usize, UserType, SolverMode);
    let mut groups: Vec<(Key, Vec<&SweepRow>)> = Vec::new();
    for row in rows {
        let key = (row.n_users, row.user_type, row.mode);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(row),
            None => groups.push((key, vec![row])),
        }
    }
    groups
        .into_iter()
        .map(|((n_users, user_type, mode), members)| {
            let column = |f: &dyn Fn(&SweepRow) -> Option<f64>| {
                Estimate::of(&members.iter().filter_map(|r| f(r)).collect::<Vec<_>>())
            };
            let always =
                |f: &dyn Fn(&SweepRow) -> f64| column(&|r| Some(f(r))).expect("nonempty group");
            SummaryRow {
                n_users,
                user_type,
                mode,
                sw_se: always(&|r| r.sw_se),
                sw_ne_dyn: always(&|r| r.sw_ne_dyn),
                sw_ne_phi: column(&|r| r.sw_ne_phi),
                ratio: column(&|r| r.ratio),
                jain: always(&|r| r.jain),
                sum_mk_ne: always(&|r| r.sum_mk_ne as f64),
                sum_mk_se: always(&|r| r.sum_mk_se as f64),
                rounds: always(&|r| r.rounds as f64),
            }
        })
        .collect()
}

pub fn summary_to_csv(summary: &[SummaryRow]) -> String {
    let mut out = String::from(
        "n_users,user_type,mode,reps,sw_se_mean,sw_se_stderr,sw_ne_dyn_mean,sw_ne_dyn_stderr,\
         sw_ne_phi_mean,sw_ne_phi_stderr,ratio_mean,ratio_stderr,ratio_n,jain_mean,jain_stderr,\
         sum_mk_ne_mean,sum_mk_ne_stderr,sum_mk_se_mean,sum_mk_se_stderr,rounds_mean,rounds_stderr\n",
    );
    let pair = |e: Option<Estimate>| match e {
        Some(e) => format!("{},{}", e.mean, e.stderr),
        None => ",".to_string(),
    };
    for s in summary {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.n_users,
            s.user_type,
            s.mode,
            s.sw_se.n,
            pair(Some(s.sw_se)),
            pair(Some(s.sw_ne_dyn)),
            pair(s.sw_ne_phi),
            pair(s.ratio),
            s.ratio.map_or(0, |e| e.n),
            pair(Some(s.jain)),
            pair(Some(s.sum_mk_ne)),
            pair(Some(s.sum_mk_se)),
            pair(Some(s.rounds)),
        );
    }
    out
}

/// Metrics of one profile in a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileReport {
    pub method: &'static str,
    pub schedules: ProfileFile,
    pub welfare: f64,
    pub potential: f64,
    pub payoffs: Vec<f64>,
    pub jain: f64,
    pub sum_mk: usize,
}

impl ProfileReport {
    fn new(method: &'static str, inst: &Instance, profile: &Profile) -> Self {
        let payoffs = payoffs(profile, inst);
        ProfileReport {
            method,
            schedules: ProfileFile::from_profile(inst, profile),
            welfare: social_welfare(profile, inst),
            potential: potential(profile, inst),
            jain: jain_index_of(&payoffs),
            payoffs,
            sum_mk: execution_counts(profile).total(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleReport {
    pub mode: SolverMode,
    pub n_users: usize,
    pub n_tasks: usize,
    pub ne_dynamics: ProfileReport,
    pub ne_potential: Option<ProfileReport>,
    pub se: ProfileReport,
    pub ratio: Option<f64>,
    pub rounds: usize,
    pub status: Termination,
    pub trace: Vec<Move>,
}

/// Solves one validated instance and collects every metric.
pub fn run_single(
    inst: &Instance,
    mode: SolverMode,
    dynamics: &DynamicsConfig,
    joint: &JointSearchConfig,
) -> Result<SingleReport> {
    inst.validate().into_result()?;
    let (ne, trace) = best_response_dynamics(inst, inst.empty_profile(), dynamics);
    require_converged(&trace, dynamics)?;
    require_equilibrium(inst, &ne, dynamics.threshold, "dynamics outcome")?;
    let (se, se_method, phi) = match mode {
        SolverMode::Exact => {
            let se = maximize_welfare(inst, joint)?.profile;
            let phi = maximize_potential(inst, joint)?.profile;
            require_equilibrium(inst, &phi, dynamics.threshold, "potential maximizer")?;
            (se, "exact", Some(phi))
        }
        SolverMode::Heuristic => (heuristic_welfare(inst, &ne), "greedy-lower-bound", None),
    };
    let ne_report = ProfileReport::new("best-response-dynamics", inst, &ne);
    let se_report = ProfileReport::new(se_method, inst, &se);
    Ok(SingleReport {
        mode,
        n_users: inst.num_users(),
        n_tasks: inst.num_tasks(),
        ratio: welfare_ratio(ne_report.welfare, se_report.welfare),
        ne_potential: phi.map(|p| ProfileReport::new("potential-maximizer", inst, &p)),
        ne_dynamics: ne_report,
        se: se_report,
        rounds: trace.rounds,
        status: trace.status,
        trace: trace.moves,
    })
}
