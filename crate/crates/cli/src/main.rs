//! `tsg`: generate instances, solve them, verify equilibria and run sweeps.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 unreadable,
//! malformed or invalid input (including a profile that is not an
//! equilibrium), 3 an exact search exceeded its cap or the dynamics were
//! still improving after `--max-rounds`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tsg_core::dynamics::{verify_ne, ActivationOrder, DynamicsConfig, NeCheck};
use tsg_core::experiments::{
    rows_to_csv, run_single, run_sweep, summarize, summary_to_csv, SolverMode, SweepSpec,
};
use tsg_core::feasibility::{earliest_schedule, is_feasible};
use tsg_core::instance_gen::{generate, GenConfig, GenMeta, TypeMix, UserType};
use tsg_core::io::{instance_to_json, parse_instance, parse_profile};
use tsg_core::optimizer::JointSearchConfig;
use tsg_core::payoff::{potential, social_welfare};
use tsg_core::{Error, EPSILON};

#[derive(Parser)]
#[command(
    name = "tsg",
    version,
    about = "Task scheduling game: equilibria, welfare baselines and sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance file.
    Generate(GenerateArgs),
    /// Compute equilibria and the welfare baseline of an instance.
    Solve(SolveArgs),
    /// Run a Monte-Carlo sweep and write the results CSV.
    Sweep(SweepArgs),
    /// Validate an instance and optionally check a profile for equilibrium.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Heuristic,
}

impl From<Mode> for SolverMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Exact => SolverMode::Exact,
            Mode::Heuristic => SolverMode::Heuristic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Walking,
    Bike,
    Driving,
}

impl From<Kind> for UserType {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Walking => UserType::Walking,
            Kind::Bike => UserType::Bike,
            Kind::Driving => UserType::Driving,
        }
    }
}

#[derive(Args)]
struct Caps {
    /// Largest number of available tasks per user for exhaustive enumeration.
    #[arg(long, default_value_t = JointSearchConfig::default().schedule_cap)]
    schedule_cap: usize,
    /// Largest number of memoized states in the exact joint search.
    #[arg(long, default_value_t = JointSearchConfig::default().state_cap)]
    state_cap: usize,
}

impl Caps {
    fn joint(&self) -> JointSearchConfig {
        JointSearchConfig {
            schedule_cap: self.schedule_cap,
            state_cap: self.state_cap,
        }
    }
}

#[derive(Args)]
struct DynamicsArgs {
    /// Seed for a random activation order each round (default: round-robin).
    #[arg(long)]
    order_seed: Option<u64>,
    #[arg(long, default_value_t = 100)]
    max_rounds: usize,
    /// Minimum payoff gain for a move to count as an improvement.
    #[arg(long, default_value_t = EPSILON)]
    threshold: f64,
}

impl DynamicsArgs {
    fn config(&self) -> DynamicsConfig {
        DynamicsConfig {
            order: match self.order_seed {
                Some(seed) => ActivationOrder::Shuffled { seed },
                None => ActivationOrder::RoundRobin,
            },
            max_rounds: self.max_rounds,
            threshold: self.threshold,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    tasks: usize,
    #[arg(long, default_value_t = 10)]
    users: usize,
    /// Give every user this type.
    #[arg(long, value_enum, conflicts_with = "mix")]
    user_type: Option<Kind>,
    /// Walking, bike and driving proportions, e.g. `0.5,0.3,0.2`.
    #[arg(long)]
    mix: Option<String>,
    #[arg(long, default_value_t = 5000.0)]
    side_m: f64,
    #[arg(long, default_value_t = 7200.0)]
    horizon_s: f64,
    /// Per-user execution budget in dollars (default: unlimited).
    #[arg(long)]
    budget: Option<f64>,
    /// Probability that each task is available to each user.
    #[arg(long, default_value_t = 1.0)]
    availability: f64,
    /// Output file (default: stdout).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    #[command(flatten)]
    caps: Caps,
    #[command(flatten)]
    dynamics: DynamicsArgs,
    /// Report file (default: stdout).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also write the dynamics trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// User counts: `2,4,6`, `2..6` or `2..20:2`.
    #[arg(long, default_value = "2,4,6")]
    users: String,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "walking,bike,driving"
    )]
    types: Vec<Kind>,
    #[arg(long, default_value_t = 5)]
    tasks: usize,
    #[arg(long, default_value_t = 200)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    #[command(flatten)]
    caps: Caps,
    #[arg(long, default_value_t = 100)]
    max_rounds: usize,
    /// Results CSV (default: stdout).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also write per-point means and standard errors.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    /// Profile file to check for feasibility and equilibrium.
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long, default_value_t = EPSILON)]
    threshold: f64,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_instance(path: &Path) -> Result<tsg_core::Instance> {
    let text = read(path)?;
    let doc = parse_instance(&text).with_context(|| format!("in {}", path.display()))?;
    doc.instance
        .validate()
        .into_result()
        .with_context(|| format!("in {}", path.display()))?;
    Ok(doc.instance)
}

fn parse_mix(text: &str) -> Result<TypeMix> {
    let parts = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Error::Config(format!("bad mix {text:?}")))?;
    match parts[..] {
        [walking, bike, driving] => Ok(TypeMix {
            walking,
            bike,
            driving,
        }),
        _ => Err(Error::Config(format!("mix needs three proportions, got {text:?}")).into()),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let type_mix = match (&args.mix, args.user_type) {
        (Some(mix), _) => parse_mix(mix)?,
        (None, Some(kind)) => TypeMix::only(kind.into()),
        (None, None) => TypeMix::only(UserType::Walking),
    };
    let config = GenConfig {
        region_side_m: args.side_m,
        horizon_s: args.horizon_s,
        n_tasks: args.tasks,
        n_users: args.users,
        type_mix,
        budget_usd: args.budget,
        availability: args.availability,
        seed: args.seed,
        ..GenConfig::default()
    };
    let inst = generate(&config)?;
    let meta = serde_json::to_value(GenMeta::for_config(&config))?;
    emit(args.out.as_deref(), &instance_to_json(&inst, Some(meta)))
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let dynamics = args.dynamics.config();
    let report = run_single(&inst, args.mode.into(), &dynamics, &args.caps.joint())?;
    if let Some(path) = &args.trace {
        let trace = tsg_core::dynamics::DynamicsTrace {
            moves: report.trace.clone(),
            rounds: report.rounds,
            status: report.status,
        };
        emit(Some(path), &trace.to_csv())?;
    }
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    emit(args.out.as_deref(), &text)
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let base = SweepSpec::default();
    let spec = SweepSpec {
        user_counts: tsg_core::experiments::parse_user_counts(&args.users)?,
        user_types: args.types.iter().map(|&k| k.into()).collect(),
        reps: args.reps,
        seed_base: args.seed_base,
        mode: args.mode.into(),
        base: GenConfig {
            n_tasks: args.tasks,
            ..base.base
        },
        dynamics: DynamicsConfig {
            max_rounds: args.max_rounds,
            ..base.dynamics
        },
        joint: args.caps.joint(),
    };
    let results = run_sweep(&spec)?;
    let rows = results.iter().map(|r| &r.row);
    emit(args.out.as_deref(), &rows_to_csv(rows.clone()))?;
    if let Some(path) = &args.summary {
        emit(Some(path), &summary_to_csv(&summarize(rows)))?;
    }
    Ok(())
}

/// Returns whether the profile (if any) is a feasible equilibrium.
fn cmd_verify(args: VerifyArgs) -> Result<bool> {
    let inst = load_instance(&args.instance)?;
    println!(
        "instance ok: {} tasks, {} users",
        inst.num_tasks(),
        inst.num_users()
    );
    let Some(path) = &args.profile else {
        return Ok(true);
    };
    let profile =
        parse_profile(&read(path)?, &inst).with_context(|| format!("in {}", path.display()))?;
    for (i, user) in inst.users().iter().enumerate() {
        let sched = profile.schedule(i);
        if !is_feasible(user, sched, &inst) {
            match earliest_schedule(user, sched, &inst) {
                Err(miss) => println!(
                    "infeasible: {} misses the window of its task at position {} (earliest start {} s, closes {} s)",
                    user.id,
                    miss.index + 1,
                    miss.earliest_start,
                    miss.window_close
                ),
                Ok(_) => println!("infeasible: {} exceeds its budget", user.id),
            }
            return Ok(false);
        }
    }
    println!(
        "profile feasible: welfare {}, potential {}",
        social_welfare(&profile, &inst),
        potential(&profile, &inst)
    );
    match verify_ne(&inst, &profile, args.threshold) {
        NeCheck::Equilibrium => {
            println!(
                "equilibrium: no user gains more than {} by deviating",
                args.threshold
            );
            Ok(true)
        }
        NeCheck::Deviation {
            user,
            schedule,
            old_payoff,
            new_payoff,
        } => {
            println!(
                "not an equilibrium: {} improves from {old_payoff} to {new_payoff} with {schedule}",
                inst.user(user).id
            );
            Ok(false)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::CapExceeded { .. }) => 3,
        Some(Error::Config(_)) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Generate(args) => cmd_generate(args).map(|_| true),
        Command::Solve(args) => cmd_solve(args).map(|_| true),
        Command::Sweep(args) => cmd_sweep(args).map(|_| true),
        Command::Verify(args) => cmd_verify(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
