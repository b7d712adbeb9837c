//! Best-response dynamics and Nash equilibrium verification.
//!
//! Every accepted move raises the mover's payoff by more than the threshold,
//! and in an exact potential game the potential rises by the same amount, so
//! the dynamics cannot cycle and stops at an equilibrium.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::best_response::best_response;
use crate::model::{Instance, Profile, Schedule, EPSILON};
use crate::payoff::{potential, user_payoff};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ActivationOrder {
    /// Users move in increasing id order every round.
    #[default]
    RoundRobin,
    /// Each round visits users in a fresh permutation drawn from a seeded RNG.
    Shuffled { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsConfig {
    pub order: ActivationOrder,
    pub max_rounds: usize,
    /// A move is accepted only if it improves the mover's payoff by more than this.
    pub threshold: f64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            order: ActivationOrder::RoundRobin,
            max_rounds: 100,
            threshold: EPSILON,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Move {
    /// One-based round number.
    pub round: usize,
    /// User index.
    pub user: usize,
    pub old_payoff: f64,
    pub new_payoff: f64,
    /// Potential of the profile right after the move.
    pub potential: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// A full round produced no improving move.
    Converged,
    /// `max_rounds` rounds ran and the last one still had moves.
    RoundCap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsTrace {
    pub moves: Vec<Move>,
    pub rounds: usize,
    pub status: Termination,
}

impl DynamicsTrace {
    pub fn converged(&self) -> bool {
        self.status == Termination::Converged
    }

    /// `round,user,old_payoff,new_payoff,potential`, one line per move.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("round,user,old_payoff,new_payoff,potential\n");
        for m in &self.moves {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                m.round, m.user, m.old_payoff, m.new_payoff, m.potential
            );
        }
        out
    }
}

/// Sequential best-response dynamics from `initial`.
pub fn best_response_dynamics(
    inst: &Instance,
    initial: Profile,
    cfg: &DynamicsConfig,
) -> (Profile, DynamicsTrace) {
    let mut profile = initial;
    let mut moves = Vec::new();
    let mut order: Vec<usize> = (0..inst.num_users()).collect();
    order.sort_by_key(|&i| inst.user(i).id);
    let mut rng = match cfg.order {
        ActivationOrder::Shuffled { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        ActivationOrder::RoundRobin => None,
    };

    let mut rounds = 0;
    let mut status = Termination::RoundCap;
    while rounds < cfg.max_rounds {
        rounds += 1;
        if let Some(rng) = rng.as_mut() {
            order.shuffle(rng);
        }
        let mut moved = false;
        for &i in &order {
            let old_payoff = user_payoff(&profile, i, inst);
            let br = best_response(inst, &profile, i);
            if br.payoff > old_payoff + cfg.threshold {
                profile.set(i, br.schedule);
                moved = true;
                moves.push(Move {
                    round: rounds,
                    user: i,
                    old_payoff,
                    new_payoff: br.payoff,
                    potential: potential(&profile, inst),
                });
            }
        }
        if !moved {
            status = Termination::Converged;
            break;
        }
    }

    (
        profile,
        DynamicsTrace {
            moves,
            rounds,
            status,
        },
    )
}

/// Outcome of an equilibrium check.
#[derive(Debug, Clone, PartialEq)]
pub enum NeCheck {
    Equilibrium,
    /// A user with a unilateral deviation gaining more than the threshold.
    Deviation {
        user: usize,
        schedule: Schedule,
        old_payoff: f64,
        new_payoff: f64,
    },
}

impl NeCheck {
    pub fn is_equilibrium(&self) -> bool {
        matches!(self, NeCheck::Equilibrium)
    }
}

/// Checks every user's exact best response against `profile`; the first user
/// (by index) able to gain more than `threshold` is the witness.
pub fn verify_ne(inst: &Instance, profile: &Profile, threshold: f64) -> NeCheck {
    for i in 0..inst.num_users() {
        let old_payoff = user_payoff(profile, i, inst);
        let br = best_response(inst, profile, i);
        if br.payoff > old_payoff + threshold {
            return NeCheck::Deviation {
                user: i,
                schedule: br.schedule,
                old_payoff,
                new_payoff: br.payoff,
            };
        }
    }
    NeCheck::Equilibrium
}
