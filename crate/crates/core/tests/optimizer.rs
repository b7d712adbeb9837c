mod common;

use common::*;
use tsg_core::best_response::best_response;
use tsg_core::dynamics::{best_response_dynamics, verify_ne, DynamicsConfig};
use tsg_core::feasibility::is_feasible;
use tsg_core::instance_gen::{generate, GenConfig, TypeMix, UserType};
use tsg_core::optimizer::*;
use tsg_core::payoff::{execution_counts, potential, social_welfare};
use tsg_core::EPSILON;

#[test]
fn joint_optima_match_full_product_enumeration() {
    let mut checked = 0;
    for seed in 0..200 {
        let inst = crowded_instance(seed, 4, 3);
        if joint_product_size(&inst) > 200_000 {
            continue;
        }
        let (phi, w) = brute_joint_optima(&inst);
        let cfg = JointSearchConfig::default();
        let best_phi = maximize_potential(&inst, &cfg).unwrap();
        let best_w = maximize_welfare(&inst, &cfg).unwrap();
        assert!(
            (best_phi.value - phi).abs() <= 1e-8,
            "seed {seed}: {} vs {phi}",
            best_phi.value
        );
        assert!(
            (best_w.value - w).abs() <= 1e-8,
            "seed {seed}: {} vs {w}",
            best_w.value
        );
        assert!((potential(&best_phi.profile, &inst) - best_phi.value).abs() <= TOL);
        checked += 1;
    }
    assert!(checked >= 100, "only {checked} instances small enough");
}

#[test]
fn potential_maximizers_are_equilibria() {
    for seed in 0..100 {
        let inst = crowded_instance(seed, 5, 4);
        let best = maximize_potential(&inst, &JointSearchConfig::default()).unwrap();
        assert!(
            verify_ne(&inst, &best.profile, EPSILON).is_equilibrium(),
            "seed {seed}"
        );
    }
}

#[test]
fn welfare_optimum_dominates_everything_else() {
    for seed in 0..100 {
        let inst = crowded_instance(seed, 5, 4);
        let cfg = JointSearchConfig::default();
        let se = maximize_welfare(&inst, &cfg).unwrap().value;
        let mut r = rng(seed);
        for _ in 0..20 {
            assert!(social_welfare(&random_profile(&inst, &mut r), &inst) <= se + TOL);
        }
        let (ne, _) =
            best_response_dynamics(&inst, inst.empty_profile(), &DynamicsConfig::default());
        assert!(social_welfare(&ne, &inst) <= se + TOL);
        let phi = maximize_potential(&inst, &cfg).unwrap().profile;
        assert!(social_welfare(&phi, &inst) <= se + TOL);
        assert!(social_welfare(&greedy_welfare_heuristic(&inst), &inst) <= se + TOL);
    }
}

#[test]
fn single_user_optima_coincide_without_sharing() {
    for seed in 0..50 {
        let inst = crowded_instance(seed, 6, 1);
        let cfg = JointSearchConfig::default();
        let phi = maximize_potential(&inst, &cfg).unwrap();
        let se = maximize_welfare(&inst, &cfg).unwrap();
        let br = best_response(&inst, &inst.empty_profile(), 0);
        assert!(execution_counts(&se.profile).iter().all(|(_, m)| m <= 1));
        assert!((phi.value - se.value).abs() <= TOL);
        assert!((phi.value - br.payoff).abs() <= TOL);
    }
}

fn desk_instance(seed: u64, n_users: usize) -> tsg_core::Instance {
    generate(&GenConfig {
        n_tasks: 5,
        n_users,
        type_mix: TypeMix::only(UserType::ALL[(seed % 3) as usize]),
        seed,
        ..GenConfig::default()
    })
    .unwrap()
}

#[test]
fn greedy_is_a_close_lower_bound() {
    let cfg = JointSearchConfig::default();
    let mut close = 0;
    let total = 200;
    for seed in 0..total {
        let inst = desk_instance(seed, 2 + (seed as usize % 5));
        let exact = maximize_welfare(&inst, &cfg).unwrap().value;
        let greedy = greedy_welfare_heuristic(&inst);
        let w = social_welfare(&greedy, &inst);
        assert!(w <= exact + TOL);
        for (i, user) in inst.users().iter().enumerate() {
            assert!(is_feasible(user, greedy.schedule(i), &inst));
        }
        close += usize::from(w >= 0.8 * exact);
    }
    assert!(
        close * 10 >= total as usize * 9,
        "greedy within 80% on only {close}/{total}"
    );
}

#[test]
fn equilibria_execute_at_least_as_many_tasks_as_the_optimum() {
    let cfg = JointSearchConfig::default();
    let (mut ne_sum, mut se_sum) = (0, 0);
    for seed in 0..200 {
        let inst = desk_instance(seed, 2 + (seed as usize % 5));
        ne_sum += execution_counts(&maximize_potential(&inst, &cfg).unwrap().profile).total();
        se_sum += execution_counts(&maximize_welfare(&inst, &cfg).unwrap().profile).total();
    }
    assert!(ne_sum >= se_sum, "{ne_sum} < {se_sum}");
}

#[test]
fn removing_shared_executions_keeps_feasibility_and_welfare() {
    for seed in 0..200 {
        let inst = crowded_instance(seed, 5, 4);
        let profile = random_profile(&inst, &mut rng(seed));
        let deduped = without_shared_executions(&inst, &profile);
        assert!(execution_counts(&deduped).iter().all(|(_, m)| m <= 1));
        for (k, m) in execution_counts(&profile).iter() {
            assert_eq!(execution_counts(&deduped).get(k), m.min(1));
        }
        for (i, user) in inst.users().iter().enumerate() {
            assert!(is_feasible(user, deduped.schedule(i), &inst), "seed {seed}");
        }
        assert!(social_welfare(&deduped, &inst) >= social_welfare(&profile, &inst) - TOL);
    }
}

#[test]
fn heuristic_baseline_sits_between_the_equilibrium_and_the_optimum() {
    let cfg = JointSearchConfig::default();
    for seed in 0..150 {
        let inst = desk_instance(seed, 2 + (seed as usize % 5));
        let (ne, _) =
            best_response_dynamics(&inst, inst.empty_profile(), &DynamicsConfig::default());
        let h = social_welfare(&heuristic_welfare(&inst, &ne), &inst);
        assert!(h >= social_welfare(&ne, &inst) - TOL);
        assert!(h >= social_welfare(&greedy_welfare_heuristic(&inst), &inst) - TOL);
        assert!(h <= maximize_welfare(&inst, &cfg).unwrap().value + TOL);
    }
}
