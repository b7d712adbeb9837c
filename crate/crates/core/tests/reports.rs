use tsg_core::dynamics::DynamicsConfig;
use tsg_core::experiments::{run_single, SolverMode};
use tsg_core::io::{parse_profile, read_instance};
use tsg_core::model::Violation;
use tsg_core::optimizer::JointSearchConfig;
use tsg_core::{Error, Instance};

const EXAMPLE: &str = include_str!("../data/two_users_one_task.json");

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

#[test]
fn shared_task_example_report() {
    let inst = read_instance(EXAMPLE).unwrap();
    let report = run_single(
        &inst,
        SolverMode::Exact,
        &DynamicsConfig::default(),
        &JointSearchConfig::default(),
    )
    .unwrap();
    assert!(
        close(report.ne_dynamics.welfare, 0.3),
        "{}",
        report.ne_dynamics.welfare
    );
    assert!(close(report.se.welfare, 5.2));
    assert!(close(report.ratio.unwrap(), 0.3 / 5.2));
    assert_eq!(report.ne_dynamics.sum_mk, 2);
    assert_eq!(report.se.sum_mk, 1);
    let phi = report.ne_potential.unwrap();
    assert!(close(phi.potential, 5.3));
    assert!(close(phi.welfare, 0.3));
    assert!(close(report.ne_dynamics.payoffs[0], 0.2) && close(report.ne_dynamics.payoffs[1], 0.1));
    assert!(report.rounds >= 1);

    let heuristic = run_single(
        &inst,
        SolverMode::Heuristic,
        &DynamicsConfig::default(),
        &JointSearchConfig::default(),
    )
    .unwrap();
    assert!(close(heuristic.se.welfare, 5.2));
    assert_eq!(heuristic.se.method, "greedy-lower-bound");
    assert!(heuristic.ne_potential.is_none());
}

#[test]
fn empty_instance_report() {
    let inst = Instance::new(vec![], vec![], 100.0);
    let report = run_single(
        &inst,
        SolverMode::Exact,
        &DynamicsConfig::default(),
        &JointSearchConfig::default(),
    )
    .unwrap();
    assert_eq!(report.ne_dynamics.welfare, 0.0);
    assert_eq!(report.se.welfare, 0.0);
    assert_eq!(report.ratio, Some(1.0));
    assert_eq!(report.ne_dynamics.jain, 1.0);
    assert!(report.trace.is_empty());
}

#[test]
fn malformed_files_are_rejected_with_a_position() {
    let err = read_instance("{\"tasks\": [").unwrap_err();
    assert!(matches!(err, Error::Parse { line: 1, .. }), "{err:?}");
    let err = read_instance("{\"tasks\": [], \"users\": []}").unwrap_err();
    assert!(
        matches!(err, Error::Parse { .. }),
        "missing horizon: {err:?}"
    );
}

#[test]
fn invalid_instances_list_every_violation() {
    let broken = EXAMPLE
        .replacen("\"window_close_s\": 3600", "\"window_close_s\": -5", 1)
        .replace("\"exec_cost_usd\": 4.9", "\"exec_cost_usd\": -1");
    assert_ne!(broken, EXAMPLE);
    match read_instance(&broken).unwrap_err() {
        Error::Invalid(report) => {
            assert!(report
                .violations
                .iter()
                .any(|v| matches!(v, Violation::InvertedWindow { .. })));
            assert!(report
                .violations
                .iter()
                .any(|v| matches!(v, Violation::BadExecCost { .. })));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn profiles_are_checked_against_the_instance() {
    let inst = read_instance(EXAMPLE).unwrap();
    let ok = parse_profile(
        r#"{"profile":[{"user":1,"tasks":[1]},{"user":2,"tasks":[]}]}"#,
        &inst,
    )
    .unwrap();
    assert_eq!(ok.schedule(0).len(), 1);
    for bad in [
        r#"{"profile":[{"user":3,"tasks":[1]}]}"#,
        r#"{"profile":[{"user":1,"tasks":[7]}]}"#,
        r#"{"profile":[{"user":1,"tasks":[1,1]}]}"#,
        r#"{"profile":[{"user":1,"tasks":[]},{"user":1,"tasks":[]}]}"#,
        r#"{"profile":"#,
    ] {
        assert!(parse_profile(bad, &inst).is_err(), "{bad}");
    }
}
