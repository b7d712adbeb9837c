#![no_main]

use libfuzzer_sys::fuzz_target;
use tsg_core::best_response::best_response;
use tsg_core::io::{instance_to_json, parse_instance, read_instance};
use tsg_core::payoff::{payoffs, social_welfare};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(doc) = parse_instance(text) else {
        return;
    };
    let inst = doc.instance;
    if !inst.validate().is_ok() {
        assert!(read_instance(text).is_err());
        return;
    }
    // Valid instances survive a write/read cycle unchanged.
    let again =
        read_instance(&instance_to_json(&inst, doc.gen_meta)).expect("written instance reads back");
    assert_eq!(again, inst);

    // Keep the searches small enough for the fuzzer's time budget.
    if inst.num_users() > 4 || inst.users().iter().any(|u| u.available_tasks.len() > 5) {
        return;
    }
    let mut profile = inst.empty_profile();
    for i in 0..inst.num_users() {
        let br = best_response(&inst, &profile, i);
        assert!(br.payoff >= 0.0);
        profile.set(i, br.schedule);
    }
    let sum: f64 = payoffs(&profile, &inst).iter().sum();
    let w = social_welfare(&profile, &inst);
    if w.is_finite() {
        assert!((sum - w).abs() <= 1e-6 * (1.0 + w.abs()));
    }
});
