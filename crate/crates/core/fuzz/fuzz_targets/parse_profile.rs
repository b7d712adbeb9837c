#![no_main]

use libfuzzer_sys::fuzz_target;
use tsg_core::feasibility::is_feasible;
use tsg_core::io::{parse_profile, profile_to_json, read_instance};

const INSTANCE: &str = include_str!("../../data/two_users_one_task.json");

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let inst = read_instance(INSTANCE).unwrap();
    let Ok(profile) = parse_profile(text, &inst) else {
        return;
    };
    assert_eq!(profile.num_users(), inst.num_users());
    for (i, user) in inst.users().iter().enumerate() {
        // Parsed schedules only name available tasks; feasibility is separate.
        let _ = is_feasible(user, profile.schedule(i), &inst);
    }
    let back = parse_profile(&profile_to_json(&inst, &profile), &inst).unwrap();
    assert_eq!(back, profile);
});
