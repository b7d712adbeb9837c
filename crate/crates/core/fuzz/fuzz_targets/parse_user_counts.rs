#![no_main]

use libfuzzer_sys::fuzz_target;
use tsg_core::experiments::parse_user_counts;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(counts) = parse_user_counts(text) {
        assert!(!counts.is_empty());
    }
});
