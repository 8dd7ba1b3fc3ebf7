#![no_main]

use beepsim::parse::{format_schedule, parse_schedule};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(schedule) = parse_schedule(text) else { return };
    let again = parse_schedule(&format_schedule(&schedule)).expect("reparse");
    assert_eq!(again, schedule);
    let concrete = schedule.resolve(64);
    for t in 1..=64 {
        let p = concrete.probability(t);
        assert!(p > 0.0 && p <= 1.0, "p({t}) = {p}");
    }
});
