#![no_main]

use beepsim::graph::gen_gnp;
use beepsim::verify::{check_outcome, parse_outcome_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(outcome) = parse_outcome_json(text) else { return };
    let g = gen_gnp(8, 0.4, 1).expect("graph");
    let _ = check_outcome(&g, &outcome);
});
