#![no_main]

use beepsim::parse::GraphSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = text.parse::<GraphSpec>() else { return };
    assert_eq!(spec.to_string().parse::<GraphSpec>().expect("reparse"), spec);
    // Keep generation cheap; large sizes are valid but slow.
    let small = match spec {
        GraphSpec::Gnp { n, .. } | GraphSpec::Complete(n) | GraphSpec::Ring(n) | GraphSpec::Path(n) | GraphSpec::Empty(n) => n <= 200,
        GraphSpec::Cliques(m) => m <= 8,
    };
    if small {
        if let Ok(g) = spec.build(0) {
            assert!(g.check_invariants());
        }
    }
});
