#![no_main]

use beepsim::graph::{load_edge_list, save_edge_list};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = load_edge_list(text) {
        assert!(g.check_invariants());
        let saved = save_edge_list(&g);
        assert_eq!(load_edge_list(&saved).expect("reload"), g);
    }
});
