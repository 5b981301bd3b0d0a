#![no_main]

use edgecolor_core::coloring::verify_coloring;
use edgecolor_core::io::{parse_coloring, write_coloring};
use edgecolor_core::GraphInstance;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // A fixed 4-cycle with a chord-free layout.
    let inst = GraphInstance::from_edges(
        4,
        2,
        &[(0, 1, 0.5), (1, 2, 0.5), (2, 3, 0.5), (0, 3, 0.5)],
    );
    if let Ok(c) = parse_coloring(&inst, text) {
        let _ = verify_coloring(&inst, &c);
        assert_eq!(parse_coloring(&inst, &write_coloring(&inst, &c)).expect("round trip"), c);
    }
});
