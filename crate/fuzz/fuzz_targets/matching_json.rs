#![no_main]

use edgecolor_core::io::{parse_matching, write_matching};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = parse_matching(text) {
        let _ = m.conflicts();
        assert_eq!(parse_matching(&write_matching(&m)).expect("round trip"), m);
    }
});
