#![no_main]

use edgecolor_core::io::{parse_instance, write_instance, MissingValues};
use edgecolor_core::validate_instance;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    for missing in [MissingValues::Reject, MissingValues::Uniform] {
        if let Ok(inst) = parse_instance(text, missing) {
            let _ = validate_instance(&inst);
            // Canonical output must parse back to the same instance.
            let canonical = write_instance(&inst);
            let again = parse_instance(&canonical, MissingValues::Reject).expect("canonical parses");
            assert_eq!(write_instance(&again), canonical);
        }
    }
});
