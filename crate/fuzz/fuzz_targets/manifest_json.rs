#![no_main]

use edgecolor_cli::RunManifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = RunManifest::parse(text) {
        let _ = m.differences(&m);
        let _ = m.config.backend();
    }
});
