#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // any outcome is fine except a panic
    if let Err(e) = cpairs::parse_config(text) {
        let _ = e.issues();
    }
});
