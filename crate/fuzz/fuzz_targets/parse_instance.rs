#![no_main]

use libfuzzer_sys::fuzz_target;
use nwpc_core::io::parse_instance;

// Any input must either parse or return an error, never panic.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_instance(text);
    }
});
