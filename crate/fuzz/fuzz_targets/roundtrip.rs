#![no_main]

use libfuzzer_sys::fuzz_target;
use nwpc_core::io::{parse_instance, write_instance};

// Whatever parses must survive write -> parse unchanged, and writing is a
// fixed point after one pass.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(inst) = parse_instance(text) else { return };
    let written = write_instance(&inst);
    let again = parse_instance(&written).expect("written instance parses");
    assert_eq!(again, inst);
    assert_eq!(write_instance(&again), written);
});
