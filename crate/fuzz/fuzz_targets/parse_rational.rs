#![no_main]

use libfuzzer_sys::fuzz_target;
use nwpc_core::rational;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(value) = rational::parse(text) {
        let printed = rational::format(&value);
        assert_eq!(rational::parse(&printed).ok(), Some(value), "{text:?} printed as {printed:?}");
    }
});
