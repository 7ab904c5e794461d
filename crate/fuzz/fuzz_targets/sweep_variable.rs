#![no_main]

use hris_core::SweepVariable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(v) = text.parse::<SweepVariable>() {
        assert_eq!(v.name().parse::<SweepVariable>().unwrap(), v);
    }
});
