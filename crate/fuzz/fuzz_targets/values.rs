#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(values) = hris_core::config::parse_values(text) {
        // ordering is checked later, against the sweep variable
        assert_eq!(values.len(), text.split(',').count());
        assert!(values.iter().all(|v| v.is_finite()));
    }
});
