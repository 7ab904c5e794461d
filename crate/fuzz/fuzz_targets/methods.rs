#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(methods) = hris_core::config::parse_methods(text) {
        let joined: Vec<&str> = methods.iter().map(|m| m.name()).collect();
        let again = hris_core::config::parse_methods(&joined.join(",")).unwrap();
        assert_eq!(methods, again);
    }
});
