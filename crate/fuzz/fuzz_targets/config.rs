#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(bundle) = hris_core::parse_config(text) {
        // anything the parser accepts must also pass validation
        bundle.validate().expect("parsed config failed validation");
    }
});
