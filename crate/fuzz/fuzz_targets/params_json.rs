#![no_main]

use libfuzzer_sys::fuzz_target;
use pinchtape::ManipulatorParams;

fuzz_target!(|bytes: &[u8]| {
    if let Ok(text) = std::str::from_utf8(bytes) {
        if let Ok(params) = ManipulatorParams::from_json_str(text) {
            assert!(params.validate().is_ok());
        }
    }
});
