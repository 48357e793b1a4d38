#![no_main]

use libfuzzer_sys::fuzz_target;
use pinchtape::units::{parse_angle, AngleUnit};

fuzz_target!(|bytes: &[u8]| {
    if let Ok(text) = std::str::from_utf8(bytes) {
        for unit in [AngleUnit::Deg, AngleUnit::Rad] {
            if let Ok(v) = parse_angle(text, unit) {
                assert!(v.is_finite());
            }
        }
    }
});
