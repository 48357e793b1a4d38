#![no_main]

use libfuzzer_sys::fuzz_target;
use pinchtape::export::read_moment_csv;
use pinchtape::stiffness::calibrate_unpinched;

fuzz_target!(|bytes: &[u8]| {
    if let Ok(samples) = read_moment_csv(bytes) {
        assert!(samples.iter().all(|s| s.theta.is_finite() && s.moment.is_finite()));
        if samples.len() <= 256 {
            let _ = calibrate_unpinched(&samples);
        }
    }
});
