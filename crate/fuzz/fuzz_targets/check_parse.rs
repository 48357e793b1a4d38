#![no_main]

use libfuzzer_sys::fuzz_target;
use pinchtape::simulator::Check;

fuzz_target!(|bytes: &[u8]| {
    if let Ok(text) = std::str::from_utf8(bytes) {
        if let Ok(check) = text.parse::<Check>() {
            let again: Check = check.to_string().parse().expect("displayed check reparses");
            assert_eq!(again, check);
        }
    }
});
