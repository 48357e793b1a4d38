#![no_main]

use libfuzzer_sys::fuzz_target;
use pinchtape::simulator::{run_scenario, Scenario};

fuzz_target!(|bytes: &[u8]| {
    let Ok(text) = std::str::from_utf8(bytes) else {
        return;
    };
    let Ok(scenario) = Scenario::from_json_str(text) else {
        return;
    };
    // keep runs short; long profiles add nothing but time
    let steps = scenario
        .step_counts()
        .map(|c| c.iter().sum::<u64>())
        .unwrap_or(u64::MAX);
    if steps <= 10_000 {
        let _ = run_scenario(&scenario);
    }
    let again = Scenario::from_json_str(&scenario.to_json_string()).expect("serialized scenario reloads");
    assert_eq!(again, scenario);
});
