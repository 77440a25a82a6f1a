#![no_main]

use libfuzzer_sys::fuzz_target;
use twinbeam::ScenarioConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = ScenarioConfig::from_json(text) {
            let _ = cfg.gain_values(Some(3));
            let _ = cfg.hash();
            let _ = cfg.medium();
        }
    }
});
