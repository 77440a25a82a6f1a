#![no_main]

use libfuzzer_sys::fuzz_target;
use twinbeam::PolingProfile;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(p) = PolingProfile::from_json(text) {
            let back = PolingProfile::from_json(&p.to_json()).expect("round trip");
            assert_eq!(back, p);
        }
    }
});
