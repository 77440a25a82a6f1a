#![no_main]

use libfuzzer_sys::fuzz_target;
use twinbeam::gaussian::{extract_mode_sets, CovarianceMatrix};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok((v, dw)) = CovarianceMatrix::from_json(text) {
            if v.modes() <= 16 {
                let _ = extract_mode_sets(&v, dw.unwrap_or(1.0));
            }
        }
    }
});
