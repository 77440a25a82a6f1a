#![no_main]

use libfuzzer_sys::fuzz_target;
use twinbeam::Propagator;

fuzz_target!(|data: &[u8]| {
    if let Ok((header, p)) = Propagator::from_cache_bytes(data) {
        assert_eq!(p.to_cache_bytes(&header), data);
    }
});
