use std::path::PathBuf;

use twinbeam::gaussian::{extract_mode_sets, CovarianceMatrix};
use twinbeam::{PolingProfile, Propagator, ScenarioConfig};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let b = std::fs::read(&p).unwrap();
            (p, b)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn config_seeds_parse() {
    for (p, b) in seeds("config") {
        let cfg = ScenarioConfig::from_json(std::str::from_utf8(&b).unwrap());
        assert!(cfg.is_ok(), "{}: {:?}", p.display(), cfg.err());
    }
}

#[test]
fn profile_seeds_round_trip() {
    for (_, b) in seeds("profile") {
        let p = PolingProfile::from_json(std::str::from_utf8(&b).unwrap()).unwrap();
        assert_eq!(PolingProfile::from_json(&p.to_json()).unwrap(), p);
    }
}

#[test]
fn cache_seeds_round_trip_and_reject_corruption() {
    for (_, b) in seeds("cache") {
        let (h, p) = Propagator::from_cache_bytes(&b).unwrap();
        assert_eq!(p.to_cache_bytes(&h), b);
        for cut in [0, 7, 20, b.len() - 1] {
            assert!(Propagator::from_cache_bytes(&b[..cut]).is_err());
        }
        let mut flipped = b.clone();
        let mid = flipped.len() / 2;
        flipped[mid] ^= 0x10;
        assert!(Propagator::from_cache_bytes(&flipped).is_err());
    }
}

#[test]
fn covariance_seeds_decompose() {
    for (_, b) in seeds("covariance") {
        let (v, dw) = CovarianceMatrix::from_json(std::str::from_utf8(&b).unwrap()).unwrap();
        let ms = extract_mode_sets(&v, dw.unwrap_or(1.0)).unwrap();
        assert!(ms.purity() <= 1.0 + 1e-9);
    }
}

#[test]
fn garbage_is_rejected_without_panicking() {
    let inputs: [&[u8]; 6] = [
        b"",
        b"{",
        b"null",
        b"[1,2]",
        b"{\"matrix\": [[1e400]]}",
        b"TWBPROP\0\x01\0\0\0",
    ];
    for b in inputs {
        let s = String::from_utf8_lossy(b);
        assert!(ScenarioConfig::from_json(&s).is_err());
        assert!(PolingProfile::from_json(&s).is_err());
        assert!(CovarianceMatrix::from_json(&s).is_err());
        assert!(Propagator::from_cache_bytes(b).is_err());
    }
}
