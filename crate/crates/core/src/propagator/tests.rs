use super::*;
use crate::linalg::frob_diff;
use proptest::prelude::*;

fn setup(n: usize, n_pump: f64) -> (FrequencyGrid, MediumSpec, PumpSpectrum) {
    let grid = FrequencyGrid::symmetric(6.0, n).unwrap();
    let medium = MediumSpec::symmetric(3.0, 2.0, 1.0, 1.0, 8).unwrap();
    let pump = PumpSpectrum::new(1.0, n_pump, 2.0).unwrap();
    (grid, medium, pump)
}

fn asymmetric_medium() -> MediumSpec {
    MediumSpec {
        v_p: 1.0,
        v_s: 1.0 / 3.5,
        v_i: 1.0 / 0.2,
        omega_bar_p: 2.0,
        omega_bar_s: 1.2,
        omega_bar_i: 0.8,
        gamma: 1.0,
        length: 1.0,
        n_domains: 8,
    }
}

fn diff(a: &Propagator, b: &Propagator) -> f64 {
    frob_diff(a.matrix(), b.matrix())
}

#[test]
fn free_space_has_no_pump_kernel() {
    let (grid, medium, pump) = setup(11, 5.0);
    let b = assemble_generator(&grid, &medium, &pump, 0).unwrap();
    assert!(b.f.norm_max() == 0.0);
    let q = b.q_matrix();
    for i in 0..11 {
        for j in 0..11 {
            assert_eq!(q[(i, j + 11)], c64::new(0.0, 0.0));
            assert_eq!(q[(i + 11, j)], c64::new(0.0, 0.0));
        }
    }
    let b = assemble_generator(&grid, &medium, &pump.with_photons(0.0), 1).unwrap();
    assert!(b.f.norm_max() == 0.0);
}

#[test]
fn pump_kernel_is_exactly_symmetric() {
    for grid in [
        FrequencyGrid::symmetric(6.0, 41).unwrap(),
        FrequencyGrid::new(-3.0, 5.0, 17).unwrap(),
    ] {
        let (_, medium, pump) = setup(3, 2.0);
        let b = assemble_generator(&grid, &medium, &pump, -1).unwrap();
        let n = grid.len();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(b.f[(i, j)], b.f[(j, i)]);
            }
        }
    }
}

#[test]
fn unpumped_domain_is_diagonal_phase() {
    let (grid, medium, pump) = setup(9, 0.0);
    let b = assemble_generator(&grid, &medium, &pump, 1).unwrap();
    let u = domain_propagator(&b, 0.1).unwrap();
    for i in 0..9 {
        for j in 0..9 {
            let want = if i == j {
                c64::cis(0.1 * b.g[i])
            } else {
                c64::new(0.0, 0.0)
            };
            assert!((u.u_ss()[(i, j)] - want).norm() < 1e-14);
            assert!(u.u_si()[(i, j)].norm() < 1e-14);
        }
    }
}

#[test]
fn tiny_step_is_identity() {
    let (grid, medium, pump) = setup(9, 3.0);
    let b = assemble_generator(&grid, &medium, &pump, 1).unwrap();
    let u = domain_propagator(&b, 1e-14).unwrap();
    assert!(diff(&u, &Propagator::identity(9)) < 1e-12);
    assert!(domain_propagator(&b, 0.0).is_err());
}

#[test]
fn semigroup_property() {
    let (grid, medium, pump) = setup(21, 4.0);
    let b = assemble_generator(&grid, &medium, &pump, -1).unwrap();
    let h = domain_propagator(&b, 0.05).unwrap();
    let f = domain_propagator(&b, 0.1).unwrap();
    let hh = compose(&h, &h).unwrap();
    assert!(diff(&hh, &f) < 1e-10);
}

#[test]
fn unpumped_profile_is_identity() {
    let (grid, medium, pump) = setup(15, 3.0);
    let p = PolingProfile::new(0.125, vec![0; 8]).unwrap();
    let u = stitch(&p, &grid, &medium, &pump).unwrap();
    assert!(diff(&u, &Propagator::identity(15)) < 1e-13);
    let p = PolingProfile::uniform(1.0, 8).unwrap();
    let u = stitch(&p, &grid, &medium, &pump.with_photons(0.0)).unwrap();
    assert!(diff(&u, &Propagator::identity(15)) < 1e-13);
}

#[test]
fn empty_profile_is_identity() {
    let (grid, medium, pump) = setup(7, 3.0);
    let p = PolingProfile::new(0.1, vec![]).unwrap();
    assert_eq!(stitch(&p, &grid, &medium, &pump).unwrap(), Propagator::identity(7));
}

#[test]
fn chunked_matches_naive_on_eight_domains() {
    let (grid, medium, pump) = setup(31, 6.0);
    let p = PolingProfile::new(0.125, vec![1, -1, -1, 1, 1, 1, -1, 1]).unwrap();
    let naive = stitch_naive(&p, &grid, &medium, &pump, true).unwrap();
    for m in [StitchMethod::Paired, StitchMethod::General] {
        let c = stitch_with(&p, &grid, &medium, &pump, m).unwrap();
        assert!(diff(&c, &naive) < 1e-12, "{m:?}: {}", diff(&c, &naive));
    }
}

#[test]
fn general_path_handles_asymmetric_media() {
    let (grid, _, pump) = setup(21, 4.0);
    let medium = asymmetric_medium();
    let p = PolingProfile::new(0.1, vec![1, 0, -1, 1, -1, -1, 0, 1, 1, -1]).unwrap();
    assert!(stitch_with(&p, &grid, &medium, &pump, StitchMethod::Paired).is_err());
    let c = stitch(&p, &grid, &medium, &pump).unwrap();
    let naive = stitch_naive(&p, &grid, &medium, &pump, false).unwrap();
    assert!(diff(&c, &naive) < 1e-12);
    assert!(c.bogoliubov_residual() < 1e-10);
}

#[test]
fn long_profile_preserves_commutators() {
    let (grid, medium, pump) = setup(41, 30.0);
    let signs = (0..1000).map(|k| if (k * 7) % 11 < 6 { 1 } else { -1 }).collect();
    let p = PolingProfile::new(1e-3, signs).unwrap();
    let u = stitch(&p, &grid, &medium, &pump).unwrap();
    assert!(u.bogoliubov_residual() < 1e-8, "{}", u.bogoliubov_residual());
    assert!((u.determinant_magnitude() - 1.0).abs() < 1e-6);
    assert!(frob_diff(u.u_si(), CMat::zeros(41, 41).as_ref()) > 1e-3);
}

#[test]
fn compose_with_identity() {
    let (grid, medium, pump) = setup(13, 5.0);
    let p = PolingProfile::uniform(1.0, 8).unwrap();
    let u = stitch(&p, &grid, &medium, &pump).unwrap();
    let c = compose(&u, &Propagator::identity(13)).unwrap();
    assert!(diff(&c, &u) < 1e-15);
    assert!(compose(&u, &Propagator::identity(12)).is_err());
}

#[test]
fn composition_is_ordered_and_canonical() {
    let (grid, medium, pump) = setup(17, 8.0);
    let a = stitch(&PolingProfile::uniform(1.0, 8).unwrap(), &grid, &medium, &pump).unwrap();
    let p = PolingProfile::new(0.125, vec![1, 1, -1, -1, 1, -1, 1, 1]).unwrap();
    let b = stitch(&p, &grid, &medium.with_swapped_velocities(), &pump).unwrap();
    let ab = compose(&a, &b).unwrap();
    let ba = compose(&b, &a).unwrap();
    assert!(ab.bogoliubov_residual() < 1e-10);
    assert!(diff(&ab, &ba) > 1e-3);
}

#[test]
fn unpumped_double_pass_is_identity() {
    let (grid, medium, pump) = setup(15, 0.0);
    let p = PolingProfile::new(0.125, vec![1, -1, 1, 1, -1, 1, 1, 1]).unwrap();
    let u = double_pass_propagator(&grid, &medium, &pump, &p).unwrap();
    assert!(diff(&u, &Propagator::identity(15)) < 1e-13);
}

fn photons(u: &Propagator) -> f64 {
    u.u_si().norm_l2().powi(2)
}

#[test]
fn double_pass_quadruples_low_gain_photons() {
    let (grid, medium, pump) = setup(61, 1e-6);
    let signs = crate::poling::design_domains(&crate::poling::PmfTarget::new(0.25, 1.0).unwrap(), 200)
        .unwrap()
        .profile
        .signs;
    for p in [
        PolingProfile::uniform(1.0, 200).unwrap(),
        PolingProfile::new(1.0 / 200.0, signs).unwrap(),
    ] {
        let single = stitch(&p, &grid, &medium, &pump).unwrap();
        let double = double_pass_propagator(&grid, &medium, &pump, &p).unwrap();
        let ratio = photons(&double) / photons(&single);
        assert!((ratio - 4.0).abs() < 4e-3, "{ratio}");
    }
}

#[test]
fn cache_round_trip() {
    let (grid, medium, pump) = setup(9, 3.0);
    let p = PolingProfile::uniform(1.0, 8).unwrap();
    let u = stitch(&p, &grid, &medium, &pump).unwrap();
    let h = CacheHeader::for_inputs(&grid, &medium, &[&p], &pump);
    let bytes = u.to_cache_bytes(&h);
    let (h2, u2) = Propagator::from_cache_bytes(&bytes).unwrap();
    assert_eq!(h, h2);
    assert_eq!(u, u2);
    let mut bad = bytes.clone();
    bad[100] ^= 1;
    assert!(Propagator::from_cache_bytes(&bad).is_err());
    assert!(Propagator::from_cache_bytes(&bytes[..bytes.len() - 1]).is_err());
    let other = CacheHeader::for_inputs(&grid, &medium, &[&p], &pump.with_photons(3.1));
    assert_ne!(h.tag(), other.tag());
}

fn signs_strategy() -> impl Strategy<Value = Vec<i8>> {
    proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8), Just(0i8)], 1..24)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stitched_maps_are_canonical(signs in signs_strategy(), n_pump in 0.0f64..40.0) {
        let (grid, medium, pump) = setup(15, n_pump);
        let p = PolingProfile::new(1.0 / signs.len() as f64, signs).unwrap();
        let u = stitch(&p, &grid, &medium, &pump).unwrap();
        prop_assert!(u.bogoliubov_residual() < 1e-8);
        prop_assert!((u.determinant_magnitude() - 1.0).abs() < 1e-6);
        let naive = stitch_naive(&p, &grid, &medium, &pump, false).unwrap();
        prop_assert!(diff(&u, &naive) < 1e-12);
    }
}
