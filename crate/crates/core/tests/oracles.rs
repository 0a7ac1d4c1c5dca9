use mcsbr::oracles::*;
use mcsbr::Vec3;
use proptest::prelude::*;

#[test]
fn path_sum_converges_to_transfer_matrix() {
    let stack = LayerStack { layers: vec![(1.5, 0.3), (2.0, 0.2), (1.2, 0.1)], n_before: 1.0, n_after: 1.0 };
    let paths = enumerate_layered_paths(&stack, 22, false);
    for f in [0.7e9, 1.3e9, 2.9e9] {
        let d = layered_sum(&paths, f) - slab_reflection(&stack, f, false);
        assert!(d.norm() < 2e-3, "f = {f}: {d}");
    }
}

#[test]
fn pec_backed_slab_is_lossless() {
    let stack = LayerStack::slab(1.5f64.sqrt(), 3.0);
    for i in 0..50 {
        let f = 1e9 + 4e7 * i as f64;
        assert!((slab_reflection(&stack, f, true).norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn numeric_plate_matches_closed_form_at_broadside() {
    let want = plate_rcs(1.0, 0.5, 0.1);
    let got = plate_po_rcs_numeric(1.0, 0.5, 0.1, 0.0, 64);
    assert!((got / want - 1.0).abs() < 1e-9);
}

#[test]
fn echo_ranges_step_by_optical_thickness() {
    let r = slab_echo_ranges(-1.5, 1.5f64.sqrt(), 3.0, 2);
    assert!((r[1] - r[0] - 3.0 * 1.5f64.sqrt()).abs() < 1e-12);
    assert_eq!(dihedral_specular_ranges(Vec3::zero(), Vec3::new(0.0, 0.0, -1.0)), vec![0.0]);
}

proptest! {
    #[test]
    fn energy_is_conserved_without_loss(n in 1.01f64..4.0, d in 0.01f64..2.0, f in 0.5e9f64..5e9) {
        let stack = LayerStack::slab(n, d);
        let r = slab_reflection(&stack, f, false).norm_sqr();
        let t = slab_transmission(&stack, f).norm_sqr();
        prop_assert!((r + t - 1.0).abs() < 1e-9);
    }

    #[test]
    fn every_enumerated_path_leaves_through_the_top(max_bounce in 1usize..9, pec in proptest::bool::ANY) {
        let stack = LayerStack { layers: vec![(1.5, 0.3), (2.0, 0.2)], n_before: 1.0, n_after: 1.0 };
        for p in enumerate_layered_paths(&stack, max_bounce, pec) {
            prop_assert!(p.sequence.len() <= max_bounce);
            prop_assert!(p.amplitude.norm() <= 1.0 + 1e-12);
        }
    }
}
