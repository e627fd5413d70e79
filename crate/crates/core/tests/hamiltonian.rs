mod common;

use aptqfi_core::hamiltonian::{check_anti_pt, is_dynamically_stable, DEFAULT_EP_TOL};
use aptqfi_core::sensitivity::{least_squares_slope, log_grid};
use aptqfi_core::{build_hamiltonian, classify_phase, spectrum, Complex64, SystemParams};
use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn unperturbed_is_anti_pt(p in base_params()) {
        let h = build_hamiltonian(&p);
        prop_assert!(check_anti_pt(&h, 1e-12));
        prop_assert!(h.trace().re.abs() < 1e-12);
        prop_assert!(h.det().im.abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_reproduce_trace_and_det(p in perturbed_params()) {
        let h = build_hamiltonian(&p);
        let [l1, l2] = spectrum(&h, DEFAULT_EP_TOL).eigenvalues;
        prop_assert!((l1 + l2 - h.trace()).norm() < 1e-12);
        prop_assert!((l1 * l2 - h.det()).norm() < 1e-12 * h.det().norm().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn phase_is_even_in_detuning(p in base_params()) {
        let flipped = p.with_delta(-p.delta);
        prop_assert_eq!(classify_phase(&p, DEFAULT_EP_TOL), classify_phase(&flipped, DEFAULT_EP_TOL));
    }

    #[test]
    fn positive_kappa_is_stable(p in base_params()) {
        prop_assert!(is_dynamically_stable(&build_hamiltonian(&p)));
    }
}

#[test]
fn square_root_splitting_near_ep() {
    let etas = log_grid(1e-6, 1e-4, 15);
    let (xs, ys): (Vec<f64>, Vec<f64>) = etas
        .iter()
        .map(|&eta| {
            let p = SystemParams::new(1.0 + eta, 1.0, 1.0, Complex64::ONE).unwrap();
            (eta.ln(), spectrum(&build_hamiltonian(&p), DEFAULT_EP_TOL).splitting.ln())
        })
        .unzip();
    let slope = least_squares_slope(&xs, &ys);
    assert!((slope - 0.5).abs() < 0.02, "{slope}");
}

#[test]
fn perturbations_break_anti_pt() {
    let p = SystemParams::default().with_dispersive(0.1);
    assert!(!check_anti_pt(&build_hamiltonian(&p), 1e-12));
    let p = SystemParams::default().with_mismatch(0.1);
    assert!(!check_anti_pt(&build_hamiltonian(&p), 1e-12));
}
