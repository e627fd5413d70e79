mod common;

use aptqfi_core::sensitivity::{default_fd_step, log_grid};
use aptqfi_core::{
    analytic_sensitivity, fd_sensitivity, matrix_derivative_sensitivity, scaling_exponent, Complex64, GammaConvention,
    Parameter, SystemParams,
};
use common::*;
use proptest::prelude::*;

fn parameter() -> impl Strategy<Value = Parameter> {
    proptest::sample::select(Parameter::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(600))]

    #[test]
    fn analytic_matches_finite_difference(p in perturbed_params(), par in parameter()) {
        let a = analytic_sensitivity(&p, par).unwrap();
        let f = fd_sensitivity(&p, par, default_fd_step(&p, par)).unwrap();
        prop_assert!(f.relative_diff(&a) < 1e-6, "{:?} {:?} vs {:?}", par, a, f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn closed_forms_match_matrix_route(pm in mismatch_params(), pd in dispersive_params()) {
        let conv = GammaConvention::default();
        let a = analytic_sensitivity(&pm, Parameter::MismatchS).unwrap();
        let m = matrix_derivative_sensitivity(&pm, Parameter::MismatchS, conv).unwrap();
        prop_assert!(a.relative_diff(&m) < 1e-12);
        let a = analytic_sensitivity(&pd, Parameter::DispersiveG).unwrap();
        let m = matrix_derivative_sensitivity(&pd, Parameter::DispersiveG, conv).unwrap();
        prop_assert!(a.relative_diff(&m) < 1e-12);
    }

    #[test]
    fn drive_phase_covariance(p in perturbed_params(), phi in -3.2f64..3.2, par in parameter()) {
        prop_assume!(par != Parameter::DriveReal);
        let z = Complex64::from_polar(1.0, phi);
        let a = analytic_sensitivity(&p, par).unwrap();
        let b = analytic_sensitivity(&p.with_drive(p.drive * z), par).unwrap();
        prop_assert!(b.relative_diff(&a.scale(z)) < 1e-12);
        prop_assert!((b.d_alpha.norm() - a.d_alpha.norm()).abs() <= 1e-12 * a.d_alpha.norm().max(a.d_beta.norm()));
    }
}

#[test]
fn inverse_square_divergence() {
    let grid = log_grid(1e-3, 1e-2, 12);
    let p = SystemParams::from_xi(0.0, 1e-6, 1.0, Complex64::ONE).unwrap();
    for par in [Parameter::MismatchS, Parameter::DispersiveG] {
        let fit = scaling_exponent(&p, par, &grid).unwrap();
        assert!((fit.slope_alpha + 2.0).abs() < 0.05, "{par}: {fit:?}");
        assert!((fit.slope_beta + 2.0).abs() < 0.05, "{par}: {fit:?}");
    }
}
