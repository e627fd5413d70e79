#![allow(dead_code)]

use aptqfi_core::{Complex64, SystemParams};
use proptest::prelude::*;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn drive() -> impl Strategy<Value = Complex64> {
    (0.05f64..2.0, -3.2f64..3.2).prop_map(|(r, phi)| Complex64::from_polar(r, phi))
}

/// Unperturbed systems with κ bounded away from the singular point.
pub fn base_params() -> impl Strategy<Value = SystemParams> {
    (-3.0f64..3.0, 0.05f64..3.0, 0.2f64..3.0, drive())
        .prop_map(|(d, k, g, e)| SystemParams::new(d, k, g, e).unwrap())
}

/// Any perturbation, possibly combined.
pub fn perturbed_params() -> impl Strategy<Value = SystemParams> {
    (base_params(), -1.0f64..1.0, -1.0f64..1.0).prop_map(|(p, s, g)| p.with_mismatch(s).with_dispersive(g))
}

pub fn mismatch_params() -> impl Strategy<Value = SystemParams> {
    (0.05f64..3.0, 0.2f64..3.0, drive(), -1.0f64..1.0)
        .prop_map(|(k, g, e, s)| SystemParams::new(0.0, k, g, e).unwrap().with_mismatch(s))
}

pub fn dispersive_params() -> impl Strategy<Value = SystemParams> {
    (base_params(), -1.0f64..1.0).prop_map(|(p, g)| p.with_dispersive(g))
}
