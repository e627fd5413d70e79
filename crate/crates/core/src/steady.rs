//! Long-time mode amplitudes `(α₀, β₀) = −i H⁻¹ (ℰ, 0)ᵀ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, max_growth_rate, EffectiveHamiltonian};
use crate::params::SystemParams;

/// `|det H|` below `SINGULAR_TOL·Γ²` is treated as the real singularity.
pub const SINGULAR_TOL: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeAmplitudes {
    pub alpha0: Complex64,
    pub beta0: Complex64,
}

impl ModeAmplitudes {
    pub fn new(alpha0: Complex64, beta0: Complex64) -> Self {
        Self { alpha0, beta0 }
    }

    pub fn scale(self, c: Complex64) -> Self {
        Self::new(self.alpha0 * c, self.beta0 * c)
    }

    /// max(|α₀ − α|, |β₀ − β|).
    pub fn max_abs_diff(&self, other: &ModeAmplitudes) -> f64 {
        (self.alpha0 - other.alpha0)
            .norm()
            .max((self.beta0 - other.beta0).norm())
    }

    pub fn max_norm(&self) -> f64 {
        self.alpha0.norm().max(self.beta0.norm())
    }
}

fn check_singular(det: Complex64, rate_scale: f64) -> Result<()> {
    let tolerance = SINGULAR_TOL * rate_scale * rate_scale;
    if det.norm() < tolerance {
        return Err(Error::SingularResponse {
            det_abs: det.norm(),
            tolerance,
        });
    }
    Ok(())
}

fn check_stable(h: &EffectiveHamiltonian) -> Result<()> {
    let max_imag = max_growth_rate(h);
    if max_imag < 0.0 {
        Ok(())
    } else {
        Err(Error::Unstable { max_imag })
    }
}

/// Singular and stability checks shared by every steady-state path.
pub(crate) fn check_solvable(h: &EffectiveHamiltonian) -> Result<()> {
    check_singular(h.det(), h.rate_scale)?;
    check_stable(h)
}

/// `−i H⁻¹ v` by the adjugate formula. Caller is responsible for the checks.
pub(crate) fn apply_response(h: &EffectiveHamiltonian, v: [Complex64; 2]) -> [Complex64; 2] {
    let m = &h.matrix;
    let scale = -I / h.det();
    [
        scale * (m[(1, 1)] * v[0] - m[(0, 1)] * v[1]),
        scale * (-m[(1, 0)] * v[0] + m[(0, 0)] * v[1]),
    ]
}

/// Steady state of `d/dt x = −iHx + (ℰ, 0)` by direct 2×2 inversion.
pub fn steady_state_solve(h: &EffectiveHamiltonian, drive: Complex64) -> Result<ModeAmplitudes> {
    check_solvable(h)?;
    let [alpha0, beta0] = apply_response(h, [drive, Complex64::new(0.0, 0.0)]);
    Ok(ModeAmplitudes { alpha0, beta0 })
}

/// `steady_state_solve(build_hamiltonian(params), params.drive)`.
pub fn steady_state(params: &SystemParams) -> Result<ModeAmplitudes> {
    steady_state_solve(&build_hamiltonian(params), params.drive)
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParams(msg.into()))
    }
}

/// `α₀ = −(γ − iΔ)ℰ/(Γ² − Δ² − γ²)`, `β₀ = Γℰ/(Γ² − Δ² − γ²)`.
pub fn closed_form_base(params: &SystemParams) -> Result<ModeAmplitudes> {
    require(
        params.is_unperturbed(),
        "closed_form_base requires mismatch_s = dispersive_g = 0",
    )?;
    let (gamma, big_gamma, delta) = (
        params.total_damping(),
        params.gamma_collective,
        params.delta,
    );
    let denom = Complex64::new(big_gamma * big_gamma - delta * delta - gamma * gamma, 0.0);
    check_singular(denom, big_gamma)?;
    check_stable(&build_hamiltonian(params))?;
    let e = params.drive;
    Ok(ModeAmplitudes {
        alpha0: -Complex64::new(gamma, -delta) * e / denom,
        beta0: big_gamma * e / denom,
    })
}

/// Detuning-mismatch response at Δ = 0:
/// `α₀ = −(γ − is)ℰ/(Γ² + isγ − γ²)`, `β₀ = Γℰ/(Γ² + isγ − γ²)`.
pub fn closed_form_mismatch(params: &SystemParams) -> Result<ModeAmplitudes> {
    require(
        params.dispersive_g == 0.0 && params.delta == 0.0,
        "closed_form_mismatch requires delta = dispersive_g = 0",
    )?;
    let (gamma, big_gamma, s) = (
        params.total_damping(),
        params.gamma_collective,
        params.mismatch_s,
    );
    let denom = mismatch_denominator(big_gamma, gamma, s);
    check_singular(denom, big_gamma)?;
    check_stable(&build_hamiltonian(params))?;
    let e = params.drive;
    Ok(ModeAmplitudes {
        alpha0: -Complex64::new(gamma, -s) * e / denom,
        beta0: big_gamma * e / denom,
    })
}

/// Dispersive-coupling response, i.e. the base closed form with Γ → Γ + ig.
pub fn closed_form_dispersive(params: &SystemParams) -> Result<ModeAmplitudes> {
    require(
        params.mismatch_s == 0.0,
        "closed_form_dispersive requires mismatch_s = 0",
    )?;
    let (gamma, delta) = (params.total_damping(), params.delta);
    let shifted = Complex64::new(params.gamma_collective, params.dispersive_g);
    let denom = dispersive_denominator(shifted, gamma, delta);
    check_singular(denom, params.gamma_collective)?;
    check_stable(&build_hamiltonian(params))?;
    let e = params.drive;
    Ok(ModeAmplitudes {
        alpha0: -Complex64::new(gamma, -delta) * e / denom,
        beta0: shifted * e / denom,
    })
}

/// `Γ² + isγ − γ²`.
pub(crate) fn mismatch_denominator(big_gamma: f64, gamma: f64, s: f64) -> Complex64 {
    Complex64::new(big_gamma * big_gamma - gamma * gamma, s * gamma)
}

/// `(Γ + ig)² − Δ² − γ²`.
pub(crate) fn dispersive_denominator(shifted: Complex64, gamma: f64, delta: f64) -> Complex64 {
    shifted * shifted - delta * delta - gamma * gamma
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn base(delta: f64) -> SystemParams {
        SystemParams::new(delta, 1.0, 1.0, Complex64::ONE).unwrap()
    }

    #[test]
    fn base_values_at_zero_detuning() {
        // denominator 1 − 0 − 4 = −3
        let x = steady_state(&base(0.0)).unwrap();
        assert!((x.alpha0 - c(2.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((x.beta0 - c(-1.0 / 3.0, 0.0)).norm() < 1e-15);
        let y = closed_form_base(&base(0.0)).unwrap();
        assert!(x.max_abs_diff(&y) < 1e-15);
    }

    #[test]
    fn base_values_with_detuning() {
        // α₀ = (2 − 0.3i)/3.09, β₀ = −1/3.09
        let x = steady_state(&base(0.3)).unwrap();
        assert!((x.alpha0 - c(2.0 / 3.09, -0.3 / 3.09)).norm() < 1e-15);
        assert!((x.beta0 - c(-1.0 / 3.09, 0.0)).norm() < 1e-15);
        assert!((x.alpha0.re - 0.6472).abs() < 1e-4 && (x.alpha0.im + 0.0971).abs() < 1e-4);
        assert!((x.beta0.re + 0.3236).abs() < 1e-4);
        assert!(x.max_abs_diff(&closed_form_base(&base(0.3)).unwrap()) < 1e-14);
    }

    #[test]
    fn undriven_is_vacuum() {
        let x = steady_state(&base(0.3).with_drive(Complex64::ZERO)).unwrap();
        assert_eq!(x.alpha0, Complex64::ZERO);
        assert_eq!(x.beta0, Complex64::ZERO);
    }

    #[test]
    fn detuning_reversal_conjugates_alpha() {
        let x = closed_form_base(&base(0.4)).unwrap();
        let y = closed_form_base(&base(-0.4)).unwrap();
        assert!((x.alpha0.conj() - y.alpha0).norm() < 1e-15);
        assert!((x.beta0 - y.beta0).norm() < 1e-15);
    }

    #[test]
    fn mismatch_closed_form() {
        let zero = closed_form_mismatch(&base(0.0)).unwrap();
        assert!(zero.max_abs_diff(&ModeAmplitudes::new(c(2.0 / 3.0, 0.0), c(-1.0 / 3.0, 0.0))) < 1e-15);

        let p = base(0.0).with_mismatch(0.1);
        let x = closed_form_mismatch(&p).unwrap();
        let d = c(-3.0, 0.2);
        assert!((x.alpha0 + c(2.0, -0.1) / d).norm() < 1e-15);
        assert!((x.beta0 - c(1.0, 0.0) / d).norm() < 1e-15);
        assert!(x.max_abs_diff(&steady_state(&p).unwrap()) < 1e-14);
    }

    #[test]
    fn dispersive_closed_form() {
        assert!(closed_form_dispersive(&base(0.2))
            .unwrap()
            .max_abs_diff(&closed_form_base(&base(0.2)).unwrap())
            < 1e-15);

        let p = base(0.1).with_dispersive(0.1);
        let x = closed_form_dispersive(&p).unwrap();
        assert!(x.max_abs_diff(&steady_state(&p).unwrap()) < 1e-14);

        // (1 + 0.05i)² − 4 = −3.0025 + 0.1i
        let p = base(0.0).with_dispersive(0.05);
        let d = dispersive_denominator(c(1.0, 0.05), 2.0, 0.0);
        assert!((d - c(-3.0025, 0.1)).norm() < 1e-15);
        let x = closed_form_dispersive(&p).unwrap();
        assert!((x.alpha0 - c(-2.0, 0.0) / d).norm() < 1e-15);
        assert!((x.beta0 - c(1.0, 0.05) / d).norm() < 1e-15);
        assert!(x.max_abs_diff(&steady_state(&p).unwrap()) < 1e-14);
    }

    #[test]
    fn wrong_scenario_is_rejected() {
        assert!(matches!(
            closed_form_base(&base(0.0).with_mismatch(0.1)),
            Err(Error::InvalidParams(_))
        ));
        assert!(closed_form_mismatch(&base(0.1)).is_err());
        assert!(closed_form_dispersive(&base(0.0).with_mismatch(0.1)).is_err());
    }

    #[test]
    fn singular_point_is_an_error() {
        // Δ = 0, κ = 0: det = Γ² − γ² = 0
        let p = SystemParams::new(0.0, 0.0, 1.0, Complex64::ONE).unwrap();
        assert!(matches!(steady_state(&p), Err(Error::SingularResponse { .. })));
        assert!(matches!(closed_form_base(&p), Err(Error::SingularResponse { .. })));
    }

    #[test]
    fn unstable_system_is_an_error() {
        // γ = 0.5 < Γ = 1 at Δ = 0.2: formally invertible but growing
        let h = EffectiveHamiltonian::from_matrix(Matrix2::new(
            c(0.2, -0.5),
            c(0.0, -1.0),
            c(0.0, -1.0),
            c(-0.2, -0.5),
        ));
        assert!(matches!(
            steady_state_solve(&h, Complex64::ONE),
            Err(Error::Unstable { .. })
        ));
    }

    #[test]
    fn diverges_towards_the_singularity() {
        let mut last = 0.0;
        for k in 1..8 {
            let xi = 10f64.powi(-k);
            let delta = xi;
            let p = SystemParams::from_xi(delta, xi, 1.0, Complex64::ONE).unwrap();
            let a = steady_state(&p).unwrap().alpha0.norm();
            assert!(a > last, "|α₀| must grow approaching the singularity");
            last = a;
        }
        assert!(last > 1e6);
    }

    #[test]
    fn residual_vanishes() {
        let p = base(0.7).with_drive(c(0.3, -1.2));
        let h = build_hamiltonian(&p);
        let x = steady_state(&p).unwrap();
        let v = nalgebra::Vector2::new(x.alpha0, x.beta0);
        let r = h.matrix * v * (-I) + nalgebra::Vector2::new(p.drive, Complex64::ZERO);
        assert!(r.norm() < 1e-12 * p.drive.norm());
    }
}
