//! Physical parameters of the driven two-mode system.
//!
//! All rates are measured in units of the collective rate Γ (normally 1) and ℏ = 1.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn unit_rate() -> f64 {
    1.0
}

/// Detunings, damping rates, drive and the two perturbations of the anti-PT dimer.
///
/// `mismatch_s` shifts the detuning of mode b (`H22 -> -Δ - s - iγ`), and
/// `dispersive_g` adds a coherent coupling `g (a†b + b†a)` on top of the
/// dissipative one. The paper scenarios use at most one of them at a time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Detuning Δ (mode a at +Δ, mode b at −Δ).
    pub delta: f64,
    /// Intrinsic damping κ of each mode into its own bath.
    pub kappa: f64,
    /// Collective damping Γ through the shared reservoir.
    #[serde(default = "unit_rate")]
    pub gamma_collective: f64,
    /// Complex Rabi amplitude ℰ of the drive on mode a.
    pub drive: Complex64,
    #[serde(default)]
    pub mismatch_s: f64,
    #[serde(default)]
    pub dispersive_g: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            delta: 0.0,
            kappa: 1.0,
            gamma_collective: 1.0,
            drive: Complex64::new(1.0, 0.0),
            mismatch_s: 0.0,
            dispersive_g: 0.0,
        }
    }
}

impl SystemParams {
    /// Unperturbed system; fails if `kappa < 0` or `gamma_collective <= 0`.
    pub fn new(delta: f64, kappa: f64, gamma_collective: f64, drive: Complex64) -> Result<Self> {
        let params = Self {
            delta,
            kappa,
            gamma_collective,
            drive,
            mismatch_s: 0.0,
            dispersive_g: 0.0,
        };
        params.validate()?;
        Ok(params)
    }

    /// Parametrize by ξ = (γ − Γ)/Γ, i.e. κ = ξΓ.
    pub fn from_xi(delta: f64, xi: f64, gamma_collective: f64, drive: Complex64) -> Result<Self> {
        Self::new(delta, xi * gamma_collective, gamma_collective, drive)
    }

    pub fn with_mismatch(mut self, s: f64) -> Self {
        self.mismatch_s = s;
        self
    }

    pub fn with_dispersive(mut self, g: f64) -> Self {
        self.dispersive_g = g;
        self
    }

    pub fn with_drive(mut self, drive: Complex64) -> Self {
        self.drive = drive;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.delta,
            self.kappa,
            self.gamma_collective,
            self.drive.re,
            self.drive.im,
            self.mismatch_s,
            self.dispersive_g,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if self.kappa < 0.0 {
            return Err(Error::InvalidParams(format!(
                "kappa must be >= 0, got {}",
                self.kappa
            )));
        }
        if self.gamma_collective <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "gamma_collective must be > 0, got {}",
                self.gamma_collective
            )));
        }
        Ok(())
    }

    /// Total damping γ = κ + Γ.
    pub fn total_damping(&self) -> f64 {
        self.kappa + self.gamma_collective
    }

    /// ξ = (γ − Γ)/Γ = κ/Γ.
    pub fn xi(&self) -> f64 {
        self.kappa / self.gamma_collective
    }

    /// True when both perturbations are switched on; closed forms then do not apply.
    pub fn has_combined_perturbation(&self) -> bool {
        self.mismatch_s != 0.0 && self.dispersive_g != 0.0
    }

    pub fn is_unperturbed(&self) -> bool {
        self.mismatch_s == 0.0 && self.dispersive_g == 0.0
    }
}
