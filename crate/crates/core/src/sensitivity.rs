//! Derivatives of the steady-state amplitudes with respect to a named parameter.
//!
//! Three routes are provided:
//! * the closed forms for the detuning mismatch `s` and the dispersive coupling `g`,
//! * the general identity `∂x/∂ε = −i H⁻¹ ∂e/∂ε − H⁻¹ (∂H/∂ε) x` obtained by
//!   differentiating `H x = −i e`, used for every other parameter,
//! * a central finite difference on [`steady_state_solve`], the verification oracle.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, EffectiveHamiltonian};
use crate::params::SystemParams;
use crate::steady::{
    apply_response, check_solvable, dispersive_denominator, mismatch_denominator,
    steady_state_solve, ModeAmplitudes,
};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The estimand ε.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    MismatchS,
    DispersiveG,
    Delta,
    /// Total damping γ at fixed Γ (equivalently κ).
    Gamma,
    /// Collective rate Γ; see [`GammaConvention`].
    GammaCollective,
    /// Real part of the drive ℰ.
    DriveReal,
}

impl Parameter {
    pub const ALL: [Parameter; 6] = [
        Parameter::MismatchS,
        Parameter::DispersiveG,
        Parameter::Delta,
        Parameter::Gamma,
        Parameter::GammaCollective,
        Parameter::DriveReal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Parameter::MismatchS => "mismatch_s",
            Parameter::DispersiveG => "dispersive_g",
            Parameter::Delta => "delta",
            Parameter::Gamma => "gamma",
            Parameter::GammaCollective => "gamma_collective",
            Parameter::DriveReal => "drive_real",
        }
    }

    /// Short symbol used in table headers (`s`, `g`, ...).
    pub fn symbol(self) -> &'static str {
        match self {
            Parameter::MismatchS => "s",
            Parameter::DispersiveG => "g",
            Parameter::Delta => "delta",
            Parameter::Gamma => "gamma",
            Parameter::GammaCollective => "Gamma",
            Parameter::DriveReal => "E",
        }
    }

    /// Current value of ε in `params`.
    pub fn value(self, params: &SystemParams) -> f64 {
        match self {
            Parameter::MismatchS => params.mismatch_s,
            Parameter::DispersiveG => params.dispersive_g,
            Parameter::Delta => params.delta,
            Parameter::Gamma => params.total_damping(),
            Parameter::GammaCollective => params.gamma_collective,
            Parameter::DriveReal => params.drive.re,
        }
    }

    /// Copy of `params` with ε set to `value`, all other independent quantities fixed.
    pub fn with_value(
        self,
        params: &SystemParams,
        value: f64,
        convention: GammaConvention,
    ) -> SystemParams {
        let mut p = *params;
        match self {
            Parameter::MismatchS => p.mismatch_s = value,
            Parameter::DispersiveG => p.dispersive_g = value,
            Parameter::Delta => p.delta = value,
            Parameter::Gamma => p.kappa = value - p.gamma_collective,
            Parameter::GammaCollective => {
                if convention == GammaConvention::Independent {
                    p.kappa = params.total_damping() - value;
                }
                p.gamma_collective = value;
            }
            Parameter::DriveReal => p.drive.re = value,
        }
        p
    }

    /// `(∂H/∂ε, ∂e/∂ε)` where `e = (ℰ, 0)` is the source vector.
    fn generator_derivative(self, convention: GammaConvention) -> (Matrix2<Complex64>, [Complex64; 2]) {
        let one = Complex64::ONE;
        let no_source = [ZERO, ZERO];
        match self {
            Parameter::MismatchS => (Matrix2::new(ZERO, ZERO, ZERO, -one), no_source),
            Parameter::DispersiveG => (Matrix2::new(ZERO, one, one, ZERO), no_source),
            Parameter::Delta => (Matrix2::new(one, ZERO, ZERO, -one), no_source),
            Parameter::Gamma => (Matrix2::new(-I, ZERO, ZERO, -I), no_source),
            Parameter::GammaCollective => {
                let diag = match convention {
                    GammaConvention::Dependent => -I,
                    GammaConvention::Independent => ZERO,
                };
                (Matrix2::new(diag, -I, -I, diag), no_source)
            }
            Parameter::DriveReal => (Matrix2::zeros(), [one, ZERO]),
        }
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Parameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Parameter::ALL
            .into_iter()
            .find(|p| p.name() == s || p.symbol() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown parameter '{s}'")))
    }
}

/// How γ = κ + Γ responds when Γ is varied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaConvention {
    /// κ held fixed, so ∂γ/∂Γ = 1.
    #[default]
    Dependent,
    /// γ held fixed (κ absorbs the change).
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPair {
    pub d_alpha: Complex64,
    pub d_beta: Complex64,
    pub parameter: Parameter,
}

impl SensitivityPair {
    /// `max(|Δ∂α|, |Δ∂β|) / max(|∂α|, |∂β|)` relative to `self`.
    pub fn relative_diff(&self, other: &SensitivityPair) -> f64 {
        let num = (self.d_alpha - other.d_alpha)
            .norm()
            .max((self.d_beta - other.d_beta).norm());
        let den = self.d_alpha.norm().max(self.d_beta.norm());
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }

    pub fn scale(self, c: Complex64) -> Self {
        Self {
            d_alpha: self.d_alpha * c,
            d_beta: self.d_beta * c,
            parameter: self.parameter,
        }
    }
}

/// Analytic sensitivity with the default Γ convention.
pub fn analytic_sensitivity(params: &SystemParams, parameter: Parameter) -> Result<SensitivityPair> {
    analytic_sensitivity_with(params, parameter, GammaConvention::default())
}

pub fn analytic_sensitivity_with(
    params: &SystemParams,
    parameter: Parameter,
    convention: GammaConvention,
) -> Result<SensitivityPair> {
    match parameter {
        Parameter::MismatchS if params.dispersive_g == 0.0 && params.delta == 0.0 => {
            mismatch_closed_form(params)
        }
        Parameter::DispersiveG if params.mismatch_s == 0.0 => dispersive_closed_form(params),
        _ => matrix_derivative_sensitivity(params, parameter, convention),
    }
}

/// `∂α₀/∂s = iΓ²ℰ/D²`, `∂β₀/∂s = −iΓγℰ/D²` with `D = Γ² + isγ − γ²`.
fn mismatch_closed_form(params: &SystemParams) -> Result<SensitivityPair> {
    check_solvable(&build_hamiltonian(params))?;
    let (big_gamma, gamma, e) = (params.gamma_collective, params.total_damping(), params.drive);
    let d = mismatch_denominator(big_gamma, gamma, params.mismatch_s);
    let d2 = d * d;
    Ok(SensitivityPair {
        d_alpha: I * big_gamma * big_gamma * e / d2,
        d_beta: -I * big_gamma * gamma * e / d2,
        parameter: Parameter::MismatchS,
    })
}

/// `∂α₀/∂g = 2i(Γ+ig)(γ−iΔ)ℰ/D²`, `∂β₀/∂g = −i[(Γ+ig)² + Δ² + γ²]ℰ/D²`
/// with `D = (Γ+ig)² − Δ² − γ²`.
fn dispersive_closed_form(params: &SystemParams) -> Result<SensitivityPair> {
    check_solvable(&build_hamiltonian(params))?;
    let (gamma, delta, e) = (params.total_damping(), params.delta, params.drive);
    let shifted = Complex64::new(params.gamma_collective, params.dispersive_g);
    let d = dispersive_denominator(shifted, gamma, delta);
    let d2 = d * d;
    Ok(SensitivityPair {
        d_alpha: 2.0 * I * shifted * Complex64::new(gamma, -delta) * e / d2,
        d_beta: -I * (shifted * shifted + delta * delta + gamma * gamma) * e / d2,
        parameter: Parameter::DispersiveG,
    })
}

/// General route through the derivative of the linear solve.
pub fn matrix_derivative_sensitivity(
    params: &SystemParams,
    parameter: Parameter,
    convention: GammaConvention,
) -> Result<SensitivityPair> {
    let h = build_hamiltonian(params);
    let x = steady_state_solve(&h, params.drive)?;
    let (dh, de) = parameter.generator_derivative(convention);
    Ok(differentiate_solve(&h, &x, &dh, de, parameter))
}

fn differentiate_solve(
    h: &EffectiveHamiltonian,
    x: &ModeAmplitudes,
    dh: &Matrix2<Complex64>,
    de: [Complex64; 2],
    parameter: Parameter,
) -> SensitivityPair {
    // H dx = −i de − dH x  ⇒  dx = (−iH⁻¹) de − i (−iH⁻¹)(dH x)
    let dhx = [
        dh[(0, 0)] * x.alpha0 + dh[(0, 1)] * x.beta0,
        dh[(1, 0)] * x.alpha0 + dh[(1, 1)] * x.beta0,
    ];
    let from_source = apply_response(h, de);
    let from_matrix = apply_response(h, dhx);
    SensitivityPair {
        d_alpha: from_source[0] - I * from_matrix[0],
        d_beta: from_source[1] - I * from_matrix[1],
        parameter,
    }
}

/// `(ε^{1/3}_mach)·max(|ε|, Γ)`, the usual central-difference step.
pub fn default_fd_step(params: &SystemParams, parameter: Parameter) -> f64 {
    f64::EPSILON.cbrt() * parameter.value(params).abs().max(params.gamma_collective)
}

/// Central difference `[x(ε+h) − x(ε−h)]/(2h)` on the linear-solve path.
pub fn fd_sensitivity(params: &SystemParams, parameter: Parameter, step: f64) -> Result<SensitivityPair> {
    fd_sensitivity_with(params, parameter, step, GammaConvention::default())
}

pub fn fd_sensitivity_with(
    params: &SystemParams,
    parameter: Parameter,
    step: f64,
    convention: GammaConvention,
) -> Result<SensitivityPair> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParams(format!("step must be > 0, got {step}")));
    }
    let eps = parameter.value(params);
    let eval = |v: f64| {
        let p = parameter.with_value(params, v, convention);
        steady_state_solve(&build_hamiltonian(&p), p.drive)
    };
    let plus = eval(eps + step)?;
    let minus = eval(eps - step)?;
    let inv = 1.0 / (2.0 * step);
    Ok(SensitivityPair {
        d_alpha: (plus.alpha0 - minus.alpha0) * inv,
        d_beta: (plus.beta0 - minus.beta0) * inv,
        parameter,
    })
}

/// Least-squares log–log slopes of `|∂α₀/∂ε|` and `|∂β₀/∂ε|` versus ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub slope_alpha: f64,
    pub slope_beta: f64,
    pub points_used: usize,
}

pub const MIN_SCALING_POINTS: usize = 4;

/// Fits the power law of the sensitivity magnitude over `grid`.
///
/// Grid points that are non-positive, or where the sensitivity cannot be
/// evaluated, are skipped; fewer than [`MIN_SCALING_POINTS`] survivors is an error.
pub fn scaling_exponent(params: &SystemParams, parameter: Parameter, grid: &[f64]) -> Result<ScalingFit> {
    let convention = GammaConvention::default();
    let mut xs = Vec::with_capacity(grid.len());
    let mut ya = Vec::with_capacity(grid.len());
    let mut yb = Vec::with_capacity(grid.len());
    for &eps in grid {
        if !(eps > 0.0 && eps.is_finite()) {
            continue;
        }
        let p = parameter.with_value(params, eps, convention);
        let Ok(sens) = analytic_sensitivity_with(&p, parameter, convention) else {
            continue;
        };
        let (a, b) = (sens.d_alpha.norm(), sens.d_beta.norm());
        if a > 0.0 && b > 0.0 {
            xs.push(eps.ln());
            ya.push(a.ln());
            yb.push(b.ln());
        }
    }
    if xs.len() < MIN_SCALING_POINTS {
        return Err(Error::InsufficientGrid {
            valid: xs.len(),
            required: MIN_SCALING_POINTS,
        });
    }
    Ok(ScalingFit {
        slope_alpha: least_squares_slope(&xs, &ya),
        slope_beta: least_squares_slope(&xs, &yb),
        points_used: xs.len(),
    })
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// `count` logarithmically spaced points in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect()
}
