//! Quantum Fisher information of the coherent steady state and the
//! Cramér-Rao bound, with two independent numerical oracles:
//!
//! * the symmetric logarithmic derivative solved in the eigenbasis of a
//!   truncated-Fock density matrix,
//! * the pure-state overlap formula `F = 4(⟨∂ψ|∂ψ⟩ − |⟨ψ|∂ψ⟩|²)`.
//!
//! For a coherent state `|α₀, β₀⟩` both reduce to `F = 4|∂α₀|² + 4|∂β₀|²`.

use std::cmp::Ordering;

use faer::Mat;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{coherent_state, Cutoffs, FockDensityMatrix, SparseOp};
use crate::hamiltonian::build_hamiltonian;
use crate::linalg::{hermitian_eigen, hermiticity_defect, to_faer};
use crate::params::SystemParams;
use crate::sensitivity::{
    analytic_sensitivity, least_squares_slope, GammaConvention, Parameter, SensitivityPair, MIN_SCALING_POINTS,
};
use crate::steady::{steady_state_solve, ModeAmplitudes};

/// Eigenvalue pairs with `p_j + p_k` at or below this are dropped from the SLD.
pub const SLD_EIGEN_THRESHOLD: f64 = 1e-12;

/// Both amplitudes must exceed this for the polar split of the SLD to exist.
pub const POLAR_MIN_AMPLITUDE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QfiReport {
    pub fisher_info: f64,
    /// `δε = 1/√F_Q`.
    pub cr_bound: f64,
    pub d_alpha_mag: f64,
    pub d_beta_mag: f64,
    pub parameter: Parameter,
}

/// `F_Q = 4|∂α₀/∂ε|² + 4|∂β₀/∂ε|²` and `δε = 1/√F_Q`.
pub fn qfi_closed_form(sens: &SensitivityPair) -> Result<QfiReport> {
    let d_alpha_mag = sens.d_alpha.norm();
    let d_beta_mag = sens.d_beta.norm();
    if !(d_alpha_mag.is_finite() && d_beta_mag.is_finite()) {
        return Err(Error::InvalidParams("sensitivities must be finite".into()));
    }
    let fisher_info = 4.0 * (d_alpha_mag * d_alpha_mag + d_beta_mag * d_beta_mag);
    if fisher_info == 0.0 {
        return Err(Error::ZeroInformation);
    }
    Ok(QfiReport {
        fisher_info,
        cr_bound: 1.0 / fisher_info.sqrt(),
        d_alpha_mag,
        d_beta_mag,
        parameter: sens.parameter,
    })
}

/// Analytic sensitivity followed by [`qfi_closed_form`].
pub fn qfi_report(params: &SystemParams, parameter: Parameter) -> Result<QfiReport> {
    qfi_closed_form(&analytic_sensitivity(params, parameter)?)
}

fn amplitudes_at(params: &SystemParams, parameter: Parameter, value: f64) -> Result<ModeAmplitudes> {
    let p = parameter.with_value(params, value, GammaConvention::default());
    steady_state_solve(&build_hamiltonian(&p), p.drive)
}

/// Amplitudes at `ε − h`, `ε`, `ε + h`.
fn stencil(params: &SystemParams, parameter: Parameter, step: f64) -> Result<[ModeAmplitudes; 3]> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParams(format!("fd_step must be > 0, got {step}")));
    }
    let eps = parameter.value(params);
    Ok([
        amplitudes_at(params, parameter, eps - step)?,
        amplitudes_at(params, parameter, eps)?,
        amplitudes_at(params, parameter, eps + step)?,
    ])
}

/// Cutoffs and step used by the oracles when none are given: the coherent-state
/// rule at the largest amplitude on the stencil, and `h = ε_mach^{1/3}·max(|ε|, Γ)`.
pub fn oracle_defaults(params: &SystemParams, parameter: Parameter) -> Result<(Cutoffs, f64)> {
    let step = crate::sensitivity::default_fd_step(params, parameter);
    let pts = stencil(params, parameter, step)?;
    let cutoffs = pts
        .iter()
        .map(|x| Cutoffs::for_amplitudes(x.alpha0, x.beta0))
        .reduce(Cutoffs::max)
        .expect("three stencil points");
    Ok((cutoffs, step))
}

fn stencil_states(params: &SystemParams, parameter: Parameter, cutoffs: Cutoffs, step: f64) -> Result<[DVector<Complex64>; 3]> {
    let [m, c, p] = stencil(params, parameter, step)?;
    Ok([
        coherent_state(m.alpha0, m.beta0, cutoffs)?,
        coherent_state(c.alpha0, c.beta0, cutoffs)?,
        coherent_state(p.alpha0, p.beta0, cutoffs)?,
    ])
}

/// `Tr(ρL²)` where `L` solves `∂ρ = (Lρ + ρL)/2`, solved in the eigenbasis of `ρ`:
/// `L_jk = 2(∂ρ)_jk/(p_j + p_k)` for `p_j + p_k > threshold`.
pub fn sld_fisher_information(rho: &DMatrix<Complex64>, d_rho: &DMatrix<Complex64>) -> Result<f64> {
    if rho.shape() != d_rho.shape() || rho.nrows() != rho.ncols() {
        return Err(Error::DimensionMismatch {
            expected: rho.nrows(),
            found: d_rho.nrows(),
        });
    }
    let (p, v) = hermitian_eigen(&to_faer(rho))?;
    let d_eig: Mat<Complex64> = v.adjoint() * to_faer(d_rho) * &v;
    let n = p.len();
    let mut fisher = 0.0;
    for k in 0..n {
        for j in 0..n {
            let sum = p[j] + p[k];
            if sum > SLD_EIGEN_THRESHOLD {
                let l = d_eig[(j, k)] * (2.0 / sum);
                fisher += p[j] * l.norm_sqr();
            }
        }
    }
    Ok(fisher)
}

/// SLD oracle: central-difference `∂ρ` of the truncated coherent steady state,
/// then [`sld_fisher_information`].
pub fn qfi_sld_oracle(params: &SystemParams, parameter: Parameter, cutoffs: Cutoffs, fd_step: f64) -> Result<f64> {
    let [minus, center, plus] = stencil_states(params, parameter, cutoffs, fd_step)?;
    let rho = &center * center.adjoint();
    let d_rho = (&plus * plus.adjoint() - &minus * minus.adjoint()) / Complex64::new(2.0 * fd_step, 0.0);
    sld_fisher_information(&rho, &d_rho)
}

/// `4(⟨∂ψ|∂ψ⟩ − |⟨ψ|∂ψ⟩|²)` with `∂ψ = (ψ₊ − ψ₋)/2h`.
pub fn pure_state_fisher_information(
    psi: &DVector<Complex64>,
    psi_minus: &DVector<Complex64>,
    psi_plus: &DVector<Complex64>,
    step: f64,
) -> f64 {
    let d_psi = (psi_plus - psi_minus) / Complex64::new(2.0 * step, 0.0);
    let overlap = psi.dotc(&d_psi);
    4.0 * (d_psi.norm_squared() - overlap.norm_sqr())
}

/// Pure-state oracle on the truncated coherent steady state.
pub fn qfi_pure_state_oracle(params: &SystemParams, parameter: Parameter, cutoffs: Cutoffs, fd_step: f64) -> Result<f64> {
    let [minus, center, plus] = stencil_states(params, parameter, cutoffs, fd_step)?;
    Ok(pure_state_fisher_information(&center, &minus, &plus, fd_step))
}

/// Pure-state Fisher information of an arbitrary family `ε ↦ ψ(ε)` at `eps`.
pub fn pure_state_fisher_of_family<F>(family: F, eps: f64, step: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<DVector<Complex64>>,
{
    let center = family(eps)?;
    let minus = family(eps - step)?;
    let plus = family(eps + step)?;
    Ok(pure_state_fisher_information(&center, &minus, &plus, step))
}

/// The three-part SLD of a coherent state, `L = L₁ + L₂ + L₃`:
///
/// * `L₁ = −2(|α₀|∂|α₀| + |β₀|∂|β₀|)` (a multiple of the identity),
/// * `L₂ = 2∂ln|α₀|·a†a + 2∂ln|β₀|·b†b`,
/// * `L₃ = 2i∂θ₁[a†a, ρ] + 2i∂θ₂[b†b, ρ]` with `α₀ = |α₀|e^{iθ₁}`, `β₀ = |β₀|e^{iθ₂}`.
///
/// `L₃` contains ρ itself, so the split is only meaningful for the state it was
/// built from. It is exposed for inspection; the Fisher information is taken
/// from the closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct SldDecomposition {
    pub l1_scalar: f64,
    pub l2_number_weights: (f64, f64),
    pub l3_phase_weights: (f64, f64),
    pub matrix: DMatrix<Complex64>,
    pub state: FockDensityMatrix,
}

impl SldDecomposition {
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    /// `Tr(ρL)`.
    pub fn mean(&self) -> f64 {
        (&self.state.entries * &self.matrix).trace().re
    }

    /// `Tr(ρL²)`.
    pub fn fisher_information(&self) -> f64 {
        (&self.state.entries * &self.matrix * &self.matrix).trace().re
    }

    /// Frobenius norm of `∂ρ − (Lρ + ρL)/2`.
    pub fn residual(&self, d_rho: &DMatrix<Complex64>) -> f64 {
        let rho = &self.state.entries;
        let sym = (&self.matrix * rho + rho * &self.matrix) * Complex64::new(0.5, 0.0);
        (d_rho - sym).norm()
    }
}

/// Assembles [`SldDecomposition`] from analytic sensitivities.
pub fn sld_decomposition(params: &SystemParams, parameter: Parameter, cutoffs: Cutoffs) -> Result<SldDecomposition> {
    let x = crate::steady::steady_state(params)?;
    let sens = analytic_sensitivity(params, parameter)?;
    let (ra, rb) = (x.alpha0.norm(), x.beta0.norm());
    if ra <= POLAR_MIN_AMPLITUDE || rb <= POLAR_MIN_AMPLITUDE {
        return Err(Error::InvalidParams(format!(
            "polar SLD split needs |alpha0|, |beta0| > {POLAR_MIN_AMPLITUDE:e}, got {ra:e}, {rb:e}"
        )));
    }
    // ∂ln|z| = Re(z* ∂z)/|z|², ∂arg z = Im(z* ∂z)/|z|²
    let da = x.alpha0.conj() * sens.d_alpha / (ra * ra);
    let db = x.beta0.conj() * sens.d_beta / (rb * rb);
    let l1_scalar = -2.0 * (ra * ra * da.re + rb * rb * db.re);
    let l2 = (2.0 * da.re, 2.0 * db.re);
    let l3 = (da.im, db.im);

    let state = FockDensityMatrix::coherent(x.alpha0, x.beta0, cutoffs)?;
    let d = cutoffs.dim();
    let a = SparseOp::annihilate_a(cutoffs);
    let b = SparseOp::annihilate_b(cutoffs);
    let na = a.adjoint().matmul(&a);
    let nb = b.adjoint().matmul(&b);
    let re = |v: f64| Complex64::new(v, 0.0);

    let mut matrix = DMatrix::from_diagonal_element(d, d, re(l1_scalar));
    matrix += na.scale(re(l2.0)).add(&nb.scale(re(l2.1))).to_dense();
    let rho = &state.entries;
    let commutator = |n: &SparseOp| n.mul_left(rho) - n.mul_right(rho);
    matrix += commutator(&na) * Complex64::new(0.0, 2.0 * l3.0);
    matrix += commutator(&nb) * Complex64::new(0.0, 2.0 * l3.1);

    Ok(SldDecomposition {
        l1_scalar,
        l2_number_weights: l2,
        l3_phase_weights: l3,
        matrix,
        state,
    })
}

/// Log–log slope of the Cramér-Rao bound `δε` versus ε over `grid`, skipping
/// points that fail; needs [`MIN_SCALING_POINTS`] survivors.
pub fn bound_scaling_exponent(params: &SystemParams, parameter: Parameter, grid: &[f64]) -> Result<f64> {
    let mut xs = Vec::with_capacity(grid.len());
    let mut ys = Vec::with_capacity(grid.len());
    for &eps in grid.iter().filter(|e| **e > 0.0 && e.is_finite()) {
        let p = parameter.with_value(params, eps, GammaConvention::default());
        if let Ok(r) = qfi_report(&p, parameter) {
            xs.push(eps.ln());
            ys.push(r.cr_bound.ln());
        }
    }
    if xs.len() < MIN_SCALING_POINTS {
        return Err(Error::InsufficientGrid {
            valid: xs.len(),
            required: MIN_SCALING_POINTS,
        });
    }
    Ok(least_squares_slope(&xs, &ys))
}

/// One `(ξ, ε)` point of a bound sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub xi: f64,
    pub epsilon: f64,
    pub outcome: std::result::Result<QfiReport, Error>,
}

impl SweepRow {
    pub fn fisher_info(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|r| r.fisher_info)
    }

    pub fn cr_bound(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|r| r.cr_bound)
    }
}

/// Cramér-Rao bound over `xi_values × epsilon_grid`, setting κ = ξΓ and ε to
/// each grid value. Rows are sorted by `(ξ, ε)`; a failing point keeps its
/// error in the row instead of aborting.
pub fn sweep_bound(base: &SystemParams, parameter: Parameter, xi_values: &[f64], epsilon_grid: &[f64]) -> Result<Vec<SweepRow>> {
    if xi_values.is_empty() || epsilon_grid.is_empty() {
        return Err(Error::InsufficientGrid { valid: 0, required: 1 });
    }
    let mut points: Vec<(f64, f64)> = xi_values
        .iter()
        .flat_map(|&xi| epsilon_grid.iter().map(move |&eps| (xi, eps)))
        .collect();
    points.sort_by(|a, b| match a.0.total_cmp(&b.0) {
        Ordering::Equal => a.1.total_cmp(&b.1),
        o => o,
    });
    let rows = points
        .into_par_iter()
        .map(|(xi, epsilon)| {
            let mut p = *base;
            p.kappa = xi * base.gamma_collective;
            let p = parameter.with_value(&p, epsilon, GammaConvention::default());
            let outcome = p.validate().and_then(|_| qfi_report(&p, parameter));
            SweepRow { xi, epsilon, outcome }
        })
        .collect();
    Ok(rows)
}
