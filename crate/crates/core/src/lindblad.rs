//! Truncated-Fock-space simulation of the two-mode master equation
//!
//! ```text
//! dρ/dt = −i[H, ρ] + κ𝓛(a)ρ + κ𝓛(b)ρ + 2Γ𝓛(c)ρ,   c = (a + b)/√2,
//! 𝓛(x)ρ = 2xρx† − x†xρ − ρx†x,
//! H = Δ a†a − (Δ + s) b†b + g(a†b + b†a) + i(ℰa† − ℰ*a),
//! ```
//!
//! together with the exact mean-value dynamics and coherent-state diagnostics.
//! The generator is applied with sparse operator products, so one evaluation
//! costs O(nnz·d) rather than O(d⁴) for a materialized superoperator.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{boundary_population, coherent_projection, coherent_state, Cutoffs, FockDensityMatrix, SparseOp};
use crate::hamiltonian::{build_hamiltonian, drift_matrix, max_growth_rate};
use crate::ode::{Dopri5, OdeOptions};
use crate::params::SystemParams;

/// Leakage into the truncation edge above which a run is rejected.
pub const LEAKAGE_LIMIT: f64 = 1e-8;

/// Residual distance `e^{−rate·t}` targeted by [`default_t_end`].
pub const STEADY_STATE_TOL: f64 = 1e-10;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Time to relax to within [`STEADY_STATE_TOL`] of the steady state,
/// `ln(1/tol)/r` with `r` the slowest decay rate of `H` (equal to γ − Γ at Δ = 0).
pub fn default_t_end(params: &SystemParams) -> f64 {
    let rate = -max_growth_rate(&build_hamiltonian(params));
    if rate > 0.0 {
        (1.0 / STEADY_STATE_TOL).ln() / rate
    } else {
        f64::INFINITY
    }
}

/// The generator in the form `dρ/dt = −i(Kρ − ρK†) + Σₖₗ Wₖₗ OₖρOₗ†` over the
/// operator basis `O = (a, b)`, with `K = H − (i/2) Σₖₗ Wₖₗ Oₗ†Oₖ` and
///
/// ```text
/// W = [[2κ + 2Γ, 2Γ], [2Γ, 2κ + 2Γ]],
/// ```
///
/// which is the jump set `{√(2κ)a, √(2κ)b, √(4Γ)c}` written in that basis.
#[derive(Debug, Clone)]
pub struct MasterEquation {
    cutoffs: Cutoffs,
    effective_adj: SparseOp,
    basis: [(SparseOp, SparseOp); 2],
    rates: [[f64; 2]; 2],
}

impl MasterEquation {
    pub fn new(params: &SystemParams, cutoffs: Cutoffs) -> Self {
        let a = SparseOp::annihilate_a(cutoffs);
        let b = SparseOp::annihilate_b(cutoffs);
        let ad = a.adjoint();
        let bd = b.adjoint();
        let re = |x: f64| Complex64::new(x, 0.0);

        let detuning_a = params.delta;
        let detuning_b = -params.delta - params.mismatch_s;
        let e = params.drive;
        let hamiltonian = ad
            .matmul(&a)
            .scale(re(detuning_a))
            .add(&bd.matmul(&b).scale(re(detuning_b)))
            .add(&ad.matmul(&b).add(&bd.matmul(&a)).scale(re(params.dispersive_g)))
            .add(&ad.scale(I * e))
            .add(&a.scale(-I * e.conj()));

        let (k, g) = (params.kappa, params.gamma_collective);
        let rates = [[2.0 * (k + g), 2.0 * g], [2.0 * g, 2.0 * (k + g)]];
        let basis = [(a, ad), (b, bd)];
        let mut effective = hamiltonian;
        for (i, (oi, _)) in basis.iter().enumerate() {
            for (j, (_, ojd)) in basis.iter().enumerate() {
                effective = effective.add(&ojd.matmul(oi).scale(Complex64::new(0.0, -0.5 * rates[i][j])));
            }
        }
        Self {
            cutoffs,
            effective_adj: effective.adjoint(),
            basis,
            rates,
        }
    }

    pub fn cutoffs(&self) -> Cutoffs {
        self.cutoffs
    }

    /// Scratch buffers for [`MasterEquation::apply_into`].
    pub fn workspace(&self) -> GeneratorWorkspace {
        let d = self.cutoffs.dim();
        GeneratorWorkspace {
            ys: [DMatrix::zeros(d, d), DMatrix::zeros(d, d)],
            z: DMatrix::zeros(d, d),
        }
    }

    /// `dρ/dt` at a Hermitian `rho`.
    pub fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let d = self.cutoffs.dim();
        let mut out = DMatrix::zeros(d, d);
        self.apply_into(rho, &mut out, &mut self.workspace());
        out
    }

    /// Writes `dρ/dt` into `out`, assembled as `N + N†` with
    /// `N = iρK† + ½ Σₖₗ Wₖₗ OₖρOₗ†` so the result is Hermitian to the last bit.
    pub fn apply_into(&self, rho: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>, ws: &mut GeneratorWorkspace) {
        let d = self.cutoffs.dim();
        out.fill(Complex64::ZERO);
        self.effective_adj.mul_right_acc(rho, out);
        for x in out.as_mut_slice() {
            *x *= I;
        }
        for (y, (o, _)) in ws.ys.iter_mut().zip(&self.basis) {
            y.fill(Complex64::ZERO);
            o.mul_left_acc(rho, y);
        }
        for (l, (_, old)) in self.basis.iter().enumerate() {
            let (w0, w1) = (0.5 * self.rates[0][l], 0.5 * self.rates[1][l]);
            let [y0, y1] = &ws.ys;
            for (o, (a, b)) in ws.z.as_mut_slice().iter_mut().zip(y0.as_slice().iter().zip(y1.as_slice())) {
                *o = a * w0 + b * w1;
            }
            old.mul_right_acc(&ws.z, out);
        }
        for c in 0..d {
            for r in 0..=c {
                let x = out[(r, c)] + out[(c, r)].conj();
                out[(r, c)] = x;
                out[(c, r)] = x.conj();
            }
        }
    }
}

/// Reusable buffers for one generator; see [`MasterEquation::workspace`].
#[derive(Debug, Clone)]
pub struct GeneratorWorkspace {
    ys: [DMatrix<Complex64>; 2],
    z: DMatrix<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Local error tolerance per accepted step.
    pub tol: f64,
    /// Reject the run if the edge population exceeds this after any step.
    pub leakage_limit: f64,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            leakage_limit: LEAKAGE_LIMIT,
            max_steps: 200_000,
        }
    }
}

/// Integrates from `rho0` to `t_end` with local error `≤ tol` per step.
pub fn evolve_master_equation(
    rho0: &FockDensityMatrix,
    params: &SystemParams,
    t_end: f64,
    tol: f64,
) -> Result<FockDensityMatrix> {
    let opts = EvolveOptions {
        tol,
        ..EvolveOptions::default()
    };
    let mut out = evolve_sampled(rho0, params, &[t_end], opts, |_, _| Ok(()))?;
    Ok(out.pop().expect("one sample requested"))
}

/// Integrates through the increasing `times`, returning ρ at each of them.
///
/// `observer(t, ρ)` runs after every accepted step; an error from it aborts the run.
pub fn evolve_sampled<O>(
    rho0: &FockDensityMatrix,
    params: &SystemParams,
    times: &[f64],
    opts: EvolveOptions,
    mut observer: O,
) -> Result<Vec<FockDensityMatrix>>
where
    O: FnMut(f64, &DMatrix<Complex64>) -> Result<()>,
{
    params.validate()?;
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidParams(format!("tol must be > 0, got {}", opts.tol)));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParams("sample times must be finite, non-negative and increasing".into()));
    }
    let cutoffs = rho0.cutoffs;
    let generator = MasterEquation::new(params, cutoffs);
    let ode_opts = OdeOptions {
        tol: opts.tol,
        max_steps: opts.max_steps,
        ..OdeOptions::default()
    };
    let mut ws = generator.workspace();
    let rhs = |_, rho: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>| generator.apply_into(rho, out, &mut ws);
    let mut solver = Dopri5::new(rhs, 0.0, rho0.entries.clone(), ode_opts);
    let limit = opts.leakage_limit;
    let mut guarded = |t: f64, rho: &DMatrix<Complex64>| {
        let leak = boundary_population(cutoffs, rho);
        if leak > limit {
            return Err(Error::TruncationTooSmall {
                what: "boundary population",
                value: leak,
                limit,
            });
        }
        observer(t, rho)
    };
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        solver.advance_to(t, &mut guarded)?;
        out.push(FockDensityMatrix {
            cutoffs,
            entries: solver.state().clone(),
        });
    }
    Ok(out)
}

/// Solution of `d/dt(⟨a⟩, ⟨b⟩) = −iH(⟨a⟩, ⟨b⟩) + (ℰ, 0)` from the vacuum.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanTrajectory {
    pub times: Vec<f64>,
    pub means: Vec<(Complex64, Complex64)>,
}

/// Mean fields at `t` from `(0, 0)`, via the exponential of the augmented
/// generator `[[−iH, e], [0, 0]]` (valid at exceptional points and for unstable `H`).
pub fn mean_fields_at(params: &SystemParams, t: f64) -> (Complex64, Complex64) {
    let m = drift_matrix(&build_hamiltonian(params));
    let z = Complex64::new(0.0, 0.0);
    let aug = Matrix3::new(
        m[(0, 0)], m[(0, 1)], params.drive,
        m[(1, 0)], m[(1, 1)], z,
        z, z, z,
    ) * Complex64::new(t, 0.0);
    let e = aug.exp();
    (e[(0, 2)], e[(1, 2)])
}

/// `steps` equally spaced samples on `[0, t_end]`.
pub fn evolve_means(params: &SystemParams, t_end: f64, steps: usize) -> Result<MeanTrajectory> {
    if !(t_end > 0.0 && t_end.is_finite()) || steps < 2 {
        return Err(Error::InvalidParams(format!(
            "need t_end > 0 and steps >= 2, got t_end = {t_end}, steps = {steps}"
        )));
    }
    let times: Vec<f64> = (0..steps)
        .map(|k| t_end * k as f64 / (steps - 1) as f64)
        .collect();
    let means = times.iter().map(|&t| mean_fields_at(params, t)).collect();
    Ok(MeanTrajectory { times, means })
}

/// `⟨α, β|ρ|α, β⟩` with the renormalized truncated coherent state.
pub fn fidelity_with_coherent(rho: &FockDensityMatrix, alpha: Complex64, beta: Complex64) -> Result<f64> {
    let psi = coherent_state(alpha, beta, rho.cutoffs)?;
    Ok(quadratic_form(&rho.entries, &psi).re.clamp(0.0, 1.0))
}

fn quadratic_form(m: &DMatrix<Complex64>, v: &nalgebra::DVector<Complex64>) -> Complex64 {
    (v.adjoint() * m * v)[(0, 0)]
}

/// `max(‖(a − α)ρ‖_F, ‖(b − β)ρ‖_F)`; zero for `ρ = |α, β⟩⟨α, β|`.
pub fn annihilation_residual(rho: &FockDensityMatrix, alpha: Complex64, beta: Complex64) -> f64 {
    let displaced_norm = |op: SparseOp, shift: Complex64| {
        let mut r = op.mul_left(&rho.entries);
        r -= &rho.entries * shift;
        r.norm()
    };
    displaced_norm(SparseOp::annihilate_a(rho.cutoffs), alpha)
        .max(displaced_norm(SparseOp::annihilate_b(rho.cutoffs), beta))
}

/// Husimi function `Q(μ, ν) = ⟨μ, ν|ρ|μ, ν⟩/π²`.
///
/// Uses the exact projection of `|μ, ν⟩` onto the truncated space, so the
/// phase-space integral of `Q` equals `Tr ρ`. Fails if `ρ` itself is not
/// contained in the truncated space (edge population above [`LEAKAGE_LIMIT`]).
pub fn husimi_q(rho: &FockDensityMatrix, mu: Complex64, nu: Complex64) -> Result<f64> {
    let leak = rho.boundary_population();
    if leak > LEAKAGE_LIMIT {
        return Err(Error::TruncationTooSmall {
            what: "boundary population",
            value: leak,
            limit: LEAKAGE_LIMIT,
        });
    }
    let v = coherent_projection(mu, nu, rho.cutoffs);
    Ok(quadratic_form(&rho.entries, &v).re / (PI * PI))
}

/// Default cutoffs for simulating `params`: the coherent-state rule at the
/// steady amplitudes.
pub fn default_cutoffs(params: &SystemParams) -> Result<Cutoffs> {
    let x = crate::steady::steady_state(params)?;
    Ok(Cutoffs::for_amplitudes(x.alpha0, x.beta0))
}
