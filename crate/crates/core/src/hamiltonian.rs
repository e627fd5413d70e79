//! Effective non-Hermitian Hamiltonian of the dissipatively coupled dimer,
//! its spectrum and anti-PT phase classification.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::params::SystemParams;

/// Default tolerance on the discriminant `|Δ² − Γ²| < tol·Γ²` for flagging an exceptional point.
pub const DEFAULT_EP_TOL: f64 = 1e-10;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// 2×2 matrix `H` generating `d/dt (a, b) = −i H (a, b) + (ℰ, 0)`.
///
/// `rate_scale` carries Γ so that tolerances can be expressed relative to it;
/// it is 1 for matrices built from raw entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveHamiltonian {
    pub matrix: Matrix2<Complex64>,
    pub rate_scale: f64,
}

impl EffectiveHamiltonian {
    pub fn from_matrix(matrix: Matrix2<Complex64>) -> Self {
        Self {
            matrix,
            rate_scale: 1.0,
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix[(0, 0)] + self.matrix[(1, 1)]
    }

    pub fn det(&self) -> Complex64 {
        self.matrix[(0, 0)] * self.matrix[(1, 1)] - self.matrix[(0, 1)] * self.matrix[(1, 0)]
    }

    /// `((H11 − H22)/2)² + H12·H21`; equals Δ² − Γ² for the unperturbed dimer.
    pub fn discriminant(&self) -> Complex64 {
        let half_diff = (self.matrix[(0, 0)] - self.matrix[(1, 1)]) * 0.5;
        half_diff * half_diff + self.matrix[(0, 1)] * self.matrix[(1, 0)]
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }
}

/// Builds `H` for the given parameters with γ = κ + Γ:
///
/// ```text
/// [[ Δ − iγ,       g − iΓ     ],
///  [ g − iΓ,   −Δ − s − iγ    ]]
/// ```
///
/// With Δ = 0 the mismatch entries reduce to `(−iγ, −s − iγ)`.
pub fn build_hamiltonian(params: &SystemParams) -> EffectiveHamiltonian {
    let gamma = params.total_damping();
    let coupling = Complex64::new(params.dispersive_g, -params.gamma_collective);
    let h11 = Complex64::new(params.delta, -gamma);
    let h22 = Complex64::new(-params.delta - params.mismatch_s, -gamma);
    EffectiveHamiltonian {
        matrix: Matrix2::new(h11, coupling, coupling, h22),
        rate_scale: params.gamma_collective,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// |Δ| > Γ: eigenvalues split in frequency, equal damping.
    Unbroken,
    /// |Δ| < Γ: eigenvalues split in damping, equal frequency.
    Broken,
    ExceptionalPoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralInfo {
    /// `(λ₊, λ₋) = tr/2 ± √disc`.
    pub eigenvalues: [Complex64; 2],
    pub phase: Phase,
    /// |λ₊ − λ₋|.
    pub splitting: f64,
}

/// Closed-form eigenvalues of the 2×2 matrix and the anti-PT phase.
pub fn spectrum(h: &EffectiveHamiltonian, ep_tol: f64) -> SpectralInfo {
    let half_trace = h.trace() * 0.5;
    let disc = h.discriminant();
    let root = disc.sqrt();
    let scale2 = h.rate_scale * h.rate_scale;
    let phase = if disc.norm() < ep_tol * scale2 {
        Phase::ExceptionalPoint
    } else if disc.re > 0.0 {
        Phase::Unbroken
    } else {
        Phase::Broken
    };
    SpectralInfo {
        eigenvalues: [half_trace + root, half_trace - root],
        phase,
        splitting: 2.0 * root.norm(),
    }
}

/// Phase of `build_hamiltonian(params)`.
pub fn classify_phase(params: &SystemParams, ep_tol: f64) -> Phase {
    spectrum(&build_hamiltonian(params), ep_tol).phase
}

/// True iff `max |σx H* σx + H| < tol`, i.e. `{PT, H} = 0` up to `tol`.
pub fn check_anti_pt(h: &EffectiveHamiltonian, tol: f64) -> bool {
    anti_pt_defect(h) < tol
}

/// Max-entry norm of `σx H* σx + H`.
pub fn anti_pt_defect(h: &EffectiveHamiltonian) -> f64 {
    let m = &h.matrix;
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let swapped = m[(1 - i, 1 - j)].conj();
            worst = worst.max((swapped + m[(i, j)]).norm());
        }
    }
    worst
}

/// Both eigenvalues strictly in the lower half plane.
pub fn is_dynamically_stable(h: &EffectiveHamiltonian) -> bool {
    max_growth_rate(h) < 0.0
}

/// max Im λ over the spectrum; negative for a decaying system.
pub fn max_growth_rate(h: &EffectiveHamiltonian) -> f64 {
    let s = spectrum(h, DEFAULT_EP_TOL);
    s.eigenvalues[0].im.max(s.eigenvalues[1].im)
}

/// `−i H`, the generator of the mean-value dynamics.
pub(crate) fn drift_matrix(h: &EffectiveHamiltonian) -> Matrix2<Complex64> {
    h.matrix * (-I)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn base(delta: f64, kappa: f64) -> SystemParams {
        SystemParams::new(delta, kappa, 1.0, Complex64::ONE).unwrap()
    }

    #[test]
    fn base_matrix_by_substitution() {
        let h = build_hamiltonian(&base(0.0, 1.0));
        assert_eq!(h.entry(0, 0), c(0.0, -2.0));
        assert_eq!(h.entry(0, 1), c(0.0, -1.0));
        assert_eq!(h.entry(1, 0), c(0.0, -1.0));
        assert_eq!(h.entry(1, 1), c(0.0, -2.0));
    }

    #[test]
    fn trace_and_det_identities() {
        let h = build_hamiltonian(&base(0.3, 1.0));
        assert!(close(h.trace(), c(0.0, -4.0), 1e-15));
        assert!(close(h.det(), c(-3.09, 0.0), 1e-14));
    }

    #[test]
    fn mismatch_diagonals() {
        let h = build_hamiltonian(&base(0.0, 1.0).with_mismatch(0.1));
        assert_eq!(h.entry(0, 0), c(0.0, -2.0));
        assert_eq!(h.entry(1, 1), c(-0.1, -2.0));
    }

    #[test]
    fn dispersive_off_diagonals() {
        let h = build_hamiltonian(&base(0.0, 1.0).with_dispersive(0.1));
        assert_eq!(h.entry(0, 1), c(0.1, -1.0));
        assert_eq!(h.entry(1, 0), c(0.1, -1.0));
    }

    #[test]
    fn unbroken_spectrum() {
        // Δ = 2, γ = 2: λ = ±√3 − 2i
        let s = spectrum(&build_hamiltonian(&base(2.0, 1.0)), DEFAULT_EP_TOL);
        let r3 = 3f64.sqrt();
        assert!(close(s.eigenvalues[0], c(r3, -2.0), 1e-14));
        assert!(close(s.eigenvalues[1], c(-r3, -2.0), 1e-14));
        assert_eq!(s.phase, Phase::Unbroken);
        assert!((s.splitting - 2.0 * r3).abs() < 1e-14);
    }

    #[test]
    fn broken_spectrum() {
        // Δ = 0.5: λ = −2i ± i√0.75
        let s = spectrum(&build_hamiltonian(&base(0.5, 1.0)), DEFAULT_EP_TOL);
        let r = 0.75f64.sqrt();
        assert!(close(s.eigenvalues[0], c(0.0, -2.0 + r), 1e-14));
        assert!(close(s.eigenvalues[1], c(0.0, -2.0 - r), 1e-14));
        assert!((s.eigenvalues[0].im + 1.1340).abs() < 1e-4);
        assert!((s.eigenvalues[1].im + 2.8660).abs() < 1e-4);
        assert_eq!(s.phase, Phase::Broken);
    }

    #[test]
    fn exceptional_point_is_degenerate() {
        for kappa in [0.0, 0.5, 3.0] {
            let p = base(1.0, kappa);
            let s = spectrum(&build_hamiltonian(&p), DEFAULT_EP_TOL);
            assert_eq!(s.phase, Phase::ExceptionalPoint);
            let gamma = p.total_damping();
            assert!(close(s.eigenvalues[0], c(0.0, -gamma), 1e-12));
            assert!(close(s.eigenvalues[1], c(0.0, -gamma), 1e-12));
            assert_eq!(classify_phase(&p.with_delta(-1.0), DEFAULT_EP_TOL), Phase::ExceptionalPoint);
        }
    }

    #[test]
    fn anti_pt_identity() {
        assert!(check_anti_pt(&build_hamiltonian(&base(0.7, 0.3)), 1e-12));
        assert!(!check_anti_pt(&build_hamiltonian(&base(0.0, 1.0).with_mismatch(0.1)), 1e-12));
        assert!(!check_anti_pt(&build_hamiltonian(&base(0.0, 1.0).with_dispersive(0.1)), 1e-12));
    }

    #[test]
    fn stability() {
        // γ = 2 > Γ
        assert!(is_dynamically_stable(&build_hamiltonian(&base(0.0, 1.0))));
        // γ = 0.5 < Γ: needs raw matrix since κ would be negative
        let raw = |delta: f64, gamma: f64| {
            EffectiveHamiltonian::from_matrix(Matrix2::new(
                c(delta, -gamma),
                c(0.0, -1.0),
                c(0.0, -1.0),
                c(-delta, -gamma),
            ))
        };
        assert!(!is_dynamically_stable(&raw(0.0, 0.5)));
        assert!((max_growth_rate(&raw(0.0, 0.5)) - 0.5).abs() < 1e-14);
        assert!(is_dynamically_stable(&raw(2.0, 0.5)));
        // κ = 0 sits exactly on the boundary at Δ = 0
        assert!(!is_dynamically_stable(&build_hamiltonian(&base(0.0, 0.0))));
    }

    #[test]
    fn phase_symmetric_in_detuning() {
        for delta in [0.0, 0.3, 0.999, 1.0, 1.2, 5.0] {
            assert_eq!(
                classify_phase(&base(delta, 0.2), DEFAULT_EP_TOL),
                classify_phase(&base(-delta, 0.2), DEFAULT_EP_TOL)
            );
        }
    }
}
