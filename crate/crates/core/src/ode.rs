//! Adaptive Dormand–Prince 5(4) integrator with PI step-size control.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// State types the integrator can advance: anything supporting linear combinations
/// and a weighted error norm.
pub trait OdeState: Clone {
    /// `out = scale·self + h·Σ cᵢ kᵢ`, reusing `out`'s storage.
    fn combine_into(&self, out: &mut Self, scale: f64, h: f64, terms: &[(f64, &Self)]);

    /// `scale·self + h·Σ cᵢ kᵢ`.
    fn combine(&self, scale: f64, h: f64, terms: &[(f64, &Self)]) -> Self {
        let mut out = self.clone();
        self.combine_into(&mut out, scale, h, terms);
        out
    }

    /// Largest `|errᵢ| / (atol + rtol·max(|y0ᵢ|, |y1ᵢ|))`.
    fn error_norm(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64;
}

impl OdeState for DMatrix<Complex64> {
    fn combine_into(&self, out: &mut Self, scale: f64, h: f64, terms: &[(f64, &Self)]) {
        if out.shape() != self.shape() {
            *out = self.clone();
        }
        let dst = out.as_mut_slice();
        for (o, x) in dst.iter_mut().zip(self.as_slice()) {
            *o = *x * scale;
        }
        for &(c, k) in terms {
            if c == 0.0 {
                continue;
            }
            let w = h * c;
            for (o, x) in dst.iter_mut().zip(k.as_slice()) {
                *o += *x * w;
            }
        }
    }

    fn error_norm(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64 {
        err.as_slice()
            .iter()
            .zip(y0.as_slice().iter().zip(y1.as_slice()))
            .map(|(e, (a, b))| e.norm() / (atol + rtol * a.norm().max(b.norm())))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    /// Absolute and relative local error tolerance per step.
    pub tol: f64,
    pub initial_step: Option<f64>,
    pub min_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            initial_step: None,
            min_step: 1e-14,
            max_step: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
/// Fifth-order weights (also the last stage row, giving FSAL).
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
/// `b − b̂`: fifth minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const PI_ALPHA: f64 = 0.7 / 5.0;
const PI_BETA: f64 = 0.4 / 5.0;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

/// Stateful stepper; keeps its step size and FSAL derivative between calls to
/// [`Dopri5::advance_to`].
pub struct Dopri5<S, F>
where
    S: OdeState,
    F: FnMut(f64, &S, &mut S),
{
    rhs: F,
    t: f64,
    y: S,
    /// Stage derivatives `k₁..k₇`; `k[0]` holds `f(t, y)`.
    k: [S; 7],
    stage: S,
    y_new: S,
    err: S,
    h: Option<f64>,
    prev_err: f64,
    opts: OdeOptions,
    pub stats: OdeStats,
}

impl<S, F> Dopri5<S, F>
where
    S: OdeState,
    F: FnMut(f64, &S, &mut S),
{
    pub fn new(mut rhs: F, t0: f64, y0: S, opts: OdeOptions) -> Self {
        let mut k1 = y0.clone();
        rhs(t0, &y0, &mut k1);
        Self {
            rhs,
            t: t0,
            k: std::array::from_fn(|_| k1.clone()),
            stage: y0.clone(),
            y_new: y0.clone(),
            err: y0.clone(),
            y: y0,
            h: opts.initial_step,
            prev_err: 1.0,
            opts,
            stats: OdeStats {
                evaluations: 1,
                ..OdeStats::default()
            },
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &S {
        &self.y
    }

    pub fn into_state(self) -> S {
        self.y
    }

    fn initial_step(&mut self, span: f64) -> f64 {
        // Hairer–Wanner starting-step heuristic.
        let tol = self.opts.tol;
        let zero_err = |x: &S| S::error_norm(x, &self.y, &self.y, tol, tol);
        let d0 = zero_err(&self.y);
        let d1 = zero_err(&self.k[0]);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let y1 = self.y.combine(1.0, h0, &[(1.0, &self.k[0])]);
        let mut f1 = y1.clone();
        (self.rhs)(self.t + h0, &y1, &mut f1);
        self.stats.evaluations += 1;
        let diff = f1.combine(1.0, -1.0, &[(1.0, &self.k[0])]);
        let d2 = zero_err(&diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 5.0)
        };
        (100.0 * h0).min(h1).min(span).min(self.opts.max_step)
    }

    /// Advances exactly to `t_target`, calling `observer(t, y)` after every accepted step.
    pub fn advance_to<O>(&mut self, t_target: f64, mut observer: O) -> Result<()>
    where
        O: FnMut(f64, &S) -> Result<()>,
    {
        let tol = self.opts.tol;
        while self.t < t_target {
            let remaining = t_target - self.t;
            let mut h = match self.h {
                Some(h) => h,
                None => self.initial_step(remaining),
            };
            h = h.min(self.opts.max_step);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            if self.stats.accepted + self.stats.rejected >= self.opts.max_steps {
                return Err(Error::StepFailure { t: self.t, step: h });
            }

            self.attempt(h);
            let err = S::error_norm(&self.err, &self.y, &self.y_new, tol, tol);

            if err <= 1.0 {
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-PI_ALPHA) * self.prev_err.powf(PI_BETA))
                        .clamp(MIN_FACTOR, MAX_FACTOR)
                };
                self.prev_err = err.max(1e-4);
                self.t = if last { t_target } else { self.t + h };
                std::mem::swap(&mut self.y, &mut self.y_new);
                self.k.swap(0, 6);
                self.stats.accepted += 1;
                // A step clipped to hit the target keeps the controller's proposal.
                if !(last && self.h.is_some_and(|prev| prev > h)) {
                    self.h = Some(h * factor);
                }
                observer(self.t, &self.y)?;
            } else {
                self.stats.rejected += 1;
                let factor = if err.is_finite() {
                    (SAFETY * err.powf(-1.0 / 5.0)).clamp(MIN_FACTOR, 1.0)
                } else {
                    MIN_FACTOR
                };
                let h_new = h * factor;
                if h_new < self.opts.min_step {
                    return Err(Error::StepFailure { t: self.t, step: h_new });
                }
                self.h = Some(h_new);
            }
        }
        Ok(())
    }

    /// One trial step: fills `y_new`, `k[6] = f(t+h, y_new)` and `err`.
    fn attempt(&mut self, h: f64) {
        let t = self.t;
        let f = &mut self.rhs;
        let (y, stage, k) = (&self.y, &mut self.stage, &mut self.k);
        let rows: [&[f64]; 5] = [&A2, &A3, &A4, &A5, &A6];
        for (i, row) in rows.iter().enumerate() {
            let (done, rest) = k.split_at_mut(i + 1);
            let terms: Vec<(f64, &S)> = row.iter().zip(done.iter()).map(|(c, ki)| (*c, ki)).collect();
            y.combine_into(stage, 1.0, h, &terms);
            f(t + C[i + 1] * h, stage, &mut rest[0]);
        }
        let terms: Vec<(f64, &S)> = B.iter().zip(k.iter()).map(|(c, ki)| (*c, ki)).collect();
        y.combine_into(&mut self.y_new, 1.0, h, &terms);
        let (done, last) = k.split_at_mut(6);
        f(t + h, &self.y_new, &mut last[0]);
        let terms: Vec<(f64, &S)> = E.iter().zip(done.iter().chain(last.iter())).map(|(c, ki)| (*c, ki)).collect();
        y.combine_into(&mut self.err, 0.0, h, &terms);
        self.stats.evaluations += 6;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(z: Complex64) -> DMatrix<Complex64> {
        DMatrix::from_element(1, 1, z)
    }

    #[test]
    fn exponential_decay_with_rotation() {
        // y' = (−0.5 + 2i) y, y(0) = 1
        let lam = Complex64::new(-0.5, 2.0);
        let mut solver = Dopri5::new(|_, y: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>| *out = y * lam, 0.0, scalar(Complex64::ONE), OdeOptions::default());
        solver.advance_to(3.0, |_, _| Ok(())).unwrap();
        let exact = (lam * 3.0).exp();
        assert!((solver.state()[(0, 0)] - exact).norm() < 1e-8);
        assert_eq!(solver.time(), 3.0);
    }

    #[test]
    fn hits_sample_times_exactly() {
        let mut solver = Dopri5::new(
            |t, _y: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>| *out = scalar(Complex64::new(t.cos(), 0.0)),
            0.0,
            scalar(Complex64::new(0.0, 0.0)),
            OdeOptions::default(),
        );
        for k in 1..=10 {
            let t = 0.37 * k as f64;
            solver.advance_to(t, |_, _| Ok(())).unwrap();
            assert_eq!(solver.time(), t);
            assert!((solver.state()[(0, 0)].re - t.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn error_shrinks_with_tolerance() {
        let run = |tol: f64| {
            let opts = OdeOptions { tol, ..OdeOptions::default() };
            let mut s = Dopri5::new(|_, y: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>| *out = y * Complex64::new(-1.0, 0.0), 0.0, scalar(Complex64::ONE), opts);
            s.advance_to(5.0, |_, _| Ok(())).unwrap();
            ((s.state()[(0, 0)].re - (-5f64).exp()).abs(), s.stats.accepted)
        };
        let (e1, n1) = run(1e-6);
        let (e2, n2) = run(1e-11);
        assert!(e2 < e1 && n2 > n1);
        assert!(e2 < 1e-11);
    }

    #[test]
    fn observer_errors_abort() {
        let mut s = Dopri5::new(|_, y: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>| *out = y.clone(), 0.0, scalar(Complex64::ONE), OdeOptions::default());
        let r = s.advance_to(1.0, |t, _| {
            if t > 0.1 {
                Err(Error::StepFailure { t, step: 0.0 })
            } else {
                Ok(())
            }
        });
        assert!(r.is_err());
    }

    #[test]
    fn step_budget_is_enforced() {
        let opts = OdeOptions { max_steps: 3, tol: 1e-12, ..OdeOptions::default() };
        let mut s = Dopri5::new(|_, y: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>| *out = y * Complex64::new(0.0, 50.0), 0.0, scalar(Complex64::ONE), opts);
        assert!(matches!(s.advance_to(10.0, |_, _| Ok(())), Err(Error::StepFailure { .. })));
    }
}
