//! One exponential-Euler time step.
//!
//! The update is `u_{n+1} = E_dt[u_n + σ(u_n)·ξ·√(dt/Δx)]`: explicit Itô
//! noise injection followed by the exact Fourier-diagonal semigroup
//! multiplier `e^{−dt·ReΨ(2πk/L)}`. The deterministic part is exact for
//! every supported symbol, so the only discretization errors are the noise
//! increment and spectral truncation.
//!
//! Noise scaling: space-time white noise integrated over one cell
//! [t, t+dt] × [x, x+Δx] is Gaussian with variance dt·Δx; dividing by the
//! cell area Δx turns it into the increment of the discretized integral
//! `∫σ(u) dW/Δx` per site, hence standard normals scaled by √(dt/Δx).

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::bounds::{ModelSpec, Sigma};
use crate::error::{CoreError, Result};
use crate::simulator::{Field, GridSpec};

/// Reusable spectral stepper for one (grid, model) pair.
pub struct Stepper {
    n: usize,
    dt: f64,
    noise_scale: f64,
    multiplier: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    sigma: Sigma,
}

/// Per-worker scratch buffers; one per thread, reused across steps.
pub struct Workspace {
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl Stepper {
    pub fn new(grid: &GridSpec, model: &ModelSpec) -> Result<Self> {
        grid.validate()?;
        // Reject descriptor-only sigmas up front rather than per cell.
        model.sigma.eval(0.0)?;

        let n = grid.points;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);

        let mut multiplier = Vec::with_capacity(n);
        for k in 0..n {
            let k_signed = if k <= n / 2 {
                k as f64
            } else {
                k as f64 - n as f64
            };
            let xi = 2.0 * std::f64::consts::PI * k_signed / grid.length;
            // The inverse FFT is unnormalized; fold the 1/n in here.
            multiplier.push((-grid.dt * model.sym.re_psi(xi)?).exp() / n as f64);
        }

        Ok(Stepper {
            n,
            dt: grid.dt,
            noise_scale: (grid.dt / grid.dx()).sqrt(),
            multiplier,
            fft,
            ifft,
            sigma: model.sigma.clone(),
        })
    }

    pub fn workspace(&self) -> Workspace {
        Workspace {
            buf: vec![Complex::new(0.0, 0.0); self.n],
            scratch: vec![
                Complex::new(0.0, 0.0);
                self.fft
                    .get_inplace_scratch_len()
                    .max(self.ifft.get_inplace_scratch_len())
            ],
        }
    }

    /// Advance `values` by one step in place using the given standard-normal
    /// draws (one per cell). `step_index` only labels blow-up errors.
    pub fn step_in_place(
        &self,
        values: &mut [f64],
        noise: &[f64],
        ws: &mut Workspace,
        step_index: usize,
        path: u64,
    ) -> Result<()> {
        debug_assert_eq!(values.len(), self.n);
        debug_assert_eq!(noise.len(), self.n);

        match &self.sigma {
            Sigma::Linear { lambda } => {
                for (c, (&u, &xi)) in ws.buf.iter_mut().zip(values.iter().zip(noise)) {
                    *c = Complex::new(u + lambda * u * xi * self.noise_scale, 0.0);
                }
            }
            Sigma::Clipped { floor, cap } => {
                for (c, (&u, &xi)) in ws.buf.iter_mut().zip(values.iter().zip(noise)) {
                    let s = u.abs().clamp(*floor, *cap);
                    *c = Complex::new(u + s * xi * self.noise_scale, 0.0);
                }
            }
            Sigma::General { .. } => unreachable!("rejected in Stepper::new"),
        }

        self.fft.process_with_scratch(&mut ws.buf, &mut ws.scratch);
        for (c, &m) in ws.buf.iter_mut().zip(&self.multiplier) {
            *c *= m;
        }
        self.ifft.process_with_scratch(&mut ws.buf, &mut ws.scratch);

        let mut finite = true;
        for (u, c) in values.iter_mut().zip(&ws.buf) {
            *u = c.re;
            finite &= u.is_finite();
        }
        if !finite {
            return Err(CoreError::BlowUp {
                step: step_index,
                path,
                detail: format!(
                    "non-finite field after noise scale {:.3e}",
                    self.noise_scale
                ),
            });
        }
        Ok(())
    }

    /// `state ← E_dt[state + amplitude·ξ·√(dt/Δx)]` with a caller-supplied
    /// noise amplitude per cell (the Picard iteration injects σ of the
    /// previous iterate, not of the evolving state).
    pub fn injected_step(
        &self,
        state: &mut [f64],
        amplitude: &[f64],
        noise: &[f64],
        ws: &mut Workspace,
    ) -> Result<()> {
        debug_assert_eq!(state.len(), self.n);
        for (c, ((&u, &a), &xi)) in ws
            .buf
            .iter_mut()
            .zip(state.iter().zip(amplitude).zip(noise))
        {
            *c = Complex::new(u + a * xi * self.noise_scale, 0.0);
        }
        self.fft.process_with_scratch(&mut ws.buf, &mut ws.scratch);
        for (c, &m) in ws.buf.iter_mut().zip(&self.multiplier) {
            *c *= m;
        }
        self.ifft.process_with_scratch(&mut ws.buf, &mut ws.scratch);
        let mut finite = true;
        for (u, c) in state.iter_mut().zip(&ws.buf) {
            *u = c.re;
            finite &= u.is_finite();
        }
        if !finite {
            return Err(CoreError::BlowUp {
                step: 0,
                path: 0,
                detail: "non-finite field in injected step".to_string(),
            });
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// One-shot form of the step operation: returns the advanced field, leaving
/// the input untouched. Loops should use [`Stepper`] directly.
pub fn step(state: &Field, grid: &GridSpec, model: &ModelSpec, noise: &[f64]) -> Result<Field> {
    let stepper = Stepper::new(grid, model)?;
    let mut ws = stepper.workspace();
    let mut values = state.values.clone();
    stepper.step_in_place(&mut values, noise, &mut ws, 0, 0)?;
    Ok(Field {
        values,
        time: state.time + grid.dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::InitialData;
    use crate::levy::LevySymbol;
    use approx::assert_relative_eq;

    fn grid(n: usize) -> GridSpec {
        GridSpec {
            length: 16.0,
            points: n,
            dt: 0.05,
            t_max: 1.0,
            ensemble: 1,
            seed: 7,
        }
    }

    fn model(lambda: f64) -> ModelSpec {
        ModelSpec::new(
            LevySymbol::stable(1.0, 2.0).unwrap(),
            Sigma::linear(lambda).unwrap(),
            InitialData::constant(1.0).unwrap(),
        )
    }

    #[test]
    fn zero_noise_is_pure_semigroup() {
        let g = grid(64);
        let m = model(1.0);
        let profile: Vec<f64> = (0..64).map(|i| 1.0 + (i as f64 * 0.3).sin()).collect();
        let state = Field {
            values: profile.clone(),
            time: 0.0,
        };
        let next = step(&state, &g, &m, &vec![0.0; 64]).unwrap();

        let kernel = crate::kernel::KernelEvaluator::new(m.sym.clone());
        let expect = kernel.semigroup_apply(g.dt, &profile, g.length).unwrap();
        for (a, b) in next.values.iter().zip(&expect) {
            assert_relative_eq!(a, b, max_relative = 1e-12, epsilon = 1e-14);
        }
    }

    #[test]
    fn constant_field_stays_constant_without_noise() {
        let g = grid(32);
        let m = model(1.0);
        let state = Field {
            values: vec![2.0; 32],
            time: 0.0,
        };
        let next = step(&state, &g, &m, &vec![0.0; 32]).unwrap();
        for v in next.values {
            assert_relative_eq!(v, 2.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn single_mode_damped_exactly() {
        let g = grid(64);
        let m = model(1.0);
        let xi1 = 2.0 * std::f64::consts::PI / g.length;
        let profile: Vec<f64> = (0..64)
            .map(|i| (xi1 * i as f64 * g.length / 64.0).cos())
            .collect();
        let state = Field {
            values: profile.clone(),
            time: 0.0,
        };
        let next = step(&state, &g, &m, &vec![0.0; 64]).unwrap();
        let damp = (-g.dt * xi1 * xi1).exp();
        for (a, b) in next.values.iter().zip(&profile) {
            assert_relative_eq!(*a, damp * b, max_relative = 1e-11, epsilon = 1e-13);
        }
    }

    #[test]
    fn deterministic_given_noise() {
        let g = grid(32);
        let m = model(0.8);
        let noise: Vec<f64> = (0..32).map(|i| ((i * 37 + 11) % 7) as f64 - 3.0).collect();
        let state = Field {
            values: vec![1.0; 32],
            time: 0.0,
        };
        let a = step(&state, &g, &m, &noise).unwrap();
        let b = step(&state, &g, &m, &noise).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn blow_up_reported() {
        let mut g = grid(32);
        g.dt = 1e6; // noise scale λ·√(dt/Δx) astronomically large
        g.t_max = 2e6;
        let m = model(1e8);
        let stepper = Stepper::new(&g, &m).unwrap();
        let mut ws = stepper.workspace();
        let mut values = vec![1e300; 32];
        let noise = vec![1e8; 32];
        let r = stepper.step_in_place(&mut values, &noise, &mut ws, 5, 2);
        match r {
            Err(CoreError::BlowUp { step, path, .. }) => {
                assert_eq!(step, 5);
                assert_eq!(path, 2);
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }
}
