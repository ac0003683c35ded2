//! Empirical L²-Hölder exponents of the simulated field.
//!
//! The variogram `V(δ) = Ê|u(t, x+δ) − u(t, x)|²` (and its temporal analog)
//! follows a power law `V ~ δ^{2H}` over the scaling range; half the
//! log-log OLS slope estimates the exponent H. For the stable generator of
//! index α the predictions are `H_space = min(1/2, α−1)` and
//! `H_time = (α−1)/(2α)`.
//!
//! Fits are done per (member, snapshot) so the overall field amplitude —
//! which grows in time and varies wildly across members for intermittent
//! models — cancels inside each fit; samples are then averaged.
//!
//! The smallest usable lags sit above the discretization crossover
//! (δ ≳ Δx, τ ≳ Δx²/κ); pick lag lists accordingly or the estimate will
//! drift toward the discrete-noise exponent.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bounds::{InitialData, ModelSpec};
use crate::error::{CoreError, Result};
use crate::simulator::{ols_log_slope, rng::path_rng, GridSpec, Stepper};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Space,
    Time,
}

#[derive(Debug, Clone)]
pub struct HolderOptions {
    /// Burn-in time before any increment is sampled.
    pub burn_in: f64,
    pub members: usize,
    /// Snapshots per member (spatial direction), `snapshot_gap` apart.
    pub snapshots: usize,
    pub snapshot_gap: f64,
    /// Spatial lags in cells; dyadic by convention.
    pub spatial_lags: Vec<usize>,
    /// Temporal lags in steps.
    pub temporal_lag_steps: Vec<usize>,
    /// Length of the fine-resolution recording window (time direction).
    pub temporal_window: f64,
    /// Probe sites for the time direction.
    pub probes: usize,
}

impl Default for HolderOptions {
    fn default() -> Self {
        HolderOptions {
            burn_in: 5.0,
            members: 64,
            snapshots: 4,
            snapshot_gap: 0.5,
            spatial_lags: vec![2, 4, 8, 16],
            temporal_lag_steps: vec![4, 8, 16, 32],
            temporal_window: 2.0,
            probes: 8,
        }
    }
}

/// Estimate the L²-Hölder exponent in the requested direction:
/// returns (exponent, standard error over fit samples).
pub fn holder_estimate(
    grid: &GridSpec,
    model: &ModelSpec,
    direction: Direction,
    opts: &HolderOptions,
) -> Result<(f64, f64)> {
    grid.validate()?;
    match &model.u0 {
        InitialData::Constant { eta } if *eta > 0.0 => {}
        _ => {
            return Err(CoreError::domain(
                "holder estimation requires constant initial data with a positive level"
                    .to_string(),
            ))
        }
    }

    let samples: Vec<f64> = match direction {
        Direction::Space => spatial_samples(grid, model, opts)?,
        Direction::Time => temporal_samples(grid, model, opts)?,
    };
    if samples.len() < 2 {
        return Err(CoreError::Resolution(
            "too few variogram fits for an exponent estimate".to_string(),
        ));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

fn spatial_samples(grid: &GridSpec, model: &ModelSpec, opts: &HolderOptions) -> Result<Vec<f64>> {
    let n = grid.points;
    let lags: Vec<usize> = opts
        .spatial_lags
        .iter()
        .copied()
        .filter(|&l| l >= 1 && l < n / 2)
        .collect();
    if lags.len() < 3 {
        return Err(CoreError::Resolution(format!(
            "need at least 3 spatial lags below N/2 = {}, have {}",
            n / 2,
            lags.len()
        )));
    }
    let stepper = Stepper::new(grid, model)?;
    let burn_steps = (opts.burn_in / grid.dt).round() as usize;
    let gap_steps = ((opts.snapshot_gap / grid.dt).round() as usize).max(1);
    let dx = grid.dx();

    let per_member: Vec<Vec<f64>> = (0..opts.members as u64)
        .into_par_iter()
        .map(|member| {
            let mut rng = path_rng(grid.seed, member);
            let mut ws = stepper.workspace();
            let mut values = model.u0.sample(n, grid.length);
            let mut noise = vec![0.0f64; n];
            let mut advance = |steps: usize,
                               values: &mut Vec<f64>,
                               rng: &mut rand_chacha::ChaCha8Rng,
                               ws: &mut super::stepper::Workspace|
             -> Result<()> {
                for s in 0..steps {
                    for x in noise.iter_mut() {
                        *x = rng.sample(StandardNormal);
                    }
                    stepper.step_in_place(values, &noise, ws, s, member)?;
                }
                Ok(())
            };

            let mut fits = Vec::new();
            advance(burn_steps, &mut values, &mut rng, &mut ws)?;
            for snap in 0..opts.snapshots {
                if snap > 0 {
                    advance(gap_steps, &mut values, &mut rng, &mut ws)?;
                }
                let mut log_d = Vec::new();
                let mut v = Vec::new();
                for &lag in &lags {
                    let mut acc = 0.0;
                    for i in 0..n {
                        let d = values[(i + lag) % n] - values[i];
                        acc += d * d;
                    }
                    log_d.push((lag as f64 * dx).ln());
                    v.push(acc / n as f64);
                }
                if let Some(fit) = ols_log_slope(&log_d, &v, (f64::NEG_INFINITY, f64::INFINITY)) {
                    fits.push(fit.slope / 2.0);
                }
            }
            Ok(fits)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(per_member.into_iter().flatten().collect())
}

fn temporal_samples(grid: &GridSpec, model: &ModelSpec, opts: &HolderOptions) -> Result<Vec<f64>> {
    let n = grid.points;
    let window_steps = (opts.temporal_window / grid.dt).round() as usize;
    let lags: Vec<usize> = opts
        .temporal_lag_steps
        .iter()
        .copied()
        .filter(|&l| l >= 1 && 2 * l <= window_steps)
        .collect();
    if lags.len() < 3 {
        return Err(CoreError::Resolution(format!(
            "need at least 3 temporal lags within half the window ({} steps), have {}",
            window_steps / 2,
            lags.len()
        )));
    }
    let stepper = Stepper::new(grid, model)?;
    let burn_steps = (opts.burn_in / grid.dt).round() as usize;
    let probes = opts.probes.clamp(1, n);
    let stride = n / probes;

    let per_member: Vec<Option<f64>> = (0..opts.members as u64)
        .into_par_iter()
        .map(|member| {
            let mut rng = path_rng(grid.seed, member);
            let mut ws = stepper.workspace();
            let mut values = model.u0.sample(n, grid.length);
            let mut noise = vec![0.0f64; n];
            for s in 0..burn_steps {
                for x in noise.iter_mut() {
                    *x = rng.sample(StandardNormal);
                }
                stepper.step_in_place(&mut values, &noise, &mut ws, s, member)?;
            }
            // Fine recording of the probe sites.
            let mut series = vec![Vec::with_capacity(window_steps + 1); probes];
            for (p, s) in series.iter_mut().enumerate() {
                s.push(values[p * stride]);
            }
            for s in 0..window_steps {
                for x in noise.iter_mut() {
                    *x = rng.sample(StandardNormal);
                }
                stepper.step_in_place(&mut values, &noise, &mut ws, s, member)?;
                for (p, ser) in series.iter_mut().enumerate() {
                    ser.push(values[p * stride]);
                }
            }

            let mut taus = Vec::new();
            let mut v = Vec::new();
            for &lag in &lags {
                let mut acc = 0.0;
                let mut count = 0usize;
                for ser in &series {
                    for t in 0..=(window_steps - lag) {
                        let d = ser[t + lag] - ser[t];
                        acc += d * d;
                        count += 1;
                    }
                }
                taus.push((lag as f64 * grid.dt).ln());
                v.push(acc / count as f64);
            }
            Ok(ols_log_slope(&taus, &v, (f64::NEG_INFINITY, f64::INFINITY)).map(|f| f.slope / 2.0))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(per_member.into_iter().flatten().collect())
}
