//! Acceptance suite: the laboratory's verification contract, one test per
//! criterion with pinned tolerances. Each test prints a single
//! `acceptance NN <name>: PASS/FAIL` line (visible with `--nocapture`).
//!
//! Run with: `cargo test -p intermit-core --test acceptance -- --nocapture`

use std::time::Instant;

use intermit_core::bounds::{
    self, exact_anderson_gamma, gamma2_lower_bound, gamma_p_upper_bound, ratio_check, InitialData,
    ModelSpec, Sigma,
};
use intermit_core::hermite::largest_hermite_zero;
use intermit_core::levy::LevySymbol;
use intermit_core::renewal::{laplace_fixed_point, solve_second_moment, VolterraProblem};
use intermit_core::simulator::{
    holder_estimate, picard_diagnostic, run_ensemble, Direction, GridSpec, HolderOptions,
    PicardOptions, SimOptions,
};
use intermit_core::upsilon::{stable_nu, UpsilonEvaluator};

fn conclude(name: &str, violations: Vec<String>) {
    if violations.is_empty() {
        println!("acceptance {name}: PASS");
    } else {
        println!("acceptance {name}: FAIL");
        panic!("{}", violations.join("\n"));
    }
}

#[test]
fn c01_upsilon_closed_form_vs_quadrature() {
    let start = Instant::now();
    let mut violations = Vec::new();
    for &alpha in &[1.25, 1.5, 1.75, 2.0] {
        for &kappa in &[0.5, 1.0, 3.0] {
            let closed = UpsilonEvaluator::new(LevySymbol::stable(kappa, alpha).unwrap());
            // Single-term mixture takes the quadrature path.
            let quad =
                UpsilonEvaluator::new(LevySymbol::sum_stable(vec![(kappa, alpha)]).unwrap());
            for &beta in &[0.1, 1.0, 10.0] {
                let a = closed.eval(beta).unwrap();
                let b = quad.eval(beta).unwrap();
                let rel = ((a - b) / a).abs();
                if rel > 1e-6 {
                    violations.push(format!(
                        "alpha={alpha} kappa={kappa} beta={beta}: rel error {rel:.2e}"
                    ));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() > 1.0 {
        violations.push(format!("runtime {elapsed:?} exceeds 1 s"));
    }
    conclude("01 upsilon-closed-form-vs-quadrature", violations);
}

#[test]
fn c02_hermite_constants() {
    let start = Instant::now();
    let mut violations = Vec::new();

    let z2 = largest_hermite_zero(2).unwrap();
    if (z2 - 1.0).abs() > 1e-12 {
        violations.push(format!("z_2 = {z2}, expected 1 within 1e-12"));
    }
    let z4 = largest_hermite_zero(4).unwrap();
    let z4_exact = (3.0f64 + 6.0f64.sqrt()).sqrt();
    if (z4 - z4_exact).abs() > 1e-12 {
        violations.push(format!("z_4 = {z4}, expected {z4_exact} within 1e-12"));
    }

    let mut prev_ratio = 0.0;
    for p in (2..=200).step_by(2) {
        let z = largest_hermite_zero(p).unwrap();
        let cap = 2.0 * (p as f64).sqrt();
        if z > cap {
            violations.push(format!("z_{p} = {z} exceeds 2*sqrt(p) = {cap}"));
        }
        let ratio = z / cap;
        if ratio <= prev_ratio {
            violations.push(format!("ratio z_p/(2 sqrt p) not increasing at p = {p}"));
        }
        prev_ratio = ratio;
    }

    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() > 1.0 {
        violations.push(format!("runtime {elapsed:?} exceeds 1 s"));
    }
    conclude("02 hermite-constants", violations);
}

#[test]
fn c03_pinch_at_p_two() {
    let mut violations = Vec::new();
    for &alpha in &[1.25, 1.5, 2.0] {
        for &lambda in &[0.5, 1.0, 2.0] {
            for &kappa in &[0.5, 1.0] {
                // Upper bound through the closed form, lower bound through
                // the quadrature + bisection route: the pinch is a genuine
                // two-route identity.
                let closed = ModelSpec::new(
                    LevySymbol::stable(kappa, alpha).unwrap(),
                    Sigma::linear(lambda).unwrap(),
                    InitialData::constant(1.0).unwrap(),
                );
                let quad = ModelSpec::new(
                    LevySymbol::sum_stable(vec![(kappa, alpha)]).unwrap(),
                    Sigma::linear(lambda).unwrap(),
                    InitialData::constant(1.0).unwrap(),
                );
                let upper = gamma_p_upper_bound(&closed, 2).unwrap();
                let lower = gamma2_lower_bound(&quad).unwrap().value;
                let rel = ((upper - lower) / upper).abs();
                if rel > 1e-6 {
                    violations.push(format!(
                        "alpha={alpha} lambda={lambda} kappa={kappa}: pinch rel error {rel:.2e}"
                    ));
                }
                if alpha == 2.0 {
                    let exact = lambda.powi(4) / (8.0 * kappa);
                    for (side, v) in [("upper", upper), ("lower", lower)] {
                        let rel = ((v - exact) / exact).abs();
                        if rel > 1e-8 {
                            violations.push(format!(
                                "alpha=2 lambda={lambda} kappa={kappa}: {side} {v} vs lambda^4/(8 kappa) = {exact} (rel {rel:.2e})"
                            ));
                        }
                    }
                }
            }
        }
    }
    conclude("03 pinch-at-p-two", violations);
}

#[test]
fn c04_p_gamma_closed_form_and_ratio() {
    let mut violations = Vec::new();
    for &alpha in &[1.25, 1.5, 2.0] {
        for &lambda in &[0.5, 1.0, 2.0] {
            for &kappa in &[0.5, 1.0] {
                let m = ModelSpec::new(
                    LevySymbol::stable(kappa, alpha).unwrap(),
                    Sigma::linear(lambda).unwrap(),
                    InitialData::constant(1.0).unwrap(),
                );
                for &p in &[2usize, 4, 6] {
                    let z = largest_hermite_zero(p).unwrap();
                    let nu = stable_nu(alpha);
                    let reference = 0.5
                        * p as f64
                        * (nu.powf(alpha) * (z * lambda).powf(2.0 * alpha) / kappa)
                            .powf(1.0 / (alpha - 1.0));
                    let got = gamma_p_upper_bound(&m, p).unwrap();
                    let rel = ((got - reference) / reference).abs();
                    if rel > 1e-6 {
                        violations.push(format!(
                            "alpha={alpha} lambda={lambda} kappa={kappa} p={p}: rel error {rel:.2e}"
                        ));
                    }
                }
            }
        }
    }

    for p in (2..=100).step_by(2) {
        match ratio_check(p, 1.3, 0.7) {
            Ok((_, ratio)) => {
                if p == 2 || p == 4 {
                    let upper = 48.0 * (1.0 + 1.0 / ((p * p - 1) as f64));
                    if ((ratio - upper) / upper).abs() > 1e-12 {
                        violations.push(format!(
                            "p={p}: ratio {ratio} does not attain the upper bound {upper}"
                        ));
                    }
                }
            }
            Err(e) => violations.push(format!("ratio_check failed at p={p}: {e}")),
        }
    }
    conclude("04 p-gamma-closed-form-and-ratio", violations);
}

#[test]
fn c05_renewal_oracle_gamma2() {
    let start = Instant::now();
    let mut violations = Vec::new();

    let prob = VolterraProblem::new(
        LevySymbol::stable(1.0, 2.0).unwrap(),
        1.0,
        1.0,
        120.0,
        0.02,
    )
    .unwrap();
    let slope = solve_second_moment(&prob).unwrap().fitted.unwrap().slope;
    let rel = ((slope - 0.125) / 0.125).abs();
    if rel > 0.01 {
        violations.push(format!("fitted slope {slope} off 0.125 by {rel:.4}"));
    }

    let halved = VolterraProblem::new(
        LevySymbol::stable(1.0, 2.0).unwrap(),
        1.0,
        1.0,
        120.0,
        0.01,
    )
    .unwrap();
    let slope_fine = solve_second_moment(&halved).unwrap().fitted.unwrap().slope;
    let shift = ((slope - slope_fine) / slope_fine).abs();
    if shift > 0.0025 {
        violations.push(format!(
            "mesh halving moved the slope by {shift:.5} ({slope} -> {slope_fine})"
        ));
    }

    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() > 30.0 {
        violations.push(format!("runtime {elapsed:?} exceeds 30 s"));
    }
    conclude("05 renewal-oracle-gamma2", violations);
}

#[test]
fn c06_laplace_divergence_threshold() {
    let mut violations = Vec::new();
    // One (alpha, lambda) pair from each recurrent row of the criterion-3
    // grid; the transform side goes through quadrature, the target through
    // the closed-form inverse.
    for &(alpha, lambda) in &[(1.25, 0.5), (1.5, 1.0), (2.0, 2.0)] {
        let target = UpsilonEvaluator::new(LevySymbol::stable(1.0, alpha).unwrap())
            .inverse(1.0 / (lambda * lambda))
            .unwrap();
        let prob = VolterraProblem::new(
            LevySymbol::sum_stable(vec![(1.0, alpha)]).unwrap(),
            lambda,
            1.0,
            1.0,
            0.1,
        )
        .unwrap();
        let mut lo = target / 8.0;
        let mut hi = target * 8.0;
        if !laplace_fixed_point(&prob, lo).unwrap().is_infinite()
            || laplace_fixed_point(&prob, hi).unwrap().is_infinite()
        {
            violations.push(format!("alpha={alpha}: flip bracket invalid"));
            continue;
        }
        for _ in 0..200 {
            if hi - lo <= 1e-9 * hi.max(1e-9) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if laplace_fixed_point(&prob, mid).unwrap().is_infinite() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let flip = 0.5 * (lo + hi);
        if (flip - target).abs() > 1e-6 {
            violations.push(format!(
                "alpha={alpha} lambda={lambda}: flip at {flip}, inverse {target}, |diff| = {:.2e}",
                (flip - target).abs()
            ));
        }
    }
    conclude("06 laplace-divergence-threshold", violations);
}

#[test]
fn c07_monte_carlo_consistency() {
    let start = Instant::now();
    let mut violations = Vec::new();

    let model = ModelSpec::new(
        LevySymbol::brownian(1.0).unwrap(),
        Sigma::linear(1.0).unwrap(),
        InitialData::constant(1.0).unwrap(),
    );
    let seed = 20260811;
    let fine_grid = GridSpec {
        length: 64.0,
        points: 512,
        dt: 0.01,
        t_max: 40.0,
        ensemble: 2000,
        seed,
    };
    let coarse_grid = GridSpec {
        length: 64.0,
        points: 256,
        dt: 0.02,
        t_max: 40.0,
        ensemble: 2000,
        seed,
    };
    // The fit window ends at t = 16: near t = 20 the p = 2 path ensemble
    // itself starts crossing into tail domination (top 1% above half the
    // moment), where the tool must refuse a fit rather than produce one.
    let fine_opts = SimOptions {
        record_every: 100,
        fit_window: Some((6.0, 16.0)),
        zero_noise: false,
    };
    let coarse_opts = SimOptions {
        record_every: 50,
        ..fine_opts.clone()
    };

    let fine = run_ensemble(&fine_grid, &model, &[2, 4], &fine_opts).unwrap();
    let coarse = run_ensemble(&coarse_grid, &model, &[2], &coarse_opts).unwrap();

    // Deterministic renewal oracle on the fine mesh.
    let prob = VolterraProblem::new(LevySymbol::brownian(1.0).unwrap(), 1.0, 1.0, 40.0, 0.01)
        .unwrap();
    let renewal = solve_second_moment(&prob).unwrap();

    let mc2 = &fine.curves[0];
    let mc2_coarse = &coarse.curves[0];
    assert_eq!(mc2.times, mc2_coarse.times, "record grids must align");

    // Grid bias by Richardson between the two resolutions. The scheme's
    // leading error is O(√dt) with the structure level + rate·t on the log
    // curve, so ln(m_fine/m_coarse) is fitted with that two-parameter model
    // (pointwise differencing would be dominated by the two runs' sampling
    // noise) and scaled by 1/(√2 − 1); the fit's own pointwise uncertainty
    // is added on top. The moment estimator is heavily right-skewed, so
    // agreement is tested on the log scale with delta-method standard
    // errors — identical to the linear test at small noise.
    let n_cmp = mc2
        .times
        .iter()
        .take_while(|&&t| t <= 20.0)
        .count();
    let (bias_level, bias_slope, fit_se) = {
        let xs: Vec<f64> = mc2.times[1..n_cmp].to_vec();
        let ys: Vec<f64> = (1..n_cmp)
            .map(|i| (mc2.moments[i] / mc2_coarse.moments[i]).ln())
            .collect();
        let n = xs.len() as f64;
        let xbar = xs.iter().sum::<f64>() / n;
        let ybar = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
        let b = sxy / sxx;
        let a = ybar - b * xbar;
        let ssr: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - a - b * x).powi(2))
            .sum();
        let sigma = (ssr / (n - 2.0)).sqrt();
        (a, b, move |t: f64| {
            sigma * (1.0 / n + (t - xbar).powi(2) / sxx).sqrt()
        })
    };

    for (i, &t) in mc2.times.iter().enumerate().take(n_cmp) {
        if i == 0 {
            continue;
        }
        let ren_idx = (t / 0.01).round() as usize;
        let reference = renewal.moments[ren_idx];
        let se_log = mc2.stderr[i] / mc2.moments[i];
        let bias_log =
            ((bias_level + bias_slope * t).abs() + 2.0 * fit_se(t)) / (2f64.sqrt() - 1.0);
        let tol = 3.0 * se_log + bias_log;
        let diff = (mc2.moments[i] / reference).ln().abs();
        if diff > tol {
            violations.push(format!(
                "t={t}: |ln(mc/renewal)| = {diff:.4} exceeds 3se+bias = {tol:.4} (mc {}, renewal {reference})",
                mc2.moments[i]
            ));
        }
    }

    match mc2.fitted {
        Some(f) => {
            if ((f.slope - 0.125) / 0.125).abs() > 0.30 {
                violations.push(format!("fitted p=2 slope {} off 0.125 by >30%", f.slope));
            }
        }
        None => violations.push("p=2 slope fit missing".to_string()),
    }

    // The p = 4 moment is tail-dominated at this scale: the tool must
    // report the tail-share diagnostic and the Jensen ordering pointwise
    // rather than attempting the exact fourth-moment exponent.
    if !fine
        .diagnostics
        .tail_fraction
        .iter()
        .any(|&(p, frac)| p == 4 && frac > 0.0)
    {
        violations.push("missing p=4 tail-fraction diagnostic".to_string());
    }
    let mc4 = &fine.curves[1];
    for i in 0..mc2.times.len() {
        if mc4.moments[i] < mc2.moments[i].powi(2) * (1.0 - 1e-12) {
            violations.push(format!(
                "Jensen ordering violated at t={}: E4 {} < (E2)^2 {}",
                mc2.times[i],
                mc4.moments[i],
                mc2.moments[i].powi(2)
            ));
        }
    }

    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() > 600.0 {
        violations.push(format!("runtime {elapsed:?} exceeds 10 min"));
    }
    conclude("07 monte-carlo-consistency", violations);
}

#[test]
fn c08_subdiffusive_regime() {
    let mut violations = Vec::new();

    // Bounded sigma (capped at 1), diffusive generator: second moments grow
    // like sqrt(t), so E2/sqrt(t) must be trendless and E2/t decreasing.
    let model = ModelSpec::new(
        LevySymbol::brownian(1.0).unwrap(),
        Sigma::clipped(1.0, 1.0).unwrap(),
        InitialData::constant(0.0).unwrap(),
    );
    let grid = GridSpec {
        length: 128.0,
        points: 512,
        dt: 0.02,
        t_max: 40.0,
        ensemble: 400,
        seed: 515151,
    };
    let opts = SimOptions {
        record_every: 25,
        fit_window: None,
        zero_noise: false,
    };
    let result = run_ensemble(&grid, &model, &[2], &opts).unwrap();
    let curve = &result.curves[0];

    let mut log_t = Vec::new();
    let mut log_ratio = Vec::new();
    // A strict pointwise decrease between adjacent records (0.9% expected
    // step against ~1.5% ensemble noise) is not a meaningful test of a
    // noisy estimate; monotonicity is checked along geometrically spaced
    // times where the expected decrease dominates the noise.
    let mut last_kept: Option<(f64, f64)> = None;
    for (i, &t) in curve.times.iter().enumerate() {
        if t < 10.0 {
            continue;
        }
        log_t.push(t.ln());
        log_ratio.push((curve.moments[i] / t.sqrt()).ln());
        let per_t = curve.moments[i] / t;
        match last_kept {
            Some((t0, v0)) if t >= 1.4 * t0 => {
                if per_t >= v0 {
                    violations.push(format!("E2/t not decreasing from t={t0} to t={t}"));
                }
                last_kept = Some((t, per_t));
            }
            None => last_kept = Some((t, per_t)),
            _ => {}
        }
    }
    let n = log_t.len() as f64;
    let xbar = log_t.iter().sum::<f64>() / n;
    let ybar = log_ratio.iter().sum::<f64>() / n;
    let sxx: f64 = log_t.iter().map(|x| (x - xbar).powi(2)).sum();
    let sxy: f64 = log_t
        .iter()
        .zip(&log_ratio)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let trend = sxy / sxx;
    if trend.abs() >= 0.05 {
        violations.push(format!(
            "log-log trend of E2/sqrt(t) is {trend:.4}, |.| must be < 0.05"
        ));
    }
    conclude("08 subdiffusive-regime", violations);
}

#[test]
fn c09_picard_contraction() {
    let mut violations = Vec::new();

    // lambda = 0.5, p = 2: the condition z_p^2 Lip^2 Upsilon(beta) = 0.25
    // pins beta = nu^2 = 1/8 (Upsilon(beta) = 1); contraction constant 0.5.
    let model = ModelSpec::new(
        LevySymbol::brownian(1.0).unwrap(),
        Sigma::linear(0.5).unwrap(),
        InitialData::constant(1.0).unwrap(),
    );
    let beta = 0.125;
    let grid = GridSpec {
        length: 32.0,
        points: 128,
        dt: 0.02,
        t_max: 12.0,
        ensemble: 1,
        seed: 7777,
    };
    let diag = picard_diagnostic(
        &grid,
        &model,
        beta,
        2,
        7,
        &PicardOptions {
            members: 256,
            batches: 8,
        },
    )
    .unwrap();

    if (diag.condition - 0.25).abs() > 1e-10 {
        violations.push(format!(
            "contraction condition {} is not the pinned 0.25",
            diag.condition
        ));
    }
    // Gap ratios for iterations 2..=6 stay below 0.5 + 3 se.
    for n in 2..=6usize {
        let r = diag.ratios[n - 1];
        let se = diag.ratio_stderr[n - 1].max(0.0);
        if !(r <= 0.5 + 3.0 * se) {
            violations.push(format!(
                "iteration {n}: gap ratio {r:.4} exceeds 0.5 + 3se = {:.4}",
                0.5 + 3.0 * se
            ));
        }
    }
    conclude("09 picard-contraction", violations);
}

#[test]
fn c10_holder_exponents() {
    let mut violations = Vec::new();

    let model = ModelSpec::new(
        LevySymbol::brownian(1.0).unwrap(),
        Sigma::linear(1.0).unwrap(),
        InitialData::constant(1.0).unwrap(),
    );
    let grid = GridSpec {
        length: 64.0,
        points: 512,
        dt: 0.01,
        t_max: 12.0,
        ensemble: 1,
        seed: 90210,
    };
    let opts = HolderOptions {
        burn_in: 5.0,
        members: 48,
        snapshots: 4,
        snapshot_gap: 0.5,
        spatial_lags: vec![4, 8, 16],
        temporal_lag_steps: vec![4, 8, 16, 32],
        temporal_window: 3.2,
        probes: 8,
    };

    let (h_space, se_space) = holder_estimate(&grid, &model, Direction::Space, &opts).unwrap();
    if (h_space - 0.5).abs() > 0.1 {
        violations.push(format!(
            "spatial exponent {h_space:.4} (se {se_space:.4}) outside 0.5 +- 0.1"
        ));
    }
    let (h_time, se_time) = holder_estimate(&grid, &model, Direction::Time, &opts).unwrap();
    if (h_time - 0.25).abs() > 0.1 {
        violations.push(format!(
            "temporal exponent {h_time:.4} (se {se_time:.4}) outside 0.25 +- 0.1"
        ));
    }
    conclude("10 holder-exponents", violations);
}

// Criterion 11 (byte-identical CSV output across thread counts) lives in
// the CLI acceptance suite, next to the binary it exercises.
