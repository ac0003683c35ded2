//! The four laboratory commands: analytic bounds, classification, the
//! deterministic renewal solve, and the Monte Carlo run.

use std::path::Path;

use serde::Serialize;

use intermit_core::bounds::{
    self, ExtReal, transient_smallness_threshold,
};
use intermit_core::error::{CoreError, Result};
use intermit_core::levy::Recurrence;
use intermit_core::renewal::{laplace_fixed_point, solve_second_moment, VolterraProblem};
use intermit_core::simulator::{
    curves_to_csv, holder_estimate, run_ensemble, Direction, EnsembleDiagnostics, FittedGamma,
    MomentCurve,
};
use intermit_core::upsilon::UpsilonEvaluator;

use crate::config::{OutputFormat, RunConfig};
use crate::output::{ensure_dir, write_atomic, write_json};

const SCHEMA_VERSION: u32 = 1;

fn wants(cfg: &RunConfig, f: OutputFormat) -> bool {
    cfg.output.formats.contains(&f)
}

pub fn cmd_bounds(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let model = cfg.model()?;
    model.validate_hypotheses()?;
    if !model.sym.has_local_times() {
        return Err(CoreError::domain(
            "generator admits no solution theory (potential integral identically infinite)"
                .to_string(),
        ));
    }
    let report = bounds::full_report(
        &model,
        &cfg.bounds.p_list,
        &cfg.bounds.beta_list,
        cfg.sublinear_query(),
    );
    ensure_dir(out_dir)?;
    if wants(cfg, OutputFormat::Json) {
        write_json(&out_dir.join("bounds.json"), &report)?;
        println!("wrote {}", out_dir.join("bounds.json").display());
    }
    if wants(cfg, OutputFormat::Csv) {
        write_atomic(&out_dir.join("bounds.csv"), &report.to_csv())?;
        println!("wrote {}", out_dir.join("bounds.csv").display());
    }
    println!("verdict: {:?}", report.weakly_intermittent);
    if !report.errors.is_empty() {
        for e in &report.errors {
            eprintln!("field {}: {}", e.field, e.message);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ClassifyReport {
    schema_version: u32,
    symbol: intermit_core::levy::SymbolDescription,
    recurrence: Recurrence,
    local_times: bool,
    upsilon_sup: ExtReal,
    /// δ(p) smallness thresholds; empty unless transient.
    delta_p: Vec<bounds::PBound>,
    sublinear: Option<bounds::SublinearThreshold>,
}

pub fn cmd_classify(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let sym = cfg.symbol()?;
    let recurrence = sym.classify_recurrence()?;
    let local_times = sym.has_local_times();
    let upsilon_sup = UpsilonEvaluator::new(sym.clone()).sup()?;

    let mut delta_p = Vec::new();
    if recurrence == Recurrence::Transient && local_times {
        for &p in &cfg.bounds.p_list {
            delta_p.push(bounds::PBound {
                p,
                value: ExtReal(transient_smallness_threshold(&sym, p)?),
            });
        }
    }
    let sublinear = match cfg.sublinear_query() {
        Some(q) => Some(bounds::sublinear_sufficient_eta(
            &cfg.model()?,
            q.a_onset,
            q.q0,
            q.beta,
        )?),
        None => None,
    };

    let report = ClassifyReport {
        schema_version: SCHEMA_VERSION,
        symbol: sym.describe(),
        recurrence,
        local_times,
        upsilon_sup: ExtReal(upsilon_sup),
        delta_p,
        sublinear,
    };
    ensure_dir(out_dir)?;
    write_json(&out_dir.join("classify.json"), &report)?;
    println!("wrote {}", out_dir.join("classify.json").display());
    println!(
        "recurrence: {recurrence:?}, local times: {local_times}, sup upsilon: {}",
        if upsilon_sup.is_finite() {
            format!("{upsilon_sup}")
        } else {
            "inf".to_string()
        }
    );
    Ok(())
}

#[derive(Serialize)]
struct RenewalSummary {
    schema_version: u32,
    lambda: f64,
    eta: f64,
    step: f64,
    t_max: f64,
    fitted: Option<FittedGamma>,
    /// Mesh Laplace transform against the closed fixed point at a finite-β
    /// checkpoint: (beta, numeric, closed, relative error).
    transform_check: Option<TransformCheck>,
}

#[derive(Serialize)]
struct TransformCheck {
    beta: f64,
    numeric: f64,
    closed_form: f64,
    rel_error: f64,
    consistent: bool,
}

fn renewal_problem(cfg: &RunConfig) -> Result<VolterraProblem> {
    let sym = cfg.symbol()?;
    let sigma = cfg.sigma()?;
    let lambda = match cfg.renewal.lambda.or_else(|| sigma.as_linear()) {
        Some(l) => l,
        None => {
            return Err(CoreError::config(
                "renewal.lambda is required when sigma is not linear".to_string(),
            ))
        }
    };
    let eta = cfg.renewal.eta.unwrap_or_else(|| cfg.u0().map(|u| u.eta()).unwrap_or(0.0));
    VolterraProblem::new(sym, lambda, eta, cfg.renewal.t_max, cfg.renewal.step)
}

pub fn cmd_renewal(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let prob = renewal_problem(cfg)?;
    let curve = solve_second_moment(&prob)?;

    // Consistency of the mesh solution with the Laplace fixed point at a β
    // safely inside the finite region (λ²Υ(β) = 1/2).
    let transform_check = if prob.lambda != 0.0 && prob.sym.has_local_times() {
        let ev = UpsilonEvaluator::new(prob.sym.clone());
        let beta = ev.inverse(1.0 / (2.0 * prob.lambda * prob.lambda))?;
        if beta > 0.0 {
            let closed = laplace_fixed_point(&prob, beta)?;
            let numeric = mesh_laplace(&curve, beta);
            let rel = ((numeric - closed) / closed).abs();
            Some(TransformCheck {
                beta,
                numeric,
                closed_form: closed,
                rel_error: rel,
                consistent: rel < 0.01,
            })
        } else {
            None
        }
    } else {
        None
    };

    ensure_dir(out_dir)?;
    if wants(cfg, OutputFormat::Csv) {
        write_atomic(&out_dir.join("renewal.csv"), &curves_to_csv(std::slice::from_ref(&curve)))?;
        println!("wrote {}", out_dir.join("renewal.csv").display());
    }
    if wants(cfg, OutputFormat::Json) {
        let summary = RenewalSummary {
            schema_version: SCHEMA_VERSION,
            lambda: prob.lambda,
            eta: prob.eta,
            step: prob.step,
            t_max: prob.t_max,
            fitted: curve.fitted,
            transform_check,
        };
        write_json(&out_dir.join("renewal.json"), &summary)?;
        println!("wrote {}", out_dir.join("renewal.json").display());
    }
    if let Some(f) = curve.fitted {
        println!(
            "renewal growth rate: {:.6} +- {:.2e} over [{}, {}]",
            f.slope, f.stderr, f.window.0, f.window.1
        );
    }
    Ok(())
}

fn mesh_laplace(curve: &MomentCurve, beta: f64) -> f64 {
    let mut acc = 0.0;
    for i in 1..curve.times.len() {
        let t0 = curve.times[i - 1];
        let t1 = curve.times[i];
        acc += 0.5
            * (t1 - t0)
            * ((-beta * t0).exp() * curve.moments[i - 1] + (-beta * t1).exp() * curve.moments[i]);
    }
    acc
}

#[derive(Serialize)]
struct SimulateSummary {
    schema_version: u32,
    seed: u64,
    /// Fitted growth rate per p from the ensemble.
    fitted: Vec<(usize, Option<FittedGamma>)>,
    /// Deterministic renewal-solver growth rate for p = 2 (linear σ,
    /// constant initial data only).
    renewal_slope: Option<f64>,
    /// Analytic second-moment exponent Υ⁻¹(λ⁻²) for linear σ.
    analytic_gamma2: Option<f64>,
    /// Exact diffusive exponents p(p²−1)λ⁴/(48κ) where applicable.
    exact_gamma: Vec<(usize, f64)>,
    holder_spatial: Option<(f64, f64)>,
    holder_temporal: Option<(f64, f64)>,
    diagnostics: EnsembleDiagnostics,
}

pub fn cmd_simulate(cfg: &RunConfig, out_dir: &Path, seed: u64) -> Result<()> {
    let model = cfg.model()?;
    let grid = cfg.grid(seed)?;
    let opts = cfg.sim_options();
    for w in grid.warnings(&model) {
        eprintln!("warning: {w}");
    }

    let result = run_ensemble(&grid, &model, &cfg.bounds.p_list, &opts)?;

    // Side-by-side predictions where the theory applies.
    let lambda = model.sigma.as_linear();
    let constant_u0 = matches!(model.u0, intermit_core::bounds::InitialData::Constant { .. });
    let mut renewal_slope = None;
    let mut analytic_gamma2 = None;
    let mut exact_gamma = Vec::new();
    if let (Some(lambda), true) = (lambda, constant_u0) {
        if lambda != 0.0 && model.sym.has_local_times() {
            analytic_gamma2 = UpsilonEvaluator::new(model.sym.clone())
                .inverse(1.0 / (lambda * lambda))
                .ok();
            let prob = VolterraProblem::new(
                model.sym.clone(),
                lambda,
                model.u0.eta(),
                grid.t_max,
                grid.dt,
            )?;
            renewal_slope = solve_second_moment(&prob)
                .ok()
                .and_then(|c| c.fitted)
                .map(|f| f.slope);
            let diffusive_kappa = match model.sym {
                intermit_core::levy::LevySymbol::BrownianScaled { kappa } => Some(kappa),
                intermit_core::levy::LevySymbol::StableSym { kappa, alpha } if alpha == 2.0 => {
                    Some(kappa)
                }
                _ => None,
            };
            if let Some(kappa) = diffusive_kappa {
                for &p in &cfg.bounds.p_list {
                    if let Ok(v) = bounds::exact_anderson_gamma(p, lambda, kappa) {
                        exact_gamma.push((p, v));
                    }
                }
            }
        }
    }

    let (holder_spatial, holder_temporal) = match &cfg.simulate.holder {
        Some(h) => {
            let hopts = h.to_options();
            (
                Some(holder_estimate(&grid, &model, Direction::Space, &hopts)?),
                Some(holder_estimate(&grid, &model, Direction::Time, &hopts)?),
            )
        }
        None => (None, None),
    };

    ensure_dir(out_dir)?;
    if wants(cfg, OutputFormat::Csv) {
        write_atomic(&out_dir.join("moments.csv"), &curves_to_csv(&result.curves))?;
        println!("wrote {}", out_dir.join("moments.csv").display());
    }
    if wants(cfg, OutputFormat::Json) {
        let summary = SimulateSummary {
            schema_version: SCHEMA_VERSION,
            seed,
            fitted: result.curves.iter().map(|c| (c.p, c.fitted)).collect(),
            renewal_slope,
            analytic_gamma2,
            exact_gamma,
            holder_spatial,
            holder_temporal,
            diagnostics: result.diagnostics.clone(),
        };
        write_json(&out_dir.join("summary.json"), &summary)?;
        println!("wrote {}", out_dir.join("summary.json").display());
    }
    for c in &result.curves {
        match c.fitted {
            Some(f) => println!("p = {}: fitted rate {:.6} +- {:.2e}", c.p, f.slope, f.stderr),
            None => println!("p = {}: no rate fit", c.p),
        }
    }
    if let Some(r) = renewal_slope {
        println!("renewal p = 2 rate: {r:.6}");
    }
    if let Some(a) = analytic_gamma2 {
        println!("analytic gamma2:    {a:.6}");
    }
    Ok(())
}
