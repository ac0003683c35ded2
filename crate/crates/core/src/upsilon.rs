//! The potential integral `Υ(β) = (1/2π) ∫ dξ / (β + 2ReΨ(ξ))` and its
//! generalized inverse.
//!
//! Υ is strictly positive, strictly decreasing where finite, vanishes as
//! β → ∞, and `Υ(β) < ∞` for some β iff for all β iff the symmetrized
//! process has local times. Infinity is a first-class value here, not an
//! error: transient and no-local-time regimes legitimately produce it and
//! the bound calculators consume it.
//!
//! For the stable symbol `κ|ξ|^α` with α > 1 the integral is exact:
//!
//! ```text
//! Υ(β) = ν κ^{−1/α} β^{−1+1/α},   ν = csc(π/α) / (2^{1/α} α),
//! ```
//!
//! which follows from `∫₀^∞ dx/(1+x^α) = (π/α)csc(π/α)`. (The cosecant is
//! forced: at α = 2 it gives ν = 2^{−3/2}, matching direct evaluation of
//! `(1/π)∫₀^∞ dξ/(β+2κξ²)`; a secant would be singular there.) Everything
//! else goes through adaptive quadrature with an exact change of variable
//! on the algebraic tail.

use std::f64::consts::PI;

use crate::error::{CoreError, Result};
use crate::levy::{CheckedSymbol, LevySymbol, Recurrence};
use crate::quad;

/// The scale constant of the stable closed form, `ν = csc(π/α)/(2^{1/α}α)`.
pub fn stable_nu(alpha: f64) -> f64 {
    1.0 / ((PI / alpha).sin() * 2.0f64.powf(1.0 / alpha) * alpha)
}

/// Evaluator for Υ and Υ⁻¹ attached to one symbol.
#[derive(Debug, Clone)]
pub struct UpsilonEvaluator {
    sym: LevySymbol,
    /// Relative tolerance for the quadrature fallback.
    pub quad_rel_tol: f64,
    /// ξ beyond which the tail change of variable takes over.
    pub tail_split: f64,
}

impl UpsilonEvaluator {
    pub fn new(sym: LevySymbol) -> Self {
        UpsilonEvaluator {
            sym,
            quad_rel_tol: 1e-9,
            tail_split: 10.0,
        }
    }

    pub fn symbol(&self) -> &LevySymbol {
        &self.sym
    }

    /// Υ(β) for β > 0. Returns `f64::INFINITY` when the symmetrized process
    /// has no local times.
    pub fn eval(&self, beta: f64) -> Result<f64> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(CoreError::domain(format!(
                "upsilon requires beta > 0, got {beta}"
            )));
        }
        if !self.sym.has_local_times() {
            return Ok(f64::INFINITY);
        }
        match &self.sym {
            LevySymbol::BrownianScaled { kappa } => Ok(stable_closed_form(*kappa, 2.0, beta)),
            LevySymbol::StableSym { kappa, alpha } => Ok(stable_closed_form(*kappa, *alpha, beta)),
            _ => self.eval_by_quadrature(beta),
        }
    }

    fn eval_by_quadrature(&self, beta: f64) -> Result<f64> {
        let a_max = self.sym.large_xi_exponent();
        let checked = CheckedSymbol::new(&self.sym);
        let f = |xi: f64| 1.0 / (beta + 2.0 * checked.re_psi(xi));
        let q = checked.resolve(quad::half_line_algebraic_tail(
            f,
            self.tail_split,
            a_max,
            self.quad_rel_tol,
            "upsilon",
        ))?;
        Ok(q.value / PI)
    }

    /// `Υ⁻¹(t) = sup{β > 0 : Υ(β) > t}`, with `sup ∅ = 0`.
    pub fn inverse(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(CoreError::domain(format!(
                "upsilon inverse requires t > 0, got {t}"
            )));
        }
        if !self.sym.has_local_times() {
            return Err(CoreError::domain(
                "upsilon is identically infinite (no local times); the inverse is undefined"
                    .to_string(),
            ));
        }
        match &self.sym {
            LevySymbol::BrownianScaled { kappa } => Ok(stable_inverse(*kappa, 2.0, t)),
            LevySymbol::StableSym { kappa, alpha } => Ok(stable_inverse(*kappa, *alpha, t)),
            _ => {
                // Saturation: a transient symbol has sup Υ < ∞ and the
                // level t may never be exceeded.
                let sup = self.sup()?;
                if sup <= t {
                    return Ok(0.0);
                }
                self.invert_by_bisection(t)
            }
        }
    }

    fn invert_by_bisection(&self, t: f64) -> Result<f64> {
        const MAX_EXPAND: usize = 200;

        // Expand a bracket [lo, hi] with Υ(lo) > t ≥ Υ(hi) geometrically
        // from β = 1.
        let mut lo = 1.0f64;
        let mut hi = 1.0f64;
        if self.eval(1.0)? > t {
            for _ in 0..MAX_EXPAND {
                hi *= 2.0;
                if self.eval(hi)? <= t {
                    break;
                }
                lo = hi;
            }
        } else {
            for _ in 0..MAX_EXPAND {
                lo *= 0.5;
                if self.eval(lo)? > t {
                    break;
                }
                hi = lo;
            }
            if self.eval(lo)? <= t {
                // Υ never exceeds t on the searched range: generalized
                // inverse is 0 by the sup ∅ convention.
                return Ok(0.0);
            }
        }

        for _ in 0..200 {
            if hi - lo <= 1e-13 * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.eval(mid)? > t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `lim_{β↓0} Υ(β) = sup_{β>0} Υ(β)`: infinite exactly when the
    /// symmetrized process is recurrent, a finite limit when transient.
    pub fn sup(&self) -> Result<f64> {
        if self.sym.classify_recurrence()? == Recurrence::Recurrent {
            return Ok(f64::INFINITY);
        }
        if !self.sym.has_local_times() {
            return Ok(f64::INFINITY);
        }
        // Transient with local times: Υ(0) is a convergent integral with an
        // integrable ξ^{−a_min} singularity at 0 and a ξ^{−a_max} tail.
        let a_min = self.sym.small_xi_exponent()?;
        let a_max = self.sym.large_xi_exponent();
        let checked = CheckedSymbol::new(&self.sym);
        let f = |xi: f64| 1.0 / (2.0 * checked.re_psi(xi));
        let head = quad::head_singular(&f, 1.0, a_min, self.quad_rel_tol, "upsilon sup head");
        let head = checked.resolve(head)?;
        let mid = checked.resolve(quad::adaptive(
            &f,
            1.0,
            self.tail_split.max(2.0),
            self.quad_rel_tol,
            f64::MIN_POSITIVE,
            "upsilon sup mid",
        ))?;
        let tail = checked.resolve(quad::tail_algebraic(
            &f,
            self.tail_split.max(2.0),
            a_max,
            self.quad_rel_tol,
            "upsilon sup tail",
        ))?;
        Ok((head.value + mid.value + tail.value) / PI)
    }
}

fn stable_closed_form(kappa: f64, alpha: f64, beta: f64) -> f64 {
    stable_nu(alpha) * kappa.powf(-1.0 / alpha) * beta.powf(-1.0 + 1.0 / alpha)
}

fn stable_inverse(kappa: f64, alpha: f64, t: f64) -> f64 {
    // Solve ν κ^{−1/α} β^{−1+1/α} = t.
    (stable_nu(alpha) / (kappa.powf(1.0 / alpha) * t)).powf(alpha / (alpha - 1.0))
}
