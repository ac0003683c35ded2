//! Adaptive Gauss–Kronrod quadrature with the two changes of variable the
//! potential-theoretic integrals need.
//!
//! Every integrand in this crate is smooth away from the endpoints but
//! decays only algebraically at ∞ (like ξ^{−a} with a barely above 1) or
//! blows up algebraically at 0. Naive truncation loses digits, so:
//!
//! * [`half_line_algebraic_tail`] maps `[T, ∞)` to `(0, 1]` by
//!   `ξ = T·v^{−1/(a−1)}`, which turns a ξ^{−a} tail into a bounded
//!   integrand with no endpoint evaluation;
//! * [`head_singular`] maps a ξ^{−s} singularity at 0 (s < 1) to a bounded
//!   integrand by `ξ = u^{1/(1−s)}`.

use crate::error::{CoreError, Result};

/// Result of an adaptive integration: value and an error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
}

// 15-point Kronrod abscissae (positive half, descending) and weights, with
// the embedded 7-point Gauss weights. Standard QUADPACK constants.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_2,
    0.949_107_912_342_758_524_5,
    0.864_864_423_359_769_072_8,
    0.741_531_185_599_394_439_9,
    0.586_087_235_467_691_130_3,
    0.405_845_151_377_397_166_9,
    0.207_784_955_007_898_467_6,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_96,
    0.063_092_092_629_978_553_29,
    0.104_790_010_322_250_183_8,
    0.140_653_259_715_525_918_7,
    0.169_004_726_639_267_902_8,
    0.190_350_578_064_785_409_9,
    0.204_432_940_075_298_892_4,
    0.209_482_141_084_727_828_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_3,
    0.279_705_391_489_276_667_9,
    0.381_830_050_505_118_944_9,
    0.417_959_183_673_469_387_8,
];

/// One 15-point Kronrod panel on [a, b]: returns (value, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = f(center);
    let mut res_kronrod = f_center * WGK[7];
    let mut res_gauss = f_center * WG[3];
    let mut res_abs = res_kronrod.abs();

    let mut fv = [0.0f64; 15];
    fv[7] = f_center;
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = f1;
        fv[14 - j] = f2;
        res_kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }

    let value = res_kronrod * half;
    res_abs *= half.abs();
    res_asc *= half.abs();

    // QUADPACK error rescaling: sharpens the raw |K15 - G7| difference.
    let mut err = ((res_kronrod - res_gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

/// Adaptive integration of `f` over the finite interval [a, b] to relative
/// tolerance `rel_tol` (with an absolute floor `abs_floor` so that integrals
/// that are genuinely ~0 terminate).
pub fn adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_floor: f64,
    context: &str,
) -> Result<Quadrature> {
    const MAX_PANELS: usize = 4000;

    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            abs_error: 0.0,
        });
    }
    let (v, e) = gk15(&f, a, b);
    let mut panels = vec![Panel {
        a,
        b,
        value: v,
        err: e,
    }];

    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.err).sum();
        let target = (rel_tol * total.abs()).max(abs_floor);
        if err <= target {
            if !total.is_finite() {
                return Err(CoreError::Accuracy {
                    context: format!("{context}: non-finite integrand"),
                    requested: rel_tol,
                    achieved: f64::INFINITY,
                });
            }
            return Ok(Quadrature {
                value: total,
                abs_error: err,
            });
        }
        if panels.len() >= MAX_PANELS {
            return Err(CoreError::Accuracy {
                context: context.to_string(),
                requested: rel_tol,
                achieved: if total != 0.0 {
                    err / total.abs()
                } else {
                    err
                },
            });
        }
        // Split the worst panel.
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("non-empty panel list");
        let worst = panels.swap_remove(idx);
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval no longer splittable in f64; accept its estimate.
            panels.push(Panel {
                err: 0.0,
                ..worst
            });
            continue;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        panels.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        panels.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
    }
}

/// `∫_T^∞ f(ξ) dξ` for an integrand with `f(ξ)·ξ^a → const` as ξ → ∞,
/// a > 1. Exact change of variable ξ = T·v^{−1/(a−1)}, v ∈ (0, 1].
pub fn tail_algebraic<F: Fn(f64) -> f64>(
    f: F,
    from: f64,
    tail_exponent: f64,
    rel_tol: f64,
    context: &str,
) -> Result<Quadrature> {
    assert!(from > 0.0, "tail start must be positive");
    if tail_exponent <= 1.0 {
        return Err(CoreError::domain(format!(
            "{context}: tail exponent {tail_exponent} ≤ 1, integral diverges"
        )));
    }
    let p = 1.0 / (tail_exponent - 1.0);
    let scale = from * p;
    let g = |v: f64| {
        let xi = from * v.powf(-p);
        scale * v.powf(-p - 1.0) * f(xi)
    };
    adaptive(g, 0.0, 1.0, rel_tol, f64::MIN_POSITIVE, context)
}

/// `∫_0^a f(ξ) dξ` for an integrand with `f(ξ)·ξ^s → const` as ξ → 0,
/// 0 ≤ s < 1 (integrable singularity). Change of variable ξ = u^{1/(1−s)}.
pub fn head_singular<F: Fn(f64) -> f64>(
    f: F,
    to: f64,
    singular_exponent: f64,
    rel_tol: f64,
    context: &str,
) -> Result<Quadrature> {
    assert!(to > 0.0);
    let s = singular_exponent;
    if !(0.0..1.0).contains(&s) {
        return Err(CoreError::domain(format!(
            "{context}: head exponent {s} outside [0, 1), integral diverges"
        )));
    }
    let q = 1.0 / (1.0 - s);
    let g = |u: f64| q * u.powf(q - 1.0) * f(u.powf(q));
    adaptive(g, 0.0, to.powf(1.0 - s), rel_tol, f64::MIN_POSITIVE, context)
}

/// `∫_0^∞ f(ξ) dξ` with an algebraic ξ^{−a} tail (a > 1) beyond `split` and
/// a bounded integrand on [0, split].
pub fn half_line_algebraic_tail<F: Fn(f64) -> f64>(
    f: F,
    split: f64,
    tail_exponent: f64,
    rel_tol: f64,
    context: &str,
) -> Result<Quadrature> {
    let head = adaptive(&f, 0.0, split, rel_tol, f64::MIN_POSITIVE, context)?;
    let tail = tail_algebraic(&f, split, tail_exponent, rel_tol, context)?;
    Ok(Quadrature {
        value: head.value + tail.value,
        abs_error: head.abs_error + tail.abs_error,
    })
}
