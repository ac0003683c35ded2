//! Largest zeros of the probabilists' Hermite polynomials He_p.
//!
//! `z_p`, the largest positive zero of He_p, is the optimal constant in
//! Davis's form of the Burkholder–Davis–Gundy inequality for continuous
//! L^p martingales and sits inside every upper moment bound downstream.
//!
//! The zeros are eigenvalues of the symmetric tridiagonal Jacobi matrix of
//! the three-term recurrence (diagonal 0, off-diagonals √k). Expanded
//! coefficients of He_p overflow and cancel catastrophically past p ≈ 30,
//! while the Jacobi matrix is perfectly conditioned, so the largest
//! eigenvalue is located by Sturm-sequence bisection and polished with one
//! Newton step on the recurrence-evaluated polynomial. He_p itself is only
//! ever evaluated through the normalized recurrence
//! `h_{k+1} = (x·h_k − √k·h_{k−1})/√(k+1)` with dynamic rescaling.

use crate::error::{CoreError, Result};

/// Largest admitted order; far beyond any p used by the moment bounds.
pub const MAX_ORDER: usize = 1000;

/// Number of eigenvalues of the Jacobi matrix that are < x, by Sturm count
/// on the LDLᵀ pivots.
fn eigenvalues_below(p: usize, x: f64) -> usize {
    let mut count = 0usize;
    let mut d = -x;
    if d < 0.0 {
        count += 1;
    }
    for i in 2..=p {
        if d == 0.0 {
            d = -f64::MIN_POSITIVE;
        }
        d = -x - (i - 1) as f64 / d;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Normalized Hermite value `h_p(x) = He_p(x)/√(p!)` together with
/// `h_{p−1}(x)`, both scaled by a common power of two to dodge overflow.
/// Returns `(h_p_scaled, h_prev_scaled, log2_scale)`.
fn normalized_pair_scaled(p: usize, x: f64) -> (f64, f64, i64) {
    let mut prev = 1.0f64; // h_0
    let mut cur = x; // h_1
    let mut log2_scale: i64 = 0;
    for k in 1..p {
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        let m = cur.abs().max(prev.abs());
        if m > 1e150 {
            cur *= 2.0f64.powi(-512);
            prev *= 2.0f64.powi(-512);
            log2_scale += 512;
        }
    }
    (cur, prev, log2_scale)
}

/// He_p(x)/√(p!) up to the returned power-of-two scale:
/// `h_p(x) = value · 2^{log2_scale}`. The sign of `value` is the sign of
/// He_p(x); the scale is 0 whenever no rescue was needed.
pub fn hermite_normalized_scaled(p: usize, x: f64) -> (f64, i64) {
    if p == 0 {
        return (1.0, 0);
    }
    let (cur, _, s) = normalized_pair_scaled(p, x);
    (cur, s)
}

/// The largest positive zero z_p of He_p, for even 2 ≤ p ≤ [`MAX_ORDER`].
pub fn largest_hermite_zero(p: usize) -> Result<f64> {
    if p < 2 || p > MAX_ORDER {
        return Err(CoreError::domain(format!(
            "hermite order must satisfy 2 <= p <= {MAX_ORDER}, got {p}"
        )));
    }
    if p % 2 != 0 {
        return Err(CoreError::domain(format!(
            "hermite order must be even, got {p}"
        )));
    }

    // Carlen–Kree: z_p ≤ 2√p, so the largest eigenvalue lies in (0, hi].
    let mut lo = 0.0f64;
    let mut hi = 2.0 * (p as f64).sqrt() + 1.0;
    debug_assert!(eigenvalues_below(p, hi) == p);
    for _ in 0..120 {
        if hi - lo <= 1e-14 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if eigenvalues_below(p, mid) >= p {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut z = 0.5 * (lo + hi);

    // Newton polish on the stable recurrence: Heₚ′ = p·Heₚ₋₁ turns into
    // h_p / h_p′ = h_p / (√p · h_{p−1}) after normalization.
    for _ in 0..2 {
        let (hp, hprev, _) = normalized_pair_scaled(p, z);
        let step = hp / ((p as f64).sqrt() * hprev);
        if !step.is_finite() {
            break;
        }
        z -= step;
    }

    debug_assert!(z > 0.0 && z <= 2.0 * (p as f64).sqrt());
    Ok(z)
}
