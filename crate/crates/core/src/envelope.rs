//! First-order envelope weight bounding the infinite-dimensional deviation
//! weight `γ₀·N_c` from above on the imaginary axis.
//!
//! The envelope has the fixed shape `W₁(s) = γ₀·κ·(s+α₁)/(s+β₁)` with
//! `κ = 1 + α/γ₀` and `β₁ = β(γ₀+α)(1−γ₀β)⁻¹·α₁`, leaving a single free
//! corner `α₁`. It is tight at ω = 0 (both sides equal `1/β − γ₀`) and at the
//! high-frequency oscillation peaks of `|γ₀N_c|` (both approach `γ₀+α`).
//! The free corner is selected to minimize the worst over-bounding ratio
//! subject to dominance on the grid.

use crate::quasipoly::DelayTransferFunction;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvelopeError {
    /// `γ₀ ≥ (1−αβ)/(2β)` makes `β₁ ≥ α₁`, so the stage-2 level interval
    /// `(γ₀κ, γ₀κ·α₁/β₁)` is empty.
    #[error("envelope interval empty: gamma0 = {gamma0} >= (1 - alpha*beta)/(2 beta) = {limit}")]
    EnvelopeIntervalEmpty { gamma0: f64, limit: f64 },
    /// No candidate corner frequency satisfied the dominance constraint.
    #[error("no feasible alpha1 in the search range")]
    NoFeasibleAlpha1,
}

/// The envelope weight and its derived constants.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeWeight {
    /// `κ = 1 + α/γ₀` (the envelope's high-frequency gain over `γ₀`).
    pub kappa: f64,
    pub alpha1: f64,
    pub beta1: f64,
    /// `W₁(s) = γ₀·κ·(s+α₁)/(s+β₁)`.
    pub w1: DelayTransferFunction,
}

/// Builds the envelope for a given corner `α₁ > 0`.
pub fn build_envelope(
    gamma0: f64,
    alpha: f64,
    beta: f64,
    alpha1: f64,
) -> Result<EnvelopeWeight, EnvelopeError> {
    let limit = (1.0 - alpha * beta) / (2.0 * beta);
    if gamma0 >= limit {
        return Err(EnvelopeError::EnvelopeIntervalEmpty { gamma0, limit });
    }
    assert!(alpha1 > 0.0, "alpha1 must be positive");
    let kappa = 1.0 + alpha / gamma0;
    let beta1 = beta * (gamma0 + alpha) / (1.0 - gamma0 * beta) * alpha1;
    let w1 = DelayTransferFunction::rational(&[alpha1, 1.0], &[beta1, 1.0])
        .unwrap()
        .scale(gamma0 * kappa);
    Ok(EnvelopeWeight {
        kappa,
        alpha1,
        beta1,
        w1,
    })
}

/// Minimum of `|W₁(jω)| − |γ₀N_c(jω)|` over the grid and the frequency where
/// it is attained. Dominance is certified when the minimum is at least
/// `−1e-9·γ₀`; a negative margin is data for the caller, not an error.
pub fn check_dominance(
    env: &EnvelopeWeight,
    gamma0_nc: &DelayTransferFunction,
    grid_points: &[f64],
) -> (f64, f64) {
    let mut min_margin = f64::INFINITY;
    let mut worst = grid_points.first().copied().unwrap_or(0.0);
    for &omega in grid_points {
        let s = Complex64::new(0.0, omega);
        let margin = env.w1.eval(s).norm() - gamma0_nc.eval(s).norm();
        if margin < min_margin {
            min_margin = margin;
            worst = omega;
        }
    }
    (min_margin, worst)
}

/// Dominance slack used by the pipeline: `min_margin ≥ −1e-9·γ₀`.
pub fn dominance_ok(min_margin: f64, gamma0: f64) -> bool {
    min_margin >= -1e-9 * gamma0
}

fn objective(
    alpha1: f64,
    gamma0: f64,
    alpha: f64,
    beta: f64,
    gamma0_nc: &DelayTransferFunction,
    grid_points: &[f64],
) -> f64 {
    let env = match build_envelope(gamma0, alpha, beta, alpha1) {
        Ok(e) => e,
        Err(_) => return f64::INFINITY,
    };
    let mut worst_ratio = 0.0f64;
    let mut min_margin = f64::INFINITY;
    for &omega in grid_points {
        let s = Complex64::new(0.0, omega);
        let w1 = env.w1.eval(s).norm();
        let nc = gamma0_nc.eval(s).norm();
        min_margin = min_margin.min(w1 - nc);
        if nc > 0.0 {
            worst_ratio = worst_ratio.max(w1 / nc);
        }
    }
    if !dominance_ok(min_margin, gamma0) {
        return f64::INFINITY;
    }
    worst_ratio
}

/// Selects the corner `α₁` minimizing the peak over-bounding ratio
/// `max_ω |W₁(jω)|/|γ₀N_c(jω)|` subject to dominance, by a coarse log-spaced
/// feasibility scan over `α₁ ∈ [1e-3·β, 1e3·β]` followed by golden-section
/// refinement to 1e-4 relative.
pub fn select_alpha1(
    gamma0_nc: &DelayTransferFunction,
    gamma0: f64,
    alpha: f64,
    beta: f64,
    grid_points: &[f64],
) -> Result<f64, EnvelopeError> {
    let limit = (1.0 - alpha * beta) / (2.0 * beta);
    if gamma0 >= limit {
        return Err(EnvelopeError::EnvelopeIntervalEmpty { gamma0, limit });
    }
    let f = |log_a1: f64| {
        objective(
            log_a1.exp(),
            gamma0,
            alpha,
            beta,
            gamma0_nc,
            grid_points,
        )
    };
    let lo = (1e-3 * beta).ln();
    let hi = (1e3 * beta).ln();
    let n = 512;
    let mut best = (f64::INFINITY, lo);
    for i in 0..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let v = f(x);
        if v < best.0 {
            best = (v, x);
        }
    }
    if !best.0.is_finite() {
        return Err(EnvelopeError::NoFeasibleAlpha1);
    }
    // golden-section refinement around the best coarse candidate
    let step = (hi - lo) / n as f64;
    let (mut a, mut b) = (best.1 - step, best.1 + step);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut x1, mut x2) = (b - phi * (b - a), a + phi * (b - a));
    let (mut f1, mut f2) = (f(x1), f(x2));
    while (b - a) > 1e-4 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    let x_star = if f1 < f2 { x1 } else { x2 };
    if !f(x_star).is_finite() {
        return Err(EnvelopeError::NoFeasibleAlpha1);
    }
    Ok(x_star.exp())
}
