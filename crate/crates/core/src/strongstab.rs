//! Stage 2: stable controller achieving a certified sensitivity-deviation
//! bound.
//!
//! The deviation problem `inf ‖γ₀N_c(1+D_cQ̂)‖∞` over stable `Q̂` is bounded
//! by replacing the weight `γ₀N_c` with the envelope `W₁`, giving a one-block
//! weighted-sensitivity problem with the inner plant `D_c`. Its optimal level
//! `γ₂` solves a second phase equation; the optimal parameter is assembled
//! from the rational pieces `A` and `B` and `D_c`, and the final controller
//! `K = −Q` is certified stable by winding counts. Closed-loop stability of
//! `(P, K)` is a separate property — certified here by the winding of
//! `1 + P·K` — and the small-gain margin `min(1/|Q|) − |N_p|` is reported as
//! data.
//!
//! Sign conventions: `B(s) = (γ₂/(γ₀κ))·(s−β₁)/(α₁+s)` (mirroring the
//! stage-1 controller's `γ(s−β)/(1+αs)` factor), `C₂ = A/(1−D_c·B)`, and the
//! deviation parameter is `q̂ = −C₂/(1+D_c·C₂) = −A/(1−D_c·B⁻¹(−s))`: the
//! leading minus pairs the `1+D_cQ̂` objective with the transformed
//! sensitivity `1−D_cQ̃`, and only this choice is simultaneously flat
//! (`|W₁(1+D_c·q̂)| ≡ γ₂` on the axis) and analytic in the right half plane.

use crate::quasipoly::{DelayTransferFunction, Polynomial, QuasiPolynomial};
use crate::sensopt::{OptimalSensitivityResult, PlantSpec, WeightSpec};
use crate::winding::{
    default_contour_radius, winding_number_excluding, winding_number_fn, wrap_to_pi,
    FrequencyGrid, WindingError,
};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrongstabError {
    #[error("gamma2 {gamma2} outside the open interval ({lo}, {hi})")]
    Gamma2OutOfRange { gamma2: f64, lo: f64, hi: f64 },
    #[error("no phase-equation root in the interval (scan range [{scan_min}, {scan_max}], residual range [{min_resid}, {max_resid}])")]
    NoRootInInterval {
        scan_min: f64,
        scan_max: f64,
        min_resid: f64,
        max_resid: f64,
    },
    #[error("q_hat is identically zero")]
    QhatIdenticallyZero,
    #[error("deviation identity mismatch: {0}")]
    IdentityMismatch(String),
    #[error(transparent)]
    Winding(#[from] WindingError),
}

/// Constants of the stage-2 phase equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage2Params {
    pub gamma0: f64,
    /// The envelope constant `κ = 1 + α/γ₀`.
    pub kappa: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub h: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Stage2Params {
    pub fn level_floor(&self) -> f64 {
        self.gamma0 * self.kappa
    }

    pub fn level_ceiling(&self) -> f64 {
        self.gamma0 * self.kappa * self.alpha1 / self.beta1
    }

    /// `ω(γ₂) = sqrt(((γ₀κ)²α₁² − γ₂²β₁²)/(γ₂² − (γ₀κ)²))`, the frequency
    /// where `|W₁(jω)| = γ₂`.
    pub fn omega_star(&self, gamma2: f64) -> f64 {
        let gk = self.level_floor();
        (((gk * gk * self.alpha1 * self.alpha1) - gamma2 * gamma2 * self.beta1 * self.beta1)
            / (gamma2 * gamma2 - gk * gk))
            .sqrt()
    }

}

/// Stage-2 phase-equation left-hand side at the frequency `ω(γ₂)`:
///
/// `atan(ω/α₁) + atan(ω/β₁) + hω + T₁ − T₂`
///
/// with quadrant-aware arctangents of the pairs
/// `T₁ = atan2(Y−X, U−V)`, `T₂ = atan2(X−Y, U−V)` where
/// `X = γ₀⁻¹αω·cos hω`, `Y = ω − γ₀⁻¹sin hω`, `U = β + γ₀⁻¹cos hω`,
/// `V = αγ₀⁻¹ω·sin hω`; `T₁ − T₂ = 2·arg d(jω)` for the denominator
/// quasi-polynomial `d` of `D_c`. The value is reduced modulo 2π to the
/// branch nearest π, so the root condition is `phase_lhs2 = π` exactly.
pub fn phase_lhs2(gamma2: f64, p: &Stage2Params) -> Result<f64, StrongstabError> {
    let (lo, hi) = (p.level_floor(), p.level_ceiling());
    if !(gamma2 > lo && gamma2 < hi) {
        return Err(StrongstabError::Gamma2OutOfRange { gamma2, lo, hi });
    }
    let w = p.omega_star(gamma2);
    Ok(raw_phase(w, p))
}

fn raw_phase(w: f64, p: &Stage2Params) -> f64 {
    let g0i = 1.0 / p.gamma0;
    let (sin_hw, cos_hw) = (p.h * w).sin_cos();
    let x = g0i * p.alpha * w * cos_hw;
    let y = w - g0i * sin_hw;
    let u = p.beta + g0i * cos_hw;
    let v = p.alpha * g0i * w * sin_hw;
    let t1 = (y - x).atan2(u - v);
    let t2 = (x - y).atan2(u - v);
    let raw = (w / p.alpha1).atan() + (w / p.beta1).atan() + p.h * w + t1 - t2;
    PI + wrap_to_pi(raw - PI)
}

/// Finds `γ_{2,opt}`: a descending scan over 1024 log-spaced candidates in
/// the open interval brackets the first sign change of `phase_lhs2 − π`
/// (equivalently the smallest-ω alignment, which is the stability boundary
/// of the deviation parameter), then bisection refines the residual below
/// 1e-10. Returns `(γ₂, ω*)`.
pub fn solve_gamma2(p: &Stage2Params) -> Result<(f64, f64), StrongstabError> {
    let (lo, hi) = (p.level_floor(), p.level_ceiling());
    let inset = 1e-9 * (hi - lo);
    let (lo_i, hi_i) = (lo + inset, hi - inset);
    let resid = |g2: f64| wrap_to_pi(raw_phase(p.omega_star(g2), p) - PI);

    let n = 1024;
    let mut min_r = f64::INFINITY;
    let mut max_r = f64::NEG_INFINITY;
    let mut prev: Option<(f64, f64)> = None;
    let mut bracket = None;
    for i in 0..n {
        // descending log-spaced candidates
        let g2 = hi_i * (lo_i / hi_i).powf(i as f64 / (n - 1) as f64);
        let r = resid(g2);
        min_r = min_r.min(r);
        max_r = max_r.max(r);
        if let Some((g_prev, r_prev)) = prev {
            // genuine crossing: opposite signs reached the short way round
            if r_prev * r < 0.0 && (r - r_prev).abs() < PI / 2.0 {
                bracket = Some((g2, r, g_prev, r_prev));
                break;
            }
        }
        prev = Some((g2, r));
    }
    let (mut blo, r_lo, mut bhi, _r_hi) = bracket.ok_or(StrongstabError::NoRootInInterval {
        scan_min: lo_i,
        scan_max: hi_i,
        min_resid: min_r,
        max_resid: max_r,
    })?;
    let lo_sign = r_lo.signum();
    let mut best = (blo, r_lo.abs());
    for _ in 0..200 {
        let mid = 0.5 * (blo + bhi);
        let r = resid(mid);
        if r.abs() < best.1 {
            best = (mid, r.abs());
        }
        if r.abs() < 1e-12 {
            break;
        }
        if r.signum() == lo_sign {
            blo = mid;
        } else {
            bhi = mid;
        }
    }
    let gamma2 = best.0;
    if best.1 > 1e-10 {
        return Err(StrongstabError::NoRootInInterval {
            scan_min: lo_i,
            scan_max: hi_i,
            min_resid: best.1,
            max_resid: best.1,
        });
    }
    Ok((gamma2, p.omega_star(gamma2)))
}

/// `A(s)` of the stage-2 controller: the numerator vanishes at `±jω*`.
pub fn build_a(p: &Stage2Params, gamma2: f64) -> DelayTransferFunction {
    let gk = p.level_floor();
    let num = Polynomial::new(&[
        gk * gk * p.alpha1 * p.alpha1 - gamma2 * gamma2 * p.beta1 * p.beta1,
        0.0,
        gamma2 * gamma2 - gk * gk,
    ]);
    let den = Polynomial::new(&[p.beta1, 1.0])
        .mul(&Polynomial::new(&[p.alpha1, 1.0]))
        .scale(gk * gamma2);
    DelayTransferFunction::new(
        QuasiPolynomial::from_poly(num),
        QuasiPolynomial::from_poly(den),
    )
    .unwrap()
}

/// `B(s) = (γ₂/(γ₀κ))·(s−β₁)/(α₁+s)`.
pub fn build_b(p: &Stage2Params, gamma2: f64) -> DelayTransferFunction {
    DelayTransferFunction::rational(&[-p.beta1, 1.0], &[p.alpha1, 1.0])
        .unwrap()
        .scale(gamma2 / p.level_floor())
}

/// Builds `C₂ = A/(1−D_c·B)` and the deviation parameter
/// `q̂ = −C₂/(1+D_c·C₂) = −A/(1−D_c·B⁻¹(−s))`.
pub fn build_c2_and_qhat(
    p: &Stage2Params,
    gamma2: f64,
    d_c: &DelayTransferFunction,
) -> Result<
    (
        DelayTransferFunction,
        DelayTransferFunction,
        DelayTransferFunction,
        DelayTransferFunction,
    ),
    StrongstabError,
> {
    let a_tf = build_a(p, gamma2);
    let b_tf = build_b(p, gamma2);
    let one = DelayTransferFunction::one();
    let c2 = a_tf.mul(&one.sub(&d_c.mul(&b_tf)).invert().map_err(|e| {
        StrongstabError::Winding(WindingError::InvalidGrid(format!(
            "degenerate C2 denominator: {e}"
        )))
    })?);
    let b_refl = b_tf.reflect().unwrap().invert().unwrap();
    let q_hat = a_tf
        .mul(&one.sub(&d_c.mul(&b_refl)).invert().map_err(|e| {
            StrongstabError::Winding(WindingError::InvalidGrid(format!(
                "degenerate q_hat denominator: {e}"
            )))
        })?)
        .neg();
    Ok((a_tf, b_tf, c2, q_hat))
}

/// Recovers the original-loop Youla parameter and the controller pieces:
/// `Q = N_p⁻¹·N_c·q̂`, `F = −(Q⁻¹ + C_opt⁻¹)`, `K = −Q`, plus the literal
/// variant `K_lit = −q̂` (the two coincide iff `N_p⁻¹N_c ≡ 1`).
pub fn build_f_and_k(
    q_hat: &DelayTransferFunction,
    n_c: &DelayTransferFunction,
    np: &DelayTransferFunction,
    c_opt: &DelayTransferFunction,
) -> Result<
    (
        DelayTransferFunction,
        DelayTransferFunction,
        DelayTransferFunction,
        DelayTransferFunction,
    ),
    StrongstabError,
> {
    if q_hat.num().is_zero() {
        return Err(StrongstabError::QhatIdenticallyZero);
    }
    let q_param = np.invert().unwrap().mul(n_c).mul(q_hat);
    let f_tf = q_param
        .invert()
        .unwrap()
        .add(&c_opt.invert().unwrap())
        .neg();
    let k_tf = q_param.neg();
    let k_literal = q_hat.neg();
    Ok((q_param, f_tf, k_tf, k_literal))
}

/// Result bundle of the stage-2 solve.
#[derive(Debug, Clone)]
pub struct DeviationSolveResult {
    pub gamma2_opt: f64,
    pub omega_star: f64,
    pub a_tf: DelayTransferFunction,
    pub b_tf: DelayTransferFunction,
    pub c2_opt: DelayTransferFunction,
    pub q_hat: DelayTransferFunction,
    pub q_param: DelayTransferFunction,
    pub f_tf: DelayTransferFunction,
    pub k_tf: DelayTransferFunction,
    pub k_literal: DelayTransferFunction,
}

/// Stability and deviation certificates for the assembled controller.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// Winding-counted right-half-plane poles of `K` (0 required for a
    /// stable controller).
    pub k_rhp_poles: i32,
    /// Winding-counted right-half-plane zeros of `1 + P·K` within the
    /// default contour (0 required for a stable closed loop).
    pub closed_loop_rhp_zeros: i32,
    /// `min_ω (|Q(jω)|⁻¹ − |N_p(jω)|)`: positive iff the small-gain
    /// sufficient condition holds.
    pub suff_cond_margin: f64,
    /// `max_ω |W(jω)(S₀−S)/S|` over the grid.
    pub achieved_deviation: f64,
    /// `γ_{2,opt}`.
    pub deviation_bound: f64,
}

impl StabilityReport {
    pub fn strong_stabilization_certified(&self) -> bool {
        self.k_rhp_poles == 0 && self.closed_loop_rhp_zeros == 0
    }
}

/// Certifies the assembled controller:
///
/// * `k_rhp_poles`: factor-wise winding count of `K`'s denominator
///   quasi-polynomials, indented at the cancelled pairs `±jω_γ`, `±jω*`;
/// * `closed_loop_rhp_zeros`: winding of the function `1 + P·K` plus
///   `k_rhp_poles` (the function's RHP poles);
/// * `suff_cond_margin` and the two deviation forms, which must agree
///   pointwise to 1e-8 relative (`|W(S₀−S)/S| = |γ₀N_c(1+D_c·q̂)|` on the
///   axis via `|D_c+M_pN_c| = γ₀⁻¹|W|`).
#[allow(clippy::too_many_arguments)]
pub fn certify(
    result: &DeviationSolveResult,
    plant: &PlantSpec,
    weight: &WeightSpec,
    stage1: &OptimalSensitivityResult,
    p: &Stage2Params,
    grid: &FrequencyGrid,
) -> Result<StabilityReport, StrongstabError> {
    let h = plant.delay_h;
    let exclusions = [stage1.omega_gamma, result.omega_star];
    let pts = grid.points_excluding(Some(h), &exclusions);

    // (a) RHP poles of K, counted factor-wise on its denominator pieces:
    // np numerator, N_c denominator, A's rational denominator, and the
    // cleared quasi-polynomial of 1 - D_c B^{-1}(-s).
    let gk = p.level_floor();
    let d = stage1.d_c.den().clone();
    let n = stage1.d_c.num().clone();
    let delta = d
        .mul(&QuasiPolynomial::from_poly(Polynomial::new(&[p.beta1, 1.0])))
        .sub(
            &n.mul(&QuasiPolynomial::from_poly(
                Polynomial::new(&[-p.alpha1, 1.0]).scale(gk / result.gamma2_opt),
            )),
        );
    let mut k_rhp_poles = 0i32;
    for qp in [
        plant.np.num().clone(),
        stage1.n_c.den().clone(),
        result.a_tf.den().clone(),
        delta,
    ] {
        let f = DelayTransferFunction::from_qp(qp);
        let radius = default_contour_radius(&f);
        k_rhp_poles += winding_number_excluding(&f, radius, grid, &exclusions)?;
    }

    // (b) RHP zeros of 1 + P K, marched as a function (its value tends to 1
    // on the semicircle since |e^{-hs}| decays), plus the function's poles.
    // K is evaluated as −N_c·q̂/N_p factor by factor: flattening would put a
    // double root at ±jω_γ into one quasi-polynomial and degrade the
    // evaluation near the indentations.
    let p_tf = DelayTransferFunction::delay(h).mul(&plant.np);
    let n_c = stage1.n_c.clone();
    let q_hat = result.q_hat.clone();
    let np = plant.np.clone();
    let k_at = move |s: Complex64| -(n_c.eval(s) * q_hat.eval(s)) / np.eval(s);
    let radius = default_contour_radius(&result.k_tf);
    let total_delay = h
        + result.k_tf.num().max_delay()
        + result.k_tf.den().max_delay();
    let w_loop = winding_number_fn(
        |s| Complex64::new(1.0, 0.0) + p_tf.eval(s) * k_at(s),
        radius,
        grid,
        &exclusions,
        total_delay,
    )?;
    let closed_loop_rhp_zeros = w_loop + k_rhp_poles;

    // (c) small-gain margin
    let mut suff_cond_margin = f64::INFINITY;
    for &omega in &pts {
        let s = Complex64::new(0.0, omega);
        let q = k_at(s).norm();
        let np_mag = plant.np.eval(s).norm();
        suff_cond_margin = suff_cond_margin.min(1.0 / q - np_mag);
    }

    // (d) achieved deviation, two routes
    let wtf = weight.tf();
    let mut achieved = 0.0f64;
    for &omega in &pts {
        let s = Complex64::new(0.0, omega);
        let s_cl = (Complex64::new(1.0, 0.0) + p_tf.eval(s) * k_at(s)).inv();
        let s0 = stage1.s_opt.eval(s);
        let dev15 = (wtf.eval(s) * (s0 - s_cl) / s_cl).norm();
        let dev16 = (p.gamma0
            * stage1.n_c.eval(s)
            * (Complex64::new(1.0, 0.0) + stage1.d_c.eval(s) * result.q_hat.eval(s)))
        .norm();
        if (dev15 - dev16).abs() > 1e-8 * dev16.max(1e-12) {
            return Err(StrongstabError::IdentityMismatch(format!(
                "deviation forms disagree at omega={omega}: {dev15} vs {dev16}"
            )));
        }
        achieved = achieved.max(dev15);
    }

    Ok(StabilityReport {
        k_rhp_poles,
        closed_loop_rhp_zeros,
        suff_cond_margin,
        achieved_deviation: achieved,
        deviation_bound: result.gamma2_opt,
    })
}

/// Full stage-2 solve from the stage-1 result and a built envelope.
pub fn solve(
    stage1: &OptimalSensitivityResult,
    env: &crate::envelope::EnvelopeWeight,
    plant: &PlantSpec,
    weight: &WeightSpec,
    grid: &FrequencyGrid,
) -> Result<(DeviationSolveResult, StabilityReport), StrongstabError> {
    let p = Stage2Params {
        gamma0: stage1.gamma_opt,
        kappa: env.kappa,
        alpha1: env.alpha1,
        beta1: env.beta1,
        h: plant.delay_h,
        alpha: weight.alpha,
        beta: weight.beta,
    };
    let (gamma2_opt, omega_star) = solve_gamma2(&p)?;
    let (a_tf, b_tf, c2_opt, q_hat) = build_c2_and_qhat(&p, gamma2_opt, &stage1.d_c)?;
    let (q_param, f_tf, k_tf, k_literal) =
        build_f_and_k(&q_hat, &stage1.n_c, &plant.np, &stage1.c_opt)?;
    let result = DeviationSolveResult {
        gamma2_opt,
        omega_star,
        a_tf,
        b_tf,
        c2_opt,
        q_hat,
        q_param,
        f_tf,
        k_tf,
        k_literal,
    };
    let report = certify(&result, plant, weight, stage1, &p, grid)?;
    Ok((result, report))
}
