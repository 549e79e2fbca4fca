//! Phase unwrapping, winding numbers via the argument principle, and
//! real-axis-crossing detection for delay transfer functions.
//!
//! The winding number is computed along the positively oriented boundary of
//! the right-half-plane half-disc of radius `R`: the right semicircle from
//! `-jR` through `+R` to `+jR`, then the imaginary axis back down. With this
//! orientation the result equals (#RHP zeros − #RHP poles) of the function
//! inside the contour.
//!
//! Certificates for functions with structurally cancelled imaginary-axis
//! root pairs use [`winding_number_excluding`], which indents the axis
//! segment into the right half plane around the listed frequencies so the
//! marginal pairs never sit on the contour; the excluded half-discs are
//! certified separately by the callers' cancellation checks.

use crate::quasipoly::{DelayTransferFunction, QuasiPolynomial};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WindingError {
    /// Adjacent samples imply a phase step ≥ π/2 even after the refinement
    /// budget was exhausted (a zero or pole is on or numerically on the path).
    #[error("phase step of {step:.3} rad at |s|={location:.6e} not resolved by refinement")]
    PhaseStepTooLarge { step: f64, location: f64 },
    /// A sample magnitude underflowed; the path hits a zero.
    #[error("sample magnitude below 1e-300 on the path")]
    ZeroSample,
    /// Total phase change is not an integer multiple of 2π within tolerance.
    #[error("winding residue {residue:.4} exceeds 0.05 (zero or pole too close to the contour)")]
    NonIntegerWinding { residue: f64 },
    /// The quasi-polynomial's delay-free part does not dominate at high
    /// frequency, so the semicircle behavior is not polynomial-controlled and
    /// a finite contour cannot certify the right half plane.
    #[error("quasi-polynomial is not of dominated retarded/neutral type")]
    DegreeNotRetarded,
    /// Grid parameters violate the documented invariants.
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),
}

/// Logarithmic frequency grid with optional extra linear sampling per delay
/// period, used by every on-axis identity check and trace.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points_per_decade: usize,
    pub extra_linear_points_per_delay_period: usize,
}

impl FrequencyGrid {
    pub fn new(
        omega_min: f64,
        omega_max: f64,
        points_per_decade: usize,
        extra_linear_points_per_delay_period: usize,
    ) -> Result<Self, WindingError> {
        if !(omega_min > 0.0 && omega_min < omega_max) {
            return Err(WindingError::InvalidGrid(format!(
                "need 0 < omega_min < omega_max, got [{omega_min}, {omega_max}]"
            )));
        }
        if points_per_decade < 16 {
            return Err(WindingError::InvalidGrid(format!(
                "points_per_decade must be >= 16, got {points_per_decade}"
            )));
        }
        if extra_linear_points_per_delay_period < 8 {
            return Err(WindingError::InvalidGrid(format!(
                "extra_linear_points_per_delay_period must be >= 8, got {extra_linear_points_per_delay_period}"
            )));
        }
        Ok(Self {
            omega_min,
            omega_max,
            points_per_decade,
            extra_linear_points_per_delay_period,
        })
    }

    /// Default synthesis grid for a plant with delay `h`:
    /// 64 points/decade over `[1e-3/h, 1e4/h]` plus 16 linear points per
    /// delay period.
    pub fn for_delay(h: f64) -> Self {
        Self {
            omega_min: 1e-3 / h,
            omega_max: 1e4 / h,
            points_per_decade: 64,
            extra_linear_points_per_delay_period: 16,
        }
    }

    /// Sorted union of the log grid and, when a positive delay is supplied,
    /// a linear grid with the configured number of samples per period 2π/h.
    pub fn points(&self, delay: Option<f64>) -> Vec<f64> {
        let mut pts = Vec::new();
        let decades = (self.omega_max / self.omega_min).log10();
        let n_log = (decades * self.points_per_decade as f64).ceil() as usize + 1;
        for i in 0..n_log {
            let w = self.omega_min
                * 10f64.powf(decades * i as f64 / (n_log - 1).max(1) as f64);
            pts.push(w.min(self.omega_max));
        }
        if let Some(h) = delay {
            if h > 0.0 {
                let step = 2.0 * PI / h / self.extra_linear_points_per_delay_period as f64;
                let mut w = self.omega_min + step;
                while w < self.omega_max {
                    pts.push(w);
                    w += step;
                }
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15 * b.max(1.0));
        pts
    }

    /// Grid points with windows of half-width `1e-6·max(1, ω_e)` removed
    /// around each excluded frequency; the window edges are kept as samples.
    pub fn points_excluding(&self, delay: Option<f64>, exclusions: &[f64]) -> Vec<f64> {
        let mut pts = self.points(delay);
        for &e in exclusions {
            let w = exclusion_halfwidth(e);
            pts.retain(|&x| (x - e).abs() >= w);
            if e - w > self.omega_min {
                pts.push(e - w);
            }
            if e + w < self.omega_max {
                pts.push(e + w);
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts
    }
}

pub(crate) fn exclusion_halfwidth(omega: f64) -> f64 {
    1e-6 * omega.abs().max(1.0)
}

/// Detected and predicted real-axis crossings of a frequency response.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingReport {
    pub negative_axis_crossings: Vec<f64>,
    pub positive_axis_crossings: Vec<f64>,
    pub predicted_negative: Vec<f64>,
    pub predicted_positive: Vec<f64>,
    pub matched_fraction: f64,
}

/// Continuous phase along a sampled path.
///
/// Each output differs from the principal argument by a multiple of 2π and
/// adjacent differences stay below π/2 (larger raw steps are rejected, since
/// the caller is responsible for sampling densely enough).
pub fn unwrap_phase(samples: &[Complex64]) -> Result<Vec<f64>, WindingError> {
    let mut out = Vec::with_capacity(samples.len());
    let mut prev_arg = 0.0f64;
    for (i, v) in samples.iter().enumerate() {
        if v.norm() < 1e-300 {
            return Err(WindingError::ZeroSample);
        }
        if i == 0 {
            prev_arg = v.arg();
            out.push(prev_arg);
        } else {
            let step = wrap_to_pi(v.arg() - prev_arg);
            if step.abs() >= PI / 2.0 {
                return Err(WindingError::PhaseStepTooLarge {
                    step: step.abs(),
                    location: v.norm(),
                });
            }
            prev_arg += step;
            out.push(prev_arg);
        }
    }
    Ok(out)
}

/// Principal-branch reduction into (−π, π].
pub(crate) fn wrap_to_pi(x: f64) -> f64 {
    let mut r = x % (2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    } else if r <= -PI {
        r += 2.0 * PI;
    }
    r
}

const MAX_REFINE_DEPTH: u32 = 40;

enum Piece {
    /// s = jω, ω from w0 to w1 (either direction).
    Axis { w0: f64, w1: f64 },
    /// s = center + radius·e^{jφ}, φ from phi0 to phi1.
    Arc {
        center: Complex64,
        radius: f64,
        phi0: f64,
        phi1: f64,
    },
}

impl Piece {
    fn at(&self, t: f64) -> Complex64 {
        match *self {
            Piece::Axis { w0, w1 } => Complex64::new(0.0, w0 + (w1 - w0) * t),
            Piece::Arc {
                center,
                radius,
                phi0,
                phi1,
            } => {
                let phi = phi0 + (phi1 - phi0) * t;
                center + radius * Complex64::new(phi.cos(), phi.sin())
            }
        }
    }

    fn initial_samples(&self, total_delay: f64, per_period: usize) -> usize {
        match *self {
            Piece::Axis { w0, w1 } => {
                let len = (w1 - w0).abs();
                let delay_driven = len * total_delay * per_period as f64 / (2.0 * PI);
                (64 + delay_driven.ceil() as usize).min(2_000_000)
            }
            Piece::Arc { radius, phi0, phi1, .. } => {
                let arc_len = radius * (phi1 - phi0).abs();
                let delay_driven = arc_len * total_delay;
                (64 + (4.0 * delay_driven).ceil() as usize).min(2_000_000)
            }
        }
    }
}

fn march_piece<F: Fn(Complex64) -> Complex64>(
    f: &F,
    piece: &Piece,
    per_period: usize,
    total_delay: f64,
) -> Result<f64, WindingError> {
    let n = piece.initial_samples(total_delay, per_period);
    let mut total = 0.0f64;
    let mut t0 = 0.0f64;
    let mut v0 = f(piece.at(t0));
    if v0.norm() < 1e-300 {
        return Err(WindingError::ZeroSample);
    }
    for i in 1..=n {
        let t1 = i as f64 / n as f64;
        let v1 = f(piece.at(t1));
        total += refine_step(f, piece, t0, v0, t1, v1, 0)?;
        t0 = t1;
        v0 = v1;
    }
    Ok(total)
}

fn refine_step<F: Fn(Complex64) -> Complex64>(
    f: &F,
    piece: &Piece,
    t0: f64,
    v0: Complex64,
    t1: f64,
    v1: Complex64,
    depth: u32,
) -> Result<f64, WindingError> {
    if v1.norm() < 1e-300 {
        return Err(WindingError::ZeroSample);
    }
    let step = wrap_to_pi(v1.arg() - v0.arg());
    if step.abs() < PI / 2.0 {
        return Ok(step);
    }
    if depth >= MAX_REFINE_DEPTH {
        return Err(WindingError::PhaseStepTooLarge {
            step: step.abs(),
            location: piece.at(t0).norm(),
        });
    }
    let tm = 0.5 * (t0 + t1);
    let vm = f(piece.at(tm));
    Ok(refine_step(f, piece, t0, v0, tm, vm, depth + 1)?
        + refine_step(f, piece, tm, vm, t1, v1, depth + 1)?)
}

fn build_contour(radius: f64, exclusions: &[f64]) -> Vec<Piece> {
    // Merge exclusions whose indentation discs would overlap.
    let mut ex: Vec<f64> = exclusions
        .iter()
        .copied()
        .filter(|e| *e > 0.0 && *e < radius)
        .collect();
    ex.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut merged: Vec<f64> = Vec::new();
    for e in ex {
        match merged.last_mut() {
            Some(last) if (e - *last).abs() < 4.0 * indent_radius(*last) => {
                *last = 0.5 * (*last + e);
            }
            _ => merged.push(e),
        }
    }

    let mut pieces = vec![Piece::Arc {
        center: Complex64::new(0.0, 0.0),
        radius,
        phi0: -PI / 2.0,
        phi1: PI / 2.0,
    }];
    // Axis from +jR down to -jR, indenting into Re s > 0 around ±ω_e.
    let mut stops: Vec<f64> = merged.iter().rev().copied().collect();
    stops.extend(merged.iter().map(|e| -e));
    let mut prev = radius;
    for e in stops {
        let d = indent_radius(e);
        pieces.push(Piece::Axis {
            w0: prev,
            w1: e + d,
        });
        pieces.push(Piece::Arc {
            center: Complex64::new(0.0, e),
            radius: d,
            phi0: PI / 2.0,
            phi1: -PI / 2.0,
        });
        prev = e - d;
    }
    pieces.push(Piece::Axis {
        w0: prev,
        w1: -radius,
    });
    pieces
}

fn indent_radius(omega: f64) -> f64 {
    1e-4 * omega.abs().max(1.0)
}

/// Winding number of an arbitrary frequency-domain closure along the
/// half-disc boundary, with optional indentations around known imaginary-axis
/// cancellation points. This is the engine behind [`winding_number`]; it does
/// not apply the quasi-polynomial type gate, so composite functions whose
/// high-frequency behavior is known to the caller (for example `1 + P·K`,
/// which tends to 1 on the semicircle) can be certified directly.
pub fn winding_number_fn<F: Fn(Complex64) -> Complex64>(
    f: F,
    contour_radius: f64,
    grid: &FrequencyGrid,
    exclusions: &[f64],
    total_delay: f64,
) -> Result<i32, WindingError> {
    let per_period = grid.extra_linear_points_per_delay_period.max(8);
    let mut total = 0.0f64;
    for piece in build_contour(contour_radius, exclusions) {
        total += march_piece(&f, &piece, per_period, total_delay)?;
    }
    let turns = total / (2.0 * PI);
    let rounded = turns.round();
    let residue = (turns - rounded).abs();
    if residue >= 0.05 {
        return Err(WindingError::NonIntegerWinding { residue });
    }
    Ok(rounded as i32)
}

/// Checks that the delay-free polynomial part controls the high-frequency
/// behavior on the right half plane: it must exist, carry the highest degree,
/// and if delayed terms tie that degree their leading coefficients must sum
/// below its own in magnitude.
fn check_dominated_type(qp: &QuasiPolynomial) -> Result<(), WindingError> {
    let d0 = qp
        .delay_zero_poly()
        .ok_or(WindingError::DegreeNotRetarded)?;
    let deg = d0.degree();
    let mut tie_sum = 0.0f64;
    for t in qp.terms().iter().skip(1) {
        if t.poly.degree() > deg {
            return Err(WindingError::DegreeNotRetarded);
        }
        if t.poly.degree() == deg {
            tie_sum += t.poly.leading_coeff().abs();
        }
    }
    if tie_sum >= d0.leading_coeff().abs() {
        return Err(WindingError::DegreeNotRetarded);
    }
    Ok(())
}

/// Contour radius covering all delay-free polynomial roots with margin:
/// `max(100, 50·max root-magnitude estimate of the delay-0 parts)`.
pub fn default_contour_radius(f: &DelayTransferFunction) -> f64 {
    let bound = |qp: &QuasiPolynomial| {
        qp.delay_zero_poly()
            .map(|p| p.cauchy_root_bound())
            .unwrap_or(0.0)
    };
    (50.0 * bound(f.num()).max(bound(f.den()))).max(100.0)
}

/// Winding number of `f` around the origin along the half-disc contour:
/// (#RHP zeros − #RHP poles) inside the contour.
pub fn winding_number(
    f: &DelayTransferFunction,
    contour_radius: f64,
    grid: &FrequencyGrid,
) -> Result<i32, WindingError> {
    winding_number_excluding(f, contour_radius, grid, &[])
}

/// [`winding_number`] with indentations around the listed imaginary-axis
/// frequencies; roots inside those half-discs are not counted (the caller
/// certifies them as removable).
pub fn winding_number_excluding(
    f: &DelayTransferFunction,
    contour_radius: f64,
    grid: &FrequencyGrid,
    exclusions: &[f64],
) -> Result<i32, WindingError> {
    check_dominated_type(f.num())?;
    check_dominated_type(f.den())?;
    let total_delay = f.num().max_delay() + f.den().max_delay();
    winding_number_fn(
        |s| f.eval(s),
        contour_radius,
        grid,
        exclusions,
        total_delay,
    )
}

/// Scans `ω ∈ (0, 2π(k_max+0.5)/h]` for real-axis crossings of `f(jω)`,
/// locating each sign change of the imaginary part by bisection and
/// classifying by the sign of the real part. Predictions are the delay
/// asymptotes `2πk/h` (negative axis) and `(2k+1)π/h` (positive axis).
pub fn crossing_profile(
    f: &DelayTransferFunction,
    h: f64,
    k_max: usize,
    grid: &FrequencyGrid,
) -> CrossingReport {
    let scan_max = 2.0 * PI * (k_max as f64 + 0.5) / h;
    let per_period = grid.extra_linear_points_per_delay_period.max(32);
    let n = ((k_max as f64 + 0.5) * per_period as f64).ceil() as usize;
    let step = scan_max / n as f64;

    let im_at = |w: f64| f.eval(Complex64::new(0.0, w)).im;
    let mut negative = Vec::new();
    let mut positive = Vec::new();
    let mut ambiguous = 0usize;

    let mut w_prev = step;
    let mut im_prev = im_at(w_prev);
    for i in 2..=n {
        let w = i as f64 * step;
        let im = im_at(w);
        if im_prev == 0.0 {
            im_prev = im;
            w_prev = w;
            continue;
        }
        if im_prev * im < 0.0 {
            // bisect to relative 1e-8 in ω
            let (mut lo, mut hi) = (w_prev, w);
            let lo_sign = im_prev.signum();
            while (hi - lo) > 1e-9 * lo {
                let mid = 0.5 * (lo + hi);
                if im_at(mid).signum() == lo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let wc = 0.5 * (lo + hi);
            let re = f.eval(Complex64::new(0.0, wc)).re;
            if re > 1e-9 {
                positive.push(wc);
            } else if re < -1e-9 {
                negative.push(wc);
            } else {
                ambiguous += 1;
            }
        }
        im_prev = im;
        w_prev = w;
    }

    let predicted_negative: Vec<f64> = (1..=k_max).map(|k| 2.0 * PI * k as f64 / h).collect();
    let predicted_positive: Vec<f64> = (1..=k_max)
        .map(|k| (2 * k + 1) as f64 * PI / h)
        .collect();

    // Crossings in the k >= 5 territory of their list count toward the
    // fraction; a crossing matches when within 10% of some prediction.
    let mut considered = ambiguous_considered(ambiguous, h, scan_max);
    let mut matched = 0usize;
    for (list, preds, k5) in [
        (&negative, &predicted_negative, 2.0 * PI * 5.0 / h),
        (&positive, &predicted_positive, 11.0 * PI / h),
    ] {
        for &wc in list.iter() {
            if wc >= 0.9 * k5 {
                considered += 1;
                if preds
                    .iter()
                    .any(|&p| (wc - p).abs() <= 0.1 * p)
                {
                    matched += 1;
                }
            }
        }
    }
    let matched_fraction = if considered == 0 {
        1.0
    } else {
        matched as f64 / considered as f64
    };

    CrossingReport {
        negative_axis_crossings: negative,
        positive_axis_crossings: positive,
        predicted_negative,
        predicted_positive,
        matched_fraction,
    }
}

fn ambiguous_considered(ambiguous: usize, _h: f64, _scan_max: f64) -> usize {
    // Tangency-grade crossings land in neither list but still dilute the
    // matched fraction.
    ambiguous
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasipoly::{Polynomial, QuasiPolynomial};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn grid() -> FrequencyGrid {
        FrequencyGrid::for_delay(1.0)
    }

    #[test]
    fn unwrap_pure_rotation() {
        let samples: Vec<Complex64> = (0..126)
            .map(|i| Complex64::new(0.0, 0.1 * i as f64).exp())
            .collect();
        let ph = unwrap_phase(&samples).unwrap();
        assert!((ph.last().unwrap() - 12.5).abs() < 1e-12);
    }

    #[test]
    fn unwrap_constant_is_zero() {
        let samples = vec![Complex64::new(1.0, 0.0); 40];
        let ph = unwrap_phase(&samples).unwrap();
        assert!(ph.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn unwrap_pure_delay_phase() {
        // e^{-j h ω}, ω ∈ [0, 20π/h]: final phase −20π
        let h = 0.5;
        let n = 4000;
        let samples: Vec<Complex64> = (0..=n)
            .map(|i| {
                let w = 20.0 * PI / h * i as f64 / n as f64;
                Complex64::new(0.0, -h * w).exp()
            })
            .collect();
        let ph = unwrap_phase(&samples).unwrap();
        assert!((ph.last().unwrap() + 20.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn unwrap_rejects_big_steps() {
        let samples = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0), // step π/2
        ];
        assert!(matches!(
            unwrap_phase(&samples),
            Err(WindingError::PhaseStepTooLarge { .. })
        ));
    }

    #[test]
    fn winding_single_rhp_zero() {
        let f = DelayTransferFunction::rational(&[-1.0, 1.0], &[2.0, 1.0]).unwrap();
        assert_eq!(winding_number(&f, 10.0, &grid()).unwrap(), 1);
    }

    #[test]
    fn winding_stable_pole_only() {
        let f = DelayTransferFunction::rational(&[1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(winding_number(&f, 10.0, &grid()).unwrap(), 0);
    }

    #[test]
    fn winding_stable_retarded_quasipolynomial() {
        // (s+1) + 0.5 e^{-s}: stable; cross-checked by dense RHP mesh root
        // exclusion below.
        let num = QuasiPolynomial::from_poly(Polynomial::new(&[1.0, 1.0]))
            .add(&QuasiPolynomial::delay_factor(1.0).scale(0.5));
        let f = DelayTransferFunction::from_qp(num.clone());
        assert_eq!(winding_number(&f, 50.0, &grid()).unwrap(), 0);

        let mut min_mag = f64::INFINITY;
        for i in 0..=120 {
            for j in -120..=120i32 {
                let s = Complex64::new(50.0 * i as f64 / 120.0, 50.0 * j as f64 / 120.0);
                if s.norm() > 50.0 {
                    continue;
                }
                min_mag = min_mag.min(num.eval(s).norm());
            }
        }
        assert!(min_mag > 0.3, "dense mesh found near-zero: {min_mag}");
    }

    #[test]
    fn winding_known_rational_factorizations() {
        // 20 random rational functions with roots placed away from the
        // contour; winding must match #RHP zeros − #RHP poles exactly.
        let mut rng = StdRng::seed_from_u64(0x5eed);
        let g = grid();
        for _ in 0..20 {
            let mut num = Polynomial::constant(1.0);
            let mut den = Polynomial::constant(1.0);
            let mut zeros_rhp = 0i32;
            let mut poles_rhp = 0i32;
            for _ in 0..rng.gen_range(1..4usize) {
                let (p, rhp) = random_factor(&mut rng);
                num = num.mul(&p);
                zeros_rhp += rhp;
            }
            for _ in 0..rng.gen_range(1..4usize) {
                let (p, rhp) = random_factor(&mut rng);
                den = den.mul(&p);
                poles_rhp += rhp;
            }
            let f = DelayTransferFunction::new(
                QuasiPolynomial::from_poly(num),
                QuasiPolynomial::from_poly(den),
            )
            .unwrap();
            let w = winding_number(&f, 40.0, &g).unwrap();
            assert_eq!(w, zeros_rhp - poles_rhp);
        }
    }

    fn random_factor(rng: &mut StdRng) -> (Polynomial, i32) {
        // real root or conjugate pair, |Re| >= 0.2, |root| <= 15
        if rng.gen_bool(0.5) {
            let mag: f64 = rng.gen_range(0.3..15.0);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let r = sign * mag.max(0.2);
            (Polynomial::new(&[-r, 1.0]), if r > 0.0 { 1 } else { 0 })
        } else {
            let re = rng.gen_range(0.2..10.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let im = rng.gen_range(0.3..10.0);
            // (s - (re+j im))(s - (re-j im)) = s^2 - 2 re s + re^2+im^2
            (
                Polynomial::new(&[re * re + im * im, -2.0 * re, 1.0]),
                if re > 0.0 { 2 } else { 0 },
            )
        }
    }

    #[test]
    fn winding_product_and_inverse_laws() {
        let mut rng = StdRng::seed_from_u64(0xabcd);
        let g = grid();
        for _ in 0..8 {
            let (pa, _) = random_factor(&mut rng);
            let (pb, _) = random_factor(&mut rng);
            let (pc, _) = random_factor(&mut rng);
            let f1 = DelayTransferFunction::new(
                QuasiPolynomial::from_poly(pa.clone()),
                QuasiPolynomial::from_poly(pc.clone()),
            )
            .unwrap();
            let f2 = DelayTransferFunction::new(
                QuasiPolynomial::from_poly(pb),
                QuasiPolynomial::from_poly(pa),
            )
            .unwrap();
            let w1 = winding_number(&f1, 40.0, &g).unwrap();
            let w2 = winding_number(&f2, 40.0, &g).unwrap();
            let w12 = winding_number(&f1.mul(&f2), 40.0, &g).unwrap();
            assert_eq!(w12, w1 + w2);
            let winv = winding_number(&f1.invert().unwrap(), 40.0, &g).unwrap();
            assert_eq!(winv, -w1);
        }
    }

    #[test]
    fn crossing_profile_pure_delay() {
        let f = DelayTransferFunction::delay(1.0);
        let rep = crossing_profile(&f, 1.0, 5, &grid());
        let expect = [PI, 3.0 * PI, 5.0 * PI, 7.0 * PI, 9.0 * PI];
        assert_eq!(rep.negative_axis_crossings.len(), expect.len());
        for (got, want) in rep.negative_axis_crossings.iter().zip(expect) {
            assert!(
                (got - want).abs() <= 1e-8 * want,
                "crossing {got} vs {want}"
            );
        }
        // positive-axis crossings at 2πk
        for (got, k) in rep.positive_axis_crossings.iter().zip(1..) {
            let want = 2.0 * PI * k as f64;
            assert!((got - want).abs() <= 1e-8 * want);
        }
    }

    #[test]
    fn crossing_profile_constant_has_none() {
        let f = DelayTransferFunction::constant(1.0);
        let rep = crossing_profile(&f, 1.0, 5, &grid());
        assert!(rep.negative_axis_crossings.is_empty());
        assert!(rep.positive_axis_crossings.is_empty());
        assert_eq!(rep.matched_fraction, 1.0);
    }

    #[test]
    fn grid_invariants_rejected() {
        assert!(FrequencyGrid::new(1.0, 0.5, 64, 16).is_err());
        assert!(FrequencyGrid::new(0.1, 10.0, 8, 16).is_err());
        assert!(FrequencyGrid::new(0.1, 10.0, 64, 4).is_err());
    }

    #[test]
    fn excluded_points_keep_window_edges() {
        let g = FrequencyGrid::new(0.01, 100.0, 32, 16).unwrap();
        let e = 1.5460527;
        let pts = g.points_excluding(Some(1.0), &[e]);
        let w = exclusion_halfwidth(e);
        assert!(pts.iter().all(|&x| (x - e).abs() >= w * 0.999));
        assert!(pts.iter().any(|&x| (x - (e - w)).abs() < 1e-12));
        assert!(pts.iter().any(|&x| (x - (e + w)).abs() < 1e-12));
    }
}
