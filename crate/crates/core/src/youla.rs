//! Coprime factorization and controller parameterization for "plants" with
//! infinitely many unstable modes.
//!
//! The plant is written `P_C = N/M` with `M` inner and infinite-dimensional
//! (its right-half-plane zeros are the unstable poles of `P_C`),
//! `N = N_i·N_o` with `N_i` rational inner and `N_o` bistable. A Bezout pair
//! `N·X + M·Y = 1` is produced by Lagrange interpolation at the finitely many
//! right-half-plane zeros of `N_i`: `Y` is a proper rational function with
//! `Y(z_i) = 1/M(z_i)`, and `X = (1−MY)/N` has removable singularities at the
//! `z_i`, certified numerically. All stabilizing controllers are then
//! `C_F = (X+MQ)/(Y−NQ)` over stable `Q`, and the two-block objective of the
//! deviation problem is evaluated on a frequency grid.

use crate::quasipoly::{DelayTransferFunction, Polynomial, QuasiPolynomial};
use crate::winding::{default_contour_radius, winding_number, FrequencyGrid, WindingError};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum YoulaError {
    #[error("interpolation nodes too clustered: condition estimate {estimate:.3e} exceeds 1e12")]
    InterpolationIllConditioned { estimate: f64 },
    #[error("interpolation nodes are not closed under conjugation")]
    NotConjugateSymmetric,
    #[error("Y - N Q is numerically zero on the verification grid (sup {sup:.3e})")]
    DegenerateDenominator { sup: f64 },
    #[error("invalid factorization: {0}")]
    InvalidFactorization(String),
    #[error(transparent)]
    Winding(#[from] WindingError),
}

/// `P_C = (N_i·N_o)/M` with `M` inner infinite-dimensional, `N_i` rational
/// inner with the listed distinct right-half-plane zeros, `N_o` bistable.
#[derive(Debug, Clone)]
pub struct CoprimeFactorization {
    pub m_inner: DelayTransferFunction,
    pub n_inner: DelayTransferFunction,
    pub n_outer: DelayTransferFunction,
    pub rhp_zeros: Vec<Complex64>,
}

impl CoprimeFactorization {
    /// Validates the pieces: unit modulus of `M` and `N_i` on the grid to
    /// 1e-9, Hurwitz biproper `N_o`, distinct conjugate-closed `z_i` with
    /// positive real part and `N_i(z_i) = 0` to 1e-10.
    pub fn new(
        m_inner: DelayTransferFunction,
        n_inner: DelayTransferFunction,
        n_outer: DelayTransferFunction,
        rhp_zeros: Vec<Complex64>,
        grid: &FrequencyGrid,
    ) -> Result<Self, YoulaError> {
        check_conjugate_closed(&rhp_zeros)?;
        for (i, z) in rhp_zeros.iter().enumerate() {
            if z.re <= 0.0 {
                return Err(YoulaError::InvalidFactorization(format!(
                    "z_{i} = {z} has nonpositive real part"
                )));
            }
            for (j, z2) in rhp_zeros.iter().enumerate() {
                if i < j && (z - z2).norm() < 1e-9 * z.norm().max(1.0) {
                    return Err(YoulaError::InvalidFactorization(format!(
                        "z_{i} and z_{j} coincide"
                    )));
                }
            }
            let v = n_inner.eval(*z).norm();
            if v > 1e-10 {
                return Err(YoulaError::InvalidFactorization(format!(
                    "N_i(z_{i}) = {v:.3e}, expected 0"
                )));
            }
        }
        let delay = m_inner.num().max_delay().max(m_inner.den().max_delay());
        for &omega in grid.points(Some(delay)).iter() {
            let s = Complex64::new(0.0, omega);
            for (name, f) in [("M", &m_inner), ("N_i", &n_inner)] {
                let m = f.eval(s).norm();
                if (m - 1.0).abs() > 1e-9 {
                    return Err(YoulaError::InvalidFactorization(format!(
                        "|{name}(j{omega})| = {m}, expected 1"
                    )));
                }
            }
        }
        for (name, qp) in [("numerator", n_outer.num()), ("denominator", n_outer.den())] {
            let p = qp.delay_zero_poly().ok_or_else(|| {
                YoulaError::InvalidFactorization(format!("N_o {name} must be rational"))
            })?;
            if p.degree() == 0 {
                continue;
            }
            let f = DelayTransferFunction::from_qp(QuasiPolynomial::from_poly(p.clone()));
            let radius = default_contour_radius(&f);
            let w = winding_number(&f, radius, grid)?;
            if w != 0 {
                return Err(YoulaError::InvalidFactorization(format!(
                    "N_o {name} has {w} right-half-plane roots"
                )));
            }
        }
        Ok(Self {
            m_inner,
            n_inner,
            n_outer,
            rhp_zeros,
        })
    }

    /// Builds the rational inner factor `Π (s−z_i)/(s+z̄_i)` for a
    /// conjugate-closed node set (real coefficients).
    pub fn blaschke(zeros: &[Complex64]) -> Result<DelayTransferFunction, YoulaError> {
        check_conjugate_closed(zeros)?;
        let num = real_poly_from_roots(zeros)?;
        let den = real_poly_from_roots(&zeros.iter().map(|z| -z.conj()).collect::<Vec<_>>())?;
        Ok(DelayTransferFunction::new(
            QuasiPolynomial::from_poly(num),
            QuasiPolynomial::from_poly(den),
        )
        .unwrap())
    }

    pub fn n_full(&self) -> DelayTransferFunction {
        self.n_inner.mul(&self.n_outer)
    }
}

fn check_conjugate_closed(zs: &[Complex64]) -> Result<(), YoulaError> {
    for z in zs {
        if z.im.abs() < 1e-12 {
            continue;
        }
        let found = zs
            .iter()
            .any(|w| (w - z.conj()).norm() < 1e-9 * z.norm().max(1.0));
        if !found {
            return Err(YoulaError::NotConjugateSymmetric);
        }
    }
    Ok(())
}

fn real_poly_from_roots(roots: &[Complex64]) -> Result<Polynomial, YoulaError> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (i, &cf) in coeffs.iter().enumerate() {
            next[i] -= cf * r;
            next[i + 1] += cf;
        }
        coeffs = next;
    }
    let scale = coeffs.iter().map(|cf| cf.norm()).fold(0.0f64, f64::max);
    let mut out = Vec::with_capacity(coeffs.len());
    for cf in &coeffs {
        if cf.im.abs() > 1e-9 * scale.max(1.0) {
            return Err(YoulaError::NotConjugateSymmetric);
        }
        out.push(cf.re);
    }
    Ok(Polynomial::new(&out))
}

/// A Bezout pair `N X + M Y = 1` with the achieved residual on the
/// verification grid.
#[derive(Debug, Clone)]
pub struct BezoutSolution {
    pub x_tf: DelayTransferFunction,
    pub y_tf: DelayTransferFunction,
    pub residual_sup: f64,
}

/// Solves the Bezout equation by Lagrange interpolation.
///
/// `Y(s) = p(s)/(1+τs)^{max(n−1,0)}` where `p` is the unique degree-(n−1)
/// polynomial with `p(z_i) = (1+τz_i)^{n−1}/M(z_i)` (so `Y(z_i) = 1/M(z_i)`);
/// a bare polynomial would be unbounded on the right half plane, hence the
/// proper rational realization. `X = (1−MY)/N` has removable singularities at
/// the `z_i`, certified by `|1−M(z_i)Y(z_i)| < 1e-9` and boundedness of `X`
/// on a right-half-plane mesh. For `n = 0`, `Y = 1` and `X = (1−M)/N`.
pub fn solve_bezout(
    fact: &CoprimeFactorization,
    tau: f64,
    grid: &FrequencyGrid,
) -> Result<BezoutSolution, YoulaError> {
    let zs = &fact.rhp_zeros;
    let n = zs.len();
    check_conjugate_closed(zs)?;

    let y_tf = if n == 0 {
        DelayTransferFunction::one()
    } else {
        // condition estimate for the node set
        let mut estimate = 0.0f64;
        for (i, zi) in zs.iter().enumerate() {
            let mut prod = 1.0f64;
            for (j, zj) in zs.iter().enumerate() {
                if i != j {
                    prod *= (1.0 + zi.norm() + zj.norm()) / (zi - zj).norm();
                }
            }
            estimate = estimate.max(prod);
        }
        if estimate > 1e12 {
            return Err(YoulaError::InterpolationIllConditioned { estimate });
        }

        // Lagrange coefficients of p with p(z_i) = (1+tau z_i)^{n-1}/M(z_i)
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for (i, zi) in zs.iter().enumerate() {
            let target = (Complex64::new(1.0, 0.0) + tau * zi).powu((n - 1) as u32)
                / fact.m_inner.eval(*zi);
            // basis polynomial Π_{j≠i} (s - z_j)/(z_i - z_j)
            let mut basis = vec![Complex64::new(1.0, 0.0)];
            let mut denom = Complex64::new(1.0, 0.0);
            for (j, zj) in zs.iter().enumerate() {
                if j == i {
                    continue;
                }
                let mut next = vec![Complex64::new(0.0, 0.0); basis.len() + 1];
                for (k, &cf) in basis.iter().enumerate() {
                    next[k] -= cf * zj;
                    next[k + 1] += cf;
                }
                basis = next;
                denom *= zi - zj;
            }
            for (k, cf) in basis.iter().enumerate() {
                coeffs[k] += target * cf / denom;
            }
        }
        let scale = coeffs.iter().map(|cf| cf.norm()).fold(1.0f64, f64::max);
        let mut real_coeffs = Vec::with_capacity(n);
        for cf in &coeffs {
            if cf.im.abs() > 1e-9 * scale {
                return Err(YoulaError::NotConjugateSymmetric);
            }
            real_coeffs.push(cf.re);
        }
        // denominator (1 + tau s)^{n-1}
        let mut den = Polynomial::constant(1.0);
        for _ in 0..n - 1 {
            den = den.mul(&Polynomial::new(&[1.0, tau]));
        }
        DelayTransferFunction::new(
            QuasiPolynomial::from_poly(Polynomial::new(&real_coeffs)),
            QuasiPolynomial::from_poly(den),
        )
        .unwrap()
    };

    // X = (1 - M Y)/N
    let n_full = fact.n_full();
    let x_tf = DelayTransferFunction::one()
        .sub(&fact.m_inner.mul(&y_tf))
        .mul(&n_full.invert().map_err(|_| {
            YoulaError::InvalidFactorization("N is identically zero".into())
        })?);

    // removable-singularity certificates at the z_i
    for (i, zi) in zs.iter().enumerate() {
        let resid = (Complex64::new(1.0, 0.0) - fact.m_inner.eval(*zi) * y_tf.eval(*zi)).norm();
        if resid > 1e-9 {
            return Err(YoulaError::InvalidFactorization(format!(
                "|1 - M(z_{i}) Y(z_{i})| = {resid:.3e}, interpolation failed"
            )));
        }
    }

    // Bezout residual on the axis grid
    let delay = fact.m_inner.num().max_delay() + fact.m_inner.den().max_delay();
    let mut residual_sup = 0.0f64;
    let mut x_axis_sup = 0.0f64;
    for &omega in grid.points(Some(delay)).iter() {
        let s = Complex64::new(0.0, omega);
        let r = (n_full.eval(s) * x_tf.eval(s) + fact.m_inner.eval(s) * y_tf.eval(s)
            - Complex64::new(1.0, 0.0))
        .norm();
        residual_sup = residual_sup.max(r);
        x_axis_sup = x_axis_sup.max(x_tf.eval(s).norm());
    }
    if residual_sup > 1e-9 {
        return Err(YoulaError::InvalidFactorization(format!(
            "Bezout residual sup {residual_sup:.3e} exceeds 1e-9"
        )));
    }

    // boundedness of X on an interior mesh (max-modulus cushion 1.1), with
    // rings around each z_i where the cancellation matters most
    let r_mesh = 0.8 * grid.omega_max.max(10.0);
    let mut interior_max = 0.0f64;
    for i in 1..=24 {
        for j in -24..=24i32 {
            let s = Complex64::new(
                r_mesh * i as f64 / 24.0,
                r_mesh * j as f64 / 24.0,
            );
            interior_max = interior_max.max(x_tf.eval(s).norm());
        }
    }
    for zi in zs {
        for k in 0..16 {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 16.0;
            let s = zi + 1e-3 * zi.norm() * Complex64::new(theta.cos(), theta.sin());
            interior_max = interior_max.max(x_tf.eval(s).norm());
        }
    }
    if interior_max > 1.1 * x_axis_sup.max(1.0) {
        return Err(YoulaError::InvalidFactorization(format!(
            "X unbounded on the right half plane: interior max {interior_max:.3e} vs axis sup {x_axis_sup:.3e}"
        )));
    }

    Ok(BezoutSolution {
        x_tf,
        y_tf,
        residual_sup,
    })
}

/// Default interpolation time constant `τ = 1/max|z_i|` (1 when there are no
/// nodes).
pub fn default_tau(rhp_zeros: &[Complex64]) -> f64 {
    let m = rhp_zeros.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    if m > 0.0 {
        1.0 / m
    } else {
        1.0
    }
}

/// All stabilizing controllers: `C_F = (X + M Q)/(Y − N Q)` over stable `Q`.
pub fn parameterize_controller(
    fact: &CoprimeFactorization,
    bezout: &BezoutSolution,
    q: &DelayTransferFunction,
    grid: &FrequencyGrid,
) -> Result<DelayTransferFunction, YoulaError> {
    let n_full = fact.n_full();
    let den = bezout.y_tf.sub(&n_full.mul(q));
    let delay = fact.m_inner.num().max_delay() + fact.m_inner.den().max_delay();
    let sup = grid
        .points(Some(delay))
        .iter()
        .map(|&w| den.eval(Complex64::new(0.0, w)).norm())
        .fold(0.0f64, f64::max);
    if sup < 1e-12 {
        return Err(YoulaError::DegenerateDenominator { sup });
    }
    let num = bezout.x_tf.add(&fact.m_inner.mul(q));
    Ok(num.mul(&den.invert().unwrap()))
}

/// Sup over the grid of the stacked two-block magnitude
/// `sqrt(|W₁(Y−N_iQ₁)|² + |W₂(1−M(Y−N_iQ₁))|²)` at `s = jω`.
pub fn two_block_objective(
    fact: &CoprimeFactorization,
    bezout: &BezoutSolution,
    w1: &DelayTransferFunction,
    w2: &DelayTransferFunction,
    q1: &DelayTransferFunction,
    grid: &FrequencyGrid,
) -> f64 {
    let delay = fact.m_inner.num().max_delay() + fact.m_inner.den().max_delay();
    let mut sup = 0.0f64;
    for &omega in grid.points(Some(delay)).iter() {
        let s = Complex64::new(0.0, omega);
        let inner = bezout.y_tf.eval(s) - fact.n_inner.eval(s) * q1.eval(s);
        let top = (w1.eval(s) * inner).norm();
        let bottom =
            (w2.eval(s) * (Complex64::new(1.0, 0.0) - fact.m_inner.eval(s) * inner)).norm();
        sup = sup.max((top * top + bottom * bottom).sqrt());
    }
    sup
}

/// Stacked value of the pre-reduction form
/// `sqrt(|W₁(Y−NQ)|² + |W₂·N(X+MQ)|²)`; equals [`two_block_objective`] with
/// `Q₁ = N_o·Q`.
pub fn two_block_objective_unreduced(
    fact: &CoprimeFactorization,
    bezout: &BezoutSolution,
    w1: &DelayTransferFunction,
    w2: &DelayTransferFunction,
    q: &DelayTransferFunction,
    grid: &FrequencyGrid,
) -> f64 {
    let n_full = fact.n_full();
    let delay = fact.m_inner.num().max_delay() + fact.m_inner.den().max_delay();
    let mut sup = 0.0f64;
    for &omega in grid.points(Some(delay)).iter() {
        let s = Complex64::new(0.0, omega);
        let top = (w1.eval(s) * (bezout.y_tf.eval(s) - n_full.eval(s) * q.eval(s))).norm();
        let bottom = (w2.eval(s)
            * n_full.eval(s)
            * (bezout.x_tf.eval(s) + fact.m_inner.eval(s) * q.eval(s)))
        .norm();
        sup = sup.max((top * top + bottom * bottom).sqrt());
    }
    sup
}

/// Problem data after the variable swap used to reuse machinery developed for
/// plants with finitely many unstable modes: weights exchanged, `X ↦ Y`, and
/// the inner factors reassigned.
#[derive(Debug, Clone)]
pub struct FotProblemData {
    pub w1_fot: DelayTransferFunction,
    pub w2_fot: DelayTransferFunction,
    pub x_fot: DelayTransferFunction,
    pub md_fot: DelayTransferFunction,
    pub mn_fot: DelayTransferFunction,
    pub no_fot: DelayTransferFunction,
}

pub fn map_to_fot(
    w1: &DelayTransferFunction,
    w2: &DelayTransferFunction,
    bezout: &BezoutSolution,
    fact: &CoprimeFactorization,
) -> FotProblemData {
    FotProblemData {
        w1_fot: w2.clone(),
        w2_fot: w1.clone(),
        x_fot: bezout.y_tf.clone(),
        md_fot: fact.n_inner.clone(),
        mn_fot: fact.m_inner.clone(),
        no_fot: fact.n_outer.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn grid() -> FrequencyGrid {
        FrequencyGrid {
            omega_min: 1e-3,
            omega_max: 1e3,
            points_per_decade: 32,
            extra_linear_points_per_delay_period: 16,
        }
    }

    fn example_factorization() -> CoprimeFactorization {
        // M = e^{-s}, N_i = (s-1)/(s+1), N_o = 1, z_1 = 1
        CoprimeFactorization::new(
            DelayTransferFunction::delay(1.0),
            DelayTransferFunction::rational(&[-1.0, 1.0], &[1.0, 1.0]).unwrap(),
            DelayTransferFunction::one(),
            vec![Complex64::new(1.0, 0.0)],
            &grid(),
        )
        .unwrap()
    }

    #[test]
    fn single_real_node_gives_constant_y() {
        let fact = example_factorization();
        let bez = solve_bezout(&fact, default_tau(&fact.rhp_zeros), &grid()).unwrap();
        // Y = 1/M(1) = e^1
        let y = bez.y_tf.eval(Complex64::new(0.3, 0.2));
        assert!((y.re - 1f64.exp()).abs() < 1e-12 && y.im.abs() < 1e-12);
        assert!(bez.residual_sup < 1e-9);
        // N(1) X(1) finite
        let v = (fact.n_full().eval(Complex64::new(1.0, 0.0))
            * bez.x_tf.eval(Complex64::new(1.0 + 1e-7, 0.0)))
        .norm();
        assert!(v.is_finite());
    }

    #[test]
    fn interpolation_hits_reciprocal_of_m() {
        let fact = example_factorization();
        let bez = solve_bezout(&fact, default_tau(&fact.rhp_zeros), &grid()).unwrap();
        for z in &fact.rhp_zeros {
            let err = (bez.y_tf.eval(*z) - fact.m_inner.eval(*z).inv()).norm();
            assert!(err < 1e-10);
        }
    }

    fn random_instance(rng: &mut StdRng) -> CoprimeFactorization {
        // distinct conjugate-closed z_i, |z_i| in [0.5, 5], n <= 4
        let mut zeros: Vec<Complex64> = Vec::new();
        loop {
            let n_pairs = rng.gen_range(0..=2usize);
            let n_real = rng.gen_range(0..=(4 - 2 * n_pairs));
            zeros.clear();
            for _ in 0..n_pairs {
                let re = rng.gen_range(0.5..3.0);
                let im = rng.gen_range(0.5..4.0);
                zeros.push(Complex64::new(re, im));
                zeros.push(Complex64::new(re, -im));
            }
            for _ in 0..n_real {
                zeros.push(Complex64::new(rng.gen_range(0.5..5.0), 0.0));
            }
            if !zeros.is_empty() {
                break;
            }
        }
        let n_inner = CoprimeFactorization::blaschke(&zeros).unwrap();
        // bistable N_o = (s + a)/(s + b)
        let (a, b) = (rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0));
        let n_outer = DelayTransferFunction::rational(&[a, 1.0], &[b, 1.0]).unwrap();
        CoprimeFactorization::new(
            DelayTransferFunction::delay(rng.gen_range(0.3..1.5)),
            n_inner,
            n_outer,
            zeros,
            &grid(),
        )
        .unwrap()
    }

    fn random_stable_q(rng: &mut StdRng) -> DelayTransferFunction {
        let p1 = rng.gen_range(0.3..3.0);
        let p2 = rng.gen_range(0.3..3.0);
        let num: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        DelayTransferFunction::rational(&num, &[p1 * p2, p1 + p2, 1.0]).unwrap()
    }

    #[test]
    fn randomized_bezout_residuals() {
        let mut rng = StdRng::seed_from_u64(0xbe20);
        for _ in 0..5 {
            let fact = random_instance(&mut rng);
            let bez = solve_bezout(&fact, default_tau(&fact.rhp_zeros), &grid()).unwrap();
            assert!(bez.residual_sup < 1e-9, "residual {}", bez.residual_sup);
        }
    }

    #[test]
    fn closed_loop_identities_for_random_q() {
        let mut rng = StdRng::seed_from_u64(0xc10c);
        let fact = example_factorization();
        let bez = solve_bezout(&fact, default_tau(&fact.rhp_zeros), &grid()).unwrap();
        let n_full = fact.n_full();
        let p_c = n_full.mul(&fact.m_inner.invert().unwrap());
        for _ in 0..10 {
            let q = random_stable_q(&mut rng);
            let c_f = parameterize_controller(&fact, &bez, &q, &grid()).unwrap();
            for k in 0..25 {
                let s = Complex64::new(0.0, 0.1 * (k as f64 + 0.5) * 1.45);
                let pc = p_c.eval(s);
                let cf = c_f.eval(s);
                let inv = (Complex64::new(1.0, 0.0) + pc * cf).inv();
                let lhs1 = inv;
                let rhs1 = fact.m_inner.eval(s)
                    * (bez.y_tf.eval(s) - n_full.eval(s) * q.eval(s));
                assert!(
                    (lhs1 - rhs1).norm() <= 1e-8 * rhs1.norm().max(1.0),
                    "sensitivity identity at {s}"
                );
                let lhs2 = pc * cf * inv;
                let rhs2 = n_full.eval(s)
                    * (bez.x_tf.eval(s) + fact.m_inner.eval(s) * q.eval(s));
                assert!(
                    (lhs2 - rhs2).norm() <= 1e-8 * rhs2.norm().max(1.0),
                    "complementary identity at {s}"
                );
            }
        }
    }

    #[test]
    fn q_zero_recovers_central_controller() {
        let fact = example_factorization();
        let bez = solve_bezout(&fact, default_tau(&fact.rhp_zeros), &grid()).unwrap();
        let q = DelayTransferFunction::constant(0.0);
        let c_f = parameterize_controller(&fact, &bez, &q, &grid()).unwrap();
        let direct = bez.x_tf.mul(&bez.y_tf.invert().unwrap());
        for k in 1..20 {
            let s = Complex64::new(0.0, 0.37 * k as f64);
            let (u, v) = (c_f.eval(s), direct.eval(s));
            assert!((u - v).norm() <= 1e-10 * v.norm().max(1.0));
        }
    }

    #[test]
    fn objective_reductions() {
        let mut rng = StdRng::seed_from_u64(0x0b1e);
        let fact = example_factorization();
        let bez = solve_bezout(&fact, default_tau(&fact.rhp_zeros), &grid()).unwrap();
        let w1 = DelayTransferFunction::rational(&[1.0, 0.5], &[2.0, 1.0]).unwrap();
        let w2 = DelayTransferFunction::rational(&[0.3, 1.0], &[1.0, 2.0]).unwrap();
        let zero = DelayTransferFunction::constant(0.0);
        let q1 = random_stable_q(&mut rng);

        // W2 = 0: one-block finite-dimensional value
        let v = two_block_objective(&fact, &bez, &w1, &zero, &q1, &grid());
        let mut expect = 0.0f64;
        for &w in grid().points(Some(1.0)).iter() {
            let s = Complex64::new(0.0, w);
            expect = expect.max(
                (w1.eval(s) * (bez.y_tf.eval(s) - fact.n_inner.eval(s) * q1.eval(s))).norm(),
            );
        }
        assert!((v - expect).abs() <= 1e-12 * expect.max(1.0));

        // W1 = 0: one-block infinite-dimensional value
        let v = two_block_objective(&fact, &bez, &zero, &w2, &q1, &grid());
        let mut expect = 0.0f64;
        for &w in grid().points(Some(1.0)).iter() {
            let s = Complex64::new(0.0, w);
            let inner = bez.y_tf.eval(s) - fact.n_inner.eval(s) * q1.eval(s);
            expect = expect.max(
                (w2.eval(s) * (Complex64::new(1.0, 0.0) - fact.m_inner.eval(s) * inner)).norm(),
            );
        }
        assert!((v - expect).abs() <= 1e-12 * expect.max(1.0));
    }

    #[test]
    fn equivalence_of_reduced_and_unreduced_objectives() {
        let mut rng = StdRng::seed_from_u64(0x6a11);
        for _ in 0..4 {
            let fact = random_instance(&mut rng);
            let bez = solve_bezout(&fact, default_tau(&fact.rhp_zeros), &grid()).unwrap();
            let w1 = DelayTransferFunction::rational(&[1.0, 0.5], &[2.0, 1.0]).unwrap();
            let w2 = DelayTransferFunction::rational(&[0.3, 1.0], &[1.0, 2.0]).unwrap();
            let q = random_stable_q(&mut rng);
            let q1 = fact.n_outer.mul(&q);
            let a = two_block_objective_unreduced(&fact, &bez, &w1, &w2, &q, &grid());
            let b = two_block_objective(&fact, &bez, &w1, &w2, &q1, &grid());
            assert!(
                (a - b).abs() <= 1e-8 * b.max(1.0),
                "objective mismatch {a} vs {b}"
            );
        }
    }

    #[test]
    fn fot_mapping_swaps_and_assigns() {
        let fact = example_factorization();
        let bez = solve_bezout(&fact, default_tau(&fact.rhp_zeros), &grid()).unwrap();
        let w1 = DelayTransferFunction::rational(&[1.0, 0.5], &[2.0, 1.0]).unwrap();
        let w2 = DelayTransferFunction::rational(&[0.3, 1.0], &[1.0, 2.0]).unwrap();
        let m = map_to_fot(&w1, &w2, &bez, &fact);
        assert_eq!(m.w1_fot, w2);
        assert_eq!(m.w2_fot, w1);
        assert_eq!(m.md_fot, fact.n_inner);
        assert_eq!(m.mn_fot, fact.m_inner);
        // applying the swap twice restores the weights
        let m2 = map_to_fot(&m.w1_fot, &m.w2_fot, &bez, &fact);
        assert_eq!(m2.w1_fot, w1);
        assert_eq!(m2.w2_fot, w2);
    }

    #[test]
    fn conjugate_asymmetry_rejected() {
        let zeros = vec![Complex64::new(1.0, 1.0)];
        assert!(matches!(
            CoprimeFactorization::blaschke(&zeros),
            Err(YoulaError::NotConjugateSymmetric)
        ));
    }
}
