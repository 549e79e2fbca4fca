//! Quasi-polynomial algebra: real polynomials combined with delay factors
//! `e^{-hs}`, and ratios of such sums.
//!
//! A [`QuasiPolynomial`] is a finite sum `Σ_k p_k(s)·e^{-h_k s}` with real
//! polynomial coefficients and delays `h_k ≥ 0`. The class is closed under
//! addition and multiplication, which is what lets every transfer function in
//! the synthesis pipeline be cleared into a [`DelayTransferFunction`]
//! (a ratio of two quasi-polynomials) without leaving the representation.

use num_complex::Complex64;
use thiserror::Error;

/// Relative tolerance for treating two delays as equal when merging terms.
const DELAY_MERGE_TOL: f64 = 1e-12;

/// Errors from transfer-function algebra.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TfError {
    /// `reflect` (the substitution `s -> -s`) was requested on a function
    /// containing a nonzero delay term; `e^{+hs}` leaves the representable
    /// class.
    #[error("reflect requested on a function with a nonzero delay term")]
    ReflectOnDelayed,
    /// A denominator was the zero quasi-polynomial.
    #[error("zero quasi-polynomial denominator")]
    ZeroDenominator,
}

/// Real-coefficient polynomial, coefficients in ascending degree order.
///
/// The representation is trimmed: the leading coefficient is nonzero unless
/// the polynomial is the zero polynomial (a single `0.0` entry).
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: &[f64]) -> Self {
        let mut p = Self {
            coeffs: coeffs.to_vec(),
        };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(&[c])
    }

    /// The monomial `s`.
    pub fn s() -> Self {
        Self::new(&[0.0, 1.0])
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == 0.0 {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(0.0);
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading_coeff(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * s + c;
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        Self::new(&out)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(&out)
    }

    pub fn neg(&self) -> Self {
        Self::new(&self.coeffs.iter().map(|c| -c).collect::<Vec<_>>())
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(&self.coeffs.iter().map(|c| k * c).collect::<Vec<_>>())
    }

    /// Coefficient sign flip on odd powers, realizing `p(s) -> p(-s)`.
    pub fn reflect(&self) -> Self {
        Self::new(
            &self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| if i % 2 == 1 { -c } else { c })
                .collect::<Vec<_>>(),
        )
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero();
        }
        Self::new(
            &self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| i as f64 * c)
                .collect::<Vec<_>>(),
        )
    }

    /// Cauchy bound on root magnitudes: `1 + max_i |a_i / a_n|`.
    pub fn cauchy_root_bound(&self) -> f64 {
        if self.degree() == 0 {
            return 0.0;
        }
        let lead = self.leading_coeff().abs();
        let m = self.coeffs[..self.coeffs.len() - 1]
            .iter()
            .fold(0.0f64, |acc, c| acc.max(c.abs()));
        1.0 + m / lead
    }
}

/// One summand of a quasi-polynomial: `poly(s)·e^{-delay·s}` with `delay ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayTerm {
    pub poly: Polynomial,
    pub delay: f64,
}

/// Finite sum of polynomials, each multiplied by a decaying delay factor.
///
/// Invariant after construction: delays sorted strictly ascending (near-equal
/// delays merged) and no zero polynomial terms.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiPolynomial {
    terms: Vec<DelayTerm>,
}

impl QuasiPolynomial {
    /// Builds and normalizes. Negative delays are not representable; callers
    /// construct delays from physical plant data so this is asserted.
    pub fn new(terms: Vec<DelayTerm>) -> Self {
        for t in &terms {
            assert!(t.delay >= 0.0, "delay must be nonnegative");
        }
        let mut qp = Self { terms };
        qp.normalize();
        qp
    }

    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_poly(Polynomial::constant(c))
    }

    pub fn from_poly(p: Polynomial) -> Self {
        Self::new(vec![DelayTerm { poly: p, delay: 0.0 }])
    }

    /// The pure delay factor `e^{-hs}`.
    pub fn delay_factor(h: f64) -> Self {
        Self::new(vec![DelayTerm {
            poly: Polynomial::constant(1.0),
            delay: h,
        }])
    }

    /// `p(s)·e^{-hs}`.
    pub fn delayed_poly(p: Polynomial, h: f64) -> Self {
        Self::new(vec![DelayTerm { poly: p, delay: h }])
    }

    fn normalize(&mut self) {
        self.terms.retain(|t| !t.poly.is_zero());
        self.terms
            .sort_by(|a, b| a.delay.partial_cmp(&b.delay).unwrap());
        let mut merged: Vec<DelayTerm> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last)
                    if (t.delay - last.delay).abs()
                        < DELAY_MERGE_TOL * last.delay.max(1.0) =>
                {
                    last.poly = last.poly.add(&t.poly);
                }
                _ => merged.push(t),
            }
        }
        merged.retain(|t| !t.poly.is_zero());
        self.terms = merged;
    }

    pub fn terms(&self) -> &[DelayTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_delay(&self) -> f64 {
        self.terms.last().map_or(0.0, |t| t.delay)
    }

    /// The delay-free polynomial part, if present.
    pub fn delay_zero_poly(&self) -> Option<&Polynomial> {
        self.terms
            .first()
            .filter(|t| t.delay == 0.0)
            .map(|t| &t.poly)
    }

    /// Whether every term is delay-free, i.e. the sum is a plain polynomial.
    pub fn is_rational(&self) -> bool {
        self.terms.iter().all(|t| t.delay == 0.0)
    }

    /// `Σ_k p_k(s)·e^{-h_k s}` with Horner recursion inside each term.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            acc += t.poly.eval(s) * (-t.delay * s).exp();
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::new(terms)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(DelayTerm {
                    poly: a.poly.mul(&b.poly),
                    delay: a.delay + b.delay,
                });
            }
        }
        Self::new(terms)
    }

    pub fn neg(&self) -> Self {
        Self::new(
            self.terms
                .iter()
                .map(|t| DelayTerm {
                    poly: t.poly.neg(),
                    delay: t.delay,
                })
                .collect(),
        )
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(
            self.terms
                .iter()
                .map(|t| DelayTerm {
                    poly: t.poly.scale(k),
                    delay: t.delay,
                })
                .collect(),
        )
    }

    /// Term-wise derivative: `(p e^{-hs})' = (p' - h p) e^{-hs}`.
    pub fn derivative(&self) -> Self {
        Self::new(
            self.terms
                .iter()
                .map(|t| DelayTerm {
                    poly: t.poly.derivative().add(&t.poly.scale(-t.delay)),
                    delay: t.delay,
                })
                .collect(),
        )
    }
}

/// Ratio of two quasi-polynomials; the common carrier for every transfer
/// function in the pipeline (C_opt, S_opt, N_c, D_c, the stage-2 pieces, F
/// and the final controller).
#[derive(Debug, Clone, PartialEq)]
pub struct DelayTransferFunction {
    num: QuasiPolynomial,
    den: QuasiPolynomial,
}

impl DelayTransferFunction {
    pub fn new(num: QuasiPolynomial, den: QuasiPolynomial) -> Result<Self, TfError> {
        if den.is_zero() {
            return Err(TfError::ZeroDenominator);
        }
        Ok(Self { num, den })
    }

    pub fn constant(c: f64) -> Self {
        Self {
            num: QuasiPolynomial::constant(c),
            den: QuasiPolynomial::constant(1.0),
        }
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    /// Rational function from ascending coefficient lists.
    pub fn rational(num: &[f64], den: &[f64]) -> Result<Self, TfError> {
        Self::new(
            QuasiPolynomial::from_poly(Polynomial::new(num)),
            QuasiPolynomial::from_poly(Polynomial::new(den)),
        )
    }

    /// The plant delay factor `e^{-hs}` as a transfer function.
    pub fn delay(h: f64) -> Self {
        Self {
            num: QuasiPolynomial::delay_factor(h),
            den: QuasiPolynomial::constant(1.0),
        }
    }

    pub fn from_qp(num: QuasiPolynomial) -> Self {
        Self {
            num,
            den: QuasiPolynomial::constant(1.0),
        }
    }

    pub fn num(&self) -> &QuasiPolynomial {
        &self.num
    }

    pub fn den(&self) -> &QuasiPolynomial {
        &self.den
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.num.eval(s) / self.den.eval(s)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            num: self
                .num
                .mul(&other.den)
                .add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn invert(&self) -> Result<Self, TfError> {
        if self.num.is_zero() {
            return Err(TfError::ZeroDenominator);
        }
        Ok(Self {
            num: self.den.clone(),
            den: self.num.clone(),
        })
    }

    /// The substitution `s -> -s`. Only defined for rational functions:
    /// a delayed term would map to `e^{+hs}`, which is outside the class.
    pub fn reflect(&self) -> Result<Self, TfError> {
        if !self.num.is_rational() || !self.den.is_rational() {
            return Err(TfError::ReflectOnDelayed);
        }
        let refl = |qp: &QuasiPolynomial| {
            QuasiPolynomial::from_poly(
                qp.delay_zero_poly()
                    .cloned()
                    .unwrap_or_else(Polynomial::zero)
                    .reflect(),
            )
        };
        Self::new(refl(&self.num), refl(&self.den))
    }
}
