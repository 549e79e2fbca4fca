//! Synthesis of H-infinity weighted-sensitivity-optimal controllers for
//! dead-time plants, and construction of stable controllers that stay within
//! a certified bound of the optimal sensitivity.
//!
//! The pipeline has two stages. Stage 1 ([`sensopt`]) solves the scalar phase
//! equation for the optimal sensitivity level, builds the optimal controller
//! and sensitivity function, factors the controller into a bistable part and
//! an inner infinite-dimensional part, and certifies that the optimal
//! controller has unboundedly many right-half-plane poles. Stage 2
//! ([`envelope`], [`strongstab`]) bounds the resulting infinite-dimensional
//! deviation weight by a first-order envelope, solves a second phase equation
//! for the achievable deviation level, and assembles a stable controller with
//! winding-number stability certificates.
//!
//! [`quasipoly`] provides the closed algebra (polynomials with delay factors)
//! everything is expressed in; [`winding`] provides phase unwrapping, the
//! argument-principle machinery, and real-axis-crossing detection; [`youla`]
//! provides the coprime-factorization / Bezout layer for plants with
//! infinitely many unstable modes.

pub mod envelope;
pub mod quasipoly;
pub mod sensopt;
pub mod strongstab;
pub mod winding;
pub mod youla;

pub use num_complex::Complex64;
pub use quasipoly::{DelayTerm, DelayTransferFunction, Polynomial, QuasiPolynomial, TfError};
pub use winding::{CrossingReport, FrequencyGrid, WindingError};

pub use envelope::{EnvelopeError, EnvelopeWeight};
pub use sensopt::{OptimalSensitivityResult, PlantSpec, SensoptError, WeightSpec};
pub use strongstab::{DeviationSolveResult, StabilityReport, Stage2Params, StrongstabError};
pub use youla::{BezoutSolution, CoprimeFactorization, FotProblemData, YoulaError};
