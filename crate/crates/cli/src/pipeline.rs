//! Staged synthesis driver: stage 1 → factorization → envelope → stage 2 →
//! certification, collecting per-check certificates with numeric margins.

use crate::spec_file::{Alpha1, ValidatedSpec};
use hinfdelay::envelope::{build_envelope, check_dominance, dominance_ok, select_alpha1};
use hinfdelay::sensopt::{
    build_c_opt, build_d_c, build_n_c, eval_s_opt, phase_lhs, remark_functions, solve_gamma_opt,
};
use hinfdelay::strongstab::{self, phase_lhs2, solve_gamma2, Stage2Params};
use hinfdelay::winding::{
    crossing_profile, default_contour_radius, winding_number_excluding, winding_number_fn,
};
use hinfdelay::{DelayTransferFunction, EnvelopeWeight, OptimalSensitivityResult};
use hinfdelay::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CertStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub name: String,
    pub status: CertStatus,
    /// Positive margin means the check passed with room to spare; the exact
    /// meaning is check-specific (tolerance minus residual, or a signed
    /// slack). Zero for skipped checks.
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EncirclementSummary {
    pub negative_crossings: usize,
    pub positive_crossings: usize,
    pub matched_fraction: f64,
    pub k_max: usize,
}

#[derive(Debug, Serialize)]
pub struct SynthesisReport {
    pub gamma_opt: Option<f64>,
    pub omega_gamma: Option<f64>,
    pub gamma2_opt: Option<f64>,
    pub omega_star: Option<f64>,
    pub kappa: Option<f64>,
    pub alpha1: Option<f64>,
    pub beta1: Option<f64>,
    pub achieved_deviation: Option<f64>,
    pub suff_cond_margin: Option<f64>,
    pub k_rhp_poles: Option<i32>,
    pub closed_loop_rhp_zeros: Option<i32>,
    pub encirclement_summary: Option<EncirclementSummary>,
    pub k_variant: String,
    pub certificates: Vec<Certificate>,
    pub wall_time_seconds: f64,
}

/// Everything the driver produced, for the trace writer.
pub struct PipelineOutput {
    pub report: SynthesisReport,
    pub stage1: Option<OptimalSensitivityResult>,
    pub envelope: Option<EnvelopeWeight>,
    pub stage2: Option<strongstab::DeviationSolveResult>,
}

struct Certs(Vec<Certificate>);

impl Certs {
    fn record(&mut self, name: &str, pass: bool, margin: f64) {
        self.0.push(Certificate {
            name: name.into(),
            status: if pass { CertStatus::Pass } else { CertStatus::Fail },
            margin,
            message: None,
        });
    }

    fn fail_with(&mut self, name: &str, message: String) {
        self.0.push(Certificate {
            name: name.into(),
            status: CertStatus::Fail,
            margin: -1e300,
            message: Some(message),
        });
    }

    fn skip(&mut self, name: &str) {
        self.0.push(Certificate {
            name: name.into(),
            status: CertStatus::Skipped,
            margin: 0.0,
            message: None,
        });
    }
}

const STAGE2_CERTS: [&str; 9] = [
    "envelope_endpoints",
    "envelope_dominance",
    "stage2_phase_residual",
    "stage2_interval",
    "deviation_identity",
    "deviation_bound",
    "weight_identity",
    "k_stable",
    "closed_loop_stable",
];

pub fn run(spec: &ValidatedSpec, skip_stage2: bool, k_variant: &str) -> PipelineOutput {
    let t0 = std::time::Instant::now();
    let mut certs = Certs(Vec::new());
    let mut report = SynthesisReport {
        gamma_opt: None,
        omega_gamma: None,
        gamma2_opt: None,
        omega_star: None,
        kappa: None,
        alpha1: None,
        beta1: None,
        achieved_deviation: None,
        suff_cond_margin: None,
        k_rhp_poles: None,
        closed_loop_rhp_zeros: None,
        encirclement_summary: None,
        k_variant: k_variant.into(),
        certificates: Vec::new(),
        wall_time_seconds: 0.0,
    };
    let finish = |mut report: SynthesisReport,
                  certs: Certs,
                  stage1,
                  envelope,
                  stage2,
                  t0: std::time::Instant| {
        report.certificates = certs.0;
        report.wall_time_seconds = t0.elapsed().as_secs_f64();
        PipelineOutput {
            report,
            stage1,
            envelope,
            stage2,
        }
    };

    let h = spec.plant.delay_h;
    let (alpha, beta) = (spec.weight.alpha, spec.weight.beta);
    let grid = &spec.grid;
    let tol = &spec.tolerances;

    // ---- stage 1: phase equation ------------------------------------------
    let (gamma0, omega_g) = match solve_gamma_opt(h, alpha, beta, tol.phase_residual.min(1e-12)) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("stage 1 solve failed: {e}");
            certs.fail_with("stage1_phase_residual", e.to_string());
            for name in [
                "flatness",
                "inner_modulus",
                "inner_rhp_poles",
                "factorization_identity",
                "bistable_cancellation",
                "encirclement",
            ] {
                certs.skip(name);
            }
            for name in STAGE2_CERTS {
                certs.skip(name);
            }
            return finish(report, certs, None, None, None, t0);
        }
    };
    report.gamma_opt = Some(gamma0);
    report.omega_gamma = Some(omega_g);
    let resid = (phase_lhs(gamma0, h, alpha, beta).unwrap() - PI).abs();
    certs.record(
        "stage1_phase_residual",
        resid < tol.phase_residual,
        tol.phase_residual - resid,
    );

    let c_opt = build_c_opt(&spec.plant, &spec.weight, gamma0);
    let s_opt = eval_s_opt(&spec.weight, h, gamma0);
    let n_c = build_n_c(&spec.weight, h, gamma0);
    let d_c = build_d_c(&spec.weight, h, gamma0);
    let (m1, m2, g_outer) = remark_functions(&spec.weight, h, gamma0);
    let pts = grid.points_excluding(Some(h), &[omega_g]);
    let wtf = spec.weight.tf();

    // flatness of |W S_opt|
    let mut flat_dev = 0.0f64;
    for &omega in &pts {
        let s = Complex64::new(0.0, omega);
        flat_dev = flat_dev.max(((wtf.eval(s) * s_opt.eval(s)).norm() - gamma0).abs());
    }
    certs.record("flatness", flat_dev < 1e-6, 1e-6 - flat_dev);

    // inner certificate
    let mut inner_dev = 0.0f64;
    for &omega in &pts {
        inner_dev = inner_dev.max((d_c.eval(Complex64::new(0.0, omega)).norm() - 1.0).abs());
    }
    certs.record(
        "inner_modulus",
        inner_dev < tol.inner_check,
        tol.inner_check - inner_dev,
    );
    let dc_den = DelayTransferFunction::from_qp(d_c.den().clone());
    let w_dc = winding_number_excluding(&dc_den, default_contour_radius(&dc_den), grid, &[omega_g]);
    match w_dc {
        Ok(w) => certs.record("inner_rhp_poles", w == 0, -(w.abs() as f64)),
        Err(e) => {
            eprintln!("inner winding failed: {e}");
            certs.fail_with("inner_rhp_poles", e.to_string());
        }
    }

    // factorization identity and cancellation
    let mut fact_err = 0.0f64;
    for &omega in &pts {
        let s = Complex64::new(0.0, omega);
        let lhs = c_opt.eval(s);
        if lhs.norm() > 1e-6 {
            let rhs = n_c.eval(s) / (spec.plant.np.eval(s) * d_c.eval(s));
            fact_err = fact_err.max((lhs - rhs).norm() / lhs.norm());
        }
    }
    certs.record(
        "factorization_identity",
        fact_err < tol.grid_identity,
        tol.grid_identity - fact_err,
    );
    let s_g = Complex64::new(0.0, omega_g);
    let num_rel = n_c.num().eval(s_g).norm() / (1.0 - gamma0 * gamma0 * beta * beta).abs();
    let den_scale: f64 = n_c
        .den()
        .terms()
        .iter()
        .map(|t| t.poly.eval(s_g).norm())
        .sum();
    let den_rel = n_c.den().eval(s_g).norm() / den_scale;
    let nc_num_tf = DelayTransferFunction::from_qp(n_c.num().clone());
    let nc_den_tf = DelayTransferFunction::from_qp(n_c.den().clone());
    let wind_ok = [&nc_num_tf, &nc_den_tf].iter().all(|f| {
        winding_number_excluding(f, default_contour_radius(f), grid, &[omega_g]) == Ok(0)
    });
    let cancel = num_rel.max(den_rel);
    certs.record(
        "bistable_cancellation",
        cancel < 1e-8 && wind_ok,
        1e-8 - cancel,
    );

    // encirclement pattern of S_opt^{-1}
    let k_max = spec.checks.k_max_encirclements;
    let s_inv = s_opt.invert().unwrap();
    let rep = crossing_profile(&s_inv, h, k_max, grid);
    let last_mag = rep
        .negative_axis_crossings
        .last()
        .map(|&w| s_inv.eval(Complex64::new(0.0, w)).norm());
    let limit = alpha / gamma0;
    let mag_slack = last_mag
        .map(|m| 0.1 - (m - limit).abs() / limit)
        .unwrap_or(f64::NEG_INFINITY);
    let enc_margin = (rep.matched_fraction - 0.9).min(mag_slack);
    certs.record("encirclement", enc_margin >= 0.0, enc_margin);
    report.encirclement_summary = Some(EncirclementSummary {
        negative_crossings: rep.negative_axis_crossings.len(),
        positive_crossings: rep.positive_axis_crossings.len(),
        matched_fraction: rep.matched_fraction,
        k_max,
    });

    let stage1 = OptimalSensitivityResult {
        gamma_opt: gamma0,
        omega_gamma: omega_g,
        c_opt,
        s_opt,
        n_c,
        d_c,
        m1,
        m2,
        g: g_outer,
    };

    if skip_stage2 {
        for name in STAGE2_CERTS {
            certs.skip(name);
        }
        return finish(report, certs, Some(stage1), None, None, t0);
    }

    // ---- envelope -----------------------------------------------------------
    let g0nc = stage1.n_c.scale(gamma0);
    let alpha1 = match spec.alpha1 {
        Alpha1::Fixed(a1) => Ok(a1),
        Alpha1::Auto => select_alpha1(&g0nc, gamma0, alpha, beta, &pts),
    };
    let env = alpha1.and_then(|a1| build_envelope(gamma0, alpha, beta, a1));
    let env = match env {
        Ok(e) => e,
        Err(e) => {
            eprintln!("envelope construction failed: {e}");
            certs.fail_with("envelope_endpoints", e.to_string());
            for name in &STAGE2_CERTS[1..] {
                certs.skip(name);
            }
            return finish(report, certs, Some(stage1), None, None, t0);
        }
    };
    report.kappa = Some(env.kappa);
    report.alpha1 = Some(env.alpha1);
    report.beta1 = Some(env.beta1);

    let origin = Complex64::new(0.0, 0.0);
    let endpoint_err = (env.w1.eval(origin).norm() - (1.0 / beta - gamma0))
        .abs()
        .max((g0nc.eval(origin).norm() - (1.0 / beta - gamma0)).abs());
    certs.record("envelope_endpoints", endpoint_err < 1e-9, 1e-9 - endpoint_err);
    let (margin, _) = check_dominance(&env, &g0nc, &pts);
    certs.record(
        "envelope_dominance",
        dominance_ok(margin, gamma0),
        margin + 1e-9 * gamma0,
    );
    if !dominance_ok(margin, gamma0) {
        for name in &STAGE2_CERTS[2..] {
            certs.skip(name);
        }
        return finish(report, certs, Some(stage1), Some(env), None, t0);
    }

    // ---- stage 2 -------------------------------------------------------------
    let params = Stage2Params {
        gamma0,
        kappa: env.kappa,
        alpha1: env.alpha1,
        beta1: env.beta1,
        h,
        alpha,
        beta,
    };
    let solved = solve_gamma2(&params).and_then(|(g2, wstar)| {
        let (a_tf, b_tf, c2_opt, q_hat) =
            strongstab::build_c2_and_qhat(&params, g2, &stage1.d_c)?;
        let (q_param, f_tf, k_tf, k_literal) =
            strongstab::build_f_and_k(&q_hat, &stage1.n_c, &spec.plant.np, &stage1.c_opt)?;
        Ok(strongstab::DeviationSolveResult {
            gamma2_opt: g2,
            omega_star: wstar,
            a_tf,
            b_tf,
            c2_opt,
            q_hat,
            q_param,
            f_tf,
            k_tf,
            k_literal,
        })
    });
    let result = match solved {
        Ok(r) => r,
        Err(e) => {
            eprintln!("stage 2 solve failed: {e}");
            certs.fail_with("stage2_phase_residual", e.to_string());
            for name in &STAGE2_CERTS[3..] {
                certs.skip(name);
            }
            return finish(report, certs, Some(stage1), Some(env), None, t0);
        }
    };
    report.gamma2_opt = Some(result.gamma2_opt);
    report.omega_star = Some(result.omega_star);

    let resid2 = (phase_lhs2(result.gamma2_opt, &params).unwrap() - PI).abs();
    certs.record("stage2_phase_residual", resid2 < 1e-10, 1e-10 - resid2);
    let inside = result.gamma2_opt > params.level_floor()
        && result.gamma2_opt < params.level_ceiling();
    certs.record(
        "stage2_interval",
        inside,
        (result.gamma2_opt - params.level_floor())
            .min(params.level_ceiling() - result.gamma2_opt),
    );

    // certification: identities, bound, windings
    let pts2 = grid.points_excluding(Some(h), &[omega_g, result.omega_star]);
    let p_tf = DelayTransferFunction::delay(h).mul(&spec.plant.np);
    let k_at = |s: Complex64| -> Complex64 {
        -(stage1.n_c.eval(s) * result.q_hat.eval(s)) / spec.plant.np.eval(s)
    };
    let mut pair_err = 0.0f64;
    let mut achieved = 0.0f64;
    let mut weight_identity = 0.0f64;
    let mut suff_margin = f64::INFINITY;
    for &omega in &pts2 {
        let s = Complex64::new(0.0, omega);
        let k = k_at(s);
        let s_cl = (Complex64::new(1.0, 0.0) + p_tf.eval(s) * k).inv();
        let s0 = stage1.s_opt.eval(s);
        let dev15 = (wtf.eval(s) * (s0 - s_cl) / s_cl).norm();
        let dev16 = (gamma0
            * stage1.n_c.eval(s)
            * (Complex64::new(1.0, 0.0) + stage1.d_c.eval(s) * result.q_hat.eval(s)))
        .norm();
        pair_err = pair_err.max((dev15 - dev16).abs() / dev16.max(1e-12));
        achieved = achieved.max(dev15);
        let lhs = (stage1.d_c.eval(s) + (-h * s).exp() * stage1.n_c.eval(s)).norm();
        let rhs = wtf.eval(s).norm() / gamma0;
        weight_identity = weight_identity.max((lhs - rhs).abs() / rhs.max(1.0));
        suff_margin = suff_margin.min(1.0 / k.norm() - spec.plant.np.eval(s).norm());
    }
    certs.record("deviation_identity", pair_err < 1e-8, 1e-8 - pair_err);
    let bound = result.gamma2_opt * (1.0 + 1e-6);
    certs.record("deviation_bound", achieved <= bound, bound - achieved);
    certs.record("weight_identity", weight_identity < 1e-9, 1e-9 - weight_identity);
    report.achieved_deviation = Some(achieved);
    report.suff_cond_margin = Some(suff_margin);

    // windings: factor-wise K poles, then the loop function
    let gk = params.level_floor();
    let delta = stage1
        .d_c
        .den()
        .mul(&hinfdelay::QuasiPolynomial::from_poly(
            hinfdelay::Polynomial::new(&[params.beta1, 1.0]),
        ))
        .sub(&stage1.d_c.num().mul(&hinfdelay::QuasiPolynomial::from_poly(
            hinfdelay::Polynomial::new(&[-params.alpha1, 1.0])
                .scale(gk / result.gamma2_opt),
        )));
    let exclusions = [omega_g, result.omega_star];
    let mut k_poles: Option<i32> = Some(0);
    for qp in [
        spec.plant.np.num().clone(),
        stage1.n_c.den().clone(),
        result.a_tf.den().clone(),
        delta,
    ] {
        let f = DelayTransferFunction::from_qp(qp);
        match winding_number_excluding(&f, default_contour_radius(&f), grid, &exclusions) {
            Ok(w) => k_poles = k_poles.map(|acc| acc + w),
            Err(e) => {
                eprintln!("K winding failed: {e}");
                k_poles = None;
            }
        }
    }
    match k_poles {
        Some(w) => {
            report.k_rhp_poles = Some(w);
            certs.record("k_stable", w == 0, -(w.abs() as f64));
        }
        None => certs.fail_with("k_stable", "winding did not converge".into()),
    }
    let radius = default_contour_radius(&result.k_tf);
    let total_delay =
        h + result.k_tf.num().max_delay() + result.k_tf.den().max_delay();
    let loop_w = winding_number_fn(
        |s| Complex64::new(1.0, 0.0) + p_tf.eval(s) * k_at(s),
        radius,
        grid,
        &exclusions,
        total_delay,
    );
    match (loop_w, k_poles) {
        (Ok(w), Some(kp)) => {
            let zeros = w + kp;
            report.closed_loop_rhp_zeros = Some(zeros);
            certs.record("closed_loop_stable", zeros == 0, -(zeros.abs() as f64));
        }
        (res, _) => {
            if let Err(e) = res {
                eprintln!("closed-loop winding failed: {e}");
            }
            certs.fail_with("closed_loop_stable", "winding did not converge".into());
        }
    }

    finish(report, certs, Some(stage1), Some(env), Some(result), t0)
}

pub fn exit_code(report: &SynthesisReport) -> i32 {
    if report
        .certificates
        .iter()
        .all(|c| c.status != CertStatus::Fail)
    {
        0
    } else {
        2
    }
}

