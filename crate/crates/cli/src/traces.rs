//! Frequency-response trace output: one RFC-4180 CSV per requested function,
//! columns `omega,re,im,mag,phase_unwrapped`, 17 significant digits.

use crate::pipeline::PipelineOutput;
use crate::spec_file::ValidatedSpec;
use hinfdelay::Complex64;
use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const ALL_TRACES: [&str; 9] = [
    "S_opt",
    "S_opt_inverse",
    "W_S_opt",
    "gamma0_Nc",
    "W1",
    "K",
    "F",
    "S_achieved",
    "weighted_deviation",
];

/// Continuous phase at the grid points, refining between samples so no
/// marching step reaches π/2 (the delay factors rotate fast at high
/// frequency). Refinement is capped; a capped step falls back to the
/// principal branch, which only matters if the trace passes through zero.
fn unwrap_on_grid<F: Fn(Complex64) -> Complex64>(f: &F, pts: &[f64]) -> Vec<f64> {
    fn step<F: Fn(Complex64) -> Complex64>(
        f: &F,
        w0: f64,
        a0: f64,
        w1: f64,
        depth: u32,
    ) -> f64 {
        let a1 = f(Complex64::new(0.0, w1)).arg();
        let mut d = (a1 - a0) % (2.0 * PI);
        if d > PI {
            d -= 2.0 * PI;
        } else if d <= -PI {
            d += 2.0 * PI;
        }
        if d.abs() < PI / 2.0 || depth >= 24 {
            return d;
        }
        let wm = 0.5 * (w0 + w1);
        let d0 = step(f, w0, a0, wm, depth + 1);
        let d1 = step(f, wm, a0 + d0, w1, depth + 1);
        d0 + d1
    }
    let mut out = Vec::with_capacity(pts.len());
    if pts.is_empty() {
        return out;
    }
    let mut phase = f(Complex64::new(0.0, pts[0])).arg();
    out.push(phase);
    for i in 1..pts.len() {
        phase += step(f, pts[i - 1], phase, pts[i], 0);
        out.push(phase);
    }
    out
}

fn write_csv<F: Fn(Complex64) -> Complex64>(
    path: &Path,
    pts: &[f64],
    f: F,
) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "omega,re,im,mag,phase_unwrapped")?;
    let phases = unwrap_on_grid(&f, pts);
    for (i, &omega) in pts.iter().enumerate() {
        let v = f(Complex64::new(0.0, omega));
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            omega,
            v.re,
            v.im,
            v.norm(),
            phases[i]
        )?;
    }
    w.flush()
}

/// Writes the requested traces; returns the created paths. Traces whose
/// pipeline stage did not run are silently unavailable.
pub fn emit_traces(
    out: &PipelineOutput,
    spec: &ValidatedSpec,
    requested: &[String],
    out_dir: &Path,
    k_variant: &str,
) -> std::io::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let Some(stage1) = &out.stage1 else {
        return Ok(written);
    };
    let h = spec.plant.delay_h;
    let mut exclusions = vec![stage1.omega_gamma];
    if let Some(r) = &out.stage2 {
        exclusions.push(r.omega_star);
    }
    let pts = spec.grid.points_excluding(Some(h), &exclusions);
    let wtf = spec.weight.tf();
    let p_tf = hinfdelay::DelayTransferFunction::delay(h).mul(&spec.plant.np);

    for name in requested {
        let path = out_dir.join(format!("{name}.csv"));
        let stage1 = stage1.clone();
        match name.as_str() {
            "S_opt" => write_csv(&path, &pts, move |s| stage1.s_opt.eval(s))?,
            "S_opt_inverse" => {
                write_csv(&path, &pts, move |s| stage1.s_opt.eval(s).inv())?
            }
            "W_S_opt" => {
                let wtf = wtf.clone();
                write_csv(&path, &pts, move |s| wtf.eval(s) * stage1.s_opt.eval(s))?
            }
            "gamma0_Nc" => {
                let g0 = stage1.gamma_opt;
                write_csv(&path, &pts, move |s| g0 * stage1.n_c.eval(s))?
            }
            "W1" => {
                let Some(env) = &out.envelope else { continue };
                let w1 = env.w1.clone();
                write_csv(&path, &pts, move |s| w1.eval(s))?
            }
            "K" => {
                let Some(r) = &out.stage2 else { continue };
                let q_hat = r.q_hat.clone();
                let np = spec.plant.np.clone();
                if k_variant == "literal" {
                    write_csv(&path, &pts, move |s| -q_hat.eval(s))?
                } else {
                    write_csv(&path, &pts, move |s| {
                        -(stage1.n_c.eval(s) * q_hat.eval(s)) / np.eval(s)
                    })?
                }
            }
            "F" => {
                let Some(r) = &out.stage2 else { continue };
                let q_hat = r.q_hat.clone();
                let np = spec.plant.np.clone();
                write_csv(&path, &pts, move |s| {
                    let q = stage1.n_c.eval(s) * q_hat.eval(s) / np.eval(s);
                    -(q.inv() + stage1.c_opt.eval(s).inv())
                })?
            }
            "S_achieved" => {
                let Some(r) = &out.stage2 else { continue };
                let q_hat = r.q_hat.clone();
                let np = spec.plant.np.clone();
                let p_tf = p_tf.clone();
                write_csv(&path, &pts, move |s| {
                    let k = -(stage1.n_c.eval(s) * q_hat.eval(s)) / np.eval(s);
                    (Complex64::new(1.0, 0.0) + p_tf.eval(s) * k).inv()
                })?
            }
            "weighted_deviation" => {
                let Some(r) = &out.stage2 else { continue };
                let q_hat = r.q_hat.clone();
                let np = spec.plant.np.clone();
                let p_tf = p_tf.clone();
                let wtf = wtf.clone();
                write_csv(&path, &pts, move |s| {
                    let k = -(stage1.n_c.eval(s) * q_hat.eval(s)) / np.eval(s);
                    let s_cl = (Complex64::new(1.0, 0.0) + p_tf.eval(s) * k).inv();
                    wtf.eval(s) * (stage1.s_opt.eval(s) - s_cl) / s_cl
                })?
            }
            other => {
                eprintln!("unknown trace \"{other}\" ignored");
                continue;
            }
        }
        written.push(path);
    }
    Ok(written)
}
