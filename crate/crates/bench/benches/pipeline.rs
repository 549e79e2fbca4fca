use criterion::{black_box, criterion_group, criterion_main, Criterion};
use hinfdelay::envelope::{build_envelope, select_alpha1};
use hinfdelay::sensopt::{self, build_d_c, solve_gamma_opt, PlantSpec, WeightSpec};
use hinfdelay::strongstab;
use hinfdelay::winding::{default_contour_radius, winding_number_excluding, FrequencyGrid};
use hinfdelay::{Complex64, DelayTransferFunction};

fn bench_phase_equation(c: &mut Criterion) {
    c.bench_function("solve_gamma_opt reference", |b| {
        b.iter(|| solve_gamma_opt(black_box(1.0), 0.1, 0.2, 1e-12).unwrap())
    });
}

fn bench_qp_eval(c: &mut Criterion) {
    let w = WeightSpec::new(0.1, 0.2).unwrap();
    let (g, _) = solve_gamma_opt(1.0, 0.1, 0.2, 1e-12).unwrap();
    let d_c = build_d_c(&w, 1.0, g);
    let pts: Vec<Complex64> = (0..1000)
        .map(|i| Complex64::new(0.0, 1e-3 * 10f64.powf(7.0 * i as f64 / 999.0)))
        .collect();
    c.bench_function("d_c frequency sweep 1000 pts", |b| {
        b.iter(|| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &s in &pts {
                acc += d_c.eval(black_box(s));
            }
            acc
        })
    });
}

fn bench_winding(c: &mut Criterion) {
    let w = WeightSpec::new(0.1, 0.2).unwrap();
    let (g, wg) = solve_gamma_opt(1.0, 0.1, 0.2, 1e-12).unwrap();
    let d_c = build_d_c(&w, 1.0, g);
    let den = DelayTransferFunction::from_qp(d_c.den().clone());
    let grid = FrequencyGrid::for_delay(1.0);
    c.bench_function("winding of D_c denominator", |b| {
        b.iter(|| {
            winding_number_excluding(
                black_box(&den),
                default_contour_radius(&den),
                &grid,
                &[wg],
            )
            .unwrap()
        })
    });
}

fn bench_full_pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    group.bench_function("stage1+stage2 (0.7, 0.6, 0.4)", |b| {
        b.iter(|| {
            let plant = PlantSpec::unit(0.7).unwrap();
            let weight = WeightSpec::new(0.6, 0.4).unwrap();
            let grid = FrequencyGrid::for_delay(0.7);
            let stage1 = sensopt::solve(&plant, &weight, &grid, 1e-12).unwrap();
            let g0nc = stage1.n_c.scale(stage1.gamma_opt);
            let pts = grid.points_excluding(Some(0.7), &[stage1.omega_gamma]);
            let a1 = select_alpha1(&g0nc, stage1.gamma_opt, 0.6, 0.4, &pts).unwrap();
            let env = build_envelope(stage1.gamma_opt, 0.6, 0.4, a1).unwrap();
            strongstab::solve(&stage1, &env, &plant, &weight, &grid).unwrap()
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_phase_equation,
    bench_qp_eval,
    bench_winding,
    bench_full_pipeline
);
criterion_main!(benches);
