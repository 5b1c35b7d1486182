use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use emwaveholtz::analysis::{assemble_dense, dense_solve, discrete_wave_vector, mode_field, spectrum_report};
use emwaveholtz::filter::{lambda_tilde, FilterSpec, Forcing};
use emwaveholtz::grid::{Domain, Grid2D, Grid3D, YeeGrid};
use emwaveholtz::timedomain::{evolve, Source, TimeGrid};
use emwaveholtz::waveholtz::{cg, gmres, DenseMatrix, KrylovOptions, SolveOptions, SolverKind, WaveHoltzOperator};

fn spd(n: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = (0..n).map(|k| b[k * n + i] * b[k * n + j]).sum::<f64>() + if i == j { 1.0 } else { 0.0 };
        }
    }
    DenseMatrix { n, data }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn krylov_matches_lu_on_spd(n in 2usize..30, seed in 0u64..1000) {
        let a = spd(n, seed);
        let b: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0).sqrt()).collect();
        let exact = dense_solve(&a, &b).unwrap();
        let opts = KrylovOptions::new(1e-12, 4 * n);
        for x in [gmres(&a, &b, None, &opts).unwrap().x, cg(&a, &b, &opts).unwrap().x] {
            let err = x.iter().zip(&exact).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(err <= 1e-8 * scale);
        }
    }
}

#[test]
fn restarted_gmres_still_converges() {
    let a = spd(40, 7);
    let b = vec![1.0; 40];
    let opts = KrylovOptions { restart: Some(8), ..KrylovOptions::new(1e-10, 2000) };
    let out = gmres(&a, &b, None, &opts).unwrap();
    assert!(out.converged);
    assert!(out.history.last().unwrap().relative_residual <= 1e-10);
}

#[test]
fn cavity_mode_oscillates_at_the_shifted_frequency() {
    let mut grid = Grid2D::pec_vacuum(Domain::square(0.0, 1.0, 16).unwrap()).unwrap();
    let idx = [2, 3, 0];
    let m = mode_field(&grid, idx, [1.0; 3]);
    grid.e_field_mut(0).copy_from_slice(&m.components[0]);
    let k = discrete_wave_vector(&grid, idx);
    let lambda = (k[0] * k[0] + k[1] * k[1]).sqrt();
    let tg = TimeGrid::new(1.3, 80).unwrap();
    let lt = lambda_tilde(lambda, tg.dt).unwrap();
    let peak = m.max_abs();
    let mut worst: f64 = 0.0;
    evolve(&mut grid, &Source::none(), &tg, false, |s| {
        let c = (lt * s.t).cos();
        for (e, m0) in s.e[0].iter().zip(&m.components[0]) {
            worst = worst.max((e - c * m0).abs());
        }
    })
    .unwrap();
    assert!(worst < 1e-11 * peak, "deviation {worst:e}");
}

#[test]
fn fixed_point_cg_and_gmres_agree() {
    let grid = Grid2D::pec_vacuum(Domain::square(-1.0, 1.0, 12).unwrap()).unwrap();
    let omega = 4.5;
    let j = grid.sample_e(|_, q| omega * (-10.0 * (q[0] * q[0] + q[1] * q[1])).exp());
    let op = WaveHoltzOperator::build(grid, vec![j], FilterSpec::single(omega, 1, Forcing::Sin)).unwrap();
    let tight = SolveOptions::new(1e-12, 3000);
    let reference = op.solve(SolverKind::Gmres, &tight).unwrap();
    assert!(reference.converged);
    for kind in [SolverKind::Cg, SolverKind::FixedPoint] {
        let r = op.solve(kind, &tight).unwrap();
        assert!(r.converged, "{} did not converge", kind.name());
        for (a, b) in r.nu.iter().zip(&reference.nu) {
            assert_relative_eq!(a, b, epsilon = 1e-8);
        }
    }
    // Krylov needs far fewer wave solves than the fixed-point sweep.
    let fp = op.solve(SolverKind::FixedPoint, &tight).unwrap();
    assert!(reference.iterations < fp.iterations);
}

#[test]
fn cavity_operator_3d_is_symmetric_positive() {
    let grid = Grid3D::pec_vacuum(Domain::cube(0.0, 1.0, 4).unwrap()).unwrap();
    let omega = 3.7;
    let j = grid.sample_e(|c, q| if c == 2 { omega * (q[0] - 0.5) * (q[1] - 0.3) } else { 0.0 });
    let op = WaveHoltzOperator::build(grid, vec![j], FilterSpec::single(omega, 1, Forcing::Sin)).unwrap();
    let rep = spectrum_report(&assemble_dense(&op, "3d cavity").unwrap());
    assert!(rep.symmetric_deviation < 1e-12);
    assert!(rep.min > 0.0);
}
