use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;

use emwaveholtz::filter::{beta_discrete, common_base_frequency, filter_weights, rate_bound, FilterSpec, Forcing};
use emwaveholtz::grid::{Domain, Grid2D, Region, StateMode, YeeGrid};
use emwaveholtz::timedomain::{modified_omega, TimeGrid};
use emwaveholtz::waveholtz::{LinearOperator, WaveHoltzOperator};

fn small_operator(mode: StateMode) -> WaveHoltzOperator<Grid2D> {
    let grid = Grid2D::pec_vacuum(Domain::square(0.0, 1.0, 6).unwrap()).unwrap();
    let j = grid.sample_e(|_, q| q[0] * (1.0 - q[1]));
    WaveHoltzOperator::build(grid, vec![j], FilterSpec::single(4.5, 1, Forcing::Sin).with_mode(mode)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn trapezoid_weights_sum_to_minus_half(omega in 0.5f64..40.0, steps in 3usize..400) {
        let tg = TimeGrid::new(2.0 * PI / omega, steps).unwrap();
        let w = filter_weights(&FilterSpec::single(omega, 1, Forcing::Sin), &tg).unwrap();
        prop_assert_eq!(w.len(), steps + 1);
        // The trapezoid rule integrates cos over a whole period exactly.
        prop_assert!((w.iter().sum::<f64>() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn filter_passes_its_own_frequency(omega in 0.5f64..40.0, steps in 3usize..400, periods in 1usize..4) {
        let tg = TimeGrid::new(periods as f64 * 2.0 * PI / omega, steps * periods).unwrap();
        let w = filter_weights(&FilterSpec::single(omega, periods, Forcing::Sin), &tg).unwrap();
        prop_assert!((beta_discrete(omega, &w, &tg) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn modified_frequency_inverts_the_leapfrog_symbol(omega in 0.1f64..50.0, frac in 0.01f64..0.99) {
        let dt = 2.0 * frac / omega;
        let wb = modified_omega(omega, dt).unwrap();
        prop_assert!(wb >= omega);
        prop_assert!(((wb * dt / 2.0).sin() / (dt / 2.0) - omega).abs() < 1e-9 * omega);
        let wb2 = modified_omega(omega * 1.001, dt.min(2.0 * 0.99 / (omega * 1.001))).unwrap();
        prop_assert!(wb2 > omega);
    }

    #[test]
    fn rate_bound_stays_in_range(delta in 0.0f64..2.0) {
        for floor in [0.6, 0.63] {
            let b = rate_bound(delta, floor);
            prop_assert!(b >= floor && b <= 1.0);
        }
    }

    #[test]
    fn harmonics_share_a_base(base in 0.3f64..10.0, k1 in 1usize..6, k2 in 1usize..6) {
        let (a, b) = (k1.min(k2), k1.max(k2) + 1);
        let w0 = common_base_frequency(&[a as f64 * base, b as f64 * base]).unwrap();
        for w in [a as f64 * base, b as f64 * base] {
            let r = w / w0;
            prop_assert!((r - r.round()).abs() < 1e-9 * r);
        }
        prop_assert!(w0 >= base * (1.0 - 1e-12));
    }

    #[test]
    fn regions_contain_their_defining_points(cx in -1.0f64..1.0, cy in -1.0f64..1.0, r in 0.01f64..1.0, t in 0.0f64..(2.0 * PI)) {
        let d = Region::disk([cx, cy], r);
        prop_assert!(d.contains(&[cx, cy], 0.0));
        prop_assert!(d.contains(&[cx + r * t.cos(), cy + r * t.sin()], 1e-12));
        prop_assert!(!d.contains(&[cx + 1.01 * r * t.cos(), cy + 1.01 * r * t.sin()], 0.0));
        let b = Region::rect([cx, cy], [cx + r, cy + r]);
        prop_assert!(b.contains(&[cx, cy + r], 0.0));
        prop_assert!(!b.contains(&[cx - 1e-3, cy], 0.0));
        prop_assert!(b.contains(&[cx - 1e-3, cy], 2e-3));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn s_is_linear(seed_a in proptest::collection::vec(-1.0f64..1.0, 25), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let op = small_operator(StateMode::EnergyConserving);
        let n = op.dim();
        let x: Vec<f64> = (0..n).map(|i| seed_a[i % seed_a.len()]).collect();
        let y: Vec<f64> = (0..n).map(|i| ((i * 7 + 3) % 11) as f64 / 11.0 - 0.5).collect();
        let comb: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let (sx, sy, sc) = (op.apply_s(&x).unwrap(), op.apply_s(&y).unwrap(), op.apply_s(&comb).unwrap());
        for i in 0..n {
            prop_assert!((sc[i] - a * sx[i] - b * sy[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn layout_round_trips(vals in proptest::collection::vec(-1.0f64..1.0, 1..50)) {
        for mode in [StateMode::EnergyConserving, StateMode::Full] {
            let op = small_operator(mode);
            let layout = op.layout();
            let v: Vec<f64> = (0..layout.len()).map(|i| vals[i % vals.len()]).collect();
            let mut g = op.grid().clone();
            layout.unflatten(&v, &mut g).unwrap();
            prop_assert_eq!(layout.flatten(&g), v.clone());
            // Masked (PEC) nodes are never part of the state.
            for (x, &m) in g.ez().iter().zip(g.mask()) {
                if m {
                    prop_assert_eq!(*x, 0.0);
                }
            }
        }
    }
}

#[test]
fn full_state_contains_e_only_state() {
    let e = small_operator(StateMode::EnergyConserving);
    let f = small_operator(StateMode::Full);
    assert_eq!(e.layout().e_len(), f.layout().e_len());
    assert!(f.dim() > e.dim());
    let interior = (6 - 1) * (6 - 1);
    assert_eq!(e.dim(), interior);
    // Normal H on PEC faces is constant and left out.
    assert_eq!(f.dim(), interior + 2 * (6 - 1) * 6);
}

#[test]
fn i_minus_s_matches_pi_form() {
    let op = small_operator(StateMode::Full);
    let x: Vec<f64> = (0..op.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
    let a = op.apply_i_minus_s(&x).unwrap();
    let s = op.apply_s(&x).unwrap();
    for i in 0..x.len() {
        assert_relative_eq!(a[i], x[i] - s[i], epsilon = 1e-13);
    }
    let zero = op.apply_s(&vec![0.0; op.dim()]).unwrap();
    assert!(zero.iter().all(|v| *v == 0.0));
}
