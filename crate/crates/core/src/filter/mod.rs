//! Time filters applied to a Yee evolution: the trapezoidal WaveHoltz filter,
//! its modified variant, the multi-frequency kernel, separation of a combined
//! solution into frequencies, and recovery of the complementary phase.

mod recover;
mod spec;

pub use recover::{recover_real, separate_frequencies, FrequencySolution};
pub use spec::{common_base_frequency, FilterSpec, Forcing, Quadrature};

use crate::error::{Error, Result};
use crate::grid::FieldSet;
use crate::timedomain::{modified_omega, Snapshot, TimeGrid};

/// Trapezoid weight `eta_n`: 1/2 at both end points, 1 otherwise.
pub fn eta(n: usize, steps: usize) -> f64 {
    if n == 0 || n == steps {
        0.5
    } else {
        1.0
    }
}

/// Smallest `|cos(omega_bar t^n)|` accepted by the modified quadrature.
pub const MODIFIED_QUADRATURE_FLOOR: f64 = 1e-8;

/// Quadrature weights `w_n`, `n = 0..=steps`, so that the filter output is
/// `sum_n w_n E^n`.
pub fn filter_weights(spec: &FilterSpec, tg: &TimeGrid) -> Result<Vec<f64>> {
    let t = tg.t_final;
    let m = tg.steps;
    let scale = 2.0 * tg.dt / t;
    let mut w: Vec<f64> = (0..=m)
        .map(|n| {
            let tn = tg.time(n);
            let kernel: f64 = spec.frequencies.iter().map(|om| (om * tn).cos()).sum::<f64>() - 0.25;
            scale * eta(n, m) * kernel
        })
        .collect();
    if spec.quadrature == Quadrature::TrapezoidModified {
        let omega = spec.frequencies[0];
        let wbar = modified_omega(omega, tg.dt).map_err(|e| Error::Config(e.to_string()))?;
        for (n, wn) in w.iter_mut().enumerate() {
            let tn = tg.time(n);
            let c = (wbar * tn).cos();
            if c.abs() < MODIFIED_QUADRATURE_FLOOR {
                return Err(Error::QuadratureSingularity { node: n, value: c.abs() });
            }
            *wn *= (omega * tn).cos() / c;
        }
    }
    Ok(w)
}

/// Weights `(2 dt / T) eta_n g(t^n)` for an arbitrary kernel `g`.
pub fn kernel_weights(tg: &TimeGrid, g: impl Fn(f64) -> f64) -> Vec<f64> {
    let scale = 2.0 * tg.dt / tg.t_final;
    (0..=tg.steps)
        .map(|n| scale * eta(n, tg.steps) * g(tg.time(n)))
        .collect()
}

/// Weighted running sums of the observed E fields and, optionally, the
/// time-averaged H fields.
#[derive(Debug, Clone)]
pub struct FilterAccumulator {
    weights: Vec<f64>,
    pub e: Vec<Vec<f64>>,
    pub h: Option<Vec<Vec<f64>>>,
}

impl FilterAccumulator {
    pub fn new(weights: Vec<f64>, e_shape: &FieldSet, h_shape: Option<&FieldSet>) -> Self {
        let zeros = |f: &FieldSet| f.components.iter().map(|c| vec![0.0; c.len()]).collect();
        Self {
            weights,
            e: zeros(e_shape),
            h: h_shape.map(zeros),
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn accumulate(&mut self, snap: &Snapshot) {
        let w = self.weights[snap.n];
        if w == 0.0 {
            return;
        }
        axpy(&mut self.e, w, snap.e);
        if let (Some(acc), Some(h)) = (self.h.as_mut(), snap.h) {
            axpy(acc, w, h);
        }
    }

    pub fn e_fields(&self) -> FieldSet {
        FieldSet {
            components: self.e.clone(),
        }
    }

    pub fn h_fields(&self) -> Option<FieldSet> {
        self.h.as_ref().map(|h| FieldSet { components: h.clone() })
    }
}

fn axpy(acc: &mut [Vec<f64>], w: f64, x: &[Vec<f64>]) {
    for (a, b) in acc.iter_mut().zip(x) {
        for (p, q) in a.iter_mut().zip(b) {
            *p += w * q;
        }
    }
}

/// `(2/T) int_0^T (cos(omega t) - 1/4) cos(lambda t) dt` over `T = periods * 2 pi / omega`.
pub fn beta_continuous_window(lambda: f64, omega: f64, t: f64) -> f64 {
    // (1/T) int_0^T cos(a t) dt = sin(a T) / (a T), with the limit 1 at a = 0.
    let sinc_mean = |a: f64| {
        let x = a * t;
        if x.abs() < 1e-4 {
            1.0 - x * x / 6.0 + x.powi(4) / 120.0
        } else {
            x.sin() / x
        }
    };
    sinc_mean(lambda - omega) + sinc_mean(lambda + omega) - 0.5 * sinc_mean(lambda)
}

/// Continuous transfer function over one period `T = 2 pi / omega`.
pub fn beta_continuous(lambda: f64, omega: f64) -> f64 {
    beta_continuous_window(lambda, omega, 2.0 * std::f64::consts::PI / omega)
}

/// Discrete transfer function `sum_n w_n cos(lambda t^n)`.
pub fn beta_discrete(lambda: f64, weights: &[f64], tg: &TimeGrid) -> f64 {
    weights
        .iter()
        .enumerate()
        .map(|(n, w)| w * (lambda * tg.time(n)).cos())
        .sum()
}

/// Time-shifted eigenvalue `lambda~` with `sin(lambda~ dt/2)/(dt/2) = lambda`.
pub fn lambda_tilde(lambda: f64, dt: f64) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(0.0);
    }
    modified_omega(lambda, dt)
}

/// Contraction bound `max(1 - 0.3 delta^2, floor)`; the floor is 0.6 in one
/// statement of the rate bound and 0.63 in its derivation.
pub fn rate_bound(delta: f64, floor: f64) -> f64 {
    (1.0 - 0.3 * delta * delta).max(floor)
}

/// Continuous-filter estimate `1 - 6.33 delta^2` near resonance.
pub fn continuous_rate_estimate(delta: f64) -> f64 {
    1.0 - 6.33 * delta * delta
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid_for(omega: f64, m: usize) -> TimeGrid {
        TimeGrid::new(2.0 * PI / omega, m).unwrap()
    }

    #[test]
    fn continuous_beta_reference_values() {
        for &om in &[1.0, 5.5, 40.0] {
            assert!((beta_continuous(om, om) - 1.0).abs() < 1e-14);
            assert!((beta_continuous(0.0, om) + 0.5).abs() < 1e-14);
            assert!(beta_continuous(2.0 * om, om).abs() < 1e-14);
        }
    }

    #[test]
    fn continuous_beta_matches_quadrature() {
        let om = 3.0;
        let t = 2.0 * PI / om;
        let n = 20000;
        for &l in &[0.3, 1.7, 2.999, 3.0 + 1e-6, 4.5, 9.1] {
            let h = t / n as f64;
            let f = |s: f64| ((om * s).cos() - 0.25) * (l * s).cos();
            let mut acc = 0.5 * (f(0.0) + f(t));
            for k in 1..n {
                acc += f(k as f64 * h);
            }
            let q = 2.0 / t * acc * h;
            assert!((q - beta_continuous(l, om)).abs() < 1e-7, "lambda {l}");
        }
    }

    #[test]
    fn discrete_beta_is_exact_at_omega() {
        let om = 5.5;
        for m in [4, 7, 40] {
            let tg = grid_for(om, m);
            let spec = FilterSpec::single(om, 1, Forcing::Sin);
            let w = filter_weights(&spec, &tg).unwrap();
            assert!((beta_discrete(om, &w, &tg) - 1.0).abs() < 1e-13);
            assert!((beta_discrete(0.0, &w, &tg) + 0.5).abs() < 1e-13);
        }
    }

    #[test]
    fn accumulator_of_constant_is_minus_half() {
        let om = 2.0;
        let tg = grid_for(om, 16);
        let spec = FilterSpec::single(om, 1, Forcing::Sin);
        let shape = FieldSet { components: vec![vec![0.0; 3]] };
        let mut acc = FilterAccumulator::new(filter_weights(&spec, &tg).unwrap(), &shape, None);
        let data = vec![vec![1.0, -2.0, 4.0]];
        for n in 0..=tg.steps {
            acc.accumulate(&Snapshot { n, t: tg.time(n), e: &data, h: None });
        }
        for (a, b) in acc.e[0].iter().zip(&data[0]) {
            assert!((a + 0.5 * b).abs() < 1e-14);
        }
    }

    #[test]
    fn lambda_tilde_inverts_shift() {
        let dt = 0.01;
        for &l in &[1.0, 50.0, 150.0] {
            let lt = lambda_tilde(l, dt).unwrap();
            assert!(((lt * dt / 2.0).sin() / (dt / 2.0) - l).abs() < 1e-10);
        }
    }

    #[test]
    fn rate_bound_increases_toward_resonance() {
        let mut last = 0.0;
        for k in (1..50).rev() {
            let b = rate_bound(k as f64 * 0.05, 0.63);
            assert!(b >= last);
            last = b;
        }
        assert!((rate_bound(1e-9, 0.63) - 1.0).abs() < 1e-12);
    }
}
