use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{assemble_dense, dense_solve};
use crate::error::{Error, Result};
use crate::filter::{beta_discrete, filter_weights, lambda_tilde, rate_bound, continuous_rate_estimate, FilterSpec, Forcing};
use crate::grid::{FieldSet, YeeGrid};
use crate::timedomain::{Source, TemporalMode, TimeGrid};
use crate::waveholtz::WaveHoltzOperator;

/// One eigenvalue family of the discrete PEC cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityMode {
    /// Mode numbers per axis; unused axes are 0. All zeros marks the static
    /// (gradient) family of the 3D curl-curl operator.
    pub indices: [usize; 3],
    pub multiplicity: usize,
    /// Continuum eigenvalue `c pi |m / L|`.
    pub lambda_continuous: f64,
    /// Discrete eigenvalue `c (sum_a (2/dx_a)^2 sin^2(m_a pi dx_a / (2 L_a)))^{1/2}`.
    pub lambda: f64,
    /// Time-shifted eigenvalue, `sin(lambda~ dt/2)/(dt/2) = lambda`.
    pub lambda_tilde: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CavitySpectrum {
    pub modes: Vec<CavityMode>,
    pub dt: f64,
}

impl CavitySpectrum {
    /// Every eigenvalue repeated by multiplicity.
    pub fn lambdas(&self) -> Vec<f64> {
        self.modes
            .iter()
            .flat_map(|m| std::iter::repeat_n(m.lambda, m.multiplicity))
            .collect()
    }

    /// `min_j |lambda_j - omega| / omega` over nonzero eigenvalues.
    pub fn delta(&self, omega: f64) -> f64 {
        self.modes
            .iter()
            .filter(|m| m.lambda > 0.0)
            .map(|m| (m.lambda - omega).abs() / omega)
            .fold(f64::INFINITY, f64::min)
    }

    /// Eigenvalues `1 - beta_h(lambda~_j)` of `I - S`, repeated by multiplicity.
    pub fn i_minus_s_eigenvalues(&self, weights: &[f64], tg: &TimeGrid) -> Vec<f64> {
        self.modes
            .iter()
            .flat_map(|m| {
                let v = 1.0 - beta_discrete(m.lambda_tilde, weights, tg);
                std::iter::repeat_n(v, m.multiplicity)
            })
            .collect()
    }

    /// `max_j |beta_h(lambda~_j)|`.
    pub fn predicted_rate(&self, weights: &[f64], tg: &TimeGrid) -> f64 {
        self.modes
            .iter()
            .map(|m| beta_discrete(m.lambda_tilde, weights, tg).abs())
            .fold(0.0, f64::max)
    }
}

/// Discrete spectrum of a homogeneous rectangular or box-shaped PEC cavity.
pub fn cavity_spectrum<G: YeeGrid>(grid: &G, tg: &TimeGrid) -> Result<CavitySpectrum> {
    if !grid.boundary().is_all_pec() || grid.has_embedded_pec() {
        return Err(Error::Unsupported(
            "cavity spectrum needs PEC on every face and no embedded conductors".into(),
        ));
    }
    if !grid.is_homogeneous() {
        return Err(Error::Unsupported("cavity spectrum needs constant materials".into()));
    }
    let c = 1.0 / (grid.permittivity(0)[0] * grid.permeability(0)[0]).sqrt();
    let dom = grid.domain();
    let dim = dom.dim();
    let cells: Vec<usize> = dom.cells.clone();
    let k = |a: usize, m: usize| 2.0 / dom.spacing(a) * (m as f64 * PI / (2.0 * cells[a] as f64)).sin();
    let kc = |a: usize, m: usize| m as f64 * PI / dom.extent(a);
    let mut modes = Vec::new();
    let mut push = |idx: [usize; 3], mult: usize| -> Result<()> {
        let lam = c * (0..dim).map(|a| k(a, idx[a]).powi(2)).sum::<f64>().sqrt();
        let lc = c * (0..dim).map(|a| kc(a, idx[a]).powi(2)).sum::<f64>().sqrt();
        modes.push(CavityMode {
            indices: idx,
            multiplicity: mult,
            lambda_continuous: lc,
            lambda: lam,
            lambda_tilde: lambda_tilde(lam, tg.dt)?,
        });
        Ok(())
    };
    if dim == 2 {
        for m in 1..cells[0] {
            for n in 1..cells[1] {
                push([m, n, 0], 1)?;
            }
        }
    } else {
        let interior = (cells[0] - 1) * (cells[1] - 1) * (cells[2] - 1);
        push([0, 0, 0], interior)?;
        for m in 0..cells[0] {
            for n in 0..cells[1] {
                for p in 0..cells[2] {
                    let zeros = [m, n, p].iter().filter(|v| **v == 0).count();
                    match zeros {
                        0 => push([m, n, p], 2)?,
                        1 => push([m, n, p], 1)?,
                        _ => {}
                    }
                }
            }
        }
    }
    Ok(CavitySpectrum { modes, dt: tg.dt })
}

/// Discrete cavity eigenfunction sampled on the E locations.
///
/// In 2D this is `sin(m pi x^) sin(n pi y^)` for `Ez`. In 3D the components
/// are `amp_a` times the matching sine/cosine products; the field is an
/// eigenfunction of the curl-curl operator when `amp` is orthogonal to the
/// discrete wave vector.
pub fn mode_field<G: YeeGrid>(grid: &G, idx: [usize; 3], amp: [f64; 3]) -> FieldSet {
    let dom = grid.domain().clone();
    let dim = dom.dim();
    grid.sample_e(|c, p| {
        let mut v = if dim == 2 { 1.0 } else { amp[c] };
        for a in 0..dim {
            let s = (p[a] - dom.lower[a]) / dom.extent(a) * idx[a] as f64 * PI;
            let along = dim == 3 && a == c;
            v *= if along { s.cos() } else { s.sin() };
        }
        v
    })
}

/// Discrete wave vector `K_a = (2/dx_a) sin(m_a pi / (2 n_a))`.
pub fn discrete_wave_vector<G: YeeGrid>(grid: &G, idx: [usize; 3]) -> [f64; 3] {
    let dom = grid.domain();
    let mut k = [0.0; 3];
    for (a, slot) in k.iter_mut().enumerate().take(dom.dim()) {
        *slot = 2.0 / dom.spacing(a) * (idx[a] as f64 * PI / (2.0 * dom.cells[a] as f64)).sin();
    }
    k
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub omega: f64,
    pub dt: f64,
    pub delta_h: f64,
    /// `max(1 - 0.3 delta^2, 0.63)`.
    pub bound: f64,
    /// `max(1 - 0.3 delta^2, 0.6)`, the variant stated with the bound.
    pub bound_06: f64,
    /// `1 - 6.33 delta^2`, the continuous-filter estimate.
    pub continuous_estimate: f64,
    /// `max_j |beta_h(lambda~_j)|` from the discrete spectrum.
    pub predicted_rate: f64,
    /// Largest ratio `e_{k+1} / e_k` of fixed-point errors against the dense solution.
    pub measured_rate: f64,
    /// Last observed ratio.
    pub asymptotic_ratio: f64,
    pub iterations: usize,
    /// Whether `omega dt <= min(delta_h, 1)` holds; reported, not enforced.
    pub hypothesis_holds: bool,
    pub pass: bool,
}

/// Measures the fixed-point contraction on a PEC cavity with a random current
/// and compares it with the rate bound.
pub fn contraction_check<G: YeeGrid>(grid: &G, omega: f64, tg: &TimeGrid, seed: u64) -> Result<ContractionReport> {
    let spec = cavity_spectrum(grid, tg)?;
    let delta = spec.delta(omega);
    if delta < 1e-10 {
        return Err(Error::Resonance { delta });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut j = grid.sample_e(|_, _| 0.0);
    for (c, comp) in j.components.iter_mut().enumerate() {
        for (v, &m) in comp.iter_mut().zip(grid.e_mask(c)) {
            if !m {
                *v = rng.random_range(-1.0..1.0);
            }
        }
    }
    let fspec = FilterSpec::single(omega, 1, Forcing::Sin);
    let op = WaveHoltzOperator::new(
        grid.clone(),
        Source::single(j, TemporalMode::SinExact, omega),
        fspec.clone(),
        *tg,
    )?;
    let weights = filter_weights(&fspec, tg)?;
    let predicted = spec.predicted_rate(&weights, tg);
    let dense = assemble_dense(&op, "contraction")?;
    let nu_inf = dense_solve(&dense.matrix, op.rhs()?)?;
    let err = |v: &[f64]| -> f64 {
        v.iter()
            .zip(&nu_inf)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let mut nu = vec![0.0; nu_inf.len()];
    let e0 = err(&nu);
    let mut last = e0;
    let mut measured: f64 = 0.0;
    let mut ratio = 0.0;
    let mut iterations = 0;
    let max_iters = 20_000;
    while last > 1e-10 * e0 && iterations < max_iters {
        nu = op.apply_pi(&nu)?;
        iterations += 1;
        let e = err(&nu);
        ratio = e / last;
        measured = measured.max(ratio);
        last = e;
    }
    let bound = rate_bound(delta, 0.63);
    Ok(ContractionReport {
        omega,
        dt: tg.dt,
        delta_h: delta,
        bound,
        bound_06: rate_bound(delta, 0.6),
        continuous_estimate: continuous_rate_estimate(delta),
        predicted_rate: predicted,
        measured_rate: measured,
        asymptotic_ratio: ratio,
        iterations,
        hypothesis_holds: omega * tg.dt <= delta.min(1.0),
        pass: measured <= bound + 0.02,
    })
}
