use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};

use super::krylov::LinearOperator;
use crate::error::{Error, Result};
use crate::filter::{
    filter_weights, recover_real, separate_frequencies, FilterAccumulator, FilterSpec, Forcing,
    FrequencySolution, Quadrature,
};
use crate::grid::{DofLayout, FieldSet, StateMode, YeeGrid};
use crate::timedomain::{evolve, Source, SourceTerm, TimeGrid};

/// Matrix-free WaveHoltz map on filtered initial data.
///
/// `Pi nu` evolves from `nu` over the filter window and returns the filtered
/// state; `S nu = Pi nu - Pi 0`. Every application costs one evolution.
pub struct WaveHoltzOperator<G: YeeGrid> {
    grid: G,
    source: Source,
    spec: FilterSpec,
    tg: TimeGrid,
    layout: Arc<DofLayout>,
    weights: Vec<f64>,
    rhs: OnceLock<Vec<f64>>,
    solves: AtomicUsize,
}

impl<G: YeeGrid> WaveHoltzOperator<G> {
    /// Operator with an explicit source and time grid.
    pub fn new(grid: G, source: Source, spec: FilterSpec, tg: TimeGrid) -> Result<Self> {
        spec.validate()?;
        let window = spec.window()?;
        if ((tg.t_final - window) / window).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "time grid ends at {} but the filter window is {}",
                tg.t_final, window
            )));
        }
        tg.check_stability(&grid)?;
        if spec.mode == StateMode::EnergyConserving && !grid.boundary().is_all_pec() {
            return Err(Error::Config(
                "the energy-conserving state needs PEC on every face; use the full state mode".into(),
            ));
        }
        for t in &source.terms {
            if t.current.components.len() != grid.e_components().len() {
                return Err(Error::Contract("current density does not match the E layout".into()));
            }
        }
        let weights = filter_weights(&spec, &tg)?;
        let mut grid = grid;
        grid.zero_fields();
        let layout = Arc::new(DofLayout::new(&grid, spec.mode));
        Ok(Self {
            grid,
            source,
            spec,
            tg,
            layout,
            weights,
            rhs: OnceLock::new(),
            solves: AtomicUsize::new(0),
        })
    }

    /// Operator driven by `currents[k] * a_k(t)` at `spec.frequencies[k]`,
    /// with the time grid chosen from the stability rule.
    pub fn build(grid: G, currents: Vec<FieldSet>, spec: FilterSpec) -> Result<Self> {
        spec.validate()?;
        if currents.len() != spec.frequencies.len() {
            return Err(Error::Config(format!(
                "{} current densities given for {} frequencies",
                currents.len(),
                spec.frequencies.len()
            )));
        }
        let tg = TimeGrid::for_grid(&grid, spec.window()?, spec.omega_max())?;
        let source = Source {
            terms: currents
                .into_iter()
                .zip(&spec.frequencies)
                .map(|(current, &omega)| SourceTerm {
                    current,
                    mode: spec.source_mode,
                    omega,
                })
                .collect(),
            drive: None,
        };
        Self::new(grid, source, spec, tg)
    }

    pub fn grid(&self) -> &G {
        &self.grid
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn spec(&self) -> &FilterSpec {
        &self.spec
    }

    pub fn time_grid(&self) -> &TimeGrid {
        &self.tg
    }

    pub fn layout(&self) -> &Arc<DofLayout> {
        &self.layout
    }

    pub fn filter_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn wave_solves(&self) -> usize {
        self.solves.load(Ordering::Relaxed)
    }

    /// True for single-frequency closed PEC domains with sine forcing and the plain trapezoid,
    /// where `I - S` is symmetric positive definite in the energy inner product.
    pub fn is_energy_conserving(&self) -> bool {
        self.spec.mode == StateMode::EnergyConserving
            && self.spec.frequencies.len() == 1
            && self.grid.boundary().is_all_pec()
            && self.spec.forcing == Forcing::Sin
            && self.spec.quadrature == Quadrature::Trapezoid
    }

    fn filtered(&self, nu: &[f64], source: &Source) -> Result<Vec<f64>> {
        let mut g = self.grid.clone();
        self.layout.unflatten(nu, &mut g)?;
        let full = self.spec.mode == StateMode::Full;
        let e_shape = g.e_fields();
        let h_shape = full.then(|| g.h_fields());
        let mut acc = FilterAccumulator::new(self.weights.clone(), &e_shape, h_shape.as_ref());
        evolve(&mut g, source, &self.tg, full, |snap| acc.accumulate(snap))?;
        self.solves.fetch_add(1, Ordering::Relaxed);
        let e = acc.e_fields();
        let h = acc.h_fields();
        Ok(self.layout.gather(&e, h.as_ref()))
    }

    /// One forced evolution from `nu`.
    pub fn apply_pi(&self, nu: &[f64]) -> Result<Vec<f64>> {
        self.filtered(nu, &self.source)
    }

    /// `Pi 0`, computed on first use and cached.
    pub fn rhs(&self) -> Result<&[f64]> {
        if let Some(r) = self.rhs.get() {
            return Ok(r);
        }
        let r = self.apply_pi(&vec![0.0; self.layout.len()])?;
        Ok(self.rhs.get_or_init(|| r))
    }

    /// `S nu = Pi nu - Pi 0`, evaluated as one unforced evolution.
    pub fn apply_s(&self, nu: &[f64]) -> Result<Vec<f64>> {
        let unforced = Source::none();
        if self.source.drive.is_some() {
            // The drive is affine data as well; keep it out of the linear part.
            let pi = self.apply_pi(nu)?;
            let rhs = self.rhs()?;
            return Ok(pi.iter().zip(rhs).map(|(a, b)| a - b).collect());
        }
        self.filtered(nu, &unforced)
    }

    /// `(I - S) nu = nu - Pi nu + Pi 0` with one evolution.
    pub fn apply_i_minus_s(&self, nu: &[f64]) -> Result<Vec<f64>> {
        let rhs = self.rhs()?;
        let pi = self.apply_pi(nu)?;
        Ok(nu
            .iter()
            .zip(&pi)
            .zip(rhs)
            .map(|((v, p), r)| v - p + r)
            .collect())
    }

    /// E and H fields of a state vector.
    pub fn fields(&self, nu: &[f64]) -> Result<(FieldSet, FieldSet)> {
        self.layout.to_fields(nu, &self.grid)
    }

    /// Per-frequency solutions from a converged state. A single frequency
    /// uses the curl-based recovery; several frequencies use one extra
    /// evolution with separation filters.
    pub fn extract(&self, nu: &[f64]) -> Result<Vec<FrequencySolution>> {
        let (e, h) = self.fields(nu)?;
        if self.spec.frequencies.len() == 1 {
            let omega = self.spec.frequencies[0];
            let j = self.source.terms.first().map(|t| &t.current);
            Ok(vec![recover_real(&self.grid, &e, &h, self.spec.forcing, omega, j)?])
        } else {
            separate_frequencies(&self.grid, &e, &h, &self.source, &self.spec.frequencies, &self.tg)
        }
    }
}

impl<G: YeeGrid> LinearOperator for WaveHoltzOperator<G> {
    fn dim(&self) -> usize {
        self.layout.len()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.apply_i_minus_s(x)
    }

    fn work(&self) -> usize {
        self.wave_solves()
    }
}
