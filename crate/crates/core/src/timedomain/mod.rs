//! Leapfrog time stepping, time-harmonic sources and the evolve driver.

mod evolve;
mod source;

pub use evolve::{evolve, init_h_half, step, step_2d_tm, step_3d, Snapshot};
pub use source::{modified_omega, source_amplitude, BoundaryDrive, Source, SourceTerm, TemporalMode};

use crate::error::{Error, Result};
use crate::grid::YeeGrid;

/// Safety factor applied to the Yee CFL step.
pub const COURANT: f64 = 0.9;

/// Uniform time levels `t^n = n dt`, `n = 0..=steps`, with `steps * dt = t_final`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_final: f64,
    pub steps: usize,
    pub dt: f64,
}

impl TimeGrid {
    pub fn new(t_final: f64, steps: usize) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::Config(format!("final time must be positive, got {t_final}")));
        }
        if steps == 0 {
            return Err(Error::Config("at least one time step is required".into()));
        }
        Ok(Self {
            t_final,
            steps,
            dt: t_final / steps as f64,
        })
    }

    /// Largest admissible step for `grid` at frequencies up to `omega_max`.
    ///
    /// This is the smaller of `COURANT * dt_cfl` and `2 / (lambda_up + 2 omega_max / pi)`,
    /// where `lambda_up = 2 / dt_cfl` bounds the largest discrete eigenvalue.
    pub fn max_step<G: YeeGrid>(grid: &G, omega_max: f64) -> f64 {
        let cfl = grid.cfl_dt();
        let lambda_up = 2.0 / cfl;
        let spectral = 2.0 / (lambda_up + 2.0 * omega_max / std::f64::consts::PI);
        (COURANT * cfl).min(spectral)
    }

    /// `steps = ceil(t_final / max_step)` so that `dt` divides `t_final` exactly.
    pub fn for_grid<G: YeeGrid>(grid: &G, t_final: f64, omega_max: f64) -> Result<Self> {
        let dt = Self::max_step(grid, omega_max);
        let steps = (t_final / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Self::new(t_final, steps)
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    /// Rejects steps above the Yee stability limit.
    pub fn check_stability<G: YeeGrid>(&self, grid: &G) -> Result<()> {
        let cfl = grid.cfl_dt();
        if self.dt > cfl * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "time step {:.4e} exceeds the CFL limit {:.4e}",
                self.dt, cfl
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Domain, Grid2D};

    #[test]
    fn steps_divide_window() {
        let g = Grid2D::pec_vacuum(Domain::square(0.0, 1.0, 20).unwrap()).unwrap();
        let t = 2.0 * std::f64::consts::PI / 5.5;
        let tg = TimeGrid::for_grid(&g, t, 5.5).unwrap();
        assert!((tg.dt * tg.steps as f64 - t).abs() < 1e-14);
        assert!(tg.dt <= TimeGrid::max_step(&g, 5.5));
        assert!(tg.check_stability(&g).is_ok());
    }

    #[test]
    fn oversized_step_is_rejected() {
        let g = Grid2D::pec_vacuum(Domain::square(0.0, 1.0, 20).unwrap()).unwrap();
        let tg = TimeGrid::new(1.0, 2).unwrap();
        assert!(matches!(tg.check_stability(&g), Err(Error::Config(_))));
    }

    #[test]
    fn zero_steps_rejected() {
        assert!(TimeGrid::new(1.0, 0).is_err());
        assert!(TimeGrid::new(-1.0, 3).is_err());
    }
}
