use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::StateMode;
use crate::timedomain::TemporalMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quadrature {
    Trapezoid,
    /// Trapezoid rescaled by `cos(omega t^n) / cos(omega_bar t^n)`; pairs with
    /// the modified recursive source.
    TrapezoidModified,
}

/// Phase of the harmonic forcing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Forcing {
    Sin,
    Cos,
}

/// Frequencies, window and quadrature of a WaveHoltz filter.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    /// Strictly increasing, each an integer multiple of a common base frequency.
    pub frequencies: Vec<f64>,
    /// Window length in periods of the base frequency.
    pub periods: usize,
    pub quadrature: Quadrature,
    pub forcing: Forcing,
    /// Temporal discretisation of every forcing term.
    pub source_mode: TemporalMode,
    pub mode: StateMode,
}

/// Largest multiplier tried when searching for a common base frequency.
pub const MAX_BASE_DIVISOR: usize = 16;

/// Base `omega_0` with every `omega_k / omega_0` an integer.
///
/// Tries `omega_0 = omega_1 / m` for `m = 1..=MAX_BASE_DIVISOR`.
pub fn common_base_frequency(frequencies: &[f64]) -> Result<f64> {
    let first = *frequencies
        .first()
        .ok_or_else(|| Error::Config("frequency list is empty".into()))?;
    for m in 1..=MAX_BASE_DIVISOR {
        let base = first / m as f64;
        let ok = frequencies.iter().all(|w| {
            let r = w / base;
            (r - r.round()).abs() < 1e-9 * r.max(1.0) && r.round() >= 1.0
        });
        if ok {
            return Ok(base);
        }
    }
    let list: Vec<String> = frequencies.iter().map(|w| w.to_string()).collect();
    Err(Error::Config(format!(
        "frequencies [{}] are not integer multiples of a common base frequency",
        list.join(", ")
    )))
}

impl FilterSpec {
    /// Single-frequency trapezoid filter with the default source discretisation.
    pub fn single(omega: f64, periods: usize, forcing: Forcing) -> Self {
        Self {
            frequencies: vec![omega],
            periods,
            quadrature: Quadrature::Trapezoid,
            forcing,
            source_mode: match forcing {
                Forcing::Sin => TemporalMode::SinExact,
                Forcing::Cos => TemporalMode::CosExact,
            },
            mode: StateMode::EnergyConserving,
        }
    }

    pub fn multi(frequencies: Vec<f64>, periods: usize) -> Self {
        Self {
            frequencies,
            periods,
            quadrature: Quadrature::Trapezoid,
            forcing: Forcing::Sin,
            source_mode: TemporalMode::SinExact,
            mode: StateMode::EnergyConserving,
        }
    }

    pub fn with_mode(mut self, mode: StateMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_source_mode(mut self, m: TemporalMode) -> Self {
        self.source_mode = m;
        self
    }

    pub fn with_quadrature(mut self, q: Quadrature) -> Self {
        self.quadrature = q;
        self
    }

    pub fn omega_max(&self) -> f64 {
        self.frequencies.iter().fold(0.0, |a, &b| a.max(b))
    }

    pub fn base_frequency(&self) -> Result<f64> {
        common_base_frequency(&self.frequencies)
    }

    /// `T = periods * 2 pi / omega_0`.
    pub fn window(&self) -> Result<f64> {
        Ok(self.periods as f64 * 2.0 * PI / self.base_frequency()?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frequencies.is_empty() {
            return Err(Error::Config("at least one frequency is required".into()));
        }
        if self.frequencies.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::Config("frequencies must be positive and finite".into()));
        }
        if self.frequencies.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Config("frequencies must be strictly increasing".into()));
        }
        if self.periods == 0 {
            return Err(Error::Config("the filter window needs at least one period".into()));
        }
        self.base_frequency()?;
        match (self.forcing, self.source_mode) {
            (Forcing::Sin, TemporalMode::CosExact) | (Forcing::Cos, TemporalMode::SinExact)
            | (Forcing::Cos, TemporalMode::SinRecursive)
            | (Forcing::Cos, TemporalMode::SinRecursiveModified) => {
                return Err(Error::Config(format!(
                    "source discretisation {:?} does not match {:?} forcing",
                    self.source_mode, self.forcing
                )));
            }
            _ => {}
        }
        if self.frequencies.len() > 1 && self.forcing == Forcing::Cos {
            return Err(Error::Unsupported(
                "multi-frequency solves support sine forcing only".into(),
            ));
        }
        if self.quadrature == Quadrature::TrapezoidModified {
            if self.frequencies.len() != 1 || self.forcing != Forcing::Sin {
                return Err(Error::Config(
                    "the modified quadrature needs a single frequency with sine forcing".into(),
                ));
            }
            if self.source_mode != TemporalMode::SinRecursiveModified {
                return Err(Error::Config(
                    "the modified quadrature needs the modified recursive source".into(),
                ));
            }
        }
        if self.forcing == Forcing::Cos && self.mode == StateMode::EnergyConserving {
            return Err(Error::Config(
                "cosine forcing excites H at t = 0; use the full state mode".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_frequency_of_odd_harmonics() {
        let b = common_base_frequency(&[5.5, 16.5, 38.5]).unwrap();
        assert!((b - 5.5).abs() < 1e-12);
        let b = common_base_frequency(&[10.0, 15.0]).unwrap();
        assert!((b - 5.0).abs() < 1e-12);
    }

    #[test]
    fn incommensurate_list_is_rejected() {
        assert!(matches!(common_base_frequency(&[5.5, 7.1]), Err(Error::Config(_))));
        assert!(FilterSpec::multi(vec![5.5, 7.1], 1).validate().is_err());
    }

    #[test]
    fn ordering_is_enforced() {
        assert!(FilterSpec::multi(vec![16.5, 5.5], 1).validate().is_err());
    }

    #[test]
    fn window_is_an_integer_number_of_periods() {
        let s = FilterSpec::multi(vec![5.5, 16.5, 38.5], 2);
        let t = s.window().unwrap();
        for w in &s.frequencies {
            let p = t * w / (2.0 * PI);
            assert!((p - p.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn modified_quadrature_requires_modified_source() {
        let s = FilterSpec::single(3.0, 1, Forcing::Sin).with_quadrature(Quadrature::TrapezoidModified);
        assert!(s.validate().is_err());
        let s = s.with_source_mode(TemporalMode::SinRecursiveModified);
        assert!(s.validate().is_ok());
    }
}
