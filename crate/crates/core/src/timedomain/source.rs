use super::TimeGrid;
use crate::error::{Error, Result};
use crate::grid::FieldSet;

/// Temporal signature of a current density term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TemporalMode {
    /// `sin(omega t^{n+1/2})`.
    SinExact,
    /// `cos(omega t^{n+1/2})`.
    CosExact,
    /// Second-order recursion `S^{n+1/2} = S^{n-1/2} + dt omega cos(omega t^n)`.
    SinRecursive,
    /// The recursion driven by `cos(omega_bar t^n)`.
    SinRecursiveModified,
}

impl TemporalMode {
    pub fn is_sine(self) -> bool {
        !matches!(self, TemporalMode::CosExact)
    }
}

/// One time-harmonic forcing component `J(x) * a(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceTerm {
    /// Current density, laid out like the E fields.
    pub current: FieldSet,
    pub mode: TemporalMode,
    pub omega: f64,
}

/// Inhomogeneous data `g(x) cos(omega t^n)` imposed on masked E locations
/// after every update.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryDrive {
    pub values: FieldSet,
    pub omega: f64,
}

impl BoundaryDrive {
    pub fn signal(&self, t: f64) -> f64 {
        (self.omega * t).cos()
    }
}

/// Sum of forcing terms plus an optional boundary drive.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Source {
    pub terms: Vec<SourceTerm>,
    pub drive: Option<BoundaryDrive>,
}

impl Source {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn single(current: FieldSet, mode: TemporalMode, omega: f64) -> Self {
        Self {
            terms: vec![SourceTerm { current, mode, omega }],
            drive: None,
        }
    }

    pub fn with_drive(mut self, drive: BoundaryDrive) -> Self {
        self.drive = Some(drive);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.current.is_zero())
            && self.drive.as_ref().is_none_or(|d| d.values.is_zero())
    }

    /// Amplitude table for every term, one row of length `steps` per term.
    pub fn amplitude_tables(&self, tg: &TimeGrid) -> Result<Vec<Vec<f64>>> {
        self.terms
            .iter()
            .map(|t| amplitudes(t.mode, t.omega, tg))
            .collect()
    }
}

/// `omega_bar = (2/dt) asin(omega dt / 2)`, so that `sin(omega_bar dt/2)/(dt/2) = omega`.
pub fn modified_omega(omega: f64, dt: f64) -> Result<f64> {
    let x = omega * dt / 2.0;
    if !(omega > 0.0 && dt > 0.0) {
        return Err(Error::Domain(format!(
            "modified frequency needs omega > 0 and dt > 0 (got {omega}, {dt})"
        )));
    }
    if x > 1.0 {
        return Err(Error::Domain(format!(
            "omega dt = {:.4} exceeds 2, the modified frequency is undefined",
            2.0 * x
        )));
    }
    Ok(2.0 / dt * x.asin())
}

fn amplitudes(mode: TemporalMode, omega: f64, tg: &TimeGrid) -> Result<Vec<f64>> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Config(format!("frequency must be positive, got {omega}")));
    }
    let dt = tg.dt;
    let m = tg.steps;
    let half = |n: usize| (n as f64 + 0.5) * dt;
    Ok(match mode {
        TemporalMode::SinExact => (0..m).map(|n| (omega * half(n)).sin()).collect(),
        TemporalMode::CosExact => (0..m).map(|n| (omega * half(n)).cos()).collect(),
        TemporalMode::SinRecursive | TemporalMode::SinRecursiveModified => {
            let w = if mode == TemporalMode::SinRecursive {
                omega
            } else {
                modified_omega(omega, dt).map_err(|e| Error::Config(e.to_string()))?
            };
            let mut out = Vec::with_capacity(m);
            let mut s = omega * dt / 2.0;
            out.push(s);
            for n in 1..m {
                s += dt * omega * (w * tg.time(n)).cos();
                out.push(s);
            }
            out
        }
    })
}

/// Multiplier of `J` in the E update from `t^n` to `t^{n+1}`.
pub fn source_amplitude(n: usize, mode: TemporalMode, omega: f64, tg: &TimeGrid) -> Result<f64> {
    if n >= tg.steps {
        return Err(Error::Contract(format!(
            "step index {n} outside [0, {})",
            tg.steps
        )));
    }
    match mode {
        TemporalMode::SinExact => Ok((omega * (n as f64 + 0.5) * tg.dt).sin()),
        TemporalMode::CosExact => Ok((omega * (n as f64 + 0.5) * tg.dt).cos()),
        _ => {
            let short = TimeGrid {
                t_final: tg.dt * (n + 1) as f64,
                steps: n + 1,
                dt: tg.dt,
            };
            Ok(amplitudes(mode, omega, &short)?[n])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn recursion_starts_at_half_omega_dt() {
        let tg = TimeGrid::new(1.0, 50).unwrap();
        let a = source_amplitude(0, TemporalMode::SinRecursive, 3.0, &tg).unwrap();
        assert_eq!(a, 3.0 * tg.dt / 2.0);
    }

    #[test]
    fn exact_sine_peaks_at_quarter_period() {
        let omega = 2.0;
        // t^{1/2} = dt/2 = pi/(2 omega)
        let dt = PI / omega;
        let tg = TimeGrid::new(dt * 4.0, 4).unwrap();
        let a = source_amplitude(0, TemporalMode::SinExact, omega, &tg).unwrap();
        assert!((a - 1.0).abs() < 1e-15);
    }

    #[test]
    fn modified_omega_at_limit() {
        let dt = 0.1;
        let w = modified_omega(2.0 / dt, dt).unwrap();
        assert!((w - PI / dt).abs() < 1e-12);
        assert!(matches!(modified_omega(2.1 / dt, dt), Err(Error::Domain(_))));
    }

    #[test]
    fn modified_omega_series() {
        for &x in &[1e-2, 3e-2, 1e-1] {
            let omega = 7.0;
            let dt = x / omega;
            let w = modified_omega(omega, dt).unwrap();
            let series = omega * (1.0 + x * x / 24.0 + 3.0 * x.powi(4) / 640.0);
            assert!((w - series).abs() / omega < 1e-3 * x.powi(6) + 1e-14);
            assert!((((w * dt / 2.0).sin() / (dt / 2.0)) - omega).abs() < 1e-12);
        }
    }

    #[test]
    fn modified_recursion_rejects_large_steps() {
        let tg = TimeGrid::new(1.0, 2).unwrap();
        let src = Source::single(FieldSet { components: vec![] }, TemporalMode::SinRecursiveModified, 10.0);
        assert!(matches!(src.amplitude_tables(&tg), Err(Error::Config(_))));
    }

    #[test]
    fn recursion_is_second_order() {
        let omega = 4.0;
        let t = 2.0 * PI / omega;
        let dev = |m: usize| {
            let tg = TimeGrid::new(t, m).unwrap();
            let rec = amplitudes(TemporalMode::SinRecursive, omega, &tg).unwrap();
            rec.iter()
                .enumerate()
                .map(|(n, a)| (a - (omega * (n as f64 + 0.5) * tg.dt).sin()).abs())
                .fold(0.0, f64::max)
        };
        let rate = (dev(100) / dev(200)).log2();
        assert!(rate > 1.9, "rate {rate}");
    }
}
