use super::{kernel_weights, FilterAccumulator, Forcing};
use crate::error::Result;
use crate::grid::{FieldSet, YeeGrid};
use crate::timedomain::{evolve, Source, TimeGrid};

/// Both phases of a time-harmonic solution at one frequency.
///
/// With sine forcing the field is `Im cos(omega t) + Re sin(omega t)`; with
/// cosine forcing it is `Re cos(omega t) - Im sin(omega t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySolution {
    pub omega: f64,
    pub im_e: FieldSet,
    pub im_h: FieldSet,
    pub re_e: FieldSet,
    pub re_h: FieldSet,
}

/// Builds the complementary phase from the filtered initial data `(e0, h0)`
/// using the same staggered curls as the time stepper.
///
/// Sine forcing: `Re E = (1/eps) curl H0 / omega`, `Re H = -(1/mu) curl E0 / omega`.
/// Cosine forcing: `Im E = (J/eps - (1/eps) curl H0) / omega`,
/// `Im H = (1/mu) curl E0 / omega`.
pub fn recover_real<G: YeeGrid>(
    grid: &G,
    e0: &FieldSet,
    h0: &FieldSet,
    forcing: Forcing,
    omega: f64,
    current: Option<&FieldSet>,
) -> Result<FrequencySolution> {
    let mut g = grid.clone();
    g.set_e_fields(e0)?;
    g.set_h_fields(h0)?;
    let mut ce = g.curl_h();
    let mut ch = g.curl_e();
    match forcing {
        Forcing::Sin => {
            ce.scale(1.0 / omega);
            ch.scale(1.0 / omega);
            Ok(FrequencySolution {
                omega,
                im_e: e0.clone(),
                im_h: h0.clone(),
                re_e: ce,
                re_h: ch,
            })
        }
        Forcing::Cos => {
            if let Some(j) = current {
                for (c, comp) in ce.components.iter_mut().enumerate() {
                    let eps = grid.permittivity(c);
                    let mask = grid.e_mask(c);
                    for (o, v) in comp.iter_mut().enumerate() {
                        if !mask[o] {
                            *v -= j.components[c][o] / eps[o];
                        }
                    }
                }
            }
            ce.scale(-1.0 / omega);
            ch.scale(-1.0 / omega);
            Ok(FrequencySolution {
                omega,
                im_e: ce,
                im_h: ch,
                re_e: e0.clone(),
                re_h: h0.clone(),
            })
        }
    }
}

/// Splits a converged multi-frequency state into per-frequency solutions.
///
/// Evolves once more from `(e0, h0)` over the window `T` of `tg` and applies,
/// for every `omega_k`, the filters `(2/T) int (cos(omega_k t) - 1/4) u dt`
/// (Im part) and `(2/T) int sin(omega_k t) u dt` (Re part) to E and to the
/// time-averaged H.
pub fn separate_frequencies<G: YeeGrid>(
    grid: &G,
    e0: &FieldSet,
    h0: &FieldSet,
    source: &Source,
    frequencies: &[f64],
    tg: &TimeGrid,
) -> Result<Vec<FrequencySolution>> {
    let mut g = grid.clone();
    g.set_e_fields(e0)?;
    g.set_h_fields(h0)?;
    let mut accs: Vec<(FilterAccumulator, FilterAccumulator)> = frequencies
        .iter()
        .map(|&w| {
            let im = kernel_weights(tg, |t| (w * t).cos() - 0.25);
            let re = kernel_weights(tg, |t| (w * t).sin());
            (
                FilterAccumulator::new(im, e0, Some(h0)),
                FilterAccumulator::new(re, e0, Some(h0)),
            )
        })
        .collect();
    evolve(&mut g, source, tg, true, |snap| {
        for (im, re) in accs.iter_mut() {
            im.accumulate(snap);
            re.accumulate(snap);
        }
    })?;
    Ok(frequencies
        .iter()
        .zip(accs)
        .map(|(&omega, (im, re))| FrequencySolution {
            omega,
            im_e: im.e_fields(),
            im_h: im.h_fields().unwrap_or_else(|| h0.clone()),
            re_e: re.e_fields(),
            re_h: re.h_fields().unwrap_or_else(|| h0.clone()),
        })
        .collect())
}
