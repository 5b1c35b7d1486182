use super::{Source, TimeGrid};
use crate::error::{Error, Result};
use crate::grid::{FieldSet, Grid2D, Grid3D, YeeGrid};

/// Fields at integer time level `n` handed to an evolve observer.
pub struct Snapshot<'a> {
    pub n: usize,
    pub t: f64,
    /// E at `t^n`.
    pub e: &'a [Vec<f64>],
    /// `(H^{n+1/2} + H^{n-1/2}) / 2` when H averaging was requested.
    pub h: Option<&'a [Vec<f64>]>,
}

/// `H^{-1/2} = H^0 - (dt/2) (-(1/mu) curl E^0)`.
pub fn init_h_half<G: YeeGrid>(grid: &mut G, dt: f64) {
    grid.update_h(-0.5 * dt);
}

fn apply_drive<G: YeeGrid>(grid: &mut G, source: &Source, t: f64) {
    if let Some(d) = &source.drive {
        let a = d.signal(t);
        for (c, g) in d.values.components.iter().enumerate() {
            let s = grid.storage_mut();
            for ((v, &m), &gv) in s.e[c].iter_mut().zip(&s.mask[c]).zip(g) {
                if m {
                    *v = gv * a;
                }
            }
        }
    }
}

/// One leapfrog step from `(E^n, H^{n-1/2})` to `(E^{n+1}, H^{n+1/2})`.
pub fn step<G: YeeGrid>(
    grid: &mut G,
    n: usize,
    source: &Source,
    amplitudes: &[Vec<f64>],
    tg: &TimeGrid,
) {
    grid.update_h(tg.dt);
    advance_e(grid, n, source, amplitudes, tg);
}

fn advance_e<G: YeeGrid>(
    grid: &mut G,
    n: usize,
    source: &Source,
    amplitudes: &[Vec<f64>],
    tg: &TimeGrid,
) {
    let terms: Vec<(f64, &FieldSet)> = source
        .terms
        .iter()
        .zip(amplitudes)
        .map(|(t, a)| (a[n], &t.current))
        .collect();
    grid.update_e(tg.dt, &terms);
    apply_drive(grid, source, tg.time(n + 1));
}

pub fn step_2d_tm(grid: &mut Grid2D, n: usize, source: &Source, amplitudes: &[Vec<f64>], tg: &TimeGrid) {
    step(grid, n, source, amplitudes, tg)
}

pub fn step_3d(grid: &mut Grid3D, n: usize, source: &Source, amplitudes: &[Vec<f64>], tg: &TimeGrid) {
    step(grid, n, source, amplitudes, tg)
}

fn check_source<G: YeeGrid>(grid: &G, source: &Source) -> Result<()> {
    for t in &source.terms {
        if t.current.components.len() != grid.e_components().len()
            || t.current
                .components
                .iter()
                .zip(grid.e_components())
                .any(|(c, i)| c.len() != i.len())
        {
            return Err(Error::Contract("current density does not match the E layout".into()));
        }
    }
    if let Some(d) = &source.drive {
        d.values.check_shape(grid.e_components(), "boundary drive")?;
        for (c, g) in d.values.components.iter().enumerate() {
            if g.iter().zip(grid.e_mask(c)).any(|(v, m)| *v != 0.0 && !m) {
                return Err(Error::Contract(
                    "boundary drive is nonzero at an unmasked E location".into(),
                ));
            }
        }
    }
    Ok(())
}

/// Runs `tg.steps` leapfrog steps from the initial data already stored in
/// `grid` (E at `t = 0`, H at `t = 0`), calling `observer` at every level
/// `n = 0..=steps`.
///
/// With `average_h`, the observer sees the time-centred H average; at
/// `n = steps` this uses one extra H update to `t^{M+1/2}`.
pub fn evolve<G: YeeGrid>(
    grid: &mut G,
    source: &Source,
    tg: &TimeGrid,
    average_h: bool,
    mut observer: impl FnMut(&Snapshot),
) -> Result<()> {
    check_source(grid, source)?;
    let amplitudes = source.amplitude_tables(tg)?;
    grid.apply_pec();
    apply_drive(grid, source, 0.0);
    init_h_half(grid, tg.dt);

    let mut h_prev: Vec<Vec<f64>> = if average_h {
        grid.storage().h.clone()
    } else {
        Vec::new()
    };
    for n in 0..=tg.steps {
        if average_h {
            for (dst, src) in h_prev.iter_mut().zip(&grid.storage().h) {
                dst.copy_from_slice(src);
            }
        }
        if n < tg.steps || average_h {
            grid.update_h(tg.dt);
        }
        if average_h {
            for (p, h) in h_prev.iter_mut().zip(&grid.storage().h) {
                for (a, b) in p.iter_mut().zip(h) {
                    *a = 0.5 * (*a + b);
                }
            }
        }
        observer(&Snapshot {
            n,
            t: tg.time(n),
            e: &grid.storage().e,
            h: average_h.then_some(h_prev.as_slice()),
        });
        if n < tg.steps {
            advance_e(grid, n, source, &amplitudes, tg);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Domain;
    use crate::timedomain::TemporalMode;

    #[test]
    fn zero_in_zero_out() {
        let mut g = Grid2D::pec_vacuum(Domain::square(0.0, 1.0, 6).unwrap()).unwrap();
        let tg = TimeGrid::for_grid(&g, 1.0, 1.0).unwrap();
        let mut seen = 0;
        evolve(&mut g, &Source::none(), &tg, true, |s| {
            assert!(s.e.iter().flatten().all(|v| *v == 0.0));
            assert!(s.h.unwrap().iter().flatten().all(|v| *v == 0.0));
            seen += 1;
        })
        .unwrap();
        assert_eq!(seen, tg.steps + 1);
    }

    #[test]
    fn constant_ez_gives_zero_half_step() {
        let mut g = Grid2D::new(
            Domain::square(0.0, 1.0, 5).unwrap(),
            &crate::grid::MaterialSpec::vacuum(),
            &[],
            crate::grid::BoundarySpec::open(2),
        )
        .unwrap();
        g.ez_mut().fill(3.0);
        init_h_half(&mut g, 0.01);
        assert!(g.hx().iter().chain(g.hy()).all(|v| *v == 0.0));
    }

    #[test]
    fn mismatched_current_is_rejected() {
        let mut g = Grid2D::pec_vacuum(Domain::square(0.0, 1.0, 4).unwrap()).unwrap();
        let tg = TimeGrid::for_grid(&g, 1.0, 1.0).unwrap();
        let src = Source::single(FieldSet { components: vec![vec![1.0; 3]] }, TemporalMode::SinExact, 1.0);
        assert!(evolve(&mut g, &src, &tg, false, |_| {}).is_err());
    }
}
