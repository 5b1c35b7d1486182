//! Ready-made problem setups used by the acceptance suite, the CLI and the
//! Python bindings.

use crate::error::Result;
use crate::filter::{FilterSpec, Forcing, Quadrature};
use crate::grid::{BoundarySpec, Domain, FieldSet, Grid2D, Grid3D, MaterialSpec, StateMode, YeeGrid};
use crate::timedomain::{modified_omega, BoundaryDrive, Source, TemporalMode, TimeGrid};
use crate::waveholtz::{solve_multi_frequency, SolveOptions, SolveReport, SolverKind, WaveHoltzOperator};

fn p(s: f64) -> f64 {
    s * s * (s - 1.0) * (s - 1.0)
}

fn p2(s: f64) -> f64 {
    12.0 * s * s - 12.0 * s + 2.0
}

/// `16 x^2 (x-1)^2 y^2 (y-1)^2`, vanishing on the boundary of the unit square.
pub fn bump(x: f64, y: f64) -> f64 {
    16.0 * p(x) * p(y)
}

pub fn bump_laplacian(x: f64, y: f64) -> f64 {
    16.0 * (p2(x) * p(y) + p(x) * p2(y))
}

/// Current with sine forcing whose frequency-domain solution is `u`:
/// `J = (omega^2 u + lap u) / omega` for unit coefficients.
pub fn manufactured_current<G: YeeGrid>(
    grid: &G,
    omega: f64,
    u: impl Fn(f64, f64) -> f64,
    lap: impl Fn(f64, f64) -> f64,
) -> FieldSet {
    grid.sample_e(|_, q| (omega * omega * u(q[0], q[1]) + lap(q[0], q[1])) / omega)
}

fn max_error(field: &[f64], grid: &Grid2D, u: impl Fn(f64, f64) -> f64) -> f64 {
    let exact = grid.sample_e(|_, q| u(q[0], q[1]));
    field
        .iter()
        .zip(&exact.components[0])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

pub fn unit_pec_grid(cells: usize) -> Result<Grid2D> {
    Grid2D::pec_vacuum(Domain::square(0.0, 1.0, cells)?)
}

/// Manufactured bump solved at one frequency; returns the report and the
/// max-norm error of the converged `Ez`.
pub fn bump_single(cells: usize, omega: f64, mode: TemporalMode, opts: &SolveOptions) -> Result<(SolveReport, f64)> {
    let grid = unit_pec_grid(cells)?;
    let j = manufactured_current(&grid, omega, bump, bump_laplacian);
    let spec = FilterSpec::single(omega, 1, Forcing::Sin).with_source_mode(mode);
    let op = WaveHoltzOperator::build(grid, vec![j], spec)?;
    let rep = op.solve(op.default_solver(), opts)?;
    let (e, _) = op.fields(&rep.nu)?;
    let err = max_error(&e.components[0], op.grid(), bump);
    Ok((rep, err))
}

/// Manufactured bump driven at several frequencies in one solve; returns
/// the report and the per-frequency errors of the separated `Ez`.
pub fn bump_multi(cells: usize, frequencies: &[f64], opts: &SolveOptions) -> Result<(SolveReport, Vec<f64>)> {
    let grid = unit_pec_grid(cells)?;
    let currents = frequencies
        .iter()
        .map(|&w| manufactured_current(&grid, w, bump, bump_laplacian))
        .collect();
    let rep = solve_multi_frequency(grid.clone(), currents, frequencies.to_vec(), 1, Some(SolverKind::Gmres), opts)?;
    let errs = rep
        .solutions
        .iter()
        .map(|s| max_error(&s.im_e.components[0], &grid, bump))
        .collect();
    Ok((rep, errs))
}

/// `Ez = x + y` with matching Dirichlet data, the modified recursive source
/// and the modified quadrature. Returns the report and the max-norm error.
pub fn affine_modified(cells: usize, omega: f64, opts: &SolveOptions) -> Result<(SolveReport, f64)> {
    let grid = unit_pec_grid(cells)?;
    let u = |x: f64, y: f64| x + y;
    let spec = FilterSpec::single(omega, 1, Forcing::Sin)
        .with_source_mode(TemporalMode::SinRecursiveModified)
        .with_quadrature(Quadrature::TrapezoidModified);
    let tg = TimeGrid::for_grid(&grid, spec.window()?, omega)?;
    let j = manufactured_current(&grid, omega, u, |_, _| 0.0);
    let mut g = grid.sample_e(|_, q| u(q[0], q[1]));
    for (v, &m) in g.components[0].iter_mut().zip(grid.mask()) {
        if !m {
            *v = 0.0;
        }
    }
    let drive = BoundaryDrive {
        values: g,
        omega: modified_omega(omega, tg.dt)?,
    };
    let source = Source::single(j, TemporalMode::SinRecursiveModified, omega).with_drive(drive);
    let op = WaveHoltzOperator::new(grid, source, spec, tg)?;
    let rep = op.gmres_solve(opts)?;
    let (e, _) = op.fields(&rep.nu)?;
    // Boundary nodes carry the drive, not the state; compare the interior.
    let exact = op.grid().sample_e(|_, q| u(q[0], q[1]));
    let err = e.components[0]
        .iter()
        .zip(&exact.components[0])
        .zip(op.grid().mask())
        .filter(|(_, m)| !**m)
        .map(|((a, b), _)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok((rep, err))
}

fn square(cells: usize) -> Result<Domain> {
    Domain::square(-1.0, 1.0, cells)
}

fn mode_for(boundary: &BoundarySpec) -> StateMode {
    if boundary.is_all_pec() {
        StateMode::EnergyConserving
    } else {
        StateMode::Full
    }
}

/// `Jz = amp exp(-sigma ((x - cx)^2 + (y - cy)^2))` on `[-1, 1]^2` with sine forcing.
#[allow(clippy::too_many_arguments)]
pub fn gaussian_2d(
    cells: usize,
    omega: f64,
    boundary: BoundarySpec,
    mode: StateMode,
    periods: usize,
    amp: f64,
    sigma: f64,
    center: [f64; 2],
) -> Result<WaveHoltzOperator<Grid2D>> {
    let grid = Grid2D::new(square(cells)?, &MaterialSpec::vacuum(), &[], boundary)?;
    let j = grid.sample_e(|_, q| {
        amp * (-sigma * ((q[0] - center[0]).powi(2) + (q[1] - center[1]).powi(2))).exp()
    });
    let spec = FilterSpec::single(omega, periods, Forcing::Sin).with_mode(mode);
    WaveHoltzOperator::build(grid, vec![j], spec)
}

/// Points-per-wavelength setup: `Jz = omega exp(-144 (x^2 + y^2))`, 10 periods.
pub fn ppw_2d(cells: usize, omega: f64, boundary: BoundarySpec, mode: StateMode) -> Result<WaveHoltzOperator<Grid2D>> {
    gaussian_2d(cells, omega, boundary, mode, 10, omega, 144.0, [0.0, 0.0])
}

/// Frequency-sweep setup: `Jz = -omega exp(-sigma ((x-0.01)^2 + (y-0.015)^2))`,
/// `sigma = max(36, omega^2)`.
/// Always iterates the full state.
pub fn sweep_2d(cells: usize, omega: f64, boundary: BoundarySpec, periods: usize) -> Result<WaveHoltzOperator<Grid2D>> {
    gaussian_2d(cells, omega, boundary, StateMode::Full, periods, -omega, (omega * omega).max(36.0), [0.01, 0.015])
}

/// `Jx = -omega exp(-sigma r^2)` on `[-1, 1]^3`. Cosine forcing uses the full state.
pub fn gaussian_3d(
    cells: usize,
    omega: f64,
    boundary: BoundarySpec,
    periods: usize,
    forcing: Forcing,
    sigma: f64,
) -> Result<WaveHoltzOperator<Grid3D>> {
    let mode = if forcing == Forcing::Cos { StateMode::Full } else { mode_for(&boundary) };
    let grid = Grid3D::new(Domain::cube(-1.0, 1.0, cells)?, &MaterialSpec::vacuum(), &[], boundary)?;
    let j = grid.sample_e(|c, q| {
        if c == 0 {
            -omega * (-sigma * (q[0] * q[0] + q[1] * q[1] + q[2] * q[2])).exp()
        } else {
            0.0
        }
    });
    let spec = FilterSpec::single(omega, periods, forcing).with_mode(mode);
    WaveHoltzOperator::build(grid, vec![j], spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_laplacian_matches_finite_differences() {
        let h = 1e-4;
        for &(x, y) in &[(0.3, 0.6), (0.5, 0.5), (0.9, 0.1)] {
            let fd = (bump(x + h, y) + bump(x - h, y) + bump(x, y + h) + bump(x, y - h) - 4.0 * bump(x, y)) / (h * h);
            assert!((fd - bump_laplacian(x, y)).abs() < 1e-5);
        }
        assert_eq!(bump(0.0, 0.3), 0.0);
        assert!((bump(0.5, 0.5) - 16.0 / 256.0).abs() < 1e-15);
    }
}
