//! Analysis suites behind `emwh verify` and `emwh convergence`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use emwaveholtz::analysis::scenarios::{affine_modified, bump_multi, bump_single};
use emwaveholtz::analysis::{
    assemble_dense, cavity_spectrum, convergence_study, dense_solve, multiset_gap, spectrum_report, contraction_check,
    ConvergenceTable, SpectrumReport, ContractionReport,
};
use emwaveholtz::filter::{FilterSpec, Forcing};
use emwaveholtz::grid::{BoundarySpec, Domain, Grid2D, MaterialSpec, StateMode, YeeGrid};
use emwaveholtz::timedomain::{TemporalMode, TimeGrid};
use emwaveholtz::waveholtz::{SolveOptions, SolverKind, WaveHoltzOperator};
use emwaveholtz::Result;

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

pub struct SpdOutcome {
    pub spectrum: SpectrumReport,
    pub predicted: Vec<f64>,
    pub gap: f64,
    pub check: Check,
}

/// Assembles `I - S` on a PEC square `[-1, 1]^2` and compares its spectrum with
/// `1 - beta_h` evaluated at the discrete cavity eigenvalues.
pub fn spd_suite(cells: usize, omega: f64) -> Result<SpdOutcome> {
    let grid = Grid2D::pec_vacuum(Domain::square(-1.0, 1.0, cells)?)?;
    let j = grid.sample_e(|_, q| -omega * (-omega * omega * (q[0] * q[0] + q[1] * q[1])).exp());
    let op = WaveHoltzOperator::build(grid, vec![j], FilterSpec::single(omega, 1, Forcing::Sin))?;
    let dense = assemble_dense(&op, &format!("spd cells={cells} omega={omega}"))?;
    let spectrum = spectrum_report(&dense);
    let cavity = cavity_spectrum(op.grid(), op.time_grid())?;
    let predicted = cavity.i_minus_s_eigenvalues(op.filter_weights(), op.time_grid());
    let gap = multiset_gap(&spectrum.eigenvalues, &predicted).unwrap_or(f64::INFINITY);
    let pass = spectrum.symmetric_deviation <= 1e-12 && spectrum.min > 0.0 && gap <= 1e-8;
    let check = Check {
        name: "spd".into(),
        pass,
        detail: format!(
            "asymmetry {:.2e}, min eig {:.4e}, cond {:.4e}, gap to 1-beta_h {:.2e}",
            spectrum.symmetric_deviation, spectrum.min, spectrum.condition, gap
        ),
    };
    Ok(SpdOutcome { spectrum, predicted, gap, check })
}

/// `count` random frequencies in `[lo, hi]` whose relative distance to the
/// nearest cavity eigenvalue is at least `min_delta`.
pub fn off_resonant_frequencies(grid: &Grid2D, count: usize, lo: f64, hi: f64, min_delta: f64, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count && tries < 10_000 {
        tries += 1;
        let w: f64 = rng.random_range(lo..hi);
        let tg = TimeGrid::for_grid(grid, 2.0 * std::f64::consts::PI / w, w)?;
        if cavity_spectrum(grid, &tg)?.delta(w) >= min_delta {
            out.push(w);
        }
    }
    Ok(out)
}

/// Measured fixed-point contraction against the WaveHoltz rate bound.
pub fn contraction_suite(cells: usize, count: usize, seed: u64) -> Result<(Vec<ContractionReport>, Check)> {
    let grid = Grid2D::pec_vacuum(Domain::square(0.0, 1.0, cells)?)?;
    let freqs = off_resonant_frequencies(&grid, count, 2.0, 20.0, 0.02, seed)?;
    let mut reps = Vec::new();
    for (k, &w) in freqs.iter().enumerate() {
        let tg = TimeGrid::for_grid(&grid, 2.0 * std::f64::consts::PI / w, w)?;
        reps.push(contraction_check(&grid, w, &tg, seed + k as u64)?);
    }
    let worst = reps
        .iter()
        .map(|r| r.measured_rate - (r.bound + 0.02))
        .fold(f64::NEG_INFINITY, f64::max);
    let pass = reps.len() == count && reps.iter().all(|r| r.pass);
    let violated = reps.iter().filter(|r| !r.hypothesis_holds).count();
    let check = Check {
        name: "contraction".into(),
        pass,
        detail: format!(
            "{} frequencies, worst measured - (bound + 0.02) = {worst:.3e}, step hypothesis violated in {violated}",
            reps.len()
        ),
    };
    Ok((reps, check))
}

/// Affine `Ez = x + y` with the modified source and quadrature.
pub fn temporal_suite(cells: usize, freqs: &[f64]) -> Result<(Vec<f64>, Check)> {
    let mut errs = Vec::new();
    for &w in freqs {
        let (_, e) = affine_modified(cells, w, &SolveOptions::new(1e-13, 200))?;
        errs.push(e);
    }
    let worst = errs.iter().copied().fold(0.0, f64::max);
    let check = Check {
        name: "temporal".into(),
        pass: worst < 1e-10,
        detail: format!("max error {worst:.3e} over {} frequencies", freqs.len()),
    };
    Ok((errs, check))
}

fn rel_inf(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let den = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    num / den.max(f64::MIN_POSITIVE)
}

/// Krylov solutions against a dense LU solve of the assembled operator, on a
/// closed cavity (CG and GMRES) and an open one (GMRES, full state).
pub fn oracle_suite(cells: usize) -> Result<(Vec<(String, f64)>, Check)> {
    let omega = 5.5;
    let opts = SolveOptions { extract: false, ..SolveOptions::new(1e-13, 400) };
    let mut rows = Vec::new();
    let closed = Grid2D::pec_vacuum(Domain::square(-1.0, 1.0, cells)?)?;
    let j = closed.sample_e(|_, q| omega * (-8.0 * (q[0] * q[0] + q[1] * q[1])).exp());
    let op = WaveHoltzOperator::build(closed, vec![j], FilterSpec::single(omega, 1, Forcing::Sin))?;
    let exact = dense_solve(&assemble_dense(&op, "oracle pec")?.matrix, op.rhs()?)?;
    for kind in [SolverKind::Gmres, SolverKind::Cg] {
        let r = op.solve(kind, &opts)?;
        rows.push((format!("pec {}", kind.name()), rel_inf(&r.nu, &exact)));
    }
    let open = Grid2D::new(Domain::square(-1.0, 1.0, cells)?, &MaterialSpec::vacuum(), &[], BoundarySpec::open(2))?;
    let j = open.sample_e(|_, q| omega * (-8.0 * (q[0] * q[0] + q[1] * q[1])).exp());
    let spec = FilterSpec::single(omega, 1, Forcing::Sin).with_mode(StateMode::Full);
    let op = WaveHoltzOperator::build(open, vec![j], spec)?;
    let exact = dense_solve(&assemble_dense(&op, "oracle open")?.matrix, op.rhs()?)?;
    let r = op.gmres_solve(&opts)?;
    rows.push(("open gmres".into(), rel_inf(&r.nu, &exact)));
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let check = Check {
        name: "oracle".into(),
        pass: worst <= 1e-8,
        detail: format!("worst relative max-norm gap {worst:.3e}"),
    };
    Ok((rows, check))
}

/// Manufactured-solution refinement at one frequency (recursive source).
pub fn single_convergence(omega: f64, resolutions: &[usize], tol: f64) -> Result<ConvergenceTable> {
    convergence_study(&[omega], resolutions, 1.0, |n| {
        let (_, e) = bump_single(n, omega, TemporalMode::SinRecursive, &SolveOptions::new(tol, 500))?;
        Ok(vec![e])
    })
}

/// Manufactured-solution refinement for one multi-frequency solve.
pub fn multi_convergence(freqs: &[f64], resolutions: &[usize], tol: f64) -> Result<ConvergenceTable> {
    convergence_study(freqs, resolutions, 1.0, |n| Ok(bump_multi(n, freqs, &SolveOptions::new(tol, 500))?.1))
}

/// Relative max-norm gap between separated multi-frequency solutions and
/// one-at-a-time solutions, per resolution and frequency.
pub fn multifreq_equivalence(freqs: &[f64], resolutions: &[usize], tol: f64) -> Result<ConvergenceTable> {
    convergence_study(freqs, resolutions, 1.0, |n| {
        let opts = SolveOptions::new(tol, 500);
        let (multi, _) = bump_multi(n, freqs, &opts)?;
        let mut gaps = Vec::new();
        for (k, &w) in freqs.iter().enumerate() {
            let (single, _) = bump_single(n, w, TemporalMode::SinRecursive, &opts)?;
            let a = &multi.solutions[k].im_e.components[0];
            let b = &single.solutions[0].im_e.components[0];
            gaps.push(rel_inf(a, b));
        }
        Ok(gaps)
    })
}

pub fn eigen_csv(s: &SpdOutcome) -> String {
    let mut p = s.predicted.clone();
    p.sort_by(f64::total_cmp);
    let mut out = String::from("index,assembled,predicted\n");
    for (i, (a, b)) in s.spectrum.eigenvalues.iter().zip(&p).enumerate() {
        let _ = writeln!(out, "{i},{a:.15e},{b:.15e}");
    }
    out
}

pub fn contraction_csv(reps: &[ContractionReport]) -> String {
    let mut out = String::from(
        "omega,dt,delta_h,bound_063,bound_06,continuous_estimate,predicted_rate,measured_rate,iterations,hypothesis_holds,pass\n",
    );
    for r in reps {
        let _ = writeln!(
            out,
            "{},{:.6e},{:.6e},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{}",
            r.omega,
            r.dt,
            r.delta_h,
            r.bound,
            r.bound_06,
            r.continuous_estimate,
            r.predicted_rate,
            r.measured_rate,
            r.iterations,
            r.hypothesis_holds,
            r.pass
        );
    }
    out
}
