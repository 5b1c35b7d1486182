//! The outer WaveHoltz solve: the filtered map, its linear part, the plain
//! fixed-point iteration and matrix-free Krylov solvers.

mod krylov;
mod operator;

pub use krylov::{cg, gmres, DenseMatrix, KrylovOptions, KrylovOutcome, LinearOperator, ResidualEntry};
pub use operator::WaveHoltzOperator;

use std::time::Instant;

use crate::error::Result;
use crate::filter::{FilterSpec, FrequencySolution};
use crate::grid::{FieldSet, StateMode, YeeGrid};
use krylov::norm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    FixedPoint,
    Cg,
    Gmres,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::FixedPoint => "fixed-point",
            SolverKind::Cg => "cg",
            SolverKind::Gmres => "gmres",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solver: SolverKind,
    pub nu: Vec<f64>,
    pub iterations: usize,
    /// Relative residual `||Pi 0 - (I - S) nu|| / ||Pi 0||` per iteration,
    /// starting with iteration 0.
    pub history: Vec<ResidualEntry>,
    pub converged: bool,
    pub tolerance: f64,
    pub wall_seconds: f64,
    pub wave_solves: usize,
    pub solutions: Vec<FrequencySolution>,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |e| e.relative_residual)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub restart: Option<usize>,
    /// Skip the per-frequency extraction (saves one evolution for several frequencies).
    pub extract: bool,
}

impl SolveOptions {
    pub fn new(tol: f64, max_iters: usize) -> Self {
        Self {
            tol,
            max_iters,
            restart: None,
            extract: true,
        }
    }
}

impl<G: YeeGrid> WaveHoltzOperator<G> {
    /// CG when the configuration is provably symmetric positive definite, GMRES otherwise.
    pub fn default_solver(&self) -> SolverKind {
        if self.is_energy_conserving() {
            SolverKind::Cg
        } else {
            SolverKind::Gmres
        }
    }

    pub fn solve(&self, kind: SolverKind, opts: &SolveOptions) -> Result<SolveReport> {
        match kind {
            SolverKind::FixedPoint => self.fixed_point_solve(opts),
            SolverKind::Cg => self.cg_solve(opts),
            SolverKind::Gmres => self.gmres_solve(opts),
        }
    }

    fn finish(
        &self,
        kind: SolverKind,
        out: KrylovOutcome,
        opts: &SolveOptions,
        start: Instant,
    ) -> Result<SolveReport> {
        let solutions = if opts.extract { self.extract(&out.x)? } else { Vec::new() };
        Ok(SolveReport {
            solver: kind,
            nu: out.x,
            iterations: out.iterations,
            history: out.history,
            converged: out.converged,
            tolerance: opts.tol,
            wall_seconds: start.elapsed().as_secs_f64(),
            wave_solves: self.wave_solves(),
            solutions,
        })
    }

    pub fn gmres_solve(&self, opts: &SolveOptions) -> Result<SolveReport> {
        let start = Instant::now();
        let b = self.rhs()?.to_vec();
        let mut k = KrylovOptions::new(opts.tol, opts.max_iters);
        k.restart = opts.restart;
        let out = gmres(self, &b, None, &k)?;
        self.finish(SolverKind::Gmres, out, opts, start)
    }

    /// CG in the inner product weighted by `eps` (and `mu` on H entries),
    /// in which `I - S` is self-adjoint.
    pub fn cg_solve(&self, opts: &SolveOptions) -> Result<SolveReport> {
        let start = Instant::now();
        let b = self.rhs()?.to_vec();
        let mut k = KrylovOptions::new(opts.tol, opts.max_iters);
        if !self.grid().is_vacuum() {
            k.weights = Some(self.layout().energy_weights(self.grid()));
        }
        let out = cg(self, &b, &k)?;
        self.finish(SolverKind::Cg, out, opts, start)
    }

    /// `nu^{k+1} = Pi nu^k` from `nu^0 = 0`; the residual is
    /// `||Pi nu^k - nu^k|| / ||Pi 0||`.
    pub fn fixed_point_solve(&self, opts: &SolveOptions) -> Result<SolveReport> {
        self.fixed_point_from(None, opts)
    }

    pub fn fixed_point_from(&self, nu0: Option<&[f64]>, opts: &SolveOptions) -> Result<SolveReport> {
        let start = Instant::now();
        let b = self.rhs()?.to_vec();
        let bnorm = norm(&b);
        let mut nu = nu0.map_or_else(|| vec![0.0; b.len()], <[f64]>::to_vec);
        let entry = |it: usize, rel: f64| ResidualEntry {
            iteration: it,
            relative_residual: rel,
            wave_solves: self.wave_solves(),
            seconds: start.elapsed().as_secs_f64(),
        };
        let mut history = Vec::new();
        let mut converged = false;
        let mut iterations = 0;
        if bnorm == 0.0 {
            history.push(entry(0, 0.0));
            converged = true;
        } else {
            // The nu^0 = 0 residual is free: Pi 0 - 0.
            let mut next = if nu0.is_some() { self.apply_pi(&nu)? } else { b.clone() };
            loop {
                let diff: Vec<f64> = next.iter().zip(&nu).map(|(a, c)| a - c).collect();
                let rel = norm(&diff) / bnorm;
                history.push(entry(iterations, rel));
                if rel <= opts.tol {
                    converged = true;
                    break;
                }
                if iterations >= opts.max_iters {
                    break;
                }
                nu = next;
                iterations += 1;
                next = self.apply_pi(&nu)?;
            }
        }
        let out = KrylovOutcome {
            x: nu,
            iterations,
            converged,
            history,
        };
        self.finish(SolverKind::FixedPoint, out, opts, start)
    }
}

/// One Krylov solve for several commensurate frequencies driven by
/// `sum_k sin(omega_k t) J_k`, followed by frequency separation.
pub fn solve_multi_frequency<G: YeeGrid>(
    grid: G,
    currents: Vec<FieldSet>,
    frequencies: Vec<f64>,
    periods: usize,
    kind: Option<SolverKind>,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let mode = if grid.boundary().is_all_pec() {
        StateMode::EnergyConserving
    } else {
        StateMode::Full
    };
    let spec = FilterSpec::multi(frequencies, periods).with_mode(mode);
    let op = WaveHoltzOperator::build(grid, currents, spec)?;
    let kind = kind.unwrap_or_else(|| op.default_solver());
    op.solve(kind, opts)
}
