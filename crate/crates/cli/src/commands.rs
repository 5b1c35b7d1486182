use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use emwaveholtz::analysis::fit_order;
use emwaveholtz::analysis::scenarios::{bump, bump_laplacian, manufactured_current};
use emwaveholtz::filter::{FilterSpec, Forcing, Quadrature};
use emwaveholtz::grid::{FieldSet, Grid2D, Grid3D, YeeGrid};
use emwaveholtz::waveholtz::{SolveOptions, SolveReport, WaveHoltzOperator};

use crate::config::{Resolved, RunConfig, SourceKind};
use crate::metric::waveguide_metric;
use crate::output::{freq_tag, write_provenance, write_report, write_solution, Summary};
use crate::CliError;

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub periods: Option<usize>,
}

pub struct Loaded {
    pub text: String,
    pub resolved: Resolved,
}

pub fn load_str(text: &str, ov: &Overrides) -> Result<Loaded, CliError> {
    let mut cfg = RunConfig::parse(text)?;
    if let Some(t) = ov.tol {
        cfg.solve.tol = t;
    }
    if let Some(m) = ov.max_iters {
        cfg.solve.max_iters = m;
    }
    if let Some(p) = ov.periods {
        cfg.solve.periods = p;
    }
    if let Some(o) = &ov.out {
        cfg.output.dir = o.display().to_string();
    }
    let resolved = cfg.resolve(text)?;
    Ok(Loaded { text: text.to_string(), resolved })
}

pub fn load(path: &Path, ov: &Overrides) -> Result<Loaded, CliError> {
    let text = fs::read_to_string(path).map_err(|e| crate::ConfigError {
        line: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    load_str(&text, ov)
}

/// Current density for frequency `omega` sampled on the E lattice.
pub fn current<G: YeeGrid>(grid: &G, cfg: &RunConfig, omega: f64) -> FieldSet {
    let s = &cfg.source;
    if s.kind == SourceKind::Bump {
        let mut j = manufactured_current(grid, omega, bump, bump_laplacian);
        j.scale(s.amplitude);
        return j;
    }
    let amp = if s.scale_by_omega { s.amplitude * omega } else { s.amplitude };
    let sigma = cfg.sigma(omega);
    let comp = cfg.component_index();
    let d = cfg.dimension;
    let center: Vec<f64> = s.center.clone().unwrap_or_else(|| vec![0.0; d]);
    grid.sample_e(|c, q| {
        if c != comp {
            return 0.0;
        }
        let r2 = match s.kind {
            SourceKind::Line => {
                let a = s.axis.unwrap_or(1);
                (q[a] - s.position.unwrap_or(0.0)).powi(2)
            }
            _ => (0..d).map(|a| (q[a] - center[a]).powi(2)).sum(),
        };
        amp * (-sigma * r2).exp()
    })
}

pub fn spec_for(res: &Resolved, frequencies: &[f64]) -> FilterSpec {
    let s = &res.config.solve;
    let spec = if frequencies.len() > 1 {
        FilterSpec::multi(frequencies.to_vec(), s.periods)
    } else {
        FilterSpec::single(frequencies[0], s.periods, Forcing::from(s.forcing))
    };
    spec.with_source_mode(res.source_mode)
        .with_quadrature(Quadrature::from(s.quadrature))
        .with_mode(res.state)
}

pub fn options(res: &Resolved) -> SolveOptions {
    let mut o = SolveOptions::new(res.config.solve.tol, res.config.solve.max_iters);
    o.restart = res.config.solve.restart;
    o
}

/// Result of one solve together with what is needed for post-processing.
pub struct Solved {
    pub report: SolveReport,
    pub cells: Vec<usize>,
    pub dt: f64,
    pub steps: usize,
    pub dofs: usize,
    /// Strip metric of the imaginary `Ez` per frequency (2D with a metric only).
    pub metric: Vec<f64>,
}

fn finish<G: YeeGrid>(
    grid: G,
    res: &Resolved,
    freqs: &[f64],
    write_to: Option<&Path>,
) -> Result<(Solved, Option<G>), CliError> {
    let currents = freqs.iter().map(|&w| current(&grid, &res.config, w)).collect();
    let op = WaveHoltzOperator::build(grid, currents, spec_for(res, freqs))?;
    let report = op.solve(res.solver, &options(res))?;
    if let Some(dir) = write_to {
        write_report(dir, &report)?;
        for sol in &report.solutions {
            write_solution(dir, op.grid(), sol, &res.config.output)?;
        }
    }
    let tg = *op.time_grid();
    Ok((
        Solved {
            cells: op.grid().domain().cells.clone(),
            dt: tg.dt,
            steps: tg.steps,
            dofs: op.layout().len(),
            report,
            metric: Vec::new(),
        },
        Some(op.grid().clone()),
    ))
}

/// Builds the grid for `freqs`, solves, and optionally writes field files.
pub fn solve_config(res: &Resolved, freqs: &[f64], write_to: Option<&Path>) -> Result<Solved, CliError> {
    let cfg = &res.config;
    let domain = cfg.build_domain(freqs[freqs.len() - 1])?;
    match cfg.dimension {
        2 => {
            let g = Grid2D::new(domain, &res.material, &res.pec, res.boundary.clone())?;
            let (mut s, g) = finish(g, res, freqs, write_to)?;
            if let (Some(m), Some(g)) = (&cfg.metric, g) {
                for sol in &s.report.solutions {
                    s.metric.push(waveguide_metric(&g, &sol.im_e.components[0], m.lower, m.upper)?);
                }
            }
            Ok(s)
        }
        _ => {
            let g = Grid3D::new(domain, &res.material, &res.pec, res.boundary.clone())?;
            Ok(finish(g, res, freqs, write_to)?.0)
        }
    }
}

fn out_dir(res: &Resolved) -> Result<PathBuf, CliError> {
    let d = PathBuf::from(&res.config.output.dir);
    fs::create_dir_all(&d)?;
    Ok(d)
}

fn solve_summary(command: &str, res: &Resolved, s: &Solved, hash: &str) -> Summary {
    let r = &s.report;
    let mut m = Summary::default();
    m.push("command", command);
    m.push("solver", r.solver.name());
    m.push("state", format!("{:?}", res.state));
    m.push(
        "frequencies",
        res.frequencies.iter().map(|w| format!("{w}")).collect::<Vec<_>>().join(","),
    );
    m.push("periods", res.config.solve.periods);
    m.push("iterations", r.iterations);
    m.push("converged", r.converged);
    m.push("final_residual", format!("{:.6e}", r.final_residual()));
    m.push("tolerance", format!("{:e}", r.tolerance));
    m.push("max_iters", res.config.solve.max_iters);
    m.push("wave_solves", r.wave_solves);
    m.push("wall_seconds", format!("{:.3}", r.wall_seconds));
    m.push("cells", s.cells.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("x"));
    m.push("dofs", s.dofs);
    m.push("dt", format!("{:.6e}", s.dt));
    m.push("steps_per_solve", s.steps);
    for (sol, v) in r.solutions.iter().zip(s.metric.iter().map(Some).chain(std::iter::repeat(None))) {
        m.push(&format!("max_abs_im_e_{}", freq_tag(sol.omega)), format!("{:.6e}", sol.im_e.max_abs()));
        if let Some(v) = v {
            m.push(&format!("metric_s_{}", freq_tag(sol.omega)), format!("{v:.6e}"));
        }
    }
    m.push("config_sha256", hash);
    m
}

/// `run`: one solve (several frequencies are handled in one solve).
pub fn run(loaded: &Loaded, command: &str) -> Result<Summary, CliError> {
    let res = &loaded.resolved;
    let dir = out_dir(res)?;
    let hash = write_provenance(&dir, Some(&res.config), &loaded.text, command)?;
    let s = solve_config(res, &res.frequencies, Some(&dir))?;
    let summary = solve_summary(command, res, &s, &hash);
    fs::write(dir.join("summary.txt"), summary.render())?;
    if !s.report.converged {
        return Err(CliError::NotConverged {
            what: format!("{command} at {:?}", res.frequencies),
            dir: dir.display().to_string(),
        });
    }
    Ok(summary)
}

/// `multifreq`: like `run` but insists on several frequencies.
pub fn multifreq(loaded: &Loaded) -> Result<Summary, CliError> {
    if loaded.resolved.frequencies.len() < 2 {
        return Err(crate::ConfigError {
            line: crate::config::Locator::new(&loaded.text).line("solve", 0, Some("frequencies")),
            message: "multifreq needs at least two frequencies".into(),
        }
        .into());
    }
    run(loaded, "multifreq")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub omega: f64,
    pub cells: usize,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    pub wave_solves: usize,
    pub seconds: f64,
    pub metric: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of log(iterations) against log(omega) over converged rows.
    pub exponent: f64,
    pub reference_metric: Option<f64>,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("omega,cells,iterations,converged,final_residual,wave_solves,seconds,s,s_ratio,error\n");
        for r in &self.rows {
            let ratio = match (r.metric, self.reference_metric) {
                (Some(a), Some(b)) if b > 0.0 => format!("{:.6e}", a / b),
                _ => String::new(),
            };
            s.push_str(&format!(
                "{},{},{},{},{:.6e},{},{:.3},{},{},{}\n",
                r.omega,
                r.cells,
                r.iterations,
                r.converged,
                r.final_residual,
                r.wave_solves,
                r.seconds,
                r.metric.map(|v| format!("{v:.6e}")).unwrap_or_default(),
                ratio,
                r.error.as_deref().unwrap_or("").replace(',', ";"),
            ));
        }
        s
    }
}

fn sweep_entry(res: &Resolved, omega: f64) -> SweepRow {
    let start = Instant::now();
    match solve_config(res, &[omega], None) {
        Ok(s) => SweepRow {
            omega,
            cells: s.cells[0],
            iterations: s.report.iterations,
            converged: s.report.converged,
            final_residual: s.report.final_residual(),
            wave_solves: s.report.wave_solves,
            seconds: start.elapsed().as_secs_f64(),
            metric: s.metric.first().copied(),
            error: None,
        },
        Err(e) => SweepRow {
            omega,
            cells: res.config.cells_for(omega)[0],
            iterations: 0,
            converged: false,
            final_residual: f64::NAN,
            wave_solves: 0,
            seconds: start.elapsed().as_secs_f64(),
            metric: None,
            error: Some(e.to_string()),
        },
    }
}

/// Runs every sweep frequency as an independent entry; failures are recorded.
pub fn sweep_rows(res: &Resolved, frequencies: &[f64], workers: usize) -> Result<SweepResult, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    let rows: Vec<SweepRow> = pool.install(|| frequencies.par_iter().map(|&w| sweep_entry(res, w)).collect());
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.converged && r.iterations > 0).collect();
    let exponent = fit_order(
        &ok.iter().map(|r| r.omega).collect::<Vec<_>>(),
        &ok.iter().map(|r| r.iterations as f64).collect::<Vec<_>>(),
    );
    let reference_metric = match res.config.metric.as_ref().and_then(|m| m.reference_wavelength) {
        Some(l) => solve_config(res, &[2.0 * std::f64::consts::PI / l], None)?.metric.first().copied(),
        None => None,
    };
    Ok(SweepResult { rows, exponent, reference_metric })
}

pub fn sweep(loaded: &Loaded) -> Result<Summary, CliError> {
    let res = &loaded.resolved;
    let Some(sw) = &res.config.sweep else {
        return Err(crate::ConfigError { line: None, message: "sweep needs a [sweep] table".into() }.into());
    };
    let dir = out_dir(res)?;
    let hash = write_provenance(&dir, Some(&res.config), &loaded.text, "sweep")?;
    let freqs = res.config.sweep_frequencies();
    let result = sweep_rows(res, &freqs, sw.workers)?;
    fs::write(dir.join("sweep.csv"), result.to_csv())?;
    let mut m = Summary::default();
    m.push("command", "sweep");
    m.push("entries", result.rows.len());
    m.push("converged", result.rows.iter().filter(|r| r.converged).count());
    m.push("failed", result.rows.iter().filter(|r| r.error.is_some()).count());
    m.push("iteration_exponent", format!("{:.4}", result.exponent));
    if let Some(s) = result.reference_metric {
        m.push("reference_metric", format!("{s:.6e}"));
    }
    m.push("config_sha256", hash);
    fs::write(dir.join("summary.txt"), m.render())?;
    if result.rows.iter().any(|r| !r.converged && r.error.is_none()) {
        return Err(CliError::NotConverged {
            what: "one or more sweep entries".into(),
            dir: dir.display().to_string(),
        });
    }
    Ok(m)
}
