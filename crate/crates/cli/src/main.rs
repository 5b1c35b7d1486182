use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use emwaveholtz_cli::commands::{self, Overrides};
use emwaveholtz_cli::output::{write_provenance, Summary};
use emwaveholtz_cli::verify::{self, Check};
use emwaveholtz_cli::CliError;

#[derive(Parser)]
#[command(name = "emwh", version, about = "Frequency-domain Maxwell solves by filtered time-domain runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for parallel assembly and sweeps.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Filter window in periods of the base frequency.
    #[arg(long)]
    periods: Option<usize>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Suite {
    Spd,
    Contraction,
    Temporal,
    Oracle,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured problem once.
    Run(Common),
    /// One solve per frequency of the `[sweep]` table.
    Sweep(Common),
    /// Several commensurate frequencies in one solve.
    Multifreq(Common),
    /// Analysis suites on small closed cavities.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// Random seed for the contraction-rate suite.
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Manufactured-solution refinement study on the unit square.
    Convergence {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "20,40,80,160")]
        resolutions: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "5.5")]
        frequencies: Vec<f64>,
        /// Solve all frequencies at once and compare with one-at-a-time solves.
        #[arg(long)]
        multi: bool,
    },
}

fn overrides(c: &Common) -> Overrides {
    Overrides { out: c.out.clone(), tol: c.tol, max_iters: c.max_iters, periods: c.periods }
}

fn setup_threads(c: &Common) -> Result<(), CliError> {
    if let Some(t) = c.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    }
    Ok(())
}

fn need_config(c: &Common) -> Result<commands::Loaded, CliError> {
    let Some(p) = &c.config else {
        return Err(emwaveholtz_cli::ConfigError { line: None, message: "--config is required".into() }.into());
    };
    commands::load(p, &overrides(c))
}

fn out_dir(c: &Common, fallback: &str) -> Result<PathBuf, CliError> {
    let d = c.out.clone().unwrap_or_else(|| PathBuf::from(fallback));
    fs::create_dir_all(&d)?;
    Ok(d)
}

fn finish_checks(dir: &Path, checks: &[Check]) -> Result<Summary, CliError> {
    let mut m = Summary::default();
    for c in checks {
        println!("{}", c.line());
        m.push(&c.name, c.line());
    }
    fs::write(dir.join("summary.txt"), m.render())?;
    if let Some(bad) = checks.iter().find(|c| !c.pass) {
        return Err(CliError::CheckFailed(bad.line()));
    }
    Ok(m)
}

fn verify_cmd(common: &Common, suite: Suite, seed: u64) -> Result<Summary, CliError> {
    let dir = out_dir(common, "out/verify")?;
    write_provenance(&dir, None, &format!("verify {:?} seed={seed}", suite as u8), "verify")?;
    let mut checks = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Spd {
        let s = verify::spd_suite(24, 10.0)?;
        fs::write(dir.join("eigenvalues.csv"), verify::eigen_csv(&s))?;
        checks.push(s.check);
    }
    if all || suite == Suite::Contraction {
        let (reps, c) = verify::contraction_suite(16, 10, seed)?;
        fs::write(dir.join("contraction.csv"), verify::contraction_csv(&reps))?;
        checks.push(c);
    }
    if all || suite == Suite::Temporal {
        let freqs = [10.5, 20.5, 30.5, 40.5, 50.5];
        let (errs, c) = verify::temporal_suite(20, &freqs)?;
        let mut csv = String::from("omega,max_error\n");
        for (w, e) in freqs.iter().zip(&errs) {
            csv.push_str(&format!("{w},{e:.6e}\n"));
        }
        fs::write(dir.join("temporal.csv"), csv)?;
        checks.push(c);
    }
    if all || suite == Suite::Oracle {
        let (rows, c) = verify::oracle_suite(10)?;
        let mut csv = String::from("case,relative_gap\n");
        for (n, g) in rows {
            csv.push_str(&format!("{n},{g:.6e}\n"));
        }
        fs::write(dir.join("oracle.csv"), csv)?;
        checks.push(c);
    }
    finish_checks(&dir, &checks)
}

fn convergence_cmd(common: &Common, resolutions: &[usize], freqs: &[f64], multi: bool) -> Result<Summary, CliError> {
    let dir = out_dir(common, "out/convergence")?;
    let tol = common.tol.unwrap_or(1e-10);
    write_provenance(&dir, None, &format!("convergence {resolutions:?} {freqs:?} multi={multi} tol={tol}"), "convergence")?;
    let mut m = Summary::default();
    if multi {
        let t = verify::multi_convergence(freqs, resolutions, tol)?;
        fs::write(dir.join("convergence.csv"), t.to_csv())?;
        let g = verify::multifreq_equivalence(freqs, resolutions, tol)?;
        fs::write(dir.join("equivalence.csv"), g.to_csv())?;
        for (k, w) in freqs.iter().enumerate() {
            m.push(&format!("order_w{w}"), format!("{:.4}", t.orders[k]));
            m.push(&format!("equivalence_order_w{w}"), format!("{:.4}", g.orders[k]));
        }
    } else {
        for &w in freqs {
            let t = verify::single_convergence(w, resolutions, tol)?;
            fs::write(dir.join(format!("convergence_w{w}.csv")), t.to_csv())?;
            m.push(&format!("order_w{w}"), format!("{:.4}", t.orders[0]));
        }
    }
    fs::write(dir.join("summary.txt"), m.render())?;
    print!("{}", m.render());
    Ok(m)
}

fn dispatch(cli: Cli) -> Result<Summary, CliError> {
    match cli.command {
        Command::Run(c) => {
            setup_threads(&c)?;
            commands::run(&need_config(&c)?, "run")
        }
        Command::Sweep(c) => {
            setup_threads(&c)?;
            commands::sweep(&need_config(&c)?)
        }
        Command::Multifreq(c) => {
            setup_threads(&c)?;
            commands::multifreq(&need_config(&c)?)
        }
        Command::Verify { common, suite, seed } => {
            setup_threads(&common)?;
            verify_cmd(&common, suite, seed)
        }
        Command::Convergence { common, resolutions, frequencies, multi } => {
            setup_threads(&common)?;
            convergence_cmd(&common, &resolutions, &frequencies, multi)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verify_like = matches!(cli.command, Command::Verify { .. } | Command::Convergence { .. });
    match dispatch(cli) {
        Ok(summary) => {
            if !verify_like {
                print!("{}", summary.render());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
