use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use emwaveholtz::filter::FrequencySolution;
use emwaveholtz::grid::{FieldSet, YeeGrid};
use emwaveholtz::io::{residual_csv, write_raw, write_vtk};
use emwaveholtz::waveholtz::SolveReport;

use crate::config::{OutputCfg, RunConfig};
use crate::CliError;

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

/// Ordered `key: value` lines.
#[derive(Debug, Default, Clone)]
pub struct Summary {
    lines: Vec<(String, String)>,
}

impl Summary {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.lines {
            let _ = writeln!(s, "{k}: {v}");
        }
        s
    }
}

pub fn freq_tag(omega: f64) -> String {
    format!("w{omega:.4}").replace('.', "p")
}

/// Writes the config snapshot (all defaults spelled out) and a provenance note.
pub fn write_provenance(dir: &Path, cfg: Option<&RunConfig>, source_text: &str, command: &str) -> Result<String, CliError> {
    let mut p = String::new();
    let _ = writeln!(p, "command = {command:?}");
    let _ = writeln!(p, "version = {:?}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(p, "threads = {}", rayon::current_num_threads());
    let _ = writeln!(p, "input_sha256 = {:?}", sha256_hex(source_text.as_bytes()));
    let mut hash = String::new();
    if let Some(c) = cfg {
        let snap = c.to_toml();
        hash = sha256_hex(snap.as_bytes());
        let _ = writeln!(p, "snapshot_sha256 = {hash:?}");
        fs::write(dir.join("config.snapshot.toml"), snap)?;
    }
    fs::write(dir.join("provenance.toml"), p)?;
    Ok(hash)
}

pub fn write_report(dir: &Path, rep: &SolveReport) -> Result<(), CliError> {
    fs::write(dir.join("residuals.csv"), residual_csv(&rep.history))?;
    Ok(())
}

fn write_fields<G: YeeGrid>(
    dir: &Path,
    grid: &G,
    name: &str,
    infos: &[emwaveholtz::grid::ComponentInfo],
    f: &FieldSet,
    out: &OutputCfg,
    vtk: bool,
) -> Result<(), CliError> {
    if vtk && out.vtk {
        write_vtk(&dir.join(format!("{name}.vtk")), grid.domain(), infos, f, name)?;
    }
    if out.raw {
        write_raw(&dir.join(name), grid.domain(), infos, f)?;
    }
    Ok(())
}

/// Im and Re of E (VTK and raw) and of H (raw), plus `Ez / max |Ez|` when asked.
/// Returns the normalization factor of the imaginary part.
pub fn write_solution<G: YeeGrid>(dir: &Path, grid: &G, sol: &FrequencySolution, out: &OutputCfg) -> Result<f64, CliError> {
    let tag = freq_tag(sol.omega);
    let (e, h) = (grid.e_components(), grid.h_components());
    write_fields(dir, grid, &format!("im_e_{tag}"), e, &sol.im_e, out, true)?;
    write_fields(dir, grid, &format!("re_e_{tag}"), e, &sol.re_e, out, true)?;
    write_fields(dir, grid, &format!("im_h_{tag}"), h, &sol.im_h, out, false)?;
    write_fields(dir, grid, &format!("re_h_{tag}"), h, &sol.re_h, out, false)?;
    let peak = sol.im_e.max_abs();
    if out.normalize && peak > 0.0 {
        let last = sol.im_e.components.len() - 1;
        let mut n = FieldSet { components: vec![sol.im_e.components[last].clone()] };
        n.scale(1.0 / sol.im_e.components[last].iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE));
        let info = std::slice::from_ref(&e[last]);
        write_fields(dir, grid, &format!("normalized_{tag}"), info, &n, out, true)?;
    }
    Ok(peak)
}
