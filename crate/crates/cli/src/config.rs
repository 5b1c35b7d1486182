//! TOML run configuration. Every field is checked before any compute and
//! errors point at the offending line where one can be found.

use std::fmt;

use serde::{Deserialize, Serialize};

use emwaveholtz::filter::{common_base_frequency, FilterSpec, Forcing, Quadrature};
use emwaveholtz::grid::{BoundaryKind, BoundarySpec, Domain, MaterialSpec, Region, StateMode};
use emwaveholtz::timedomain::TemporalMode;
use emwaveholtz::waveholtz::SolverKind;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "config line {l}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    pub domain: DomainCfg,
    #[serde(default)]
    pub boundary: BoundaryCfg,
    #[serde(default)]
    pub material: MaterialCfg,
    #[serde(default)]
    pub pec: Vec<ShapeCfg>,
    pub source: SourceCfg,
    pub solve: SolveCfg,
    #[serde(default)]
    pub output: OutputCfg,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricCfg>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DomainCfg {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Explicit cell counts per axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<usize>>,
    /// `factor * ceil(omega_max)` cells per two units of length on each axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells_per_omega: Option<usize>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum FaceKind {
    Pec,
    #[serde(alias = "mur")]
    Open,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BoundaryCfg {
    #[serde(default = "default_face")]
    pub all: FaceKind,
    /// Per face, ordered x-lo, x-hi, y-lo, y-hi[, z-lo, z-hi]; overrides `all`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faces: Option<Vec<FaceKind>>,
}

fn default_face() -> FaceKind {
    FaceKind::Pec
}

impl Default for BoundaryCfg {
    fn default() -> Self {
        Self { all: FaceKind::Pec, faces: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MaterialCfg {
    #[serde(default = "one")]
    pub eps: f64,
    #[serde(default = "one")]
    pub mu: f64,
    #[serde(default)]
    pub inclusion: Vec<ShapeCfg>,
}

fn one() -> f64 {
    1.0
}

impl Default for MaterialCfg {
    fn default() -> Self {
        Self { eps: 1.0, mu: 1.0, inclusion: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Box,
    Disk,
    /// Rectangular lattice of equal disks.
    DiskLattice,
}

/// A PEC scatterer or a material inclusion.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct ShapeCfg {
    pub shape: Option<Shape>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Lattice: centre of disk (0, 0).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pitch: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<[usize; 2]>,
    /// Lattice rows (second index) left empty, e.g. a line defect.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skip_rows: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    /// `exp(-sigma |x - center|^2)`.
    Gaussian,
    /// `exp(-sigma (x_axis - position)^2)`, constant along the other axes.
    Line,
    /// Manufactured current for `Ez = 16 x^2 (x-1)^2 y^2 (y-1)^2` on the unit square.
    Bump,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SigmaCfg {
    Value(f64),
    /// `"sweep"`: `max(36, omega^2)`.
    Rule(String),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SourceCfg {
    pub kind: SourceKind,
    /// `x`, `y` or `z`; 2D runs only carry `z`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<String>,
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Multiply the amplitude by the frequency.
    #[serde(default = "yes")]
    pub scale_by_omega: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<SigmaCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<f64>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum StateCfg {
    /// Energy-conserving for CG, full otherwise.
    Auto,
    Energy,
    Full,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SolverCfg {
    Auto,
    Gmres,
    Cg,
    FixedPoint,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SourceTimeCfg {
    Exact,
    Recursive,
    RecursiveModified,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolveCfg {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<Vec<f64>>,
    /// Vacuum wavelength; converted to `2 pi / lambda`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelengths: Option<Vec<f64>>,
    #[serde(default = "one_usize")]
    pub periods: usize,
    #[serde(default = "sin")]
    pub forcing: ForcingCfg,
    #[serde(default = "trapezoid")]
    pub quadrature: QuadratureCfg,
    #[serde(default = "exact")]
    pub source_time: SourceTimeCfg,
    #[serde(default = "auto_state")]
    pub state: StateCfg,
    #[serde(default = "auto_solver")]
    pub solver: SolverCfg,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_iters")]
    pub max_iters: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restart: Option<usize>,
}

fn one_usize() -> usize {
    1
}
fn sin() -> ForcingCfg {
    ForcingCfg::Sin
}
fn trapezoid() -> QuadratureCfg {
    QuadratureCfg::Trapezoid
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ForcingCfg {
    Sin,
    Cos,
}

impl From<ForcingCfg> for Forcing {
    fn from(f: ForcingCfg) -> Self {
        match f {
            ForcingCfg::Sin => Forcing::Sin,
            ForcingCfg::Cos => Forcing::Cos,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureCfg {
    Trapezoid,
    /// Trapezoid with the weights corrected for the modified source frequency.
    Modified,
}

impl From<QuadratureCfg> for Quadrature {
    fn from(q: QuadratureCfg) -> Self {
        match q {
            QuadratureCfg::Trapezoid => Quadrature::Trapezoid,
            QuadratureCfg::Modified => Quadrature::TrapezoidModified,
        }
    }
}
fn exact() -> SourceTimeCfg {
    SourceTimeCfg::Exact
}
fn auto_state() -> StateCfg {
    StateCfg::Auto
}
fn auto_solver() -> SolverCfg {
    SolverCfg::Auto
}
fn default_tol() -> f64 {
    1e-8
}
fn default_iters() -> usize {
    200
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputCfg {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "yes")]
    pub vtk: bool,
    #[serde(default = "yes")]
    pub raw: bool,
    /// Also write `Ez / max |Ez|`.
    #[serde(default)]
    pub normalize: bool,
}

fn default_dir() -> String {
    "out".into()
}

impl Default for OutputCfg {
    fn default() -> Self {
        Self { dir: default_dir(), vtk: true, raw: true, normalize: false }
    }
}

/// `omega = k + offset` for `k = k_min, k_min + k_step, ..., k_max`, or an explicit list.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepCfg {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelengths: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_min: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default = "one_usize")]
    pub k_step: usize,
    #[serde(default = "half")]
    pub offset: f64,
    /// Concurrent sweep entries; each entry is itself a single solve.
    #[serde(default = "one_usize")]
    pub workers: usize,
}

fn half() -> f64 {
    0.5
}

/// `S = sqrt(int Ez^2)` over a rectangle.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MetricCfg {
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    /// Wavelength whose `S` normalizes the sweep column `s_ratio`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_wavelength: Option<f64>,
}

/// Finds the line of `key` inside the `nth` occurrence of table `section`
/// (`""` is the top level), or of the table header itself.
pub struct Locator<'a> {
    src: &'a str,
}

impl<'a> Locator<'a> {
    pub fn new(src: &'a str) -> Self {
        Self { src }
    }

    pub fn line(&self, section: &str, nth: usize, key: Option<&str>) -> Option<usize> {
        let mut current = String::new();
        let mut seen: i64 = if section.is_empty() { 0 } else { -1 };
        let mut header_line = None;
        for (no, raw) in self.src.lines().enumerate() {
            let line = raw.trim();
            if line.starts_with('[') {
                let name = line.trim_matches(|c| c == '[' || c == ']').trim();
                current = name.to_string();
                if current == section {
                    seen += 1;
                    if seen as usize == nth {
                        header_line = Some(no + 1);
                    }
                }
                continue;
            }
            if current == section && seen == nth as i64 {
                if let Some(k) = key {
                    if let Some(rest) = line.strip_prefix(k) {
                        if rest.trim_start().starts_with('=') {
                            return Some(no + 1);
                        }
                    }
                }
            }
        }
        header_line
    }

    pub fn offset_line(&self, offset: usize) -> usize {
        self.src[..offset.min(self.src.len())].matches('\n').count() + 1
    }
}

struct Ctx<'a> {
    loc: Locator<'a>,
}

impl Ctx<'_> {
    fn err(&self, section: &str, nth: usize, key: &str, msg: impl Into<String>) -> ConfigError {
        ConfigError {
            line: self.loc.line(section, nth, Some(key)),
            message: msg.into(),
        }
    }
}

/// The validated, resolved form of a configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub frequencies: Vec<f64>,
    pub boundary: BoundarySpec,
    pub material: MaterialSpec,
    pub pec: Vec<Region>,
    pub solver: SolverKind,
    pub state: StateMode,
    pub source_mode: TemporalMode,
    pub spec: FilterSpec,
}

impl RunConfig {
    pub fn parse(src: &str) -> Result<Self, ConfigError> {
        toml::from_str(src).map_err(|e| {
            let loc = Locator::new(src);
            ConfigError {
                line: e.span().map(|s| loc.offset_line(s.start)),
                message: e.message().to_string(),
            }
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Frequencies in increasing order from whichever key was given.
    fn frequency_list(&self, ctx: &Ctx) -> Result<Vec<f64>, ConfigError> {
        let s = &self.solve;
        let given = [
            s.frequency.is_some(),
            s.frequencies.is_some(),
            s.wavelength.is_some(),
            s.wavelengths.is_some(),
        ];
        if given.iter().filter(|g| **g).count() != 1 {
            return Err(ctx.err(
                "solve",
                0,
                "frequency",
                "give exactly one of frequency, frequencies, wavelength, wavelengths",
            ));
        }
        let tau = 2.0 * std::f64::consts::PI;
        let (key, list) = if let Some(w) = s.frequency {
            ("frequency", vec![w])
        } else if let Some(w) = &s.frequencies {
            ("frequencies", w.clone())
        } else if let Some(l) = s.wavelength {
            ("wavelength", vec![tau / l])
        } else {
            let mut v: Vec<f64> = s.wavelengths.as_ref().unwrap().iter().map(|l| tau / l).collect();
            v.sort_by(f64::total_cmp);
            ("wavelengths", v)
        };
        if list.is_empty() || list.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(ctx.err("solve", 0, key, "frequencies must be positive and finite"));
        }
        if list.windows(2).any(|p| p[1] <= p[0]) {
            return Err(ctx.err("solve", 0, key, "frequencies must be strictly increasing"));
        }
        if list.len() > 1 {
            common_base_frequency(&list).map_err(|e| ctx.err("solve", 0, key, e.to_string()))?;
        }
        Ok(list)
    }

    /// Cell counts for a maximal frequency `omega_max`.
    pub fn cells_for(&self, omega_max: f64) -> Vec<usize> {
        if let Some(c) = &self.domain.cells {
            return c.clone();
        }
        let f = self.domain.cells_per_omega.unwrap_or(8);
        let base = (f as f64) * omega_max.ceil();
        self.domain
            .lower
            .iter()
            .zip(&self.domain.upper)
            .map(|(l, u)| ((base * (u - l) / 2.0).ceil() as usize).max(2))
            .collect()
    }

    pub fn build_domain(&self, omega_max: f64) -> emwaveholtz::Result<Domain> {
        Domain::new(self.domain.lower.clone(), self.domain.upper.clone(), self.cells_for(omega_max))
    }

    fn shape_regions(&self, ctx: &Ctx, table: &str, nth: usize, s: &ShapeCfg) -> Result<Vec<Region>, ConfigError> {
        let d = self.dimension;
        let need = |key: &str| ctx.err(table, nth, key, format!("`{key}` is required for this shape"));
        match s.shape {
            None => Err(ctx.err(table, nth, "shape", "`shape` is required (box, disk, disk_lattice)")),
            Some(Shape::Box) => {
                let lo = s.lower.clone().ok_or_else(|| need("lower"))?;
                let hi = s.upper.clone().ok_or_else(|| need("upper"))?;
                if lo.len() != d || hi.len() != d {
                    return Err(ctx.err(table, nth, "lower", format!("box corners need {d} coordinates")));
                }
                if lo.iter().zip(&hi).any(|(a, b)| a > b) {
                    return Err(ctx.err(table, nth, "upper", "box upper corner below lower corner"));
                }
                Ok(vec![Region::Box { lower: lo, upper: hi }])
            }
            Some(Shape::Disk) => {
                let c = s.center.ok_or_else(|| need("center"))?;
                let r = s.radius.ok_or_else(|| need("radius"))?;
                if r <= 0.0 {
                    return Err(ctx.err(table, nth, "radius", "radius must be positive"));
                }
                Ok(vec![Region::disk(c, r)])
            }
            Some(Shape::DiskLattice) => {
                let o = s.origin.ok_or_else(|| need("origin"))?;
                let p = s.pitch.ok_or_else(|| need("pitch"))?;
                let n = s.counts.ok_or_else(|| need("counts"))?;
                let r = s.radius.ok_or_else(|| need("radius"))?;
                if r <= 0.0 || p[0] <= 0.0 || p[1] <= 0.0 {
                    return Err(ctx.err(table, nth, "pitch", "pitch and radius must be positive"));
                }
                let mut v = Vec::new();
                for j in 0..n[1] {
                    if s.skip_rows.contains(&j) {
                        continue;
                    }
                    for i in 0..n[0] {
                        v.push(Region::disk([o[0] + i as f64 * p[0], o[1] + j as f64 * p[1]], r));
                    }
                }
                Ok(v)
            }
        }
    }

    /// Checks everything and resolves defaults. No field-sized work happens here.
    pub fn resolve(&self, src: &str) -> Result<Resolved, ConfigError> {
        let ctx = Ctx { loc: Locator::new(src) };
        let d = self.dimension;
        if d != 2 && d != 3 {
            return Err(ctx.err("", 0, "dimension", "dimension must be 2 or 3"));
        }
        let dm = &self.domain;
        if dm.lower.len() != d || dm.upper.len() != d {
            return Err(ctx.err("domain", 0, "lower", format!("domain corners need {d} coordinates")));
        }
        if dm.lower.iter().zip(&dm.upper).any(|(a, b)| !(b > a)) {
            return Err(ctx.err("domain", 0, "upper", "upper corner must exceed lower corner on every axis"));
        }
        match (&dm.cells, dm.cells_per_omega) {
            (Some(_), Some(_)) => {
                return Err(ctx.err("domain", 0, "cells_per_omega", "give either cells or cells_per_omega"))
            }
            (Some(c), None) if c.len() != d || c.iter().any(|n| *n < 2) => {
                return Err(ctx.err("domain", 0, "cells", format!("need {d} cell counts of at least 2")))
            }
            (None, Some(0)) => return Err(ctx.err("domain", 0, "cells_per_omega", "factor must be positive")),
            _ => {}
        }
        let frequencies = self.frequency_list(&ctx)?;

        let faces = match &self.boundary.faces {
            Some(f) if f.len() != 2 * d => {
                return Err(ctx.err("boundary", 0, "faces", format!("need {} face entries", 2 * d)))
            }
            Some(f) => f.clone(),
            None => vec![self.boundary.all; 2 * d],
        };
        let boundary = BoundarySpec {
            faces: faces
                .iter()
                .map(|f| match f {
                    FaceKind::Pec => BoundaryKind::Pec,
                    FaceKind::Open => BoundaryKind::Mur,
                })
                .collect(),
        };

        let m = &self.material;
        if !(m.eps > 0.0 && m.eps.is_finite()) {
            return Err(ctx.err("material", 0, "eps", "permittivity must be positive"));
        }
        if !(m.mu > 0.0 && m.mu.is_finite()) {
            return Err(ctx.err("material", 0, "mu", "permeability must be positive"));
        }
        let mut material = MaterialSpec::uniform(m.eps, m.mu);
        for (k, inc) in m.inclusion.iter().enumerate() {
            let eps = inc.eps.unwrap_or(m.eps);
            let mu = inc.mu.unwrap_or(m.mu);
            if !(eps > 0.0 && mu > 0.0) {
                return Err(ctx.err("material.inclusion", k, "eps", "inclusion coefficients must be positive"));
            }
            for r in self.shape_regions(&ctx, "material.inclusion", k, inc)? {
                material = material.with_inclusion(r, eps, mu);
            }
        }
        let mut pec = Vec::new();
        for (k, s) in self.pec.iter().enumerate() {
            if s.eps.is_some() || s.mu.is_some() {
                return Err(ctx.err("pec", k, "eps", "PEC regions carry no material coefficients"));
            }
            pec.extend(self.shape_regions(&ctx, "pec", k, s)?);
        }
        let probe = self
            .build_domain(frequencies[frequencies.len() - 1])
            .map_err(|e| ctx.err("domain", 0, "lower", e.to_string()))?;
        material
            .validate(&probe)
            .map_err(|e| ctx.err("material", 0, "inclusion", e.to_string()))?;
        for r in &pec {
            if let Region::Box { lower, upper } = r {
                let outside = (0..d).any(|a| upper[a] < probe.lower[a] || lower[a] > probe.upper[a]);
                if outside {
                    return Err(ctx.err("pec", 0, "lower", "PEC region lies outside the domain"));
                }
            }
        }

        self.check_source(&ctx)?;

        let s = &self.solve;
        if s.periods == 0 {
            return Err(ctx.err("solve", 0, "periods", "periods must be at least 1"));
        }
        if !(s.tol > 0.0 && s.tol < 1.0) {
            return Err(ctx.err("solve", 0, "tol", "tolerance must lie in (0, 1)"));
        }
        if s.max_iters == 0 {
            return Err(ctx.err("solve", 0, "max_iters", "max_iters must be positive"));
        }
        if s.restart == Some(0) {
            return Err(ctx.err("solve", 0, "restart", "restart length must be positive"));
        }
        let multi = frequencies.len() > 1;
        let forcing = Forcing::from(s.forcing);
        let quadrature = Quadrature::from(s.quadrature);
        let source_mode = match (s.source_time, forcing) {
            (SourceTimeCfg::Exact, Forcing::Sin) => TemporalMode::SinExact,
            (SourceTimeCfg::Exact, Forcing::Cos) => TemporalMode::CosExact,
            (SourceTimeCfg::Recursive, Forcing::Sin) => TemporalMode::SinRecursive,
            (SourceTimeCfg::RecursiveModified, Forcing::Sin) => TemporalMode::SinRecursiveModified,
            (_, Forcing::Cos) => {
                return Err(ctx.err("solve", 0, "source_time", "cosine forcing only supports the exact source"))
            }
        };
        let all_pec = boundary.is_all_pec();
        let solver = match s.solver {
            SolverCfg::Auto | SolverCfg::Gmres => SolverKind::Gmres,
            SolverCfg::Cg => SolverKind::Cg,
            SolverCfg::FixedPoint => SolverKind::FixedPoint,
        };
        let state = match s.state {
            StateCfg::Energy => StateMode::EnergyConserving,
            StateCfg::Full => StateMode::Full,
            StateCfg::Auto if solver == SolverKind::Cg && all_pec && forcing == Forcing::Sin => {
                StateMode::EnergyConserving
            }
            StateCfg::Auto => StateMode::Full,
        };
        if state == StateMode::EnergyConserving && !all_pec {
            return Err(ctx.err("solve", 0, "state", "the energy-conserving state needs PEC on every face"));
        }
        if solver == SolverKind::Cg {
            let spd = all_pec && !multi && forcing == Forcing::Sin && quadrature == Quadrature::Trapezoid;
            if !spd {
                return Err(ctx.err(
                    "solve",
                    0,
                    "solver",
                    "CG needs an all-PEC single-frequency sine-forced run with the trapezoid filter",
                ));
            }
        }
        let spec = if multi {
            FilterSpec::multi(frequencies.clone(), s.periods)
        } else {
            FilterSpec::single(frequencies[0], s.periods, forcing)
        }
        .with_source_mode(source_mode)
        .with_quadrature(quadrature)
        .with_mode(state);
        spec.validate().map_err(|e| ctx.err("solve", 0, "forcing", e.to_string()))?;
        let spec_out = spec;

        if let Some(sw) = &self.sweep {
            let list = sw.frequencies.is_some() as u8 + sw.wavelengths.is_some() as u8 + sw.k_min.is_some() as u8;
            if list != 1 {
                return Err(ctx.err("sweep", 0, "k_min", "give one of frequencies, wavelengths or k_min/k_max"));
            }
            if sw.k_min.is_some() != sw.k_max.is_some() {
                return Err(ctx.err("sweep", 0, "k_max", "k_min and k_max go together"));
            }
            if sw.k_step == 0 || sw.workers == 0 {
                return Err(ctx.err("sweep", 0, "k_step", "k_step and workers must be positive"));
            }
            for w in self.sweep_frequencies() {
                if !(w > 0.0 && w.is_finite()) {
                    return Err(ctx.err("sweep", 0, "offset", format!("sweep frequency {w} is not positive")));
                }
            }
            if multi {
                return Err(ctx.err("solve", 0, "frequencies", "a sweep runs one frequency per entry"));
            }
        }
        if let Some(mc) = &self.metric {
            if d != 2 {
                return Err(ctx.err("metric", 0, "lower", "the strip metric is defined for 2D runs"));
            }
            let inside = (0..2).all(|a| {
                mc.lower[a] < mc.upper[a] && mc.lower[a] >= dm.lower[a] - 1e-12 && mc.upper[a] <= dm.upper[a] + 1e-12
            });
            if !inside {
                return Err(ctx.err("metric", 0, "lower", "strip must be a nonempty rectangle inside the domain"));
            }
        }
        if self.output.dir.trim().is_empty() {
            return Err(ctx.err("output", 0, "dir", "output directory is empty"));
        }
        Ok(Resolved {
            config: self.clone(),
            frequencies,
            boundary,
            material,
            pec,
            solver,
            state,
            source_mode,
            spec: spec_out,
        })
    }

    fn check_source(&self, ctx: &Ctx) -> Result<(), ConfigError> {
        let s = &self.source;
        let d = self.dimension;
        match s.component.as_deref() {
            None => {}
            Some("z") if d == 2 => {}
            Some("x" | "y" | "z") if d == 3 => {}
            Some(c) => {
                return Err(ctx.err("source", 0, "component", format!("component `{c}` is not available in {d}D")))
            }
        }
        if !s.amplitude.is_finite() {
            return Err(ctx.err("source", 0, "amplitude", "amplitude must be finite"));
        }
        if let Some(SigmaCfg::Rule(r)) = &s.sigma {
            if r != "sweep" {
                return Err(ctx.err("source", 0, "sigma", "sigma is a number or \"sweep\""));
            }
        }
        if let Some(SigmaCfg::Value(v)) = s.sigma {
            if !(v > 0.0) {
                return Err(ctx.err("source", 0, "sigma", "sigma must be positive"));
            }
        }
        match s.kind {
            SourceKind::Gaussian => {
                if let Some(c) = &s.center {
                    if c.len() != d {
                        return Err(ctx.err("source", 0, "center", format!("center needs {d} coordinates")));
                    }
                }
            }
            SourceKind::Line => {
                if s.axis.is_none_or(|a| a >= d) {
                    return Err(ctx.err("source", 0, "axis", "line source needs an axis index below the dimension"));
                }
                if s.position.is_none() {
                    return Err(ctx.err("source", 0, "position", "line source needs a position"));
                }
            }
            SourceKind::Bump => {
                if d != 2 || self.domain.lower != [0.0, 0.0] || self.domain.upper != [1.0, 1.0] {
                    return Err(ctx.err("source", 0, "kind", "the bump source lives on the 2D unit square"));
                }
            }
        }
        Ok(())
    }

    pub fn sigma(&self, omega: f64) -> f64 {
        match &self.source.sigma {
            Some(SigmaCfg::Value(v)) => *v,
            Some(SigmaCfg::Rule(_)) => (omega * omega).max(36.0),
            None => 144.0,
        }
    }

    pub fn component_index(&self) -> usize {
        match (self.dimension, self.source.component.as_deref()) {
            (2, _) => 0,
            (_, Some("y")) => 1,
            (_, Some("z")) => 2,
            _ => 0,
        }
    }

    /// Frequencies visited by a sweep, in increasing order.
    pub fn sweep_frequencies(&self) -> Vec<f64> {
        let Some(sw) = &self.sweep else { return Vec::new() };
        let tau = 2.0 * std::f64::consts::PI;
        let mut v: Vec<f64> = if let Some(f) = &sw.frequencies {
            f.clone()
        } else if let Some(l) = &sw.wavelengths {
            l.iter().map(|x| tau / x).collect()
        } else {
            let (lo, hi) = (sw.k_min.unwrap_or(1), sw.k_max.unwrap_or(0));
            (lo..=hi).step_by(sw.k_step).map(|k| k as f64 + sw.offset).collect()
        };
        v.sort_by(f64::total_cmp);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
dimension = 2

[domain]
lower = [-1.0, -1.0]
upper = [1.0, 1.0]
cells_per_omega = 2

[source]
kind = "gaussian"

[solve]
frequency = 12.5
periods = 10
"#;

    #[test]
    fn defaults_resolve() {
        let c = RunConfig::parse(BASE).unwrap();
        let r = c.resolve(BASE).unwrap();
        assert_eq!(r.solver, SolverKind::Gmres);
        assert_eq!(r.state, StateMode::Full);
        assert_eq!(c.cells_for(12.5), vec![26, 26]);
        assert!(r.boundary.is_all_pec());
    }

    #[test]
    fn unknown_key_reports_line() {
        let src = BASE.replace("periods = 10", "periods = 10\nbogus = 1");
        let e = RunConfig::parse(&src).unwrap_err();
        assert_eq!(e.line, Some(15));
    }

    #[test]
    fn incommensurate_frequencies_rejected_with_line() {
        let src = BASE.replace("frequency = 12.5", "frequencies = [5.5, 7.1]");
        let c = RunConfig::parse(&src).unwrap();
        let e = c.resolve(&src).unwrap_err();
        assert_eq!(e.line, Some(13));
    }

    #[test]
    fn cg_on_open_boundary_rejected() {
        let src = format!("{BASE}solver = \"cg\"\n[boundary]\nall = \"open\"\n");
        let c = RunConfig::parse(&src).unwrap();
        let e = c.resolve(&src).unwrap_err();
        assert!(e.message.contains("CG"));
        assert_eq!(e.line, Some(15));
    }

    #[test]
    fn snapshot_round_trips() {
        let c = RunConfig::parse(BASE).unwrap();
        let again = RunConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn lattice_skips_rows() {
        let src = format!(
            "{BASE}[[material.inclusion]]\nshape = \"disk_lattice\"\norigin = [-0.5, -0.5]\npitch = [0.5, 0.5]\ncounts = [3, 3]\nskip_rows = [1]\nradius = 0.1\neps = 11.4\n"
        );
        let c = RunConfig::parse(&src).unwrap();
        let r = c.resolve(&src).unwrap();
        assert_eq!(r.material.inclusions.len(), 6);
    }
}
