use crate::error::{Error, Result};

/// Axis-aligned computational box with a uniform cell count per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub cells: Vec<usize>,
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, cells: Vec<usize>) -> Result<Self> {
        let dim = lower.len();
        if !(2..=3).contains(&dim) || upper.len() != dim || cells.len() != dim {
            return Err(Error::Config(format!(
                "domain needs 2 or 3 axes with matching corners and cell counts (got {}, {}, {})",
                lower.len(),
                upper.len(),
                cells.len()
            )));
        }
        for a in 0..dim {
            if !(upper[a] > lower[a]) || !lower[a].is_finite() || !upper[a].is_finite() {
                return Err(Error::Config(format!(
                    "axis {a}: upper corner {} must exceed lower corner {}",
                    upper[a], lower[a]
                )));
            }
            if cells[a] < 2 {
                return Err(Error::Config(format!(
                    "axis {a}: at least 2 cells are required (got {})",
                    cells[a]
                )));
            }
        }
        Ok(Self { lower, upper, cells })
    }

    pub fn square(lower: f64, upper: f64, cells: usize) -> Result<Self> {
        Self::new(vec![lower; 2], vec![upper; 2], vec![cells; 2])
    }

    pub fn cube(lower: f64, upper: f64, cells: usize) -> Result<Self> {
        Self::new(vec![lower; 3], vec![upper; 3], vec![cells; 3])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extent(axis) / self.cells[axis] as f64
    }

    pub(crate) fn tolerance(&self) -> f64 {
        1e-9 * (0..self.dim())
            .map(|a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Geometric primitive used for PEC scatterers and material inclusions.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Closed axis-aligned box; in 2D only the first two coordinates are used.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Closed disk in the x-y plane; in 3D an infinite cylinder along z.
    Disk { center: [f64; 2], radius: f64 },
}

impl Region {
    pub fn rect(lower: [f64; 2], upper: [f64; 2]) -> Self {
        Region::Box {
            lower: lower.to_vec(),
            upper: upper.to_vec(),
        }
    }

    pub fn cuboid(lower: [f64; 3], upper: [f64; 3]) -> Self {
        Region::Box {
            lower: lower.to_vec(),
            upper: upper.to_vec(),
        }
    }

    pub fn disk(center: [f64; 2], radius: f64) -> Self {
        Region::Disk { center, radius }
    }

    /// Point inclusion with an absolute tolerance `tol`.
    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        match self {
            Region::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .zip(p)
                .all(|((lo, hi), x)| *x >= lo - tol && *x <= hi + tol),
            Region::Disk { center, radius } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                (dx * dx + dy * dy).sqrt() <= radius + tol
            }
        }
    }

    pub(crate) fn validate(&self, domain: &Domain) -> Result<()> {
        let tol = domain.tolerance();
        match self {
            Region::Box { lower, upper } => {
                if lower.len() != domain.dim() || upper.len() != domain.dim() {
                    return Err(Error::Config(format!(
                        "box region needs {} coordinates per corner",
                        domain.dim()
                    )));
                }
                for a in 0..domain.dim() {
                    if lower[a] > upper[a] {
                        return Err(Error::Config(format!("box region is inverted on axis {a}")));
                    }
                    if lower[a] < domain.lower[a] - tol || upper[a] > domain.upper[a] + tol {
                        return Err(Error::Config(format!(
                            "box region [{}, {}] leaves the domain on axis {a}",
                            lower[a], upper[a]
                        )));
                    }
                }
            }
            Region::Disk { center, radius } => {
                if *radius <= 0.0 {
                    return Err(Error::Config("disk radius must be positive".into()));
                }
                for a in 0..2 {
                    if center[a] - radius < domain.lower[a] - tol
                        || center[a] + radius > domain.upper[a] + tol
                    {
                        return Err(Error::Config(format!(
                            "disk at ({}, {}) with radius {radius} leaves the domain",
                            center[0], center[1]
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Pointwise material coefficients.
pub trait Medium: Sync {
    fn permittivity(&self, p: &[f64; 3]) -> f64;
    fn permeability(&self, p: &[f64; 3]) -> f64;
}

/// Material with an analytic description, `FnMedium(eps, mu)`.
pub struct FnMedium<E, M>(pub E, pub M);

impl<E, M> Medium for FnMedium<E, M>
where
    E: Fn(&[f64; 3]) -> f64 + Sync,
    M: Fn(&[f64; 3]) -> f64 + Sync,
{
    fn permittivity(&self, p: &[f64; 3]) -> f64 {
        (self.0)(p)
    }
    fn permeability(&self, p: &[f64; 3]) -> f64 {
        (self.1)(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inclusion {
    pub region: Region,
    pub eps: f64,
    pub mu: f64,
}

/// Background medium with piecewise-constant inclusions. Later inclusions
/// take precedence where they overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialSpec {
    pub eps: f64,
    pub mu: f64,
    pub inclusions: Vec<Inclusion>,
}

impl MaterialSpec {
    pub fn vacuum() -> Self {
        Self::uniform(1.0, 1.0)
    }

    pub fn uniform(eps: f64, mu: f64) -> Self {
        Self {
            eps,
            mu,
            inclusions: Vec::new(),
        }
    }

    pub fn with_inclusion(mut self, region: Region, eps: f64, mu: f64) -> Self {
        self.inclusions.push(Inclusion { region, eps, mu });
        self
    }

    fn lookup(&self, p: &[f64; 3]) -> (f64, f64) {
        self.inclusions
            .iter()
            .rev()
            .find(|inc| inc.region.contains(p, 1e-12))
            .map(|inc| (inc.eps, inc.mu))
            .unwrap_or((self.eps, self.mu))
    }

    /// Checks coefficient signs and that every inclusion lies in `domain`.
    pub fn validate(&self, domain: &Domain) -> Result<()> {
        let all = std::iter::once((self.eps, self.mu))
            .chain(self.inclusions.iter().map(|i| (i.eps, i.mu)));
        for (eps, mu) in all {
            if !(eps > 0.0 && mu > 0.0) {
                return Err(Error::Config(format!(
                    "material coefficients must be positive (eps = {eps}, mu = {mu})"
                )));
            }
        }
        self.inclusions
            .iter()
            .try_for_each(|inc| inc.region.validate(domain))
    }
}

impl Medium for MaterialSpec {
    fn permittivity(&self, p: &[f64; 3]) -> f64 {
        self.lookup(p).0
    }
    fn permeability(&self, p: &[f64; 3]) -> f64 {
        self.lookup(p).1
    }
}

/// Condition imposed on one face of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Pec,
    /// First-order Mur absorbing condition.
    Mur,
}

/// Per-face conditions ordered `[x_lo, x_hi, y_lo, y_hi, (z_lo, z_hi)]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundarySpec {
    pub faces: Vec<BoundaryKind>,
}

impl BoundarySpec {
    pub fn all(kind: BoundaryKind, dim: usize) -> Self {
        Self {
            faces: vec![kind; 2 * dim],
        }
    }

    pub fn pec(dim: usize) -> Self {
        Self::all(BoundaryKind::Pec, dim)
    }

    pub fn open(dim: usize) -> Self {
        Self::all(BoundaryKind::Mur, dim)
    }

    pub fn face(&self, axis: usize, high: bool) -> BoundaryKind {
        self.faces[2 * axis + usize::from(high)]
    }

    pub fn is_all_pec(&self) -> bool {
        self.faces.iter().all(|f| *f == BoundaryKind::Pec)
    }

    pub fn has_mur(&self) -> bool {
        self.faces.contains(&BoundaryKind::Mur)
    }

    pub(crate) fn validate(&self, dim: usize) -> Result<()> {
        if self.faces.len() != 2 * dim {
            return Err(Error::Config(format!(
                "boundary specification needs {} faces, got {}",
                2 * dim,
                self.faces.len()
            )));
        }
        Ok(())
    }
}
