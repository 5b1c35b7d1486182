use std::sync::Arc;

use super::geometry::BoundaryKind;
use super::{ComponentInfo, FieldSet, YeeGrid};
use crate::error::{Error, Result};

/// Which fields make up the iterated initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateMode {
    /// E only; H starts from zero. Valid for closed PEC cavities with sine forcing.
    EnergyConserving,
    /// E and H.
    Full,
}

/// Gather lists mapping solver vector entries to grid storage offsets.
///
/// Entries are ordered by component, then `k`, then `j`, then `i` (so `i`
/// varies fastest), E components before H components.
#[derive(Debug, Clone, PartialEq)]
pub struct DofLayout {
    mode: StateMode,
    e: Vec<Vec<usize>>,
    h: Vec<Vec<usize>>,
    len: usize,
}

fn ordered(info: &ComponentInfo, keep: impl Fn([usize; 3]) -> bool) -> Vec<usize> {
    let mut out = Vec::new();
    for k in 0..info.dims[2] {
        for j in 0..info.dims[1] {
            for i in 0..info.dims[0] {
                if keep([i, j, k]) {
                    out.push(info.offset(i, j, k));
                }
            }
        }
    }
    out
}

impl DofLayout {
    pub fn new<G: YeeGrid>(grid: &G, mode: StateMode) -> Self {
        let e: Vec<Vec<usize>> = grid
            .e_components()
            .iter()
            .enumerate()
            .map(|(c, info)| {
                let mask = grid.e_mask(c);
                ordered(info, |idx| !mask[info.offset(idx[0], idx[1], idx[2])])
            })
            .collect();
        let h: Vec<Vec<usize>> = match mode {
            StateMode::EnergyConserving => vec![Vec::new(); grid.h_components().len()],
            StateMode::Full => {
                let dom = grid.domain();
                let bnd = grid.boundary();
                grid.h_components()
                    .iter()
                    .enumerate()
                    .map(|(c, info)| {
                        // H component c is normal to the faces of axis c; it is
                        // constant there under PEC and carries no information.
                        ordered(info, |idx| {
                            let a = c;
                            !((idx[a] == 0 && bnd.face(a, false) == BoundaryKind::Pec)
                                || (idx[a] == dom.cells[a] && bnd.face(a, true) == BoundaryKind::Pec))
                        })
                    })
                    .collect()
            }
        };
        let len = e.iter().chain(&h).map(Vec::len).sum();
        Self { mode, e, h, len }
    }

    pub fn mode(&self) -> StateMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of E entries; H entries follow them in the vector.
    pub fn e_len(&self) -> usize {
        self.e.iter().map(Vec::len).sum()
    }

    pub fn e_offsets(&self, c: usize) -> &[usize] {
        &self.e[c]
    }

    pub fn h_offsets(&self, c: usize) -> &[usize] {
        &self.h[c]
    }

    fn gather_into(lists: &[Vec<usize>], fields: &[Vec<f64>], out: &mut Vec<f64>) {
        for (list, f) in lists.iter().zip(fields) {
            out.extend(list.iter().map(|&o| f[o]));
        }
    }

    fn scatter(lists: &[Vec<usize>], v: &[f64], fields: &mut [Vec<f64>]) -> usize {
        let mut pos = 0;
        for (list, f) in lists.iter().zip(fields.iter_mut()) {
            f.fill(0.0);
            for &o in list {
                f[o] = v[pos];
                pos += 1;
            }
        }
        pos
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n == self.len {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "state vector has length {n}, layout expects {}",
                self.len
            )))
        }
    }

    /// Gathers participating entries from explicit field sets. `h` is ignored
    /// in energy-conserving mode.
    pub fn gather(&self, e: &FieldSet, h: Option<&FieldSet>) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len);
        Self::gather_into(&self.e, &e.components, &mut out);
        if self.mode == StateMode::Full {
            if let Some(h) = h {
                Self::gather_into(&self.h, &h.components, &mut out);
            } else {
                out.resize(self.len, 0.0);
            }
        }
        out
    }

    pub fn flatten<G: YeeGrid>(&self, grid: &G) -> Vec<f64> {
        let s = grid.storage();
        let mut out = Vec::with_capacity(self.len);
        Self::gather_into(&self.e, &s.e, &mut out);
        if self.mode == StateMode::Full {
            Self::gather_into(&self.h, &s.h, &mut out);
        }
        out
    }

    /// Writes `v` into the grid; every non-participating entry becomes zero.
    pub fn unflatten<G: YeeGrid>(&self, v: &[f64], grid: &mut G) -> Result<()> {
        self.check_len(v.len())?;
        let s = grid.storage_mut();
        let used = Self::scatter(&self.e, v, &mut s.e);
        Self::scatter(&self.h, &v[used..], &mut s.h);
        Ok(())
    }

    /// Splits `v` into E and H field sets shaped like `grid`.
    pub fn to_fields<G: YeeGrid>(&self, v: &[f64], grid: &G) -> Result<(FieldSet, FieldSet)> {
        self.check_len(v.len())?;
        let mut e = FieldSet::zeros(grid.e_components());
        let mut h = FieldSet::zeros(grid.h_components());
        let used = Self::scatter(&self.e, v, &mut e.components);
        Self::scatter(&self.h, &v[used..], &mut h.components);
        Ok((e, h))
    }

    /// Energy weights per entry: `eps` at E entries, `mu` at H entries.
    pub fn energy_weights<G: YeeGrid>(&self, grid: &G) -> Vec<f64> {
        let s = grid.storage();
        let mut out = Vec::with_capacity(self.len);
        Self::gather_into(&self.e, &s.eps, &mut out);
        Self::gather_into(&self.h, &s.mu, &mut out);
        out
    }

    /// Grid position of every entry, in vector order.
    pub fn positions<G: YeeGrid>(&self, grid: &G) -> Vec<(bool, usize, [f64; 3])> {
        let dom = grid.domain();
        let mut out = Vec::with_capacity(self.len);
        for (is_e, lists, infos) in [
            (true, &self.e, grid.e_components()),
            (false, &self.h, grid.h_components()),
        ] {
            for (c, (list, info)) in lists.iter().zip(infos).enumerate() {
                out.extend(
                    list.iter()
                        .map(|&o| (is_e, c, info.position(dom, info.index(o)))),
                );
            }
        }
        out
    }
}

/// Solver-side vector of filtered unknowns together with its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub values: Vec<f64>,
    pub layout: Arc<DofLayout>,
}

impl StateVector {
    pub fn zeros(layout: Arc<DofLayout>) -> Self {
        Self {
            values: vec![0.0; layout.len()],
            layout,
        }
    }

    pub fn from_grid<G: YeeGrid>(grid: &G, layout: Arc<DofLayout>) -> Self {
        Self {
            values: layout.flatten(grid),
            layout,
        }
    }

    pub fn new(values: Vec<f64>, layout: Arc<DofLayout>) -> Result<Self> {
        layout.check_len(values.len())?;
        Ok(Self { values, layout })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn write_to<G: YeeGrid>(&self, grid: &mut G) -> Result<()> {
        self.layout.unflatten(&self.values, grid)
    }
}
