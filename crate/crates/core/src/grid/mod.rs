//! Staggered Yee grids, material placement and PEC masks.
//!
//! Every field component is stored as a dense array indexed `[i, j]` (2D) or
//! `[i, j, k]` (3D) in row-major order, so the last index is contiguous. The
//! position of entry `(i, j, k)` of a component is
//! `lower + (index + stagger) * spacing` per axis, where `stagger` is 0 or 1/2.

mod geometry;
mod grid2d;
mod grid3d;
mod layout;
mod storage;

pub use geometry::{BoundaryKind, BoundarySpec, Domain, FnMedium, Inclusion, MaterialSpec, Medium, Region};
pub use grid2d::Grid2D;
pub use grid3d::Grid3D;
pub use layout::{DofLayout, StateMode, StateVector};
pub use storage::YeeStorage;

use crate::error::{Error, Result};

/// Shape and staggering of one field component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentInfo {
    pub name: &'static str,
    /// Entry counts along x, y, z. Unused trailing axes have count 1.
    pub dims: [usize; 3],
    /// Offset of the first entry from the lower corner, in cells.
    pub stagger: [f64; 3],
}

impl ComponentInfo {
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Linear offset of `(i, j, k)` in the row-major storage.
    #[inline]
    pub fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    /// Inverse of [`ComponentInfo::offset`].
    #[inline]
    pub fn index(&self, offset: usize) -> [usize; 3] {
        let k = offset % self.dims[2];
        let rest = offset / self.dims[2];
        [rest / self.dims[1], rest % self.dims[1], k]
    }

    pub fn position(&self, domain: &Domain, idx: [usize; 3]) -> [f64; 3] {
        let mut p = [0.0; 3];
        for (a, slot) in p.iter_mut().enumerate().take(domain.dim()) {
            *slot = domain.lower[a] + (idx[a] as f64 + self.stagger[a]) * domain.spacing(a);
        }
        p
    }
}

/// One array per component, in the same storage order as the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet {
    pub components: Vec<Vec<f64>>,
}

impl FieldSet {
    pub fn zeros(infos: &[ComponentInfo]) -> Self {
        Self {
            components: infos.iter().map(|c| vec![0.0; c.len()]).collect(),
        }
    }

    /// Evaluates `f(component, position)` at every entry.
    pub fn sample(
        domain: &Domain,
        infos: &[ComponentInfo],
        f: impl Fn(usize, [f64; 3]) -> f64,
    ) -> Self {
        let components = infos
            .iter()
            .enumerate()
            .map(|(c, info)| {
                (0..info.len())
                    .map(|off| f(c, info.position(domain, info.index(off))))
                    .collect()
            })
            .collect();
        Self { components }
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&mut self, factor: f64) {
        self.components
            .iter_mut()
            .flatten()
            .for_each(|v| *v *= factor);
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().flatten().all(|v| *v == 0.0)
    }

    pub(crate) fn check_shape(&self, infos: &[ComponentInfo], what: &str) -> Result<()> {
        let ok = self.components.len() == infos.len()
            && self
                .components
                .iter()
                .zip(infos)
                .all(|(c, i)| c.len() == i.len());
        if ok {
            Ok(())
        } else {
            Err(Error::Contract(format!("{what} does not match the grid layout")))
        }
    }
}

/// Common interface of the 2D TM and 3D Yee grids, used by the time stepper,
/// the filters and the solvers.
pub trait YeeGrid: Clone + Send + Sync {
    fn storage(&self) -> &YeeStorage;
    fn storage_mut(&mut self) -> &mut YeeStorage;

    /// `H += dt * (-(1/mu) curl E)` at every H location.
    fn update_h(&mut self, dt: f64);

    /// `E += dt/eps * (curl H - sum_k a_k J_k)` at interior E locations,
    /// followed by the Mur update on open faces and the PEC mask.
    fn update_e(&mut self, dt: f64, sources: &[(f64, &FieldSet)]);

    /// `(1/eps) curl H` at interior, unmasked E locations; zero elsewhere.
    fn curl_h(&self) -> FieldSet;

    /// `-(1/mu) curl E` at every H location.
    fn curl_e(&self) -> FieldSet;

    fn domain(&self) -> &Domain {
        &self.storage().domain
    }

    fn boundary(&self) -> &BoundarySpec {
        &self.storage().boundary
    }

    fn e_components(&self) -> &[ComponentInfo] {
        &self.storage().e_info
    }

    fn h_components(&self) -> &[ComponentInfo] {
        &self.storage().h_info
    }

    fn e_field(&self, c: usize) -> &[f64] {
        &self.storage().e[c]
    }

    fn e_field_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.storage_mut().e[c]
    }

    fn h_field(&self, c: usize) -> &[f64] {
        &self.storage().h[c]
    }

    fn h_field_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.storage_mut().h[c]
    }

    /// Locations held at zero (PEC faces and embedded conductors).
    fn e_mask(&self, c: usize) -> &[bool] {
        &self.storage().mask[c]
    }

    /// Permittivity sampled at the entries of E component `c`.
    fn permittivity(&self, c: usize) -> &[f64] {
        &self.storage().eps[c]
    }

    /// Permeability sampled at the entries of H component `c`.
    fn permeability(&self, c: usize) -> &[f64] {
        &self.storage().mu[c]
    }

    /// Standard Yee CFL step `1 / (c_max sqrt(sum 1/dx_i^2))`.
    fn cfl_dt(&self) -> f64 {
        self.storage().cfl_dt()
    }

    /// Largest wave speed `1/sqrt(eps mu)` over the sampled coefficients.
    fn max_wave_speed(&self) -> f64 {
        self.storage().max_wave_speed()
    }

    fn apply_pec(&mut self) {
        self.storage_mut().apply_pec();
    }

    fn zero_fields(&mut self) {
        let s = self.storage_mut();
        s.e.iter_mut().chain(s.h.iter_mut()).for_each(|v| v.fill(0.0));
    }

    fn e_fields(&self) -> FieldSet {
        FieldSet {
            components: self.storage().e.clone(),
        }
    }

    fn h_fields(&self) -> FieldSet {
        FieldSet {
            components: self.storage().h.clone(),
        }
    }

    fn set_e_fields(&mut self, fields: &FieldSet) -> Result<()> {
        fields.check_shape(self.e_components(), "E field set")?;
        for (dst, src) in self.storage_mut().e.iter_mut().zip(&fields.components) {
            dst.copy_from_slice(src);
        }
        Ok(())
    }

    fn set_h_fields(&mut self, fields: &FieldSet) -> Result<()> {
        fields.check_shape(self.h_components(), "H field set")?;
        for (dst, src) in self.storage_mut().h.iter_mut().zip(&fields.components) {
            dst.copy_from_slice(src);
        }
        Ok(())
    }

    /// Samples `f(component, position)` at the E locations.
    fn sample_e(&self, f: impl Fn(usize, [f64; 3]) -> f64) -> FieldSet {
        FieldSet::sample(self.domain(), self.e_components(), f)
    }

    /// Samples `f(component, position)` at the H locations.
    fn sample_h(&self, f: impl Fn(usize, [f64; 3]) -> f64) -> FieldSet {
        FieldSet::sample(self.domain(), self.h_components(), f)
    }

    /// True when every permittivity and permeability sample equals 1.
    fn is_vacuum(&self) -> bool {
        let s = self.storage();
        s.eps.iter().chain(&s.mu).flatten().all(|&v| v == 1.0)
    }

    /// True when every permittivity sample and every permeability sample is
    /// the same constant.
    fn is_homogeneous(&self) -> bool {
        let s = self.storage();
        let e0 = s.eps[0][0];
        let m0 = s.mu[0][0];
        s.eps.iter().flatten().all(|&v| v == e0) && s.mu.iter().flatten().all(|&v| v == m0)
    }

    /// True when some E location away from the domain boundary is masked.
    fn has_embedded_pec(&self) -> bool {
        self.storage().has_embedded_pec()
    }
}
