use super::geometry::{BoundaryKind, BoundarySpec, Domain, Medium, Region};
use super::ComponentInfo;
use crate::error::{Error, Result};

/// Field arrays, sampled coefficients and masks shared by both grid flavours.
#[derive(Debug, Clone)]
pub struct YeeStorage {
    pub(crate) domain: Domain,
    pub(crate) boundary: BoundarySpec,
    pub(crate) e_info: Vec<ComponentInfo>,
    pub(crate) h_info: Vec<ComponentInfo>,
    pub(crate) e: Vec<Vec<f64>>,
    pub(crate) h: Vec<Vec<f64>>,
    pub(crate) eps: Vec<Vec<f64>>,
    /// Permeability at E points, used for the local wave speed in Mur faces.
    pub(crate) mu_at_e: Vec<Vec<f64>>,
    pub(crate) mu: Vec<Vec<f64>>,
    pub(crate) inv_eps: Vec<Vec<f64>>,
    pub(crate) inv_mu: Vec<Vec<f64>>,
    pub(crate) mask: Vec<Vec<bool>>,
    /// E at the previous time level; only allocated with Mur faces.
    pub(crate) e_old: Vec<Vec<f64>>,
}

fn sample_positive(
    domain: &Domain,
    info: &ComponentInfo,
    what: &str,
    f: impl Fn(&[f64; 3]) -> f64,
) -> Result<Vec<f64>> {
    (0..info.len())
        .map(|off| {
            let p = info.position(domain, info.index(off));
            let v = f(&p);
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Config(format!(
                    "{what} must be positive and finite, got {v} at {} ({:.4}, {:.4}, {:.4})",
                    info.name, p[0], p[1], p[2]
                )))
            }
        })
        .collect()
}

impl YeeStorage {
    pub(crate) fn build(
        domain: Domain,
        medium: &dyn Medium,
        pec_regions: &[Region],
        boundary: BoundarySpec,
        e_info: Vec<ComponentInfo>,
        h_info: Vec<ComponentInfo>,
    ) -> Result<Self> {
        boundary.validate(domain.dim())?;
        for r in pec_regions {
            r.validate(&domain)?;
        }
        let eps = e_info
            .iter()
            .map(|c| sample_positive(&domain, c, "permittivity", |p| medium.permittivity(p)))
            .collect::<Result<Vec<_>>>()?;
        let mu_at_e = e_info
            .iter()
            .map(|c| sample_positive(&domain, c, "permeability", |p| medium.permeability(p)))
            .collect::<Result<Vec<_>>>()?;
        let mu = h_info
            .iter()
            .map(|c| sample_positive(&domain, c, "permeability", |p| medium.permeability(p)))
            .collect::<Result<Vec<_>>>()?;
        let recip = |v: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            v.iter().map(|c| c.iter().map(|x| 1.0 / x).collect()).collect()
        };
        let inv_eps = recip(&eps);
        let inv_mu = recip(&mu);

        let tol = domain.tolerance();
        let dim = domain.dim();
        let mask = e_info
            .iter()
            .map(|info| {
                (0..info.len())
                    .map(|off| {
                        let idx = info.index(off);
                        let on_pec_face = (0..dim).any(|a| {
                            info.stagger[a] == 0.0
                                && ((idx[a] == 0 && boundary.face(a, false) == BoundaryKind::Pec)
                                    || (idx[a] == domain.cells[a]
                                        && boundary.face(a, true) == BoundaryKind::Pec))
                        });
                        on_pec_face || {
                            let p = info.position(&domain, idx);
                            pec_regions.iter().any(|r| r.contains(&p[..dim], tol))
                        }
                    })
                    .collect()
            })
            .collect();

        let zeros = |infos: &[ComponentInfo]| -> Vec<Vec<f64>> {
            infos.iter().map(|c| vec![0.0; c.len()]).collect()
        };
        let e = zeros(&e_info);
        let h = zeros(&h_info);
        let e_old = if boundary.has_mur() { zeros(&e_info) } else { Vec::new() };
        Ok(Self {
            domain,
            boundary,
            e_info,
            h_info,
            e,
            h,
            eps,
            mu_at_e,
            mu,
            inv_eps,
            inv_mu,
            mask,
            e_old,
        })
    }

    pub(crate) fn max_wave_speed(&self) -> f64 {
        let mut c: f64 = 0.0;
        for (eps, mu) in self.eps.iter().zip(&self.mu_at_e) {
            for (e, m) in eps.iter().zip(mu) {
                c = c.max(1.0 / (e * m).sqrt());
            }
        }
        let eps_min = self.eps.iter().flatten().fold(f64::INFINITY, |a, &b| a.min(b));
        for m in self.mu.iter().flatten() {
            c = c.max(1.0 / (eps_min * m).sqrt());
        }
        c
    }

    pub(crate) fn cfl_dt(&self) -> f64 {
        let s: f64 = (0..self.domain.dim())
            .map(|a| self.domain.spacing(a).powi(-2))
            .sum();
        1.0 / (self.max_wave_speed() * s.sqrt())
    }

    pub(crate) fn apply_pec(&mut self) {
        for (field, mask) in self.e.iter_mut().zip(&self.mask) {
            for (v, &m) in field.iter_mut().zip(mask) {
                if m {
                    *v = 0.0;
                }
            }
        }
    }

    pub(crate) fn has_embedded_pec(&self) -> bool {
        let dim = self.domain.dim();
        self.e_info.iter().zip(&self.mask).any(|(info, mask)| {
            mask.iter().enumerate().any(|(off, &m)| {
                if !m {
                    return false;
                }
                let idx = info.index(off);
                !(0..dim).any(|a| {
                    info.stagger[a] == 0.0 && (idx[a] == 0 || idx[a] == self.domain.cells[a])
                })
            })
        })
    }

    /// Snapshot of E before an update, needed by the Mur faces.
    pub(crate) fn begin_e_update(&mut self) {
        if !self.e_old.is_empty() {
            for (dst, src) in self.e_old.iter_mut().zip(&self.e) {
                dst.copy_from_slice(src);
            }
        }
    }

    /// Mur faces in axis order, then the PEC mask.
    pub(crate) fn finish_e_update(&mut self, dt: f64) {
        if !self.e_old.is_empty() {
            for axis in 0..self.domain.dim() {
                for high in [false, true] {
                    if self.boundary.face(axis, high) == BoundaryKind::Mur {
                        self.mur_face(axis, high, dt);
                    }
                }
            }
        }
        self.apply_pec();
    }

    /// First-order Mur update `E0' = E1 + k (E1' - E0)` with
    /// `k = (c dt - h) / (c dt + h)` on every E component tangential to the face.
    fn mur_face(&mut self, axis: usize, high: bool, dt: f64) {
        let h = self.domain.spacing(axis);
        let plane = if high { self.domain.cells[axis] } else { 0 };
        let inner = if high { plane - 1 } else { 1 };
        for c in 0..self.e_info.len() {
            let info = &self.e_info[c];
            if info.stagger[axis] != 0.0 || info.dims[axis] <= plane {
                continue;
            }
            let mut lo = [0usize; 3];
            let mut hi = info.dims;
            lo[axis] = plane;
            hi[axis] = plane + 1;
            let e = &mut self.e[c];
            let old = &self.e_old[c];
            let eps = &self.eps[c];
            let mu = &self.mu_at_e[c];
            for i in lo[0]..hi[0] {
                for j in lo[1]..hi[1] {
                    for k in lo[2]..hi[2] {
                        let b = info.offset(i, j, k);
                        let mut nb = [i, j, k];
                        nb[axis] = inner;
                        let n = info.offset(nb[0], nb[1], nb[2]);
                        let cdt = dt / (eps[b] * mu[b]).sqrt();
                        let coef = (cdt - h) / (cdt + h);
                        e[b] = old[n] + coef * (e[n] - old[b]);
                    }
                }
            }
        }
    }
}
