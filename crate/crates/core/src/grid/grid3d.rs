use super::geometry::{BoundarySpec, Domain, MaterialSpec, Medium, Region};
use super::storage::YeeStorage;
use super::{ComponentInfo, FieldSet, YeeGrid};
use crate::error::{Error, Result};

/// Full 3D Yee grid. E components sit on cell edges, H components on faces.
#[derive(Debug, Clone)]
pub struct Grid3D {
    s: YeeStorage,
    n: [usize; 3],
    r: [f64; 3],
}

fn components(n: [usize; 3]) -> (Vec<ComponentInfo>, Vec<ComponentInfo>) {
    let [nx, ny, nz] = n;
    let e = vec![
        ComponentInfo {
            name: "Ex",
            dims: [nx, ny + 1, nz + 1],
            stagger: [0.5, 0.0, 0.0],
        },
        ComponentInfo {
            name: "Ey",
            dims: [nx + 1, ny, nz + 1],
            stagger: [0.0, 0.5, 0.0],
        },
        ComponentInfo {
            name: "Ez",
            dims: [nx + 1, ny + 1, nz],
            stagger: [0.0, 0.0, 0.5],
        },
    ];
    let h = vec![
        ComponentInfo {
            name: "Hx",
            dims: [nx + 1, ny, nz],
            stagger: [0.0, 0.5, 0.5],
        },
        ComponentInfo {
            name: "Hy",
            dims: [nx, ny + 1, nz],
            stagger: [0.5, 0.0, 0.5],
        },
        ComponentInfo {
            name: "Hz",
            dims: [nx, ny, nz + 1],
            stagger: [0.5, 0.5, 0.0],
        },
    ];
    (e, h)
}

/// Calls `sink(c, offset, v)` with `v = -(1/mu) (curl E)_c` at every H entry.
fn curl_e_kernel(
    e: &[Vec<f64>],
    inv_mu: &[Vec<f64>],
    ei: &[ComponentInfo],
    hi: &[ComponentInfo],
    r: [f64; 3],
    mut sink: impl FnMut(usize, usize, f64),
) {
    let (ex, ey, ez) = (&e[0], &e[1], &e[2]);
    let (iex, iey, iez) = (&ei[0], &ei[1], &ei[2]);
    let [rx, ry, rz] = r;

    let d = hi[0].dims;
    for i in 0..d[0] {
        for j in 0..d[1] {
            for k in 0..d[2] {
                let o = hi[0].offset(i, j, k);
                let dez = ez[iez.offset(i, j + 1, k)] - ez[iez.offset(i, j, k)];
                let dey = ey[iey.offset(i, j, k + 1)] - ey[iey.offset(i, j, k)];
                sink(0, o, -inv_mu[0][o] * (dez * ry - dey * rz));
            }
        }
    }
    let d = hi[1].dims;
    for i in 0..d[0] {
        for j in 0..d[1] {
            for k in 0..d[2] {
                let o = hi[1].offset(i, j, k);
                let dex = ex[iex.offset(i, j, k + 1)] - ex[iex.offset(i, j, k)];
                let dez = ez[iez.offset(i + 1, j, k)] - ez[iez.offset(i, j, k)];
                sink(1, o, -inv_mu[1][o] * (dex * rz - dez * rx));
            }
        }
    }
    let d = hi[2].dims;
    for i in 0..d[0] {
        for j in 0..d[1] {
            for k in 0..d[2] {
                let o = hi[2].offset(i, j, k);
                let dey = ey[iey.offset(i + 1, j, k)] - ey[iey.offset(i, j, k)];
                let dex = ex[iex.offset(i, j + 1, k)] - ex[iex.offset(i, j, k)];
                sink(2, o, -inv_mu[2][o] * (dey * rx - dex * ry));
            }
        }
    }
}

/// Calls `sink(c, offset, v)` with `v = (1/eps) (curl H)_c` at every interior
/// E entry.
fn curl_h_kernel(
    h: &[Vec<f64>],
    inv_eps: &[Vec<f64>],
    ei: &[ComponentInfo],
    hi: &[ComponentInfo],
    n: [usize; 3],
    r: [f64; 3],
    mut sink: impl FnMut(usize, usize, f64),
) {
    let (hx, hy, hz) = (&h[0], &h[1], &h[2]);
    let (ihx, ihy, ihz) = (&hi[0], &hi[1], &hi[2]);
    let [nx, ny, nz] = n;
    let [rx, ry, rz] = r;

    for i in 0..nx {
        for j in 1..ny {
            for k in 1..nz {
                let o = ei[0].offset(i, j, k);
                let dhz = hz[ihz.offset(i, j, k)] - hz[ihz.offset(i, j - 1, k)];
                let dhy = hy[ihy.offset(i, j, k)] - hy[ihy.offset(i, j, k - 1)];
                sink(0, o, inv_eps[0][o] * (dhz * ry - dhy * rz));
            }
        }
    }
    for i in 1..nx {
        for j in 0..ny {
            for k in 1..nz {
                let o = ei[1].offset(i, j, k);
                let dhx = hx[ihx.offset(i, j, k)] - hx[ihx.offset(i, j, k - 1)];
                let dhz = hz[ihz.offset(i, j, k)] - hz[ihz.offset(i - 1, j, k)];
                sink(1, o, inv_eps[1][o] * (dhx * rz - dhz * rx));
            }
        }
    }
    for i in 1..nx {
        for j in 1..ny {
            for k in 0..nz {
                let o = ei[2].offset(i, j, k);
                let dhy = hy[ihy.offset(i, j, k)] - hy[ihy.offset(i - 1, j, k)];
                let dhx = hx[ihx.offset(i, j, k)] - hx[ihx.offset(i, j - 1, k)];
                sink(2, o, inv_eps[2][o] * (dhy * rx - dhx * ry));
            }
        }
    }
}

impl Grid3D {
    pub fn new(
        domain: Domain,
        medium: &dyn Medium,
        pec_regions: &[Region],
        boundary: BoundarySpec,
    ) -> Result<Self> {
        if domain.dim() != 3 {
            return Err(Error::Config(format!(
                "3D grid needs a 3D domain, got {} axes",
                domain.dim()
            )));
        }
        let n = [domain.cells[0], domain.cells[1], domain.cells[2]];
        let r = [
            1.0 / domain.spacing(0),
            1.0 / domain.spacing(1),
            1.0 / domain.spacing(2),
        ];
        let (e, h) = components(n);
        let s = YeeStorage::build(domain, medium, pec_regions, boundary, e, h)?;
        Ok(Self { s, n, r })
    }

    /// Vacuum grid with every face PEC.
    pub fn pec_vacuum(domain: Domain) -> Result<Self> {
        Self::new(domain, &MaterialSpec::vacuum(), &[], BoundarySpec::pec(3))
    }

    pub fn cells(&self) -> [usize; 3] {
        self.n
    }
}

impl YeeGrid for Grid3D {
    fn storage(&self) -> &YeeStorage {
        &self.s
    }

    fn storage_mut(&mut self) -> &mut YeeStorage {
        &mut self.s
    }

    fn update_h(&mut self, dt: f64) {
        let s = &mut self.s;
        let h = &mut s.h;
        curl_e_kernel(&s.e, &s.inv_mu, &s.e_info, &s.h_info, self.r, |c, o, v| {
            h[c][o] += dt * v;
        });
    }

    fn update_e(&mut self, dt: f64, sources: &[(f64, &FieldSet)]) {
        self.s.begin_e_update();
        let s = &mut self.s;
        let e = &mut s.e;
        let inv_eps = &s.inv_eps;
        curl_h_kernel(&s.h, inv_eps, &s.e_info, &s.h_info, self.n, self.r, |c, o, v| {
            let mut j = 0.0;
            for (a, f) in sources {
                j += a * f.components[c][o];
            }
            e[c][o] += dt * (v - inv_eps[c][o] * j);
        });
        s.finish_e_update(dt);
    }

    fn curl_h(&self) -> FieldSet {
        let s = &self.s;
        let mut out = FieldSet::zeros(&s.e_info);
        curl_h_kernel(&s.h, &s.inv_eps, &s.e_info, &s.h_info, self.n, self.r, |c, o, v| {
            if !s.mask[c][o] {
                out.components[c][o] = v;
            }
        });
        out
    }

    fn curl_e(&self) -> FieldSet {
        let s = &self.s;
        let mut out = FieldSet::zeros(&s.h_info);
        curl_e_kernel(&s.e, &s.inv_mu, &s.e_info, &s.h_info, self.r, |c, o, v| {
            out.components[c][o] = v;
        });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn staggered_extents_for_2_cells() {
        let g = Grid3D::pec_vacuum(Domain::cube(0.0, 1.0, 2).unwrap()).unwrap();
        let dims: Vec<_> = g.e_components().iter().map(|c| c.dims).collect();
        assert_eq!(dims, vec![[2, 3, 3], [3, 2, 3], [3, 3, 2]]);
        let dims: Vec<_> = g.h_components().iter().map(|c| c.dims).collect();
        assert_eq!(dims, vec![[3, 2, 2], [2, 3, 2], [2, 2, 3]]);
    }

    #[test]
    fn pec_box_masks_every_boundary_tangential_entry() {
        let g = Grid3D::pec_vacuum(Domain::cube(0.0, 1.0, 3).unwrap()).unwrap();
        for (c, info) in g.e_components().iter().enumerate() {
            for off in 0..info.len() {
                let idx = info.index(off);
                let on_face = (0..3).any(|a| {
                    info.stagger[a] == 0.0 && (idx[a] == 0 || idx[a] == 3)
                });
                assert_eq!(g.e_mask(c)[off], on_face);
            }
        }
    }

    #[test]
    fn cylinder_permittivity_sampled_pointwise() {
        let region = Region::disk([0.5, 0.5], 0.2);
        let m = MaterialSpec::vacuum().with_inclusion(region.clone(), 11.4, 1.0);
        let g = Grid3D::new(Domain::cube(0.0, 1.0, 10).unwrap(), &m, &[], BoundarySpec::pec(3)).unwrap();
        for (c, info) in g.e_components().iter().enumerate() {
            for off in 0..info.len() {
                let p = info.position(g.domain(), info.index(off));
                let expect = if region.contains(&p, 1e-12) { 11.4 } else { 1.0 };
                assert_eq!(g.permittivity(c)[off], expect);
            }
        }
    }
}
