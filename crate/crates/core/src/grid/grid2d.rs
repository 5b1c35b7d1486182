use super::geometry::{BoundarySpec, Domain, MaterialSpec, Medium, Region};
use super::storage::YeeStorage;
use super::{ComponentInfo, FieldSet, YeeGrid};
use crate::error::{Error, Result};

/// 2D transverse-magnetic Yee grid with `Ez` at nodes, `Hx` at `(i, j+1/2)`
/// and `Hy` at `(i+1/2, j)`.
#[derive(Debug, Clone)]
pub struct Grid2D {
    s: YeeStorage,
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
}

pub(crate) const EZ: usize = 0;
pub(crate) const HX: usize = 0;
pub(crate) const HY: usize = 1;

fn components(nx: usize, ny: usize) -> (Vec<ComponentInfo>, Vec<ComponentInfo>) {
    let e = vec![ComponentInfo {
        name: "Ez",
        dims: [nx + 1, ny + 1, 1],
        stagger: [0.0, 0.0, 0.0],
    }];
    let h = vec![
        ComponentInfo {
            name: "Hx",
            dims: [nx + 1, ny, 1],
            stagger: [0.0, 0.5, 0.0],
        },
        ComponentInfo {
            name: "Hy",
            dims: [nx, ny + 1, 1],
            stagger: [0.5, 0.0, 0.0],
        },
    ];
    (e, h)
}

impl Grid2D {
    pub fn new(
        domain: Domain,
        medium: &dyn Medium,
        pec_regions: &[Region],
        boundary: BoundarySpec,
    ) -> Result<Self> {
        if domain.dim() != 2 {
            return Err(Error::Config(format!(
                "2D grid needs a 2D domain, got {} axes",
                domain.dim()
            )));
        }
        let (nx, ny) = (domain.cells[0], domain.cells[1]);
        let (dx, dy) = (domain.spacing(0), domain.spacing(1));
        let (e, h) = components(nx, ny);
        let s = YeeStorage::build(domain, medium, pec_regions, boundary, e, h)?;
        Ok(Self { s, nx, ny, dx, dy })
    }

    /// Vacuum grid with every face PEC.
    pub fn pec_vacuum(domain: Domain) -> Result<Self> {
        Self::new(domain, &MaterialSpec::vacuum(), &[], BoundarySpec::pec(2))
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn ez(&self) -> &[f64] {
        &self.s.e[EZ]
    }

    pub fn ez_mut(&mut self) -> &mut [f64] {
        &mut self.s.e[EZ]
    }

    pub fn hx(&self) -> &[f64] {
        &self.s.h[HX]
    }

    pub fn hy(&self) -> &[f64] {
        &self.s.h[HY]
    }

    /// Offset of node `(i, j)` in the `Ez` array.
    #[inline]
    pub fn node(&self, i: usize, j: usize) -> usize {
        i * (self.ny + 1) + j
    }

    pub fn mask(&self) -> &[bool] {
        &self.s.mask[EZ]
    }
}

impl YeeGrid for Grid2D {
    fn storage(&self) -> &YeeStorage {
        &self.s
    }

    fn storage_mut(&mut self) -> &mut YeeStorage {
        &mut self.s
    }

    fn update_h(&mut self, dt: f64) {
        let (nx, ny) = (self.nx, self.ny);
        let (cx, cy) = (dt / self.dx, dt / self.dy);
        let s = &mut self.s;
        let ez = &s.e[EZ];
        let (hx_part, hy_part) = s.h.split_at_mut(1);
        let hx = &mut hx_part[0];
        let hy = &mut hy_part[0];
        let imx = &s.inv_mu[HX];
        let imy = &s.inv_mu[HY];
        let sy = ny + 1;
        for i in 0..=nx {
            let erow = &ez[i * sy..(i + 1) * sy];
            let hrow = &mut hx[i * ny..(i + 1) * ny];
            let mrow = &imx[i * ny..(i + 1) * ny];
            for j in 0..ny {
                hrow[j] -= cy * mrow[j] * (erow[j + 1] - erow[j]);
            }
        }
        for i in 0..nx {
            let e0 = &ez[i * sy..(i + 1) * sy];
            let e1 = &ez[(i + 1) * sy..(i + 2) * sy];
            let hrow = &mut hy[i * sy..(i + 1) * sy];
            let mrow = &imy[i * sy..(i + 1) * sy];
            for j in 0..sy {
                hrow[j] += cx * mrow[j] * (e1[j] - e0[j]);
            }
        }
    }

    fn update_e(&mut self, dt: f64, sources: &[(f64, &FieldSet)]) {
        let (nx, ny) = (self.nx, self.ny);
        let (rdx, rdy) = (1.0 / self.dx, 1.0 / self.dy);
        self.s.begin_e_update();
        let s = &mut self.s;
        let sy = ny + 1;
        let hx = &s.h[HX];
        let hy = &s.h[HY];
        let ie = &s.inv_eps[EZ];
        let ez = &mut s.e[EZ];
        for i in 1..nx {
            for j in 1..ny {
                let o = i * sy + j;
                let mut curl = (hy[o] - hy[o - sy]) * rdx - (hx[i * ny + j] - hx[i * ny + j - 1]) * rdy;
                for (a, f) in sources {
                    curl -= a * f.components[EZ][o];
                }
                ez[o] += dt * ie[o] * curl;
            }
        }
        s.finish_e_update(dt);
    }

    fn curl_h(&self) -> FieldSet {
        let (nx, ny) = (self.nx, self.ny);
        let (rdx, rdy) = (1.0 / self.dx, 1.0 / self.dy);
        let s = &self.s;
        let sy = ny + 1;
        let hx = &s.h[HX];
        let hy = &s.h[HY];
        let mut out = vec![0.0; (nx + 1) * sy];
        for i in 1..nx {
            for j in 1..ny {
                let o = i * sy + j;
                if s.mask[EZ][o] {
                    continue;
                }
                out[o] = s.inv_eps[EZ][o]
                    * ((hy[o] - hy[o - sy]) * rdx - (hx[i * ny + j] - hx[i * ny + j - 1]) * rdy);
            }
        }
        FieldSet {
            components: vec![out],
        }
    }

    fn curl_e(&self) -> FieldSet {
        let (nx, ny) = (self.nx, self.ny);
        let (rdx, rdy) = (1.0 / self.dx, 1.0 / self.dy);
        let s = &self.s;
        let sy = ny + 1;
        let ez = &s.e[EZ];
        let mut hx = vec![0.0; (nx + 1) * ny];
        let mut hy = vec![0.0; nx * sy];
        for i in 0..=nx {
            for j in 0..ny {
                hx[i * ny + j] = -s.inv_mu[HX][i * ny + j] * (ez[i * sy + j + 1] - ez[i * sy + j]) * rdy;
            }
        }
        for i in 0..nx {
            for j in 0..sy {
                let o = i * sy + j;
                hy[o] = s.inv_mu[HY][o] * (ez[o + sy] - ez[o]) * rdx;
            }
        }
        FieldSet {
            components: vec![hx, hy],
        }
    }
}
