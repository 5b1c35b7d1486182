use emwaveholtz::grid::{Grid2D, YeeGrid};
use emwaveholtz::{Error, Result};

/// `S = sqrt(int_strip Ez^2 dx dy)` by the midpoint rule over the cells whose
/// centre lies in the strip; cell-centre values average the four corner nodes.
pub fn waveguide_metric(grid: &Grid2D, ez: &[f64], lower: [f64; 2], upper: [f64; 2]) -> Result<f64> {
    let d = grid.domain();
    if ez.len() != (grid.nx() + 1) * (grid.ny() + 1) {
        return Err(Error::Contract("Ez does not match the grid".into()));
    }
    let tol = 1e-12 * (d.extent(0) + d.extent(1));
    for a in 0..2 {
        if lower[a] >= upper[a] || lower[a] < d.lower[a] - tol || upper[a] > d.upper[a] + tol {
            return Err(Error::Config(format!(
                "strip [{:?}, {:?}] is not a nonempty rectangle inside the domain",
                lower, upper
            )));
        }
    }
    let (dx, dy) = (grid.dx(), grid.dy());
    let mut sum = 0.0;
    for i in 0..grid.nx() {
        let xc = d.lower[0] + (i as f64 + 0.5) * dx;
        if xc < lower[0] || xc > upper[0] {
            continue;
        }
        for j in 0..grid.ny() {
            let yc = d.lower[1] + (j as f64 + 0.5) * dy;
            if yc < lower[1] || yc > upper[1] {
                continue;
            }
            let v = 0.25
                * (ez[grid.node(i, j)] + ez[grid.node(i + 1, j)] + ez[grid.node(i, j + 1)] + ez[grid.node(i + 1, j + 1)]);
            sum += v * v;
        }
    }
    Ok((sum * dx * dy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use emwaveholtz::grid::Domain;

    fn grid() -> Grid2D {
        Grid2D::pec_vacuum(Domain::square(-1.0, 1.0, 20).unwrap()).unwrap()
    }

    #[test]
    fn zero_field_gives_zero() {
        let g = grid();
        let ez = vec![0.0; g.ez().len()];
        assert_eq!(waveguide_metric(&g, &ez, [-0.5, -0.2], [0.5, 0.2]).unwrap(), 0.0);
    }

    #[test]
    fn unit_field_gives_root_area() {
        let g = grid();
        let ez = vec![1.0; g.ez().len()];
        let s = waveguide_metric(&g, &ez, [-0.5, -0.2], [0.5, 0.2]).unwrap();
        assert!((s - 0.4f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn strip_outside_is_rejected() {
        let g = grid();
        let ez = vec![1.0; g.ez().len()];
        assert!(waveguide_metric(&g, &ez, [0.5, 0.0], [1.5, 0.2]).is_err());
    }
}
