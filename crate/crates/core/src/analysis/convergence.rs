use crate::error::{Error, Result};

/// Least-squares slope of `log(err)` against `log(h)`.
pub fn fit_order(h: &[f64], err: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(err)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub h: f64,
    /// Max-norm error per frequency.
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub frequencies: Vec<f64>,
    pub rows: Vec<ConvergenceRow>,
    /// Fitted order per frequency over the finest three resolutions.
    pub orders: Vec<f64>,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("cells,h");
        for w in &self.frequencies {
            s.push_str(&format!(",err_{w}"));
        }
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!("{},{:.6e}", r.cells, r.h));
            for e in &r.errors {
                s.push_str(&format!(",{e:.6e}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Runs `errors_at(cells)` for each resolution (cells per direction on a
/// domain of unit extent scaled by `extent`) and fits orders.
pub fn convergence_study(
    frequencies: &[f64],
    resolutions: &[usize],
    extent: f64,
    mut errors_at: impl FnMut(usize) -> Result<Vec<f64>>,
) -> Result<ConvergenceTable> {
    if resolutions.len() < 2 {
        return Err(Error::Config("a refinement study needs at least two resolutions".into()));
    }
    let mut res = resolutions.to_vec();
    res.sort_unstable();
    let mut rows = Vec::with_capacity(res.len());
    for &n in &res {
        let errors = errors_at(n)?;
        if errors.len() != frequencies.len() {
            return Err(Error::Contract("one error per frequency expected".into()));
        }
        rows.push(ConvergenceRow {
            cells: n,
            h: extent / n as f64,
            errors,
        });
    }
    let tail = &rows[rows.len().saturating_sub(3)..];
    let h: Vec<f64> = tail.iter().map(|r| r.h).collect();
    let orders = (0..frequencies.len())
        .map(|k| {
            let e: Vec<f64> = tail.iter().map(|r| r.errors[k]).collect();
            fit_order(&h, &e)
        })
        .collect();
    Ok(ConvergenceTable {
        frequencies: frequencies.to_vec(),
        rows,
        orders,
    })
}
