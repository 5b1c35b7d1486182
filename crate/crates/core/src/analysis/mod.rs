//! Verification tools: dense assembly of `I - S`, spectra, discrete cavity
//! eigenpairs, contraction-rate checks and refinement studies.

mod cavity;
mod convergence;
pub mod scenarios;

pub use cavity::{
    cavity_spectrum, discrete_wave_vector, mode_field, contraction_check, CavityMode, CavitySpectrum,
    ContractionReport,
};
pub use convergence::{convergence_study, fit_order, ConvergenceRow, ConvergenceTable};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::waveholtz::{DenseMatrix, LinearOperator};

/// Largest dimension accepted by [`assemble_dense`].
pub const DENSE_GUARD: usize = 20_000;

/// Column-by-column assembly of a matrix-free operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub matrix: DenseMatrix,
    /// Caller-supplied description of the configuration, e.g. a config hash.
    pub provenance: String,
}

/// Columns `A e_j`, computed in parallel.
pub fn assemble_dense<A: LinearOperator + ?Sized>(op: &A, provenance: &str) -> Result<DenseOperator> {
    let n = op.dim();
    if n > DENSE_GUARD {
        return Err(Error::SizeGuard { dim: n, limit: DENSE_GUARD });
    }
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            op.apply(&e)
        })
        .collect::<Result<_>>()?;
    let mut data = vec![0.0; n * n];
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            data[i * n + j] = *v;
        }
    }
    Ok(DenseOperator {
        matrix: DenseMatrix { n, data },
        provenance: provenance.to_string(),
    })
}

fn to_nalgebra(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.n, m.n, &m.data)
}

/// `max_i sum_j |a_ij|`.
pub fn inf_norm(m: &DenseMatrix) -> f64 {
    m.data
        .chunks(m.n.max(1))
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `||A - A^T||_inf`.
pub fn asymmetry(m: &DenseMatrix) -> f64 {
    let n = m.n;
    (0..n)
        .map(|i| (0..n).map(|j| (m.get(i, j) - m.get(j, i)).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// Real parts in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Imaginary parts matching `eigenvalues`; empty on the symmetric path.
    pub imaginary: Vec<f64>,
    pub min: f64,
    pub max: f64,
    /// `max / min` when every eigenvalue is real and positive, otherwise infinite.
    pub condition: f64,
    /// `||A - A^T||_inf / ||A||_inf`.
    pub symmetric_deviation: f64,
    pub symmetric: bool,
}

/// Relative asymmetry below which the symmetric eigensolver is used.
pub const SYMMETRIC_PATH: f64 = 1e-10;

pub fn spectrum_report(op: &DenseOperator) -> SpectrumReport {
    let m = &op.matrix;
    let norm = inf_norm(m);
    let dev = if norm > 0.0 { asymmetry(m) / norm } else { 0.0 };
    let a = to_nalgebra(m);
    let symmetric = dev <= SYMMETRIC_PATH;
    let (mut eig, imag): (Vec<f64>, Vec<f64>) = if symmetric {
        let sym = (&a + a.transpose()) * 0.5;
        (SymmetricEigen::new(sym).eigenvalues.iter().copied().collect(), Vec::new())
    } else {
        let mut pairs: Vec<(f64, f64)> = a.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        pairs.into_iter().unzip()
    };
    if symmetric {
        eig.sort_by(f64::total_cmp);
    }
    let min = eig.first().copied().unwrap_or(f64::NAN);
    let max = eig.last().copied().unwrap_or(f64::NAN);
    let all_real = imag.iter().all(|v| v.abs() < 1e-12);
    let condition = if min > 0.0 && all_real { max / min } else { f64::INFINITY };
    SpectrumReport {
        eigenvalues: eig,
        imaginary: imag,
        min,
        max,
        condition,
        symmetric_deviation: dev,
        symmetric,
    }
}

/// Dense LU solve `A x = b`.
pub fn dense_solve(m: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let a = to_nalgebra(m);
    a.lu()
        .solve(&DVector::from_column_slice(b))
        .map(|x| x.iter().copied().collect())
        .ok_or_else(|| Error::Domain("dense operator is singular".into()))
}

/// Largest entrywise gap between two ascending multisets of equal size.
pub fn multiset_gap(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    Some(x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_spectrum() {
        let op = assemble_dense(&DenseMatrix::identity(6), "id").unwrap();
        assert_eq!(op.matrix, DenseMatrix::identity(6));
        let r = spectrum_report(&op);
        assert!(r.symmetric);
        assert!(r.eigenvalues.iter().all(|v| (v - 1.0).abs() < 1e-14));
        assert!((r.condition - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nonsymmetric_path_reports_complex_pair() {
        let m = DenseMatrix { n: 2, data: vec![1.0, -2.0, 2.0, 1.0] };
        let r = spectrum_report(&DenseOperator { matrix: m, provenance: String::new() });
        assert!(!r.symmetric);
        assert!(r.imaginary.iter().any(|v| (v.abs() - 2.0).abs() < 1e-12));
        assert!(r.condition.is_infinite());
    }

    #[test]
    fn guard_rejects_huge_operators() {
        struct Big;
        impl LinearOperator for Big {
            fn dim(&self) -> usize {
                DENSE_GUARD + 1
            }
            fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
                Ok(x.to_vec())
            }
        }
        assert!(matches!(assemble_dense(&Big, ""), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn lu_solves_small_system() {
        let m = DenseMatrix { n: 2, data: vec![2.0, 1.0, 1.0, 3.0] };
        let x = dense_solve(&m, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
    }
}
