use std::time::Instant;

use crate::error::{Error, Result};

/// Square linear map applied matrix-free.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
    /// Number of expensive evaluations so far (wave solves for WaveHoltz).
    fn work(&self) -> usize {
        0
    }
}

/// Row-major dense matrix as an operator; used by tests and the analysis tools.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::Contract(format!(
                "vector of length {} applied to a {}x{} matrix",
                x.len(),
                self.n,
                self.n
            )));
        }
        Ok(self
            .data
            .chunks(self.n)
            .map(|row| dot(row, x))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualEntry {
    pub iteration: usize,
    pub relative_residual: f64,
    pub wave_solves: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrylovOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<ResidualEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrylovOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// GMRES restart length; `None` runs unrestarted.
    pub restart: Option<usize>,
    /// Diagonal weights of the CG inner product; Euclidean when `None`.
    pub weights: Option<Vec<f64>>,
}

impl KrylovOptions {
    pub fn new(tol: f64, max_iters: usize) -> Self {
        Self {
            tol,
            max_iters,
            restart: None,
            weights: None,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (p, q) in y.iter_mut().zip(x) {
        *p += a * q;
    }
}

fn residual<A: LinearOperator + ?Sized>(op: &A, b: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let ax = op.apply(x)?;
    Ok(b.iter().zip(&ax).map(|(p, q)| p - q).collect())
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}

/// Back substitution on the leading `k x k` block of the rotated Hessenberg matrix.
fn solve_upper(h: &[Vec<f64>], g: &[f64], k: usize) -> Vec<f64> {
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in i + 1..k {
            s -= h[j][i] * y[j];
        }
        y[i] = s / h[i][i];
    }
    y
}

/// GMRES with modified Gram-Schmidt, one conditional re-orthogonalisation
/// pass and Givens rotations. The iteration count is the number of Arnoldi steps.
pub fn gmres<A: LinearOperator + ?Sized>(
    op: &A,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: &KrylovOptions,
) -> Result<KrylovOutcome> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::Contract("right-hand side length differs from operator dimension".into()));
    }
    let start = Instant::now();
    let bnorm = norm(b);
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut history = Vec::new();
    let record = |history: &mut Vec<ResidualEntry>, it: usize, rel: f64| {
        history.push(ResidualEntry {
            iteration: it,
            relative_residual: rel,
            wave_solves: op.work(),
            seconds: start.elapsed().as_secs_f64(),
        });
    };
    if bnorm == 0.0 {
        record(&mut history, 0, 0.0);
        return Ok(KrylovOutcome {
            x: vec![0.0; n],
            iterations: 0,
            converged: true,
            history,
        });
    }
    let mut r = if x0.is_some() { residual(op, b, &x)? } else { b.to_vec() };
    let mut beta = norm(&r);
    record(&mut history, 0, beta / bnorm);
    if beta / bnorm <= opts.tol {
        return Ok(KrylovOutcome { x, iterations: 0, converged: true, history });
    }

    let cycle = opts.restart.unwrap_or(opts.max_iters).max(1);
    let mut total = 0;
    while total < opts.max_iters {
        let m = cycle.min(opts.max_iters - total);
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|q| q / beta).collect());
        // h[j] is column j of the Hessenberg matrix, length j + 2.
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs: Vec<(f64, f64)> = Vec::with_capacity(m);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;
        let mut done = false;
        for j in 0..m {
            let mut w = op.apply(&v[j])?;
            let mut col = vec![0.0; j + 2];
            for (i, vi) in v.iter().enumerate() {
                let hij = dot(&w, vi);
                col[i] = hij;
                axpy(&mut w, -hij, vi);
            }
            let wn = norm(&w);
            let second: Vec<f64> = v.iter().map(|vi| dot(&w, vi)).collect();
            if second.iter().any(|d| d.abs() > 1e-8 * wn) {
                for (i, vi) in v.iter().enumerate() {
                    axpy(&mut w, -second[i], vi);
                    col[i] += second[i];
                }
            }
            let hnext = norm(&w);
            col[j + 1] = hnext;
            for (i, &(c, s)) in cs.iter().enumerate() {
                let (a, bb) = (col[i], col[i + 1]);
                col[i] = c * a + s * bb;
                col[i + 1] = -s * a + c * bb;
            }
            let (c, s) = givens(col[j], col[j + 1]);
            col[j] = c * col[j] + s * col[j + 1];
            col[j + 1] = 0.0;
            g[j + 1] = -s * g[j];
            g[j] *= c;
            cs.push((c, s));
            h.push(col);
            k = j + 1;
            total += 1;
            let rel = g[j + 1].abs() / bnorm;
            record(&mut history, total, rel);
            let lucky = hnext <= 1e-14 * bnorm;
            if rel <= opts.tol || lucky {
                done = true;
                break;
            }
            v.push(w.iter().map(|q| q / hnext).collect());
        }
        let y = solve_upper(&h, &g, k);
        for (yi, vi) in y.iter().zip(&v) {
            axpy(&mut x, *yi, vi);
        }
        if done {
            return Ok(KrylovOutcome { x, iterations: total, converged: true, history });
        }
        if total < opts.max_iters {
            r = residual(op, b, &x)?;
            beta = norm(&r);
            if beta / bnorm <= opts.tol {
                return Ok(KrylovOutcome { x, iterations: total, converged: true, history });
            }
        }
    }
    let converged = history.last().is_some_and(|e| e.relative_residual <= opts.tol);
    Ok(KrylovOutcome { x, iterations: total, converged, history })
}

/// Conjugate gradients, optionally in the inner product weighted by `opts.weights`.
/// The reported residual is Euclidean.
pub fn cg<A: LinearOperator + ?Sized>(op: &A, b: &[f64], opts: &KrylovOptions) -> Result<KrylovOutcome> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::Contract("right-hand side length differs from operator dimension".into()));
    }
    let wdot = |a: &[f64], c: &[f64]| -> f64 {
        match &opts.weights {
            Some(w) => a.iter().zip(c).zip(w).map(|((x, y), z)| x * y * z).sum(),
            None => dot(a, c),
        }
    };
    let start = Instant::now();
    let bnorm = norm(b);
    let mut history = Vec::new();
    let record = |history: &mut Vec<ResidualEntry>, it: usize, rel: f64| {
        history.push(ResidualEntry {
            iteration: it,
            relative_residual: rel,
            wave_solves: op.work(),
            seconds: start.elapsed().as_secs_f64(),
        });
    };
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        record(&mut history, 0, 0.0);
        return Ok(KrylovOutcome { x, iterations: 0, converged: true, history });
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = wdot(&r, &r);
    record(&mut history, 0, 1.0);
    for it in 1..=opts.max_iters {
        let ap = op.apply(&p)?;
        let curv = wdot(&p, &ap);
        if !(curv > 0.0) {
            return Err(Error::NotPositiveDefinite {
                iteration: it,
                curvature: curv,
                hint: "CG needs a closed PEC domain with sine forcing and the plain trapezoid filter; \
                       use GMRES otherwise"
                    .into(),
            });
        }
        let alpha = rr / curv;
        axpy(&mut x, alpha, &p);
        axpy(&mut r, -alpha, &ap);
        let rel = norm(&r) / bnorm;
        record(&mut history, it, rel);
        if rel <= opts.tol {
            return Ok(KrylovOutcome { x, iterations: it, converged: true, history });
        }
        let rr_new = wdot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    Ok(KrylovOutcome { x, iterations: opts.max_iters, converged: false, history })
}
