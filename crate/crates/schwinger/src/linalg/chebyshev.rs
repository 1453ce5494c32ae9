use super::{axpy, dot, norm, scale, LinearOperator};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};

#[derive(Clone, Debug)]
pub struct FilterOptions {
    /// Lower edge of the unwanted part of the spectrum.
    pub cut: f64,
    /// Upper bound on the spectrum.
    pub upper: f64,
    pub degree: usize,
    pub tol: f64,
    pub max_cycles: usize,
}

fn orthonormalize(block: &mut [Vec<f64>]) {
    for i in 0..block.len() {
        for _ in 0..2 {
            for j in 0..i {
                let (done, rest) = block.split_at_mut(i);
                let c = dot(&done[j], &rest[0]);
                axpy(-c, &done[j], &mut rest[0]);
            }
        }
        let n = norm(&block[i]);
        scale(&mut block[i], 1.0 / n);
    }
}

fn filter<Op: LinearOperator<f64>>(op: &Op, x: &mut Vec<f64>, opts: &FilterOptions) {
    let e = 0.5 * (opts.upper - opts.cut);
    let c = 0.5 * (opts.upper + opts.cut);
    let n = x.len();
    let mut hx = vec![0.0; n];
    let step = |v: &[f64], hv: &mut Vec<f64>| {
        op.apply(v, hv);
        for (h, &vi) in hv.iter_mut().zip(v) {
            *h = (*h - c * vi) / e;
        }
    };
    let mut prev = x.clone();
    step(&prev, &mut hx);
    let mut cur = hx.clone();
    for _ in 1..opts.degree {
        step(&cur, &mut hx);
        for i in 0..n {
            let next = 2.0 * hx[i] - prev[i];
            prev[i] = cur[i];
            cur[i] = next;
        }
        let s = norm(&cur);
        if s > 1e100 {
            scale(&mut cur, 1.0 / s);
            scale(&mut prev, 1.0 / s);
        }
    }
    *x = cur;
}

/// Lowest `k` eigenpairs of a real symmetric operator by Chebyshev-filtered
/// subspace iteration from the given starting block (at least `k` vectors).
/// Eigenvalues inside `[cut, upper]` are damped; the wanted ones must lie below `cut`.
pub fn chebyshev_lowest<Op: LinearOperator<f64>>(
    op: &Op,
    mut block: Vec<Vec<f64>>,
    k: usize,
    opts: &FilterOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let m = block.len();
    if k == 0 || m < k {
        return Err(Error::Validation(format!("block of {m} vectors cannot resolve {k} levels")));
    }
    let n = op.dim();
    let mut worst = f64::INFINITY;
    for _ in 0..opts.max_cycles {
        for v in block.iter_mut() {
            filter(op, v, opts);
        }
        orthonormalize(&mut block);
        let hv: Vec<Vec<f64>> = block
            .iter()
            .map(|v| {
                let mut y = vec![0.0; n];
                op.apply(v, &mut y);
                y
            })
            .collect();
        let proj = DMatrix::from_fn(m, m, |i, j| 0.5 * (dot(&block[i], &hv[j]) + dot(&block[j], &hv[i])));
        let eig = SymmetricEigen::new(proj);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let mut values = Vec::with_capacity(m);
        let mut vectors = Vec::with_capacity(m);
        let mut hvectors = Vec::with_capacity(m);
        for &c in &order {
            let mut v = vec![0.0; n];
            let mut w = vec![0.0; n];
            for i in 0..m {
                let coef = eig.eigenvectors[(i, c)];
                axpy(coef, &block[i], &mut v);
                axpy(coef, &hv[i], &mut w);
            }
            values.push(eig.eigenvalues[c]);
            vectors.push(v);
            hvectors.push(w);
        }
        worst = 0.0;
        for i in 0..k {
            let mut r = hvectors[i].clone();
            axpy(-values[i], &vectors[i], &mut r);
            worst = f64::max(worst, norm(&r) / values[i].abs().max(1.0));
        }
        block = vectors;
        if worst < opts.tol {
            block.truncate(k);
            values.truncate(k);
            return Ok((values, block));
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_cycles, residual: worst })
}
