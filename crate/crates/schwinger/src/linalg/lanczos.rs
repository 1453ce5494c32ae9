use super::{axpy, dot, norm, scale, tridiagonal_eigh, Csr};
use super::{LinearOperator, Scalar};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StartVector {
    /// Normalized all-ones vector.
    Uniform,
    /// Deterministic pseudo-random vector from the given seed.
    Seeded(u64),
}

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Residual norm ||Hx - ex|| accepted per eigenpair.
    pub tol: f64,
    /// Krylov basis size before an explicit restart.
    pub basis: usize,
    pub max_restarts: usize,
    pub start: StartVector,
    /// Dimensions up to this size go through dense diagonalization.
    pub dense_max: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            tol: 1e-10,
            basis: 80,
            max_restarts: 400,
            start: StartVector::Uniform,
            dense_max: 512,
        }
    }
}

fn start_vector<T: Scalar>(n: usize, start: StartVector) -> Vec<T> {
    match start {
        StartVector::Uniform => vec![T::from_re(1.0); n],
        StartVector::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| T::from_re(rng.gen_range(-1.0..1.0))).collect()
        }
    }
}

fn orthogonalize<T: Scalar>(v: &mut [T], against: &[Vec<T>]) {
    // two passes keep the basis orthogonal to working precision
    for _ in 0..2 {
        for u in against {
            let c = dot(u, v);
            axpy(-c, u, v);
        }
    }
}

/// Lowest `k` eigenpairs of a Hermitian operator, ascending.
///
/// Explicitly restarted Lanczos with full reorthogonalization; converged
/// vectors are locked and deflated so memory stays at `basis + k` vectors.
pub fn lanczos_lowest<T, Op>(op: &Op, k: usize, opts: &LanczosOptions) -> Result<(Vec<f64>, Vec<Vec<T>>)>
where
    T: Scalar,
    Op: LinearOperator<T>,
{
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::Validation(format!("requested {k} eigenpairs of a {n}-dimensional operator")));
    }
    if n <= opts.dense_max {
        return dense_lowest(op, k);
    }
    let mut locked: Vec<Vec<T>> = Vec::with_capacity(k);
    let mut values: Vec<f64> = Vec::with_capacity(k);
    let mut v: Vec<T> = start_vector(n, opts.start);
    let mut hv = vec![T::zero(); n];
    let mut residual = f64::INFINITY;
    let mut fresh = 0u64;
    for _ in 0..opts.max_restarts {
        orthogonalize(&mut v, &locked);
        let nv = norm(&v);
        if nv < 1e-10 {
            fresh += 1;
            v = start_vector(n, StartVector::Seeded(1000 + fresh));
            continue;
        }
        scale(&mut v, 1.0 / nv);
        let m_max = opts.basis.max(2 * k + 10).min(n - locked.len());
        let mut basis: Vec<Vec<T>> = vec![v];
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        let tail;
        loop {
            let j = basis.len() - 1;
            op.apply(&basis[j], &mut hv);
            let mut w = hv.clone();
            let a = dot(&basis[j], &w).re();
            alpha.push(a);
            orthogonalize(&mut w, &locked);
            orthogonalize(&mut w, &basis);
            let b = norm(&w);
            if b < 1e-12 * a.abs().max(1.0) {
                tail = 0.0;
                break;
            }
            if basis.len() == m_max {
                tail = b;
                break;
            }
            scale(&mut w, 1.0 / b);
            beta.push(b);
            basis.push(w);
        }
        let (theta, s) = tridiagonal_eigh(&alpha, &beta);
        let m = alpha.len();
        let ritz = |c: usize| {
            let mut x = vec![T::zero(); n];
            for (j, b) in basis.iter().enumerate() {
                axpy(T::from_re(s[(j, c)]), b, &mut x);
            }
            let nx = norm(&x);
            scale(&mut x, 1.0 / nx);
            x
        };
        let want = (k - locked.len()).min(m);
        let mut pending: Vec<Vec<T>> = Vec::new();
        // lock converged pairs in ascending order; the first miss stops locking
        let mut locking = true;
        for c in 0..want {
            let estimate = tail * s[(m - 1, c)].abs();
            if locking && estimate < opts.tol {
                let x = ritz(c);
                op.apply(&x, &mut hv);
                axpy(T::from_re(-theta[c]), &x, &mut hv);
                let r = norm(&hv);
                if r < opts.tol {
                    values.push(theta[c]);
                    locked.push(x);
                    continue;
                }
                residual = r;
            } else if locking {
                residual = estimate;
            }
            locking = false;
            pending.push(ritz(c));
        }
        if locked.len() == k {
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let vals = order.iter().map(|&i| values[i]).collect();
            let vecs = order.iter().map(|&i| locked[i].clone()).collect();
            return Ok((vals, vecs));
        }
        v = vec![T::zero(); n];
        for p in &pending {
            axpy(T::from_re(1.0), p, &mut v);
        }
        if pending.is_empty() {
            fresh += 1;
            v = start_vector(n, StartVector::Seeded(2000 + fresh));
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_restarts * opts.basis,
        residual,
    })
}

fn dense_lowest<T: Scalar, Op: LinearOperator<T>>(op: &Op, k: usize) -> Result<(Vec<f64>, Vec<Vec<T>>)> {
    let n = op.dim();
    let mut rows = vec![Vec::new(); n];
    let mut e = vec![T::zero(); n];
    let mut col = vec![T::zero(); n];
    for j in 0..n {
        e[j] = T::from_re(1.0);
        op.apply(&e, &mut col);
        e[j] = T::zero();
        for (i, &v) in col.iter().enumerate() {
            if v.abs2() > 0.0 {
                rows[i].push((j, v));
            }
        }
    }
    let (vals, vecs) = T::dense_eigen(&Csr::from_rows(rows));
    Ok((vals[..k].to_vec(), vecs.into_iter().take(k).collect()))
}

fn project_out<T: Scalar>(v: &mut [T], against: &[Vec<T>]) {
    for u in against {
        let c = dot(u, v);
        axpy(-c, u, v);
    }
}

/// One Lanczos recurrence without stored basis. `visit(j, v_j, alpha, beta, b)`
/// sees every basis vector with the coefficients so far and the next `beta`;
/// identical inputs replay identical vectors.
fn recurrence<T: Scalar, Op: LinearOperator<T>>(
    op: &Op,
    start: &[T],
    deflate: &[Vec<T>],
    steps: usize,
    mut visit: impl FnMut(usize, &[T], &[f64], &[f64], f64) -> bool,
) -> (Vec<f64>, Vec<f64>) {
    let n = start.len();
    let mut prev = vec![T::zero(); n];
    let mut v = start.to_vec();
    let mut w = vec![T::zero(); n];
    let (mut alpha, mut beta): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    for j in 0..steps {
        op.apply(&v, &mut w);
        project_out(&mut w, deflate);
        let a = dot(&v, &w).re();
        alpha.push(a);
        axpy(T::from_re(-a), &v, &mut w);
        if let Some(&b) = beta.last() {
            axpy(T::from_re(-b), &prev, &mut w);
        }
        let b = norm(&w);
        if visit(j, &v, &alpha, &beta, b) || b < 1e-12 * a.abs().max(1.0) {
            break;
        }
        beta.push(b);
        scale(&mut w, 1.0 / b);
        std::mem::swap(&mut prev, &mut v);
        std::mem::swap(&mut v, &mut w);
    }
    beta.truncate(alpha.len() - 1);
    (alpha, beta)
}

/// Lowest eigenpair of `op` restricted to the complement of `deflate`
/// (orthonormal vectors), using O(n) memory: the three-term recurrence runs
/// twice, the second pass assembling the Ritz vector. Converged when
/// `||H x - e x|| < tol`.
pub fn lanczos_lowest_light<T, Op>(op: &Op, deflate: &[Vec<T>], tol: f64, max_steps: usize) -> Result<(f64, Vec<T>)>
where
    T: Scalar,
    Op: LinearOperator<T>,
{
    let n = op.dim();
    if deflate.len() >= n {
        return Err(Error::Validation("nothing left after deflation".into()));
    }
    let mut x: Vec<T> = start_vector(n, StartVector::Uniform);
    let mut residual = f64::INFINITY;
    let mut hx = vec![T::zero(); n];
    for restart in 0..20u64 {
        project_out(&mut x, deflate);
        project_out(&mut x, deflate);
        let nx = norm(&x);
        if nx < 1e-10 {
            x = start_vector(n, StartVector::Seeded(3000 + restart));
            continue;
        }
        scale(&mut x, 1.0 / nx);
        let (alpha, beta) = recurrence(op, &x, deflate, max_steps, |j, _, a, b, next| {
            if j < 10 || j % 10 != 0 {
                return false;
            }
            let (_, s) = tridiagonal_eigh(a, b);
            next * s[(j, 0)].abs() < 0.1 * tol
        });
        let (_, s) = tridiagonal_eigh(&alpha, &beta);
        let mut y = vec![T::zero(); n];
        recurrence(op, &x, deflate, alpha.len(), |j, v, _, _, _| {
            axpy(T::from_re(s[(j, 0)]), v, &mut y);
            false
        });
        project_out(&mut y, deflate);
        let ny = norm(&y);
        scale(&mut y, 1.0 / ny);
        op.apply(&y, &mut hx);
        let e = dot(&y, &hx).re();
        axpy(T::from_re(-e), &y, &mut hx);
        project_out(&mut hx, deflate);
        residual = norm(&hx);
        if residual < tol {
            return Ok((e, y));
        }
        x = y;
    }
    Err(Error::NoConvergence { iterations: 20 * max_steps, residual })
}
