use crate::error::{invalid, Error, Result};
use crate::linalg::{axpy, dot, norm, tridiagonal_eigh, LinearOperator};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSpec {
    pub t_final: f64,
    /// Output stride.
    pub dt: f64,
    #[serde(default = "default_dim")]
    pub krylov_dim: usize,
    /// Local error accepted per step.
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_dim() -> usize {
    30
}
fn default_tol() -> f64 {
    1e-9
}

impl EvolutionSpec {
    pub fn new(t_final: f64, dt: f64) -> Self {
        EvolutionSpec { t_final, dt, krylov_dim: 30, tol: 1e-9 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0 && self.dt > 0.0 && self.tol > 0.0) || self.krylov_dim < 2 {
            return invalid("need t_final > 0, dt > 0, tol > 0 and Krylov dimension >= 2");
        }
        Ok(())
    }

    /// Output times `0, dt, 2 dt, ..., t_final`.
    pub fn times(&self) -> Vec<f64> {
        let n = (self.t_final / self.dt - 1e-9).ceil() as usize;
        let mut t: Vec<f64> = (0..n).map(|k| k as f64 * self.dt).collect();
        t.push(self.t_final);
        t
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct KrylovStats {
    pub steps: usize,
    pub rejected: usize,
    pub max_error: f64,
}

/// Lanczos basis of `psi` under `op`, at most `m` vectors.
struct KrylovSpace {
    vectors: Vec<Vec<Complex64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// Residual coupling `beta_m` out of the space; zero on breakdown.
    residual: f64,
}

fn build_space<Op: LinearOperator<Complex64>>(op: &Op, psi: &[Complex64], m: usize, scale: f64) -> KrylovSpace {
    let n = psi.len();
    let m = m.min(n);
    let nrm = norm(psi);
    let mut vectors = vec![psi.iter().map(|z| z / nrm).collect::<Vec<_>>()];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    loop {
        let j = vectors.len() - 1;
        op.apply(&vectors[j], &mut w);
        let a = dot(&vectors[j], &w).re;
        alpha.push(a);
        for _ in 0..2 {
            for v in &vectors {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
            }
        }
        let b = norm(&w);
        if b < 1e-12 * scale.max(1.0) {
            return KrylovSpace { vectors, alpha, beta, residual: 0.0 };
        }
        if vectors.len() == m {
            return KrylovSpace { vectors, alpha, beta, residual: b };
        }
        beta.push(b);
        vectors.push(w.iter().map(|z| z / b).collect());
    }
}

impl KrylovSpace {
    /// Coefficients of `exp(-i tau T) e_1` and the a-posteriori error estimate.
    fn propagate(&self, eig: &(Vec<f64>, DMatrix<f64>), tau: f64) -> (Vec<Complex64>, f64) {
        let (vals, vecs) = eig;
        let k = vals.len();
        let y: Vec<Complex64> = (0..k)
            .map(|i| {
                (0..k).fold(Complex64::new(0.0, 0.0), |acc, j| {
                    acc + Complex64::from_polar(1.0, -tau * vals[j]) * (vecs[(i, j)] * vecs[(0, j)])
                })
            })
            .collect();
        let err = self.residual * y[k - 1].norm();
        (y, err)
    }
}

/// Advances `psi` by `t` with adaptive substeps; returns the substep statistics.
pub fn krylov_advance<Op: LinearOperator<Complex64>>(
    op: &Op,
    psi: &mut Vec<Complex64>,
    t: f64,
    spec: &EvolutionSpec,
    scale: f64,
    stats: &mut KrylovStats,
) -> Result<()> {
    let mut remaining = t;
    while remaining.abs() > 1e-15 * t.abs().max(1.0) {
        let nrm = norm(psi);
        let space = build_space(op, psi, spec.krylov_dim, scale);
        let eig = tridiagonal_eigh(&space.alpha, &space.beta);
        let mut tau = remaining;
        let mut halvings = 0;
        let (y, err) = loop {
            let (y, err) = space.propagate(&eig, tau);
            if err <= spec.tol {
                break (y, err);
            }
            tau *= 0.5;
            halvings += 1;
            stats.rejected += 1;
            if halvings > 60 {
                return Err(Error::NoConvergence { iterations: halvings, residual: err });
            }
        };
        let mut next = vec![Complex64::new(0.0, 0.0); psi.len()];
        for (c, v) in y.iter().zip(&space.vectors) {
            axpy(*c * nrm, v, &mut next);
        }
        *psi = next;
        stats.steps += 1;
        stats.max_error = stats.max_error.max(err);
        remaining -= tau;
    }
    Ok(())
}

/// Evolves `state` and calls `observe(t, psi)` at every output time.
pub fn krylov_evolve<Op: LinearOperator<Complex64>>(
    op: &Op,
    state: &[Complex64],
    spec: &EvolutionSpec,
    scale: f64,
    mut observe: impl FnMut(f64, &[Complex64]) -> Result<()>,
) -> Result<KrylovStats> {
    spec.validate()?;
    if state.len() != op.dim() {
        return invalid("state length does not match the Hamiltonian");
    }
    if (norm(state) - 1.0).abs() > 1e-10 {
        return invalid("initial state must be normalized");
    }
    let mut psi = state.to_vec();
    let mut stats = KrylovStats::default();
    let times = spec.times();
    observe(0.0, &psi)?;
    for w in times.windows(2) {
        krylov_advance(op, &mut psi, w[1] - w[0], spec, scale, &mut stats)?;
        observe(w[1], &psi)?;
    }
    Ok(stats)
}

/// `exp(-i H t) psi` through a dense eigendecomposition (small oracle).
pub fn dense_evolve(h: &DMatrix<Complex64>, psi: &[Complex64], t: f64) -> Vec<Complex64> {
    let (vals, vecs) = crate::linalg::dense_eigh(h.clone());
    let n = psi.len();
    let coef: Vec<Complex64> = (0..n)
        .map(|k| (0..n).fold(Complex64::new(0.0, 0.0), |acc, i| acc + vecs[(i, k)].conj() * psi[i]))
        .collect();
    (0..n)
        .map(|i| {
            (0..n).fold(Complex64::new(0.0, 0.0), |acc, k| {
                acc + vecs[(i, k)] * coef[k] * Complex64::from_polar(1.0, -vals[k] * t)
            })
        })
        .collect()
}
