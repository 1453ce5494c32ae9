use super::{Boundary, DiracParams};
use crate::error::{invalid, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Single-particle Hamiltonian in the real gauge: hopping `(-1)^j / (2a)` on
/// bond `(j-1, j)` and staggered diagonal `-m (-1)^j`.
pub fn real_hamiltonian(p: &DiracParams) -> DMatrix<f64> {
    let n = 2 * p.size;
    let g = 1.0 / (2.0 * p.a);
    let mut h = DMatrix::zeros(n, n);
    for j in 0..n {
        h[(j, j)] = if j % 2 == 0 { -p.m } else { p.m };
    }
    for j in 1..n {
        let t = if j % 2 == 0 { g } else { -g };
        h[(j - 1, j)] = t;
        h[(j, j - 1)] = t;
    }
    if p.boundary == Boundary::Periodic && n > 2 {
        h[(n - 1, 0)] = g;
        h[(0, n - 1)] = g;
    }
    h
}

/// Phases `phi_j` with `H_complex = D H_real D^dag`, `D = diag(phi)`.
pub fn gauge_phases(n: usize) -> Vec<Complex64> {
    let mut phi = vec![Complex64::new(1.0, 0.0); n];
    for j in 1..n {
        // -i g on (j-1, j) equals phi_{j-1} (-1)^j g conj(phi_j)
        let s = if j % 2 == 0 { 1.0 } else { -1.0 };
        phi[j] = phi[j - 1] * Complex64::new(0.0, s);
    }
    phi
}

#[derive(Clone, Debug)]
pub struct SingleParticle {
    /// Hamiltonian with hopping `-i/(2a)`.
    pub hamiltonian: DMatrix<Complex64>,
    pub energies: Vec<f64>,
}

pub fn dirac_single_particle(p: &DiracParams) -> Result<SingleParticle> {
    p.validate()?;
    let h = real_hamiltonian(p);
    let phi = gauge_phases(h.nrows());
    let hc = DMatrix::from_fn(h.nrows(), h.ncols(), |i, j| phi[i] * h[(i, j)] * phi[j].conj());
    let (energies, _) = sorted_eigen(h);
    Ok(SingleParticle { hamiltonian: hc, energies })
}

fn sorted_eigen(h: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = h.nrows();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// `<c_i^dag c_j>` in the real gauge.
#[derive(Clone, Debug)]
pub struct CorrelationMatrix {
    pub size: usize,
    pub temperature: f64,
    pub matrix: DMatrix<f64>,
    /// Number of zero modes given occupation 1/2.
    pub zero_modes: usize,
}

impl CorrelationMatrix {
    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
    /// `max |C^2 - C|`.
    pub fn projector_defect(&self) -> f64 {
        let c2 = &self.matrix * &self.matrix;
        (c2 - &self.matrix).amax()
    }
}

const ZERO_MODE: f64 = 1e-12;

pub fn correlation_matrix(p: &DiracParams) -> Result<CorrelationMatrix> {
    p.validate()?;
    let (energies, vecs) = sorted_eigen(real_hamiltonian(p));
    let mut zero_modes = 0;
    let occ: Vec<f64> = energies
        .iter()
        .map(|&e| {
            if p.temperature > 0.0 {
                0.5 * (1.0 - (0.5 * e / p.temperature).tanh())
            } else if e.abs() < ZERO_MODE {
                zero_modes += 1;
                0.5
            } else if e < 0.0 {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let n = energies.len();
    let scaled = DMatrix::from_fn(n, n, |i, k| vecs[(i, k)] * occ[k]);
    let matrix = scaled * vecs.transpose();
    Ok(CorrelationMatrix { size: p.size, temperature: p.temperature, matrix, zero_modes })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntanglementSpectrum {
    /// Eigenvalues of the left-block correlation matrix, ascending.
    pub p: Vec<f64>,
    pub beta: Vec<f64>,
    /// Decay rate from a regression of `log p_kappa` on `kappa`.
    pub rate: Option<f64>,
    /// `-log` of the envelope `max_kappa p_kappa^(1/kappa)`.
    pub envelope_rate: Option<f64>,
    /// Number of levels with `min(p, 1-p) > 1e-12` used in the fits.
    pub reliable: usize,
    pub degenerate: bool,
}

pub const RELIABLE_P: f64 = 1e-12;

impl EntanglementSpectrum {
    /// Probabilities `min(p, 1 - p)` in descending order, `kappa = 1, 2, ...`.
    pub fn minority(&self) -> Vec<f64> {
        let mut m: Vec<f64> = self.p.iter().map(|&x| x.min(1.0 - x)).collect();
        m.sort_by(|a, b| b.partial_cmp(a).unwrap());
        m.truncate(self.p.len() / 2);
        m
    }

    /// Largest deviation from the pairing `p_{n-1-k} = 1 - p_k`.
    pub fn pairing_defect(&self) -> f64 {
        let n = self.p.len();
        (0..n).map(|k| (self.p[n - 1 - k] - (1.0 - self.p[k])).abs()).fold(0.0, f64::max)
    }

    pub fn lambda(&self) -> Option<f64> {
        self.rate.map(|r| (-r).exp())
    }
    pub fn envelope_lambda(&self) -> Option<f64> {
        self.envelope_rate.map(|r| (-r).exp())
    }
}

pub fn entanglement_spectrum(c: &CorrelationMatrix, cut: usize) -> Result<EntanglementSpectrum> {
    if cut == 0 || cut >= c.matrix.nrows() {
        return invalid("cut must lie strictly inside the chain");
    }
    let block = c.matrix.view((0, 0), (cut, cut)).into_owned();
    let mut p: Vec<f64> = SymmetricEigen::new(block).eigenvalues.iter().map(|&x| x.clamp(1e-300, 1.0 - 1e-16)).collect();
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let beta = p.iter().map(|&x| ((1.0 - x) / x).ln()).collect();
    let mut es = EntanglementSpectrum { p, beta, rate: None, envelope_rate: None, reliable: 0, degenerate: false };
    let minority = es.minority();
    let reliable: Vec<f64> = minority.iter().copied().take_while(|&x| x > RELIABLE_P).collect();
    es.reliable = reliable.len();
    es.degenerate = minority.windows(2).any(|w| w[1] > RELIABLE_P && (w[0] - w[1]).abs() < 1e-14 * w[0]);
    if reliable.len() >= 2 {
        let xs: Vec<f64> = (1..=reliable.len()).map(|k| k as f64).collect();
        let ys: Vec<f64> = reliable.iter().map(|x| x.ln()).collect();
        es.rate = Some(-linear_fit(&xs, &ys).0);
    }
    if !reliable.is_empty() {
        let env = reliable
            .iter()
            .enumerate()
            .map(|(k, x)| x.ln() / (k + 1) as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        es.envelope_rate = Some(-env);
    }
    Ok(es)
}

/// Least squares `y = slope x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrelationLength {
    /// From the decay of `|C_{c, c+d}|` at the chain centre, `d` in 5..=25.
    pub fitted: f64,
    /// `1 / arcsinh(am)`.
    pub reference: f64,
}

pub fn correlation_length(c: &CorrelationMatrix, m_a: f64) -> Result<CorrelationLength> {
    let centre = c.size;
    let n = c.matrix.nrows();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for d in 5..=25usize {
        if centre + d >= n {
            break;
        }
        let v = c.matrix[(centre, centre + d)].abs();
        if v > 1e-13 {
            xs.push(d as f64);
            ys.push(v.ln());
        }
    }
    if xs.len() < 2 {
        return invalid("correlations decay too fast to fit a length");
    }
    let (slope, _) = linear_fit(&xs, &ys);
    Ok(CorrelationLength { fitted: -1.0 / slope, reference: 1.0 / m_a.asinh() })
}

/// Asymptotic rate `pi^2 / (2 log(xi/a))`; `None` when `xi/a <= 1`.
pub fn formula_rate(xi_over_a: f64) -> Option<f64> {
    (xi_over_a > 1.0).then(|| std::f64::consts::PI.powi(2) / (2.0 * xi_over_a.ln()))
}
