//! Staggered-fermion lattice Schwinger model in the Gauss-law sector.
//!
//! Sites `j = 0..2L`, bonds `k = 0..2L-1` with `fields[k]` the electric field
//! on the bond between sites `k` and `k+1`. Even sites are filled in the bare
//! vacuum. Basis states are ordered by the integer `sum_j n_j 2^j`, so site 0
//! is the least significant bit.

use crate::error::{invalid, Error, Result};
use crate::linalg::{lanczos_lowest, lanczos_lowest_light, Csr, LanczosOptions, Scalar};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_MAX_STATES: usize = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    /// Half the number of sites.
    pub size: usize,
    pub a: f64,
    pub m: f64,
    pub q: f64,
    pub theta: f64,
    /// Electric field cutoff, |l| <= cutoff.
    pub cutoff: u32,
}

impl LatticeParams {
    /// Lattice units: a = 1, mass and coupling given as am and aq.
    pub fn dimensionless(size: usize, cutoff: u32, am: f64, aq: f64, theta: f64) -> Self {
        LatticeParams { size, a: 1.0, m: am, q: aq, theta, cutoff }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return invalid("L must be at least 1");
        }
        if 2 * self.size > 62 {
            return invalid("L must be at most 31");
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return invalid("lattice spacing must be positive");
        }
        if !(self.m >= 0.0 && self.q >= 0.0) || !self.theta.is_finite() {
            return invalid("mass and charge must be non-negative, theta finite");
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        2 * self.size
    }
    pub fn am(&self) -> f64 {
        self.a * self.m
    }
    pub fn aq(&self) -> f64 {
        self.a * self.q
    }
    pub fn g(&self) -> f64 {
        1.0 / (2.0 * self.a)
    }
}

/// Background charge of site j in the bare vacuum.
#[inline]
pub fn vacuum_occupation(j: usize) -> i32 {
    (j % 2 == 0) as i32
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaugeConfig {
    pub bits: u64,
    pub sites: usize,
    pub fields: Vec<i32>,
}

impl GaugeConfig {
    pub fn from_occupations(occ: &[u8]) -> Result<Self> {
        if occ.len() % 2 != 0 || occ.is_empty() {
            return invalid("occupation string must have even positive length");
        }
        if occ.iter().any(|&b| b > 1) {
            return invalid("occupations must be 0 or 1");
        }
        let bits = occ.iter().enumerate().fold(0u64, |acc, (j, &b)| acc | ((b as u64) << j));
        let fields = gauss_fields(occ, occ.len() / 2)?
            .ok_or_else(|| Error::Validation("occupation string is not half filled".into()))?;
        Ok(GaugeConfig { bits, sites: occ.len(), fields })
    }

    pub fn from_bits(bits: u64, sites: usize) -> Result<Self> {
        Self::from_occupations(&bits_to_occupations(bits, sites))
    }

    pub fn occupations(&self) -> Vec<u8> {
        bits_to_occupations(self.bits, self.sites)
    }

    pub fn occupied(&self, j: usize) -> bool {
        self.bits >> j & 1 == 1
    }

    pub fn charge(&self, j: usize) -> i32 {
        self.occupied(j) as i32 - vacuum_occupation(j)
    }

    pub fn max_field(&self) -> u32 {
        self.fields.iter().map(|l| l.unsigned_abs()).max().unwrap_or(0)
    }

    /// Bare vacuum: even sites filled, all fields zero.
    pub fn vacuum(size: usize) -> Self {
        let bits = (0..2 * size).step_by(2).fold(0u64, |acc, j| acc | 1 << j);
        GaugeConfig { bits, sites: 2 * size, fields: vec![0; 2 * size - 1] }
    }
}

pub fn bits_to_occupations(bits: u64, sites: usize) -> Vec<u8> {
    (0..sites).map(|j| (bits >> j & 1) as u8).collect()
}

/// Fields from Gauss's law, `l_{j+1/2} = sum_{i<=j} Q_i`. Returns `None` when
/// the closing partial sum is nonzero, which is the same as not half filled.
pub fn gauss_fields(occ: &[u8], size: usize) -> Result<Option<Vec<i32>>> {
    if occ.len() != 2 * size {
        return invalid(format!("expected {} occupations, got {}", 2 * size, occ.len()));
    }
    let mut acc = 0i32;
    let mut fields = Vec::with_capacity(2 * size - 1);
    for (j, &n) in occ.iter().enumerate() {
        acc += n as i32 - vacuum_occupation(j);
        if j + 1 < occ.len() {
            fields.push(acc);
        }
    }
    Ok(if acc == 0 { Some(fields) } else { None })
}

#[derive(Clone, Debug)]
pub struct SectorBasis {
    pub params: LatticeParams,
    states: Vec<u64>,
}

impl SectorBasis {
    pub fn len(&self) -> usize {
        self.states.len()
    }
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
    pub fn bits(&self, i: usize) -> u64 {
        self.states[i]
    }
    pub fn states(&self) -> &[u64] {
        &self.states
    }
    pub fn index_of(&self, bits: u64) -> Option<usize> {
        self.states.binary_search(&bits).ok()
    }
    pub fn config(&self, i: usize) -> GaugeConfig {
        let sites = self.params.sites();
        let bits = self.states[i];
        let occ = bits_to_occupations(bits, sites);
        let fields = gauss_fields(&occ, self.params.size).unwrap().unwrap();
        GaugeConfig { bits, sites, fields }
    }
    pub fn configs(&self) -> impl Iterator<Item = GaugeConfig> + '_ {
        (0..self.len()).map(|i| self.config(i))
    }
}

/// Number of sector states, by dynamic programming over (site, field).
pub fn sector_size(size: usize, cutoff: u32) -> u128 {
    let w = cutoff as i64;
    let width = (2 * w + 1) as usize;
    let mut ways = vec![0u128; width];
    ways[w as usize] = 1;
    for j in 0..2 * size {
        let mut nxt = vec![0u128; width];
        for (k, &c) in ways.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for n in 0..2 {
                let l = k as i64 - w + n - vacuum_occupation(j) as i64;
                if l.abs() <= w {
                    nxt[(l + w) as usize] += c;
                }
            }
        }
        ways = nxt;
    }
    ways[w as usize]
}

pub fn enumerate_basis(params: &LatticeParams) -> Result<SectorBasis> {
    enumerate_basis_with_capacity(params, DEFAULT_MAX_STATES)
}

pub fn enumerate_basis_with_capacity(params: &LatticeParams, max_states: usize) -> Result<SectorBasis> {
    params.validate()?;
    let count = sector_size(params.size, params.cutoff);
    if count > max_states as u128 {
        return Err(Error::Capacity { size: count.min(usize::MAX as u128) as usize, max: max_states });
    }
    let sites = params.sites();
    let w = params.cutoff as i32;
    let mut states = Vec::with_capacity(count as usize);
    // depth-first over sites, pruning once the field leaves [-W, W] or can no
    // longer return to zero
    let mut stack = vec![(0usize, 0i32, 0u64)];
    while let Some((j, l, bits)) = stack.pop() {
        if j == sites {
            if l == 0 {
                states.push(bits);
            }
            continue;
        }
        let remaining = (sites - j - 1) as i32;
        for n in 0..2 {
            let nl = l + n - vacuum_occupation(j);
            if nl.abs() <= w && nl.abs() <= remaining {
                stack.push((j + 1, nl, bits | (n as u64) << j));
            }
        }
    }
    states.sort_unstable();
    Ok(SectorBasis { params: *params, states })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gauge {
    /// Hopping amplitude -i/(2a) as written in the lattice Hamiltonian.
    Complex,
    /// After the diagonal rotation c_j -> e^{i(-1)^j pi/4} c_j the hopping
    /// becomes (-1)^j/(2a) and the matrix is real symmetric.
    Real,
}

#[derive(Clone, Debug)]
pub struct SparseHamiltonian {
    pub params: LatticeParams,
    pub gauge: Gauge,
    pub matrix: Csr<Complex64>,
}

impl SparseHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.n()
    }

    /// Real part of the matrix; only meaningful in the real gauge.
    pub fn real_matrix(&self) -> Result<Csr<f64>> {
        if self.gauge != Gauge::Real {
            return invalid("real form requested for a complex-gauge Hamiltonian");
        }
        Ok(self.matrix.map(|v| v.re))
    }
}

/// Diagonal energy of a configuration.
pub fn diagonal_energy(params: &LatticeParams, cfg: &GaugeConfig) -> f64 {
    let mass: f64 = (0..cfg.sites)
        .filter(|&j| cfg.occupied(j))
        .map(|j| if j % 2 == 0 { -params.m } else { params.m })
        .sum();
    let bg = params.theta / (2.0 * PI);
    let electric: f64 = cfg.fields.iter().map(|&l| (l as f64 - bg).powi(2)).sum();
    mass + 0.5 * params.a * params.q * params.q * electric
}

/// Hops available from a configuration: `(new_bits, j)` where the fermion
/// moved from site `j` to `j-1` (raising bond `j-1`), or the reverse move.
/// The first flag is true for the j -> j-1 direction.
pub(crate) fn hops(cfg: &GaugeConfig, cutoff: u32) -> Vec<(u64, usize, bool)> {
    let mut out = Vec::new();
    for j in 1..cfg.sites {
        let left = cfg.occupied(j - 1);
        let right = cfg.occupied(j);
        if left == right {
            continue;
        }
        let flipped = cfg.bits ^ (1 << j) ^ (1 << (j - 1));
        let raise = right;
        let nl = cfg.fields[j - 1] + if raise { 1 } else { -1 };
        if nl.unsigned_abs() <= cutoff {
            out.push((flipped, j, raise));
        }
    }
    out
}

/// Matrix element <new|H|old> for a hop across bond j-1.
pub(crate) fn hop_element(params: &LatticeParams, gauge: Gauge, j: usize, raise: bool) -> Complex64 {
    let g = params.g();
    match gauge {
        // c^dag_{j-1} U c_j carries -i g; its conjugate +i g
        Gauge::Complex => Complex64::new(0.0, if raise { -g } else { g }),
        Gauge::Real => Complex64::new(if j % 2 == 0 { g } else { -g }, 0.0),
    }
}

pub fn build_hamiltonian(params: &LatticeParams, basis: &SectorBasis, gauge: Gauge) -> Result<SparseHamiltonian> {
    if basis.params.size != params.size || basis.params.cutoff != params.cutoff {
        return invalid("basis was enumerated for a different lattice size or cutoff");
    }
    let rows: Vec<Vec<(usize, Complex64)>> = (0..basis.len())
        .map(|b| {
            let cfg = basis.config(b);
            let mut row = vec![(b, Complex64::new(diagonal_energy(params, &cfg), 0.0))];
            for (nb, j, raise) in hops(&cfg, params.cutoff) {
                let a = basis.index_of(nb).expect("hop left the sector");
                // row a holds <a|H|b>; store row b with <b|H|a> = conj
                row.push((a, hop_element(params, gauge, j, raise).conj()));
            }
            row
        })
        .collect();
    Ok(SparseHamiltonian { params: *params, gauge, matrix: Csr::from_rows(rows) })
}

#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub energies: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
}

/// Lowest `k` levels. Real-gauge matrices are diagonalized in real arithmetic.
pub fn lowest_levels(h: &SparseHamiltonian, k: usize, opts: &LanczosOptions) -> Result<Eigenpairs> {
    match h.gauge {
        Gauge::Real => {
            let m = h.real_matrix()?;
            let (e, v) = lanczos_lowest::<f64, _>(&m, k, opts)?;
            let states = v.into_iter().map(|x| x.into_iter().map(|r| r.to_complex()).collect()).collect();
            Ok(Eigenpairs { energies: e, states })
        }
        Gauge::Complex => {
            let (e, v) = lanczos_lowest::<Complex64, _>(&h.matrix, k, opts)?;
            Ok(Eigenpairs { energies: e, states: v })
        }
    }
}

/// Lowest `k` levels by successive deflation with the O(n)-memory Lanczos;
/// meant for sectors where storing a Krylov basis is too expensive.
pub fn lowest_levels_light(h: &SparseHamiltonian, k: usize, tol: f64) -> Result<Eigenpairs> {
    let max_steps = 2000;
    match h.gauge {
        Gauge::Real => {
            let m = h.real_matrix()?;
            let mut found: Vec<Vec<f64>> = Vec::new();
            let mut energies = Vec::new();
            for _ in 0..k {
                let (e, v) = lanczos_lowest_light(&m, &found, tol, max_steps)?;
                energies.push(e);
                found.push(v);
            }
            let states = found.into_iter().map(|x| x.into_iter().map(|r| r.to_complex()).collect()).collect();
            Ok(Eigenpairs { energies, states })
        }
        Gauge::Complex => {
            let mut states: Vec<Vec<Complex64>> = Vec::new();
            let mut energies = Vec::new();
            for _ in 0..k {
                let (e, v) = lanczos_lowest_light(&h.matrix, &states, tol, max_steps)?;
                energies.push(e);
                states.push(v);
            }
            Ok(Eigenpairs { energies, states })
        }
    }
}

pub fn ground_state(h: &SparseHamiltonian, tol: f64) -> Result<(f64, Vec<Complex64>)> {
    let opts = LanczosOptions { tol, ..Default::default() };
    let mut p = lowest_levels(h, 1, &opts)?;
    Ok((p.energies[0], p.states.pop().unwrap()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    FieldProfile,
    ChargeDensity,
    FieldSquaredTotal,
    Occupation,
}

pub fn measure(state: &[Complex64], basis: &SectorBasis, which: Observable) -> Result<Vec<f64>> {
    if state.len() != basis.len() {
        return invalid("state length does not match basis");
    }
    let norm2: f64 = state.iter().map(|c| c.norm_sqr()).sum();
    if (norm2.sqrt() - 1.0).abs() > 1e-8 {
        return invalid(format!("state is not normalized (norm {})", norm2.sqrt()));
    }
    let sites = basis.params.sites();
    let len = match which {
        Observable::FieldProfile => sites - 1,
        Observable::ChargeDensity | Observable::Occupation => sites,
        Observable::FieldSquaredTotal => 1,
    };
    let mut out = vec![0.0; len];
    for (i, amp) in state.iter().enumerate() {
        let p = amp.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let cfg = basis.config(i);
        match which {
            Observable::FieldProfile => {
                for (o, &l) in out.iter_mut().zip(&cfg.fields) {
                    *o += p * l as f64;
                }
            }
            Observable::ChargeDensity => {
                for (j, o) in out.iter_mut().enumerate() {
                    *o += p * cfg.charge(j) as f64;
                }
            }
            Observable::Occupation => {
                for (j, o) in out.iter_mut().enumerate() {
                    *o += p * cfg.occupied(j) as u8 as f64;
                }
            }
            Observable::FieldSquaredTotal => {
                out[0] += p * cfg.fields.iter().map(|&l| (l * l) as f64).sum::<f64>();
            }
        }
    }
    Ok(out)
}
