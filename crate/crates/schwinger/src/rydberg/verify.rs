use super::constants::{kinetic_from, tail_couplings, tail_energy, virtual_denominators};
use super::{vacuum_height, wall_occupied, ArrayModel, RydbergParams};
use crate::error::{invalid, Error, Result};
use crate::linalg::{chebyshev_lowest, dense_eigh, FilterOptions, LinearOperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

pub const MAX_FREE_ATOMS: usize = 20;

/// Clamped patch: free atoms fill columns `1..steps` and `rows` consecutive
/// rows centred on height 0; everything else follows the vacuum interface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchGeometry {
    /// Number of path steps, `2 L_s`.
    pub steps: usize,
    pub rows: usize,
}

impl PatchGeometry {
    pub fn bottom(&self) -> i32 {
        -((self.rows / 2) as i32)
    }
    pub fn top(&self) -> i32 {
        self.bottom() + self.rows as i32 - 1
    }
    pub fn free_atoms(&self) -> usize {
        (self.steps.saturating_sub(1)) * self.rows
    }
    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 || self.steps % 2 != 0 {
            return invalid("patch steps must be even and at least 2");
        }
        if self.rows < 2 {
            return invalid("patch needs at least 2 rows");
        }
        if self.free_atoms() > MAX_FREE_ATOMS {
            return invalid(format!(
                "patch has {} free atoms, at most {MAX_FREE_ATOMS} allowed",
                self.free_atoms()
            ));
        }
        Ok(())
    }

    fn free_sites(&self) -> Vec<(i32, i32)> {
        let mut out = Vec::new();
        for x in 1..self.steps as i32 {
            for r in self.bottom()..=self.top() {
                out.push((x, r));
            }
        }
        out
    }

    /// Occupation of clamped atoms.
    fn clamped(&self, x: i32, r: i32) -> bool {
        if x >= 1 && x < self.steps as i32 {
            if r > self.top() {
                !super::is_even_site(x, r)
            } else {
                r < self.bottom() && super::is_even_site(x, r)
            }
        } else {
            let y = if x == 0 || x == self.steps as i32 { 0 } else { vacuum_height(x) };
            wall_occupied(x, r, y)
        }
    }

    /// Interface paths fitting in the patch: heights `bottom ..= top + 1`, the
    /// extreme rows of the wall then fall on clamped atoms of the right value.
    pub fn paths(&self) -> Vec<Vec<i32>> {
        let n = self.steps;
        let (lo, hi) = (self.bottom(), self.top() + 1);
        let mut out = Vec::new();
        for code in 0u32..(1 << n) {
            if code.count_ones() as usize * 2 != n {
                continue;
            }
            let mut y = vec![0i32];
            for j in 0..n {
                let last = y[j];
                y.push(if code >> j & 1 == 1 { last + 1 } else { last - 1 });
            }
            if y.iter().all(|&h| h >= lo && h <= hi) {
                out.push(y);
            }
        }
        out
    }

    /// Number of closed paths confined to the patch, by transfer counting.
    pub fn path_count(&self) -> usize {
        let (lo, hi) = (self.bottom(), self.top() + 1);
        let mut counts: HashMap<i32, usize> = HashMap::from([(0, 1)]);
        for _ in 0..self.steps {
            let mut next = HashMap::new();
            for (&y, &c) in &counts {
                for ny in [y - 1, y + 1] {
                    if ny >= lo && ny <= hi {
                        *next.entry(ny).or_insert(0) += c;
                    }
                }
            }
            counts = next;
        }
        counts.get(&0).copied().unwrap_or(0)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub geometry: PatchGeometry,
    pub params: RydbergParams,
    pub free_atoms: usize,
    pub hilbert_dim: usize,
    pub band_dim: usize,
    pub path_count: usize,
    pub t_eff: f64,
    /// Lowest band of the full array Hamiltonian.
    pub exact: Vec<f64>,
    /// Effective interface model: uniform hopping, dictionary diagonal and tails.
    pub effective: Vec<f64>,
    /// Second-order Schrieffer-Wolff band from exact classical energies.
    pub second_order: Vec<f64>,
    pub offset: f64,
    pub deviation: f64,
    pub offset_second_order: f64,
    pub deviation_second_order: f64,
    /// `Omega^3 / Delta~^2`.
    pub third_order_scale: f64,
    /// Smallest classical energy outside the band minus the largest inside.
    pub classical_gap: f64,
    /// Gap from the band to the next level, available in the static case.
    pub spectral_gap: Option<f64>,
}

struct Patch {
    sites: Vec<(i32, i32)>,
    energies: Vec<f64>,
    rabi: Vec<f64>,
    band: Vec<usize>,
    paths: Vec<Vec<i32>>,
}

fn build_patch(model: &ArrayModel, geo: &PatchGeometry) -> Patch {
    let sites = geo.free_sites();
    let n = sites.len();
    let index: HashMap<(i32, i32), usize> = sites.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut field = vec![0.0; n];
    let mut pair = vec![0.0; n * n];
    for (i, &(x, r)) in sites.iter().enumerate() {
        field[i] = model.onsite(x, r);
        for &(dx, dy, u) in model.couplings() {
            let t = (x + dx, r + dy);
            match index.get(&t) {
                Some(&j) => pair[i * n + j] = u,
                None => {
                    if geo.clamped(t.0, t.1) {
                        field[i] += u;
                    }
                }
            }
        }
    }
    let dim = 1usize << n;
    let mut energies = vec![0.0; dim];
    for s in 1..dim {
        let i = s.trailing_zeros() as usize;
        let rest = s & (s - 1);
        let mut e = energies[rest] + field[i];
        let mut b = rest;
        while b != 0 {
            let j = b.trailing_zeros() as usize;
            e += pair[i * n + j];
            b &= b - 1;
        }
        energies[s] = e;
    }
    let paths = geo.paths();
    let band = paths
        .iter()
        .map(|y| {
            sites
                .iter()
                .enumerate()
                .filter(|&(_, &(x, r))| wall_occupied(x, r, y[x as usize]))
                .fold(0usize, |acc, (i, _)| acc | 1 << i)
        })
        .collect();
    let rabi = vec![model.params.omega; n];
    Patch { sites, energies, rabi, band, paths }
}

struct ArrayOperator<'a> {
    patch: &'a Patch,
}

impl LinearOperator<f64> for ArrayOperator<'_> {
    fn dim(&self) -> usize {
        self.patch.energies.len()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let p = self.patch;
        y.par_chunks_mut(4096).enumerate().for_each(|(c, chunk)| {
            let start = c * 4096;
            for (k, out) in chunk.iter_mut().enumerate() {
                let s = start + k;
                let mut acc = p.energies[s] * x[s];
                for (i, &w) in p.rabi.iter().enumerate() {
                    acc -= 0.5 * w * x[s ^ (1 << i)];
                }
                *out = acc;
            }
        });
    }
}

fn sym_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let (vals, _) = dense_eigh(m.map(|v| Complex64::new(v, 0.0)));
    vals
}

/// Dictionary diagonal plus tails for a path, relative to the vacuum string.
fn effective_diagonal(params: &RydbergParams, y: &[i32]) -> Result<f64> {
    let n = y.len() - 1;
    let bits: Vec<u8> = (0..n).map(|j| (y[j + 1] > y[j]) as u8).collect();
    let fields: Vec<f64> = (1..n).map(|j| ((y[j] - (j % 2) as i32).div_euclid(2)) as f64).collect();
    let tails = tail_couplings(params)?;
    let stagger: f64 = bits
        .iter()
        .enumerate()
        .map(|(j, &b)| if j % 2 == 0 { b as f64 } else { -(b as f64) })
        .sum();
    Ok(-params.h * fields.iter().sum::<f64>() - params.hprime * fields.iter().map(|l| l * l).sum::<f64>()
        + 0.5 * params.mu * stagger
        + tail_energy(&tails, &bits))
}

fn compare(exact: &[f64], model: &[f64]) -> (f64, f64) {
    let n = exact.len() as f64;
    let offset = exact.iter().zip(model).map(|(a, b)| a - b).sum::<f64>() / n;
    let dev = exact.iter().zip(model).map(|(a, b)| (a - b - offset).abs()).fold(0.0, f64::max);
    (offset, dev)
}

/// Full exact diagonalization of the clamped patch compared with the
/// effective interface model.
pub fn verify_rydberg(params: &RydbergParams, geo: &PatchGeometry) -> Result<VerifyReport> {
    geo.validate()?;
    params.validate()?;
    if params.delta <= 0.0 || params.omega.abs() / params.delta > 0.05 {
        return invalid("verification requires Delta > 0 and |Omega|/Delta <= 0.05");
    }
    let model = ArrayModel::new(params)?;
    let den = virtual_denominators(params)?;
    let t_eff = kinetic_from(params.omega, &den);
    let patch = build_patch(&model, geo);
    let band_dim = patch.band.len();
    let path_count = geo.path_count();
    if band_dim == 0 {
        return invalid("patch admits no interface path");
    }

    let mut in_band = vec![false; patch.energies.len()];
    for &b in &patch.band {
        in_band[b] = true;
    }
    let band_max = patch.band.iter().map(|&b| patch.energies[b]).fold(f64::NEG_INFINITY, f64::max);
    let outside_min = patch
        .energies
        .iter()
        .enumerate()
        .filter(|(s, _)| !in_band[*s])
        .map(|(_, &e)| e)
        .fold(f64::INFINITY, f64::min);
    let classical_gap = outside_min - band_max;
    if classical_gap <= 0.0 {
        return Err(Error::Check(format!(
            "interface band overlaps bulk excitations (classical gap {classical_gap:.6})"
        )));
    }

    // effective model over paths
    let index: HashMap<usize, usize> = patch.band.iter().enumerate().map(|(k, &b)| (b, k)).collect();
    let mut h1 = DMatrix::<f64>::zeros(band_dim, band_dim);
    for (k, y) in patch.paths.iter().enumerate() {
        h1[(k, k)] = effective_diagonal(params, y)?;
        for c in 1..geo.steps {
            if y[c - 1] == y[c + 1] {
                let mut z = y.clone();
                z[c] = 2 * y[c - 1] - y[c];
                if let Some(k2) = patch.paths.iter().position(|p| *p == z) {
                    h1[(k, k2)] = -t_eff;
                }
            }
        }
    }
    let effective = sym_eigenvalues(h1);

    // second order from the exact classical energies
    let n = patch.sites.len();
    let mut h2 = DMatrix::<f64>::zeros(band_dim, band_dim);
    for (k, &p) in patch.band.iter().enumerate() {
        h2[(k, k)] += patch.energies[p];
        for i in 0..n {
            let q = p ^ (1 << i);
            let eq = patch.energies[q];
            for j in 0..n {
                let p2 = q ^ (1 << j);
                if let Some(&k2) = index.get(&p2) {
                    let amp = 0.25 * patch.rabi[i] * patch.rabi[j];
                    let e2 = patch.energies[p2];
                    h2[(k, k2)] += amp * 0.5 * (1.0 / (patch.energies[p] - eq) + 1.0 / (e2 - eq));
                }
            }
        }
    }
    let second_order = sym_eigenvalues(h2);

    let (exact, spectral_gap) = if params.omega == 0.0 {
        let mut e: Vec<f64> = patch.band.iter().map(|&b| patch.energies[b]).collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        (e, Some(classical_gap))
    } else {
        let op = ArrayOperator { patch: &patch };
        let spread: f64 = patch.rabi.iter().map(|w| w.abs()).sum();
        let emax = patch.energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // start from the classical band plus a few random directions
        let dim = patch.energies.len();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut block: Vec<Vec<f64>> = patch
            .band
            .iter()
            .map(|&b| {
                let mut v: Vec<f64> = (0..dim).map(|_| 1e-3 * rng.gen_range(-1.0..1.0)).collect();
                v[b] += 1.0;
                v
            })
            .collect();
        for _ in 0..4 {
            block.push((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect());
        }
        let opts = FilterOptions {
            cut: band_max + 0.5 * classical_gap,
            upper: emax + spread,
            degree: 40,
            tol: 1e-11,
            max_cycles: 60,
        };
        let (vals, _) = chebyshev_lowest(&op, block, band_dim, &opts)?;
        (vals, None)
    };

    let (offset, deviation) = compare(&exact, &effective);
    let (offset2, deviation2) = compare(&exact, &second_order);
    Ok(VerifyReport {
        geometry: *geo,
        params: params.clone(),
        free_atoms: n,
        hilbert_dim: patch.energies.len(),
        band_dim,
        path_count,
        t_eff,
        exact,
        effective,
        second_order,
        offset,
        deviation,
        offset_second_order: offset2,
        deviation_second_order: deviation2,
        third_order_scale: params.omega.abs().powi(3) / den.delta_tilde.powi(2),
        classical_gap,
        spectral_gap,
    })
}

/// Spread of the classical interface band with no patterns and no drive:
/// the splitting produced by the interaction tails alone.
pub fn spurious_splitting(params: &RydbergParams, geo: &PatchGeometry) -> Result<f64> {
    geo.validate()?;
    let p = RydbergParams { omega: 0.0, ..params.without_patterns() };
    let model = ArrayModel::new(&p)?;
    let patch = build_patch(&model, geo);
    let e: Vec<f64> = patch.band.iter().map(|&b| patch.energies[b]).collect();
    let max = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = e.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(max - min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_counts() {
        let g = PatchGeometry { steps: 4, rows: 6 };
        assert_eq!(g.free_atoms(), 18);
        assert_eq!(g.paths().len(), g.path_count());
        assert_eq!(g.path_count(), 6);
        let g = PatchGeometry { steps: 6, rows: 3 };
        assert_eq!(g.paths().len(), g.path_count());
        assert!(PatchGeometry { steps: 6, rows: 5 }.validate().is_err());
    }

    #[test]
    fn static_band_matches_dictionary() {
        let g = PatchGeometry { steps: 4, rows: 5 };
        let p = RydbergParams { h: 0.01, hprime: -0.004, mu: 0.02, ..RydbergParams::cancelling(1.0, 1.0, 0.0) };
        let r = verify_rydberg(&p, &g).unwrap();
        assert!(r.deviation < 1e-10, "{}", r.deviation);
        assert!(r.deviation_second_order < 1e-10);
        let q = RydbergParams { vprime: 1.0, ..p };
        assert!(verify_rydberg(&q, &g).unwrap().deviation < 1e-10);
    }
}
