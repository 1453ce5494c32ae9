//! Interface encoding: lattice configurations as minimal-length domain walls
//! of an Ising model on a ribbon.
//!
//! A configuration becomes a lattice path with heights
//! `y_j = 2 l_{j-1/2} + (j mod 2)`, `y_0 = y_{2L} = 0`. Ribbon cells sit at
//! `(x, y)` with `x + y` odd, columns `x = 0..2L`; a cell is up when it lies
//! above the path (`y > y_x`). Diagonal neighbours `(x +- 1, y +- 1)` are the
//! Ising bonds. A fixed column at `x = 2L` pins the right endpoint.

use crate::error::{invalid, Error, Result};
use crate::lattice::{build_hamiltonian, Gauge, GaugeConfig, LatticeParams, SectorBasis};
use crate::linalg::Csr;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Move {
    NE,
    SE,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterfacePath {
    pub moves: Vec<Move>,
    pub heights: Vec<i32>,
}

impl InterfacePath {
    pub fn from_moves(moves: Vec<Move>) -> Self {
        let mut heights = vec![0];
        for mv in &moves {
            let y = *heights.last().unwrap();
            heights.push(if *mv == Move::NE { y + 1 } else { y - 1 });
        }
        InterfacePath { moves, heights }
    }

    pub fn size(&self) -> usize {
        self.moves.len() / 2
    }

    /// Field on bond j - 1/2 read off the height at vertex j.
    pub fn field_at(&self, j: usize) -> i32 {
        (self.heights[j] - (j % 2) as i32).div_euclid(2)
    }
}

pub fn encode_path(config: &GaugeConfig) -> InterfacePath {
    let moves = (0..config.sites)
        .map(|j| if config.occupied(j) { Move::NE } else { Move::SE })
        .collect();
    InterfacePath::from_moves(moves)
}

/// Inverse of [`encode_path`]; rejects paths that do not close at height 0 or
/// whose field exceeds `cutoff` (reporting the first offending bond).
pub fn decode_path(path: &InterfacePath, cutoff: Option<u32>) -> Result<GaugeConfig> {
    let sites = path.moves.len();
    if sites == 0 || sites % 2 != 0 || path.heights.len() != sites + 1 {
        return invalid("path must have an even number of moves and matching heights");
    }
    if path.heights[0] != 0 || path.heights[sites] != 0 {
        return invalid("path must start and end at height 0");
    }
    for (j, mv) in path.moves.iter().enumerate() {
        let step = path.heights[j + 1] - path.heights[j];
        let expect = if *mv == Move::NE { 1 } else { -1 };
        if step != expect {
            return invalid(format!("height step {j} disagrees with its move"));
        }
    }
    if let Some(w) = cutoff {
        for j in 1..sites {
            if path.field_at(j).unsigned_abs() > w {
                return invalid(format!("path leaves the ribbon at bond {}", j - 1));
            }
        }
    }
    let occ: Vec<u8> = path.moves.iter().map(|m| (*m == Move::NE) as u8).collect();
    let cfg = GaugeConfig::from_occupations(&occ)?;
    debug_assert!(cfg.fields.iter().enumerate().all(|(k, &l)| l == path.field_at(k + 1)));
    Ok(cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
    /// Coordinates in the rotated square-lattice frame.
    pub rx: i32,
    pub ry: i32,
    /// Spin pinned by the boundary conditions, if any.
    pub fixed: Option<i8>,
}

impl Cell {
    pub fn s(&self) -> i32 {
        self.rx + self.ry
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RibbonGeometry {
    pub size: usize,
    pub cutoff: u32,
    /// Ribbon cells, columns `0..2L`, ordered by column then row.
    pub cells: Vec<Cell>,
    /// Fixed column at `x = 2L` holding the right boundary condition.
    pub environment: Vec<Cell>,
    /// Offset of the rotated frame: `rx + ry = y + offset + 1`,
    /// `rx - ry = x - offset`. Equals L for even L and L + 1 for odd L so
    /// that `rx + ry` and the staggering of the lattice agree.
    pub offset: i32,
}

impl RibbonGeometry {
    pub fn new(size: usize, cutoff: u32) -> Result<Self> {
        if size == 0 {
            return invalid("L must be at least 1");
        }
        let w = cutoff as i32;
        let offset = if size % 2 == 0 { size as i32 } else { size as i32 + 1 };
        let (lo, hi) = (-(2 * w + 1), 2 * w + 2);
        let make = |x: i32, y: i32, fixed: Option<i8>| Cell {
            x,
            y,
            rx: (y + x + 1) / 2,
            ry: (y + 2 * offset + 1 - x) / 2,
            fixed,
        };
        let mut cells = Vec::new();
        for x in 0..2 * size as i32 {
            let rows: Vec<i32> = (lo..=hi).filter(|y| (x + y).rem_euclid(2) == 1).collect();
            let (bottom, top) = (rows[0], *rows.last().unwrap());
            for &y in &rows {
                let fixed = if x == 0 || y == bottom || y == top {
                    Some(if y > 0 { 1 } else { -1 })
                } else {
                    None
                };
                cells.push(make(x, y, fixed));
            }
        }
        let xe = 2 * size as i32;
        let environment = (lo - 1..=hi + 1)
            .filter(|y| (xe + y).rem_euclid(2) == 1)
            .map(|y| make(xe, y, Some(if y > 0 { 1 } else { -1 })))
            .collect();
        Ok(RibbonGeometry { size, cutoff, cells, environment, offset })
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn free_cells(&self) -> Vec<usize> {
        (0..self.cells.len()).filter(|&i| self.cells[i].fixed.is_none()).collect()
    }

    /// Ising bonds as index pairs; indices past `cells.len()` refer to the
    /// environment column.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let all: Vec<&Cell> = self.cells.iter().chain(&self.environment).collect();
        let index: HashMap<(i32, i32), usize> = all.iter().enumerate().map(|(i, c)| ((c.x, c.y), i)).collect();
        let mut out = Vec::new();
        for (i, c) in all.iter().enumerate() {
            for dy in [-1, 1] {
                if let Some(&k) = index.get(&(c.x + 1, c.y + dy)) {
                    out.push((i, k));
                }
            }
        }
        out
    }

    pub fn environment_spins(&self) -> Vec<i8> {
        self.environment.iter().map(|c| c.fixed.unwrap()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinConfig {
    pub spins: Vec<i8>,
}

pub fn spin_configuration(path: &InterfacePath, geometry: &RibbonGeometry) -> Result<SpinConfig> {
    if path.size() != geometry.size {
        return invalid("path and ribbon have different lengths");
    }
    let mut spins = Vec::with_capacity(geometry.cells.len());
    for c in &geometry.cells {
        let s = if c.y > path.heights[c.x as usize] { 1 } else { -1 };
        if let Some(f) = c.fixed {
            if f != s {
                return Err(Error::Validation(format!(
                    "path does not fit the ribbon at column {} (height {})",
                    c.x, path.heights[c.x as usize]
                )));
            }
        }
        spins.push(s);
    }
    Ok(SpinConfig { spins })
}

/// Nearest-neighbour Ising energy `-J sum s_i s_j` including the bonds to
/// the fixed environment column.
pub fn ising_energy(spin: &SpinConfig, geometry: &RibbonGeometry, j: f64) -> f64 {
    let env = geometry.environment_spins();
    let n = spin.spins.len();
    let s = |i: usize| if i < n { spin.spins[i] } else { env[i - n] };
    -j * geometry.bonds().iter().map(|&(a, b)| (s(a) * s(b)) as f64).sum::<f64>()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    UniformH,
    GradientHprime,
    StaggeredMu,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldPattern {
    pub kind: PatternKind,
    pub amplitude: f64,
}

impl FieldPattern {
    /// Per-cell coefficient; the energy term is `-amplitude * coef * s`.
    pub fn coefficient(&self, cell: &Cell, geometry: &RibbonGeometry) -> f64 {
        let s = cell.s();
        match self.kind {
            PatternKind::UniformH => 1.0,
            PatternKind::GradientHprime => {
                let even = (s.rem_euclid(2) == 0) as i32;
                (-geometry.offset - 2 + s + even) as f64
            }
            PatternKind::StaggeredMu => {
                if s.rem_euclid(2) == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    fn absolute_energy(&self, spin: &SpinConfig, geometry: &RibbonGeometry) -> f64 {
        geometry
            .cells
            .iter()
            .zip(&spin.spins)
            .map(|(c, &s)| -self.amplitude * self.coefficient(c, geometry) * s as f64)
            .sum()
    }
}

/// Pattern energy of `spin` minus that of the bare vacuum, by direct
/// summation over cells.
pub fn pattern_energy(spin: &SpinConfig, geometry: &RibbonGeometry, pattern: &FieldPattern) -> Result<f64> {
    if spin.spins.len() != geometry.cells.len() {
        return invalid("spin configuration does not match the ribbon");
    }
    let vac = spin_configuration(&encode_path(&GaugeConfig::vacuum(geometry.size)), geometry)?;
    Ok(pattern.absolute_energy(spin, geometry) - pattern.absolute_energy(&vac, geometry))
}

/// Projected transverse field on the interface states: one cell flip
/// connects two paths differing by a corner flip. A flip that raises the
/// interface (cell goes from up to down) carries `-i g`, the lowering flip
/// `+i g`.
pub fn projected_transverse(basis: &SectorBasis, g: f64) -> Result<Csr<Complex64>> {
    let geometry = RibbonGeometry::new(basis.params.size, basis.params.cutoff)?;
    let spins: Vec<SpinConfig> = basis
        .configs()
        .map(|c| spin_configuration(&encode_path(&c), &geometry))
        .collect::<Result<_>>()?;
    let lookup: HashMap<&SpinConfig, usize> = spins.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let free = geometry.free_cells();
    let rows = spins
        .iter()
        .map(|s| {
            let mut row = Vec::new();
            if g == 0.0 {
                return row;
            }
            let mut t = s.clone();
            for &c in &free {
                t.spins[c] = -t.spins[c];
                if let Some(&a) = lookup.get(&t) {
                    // row b holds <b|H|a>; going a -> b raises when the cell was up in a
                    let raise = t.spins[c] == 1;
                    row.push((a, Complex64::new(0.0, if raise { -g } else { g })));
                }
                t.spins[c] = -t.spins[c];
            }
            row
        })
        .collect();
    Ok(Csr::from_rows(rows))
}

/// Ising parameters equivalent to a lattice point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingDictionary {
    pub g: f64,
    pub h: f64,
    pub hprime: f64,
    pub mu: f64,
}

impl IsingDictionary {
    pub fn from_lattice(p: &LatticeParams) -> Self {
        let aq2 = p.a * p.q * p.q;
        IsingDictionary {
            g: 1.0 / (2.0 * p.a),
            h: -aq2 * p.theta / (4.0 * PI),
            hprime: aq2 / 4.0,
            mu: p.m,
        }
    }

    pub fn patterns(&self) -> [FieldPattern; 3] {
        [
            FieldPattern { kind: PatternKind::UniformH, amplitude: self.h },
            FieldPattern { kind: PatternKind::GradientHprime, amplitude: self.hprime },
            FieldPattern { kind: PatternKind::StaggeredMu, amplitude: self.mu },
        ]
    }
}

/// Interface-projected Ising Hamiltonian assembled from cell sums and
/// corner flips.
pub fn ising_effective_hamiltonian(basis: &SectorBasis, dict: &IsingDictionary) -> Result<Csr<Complex64>> {
    let geometry = RibbonGeometry::new(basis.params.size, basis.params.cutoff)?;
    let kinetic = projected_transverse(basis, dict.g)?;
    let patterns = dict.patterns();
    let mut rows = Vec::with_capacity(basis.len());
    for (b, cfg) in basis.configs().enumerate() {
        let spin = spin_configuration(&encode_path(&cfg), &geometry)?;
        let mut d = 0.0;
        for p in &patterns {
            d += pattern_energy(&spin, &geometry, p)?;
        }
        let mut row: Vec<(usize, Complex64)> = kinetic.row(b).collect();
        row.push((b, Complex64::new(d, 0.0)));
        rows.push(row);
    }
    Ok(Csr::from_rows(rows))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub params: LatticeParams,
    pub dimension: usize,
    pub max_abs_deviation: f64,
    pub constant_offset: f64,
    /// Row and column of the largest deviation.
    pub worst: (usize, usize),
    pub worst_states: (Vec<u8>, Vec<u8>),
    /// Whether a diagonal phase rotation was needed to match the two forms.
    pub gauge_applied: bool,
}

pub const MAX_EQUIVALENCE_DIM: usize = 4096;

pub fn verify_equivalence(params: &LatticeParams) -> Result<EquivalenceReport> {
    let basis = crate::lattice::enumerate_basis(params)?;
    if basis.len() > MAX_EQUIVALENCE_DIM {
        return invalid(format!("sector dimension {} above {}", basis.len(), MAX_EQUIVALENCE_DIM));
    }
    let direct = build_hamiltonian(params, &basis, Gauge::Complex)?;
    let eff = ising_effective_hamiltonian(&basis, &IsingDictionary::from_lattice(params))?;
    let n = basis.len();
    let offset = (0..n).map(|i| (eff.get(i, i) - direct.matrix.get(i, i)).re).sum::<f64>() / n as f64;
    let mut worst = (0.0, (0, 0));
    for i in 0..n {
        let cols: std::collections::BTreeSet<usize> =
            eff.row(i).map(|e| e.0).chain(direct.matrix.row(i).map(|e| e.0)).collect();
        for j in cols {
            let mut d = eff.get(i, j) - direct.matrix.get(i, j);
            if i == j {
                d -= offset;
            }
            if d.norm() > worst.0 {
                worst = (d.norm(), (i, j));
            }
        }
    }
    let (i, j) = worst.1;
    Ok(EquivalenceReport {
        params: *params,
        dimension: n,
        max_abs_deviation: worst.0,
        constant_offset: offset,
        worst: (i, j),
        worst_states: (basis.config(i).occupations(), basis.config(j).occupations()),
        gauge_applied: false,
    })
}

/// Fails with a diagnostic when the deviation exceeds `tol`.
pub fn check_equivalence(params: &LatticeParams, tol: f64) -> Result<EquivalenceReport> {
    let r = verify_equivalence(params)?;
    if r.max_abs_deviation > tol {
        return Err(Error::Check(format!(
            "dictionary deviation {:.3e} at element ({}, {}) between {:?} and {:?}",
            r.max_abs_deviation, r.worst.0, r.worst.1, r.worst_states.0, r.worst_states.1
        )));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::enumerate_basis;

    fn basis(l: usize, w: u32) -> SectorBasis {
        enumerate_basis(&LatticeParams::dimensionless(l, w, 0.0, 1.0, 0.0)).unwrap()
    }

    #[test]
    fn path_examples() {
        let vac = encode_path(&GaugeConfig::from_occupations(&[1, 0, 1, 0]).unwrap());
        assert_eq!(vac.moves, vec![Move::NE, Move::SE, Move::NE, Move::SE]);
        assert_eq!(vac.heights, vec![0, 1, 0, 1, 0]);
        let p = encode_path(&GaugeConfig::from_occupations(&[0, 1, 1, 0]).unwrap());
        assert_eq!(p.heights, vec![0, -1, 0, 1, 0]);
        let d = decode_path(&InterfacePath::from_moves(vec![Move::NE, Move::NE, Move::SE, Move::SE]), None).unwrap();
        assert_eq!(d.occupations(), vec![1, 1, 0, 0]);
        assert_eq!(d.fields, vec![0, 1, 0]);
        assert!(decode_path(&InterfacePath::from_moves(vec![Move::NE, Move::NE, Move::SE, Move::SE]), Some(0)).is_err());
    }

    #[test]
    fn round_trip() {
        for l in 1..=5 {
            for w in 0..=3 {
                let b = basis(l, w);
                for c in b.configs() {
                    let p = encode_path(&c);
                    for j in 1..2 * l {
                        assert_eq!(p.field_at(j), c.fields[j - 1]);
                    }
                    assert_eq!(decode_path(&p, Some(w)).unwrap(), c);
                }
            }
        }
    }

    #[test]
    fn ribbon_size() {
        for l in 1..5 {
            for w in 0..4u32 {
                let g = RibbonGeometry::new(l, w).unwrap();
                assert_eq!(g.n_cells(), 2 * l * (2 * w as usize + 2));
                assert_eq!(g.free_cells().len(), (2 * l - 1) * 2 * w as usize);
            }
        }
    }

    #[test]
    fn minimal_interfaces_are_the_sector() {
        // exhaustive over free cells: the minimum-energy configurations are
        // exactly the truncated paths
        for (l, w) in [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2)] {
            let geo = RibbonGeometry::new(l, w).unwrap();
            let b = basis(l, w);
            let free = geo.free_cells();
            let bonds = geo.bonds();
            let env = geo.environment_spins();
            let mut base: Vec<i8> = geo.cells.iter().map(|c| c.fixed.unwrap_or(-1)).collect();
            base.extend(env);
            let mut best = i64::MAX;
            let mut count = 0;
            let mut minimizers = Vec::new();
            for mask in 0u64..1 << free.len() {
                for (k, &c) in free.iter().enumerate() {
                    base[c] = if mask >> k & 1 == 1 { 1 } else { -1 };
                }
                let e: i64 = -bonds.iter().map(|&(a, c)| (base[a] * base[c]) as i64).sum::<i64>();
                if e < best {
                    best = e;
                    count = 0;
                    minimizers.clear();
                }
                if e == best {
                    count += 1;
                    minimizers.push(base[..geo.n_cells()].to_vec());
                }
            }
            assert_eq!(count, b.len(), "L={l} W={w}");
            let paths: std::collections::HashSet<Vec<i8>> = b
                .configs()
                .map(|c| spin_configuration(&encode_path(&c), &geo).unwrap().spins)
                .collect();
            assert!(minimizers.iter().all(|m| paths.contains(m)));
            for c in b.configs() {
                let s = spin_configuration(&encode_path(&c), &geo).unwrap();
                assert_eq!(ising_energy(&s, &geo, 1.0), best as f64);
            }
        }
    }

    #[test]
    fn spin_difference_is_between_paths() {
        let b = basis(3, 2);
        let geo = RibbonGeometry::new(3, 2).unwrap();
        let cfgs: Vec<_> = b.configs().collect();
        for x in &cfgs {
            for y in &cfgs {
                let (px, py) = (encode_path(x), encode_path(y));
                let (sx, sy) = (spin_configuration(&px, &geo).unwrap(), spin_configuration(&py, &geo).unwrap());
                for (c, (a, bb)) in geo.cells.iter().zip(sx.spins.iter().zip(&sy.spins)) {
                    let (h1, h2) = (px.heights[c.x as usize], py.heights[c.x as usize]);
                    let between = c.y > h1.min(h2) && c.y < h1.max(h2);
                    assert_eq!(a != bb, between);
                }
            }
        }
    }

    #[test]
    fn pattern_examples() {
        let geo = RibbonGeometry::new(2, 1).unwrap();
        let s = spin_configuration(&encode_path(&GaugeConfig::from_occupations(&[0, 1, 1, 0]).unwrap()), &geo).unwrap();
        let e = |kind, amp| pattern_energy(&s, &geo, &FieldPattern { kind, amplitude: amp }).unwrap();
        assert!((e(PatternKind::UniformH, 0.3) + 0.6).abs() < 1e-14);
        assert!((e(PatternKind::GradientHprime, 0.3) - 0.6).abs() < 1e-14);
        let vac = spin_configuration(&encode_path(&GaugeConfig::vacuum(2)), &geo).unwrap();
        let p = FieldPattern { kind: PatternKind::StaggeredMu, amplitude: 0.7 };
        assert_eq!(pattern_energy(&vac, &geo, &p).unwrap(), 0.0);
    }

    #[test]
    fn table_rows_hold_on_every_state() {
        for (l, w) in [(2, 1), (3, 2), (4, 2), (5, 1)] {
            let geo = RibbonGeometry::new(l, w).unwrap();
            for c in basis(l, w).configs() {
                let s = spin_configuration(&encode_path(&c), &geo).unwrap();
                let sum_l: i32 = c.fields.iter().sum();
                let sum_l2: i32 = c.fields.iter().map(|x| x * x).sum();
                let stag: i32 = (0..2 * l).map(|j| if c.occupied(j) { 1 - 2 * (j as i32 % 2) } else { 0 }).sum();
                let e = |kind| pattern_energy(&s, &geo, &FieldPattern { kind, amplitude: 1.0 }).unwrap();
                assert_eq!(e(PatternKind::UniformH), 2.0 * sum_l as f64);
                assert_eq!(e(PatternKind::GradientHprime), 2.0 * sum_l2 as f64);
                assert_eq!(e(PatternKind::StaggeredMu), -((stag - l as i32) as f64));
            }
        }
    }

    #[test]
    fn transverse_counts() {
        let b = basis(2, 1);
        let t = projected_transverse(&b, 0.5).unwrap();
        let vac = b.index_of(GaugeConfig::vacuum(2).bits).unwrap();
        assert_eq!(t.row(vac).count(), 3);
        for i in 0..b.len() {
            let p = encode_path(&b.config(i));
            let extrema = (1..4)
                .filter(|&j| p.heights[j - 1] == p.heights[j + 1])
                .filter(|&j| {
                    let flipped = 2 * p.heights[j - 1] - p.heights[j];
                    let f = (flipped - (j % 2) as i32).div_euclid(2);
                    f.abs() <= 1
                })
                .count();
            assert_eq!(t.row(i).count(), extrema);
        }
        assert_eq!(projected_transverse(&b, 0.0).unwrap().nnz(), 0);
        assert_eq!(t.hermiticity_defect(), 0.0);
    }

    #[test]
    fn equivalence_example() {
        let p = LatticeParams::dimensionless(2, 1, 0.7, 1.3, 0.9);
        let r = verify_equivalence(&p).unwrap();
        assert!(r.max_abs_deviation < 1e-12, "{r:?}");
        assert!(!r.gauge_applied);
    }

    #[test]
    fn odd_length_needs_shifted_frame() {
        // the literal -L-2 gradient offset leaves a spurious linear term for odd L
        let geo = RibbonGeometry::new(3, 1).unwrap();
        let mut shifted = geo.clone();
        shifted.offset = 3;
        let c = GaugeConfig::from_occupations(&[0, 1, 1, 0, 1, 0]).unwrap();
        let s = spin_configuration(&encode_path(&c), &geo).unwrap();
        let p = FieldPattern { kind: PatternKind::GradientHprime, amplitude: 1.0 };
        assert_eq!(pattern_energy(&s, &geo, &p).unwrap(), 2.0);
        assert_ne!(pattern_energy(&s, &shifted, &p).unwrap(), 2.0);
    }
}
