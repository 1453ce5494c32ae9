//! Dual-species Rydberg array realising the interface encoding.
//!
//! Frame: atoms sit on the square lattice `(x, r)`; the even sublattice is
//! `x + r` even. An interface with column heights `y_x` (the lattice path of
//! [`crate::interface`]) leaves rows `r <= y_x - 2` in the checkerboard state
//! (even atoms excited), rows `r >= y_x + 1` in the anti-checkerboard state
//! and rows `y_x - 1, y_x` in the ground state. Outside the simulated chain
//! the path continues as the vacuum zigzag `y_x = x mod 2`.
//!
//! Longitudinal patterns act on the even sublattice only, with energy
//! `-(h + h' f(r) + mu (-1)^r) n` and `f(r) = r + [r even]`.

mod constants;
mod dictionary;
mod shells;
mod verify;

pub use constants::{
    bulk_gaps, effective_kinetic, tail_couplings, tail_couplings_exact, tail_energy, virtual_denominators, DenominatorReport,
    ExactTailCouplings, ShapeDenominators, StabilityReport, TailCouplings,
};
pub use dictionary::{dictionary_solve, Atom, ChainRatio, DesignReport, DesignRequest, Species};
pub use shells::{shell_table, Parity, Shell, ShellTable, SUPPORTED_CUTOFFS};
pub use verify::{spurious_splitting, verify_rydberg, PatchGeometry, VerifyReport};

use crate::error::{invalid, Result};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

/// `V'/V` at which the nearest-neighbour tail interaction cancels.
pub const CANCELLATION_RATIO: Ratio<i64> = Ratio::new_raw(125, 64);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RydbergParams {
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "Vprime")]
    pub vprime: f64,
    #[serde(rename = "Omega")]
    pub omega: f64,
    #[serde(rename = "Delta")]
    pub delta: f64,
    #[serde(default)]
    pub h: f64,
    #[serde(default)]
    pub hprime: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default = "default_cutoff")]
    pub shell_cutoff: u32,
}

fn default_cutoff() -> u32 {
    13
}

impl RydbergParams {
    /// Cancellation point `V' = 125 V / 64`, no patterns.
    pub fn cancelling(v: f64, delta: f64, omega: f64) -> Self {
        RydbergParams {
            v,
            vprime: v * 125.0 / 64.0,
            omega,
            delta,
            h: 0.0,
            hprime: 0.0,
            mu: 0.0,
            shell_cutoff: 13,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v > 0.0) || !(self.vprime > 0.0) {
            return invalid("V and Vprime must be positive");
        }
        let all = [self.omega, self.delta, self.h, self.hprime, self.mu];
        if all.iter().any(|x| !x.is_finite()) {
            return invalid("Rydberg parameters must be finite");
        }
        if !SUPPORTED_CUTOFFS.contains(&self.shell_cutoff) {
            return invalid(format!(
                "unsupported shell cutoff {}; use one of {SUPPORTED_CUTOFFS:?}",
                self.shell_cutoff
            ));
        }
        Ok(())
    }

    pub fn is_cancelling(&self) -> bool {
        (self.vprime / self.v - 125.0 / 64.0).abs() < 1e-12
    }

    pub fn without_patterns(&self) -> Self {
        RydbergParams { h: 0.0, hprime: 0.0, mu: 0.0, ..self.clone() }
    }
}

pub fn is_even_site(x: i32, r: i32) -> bool {
    (x + r).rem_euclid(2) == 0
}

/// Occupation of atom `(x, r)` in a column whose interface height is `y`.
pub fn wall_occupied(x: i32, r: i32, y: i32) -> bool {
    if r <= y - 2 {
        is_even_site(x, r)
    } else if r >= y + 1 {
        !is_even_site(x, r)
    } else {
        false
    }
}

/// Height of the vacuum path at column `x`.
pub fn vacuum_height(x: i32) -> i32 {
    x.rem_euclid(2)
}

/// Gradient profile `f(r) = r + [r even]`.
pub fn gradient_profile(r: i32) -> f64 {
    (r + (r.rem_euclid(2) == 0) as i32) as f64
}

/// Classical energy function of the array: detuning, patterns and the
/// truncated van-der-Waals couplings.
#[derive(Clone, Debug)]
pub struct ArrayModel {
    pub params: RydbergParams,
    couplings: Vec<(i32, i32, f64)>,
}

impl ArrayModel {
    pub fn new(params: &RydbergParams) -> Result<Self> {
        params.validate()?;
        let table = shell_table(params.shell_cutoff)?;
        let couplings = table
            .displacements()
            .into_iter()
            .map(|(dx, dy)| (dx, dy, Self::pair(params, dx, dy)))
            .collect();
        Ok(ArrayModel { params: params.clone(), couplings })
    }

    fn pair(p: &RydbergParams, dx: i32, dy: i32) -> f64 {
        let r2 = (dx * dx + dy * dy) as f64;
        let s = if is_even_site(dx, dy) { p.v } else { p.vprime };
        s / (r2 * r2 * r2)
    }

    pub fn couplings(&self) -> &[(i32, i32, f64)] {
        &self.couplings
    }

    /// Coupling for a displacement, zero beyond the cutoff.
    pub fn coupling(&self, dx: i32, dy: i32) -> f64 {
        let r2 = (dx * dx + dy * dy) as u32;
        if r2 == 0 || r2 > self.params.shell_cutoff {
            0.0
        } else {
            Self::pair(&self.params, dx, dy)
        }
    }

    /// Longitudinal pattern on atom `(x, r)`; zero on the odd sublattice.
    pub fn pattern(&self, x: i32, r: i32) -> f64 {
        if !is_even_site(x, r) {
            return 0.0;
        }
        let p = &self.params;
        let stagger = if r.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        p.h + p.hprime * gradient_profile(r) + p.mu * stagger
    }

    /// Single-atom energy of an excitation.
    pub fn onsite(&self, x: i32, r: i32) -> f64 {
        -(self.params.delta + self.pattern(x, r))
    }

    /// Energy change when the atoms in `flips` take the given values and all
    /// others follow `occ`.
    pub fn energy_change(&self, occ: &dyn Fn(i32, i32) -> bool, flips: &[((i32, i32), bool)]) -> f64 {
        let current = |s: (i32, i32)| flips.iter().find(|f| f.0 == s).map(|f| f.1);
        let mut e = 0.0;
        for (k, &((x, r), new)) in flips.iter().enumerate() {
            let old = occ(x, r);
            let dn = new as i32 as f64 - old as i32 as f64;
            e += self.onsite(x, r) * dn;
            for &(dx, dy, u) in &self.couplings {
                let t = (x + dx, r + dy);
                match current(t) {
                    None => {
                        if occ(t.0, t.1) {
                            e += u * dn;
                        }
                    }
                    Some(new_t) => {
                        // count each flipped pair once
                        let j = flips.iter().position(|f| f.0 == t).unwrap();
                        if j > k {
                            let before = (old && occ(t.0, t.1)) as i32 as f64;
                            let after = (new && new_t) as i32 as f64;
                            e += u * (after - before);
                        }
                    }
                }
            }
        }
        e
    }
}
