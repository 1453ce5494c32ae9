use crate::error::{invalid, Result};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

pub const SUPPORTED_CUTOFFS: [u32; 8] = [1, 2, 4, 5, 8, 9, 10, 13];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    /// Same sublattice, coupling V.
    Even,
    /// Opposite sublattice, coupling V'.
    Odd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub r2: u32,
    pub multiplicity: usize,
    pub parity: Parity,
    /// 1/r^6 as an exact fraction.
    #[serde(skip)]
    pub weight_exact: Ratio<i64>,
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShellTable {
    pub cutoff: u32,
    pub shells: Vec<Shell>,
}

impl ShellTable {
    pub fn total_multiplicity(&self) -> usize {
        self.shells.iter().map(|s| s.multiplicity).sum()
    }

    /// Every displacement with `0 < r^2 <= cutoff`.
    pub fn displacements(&self) -> Vec<(i32, i32)> {
        let r = (self.cutoff as f64).sqrt() as i32 + 1;
        let mut out = Vec::new();
        for dx in -r..=r {
            for dy in -r..=r {
                let r2 = (dx * dx + dy * dy) as u32;
                if r2 > 0 && r2 <= self.cutoff {
                    out.push((dx, dy));
                }
            }
        }
        out
    }

    /// Sum of multiplicity times weight over shells of one parity.
    pub fn parity_sum(&self, parity: Parity) -> Ratio<i64> {
        self.shells
            .iter()
            .filter(|s| s.parity == parity)
            .map(|s| s.weight_exact * s.multiplicity as i64)
            .fold(Ratio::from_integer(0), |a, b| a + b)
    }
}

pub fn shell_table(cutoff: u32) -> Result<ShellTable> {
    if !SUPPORTED_CUTOFFS.contains(&cutoff) {
        return invalid(format!("unsupported shell cutoff {cutoff}; use one of {SUPPORTED_CUTOFFS:?}"));
    }
    let mut shells: Vec<Shell> = Vec::new();
    let r = (cutoff as f64).sqrt() as i32 + 1;
    for dx in -r..=r {
        for dy in -r..=r {
            let r2 = (dx * dx + dy * dy) as u32;
            if r2 == 0 || r2 > cutoff {
                continue;
            }
            let parity = if (dx + dy).rem_euclid(2) == 0 { Parity::Even } else { Parity::Odd };
            match shells.iter_mut().find(|s| s.r2 == r2) {
                Some(s) => s.multiplicity += 1,
                None => {
                    let w = Ratio::new(1, (r2 as i64).pow(3));
                    shells.push(Shell {
                        r2,
                        multiplicity: 1,
                        parity,
                        weight_exact: w,
                        weight: 1.0 / (r2 as f64).powi(3),
                    })
                }
            }
        }
    }
    shells.sort_by_key(|s| s.r2);
    Ok(ShellTable { cutoff, shells })
}
