//! Free-fermion (q -> 0) bounds on electric-field fluctuations: half-chain
//! entanglement spectrum, full counting statistics of the left particle
//! number, thermal large deviations and the resulting truncation costs.

mod fcs;
mod free;
mod resources;
mod thermal;

pub use fcs::{
    bernoulli_sum, bernoulli_sum_brute_force, chernoff_bound, fcs_distribution, fcs_from_probabilities, ground_bound,
    tail_function, FcsResult, GroundBound,
};
pub use free::{
    correlation_length, correlation_matrix, dirac_single_particle, entanglement_spectrum, formula_rate, gauge_phases,
    linear_fit, real_hamiltonian, CorrelationLength, CorrelationMatrix, EntanglementSpectrum, SingleParticle,
    RELIABLE_P,
};
pub use resources::{resource_estimate, scaling_fit, ResourceConstants, ResourceEstimate, ResourceMode, ScalingFit};
pub use thermal::{finite_t_cutoff, legendre_tail, scaled_cgf, CgfResult, FiniteTCutoff, ThermalBand, QUAD_TOL};

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiracParams {
    /// Half the number of sites; the cut sits after site `L - 1`.
    #[serde(rename = "L")]
    pub size: usize,
    #[serde(default = "one")]
    pub a: f64,
    pub m: f64,
    #[serde(rename = "T", default)]
    pub temperature: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

fn one() -> f64 {
    1.0
}

impl DiracParams {
    /// Lattice units, `a = 1`.
    pub fn new(size: usize, am: f64, at: f64) -> Self {
        DiracParams { size, a: 1.0, m: am, temperature: at, boundary: Boundary::Open }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < 2 || self.size % 2 != 0 {
            return invalid("L must be even and at least 2");
        }
        if !(self.a > 0.0) || !self.m.is_finite() || !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return invalid("need a > 0, finite m and T >= 0");
        }
        Ok(())
    }
}

/// Entanglement spectrum of the left half in one call.
pub fn half_chain_spectrum(p: &DiracParams) -> Result<EntanglementSpectrum> {
    let c = correlation_matrix(p)?;
    entanglement_spectrum(&c, p.size)
}
