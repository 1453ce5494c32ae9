use super::constants::{kinetic_from, tail_couplings, virtual_denominators, bulk_gaps, DenominatorReport, StabilityReport};
use super::{is_even_site, ArrayModel, RydbergParams};
use crate::error::{invalid, Result};
use crate::lattice::LatticeParams;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignRequest {
    pub lattice: LatticeParams,
    #[serde(rename = "V")]
    pub v: f64,
    /// Defaults to the cancellation point `125 V / 64`.
    #[serde(rename = "Vprime", default)]
    pub vprime: Option<f64>,
    #[serde(rename = "Delta")]
    pub delta: f64,
    #[serde(rename = "Omega_max")]
    pub omega_max: f64,
    /// Target interface hopping in array units; `None` uses `Omega_max`.
    #[serde(default)]
    pub t_target: Option<f64>,
    #[serde(default = "default_factor")]
    pub factor: f64,
    #[serde(default)]
    pub rabi_compensation: bool,
    #[serde(default = "default_cutoff")]
    pub shell_cutoff: u32,
}

fn default_factor() -> f64 {
    5.0
}
fn default_cutoff() -> u32 {
    13
}

impl DesignRequest {
    pub fn new(lattice: LatticeParams, v: f64, delta: f64, omega_max: f64) -> Self {
        DesignRequest {
            lattice,
            v,
            vprime: None,
            delta,
            omega_max,
            t_target: None,
            factor: 5.0,
            rabi_compensation: false,
            shell_cutoff: 13,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Species {
    /// Even sublattice, carries the longitudinal patterns.
    A,
    B,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Atom {
    pub x: i32,
    pub y: i32,
    pub species: Species,
    pub detuning: f64,
    pub omega: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainRatio {
    pub name: String,
    pub value: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DesignReport {
    pub params: RydbergParams,
    /// Array energy per unit of lattice energy.
    pub energy_scale: f64,
    pub t_eff: f64,
    pub stability: StabilityReport,
    pub denominators: DenominatorReport,
    pub residual_coefficient: f64,
    pub ratios: Vec<ChainRatio>,
    pub feasible: bool,
    pub atoms: Vec<Atom>,
    pub warnings: Vec<String>,
}

/// Second-order hopping for a process whose even atom carries pattern `p`.
fn local_kinetic_factor(p: f64, d: &DenominatorReport) -> f64 {
    let (dt, dp) = (d.delta_tilde, d.delta_tilde_prime);
    0.5 * (1.0 / dt + 1.0 / (dt + p)) + 0.5 * (1.0 / dp + 1.0 / (dp - p))
}

/// Rabi frequency of atom `(x, r)`. With compensation the even atom of each
/// hopping pair is rescaled so that every pair hops at the uniform rate.
pub fn atom_rabi(model: &ArrayModel, d: &DenominatorReport, x: i32, r: i32, compensate: bool) -> f64 {
    let omega = model.params.omega;
    if !compensate || !is_even_site(x, r) {
        return omega;
    }
    let uniform = 1.0 / d.delta_tilde + 1.0 / d.delta_tilde_prime;
    omega * uniform / local_kinetic_factor(model.pattern(x, r), d)
}

/// Chooses Rabi frequency and pattern amplitudes reproducing the lattice
/// Hamiltonian, up to the overall energy scale, on the interface band.
pub fn dictionary_solve(req: &DesignRequest) -> Result<DesignReport> {
    let lat = &req.lattice;
    lat.validate()?;
    if !(req.omega_max > 0.0) || !(req.factor > 0.0) {
        return invalid("Omega_max and factor must be positive");
    }
    let base = RydbergParams {
        v: req.v,
        vprime: req.vprime.unwrap_or(req.v * 125.0 / 64.0),
        omega: 0.0,
        delta: req.delta,
        h: 0.0,
        hprime: 0.0,
        mu: 0.0,
        shell_cutoff: req.shell_cutoff,
    };
    base.validate()?;
    let stability = bulk_gaps(&base)?;
    if !stability.window_ok {
        return invalid(format!(
            "Delta = {} outside the stability window [{:.6}, {:.6}]",
            req.delta, stability.window[0], stability.window[1]
        ));
    }
    let d = virtual_denominators(&base)?;
    let k = 1.0 / d.delta_tilde + 1.0 / d.delta_tilde_prime;
    let omega = match req.t_target {
        None => req.omega_max,
        Some(t) if t > 0.0 => {
            let o = 2.0 * (t / k).sqrt();
            if o > req.omega_max {
                return invalid(format!(
                    "t_eff = {t} needs Omega = {o:.6} above Omega_max = {}",
                    req.omega_max
                ));
            }
            o
        }
        Some(_) => return invalid("t_target must be positive"),
    };
    let t_eff = kinetic_from(omega, &d);
    // lattice hopping 1/(2a) maps to t_eff
    let s = 2.0 * lat.a * t_eff;
    let aq2 = lat.a * lat.q * lat.q;
    let params = RydbergParams {
        omega,
        h: s * aq2 * lat.theta / (2.0 * PI),
        hprime: -s * aq2 / 2.0,
        mu: -2.0 * s * lat.m,
        ..base
    };
    let tails = tail_couplings(&params)?;
    let residual = tails.residual_coefficient.abs().max(tails.nn_coefficient.abs());

    let kinetic_scale = omega * omega * k;
    let mut ratios = Vec::new();
    let mut push = |name: &str, num: f64, den: f64| {
        if num != 0.0 && den != 0.0 {
            let value = num.abs() / den.abs();
            ratios.push(ChainRatio { name: name.into(), value, ok: value >= req.factor });
        }
    };
    push("h/tail", params.h, residual);
    push("hprime/tail", params.hprime, residual);
    push("mu/h", params.mu, params.h);
    push("mu/hprime", params.mu, params.hprime);
    push("kinetic/mu", kinetic_scale, params.mu);
    push("V/kinetic", params.v, kinetic_scale);
    let feasible = ratios.iter().all(|r| r.ok);

    let mut warnings = d.warnings.clone();
    if !feasible {
        let bad: Vec<&str> = ratios.iter().filter(|r| !r.ok).map(|r| r.name.as_str()).collect();
        warnings.push(format!("inequality chain violated for {}", bad.join(", ")));
    }

    let model = ArrayModel::new(&params)?;
    let w = lat.cutoff as i32;
    let cols = 2 * lat.size as i32;
    let mut atoms = Vec::new();
    for x in -1..=cols + 1 {
        for y in -2 * w - 2..=2 * w + 2 {
            let even = is_even_site(x, y);
            atoms.push(Atom {
                x,
                y,
                species: if even { Species::A } else { Species::B },
                detuning: params.delta + model.pattern(x, y),
                omega: atom_rabi(&model, &d, x, y, req.rabi_compensation),
            });
        }
    }

    Ok(DesignReport {
        params,
        energy_scale: s,
        t_eff,
        stability,
        denominators: d,
        residual_coefficient: tails.residual_coefficient,
        ratios,
        feasible,
        atoms,
        warnings,
    })
}
