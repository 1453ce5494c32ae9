use super::thermal::ThermalBand;
use crate::error::{invalid, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResourceMode {
    T0,
    #[serde(rename = "finiteT")]
    FiniteT,
}

/// Unspecified prefactors of the scaling laws; mass and temperature in units of `1/xi`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResourceConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub m_xi: f64,
    pub t_xi: f64,
}

impl Default for ResourceConstants {
    fn default() -> Self {
        ResourceConstants { c1: 1.0, c2: 1.0, c3: 1.0, c4: 1.0, m_xi: 1.0, t_xi: 1.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub epsilon: f64,
    pub mode: ResourceMode,
    pub ell_over_xi: f64,
    pub a_over_xi: f64,
    /// Half the number of sites.
    #[serde(rename = "L")]
    pub size: usize,
    #[serde(rename = "W")]
    pub cutoff: usize,
    /// Qubits / atoms `2L (2W + 2)`.
    #[serde(rename = "N")]
    pub atoms: f64,
    pub sigma2: Option<f64>,
}

pub fn resource_estimate(epsilon: f64, mode: ResourceMode, c: &ResourceConstants) -> Result<ResourceEstimate> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return invalid("epsilon must lie in (0, 1]");
    }
    if [c.c1, c.c2, c.c3, c.c4, c.m_xi, c.t_xi].iter().any(|x| !(*x > 0.0)) {
        return invalid("resource constants must be positive");
    }
    let ell_over_xi = c.c1 / epsilon;
    let a_over_xi = c.c2 * epsilon;
    let raw = ell_over_xi / (2.0 * a_over_xi);
    let size = ((raw / 2.0).ceil() as usize * 2).max(2);
    let log_inv = (1.0 / epsilon).ln();
    let (cutoff, sigma2) = match mode {
        ResourceMode::T0 => ((c.c3 * log_inv * log_inv).ceil() as usize, None),
        ResourceMode::FiniteT => {
            let band = ThermalBand { m: a_over_xi * c.m_xi, a: 1.0, t: a_over_xi * c.t_xi };
            let s2 = band.sigma2()?;
            ((c.c4 * (s2 * size as f64 * log_inv).sqrt()).ceil() as usize, Some(s2))
        }
    };
    let cutoff = cutoff.max(1);
    Ok(ResourceEstimate {
        epsilon,
        mode,
        ell_over_xi,
        a_over_xi,
        size,
        cutoff,
        atoms: (2 * size * (2 * cutoff + 2)) as f64,
        sigma2,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingFit {
    pub mode: ResourceMode,
    pub points: usize,
    /// Slope of `log N` against `log(1/eps)`.
    pub plain_slope: f64,
    /// Power-law exponent with the polylog factor fitted separately:
    /// `log N = exponent log(1/eps) + polylog_power log log(1/eps) + c`.
    pub exponent: f64,
    pub polylog_power: f64,
    pub table: Vec<ResourceEstimate>,
}

/// Regression over `points` log-spaced targets in `[eps_min, eps_max]`.
pub fn scaling_fit(
    mode: ResourceMode,
    eps_min: f64,
    eps_max: f64,
    points: usize,
    c: &ResourceConstants,
) -> Result<ScalingFit> {
    if points < 4 || !(eps_min > 0.0 && eps_min < eps_max && eps_max < 1.0) {
        return invalid("need at least 4 points in 0 < eps_min < eps_max < 1");
    }
    let mut table = Vec::with_capacity(points);
    for i in 0..points {
        let t = i as f64 / (points - 1) as f64;
        let eps = (eps_min.ln() + t * (eps_max.ln() - eps_min.ln())).exp();
        table.push(resource_estimate(eps, mode, c)?);
    }
    let x: Vec<f64> = table.iter().map(|r| (1.0 / r.epsilon).ln()).collect();
    let y: Vec<f64> = table.iter().map(|r| r.atoms.ln()).collect();
    let (plain_slope, _) = super::free::linear_fit(&x, &y);
    let design = DMatrix::from_fn(points, 3, |i, j| match j {
        0 => x[i],
        1 => x[i].ln(),
        _ => 1.0,
    });
    let rhs = DVector::from_vec(y);
    let sol = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| crate::error::Error::Check(format!("scaling regression failed: {e}")))?;
    Ok(ScalingFit { mode, points, plain_slope, exponent: sol[0], polylog_power: sol[1], table })
}
