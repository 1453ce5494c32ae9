use super::fcs::fcs_distribution;
use super::free::{correlation_matrix, entanglement_spectrum};
use super::DiracParams;
use crate::error::{invalid, Error, Result};
use quadrature::double_exponential;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const QUAD_TOL: f64 = 1e-9;

/// Half-band dispersion `E_k = sqrt(m^2 + sin^2 k / a^2)` at temperature `T`.
#[derive(Clone, Copy, Debug)]
pub struct ThermalBand {
    pub m: f64,
    pub a: f64,
    pub t: f64,
}

impl ThermalBand {
    pub fn from_params(p: &DiracParams) -> Result<Self> {
        if !(p.temperature > 0.0) {
            return invalid("thermal quantities need T > 0");
        }
        Ok(ThermalBand { m: p.m, a: p.a, t: p.temperature })
    }

    fn x(&self, k: f64) -> f64 {
        (self.m * self.m + (k.sin() / self.a).powi(2)).sqrt() / self.t
    }

    /// `int_{-pi/2}^{pi/2} dk/2pi f(E_k/T)` for even integrands.
    fn integrate(&self, f: impl Fn(f64) -> f64) -> Result<f64> {
        let g = |k: f64| f(self.x(k));
        let half = PI / 2.0;
        // thermal window near k = 0 sits at an endpoint of the first piece
        let split = (40.0 * self.a * self.t).min(half);
        let mut total = 0.0;
        for (lo, hi) in [(0.0, split), (split, half)] {
            if hi <= lo {
                continue;
            }
            let out = double_exponential::integrate(&g, lo, hi, QUAD_TOL * 1e-2);
            if !(out.error_estimate <= QUAD_TOL) || !out.integral.is_finite() {
                return Err(Error::Quadrature { tol: QUAD_TOL, err: out.error_estimate });
            }
            total += out.integral;
        }
        Ok(total / PI)
    }

    /// Scaled variance `sigma^2_T = int dk/2pi 1/(1 + cosh(E_k/T))`.
    pub fn sigma2(&self) -> Result<f64> {
        self.integrate(|x| 0.5 / (0.5 * x).cosh().powi(2))
    }

    /// Scaled cumulant generating function of the half-chain number per site.
    pub fn psi(&self, alpha: f64) -> Result<f64> {
        if alpha == 0.0 {
            return Ok(0.0);
        }
        let body = self.integrate(|x| log_cosh_sum(alpha, x) - log_cosh_sum(0.0, x))?;
        Ok(0.5 * alpha + body)
    }

    /// `d Psi / d alpha`.
    pub fn psi_prime(&self, alpha: f64) -> Result<f64> {
        let body = self.integrate(|x| {
            let m = alpha.abs().max(x);
            let sinh = 0.5 * ((alpha - m).exp() - (-alpha - m).exp());
            let cosh_a = 0.5 * ((alpha - m).exp() + (-alpha - m).exp());
            let cosh_x = 0.5 * ((x - m).exp() + (-x - m).exp());
            sinh / (cosh_a + cosh_x)
        })?;
        Ok(0.5 + body)
    }

    /// Legendre transform `Phi(nu) = sup_alpha [alpha nu - Psi(alpha)]`, `0 < nu < 1`.
    pub fn phi(&self, nu: f64) -> Result<f64> {
        if !(nu > 0.0 && nu < 1.0) {
            return invalid("Legendre transform defined for densities in (0, 1)");
        }
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        while self.psi_prime(lo)? > nu {
            lo *= 2.0;
            if lo < -700.0 {
                return invalid("density too close to 0");
            }
        }
        while self.psi_prime(hi)? < nu {
            hi *= 2.0;
            if hi > 700.0 {
                return invalid("density too close to 1");
            }
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.psi_prime(mid)? < nu {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 {
                break;
            }
        }
        let alpha = 0.5 * (lo + hi);
        Ok(alpha * nu - self.psi(alpha)?)
    }
}

/// `log(cosh a + cosh x)` without overflow.
fn log_cosh_sum(a: f64, x: f64) -> f64 {
    let m = a.abs().max(x.abs());
    let s = 0.5 * ((a - m).exp() + (-a - m).exp() + (x - m).exp() + (-x - m).exp());
    m + s.ln()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CgfResult {
    pub alpha: Vec<f64>,
    pub psi: Vec<f64>,
    pub sigma2: f64,
    /// Densities `Psi'(alpha)` and `Phi` at those densities.
    pub nu: Vec<f64>,
    pub phi: Vec<f64>,
}

pub fn scaled_cgf(p: &DiracParams, alpha_grid: &[f64]) -> Result<CgfResult> {
    p.validate()?;
    let band = ThermalBand::from_params(p)?;
    let sigma2 = band.sigma2()?;
    let mut psi = Vec::with_capacity(alpha_grid.len());
    let mut nu = Vec::with_capacity(alpha_grid.len());
    let mut phi = Vec::with_capacity(alpha_grid.len());
    for &a in alpha_grid {
        let s = band.psi(a)?;
        let d = band.psi_prime(a)?;
        psi.push(s);
        nu.push(d);
        phi.push(a * d - s);
    }
    Ok(CgfResult { alpha: alpha_grid.to_vec(), psi, sigma2, nu, phi })
}

/// Large-deviation estimate `2 exp(-L Phi(1/2 + (W+1)/L))` of the tail.
pub fn legendre_tail(band: &ThermalBand, size: usize, w: usize) -> Result<f64> {
    let nu = 0.5 + (w as f64 + 1.0) / size as f64;
    if nu >= 1.0 {
        return Ok(0.0);
    }
    Ok((2.0 * (-(size as f64) * band.phi(nu)?).exp()).min(1.0))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiniteTCutoff {
    pub w: usize,
    pub sigma2: f64,
    /// Tail of the exact thermal distribution at `W`, when checked.
    pub empirical_tail: Option<f64>,
    pub warnings: Vec<String>,
}

/// `W = ceil(sqrt(sigma^2 L log(L/eps)))`; checked against the exact
/// thermal distribution when `verify` is set (cost grows as `L^3`).
pub fn finite_t_cutoff(p: &DiracParams, size: usize, epsilon: f64, verify: bool) -> Result<FiniteTCutoff> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return invalid("epsilon must lie in (0, 1)");
    }
    let mut warnings = Vec::new();
    if p.temperature == 0.0 {
        warnings.push("T = 0: the thermal cutoff degenerates to W = 0; use the ground-state bound".into());
        return Ok(FiniteTCutoff { w: 0, sigma2: 0.0, empirical_tail: None, warnings });
    }
    let band = ThermalBand::from_params(p)?;
    let sigma2 = band.sigma2()?;
    let l = size as f64;
    let w = (sigma2 * l * (l / epsilon).ln()).sqrt().ceil() as usize;
    let empirical_tail = if verify {
        let q = DiracParams { size, ..p.clone() };
        let es = entanglement_spectrum(&correlation_matrix(&q)?, size)?;
        let f = fcs_distribution(&es)?;
        let tail = f.tail_at(w);
        if tail > epsilon {
            warnings.push(format!("exact tail {tail:.3e} exceeds epsilon at W = {w}"));
        }
        Some(tail)
    } else {
        None
    };
    Ok(FiniteTCutoff { w, sigma2, empirical_tail, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_log_cosh() {
        assert!((log_cosh_sum(0.3, 1.2) - (0.3f64.cosh() + 1.2f64.cosh()).ln()).abs() < 1e-14);
        assert!(log_cosh_sum(1.0, 2000.0).is_finite());
    }

    #[test]
    fn cgf_origin_and_symmetry() {
        let b = ThermalBand { m: 0.5, a: 1.0, t: 0.5 };
        assert_eq!(b.psi(0.0).unwrap(), 0.0);
        for a in [0.3, 1.1, 2.5] {
            let d = (b.psi(a).unwrap() - 0.5 * a) - (b.psi(-a).unwrap() + 0.5 * a);
            assert!(d.abs() < 1e-10);
        }
        assert!((b.psi_prime(0.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(b.phi(0.5).unwrap().abs() < 1e-10);
    }
}
