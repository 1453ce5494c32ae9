use super::free::EntanglementSpectrum;
use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FcsResult {
    /// `P(N = n)`, `n = 0..=len`.
    pub probabilities: Vec<f64>,
    /// `P(|N - centre| > W)` for `W = 0..`.
    pub tail: Vec<f64>,
    pub centre: f64,
    pub mean: f64,
    pub variance: f64,
}

impl FcsResult {
    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }
    pub fn tail_at(&self, w: usize) -> f64 {
        self.tail.get(w).copied().unwrap_or(0.0)
    }
    /// Largest `|P(c + k) - P(c - k)|` about the centre.
    pub fn asymmetry(&self) -> f64 {
        let n = self.probabilities.len() - 1;
        let c = self.centre.round() as usize;
        (0..=c.min(n - c))
            .map(|k| (self.probabilities[c + k] - self.probabilities[c - k]).abs())
            .fold(0.0, f64::max)
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Distribution of a sum of independent Bernoulli variables, by polynomial
/// multiplication carried out in log space.
pub fn bernoulli_sum(p: &[f64]) -> Result<Vec<f64>> {
    if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return invalid("Bernoulli probabilities must lie in [0, 1]");
    }
    let mut logp = vec![0.0f64];
    for &x in p {
        let (l1, l0) = (x.ln(), (1.0 - x).ln());
        let mut next = vec![f64::NEG_INFINITY; logp.len() + 1];
        for (n, &lp) in logp.iter().enumerate() {
            next[n] = log_add(next[n], lp + l0);
            next[n + 1] = log_add(next[n + 1], lp + l1);
        }
        logp = next;
    }
    Ok(logp.into_iter().map(f64::exp).collect())
}

/// Exhaustive oracle over all `2^n` outcomes.
pub fn bernoulli_sum_brute_force(p: &[f64]) -> Result<Vec<f64>> {
    if p.len() > 24 {
        return invalid("brute force limited to 24 variables");
    }
    let mut out = vec![0.0; p.len() + 1];
    for s in 0u32..(1 << p.len()) {
        let prob: f64 = p
            .iter()
            .enumerate()
            .map(|(i, &x)| if s >> i & 1 == 1 { x } else { 1.0 - x })
            .product();
        out[s.count_ones() as usize] += prob;
    }
    Ok(out)
}

/// Tail `P(|N - centre| > W)` for each `W` with integer or half-integer centre.
pub fn tail_function(probabilities: &[f64], centre: f64) -> Vec<f64> {
    let n = probabilities.len() - 1;
    let wmax = centre.max(n as f64 - centre).ceil() as usize;
    (0..=wmax)
        .map(|w| {
            probabilities
                .iter()
                .enumerate()
                .filter(|&(k, _)| (k as f64 - centre).abs() > w as f64)
                .map(|(_, &x)| x)
                .sum()
        })
        .collect()
}

pub fn fcs_from_probabilities(p: &[f64]) -> Result<FcsResult> {
    let probabilities = bernoulli_sum(p)?;
    let centre = p.len() as f64 / 2.0;
    let mean: f64 = probabilities.iter().enumerate().map(|(k, &x)| k as f64 * x).sum();
    let variance: f64 = probabilities.iter().enumerate().map(|(k, &x)| (k as f64 - mean).powi(2) * x).sum();
    let tail = tail_function(&probabilities, centre);
    Ok(FcsResult { probabilities, tail, centre, mean, variance })
}

/// Half-chain particle-number statistics; the field on the middle bond is
/// `N_left - L/2`.
pub fn fcs_distribution(es: &EntanglementSpectrum) -> Result<FcsResult> {
    fcs_from_probabilities(&es.p)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroundBound {
    pub w: usize,
    pub empirical_tail: f64,
    pub lambda: f64,
    /// `lambda^(W+1) / (1 - lambda)`.
    pub lambda_bound: f64,
    /// `(1 - lambda^(W+1))^(1/(1-lambda))`, lower bound on `P(|N - L/2| <= W)`.
    pub mls_bound: f64,
    /// `(2L - 1)` times the single-bond bound.
    pub union_bound: f64,
}

pub fn ground_bound(fcs: &FcsResult, lambda: f64, w: usize, sites: usize) -> Result<GroundBound> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return invalid(format!("decay ratio lambda = {lambda} must lie in (0, 1)"));
    }
    let lw = lambda.powi(w as i32 + 1);
    let lambda_bound = lw / (1.0 - lambda);
    Ok(GroundBound {
        w,
        empirical_tail: fcs.tail_at(w),
        lambda,
        lambda_bound,
        mls_bound: (1.0 - lw).powf(1.0 / (1.0 - lambda)),
        union_bound: (sites.saturating_sub(1)) as f64 * lambda_bound,
    })
}

/// Two-sided Chernoff bound from the exact moment generating function,
/// `min_alpha sum_pm exp(-alpha (W+1)) E exp(+-alpha (N - c))`.
pub fn chernoff_bound(p: &[f64], w: usize) -> f64 {
    let c = p.len() as f64 / 2.0;
    let x = w as f64 + 1.0;
    let side = |sign: f64| {
        let log_mgf = |alpha: f64| {
            p.iter().map(|&q| (1.0 - q + q * (sign * alpha).exp()).ln()).sum::<f64>() - sign * alpha * c - alpha * x
        };
        // the exponent is convex in alpha; golden-section search on [0, 60]
        let (mut lo, mut hi) = (0.0f64, 60.0f64);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let a = hi - r * (hi - lo);
            let b = lo + r * (hi - lo);
            if log_mgf(a) < log_mgf(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        log_mgf(0.5 * (lo + hi)).min(0.0).exp()
    };
    (side(1.0) + side(-1.0)).min(1.0)
}
