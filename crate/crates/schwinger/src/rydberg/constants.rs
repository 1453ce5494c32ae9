use super::shells::{shell_table, Parity, ShellTable};
use super::{wall_occupied, ArrayModel, RydbergParams, CANCELLATION_RATIO};
use crate::error::{invalid, Result};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Bulk de-excitation gap of the checkerboard.
    pub delta_bar: f64,
    /// Blockade-violating excitation gap of the checkerboard.
    pub delta_bar_prime: f64,
    /// Interface excitation gap, configuration-independent part.
    pub delta_bar_double_prime: f64,
    /// Range of interface excitation gaps over all local wall shapes.
    pub double_prime_band: [f64; 2],
    pub even_shell_sum: f64,
    pub odd_shell_sum: f64,
    /// Allowed detuning interval `[lower, upper]`.
    pub window: [f64; 2],
    pub window_ok: bool,
    /// `Delta - lower` and `upper - Delta`.
    pub margins: [f64; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailCouplings {
    pub nn_coefficient: f64,
    pub residual_coefficient: f64,
    pub cancellation_ratio: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactTailCouplings {
    pub nn_coefficient: Ratio<i64>,
    pub residual_coefficient: Ratio<i64>,
}

/// Energy denominators `E_initial - E_virtual` of one local wall shape
/// around a valley at column 0.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShapeDenominators {
    /// Height steps at columns -2, -3, 2, 3 (relative to the valley neighbours).
    pub steps: [i8; 4],
    pub respecting_initial: f64,
    pub respecting_final: f64,
    pub violating_initial: f64,
    pub violating_final: f64,
}

impl ShapeDenominators {
    pub fn respecting_element(&self) -> f64 {
        0.5 * (1.0 / self.respecting_initial + 1.0 / self.respecting_final)
    }
    pub fn violating_element(&self) -> f64 {
        0.5 * (1.0 / self.violating_initial + 1.0 / self.violating_final)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DenominatorReport {
    /// Largest respecting denominator shape and its flipped partner.
    pub delta_e_a: f64,
    pub delta_e_a_prime: f64,
    /// Smallest respecting denominator shape and its flipped partner.
    pub delta_e_b: f64,
    pub delta_e_b_prime: f64,
    /// Shell sums of the two far regions, identical for every shape.
    pub delta_e_region_a: f64,
    pub delta_e_region_b: f64,
    /// Region-sum closed forms for shapes a, a', b, b' (may omit terms).
    pub closed_form: [f64; 4],
    pub delta_tilde: f64,
    pub delta_tilde_prime: f64,
    /// Max over shapes of `|<1/dE> - 1/dE_ref| / (1/dE_ref)`.
    pub epsilon_spread: f64,
    pub epsilon_prime_spread: f64,
    /// Max over shapes of the denominator shift `|eps|` in units of V.
    pub epsilon_over_v: f64,
    pub epsilon_prime_over_v: f64,
    pub shapes: Vec<ShapeDenominators>,
    pub warnings: Vec<String>,
}

impl DenominatorReport {
    /// Denominator constants `X = delta_e + Delta` per unit V.
    pub fn constants(&self, p: &RydbergParams) -> [f64; 4] {
        [self.delta_e_a, self.delta_e_a_prime, self.delta_e_b, self.delta_e_b_prime].map(|d| (d + p.delta) / p.v)
    }
}

fn shell_weight(table: &ShellTable, r2: u32) -> Ratio<i64> {
    table
        .shells
        .iter()
        .find(|s| s.r2 == r2)
        .map(|s| s.weight_exact)
        .unwrap_or(Ratio::from_integer(0))
}

fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn tail_couplings_exact(v: Ratio<i64>, vprime: Ratio<i64>, cutoff: u32) -> Result<ExactTailCouplings> {
    let t = shell_table(cutoff)?;
    let nn = -(v * shell_weight(&t, 4) - vprime * shell_weight(&t, 5));
    let residual = vprime * (shell_weight(&t, 9) + shell_weight(&t, 13)) - v * shell_weight(&t, 10) * 2;
    Ok(ExactTailCouplings { nn_coefficient: nn, residual_coefficient: residual })
}

/// Tail energy of an occupation string padded on both sides by vacuum.
pub fn tail_energy(t: &TailCouplings, occ: &[u8]) -> f64 {
    let pad = [1u8, 0, 1, 0, 1, 0];
    let ext: Vec<u8> = pad.iter().chain(occ.iter()).chain(pad.iter()).copied().collect();
    let nn = ext.windows(2).filter(|w| w[0] == w[1]).count() as f64;
    let nnn = ext.windows(3).filter(|w| w[0] == w[1] && w[1] == w[2]).count() as f64;
    t.nn_coefficient * nn + t.residual_coefficient * nnn
}

pub fn tail_couplings(p: &RydbergParams) -> Result<TailCouplings> {
    p.validate()?;
    let t = shell_table(p.shell_cutoff)?;
    let w = |r2| ratio_to_f64(shell_weight(&t, r2));
    Ok(TailCouplings {
        nn_coefficient: -(p.v * w(4) - p.vprime * w(5)),
        residual_coefficient: p.vprime * (w(9) + w(13)) - 2.0 * p.v * w(10),
        cancellation_ratio: ratio_to_f64(CANCELLATION_RATIO),
        ratio: p.vprime / p.v,
    })
}

/// Heights of a local shape: valley `y_0 = 0`, `y_{+-1} = 1`, then free steps.
fn shape_height(steps: [i8; 4], x: i32) -> i32 {
    let side = if x < 0 { [steps[0], steps[1]] } else { [steps[2], steps[3]] };
    let ax = x.abs();
    match ax {
        0 => 0,
        1 => 1,
        2 => 1 + side[0] as i32,
        _ => {
            let y3 = 1 + side[0] as i32 + side[1] as i32;
            y3 + (ax - 3) % 2
        }
    }
}

fn scan_shapes(p: &RydbergParams) -> Result<Vec<ShapeDenominators>> {
    let model = ArrayModel::new(&p.without_patterns())?;
    let mut out = Vec::with_capacity(16);
    for code in 0..16u8 {
        let steps = [0, 1, 2, 3].map(|b| if code >> b & 1 == 1 { 1i8 } else { -1 });
        let initial = |x: i32, r: i32| wall_occupied(x, r, shape_height(steps, x));
        let fin = |x: i32, r: i32| {
            let y = if x == 0 { 2 } else { shape_height(steps, x) };
            wall_occupied(x, r, y)
        };
        // flip pair: even atom (0, 0), odd atom (0, 1)
        let d = |occ: &dyn Fn(i32, i32) -> bool, site: (i32, i32), val: bool| -model.energy_change(occ, &[(site, val)]);
        out.push(ShapeDenominators {
            steps,
            respecting_initial: d(&initial, (0, 1), false),
            respecting_final: d(&fin, (0, 0), false),
            violating_initial: d(&initial, (0, 0), true),
            violating_final: d(&fin, (0, 1), true),
        });
    }
    Ok(out)
}

pub fn virtual_denominators(p: &RydbergParams) -> Result<DenominatorReport> {
    let shapes = scan_shapes(p)?;
    let mut warnings = Vec::new();
    if !p.is_cancelling() {
        warnings.push(format!(
            "V'/V = {} differs from the cancellation ratio 125/64; nearest-neighbour tails remain",
            p.vprime / p.v
        ));
    }
    let cmp = |a: &f64, b: &f64| a.partial_cmp(b).unwrap();
    // delta_e = -Delta + X; largest X is the largest delta_e
    let a = shapes.iter().max_by(|s, t| cmp(&s.respecting_initial, &t.respecting_initial)).unwrap();
    let b = shapes.iter().min_by(|s, t| cmp(&s.respecting_initial, &t.respecting_initial)).unwrap();
    let all_resp = shapes.iter().flat_map(|s| [s.respecting_initial, s.respecting_final]);
    let all_viol = shapes.iter().flat_map(|s| [s.violating_initial, s.violating_final]);
    let delta_tilde = -all_resp.fold(f64::INFINITY, f64::min);
    let delta_tilde_prime = -all_viol.fold(f64::NEG_INFINITY, f64::max);
    if !(delta_tilde > 0.0) || !(delta_tilde_prime > 0.0) {
        return invalid(format!(
            "outside the perturbative window: Delta~ = {delta_tilde:.6}, Delta~' = {delta_tilde_prime:.6} must both be positive"
        ));
    }

    let (v, vp, delta) = (p.v, p.vprime, p.delta);
    let region_a = -v * (2.0 / 8.0 + 1.0 / 64.0 + 2.0 / 512.0 + 2.0 / 1000.0);
    let region_b = -vp * (2.0 / 125.0 + 1.0 / 729.0 + 1.0 / 2197.0);
    let base = delta + region_a + region_b;
    let closed_form = [
        base - 2.0 * vp / 125.0 - 2.0 * vp / 729.0 - 2.0 * vp / 2197.0,
        base - 2.0 * v / 64.0 - 4.0 * v / 1000.0,
        base - 2.0 * v / 64.0 - 2.0 * v / 1000.0 - 2.0 * vp / 2197.0,
        base - 2.0 * vp / 125.0 - 2.0 * v / 1000.0 - 2.0 * vp / 2197.0,
    ]
    .map(|inc| -inc);

    let (mut eps, mut eps_p, mut eps_v, mut eps_pv) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for s in &shapes {
        let r = s.respecting_element();
        let r0 = -1.0 / delta_tilde;
        eps = eps.max(((r - r0) / r0).abs());
        eps_v = eps_v.max((delta_tilde + 1.0 / r).abs() / v);
        let q = s.violating_element();
        let q0 = -1.0 / delta_tilde_prime;
        eps_p = eps_p.max(((q - q0) / q0).abs());
        eps_pv = eps_pv.max((delta_tilde_prime + 1.0 / q).abs() / v);
    }

    Ok(DenominatorReport {
        delta_e_a: a.respecting_initial,
        delta_e_a_prime: a.respecting_final,
        delta_e_b: b.respecting_initial,
        delta_e_b_prime: b.respecting_final,
        delta_e_region_a: region_a,
        delta_e_region_b: region_b,
        closed_form,
        delta_tilde,
        delta_tilde_prime,
        epsilon_spread: eps,
        epsilon_prime_spread: eps_p,
        epsilon_over_v: eps_v,
        epsilon_prime_over_v: eps_pv,
        shapes,
        warnings,
    })
}

/// Second-order hopping amplitude `t_eff = (Omega/2)^2 (1/Delta~ + 1/Delta~')`;
/// the effective interface hopping is `-t_eff`.
pub fn effective_kinetic(p: &RydbergParams) -> Result<f64> {
    let d = virtual_denominators(p)?;
    Ok(kinetic_from(p.omega, &d))
}

pub(crate) fn kinetic_from(omega: f64, d: &DenominatorReport) -> f64 {
    0.25 * omega * omega * (1.0 / d.delta_tilde + 1.0 / d.delta_tilde_prime)
}

/// Interface excitation gaps of the ground-state wall atoms, over all local
/// shapes of the columns within interaction range.
fn interface_excitation_band(model: &ArrayModel) -> [f64; 2] {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for code in 0..64u8 {
        let mut y = [0i32; 7];
        for k in 0..3 {
            let up = |bit: u8| if code >> bit & 1 == 1 { 1 } else { -1 };
            y[4 + k] = y[3 + k] + up(k as u8);
            y[2 - k] = y[3 - k] + up(3 + k as u8);
        }
        let height = |x: i32| {
            if x.abs() <= 3 {
                y[(x + 3) as usize]
            } else {
                let edge = if x < 0 { y[0] } else { y[6] };
                edge + (x.abs() - 3) % 2
            }
        };
        let occ = |x: i32, r: i32| wall_occupied(x, r, height(x));
        for r in [y[3] - 1, y[3]] {
            let gap = model.energy_change(&occ, &[((0, r), true)]);
            lo = lo.min(gap);
            hi = hi.max(gap);
        }
    }
    [lo, hi]
}

pub fn bulk_gaps(p: &RydbergParams) -> Result<StabilityReport> {
    p.validate()?;
    let table = shell_table(p.shell_cutoff)?;
    let even = ratio_to_f64(table.parity_sum(Parity::Even));
    let odd = ratio_to_f64(table.parity_sum(Parity::Odd));
    let delta_bar = p.delta - even * p.v;
    let delta_bar_prime = odd * p.vprime - p.delta;
    let delta_bar_double_prime =
        -p.delta + p.vprime + 2.0 * p.v / 8.0 + p.v / 64.0 + 2.0 * p.vprime / 125.0;
    let model = ArrayModel::new(&p.without_patterns())?;
    let double_prime_band = interface_excitation_band(&model);
    // upper edge: smallest blockade-violating virtual energy of the interface
    let upper = scan_shapes(p)?
        .iter()
        .flat_map(|s| [s.violating_initial, s.violating_final])
        .fold(f64::NEG_INFINITY, f64::max);
    let upper = p.delta - upper;
    let window = [even * p.v, upper];
    let margins = [p.delta - window[0], window[1] - p.delta];
    Ok(StabilityReport {
        delta_bar,
        delta_bar_prime,
        delta_bar_double_prime,
        double_prime_band,
        even_shell_sum: even,
        odd_shell_sum: odd,
        window,
        window_ok: margins[0] > 0.0 && margins[1] > 0.0,
        margins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rydberg::is_even_site;

    /// Checkerboard energy cost of de-exciting an even atom, from the engine.
    fn checkerboard_deexcitation(model: &ArrayModel) -> f64 {
        let occ = |x: i32, r: i32| is_even_site(x, r);
        model.energy_change(&occ, &[((0, 0), false)])
    }

    fn cancel() -> RydbergParams {
        RydbergParams::cancelling(1.0, 1.0, 0.0)
    }

    #[test]
    fn shell_table_contents() {
        let t = shell_table(13).unwrap();
        let got: Vec<(u32, usize, Parity)> = t.shells.iter().map(|s| (s.r2, s.multiplicity, s.parity)).collect();
        use Parity::*;
        assert_eq!(
            got,
            vec![(1, 4, Odd), (2, 4, Even), (4, 4, Even), (5, 8, Odd), (8, 4, Even), (9, 4, Odd), (10, 8, Even), (13, 8, Odd)]
        );
        assert_eq!(t.total_multiplicity(), 44);
        assert_eq!(shell_weight(&t, 5), Ratio::new(1, 125));
        let t2 = shell_table(2).unwrap();
        assert_eq!(t2.shells.len(), 2);
        assert!(shell_table(3).is_err());
        assert!(shell_table(18).is_err());
    }

    #[test]
    fn bulk_gap_matches_engine() {
        let p = cancel();
        let g = bulk_gaps(&p).unwrap();
        let model = ArrayModel::new(&p).unwrap();
        assert!((checkerboard_deexcitation(&model) - g.delta_bar).abs() < 1e-12);
        assert!((g.even_shell_sum - 0.5783).abs() < 5e-5);
        assert!(g.window_ok);
    }

    #[test]
    fn exact_cancellation() {
        let one = Ratio::from_integer(1);
        let t = tail_couplings_exact(one, CANCELLATION_RATIO, 13).unwrap();
        assert_eq!(t.nn_coefficient, Ratio::from_integer(0));
        let t1 = tail_couplings_exact(one, one, 13).unwrap();
        assert_eq!(t1.nn_coefficient, -(Ratio::new(1, 64) - Ratio::new(1, 125)));
    }

    #[test]
    fn denominators_linear_in_energies() {
        let p = RydbergParams { vprime: 1.9, ..cancel() };
        let q = RydbergParams { v: 2.0, vprime: 3.8, delta: 2.0, ..cancel() };
        let (a, b) = (virtual_denominators(&p).unwrap(), virtual_denominators(&q).unwrap());
        assert!((2.0 * a.delta_tilde - b.delta_tilde).abs() < 1e-12);
        assert!((2.0 * a.delta_tilde_prime - b.delta_tilde_prime).abs() < 1e-12);
        let (ga, gb) = (bulk_gaps(&p).unwrap(), bulk_gaps(&q).unwrap());
        assert!((2.0 * ga.delta_bar_prime - gb.delta_bar_prime).abs() < 1e-12);
        assert!((2.0 * ga.double_prime_band[0] - gb.double_prime_band[0]).abs() < 1e-12);
    }

    #[test]
    fn mirrored_shapes_swap_initial_and_final() {
        let d = virtual_denominators(&cancel()).unwrap();
        // the partner of the largest shape is the smallest final value of its class
        assert!(d.delta_e_a > d.delta_e_a_prime);
        assert!((d.delta_e_b - d.delta_e_b_prime).abs() < 1e-12);
        assert_eq!(d.shapes.len(), 16);
    }
}
