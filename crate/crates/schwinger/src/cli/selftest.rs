use super::{CliResult, Report, EXIT_CHECK, EXIT_OK};
use crate::bounds::{bernoulli_sum, bernoulli_sum_brute_force};
use crate::interface::verify_equivalence;
use crate::lattice::LatticeParams;
use crate::rydberg::{bulk_gaps, tail_couplings, tail_couplings_exact, virtual_denominators, RydbergParams, CANCELLATION_RATIO};
use clap::Args;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use serde_json::json;

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct SelftestArgs {}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CheckLine {
    fn new(name: &str, value: f64, target: f64, tol: f64) -> Self {
        CheckLine { name: name.into(), value, target, tol, pass: (value - target).abs() <= tol }
    }
}

/// Interaction-tail constants at `V = Delta = 1` with the cancelling `V'`,
/// against their reference values.
pub fn constant_checks() -> crate::Result<Vec<CheckLine>> {
    let p = RydbergParams::cancelling(1.0, 1.0, 0.0);
    let g = bulk_gaps(&p)?;
    let d = virtual_denominators(&p)?;
    let t = tail_couplings(&p)?;
    let c = d.constants(&p);
    let one = Ratio::from_integer(1);
    let exact = tail_couplings_exact(one, CANCELLATION_RATIO, p.shell_cutoff)?;
    let ratio_ok = exact.nn_coefficient == Ratio::from_integer(0) && CANCELLATION_RATIO == Ratio::new(125, 64);
    Ok(vec![
        CheckLine::new("even_shell_sum", g.even_shell_sum, 0.5783, 5e-5),
        CheckLine::new("odd_shell_sum", g.odd_shell_sum, 4.0734, 5e-4),
        CheckLine { name: "cancellation_ratio".into(), value: 125.0 / 64.0, target: 125.0 / 64.0, tol: 0.0, pass: ratio_ok },
        CheckLine::new("denominator_a", c[0], 0.3456, 5e-5),
        CheckLine::new("denominator_a_prime", c[1], 0.3425, 5e-5),
        CheckLine::new("denominator_b", c[2], 0.3422, 5e-5),
        CheckLine::new("window_upper", g.window[1], 2.2953, 5e-5),
        CheckLine::new("residual_tail", t.residual_coefficient, 0.0016, 5e-5),
    ])
}

fn equivalence_checks() -> crate::Result<Vec<CheckLine>> {
    let mut out = Vec::new();
    for w in 0..=2 {
        for (am, aq, theta) in [(0.7, 1.3, 0.9), (0.0, 1.0, 0.0), (2.0, 0.5, 3.0)] {
            let r = verify_equivalence(&LatticeParams::dimensionless(2, w, am, aq, theta))?;
            out.push(CheckLine::new(&format!("ising_L2_W{w}_am{am}"), r.max_abs_deviation, 0.0, 1e-12));
        }
    }
    Ok(out)
}

fn fcs_check() -> crate::Result<CheckLine> {
    let p: Vec<f64> = (0..12).map(|k| 1.0 / (1.0 + (1.3 * (k as f64 - 5.5)).exp())).collect();
    let a = bernoulli_sum(&p)?;
    let b = bernoulli_sum_brute_force(&p)?;
    let dev = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(CheckLine::new("fcs_brute_force_12", dev, 0.0, 1e-12))
}

pub fn run_selftest() -> crate::Result<Vec<CheckLine>> {
    let mut lines = constant_checks()?;
    lines.extend(equivalence_checks()?);
    lines.push(fcs_check()?);
    Ok(lines)
}

pub fn cmd_selftest(_: &SelftestArgs) -> CliResult<Report> {
    let lines = run_selftest()?;
    let mut text = String::new();
    for l in &lines {
        text.push_str(&format!(
            "{} {:<24} value={:.6e} target={:.6e} tol={:.1e}\n",
            if l.pass { "PASS" } else { "FAIL" },
            l.name,
            l.value,
            l.target,
            l.tol
        ));
    }
    let failed = lines.iter().filter(|l| !l.pass).count();
    text.push_str(&format!("{} checks, {} failed\n", lines.len(), failed));
    Ok(Report {
        params: json!({}),
        result: json!({"checks": lines, "failed": failed}),
        csv: None,
        text: Some(text),
        exit: if failed == 0 { EXIT_OK } else { EXIT_CHECK },
    })
}
