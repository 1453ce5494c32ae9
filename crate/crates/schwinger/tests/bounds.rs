use proptest::prelude::*;
use schwinger::bounds::*;

#[test]
fn single_particle_spectrum() {
    let p = DiracParams::new(100, 1.0, 0.0);
    let sp = dirac_single_particle(&p).unwrap();
    let e = &sp.energies;
    let n = e.len();
    for k in 0..n {
        assert!((e[k] + e[n - 1 - k]).abs() < 1e-12);
    }
    assert!((e[n - 1] - 2f64.sqrt()).abs() / 2f64.sqrt() < 0.02);
    let h = &sp.hamiltonian;
    for j in 1..n {
        assert!((h[(j - 1, j)] - num_complex::Complex64::new(0.0, -0.5)).norm() < 1e-15);
    }
}

#[test]
fn massless_gap_closes_as_one_over_l() {
    let gap = |l: usize| {
        let e = dirac_single_particle(&DiracParams::new(l, 0.0, 0.0)).unwrap().energies;
        e.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min)
    };
    let (g1, g2) = (gap(20), gap(40));
    assert!((g1 / g2 - 2.0).abs() < 0.1, "{g1} {g2}");
}

#[test]
fn correlation_matrix_limits() {
    let c = correlation_matrix(&DiracParams::new(20, 0.5, 0.0)).unwrap();
    assert!((c.trace() - 20.0).abs() < 1e-10);
    assert!(c.projector_defect() < 1e-10);
    let hot = correlation_matrix(&DiracParams::new(10, 0.5, 1e6)).unwrap();
    for i in 0..20 {
        for j in 0..20 {
            let want = if i == j { 0.5 } else { 0.0 };
            assert!((hot.matrix[(i, j)] - want).abs() < 1e-6);
        }
    }
}

#[test]
fn spectrum_pairing_and_rates() {
    let mut last = 0.0;
    for am in [0.25, 0.5, 1.0, 2.0] {
        let es = entanglement_spectrum(&correlation_matrix(&DiracParams::new(200, am, 0.0)).unwrap(), 200).unwrap();
        let r = es.envelope_rate.unwrap();
        assert!(r > last, "rate not monotone at am = {am}");
        last = r;
    }
}

fn ring(size: usize, am: f64) -> DiracParams {
    let mut p = DiracParams::new(size, am, 0.0);
    p.boundary = Boundary::Periodic;
    p
}

#[test]
fn pairing_and_mean_on_ring() {
    for am in [0.25, 0.5, 1.0, 2.0] {
        let es = entanglement_spectrum(&correlation_matrix(&ring(200, am)).unwrap(), 200).unwrap();
        assert!(es.pairing_defect() < 1e-8, "am = {am}");
        let f = fcs_distribution(&es).unwrap();
        assert!((f.mean - 100.0).abs() < 1e-10);
        assert!(f.asymmetry() < 1e-10);
    }
}

#[test]
#[ignore = "open ends carry a fractional charge for m > 0, so the half-chain spectrum is not paired (defect 0.14 at am = 0.25)"]
fn pairing_on_open_chain() {
    let es = entanglement_spectrum(&correlation_matrix(&DiracParams::new(200, 0.25, 0.0)).unwrap(), 200).unwrap();
    assert!(es.pairing_defect() < 1e-8, "defect {}", es.pairing_defect());
}

#[test]
fn binomial_example() {
    let p = bernoulli_sum(&[0.5; 4]).unwrap();
    assert!((p[2] - 6.0 / 16.0).abs() < 1e-15);
}

#[test]
fn massless_pairing_is_exact() {
    let es = entanglement_spectrum(&correlation_matrix(&DiracParams::new(50, 0.0, 0.0)).unwrap(), 50).unwrap();
    assert!(es.pairing_defect() < 1e-8);
    let f = fcs_distribution(&es).unwrap();
    assert!((f.mean - 25.0).abs() < 1e-10);
    assert!(f.asymmetry() < 1e-10);
}

#[test]
fn ground_bound_holds_with_envelope_lambda() {
    for am in [0.5, 1.0, 2.0] {
        let es = entanglement_spectrum(&correlation_matrix(&DiracParams::new(200, am, 0.0)).unwrap(), 200).unwrap();
        let f = fcs_distribution(&es).unwrap();
        let lambda = es.envelope_lambda().unwrap();
        for w in 0..=100 {
            let b = ground_bound(&f, lambda, w, 400).unwrap();
            assert!(b.empirical_tail <= b.lambda_bound, "am = {am}, W = {w}");
        }
        assert!(f.tail_at(100) == 0.0);
        assert!(ground_bound(&f, lambda, 1000, 400).unwrap().mls_bound > 1.0 - 1e-12);
    }
}

#[test]
fn thermal_quadratures() {
    let b = ThermalBand { m: 0.0, a: 1.0, t: 1e-4 };
    let s = b.sigma2().unwrap();
    assert!((s - 1e-4 / std::f64::consts::PI).abs() / s < 1e-6);
    let b = ThermalBand { m: 0.5, a: 1.0, t: 0.5 };
    let h = 1e-3;
    let fd = (b.psi(h).unwrap() - 2.0 * b.psi(0.0).unwrap() + b.psi(-h).unwrap()) / (h * h);
    assert!((fd - b.sigma2().unwrap()).abs() / b.sigma2().unwrap() < 1e-6);
}

#[test]
fn legendre_transform_shape() {
    let b = ThermalBand { m: 0.5, a: 1.0, t: 0.5 };
    let s2 = b.sigma2().unwrap();
    assert!(b.phi(0.5).unwrap().abs() < 1e-10);
    let d = 0.01;
    let quad = (b.phi(0.5 + d).unwrap() + b.phi(0.5 - d).unwrap()) / (2.0 * d * d);
    assert!((quad - 1.0 / (2.0 * s2)).abs() * 2.0 * s2 < 0.01);
    let xs: Vec<f64> = (1..20).map(|k| 0.5 + 0.02 * k as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| b.phi(x).unwrap()).collect();
    for w in ys.windows(3) {
        assert!(w[0] + w[2] - 2.0 * w[1] > -1e-12);
    }
}

#[test]
fn thermal_variance_and_cutoff() {
    let p = DiracParams::new(400, 0.5, 0.5);
    let es = entanglement_spectrum(&correlation_matrix(&p).unwrap(), 400).unwrap();
    let f = fcs_distribution(&es).unwrap();
    let s2 = ThermalBand::from_params(&p).unwrap().sigma2().unwrap();
    assert!((f.variance / (400.0 * s2) - 1.0).abs() < 0.1);
    for w in [0, 5, 10, 20] {
        assert!(f.tail_at(w) <= chernoff_bound(&es.p, w));
    }
    let c = finite_t_cutoff(&DiracParams::new(200, 0.5, 0.5), 200, 1e-3, true).unwrap();
    assert!(c.empirical_tail.unwrap() <= 1e-3);
    let tighter = finite_t_cutoff(&DiracParams::new(200, 0.5, 0.5), 200, 1e-6, false).unwrap();
    assert!(tighter.w >= c.w);
    assert!(!finite_t_cutoff(&DiracParams::new(200, 0.5, 0.0), 200, 1e-3, false).unwrap().warnings.is_empty());
}

#[test]
fn resource_exponents() {
    let c = ResourceConstants::default();
    let t0 = scaling_fit(ResourceMode::T0, 1e-4, 1e-2, 25, &c).unwrap();
    assert!((t0.exponent - 2.0).abs() < 0.1);
    let ft = scaling_fit(ResourceMode::FiniteT, 1e-4, 1e-2, 25, &c).unwrap();
    assert!((ft.exponent - 2.5).abs() < 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn polynomial_fcs_matches_brute_force(p in prop::collection::vec(0.0f64..=1.0, 1..=14)) {
        let a = bernoulli_sum(&p).unwrap();
        let b = bernoulli_sum_brute_force(&p).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        prop_assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empirical_tails_never_exceed_bounds(am in 0.2f64..2.5, at in 0.05f64..1.0, half in 5usize..40) {
        let size = 2 * half;
        let g = entanglement_spectrum(&correlation_matrix(&DiracParams::new(size, am, 0.0)).unwrap(), size).unwrap();
        let fg = fcs_distribution(&g).unwrap();
        if let Some(lambda) = g.envelope_lambda() {
            for w in 0..half {
                prop_assert!(fg.tail_at(w) <= ground_bound(&fg, lambda, w, 2 * size).unwrap().lambda_bound);
            }
        }
        let t = entanglement_spectrum(&correlation_matrix(&DiracParams::new(size, am, at)).unwrap(), size).unwrap();
        let ft = fcs_distribution(&t).unwrap();
        for w in 0..half {
            prop_assert!(ft.tail_at(w) <= chernoff_bound(&t.p, w) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn cgf_is_symmetric(m in 0.0f64..2.0, t in 0.05f64..2.0, alpha in 0.01f64..4.0) {
        let b = ThermalBand { m, a: 1.0, t };
        let d = (b.psi(alpha).unwrap() - 0.5 * alpha) - (b.psi(-alpha).unwrap() + 0.5 * alpha);
        prop_assert!(d.abs() < 1e-10);
    }
}
