use proptest::prelude::*;
use schwinger::interface::*;
use schwinger::lattice::*;
use schwinger::linalg::{dense_eigh, hermitian_to_dense};

#[test]
fn fifty_four_point_grid() {
    let mut count = 0;
    for size in [2usize, 3] {
        for w in [0u32, 1, 2] {
            for am in [0.0, 0.7, 2.5] {
                for (aq, theta) in [(0.5, 0.0), (1.3, 0.9), (2.0, 3.1)] {
                    let p = LatticeParams::dimensionless(size, w, am, aq, theta);
                    let r = check_equivalence(&p, 1e-12).unwrap();
                    assert!(r.max_abs_deviation < 1e-12);
                    count += 1;
                }
            }
        }
    }
    assert_eq!(count, 54);
}

#[test]
fn encoded_spectrum_matches() {
    let p = LatticeParams::dimensionless(3, 2, 0.7, 1.3, 0.9);
    let b = enumerate_basis(&p).unwrap();
    let direct = build_hamiltonian(&p, &b, Gauge::Complex).unwrap();
    let eff = ising_effective_hamiltonian(&b, &IsingDictionary::from_lattice(&p)).unwrap();
    let r = verify_equivalence(&p).unwrap();
    let (e1, _) = dense_eigh(hermitian_to_dense(&direct.matrix));
    let (e2, _) = dense_eigh(hermitian_to_dense(&eff));
    for (x, y) in e1.iter().zip(&e2) {
        assert!((x + r.constant_offset - y).abs() < 1e-10);
    }
}

#[test]
fn zero_hopping_compares_diagonals() {
    let p = LatticeParams::dimensionless(3, 2, 0.4, 1.1, 0.3);
    let b = enumerate_basis(&p).unwrap();
    let dict = IsingDictionary { g: 0.0, ..IsingDictionary::from_lattice(&p) };
    let eff = ising_effective_hamiltonian(&b, &dict).unwrap();
    let diag: Vec<f64> = b.configs().map(|c| diagonal_energy(&p, &c)).collect();
    let offset = (0..b.len()).map(|i| eff.get(i, i).re - diag[i]).sum::<f64>() / b.len() as f64;
    for i in 0..b.len() {
        assert!((eff.get(i, i).re - diag[i] - offset).abs() < 1e-12);
        assert!(eff.row(i).all(|(j, v)| j == i || v.norm() == 0.0));
    }
}

fn sector() -> impl Strategy<Value = (usize, u32)> {
    (1usize..=5, 0u32..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn path_round_trip((size, w) in sector()) {
        let p = LatticeParams::dimensionless(size, w, 1.0, 1.0, 0.0);
        for c in enumerate_basis(&p).unwrap().configs() {
            let path = encode_path(&c);
            prop_assert_eq!(path.heights[0], 0);
            prop_assert_eq!(*path.heights.last().unwrap(), 0);
            for j in 1..c.sites {
                prop_assert_eq!(path.field_at(j), c.fields[j - 1]);
            }
            prop_assert_eq!(decode_path(&path, Some(w)).unwrap(), c);
        }
    }

    #[test]
    fn corner_flips_are_single_hops((size, w) in sector()) {
        let p = LatticeParams::dimensionless(size, w, 1.0, 1.0, 0.0);
        let b = enumerate_basis(&p).unwrap();
        let t = projected_transverse(&b, 0.5).unwrap();
        for i in 0..b.len() {
            let hi = encode_path(&b.config(i)).heights;
            for (j, _) in t.row(i) {
                let hj = encode_path(&b.config(j)).heights;
                let diffs: Vec<i32> = hi.iter().zip(&hj).map(|(x, y)| y - x).filter(|d| *d != 0).collect();
                prop_assert_eq!(diffs.len(), 1);
                prop_assert_eq!(diffs[0].abs(), 2);
                let fi = b.config(i).fields;
                let fj = b.config(j).fields;
                let changed: Vec<i32> = fi.iter().zip(&fj).map(|(x, y)| y - x).filter(|d| *d != 0).collect();
                prop_assert_eq!(changed.len(), 1);
                prop_assert_eq!(changed[0].abs(), 1);
            }
        }
    }

    #[test]
    fn pattern_energy_is_linear(amp in -3.0f64..3.0, size in 1usize..=3, w in 0u32..=2) {
        let p = LatticeParams::dimensionless(size, w, 1.0, 1.0, 0.0);
        let geo = RibbonGeometry::new(size, w).unwrap();
        for c in enumerate_basis(&p).unwrap().configs() {
            let spin = spin_configuration(&encode_path(&c), &geo).unwrap();
            for kind in [PatternKind::UniformH, PatternKind::GradientHprime, PatternKind::StaggeredMu] {
                let e1 = pattern_energy(&spin, &geo, &FieldPattern { kind, amplitude: 1.0 }).unwrap();
                let ea = pattern_energy(&spin, &geo, &FieldPattern { kind, amplitude: amp }).unwrap();
                prop_assert!((ea - amp * e1).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn equivalence_on_random_points(size in 1usize..=3, w in 0u32..=2, am in 0.0f64..3.0, aq in 0.0f64..3.0, theta in -6.0f64..6.0) {
        let p = LatticeParams::dimensionless(size, w, am, aq, theta);
        prop_assert!(verify_equivalence(&p).unwrap().max_abs_deviation < 1e-12);
    }
}
