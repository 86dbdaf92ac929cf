use lattice_bpb::bpb::{compute_eta, near_attainment, Policy, SolveOptions, Solver};
use lattice_bpb::instances::{feasible_instance, instance_rng};
use lattice_bpb::scalar::ratio;
use lattice_bpb::{
    operator_norm_general, operator_norm_positive, Error, LatticeVector, Matrix, Modulus,
    NormedLattice, PositiveOperator, Rational, DEFAULT_N_MAX,
};
use proptest::prelude::*;

fn positive_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Vec<Vec<u16>>> {
    (1..=max_rows, 1..=max_cols)
        .prop_flat_map(|(m, n)| prop::collection::vec(prop::collection::vec(0u16..=1000, n), m))
}

fn to_rational(rows: &[Vec<u16>]) -> Matrix<Rational> {
    let data = rows
        .iter()
        .flatten()
        .map(|&v| ratio(v as i64, 1000))
        .collect();
    Matrix::from_row_major(rows.len(), rows[0].len(), data).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn positive_norm_matches_sign_enumeration(rows in positive_matrix(5, 7)) {
        let m = to_rational(&rows);
        let y = NormedLattice::<Rational>::l1(rows.len());
        let t = PositiveOperator::new(m.clone(), y.clone()).unwrap();
        prop_assert_eq!(operator_norm_positive(&t), operator_norm_general(&m, &y, DEFAULT_N_MAX).unwrap());
    }

    #[test]
    fn l2_positive_norm_is_attained_at_ones(rows in positive_matrix(5, 7)) {
        let data: Vec<f64> = rows.iter().flatten().map(|&v| v as f64 / 1000.0).collect();
        let m = Matrix::from_row_major(rows.len(), rows[0].len(), data).unwrap();
        let y = NormedLattice::lp(rows.len(), 2.0).unwrap();
        let general = operator_norm_general(&m, &y, DEFAULT_N_MAX).unwrap();
        let t = PositiveOperator::new(m, y).unwrap();
        prop_assert!((t.norm() - general).abs() <= 1e-12 * (1.0 + general));
    }

    #[test]
    fn float_and_exact_solvers_agree(seed in any::<u64>(), n in 1usize..7, m in 1usize..6) {
        let y = NormedLattice::<Rational>::l1(m);
        let budget = compute_eta(0.6, &Modulus::l1()).unwrap();
        let inst = feasible_instance::<Rational>(&mut instance_rng(seed, 0), n, &y, &budget, DEFAULT_N_MAX).unwrap();
        let solver = Solver::new(0.6, &Modulus::l1(), SolveOptions::default()).unwrap();
        let exact = solver.linfty(&inst.s, &inst.x0).unwrap();
        let fs = inst.s.map_scalar(lattice_bpb::Scalar::approx).unwrap();
        let fx = inst.x0.map_scalar(lattice_bpb::Scalar::approx);
        let float = solver.linfty(&fs, &fx).unwrap();
        prop_assert_eq!(&exact.partition, &float.partition);
        for (a, b) in exact.t.matrix().row_major().iter().zip(float.t.matrix().row_major()) {
            prop_assert!((lattice_bpb::Scalar::approx(a) - b).abs() < 1e-12);
        }
    }
}

#[test]
fn far_point_is_refused_unless_recording() {
    let y = NormedLattice::<f64>::l1(1);
    let s = PositiveOperator::new(Matrix::from_rows(&[vec![0.5, 0.5]]).unwrap(), y).unwrap();
    let x0 = LatticeVector::from_f64(&[1.0, -1.0]).unwrap();
    let budget = compute_eta(0.5, &Modulus::l1()).unwrap();
    assert!(!near_attainment(&s, &x0, &budget).unwrap());
    let enforce = Solver::new(0.5, &Modulus::l1(), SolveOptions::default()).unwrap();
    assert!(matches!(
        enforce.linfty(&s, &x0),
        Err(Error::NotNearAttaining { .. })
    ));
    let record = Solver::new(
        0.5,
        &Modulus::l1(),
        SolveOptions {
            policy: Policy::Record,
            ..SolveOptions::default()
        },
    )
    .unwrap();
    let cert = record.linfty(&s, &x0).unwrap();
    assert!(!cert.precondition_met);
}

#[test]
fn generator_is_seed_stable_across_scalars() {
    let budget = compute_eta(0.9, &Modulus::l1()).unwrap();
    for i in 0..20 {
        let a = feasible_instance::<f64>(
            &mut instance_rng(5, i),
            6,
            &NormedLattice::l1(4),
            &budget,
            DEFAULT_N_MAX,
        )
        .unwrap();
        let b = feasible_instance::<Rational>(
            &mut instance_rng(5, i),
            6,
            &NormedLattice::l1(4),
            &budget,
            DEFAULT_N_MAX,
        )
        .unwrap();
        let bf: Vec<f64> =
            b.s.matrix()
                .row_major()
                .iter()
                .map(lattice_bpb::Scalar::approx)
                .collect();
        for (x, y) in a.s.matrix().row_major().iter().zip(&bf) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
