use deformed_bec::algebra::{
    annihilator_matrix, commutator_defect, commutator_off_diagonal, deformation_function, deformed_annihilator,
    deformed_creator, expansion_error, ExpansionOrder,
};
use deformed_bec::Error;
use proptest::prelude::*;

#[test]
fn ladder_examples() {
    let b = annihilator_matrix(1).unwrap();
    assert_eq!(b.dim(), 2);
    assert_eq!(b.get(0, 1).re, 1.0);
    let b = annihilator_matrix(5).unwrap();
    assert_eq!(b.get(2, 3).re, 3f64.sqrt());
    let comm = b.commutator(&b.adjoint());
    for n in 0..5 {
        assert!((comm.get(n, n).re - 1.0).abs() < 1e-15);
    }
    assert!((comm.get(5, 5).re + 5.0).abs() < 1e-14);
}

#[test]
fn deformation_function_examples() {
    assert_eq!(deformation_function(1, 0.37).unwrap(), 1.0);
    assert_eq!(deformation_function(101, 0.01).unwrap(), 0.0);
    assert!((deformation_function(3, 0.1).unwrap() - 0.894427190999916).abs() < 1e-15);
    assert!(matches!(deformation_function(102, 0.01), Err(Error::Domain { n: 102, .. })));
    assert!(deformation_function(2, -0.1).is_err());
}

#[test]
fn commutator_diagonal_example() {
    let rows = commutator_defect(5, 0.01).unwrap();
    for (row, expect) in rows.iter().zip([1.0, 0.98, 0.96, 0.94]) {
        assert!(!row.boundary);
        assert!((row.diagonal - expect).abs() < 1e-14);
    }
    assert!(rows[4].boundary && rows[5].boundary);
    assert_eq!(commutator_off_diagonal(5, 0.01).unwrap(), 0.0);
}

#[test]
fn closure_element_vanishes() {
    let b = deformed_annihilator(11, 0.1, ExpansionOrder::Exact).unwrap();
    assert_eq!(b.get(10, 11).re, 0.0);
    assert!(deformed_annihilator(12, 0.1, ExpansionOrder::Exact).is_err());
}

#[test]
fn undeformed_limit_is_the_boson_ladder() {
    let b = annihilator_matrix(30).unwrap();
    for order in [ExpansionOrder::Exact, ExpansionOrder::First] {
        assert_eq!(deformed_annihilator(30, 0.0, order).unwrap().max_abs_diff(&b), 0.0);
    }
    assert!(commutator_defect(30, 0.0).unwrap().iter().filter(|r| !r.boundary).all(|r| r.defect.abs() < 1e-13));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn creator_is_adjoint_of_annihilator(eta in 0.0f64..0.5, n_cut in 1usize..40) {
        let closure = if eta > 0.0 { (1.0 / eta + 1.0).floor() as usize } else { n_cut };
        let n_cut = n_cut.min(closure).max(1);
        for order in [ExpansionOrder::Exact, ExpansionOrder::First] {
            let b = deformed_annihilator(n_cut, eta, order).unwrap();
            let bd = deformed_creator(n_cut, eta, order).unwrap();
            prop_assert_eq!(bd.max_abs_diff(&b.adjoint()), 0.0);
            for i in 0..=n_cut {
                for j in 0..=n_cut {
                    prop_assert_eq!(bd.get(i, j), b.get(j, i).conj());
                }
            }
        }
    }

    #[test]
    fn first_order_error_obeys_taylor_bounds(eta in 1e-4f64..0.05, n_cut in 2usize..20) {
        let exact = deformed_annihilator(n_cut, eta, ExpansionOrder::Exact).unwrap();
        let first = deformed_annihilator(n_cut, eta, ExpansionOrder::First).unwrap();
        for n in 1..=n_cut {
            let x = eta * (n as f64 - 1.0);
            prop_assume!(x < 0.9);
            let err = (exact.get(n - 1, n) - first.get(n - 1, n)).norm();
            let root_n = (n as f64).sqrt();
            let lower = root_n * x * x / 8.0;
            let upper = root_n * x * x / (8.0 * (1.0 - x).powf(1.5));
            let slack = 4.0 * f64::EPSILON * root_n;
            prop_assert!(err >= lower - slack && err <= upper + slack, "n={} err={} bounds=[{}, {}]", n, err, lower, upper);
        }
    }
}

#[test]
fn expansion_error_is_second_order() {
    let ratio = expansion_error(20, 0.002).unwrap() / expansion_error(20, 0.001).unwrap();
    assert!((ratio - 4.0).abs() < 0.1);
}
