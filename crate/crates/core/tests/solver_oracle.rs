use dtg_core::game::Bimatrix;
use dtg_core::solver::{certify, exact_regret, lemke_howson, regret, support_enum, MixedProfile};
use proptest::prelude::*;

fn game() -> impl Strategy<Value = Bimatrix> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(m, n)| {
        prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), m * n).prop_map(move |cells| {
            Bimatrix::from_fn(m, n, |i, j| cells[i * n + j]).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lemke_howson_lands_on_an_enumerated_equilibrium(g in game()) {
        let lh = lemke_howson(&g, 0).unwrap();
        let (r1, r2) = exact_regret(&g, &lh).expect("exact pivoting keeps rationals");
        prop_assert!(r1 <= 1e-9 && r2 <= 1e-9);
        let oracle = support_enum(&g).unwrap();
        let d = oracle.iter().map(|e| e.linf_distance(&lh)).fold(f64::INFINITY, f64::min);
        prop_assert!(d <= 1e-6, "distance {d}");
    }

    #[test]
    fn every_label_gives_an_equilibrium(g in game()) {
        for label in 0..g.rows() + g.cols() {
            let lh = lemke_howson(&g, label).unwrap();
            prop_assert!(regret(&g, &lh).unwrap().max() <= 1e-7);
        }
    }

    #[test]
    fn regret_is_nonnegative_and_certificates_monotone(g in game(), i in 0usize..4, j in 0usize..4, eta in 0.0f64..5.0) {
        let p = MixedProfile::pure(g.rows(), g.cols(), i % g.rows(), j % g.cols());
        let r = regret(&g, &p).unwrap();
        prop_assert!(r.r1 >= 0.0 && r.r2 >= 0.0);
        let c = certify(&g, &p, eta).unwrap();
        if c.certified {
            prop_assert!(certify(&g, &p, eta + 1.0).unwrap().certified);
        }
    }
}

#[test]
fn degenerate_ties_still_solve() {
    // all-equal payoffs: every profile is an equilibrium
    let g = Bimatrix::from_fn(3, 3, |_, _| (1.0, 1.0)).unwrap();
    let lh = lemke_howson(&g, 0).unwrap();
    assert_eq!(regret(&g, &lh).unwrap().max(), 0.0);
}

#[test]
fn matching_pennies_is_half_half() {
    let g = Bimatrix::from_rows(&[vec![(1.0, 0.0), (0.0, 1.0)], vec![(0.0, 1.0), (1.0, 0.0)]]).unwrap();
    let lh = lemke_howson(&g, 0).unwrap();
    assert_eq!(lh.p, vec![0.5, 0.5]);
    assert_eq!(lh.q, vec![0.5, 0.5]);
}
