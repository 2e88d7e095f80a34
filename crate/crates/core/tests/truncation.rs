use dtg_core::discount::{discount_factor, DiscountSpec};
use dtg_core::solver::{miniaturize, truncation_cap};
use proptest::prelude::*;

proptest! {
    #[test]
    fn tail_beyond_cap_is_at_most_delta(k in 1u32..200, delta in 0.001f64..0.9) {
        let cap = truncation_cap(k as f64, delta).unwrap();
        let tail = k as f64 * discount_factor(&DiscountSpec::exponential(delta).unwrap(), cap);
        prop_assert!(tail <= delta, "K={k} delta={delta} cap={cap} tail={tail}");
    }

    #[test]
    fn cap_grows_as_delta_shrinks(k in 1u32..50, delta in 0.01f64..0.5) {
        let a = truncation_cap(k as f64, delta).unwrap();
        let b = truncation_cap(k as f64, delta / 2.0).unwrap();
        prop_assert!(b >= a);
    }

    #[test]
    fn miniaturized_rates_stay_small(eps in 1e-6f64..0.99, delta in 1e-6f64..0.99) {
        let (e, d) = miniaturize(eps, delta).unwrap();
        prop_assert!(e > 0.0 && e <= 0.5 && d > 0.0 && d <= 0.5);
    }
}

#[test]
fn rejects_out_of_range() {
    assert!(truncation_cap(0.0, 0.1).is_err());
    assert!(truncation_cap(1.0, 0.0).is_err());
    assert!(truncation_cap(1.0, 1.0).is_err());
}
