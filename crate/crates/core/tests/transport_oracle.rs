mod common;

#[test]
fn transport_terms_match_angular_quadrature() {
    for order in 1..=3 {
        let err = common::moment_oracle_error(order, 3, 100 + order as u64);
        assert!(err < 1e-4, "N={order}: {err:e}");
    }
}
