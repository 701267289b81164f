use rtflow_web::{inf_sup_value, regularity_rows, LockExchange};

#[test]
fn every_scheme_runs_from_the_page_defaults() {
    for scheme in ["implicit", "semi_implicit", "explicit", "projection"] {
        let mut s = LockExchange::create(12, scheme, 2e-3, 0.01, 40.0).unwrap();
        s.advance_by(5).unwrap();
        assert!(s.rho_min() >= 1.0 - 1e-11 && s.rho_max() <= 3.0 + 1e-11, "{scheme}");
        assert!(s.max_divergence() < 1e-10, "{scheme}");
        assert!((s.time() - 0.01).abs() < 1e-15, "{scheme}");
    }
}

#[test]
fn refinement_table_and_inf_sup_agree_with_the_cartesian_case() {
    let rows = regularity_rows(4, 0.0, 0, 4).unwrap();
    assert_eq!(rows.len(), 16);
    assert!(rows.chunks(4).all(|r| r[2] == 0.0));
    let b = inf_sup_value(8, 0.0, 0).unwrap();
    assert!((b - 0.5516).abs() < 1e-4, "{b}");
}
