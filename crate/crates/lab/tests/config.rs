use circlaw_lab::config::rounded_square;
use circlaw_lab::{ExperimentConfig, LabError};
use proptest::prelude::*;

#[test]
fn file_overrides_defaults() {
    let cfg = ExperimentConfig::from_text(
        "# campaign\nn_grid = 16, 64\nreps = 7\np_list = 1, 1.5\nm_policy = paper\nM_factor = 4\n\
         theta_list = pi/2, 2pi\ntol.shape_factor = 3\n",
    )
    .unwrap();
    assert_eq!(cfg.n_grid, vec![16, 64]);
    assert_eq!((cfg.reps, cfg.m_factor), (7, 4));
    assert_eq!(cfg.p_list, vec![1.0, 1.5]);
    assert!((cfg.theta_list[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    assert_eq!(cfg.tol("shape_factor"), 3.0);
    assert_eq!(cfg.big_m(16).unwrap(), 64);
    assert_eq!(cfg.summary()["m_policy"], "paper");
}

#[test]
fn invalid_files_are_config_errors() {
    for text in ["reps = 0", "n_grid = 1, 4", "p_list = 0.5", "colour = red", "reps", "tol.nonsense = 1"] {
        assert!(matches!(ExperimentConfig::from_text(text), Err(LabError::Config(_))), "{text}");
    }
}

proptest! {
    #[test]
    fn big_m_is_a_square_not_below_n(n in 2usize..5000, factor in 1usize..2000) {
        let m = rounded_square(factor * n, n).unwrap();
        prop_assert!(m >= n);
        let r = m.isqrt();
        prop_assert_eq!(r * r, m);
        prop_assert!(m.abs_diff(factor * n) <= 2 * r + 1);
    }
}
