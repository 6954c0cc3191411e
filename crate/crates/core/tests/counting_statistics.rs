use std::f64::consts::{PI, TAU};

use circlaw::{
    expected_count, expected_count_outside, kernel, sample_spectrum, tv_mean_vs_uniform,
    var_quadrature, var_split, ComplexPoint, Region,
};

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn kernel_diagonal_integrates_to_disc_mean() {
    for &(n, r) in &[(4usize, 0.5f64), (16, 0.8), (64, 1.0), (64, 1.2)] {
        // K_n(z, z) is the intensity of the unscaled process; rescale to
        // the unit disc with z = √n w
        let density = |rho: f64| {
            let z = ComplexPoint::new(rho * (n as f64).sqrt(), 0.0).unwrap();
            kernel(&z, &z, n).re * n as f64
        };
        let mean = simpson(|rho| TAU * rho * density(rho), 0.0, r, 2000);
        let stats = expected_count(&Region::disc(r).unwrap(), n).unwrap();
        assert!((mean - stats.mean).abs() < 1e-8, "n={n} r={r}: {mean} vs {}", stats.mean);
    }
}

#[test]
fn outside_estimate_matches_complement_mean() {
    for &n in &[1usize, 5, 16, 100] {
        for &radius in &[1.0f64, 1.05, 1.3] {
            let direct = expected_count(&Region::disc_complement(radius).unwrap(), n).unwrap().mean;
            let est = expected_count_outside(n, radius).unwrap();
            assert!(((est.exact - direct) / direct).abs() < 1e-10, "n={n} R={radius}");
            assert!(est.exact <= est.bound);
        }
    }
}

#[test]
fn tv_distance_matches_stirling_free_closed_form() {
    for &n in &[1usize, 2, 3, 10, 50, 200] {
        let ln_fact: f64 = (1..=n).map(|i| (i as f64).ln()).sum();
        let nn = n as f64;
        let closed = (nn * nn.ln() - nn - ln_fact).exp();
        let tv = tv_mean_vs_uniform::<f64>(n).unwrap();
        assert!((tv.value - closed).abs() < 1e-8, "n={n}: {} vs {closed}", tv.value);
    }
}

#[test]
fn segment_variance_paths_agree() {
    let n = 64;
    for j in 1..=6 {
        for &theta in &[0.3, PI / 2.0, PI, 5.0, TAU] {
            let a = var_quadrature::<f64>(j, theta, n).unwrap().value;
            let b = var_split::<f64>(j, theta, n).unwrap();
            assert!((a - b).abs() < 1e-6, "j={j} θ={theta}: {a} vs {b}");
        }
    }
}

#[test]
fn segment_moments_match_sampled_spectra() {
    let n = 64;
    let reps = 3000u64;
    for &(j, theta) in &[(3usize, PI), (5, PI / 2.0)] {
        let region = Region::initial_segment(j, theta, n).unwrap();
        let counts: Vec<f64> = (0..reps)
            .map(|r| sample_spectrum::<f64>(n, 101, r).unwrap().count_in(&region) as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / reps as f64;
        let var = counts.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let stats = expected_count(&region, n).unwrap();
        let se = (stats.variance / reps as f64).sqrt();
        assert!((mean - stats.mean).abs() < 4.5 * se, "j={j}: mean {mean} vs {}", stats.mean);
        let rel = (var / stats.variance - 1.0).abs();
        assert!(rel < 6.0 * (2.0 / reps as f64).sqrt(), "j={j}: var {var} vs {}", stats.variance);
    }
}

#[test]
fn f32_variance_tracks_f64() {
    let a = var_quadrature::<f64>(4, PI, 64).unwrap().value;
    let b = var_quadrature::<f32>(4, std::f32::consts::PI, 64).unwrap().value;
    assert!((a - b as f64).abs() < 1e-2 * a);
}
