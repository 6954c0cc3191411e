use circlaw::quadrature::{integrate_to_infinity, QuadOptions};
use circlaw::stats::ks_two_sample;
use circlaw::{
    expected_count, sample_ginibre, sample_radii_oracle, sample_spectrum, spectrum, Region,
    Spectrum,
};
use nalgebra::{Complex, DMatrix};

fn nalgebra_eigenvalues(n: usize, seed: u64, rep: u64) -> Vec<Complex<f64>> {
    let g = sample_ginibre::<f64>(n, seed, rep).unwrap();
    let m = DMatrix::from_fn(n, n, |i, j| g.get(i, j));
    let scale = (n as f64).sqrt().recip();
    m.schur()
        .eigenvalues()
        .expect("complex Schur form has eigenvalues")
        .iter()
        .map(|z| z * scale)
        .collect()
}

#[test]
fn lapack_matches_nalgebra_schur() {
    for &(n, seed) in &[(2usize, 1u64), (7, 2), (16, 3), (33, 4), (64, 5)] {
        let s = spectrum(&sample_ginibre::<f64>(n, seed, 0).unwrap()).unwrap();
        let mut other = nalgebra_eigenvalues(n, seed, 0);
        for z in s.eigenvalues() {
            let z = z.to_complex();
            let (idx, d) = other
                .iter()
                .enumerate()
                .map(|(i, w)| (i, (w - z).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert!(d < 1e-9, "n={n}: eigenvalue {z} has no partner (closest {d:e})");
            other.swap_remove(idx);
        }
    }
}

#[test]
fn f32_path_tracks_f64() {
    let a = sample_spectrum::<f64>(12, 9, 1).unwrap();
    let b = sample_spectrum::<f32>(12, 9, 1).unwrap();
    for zb in b.eigenvalues() {
        let best = a
            .eigenvalues()
            .iter()
            .map(|za| ((za.re() - zb.re() as f64).powi(2) + (za.im() - zb.im() as f64).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-3);
    }
}

#[test]
fn seeds_are_reproducible_and_independent() {
    let a = sample_spectrum::<f64>(20, 5, 3).unwrap();
    let b = sample_spectrum::<f64>(20, 5, 3).unwrap();
    assert_eq!(a, b);
    let c = sample_spectrum::<f64>(20, 5, 4).unwrap();
    assert_ne!(a.eigenvalues(), c.eigenvalues());
}

fn max_modulus_cdf_n2(r: f64) -> f64 {
    // |λ|² for n = 2 are distributed as {Γ(1)/2, Γ(2)/2}
    let t = 2.0 * r * r;
    (1.0 - (-t).exp()) * (1.0 - (-t).exp() * (1.0 + t))
}

#[test]
fn n2_max_radius_matches_integrated_law() {
    let reps = 20_000u64;
    let samples: Vec<f64> = (0..reps)
        .map(|r| {
            let s: Spectrum<f64> = sample_spectrum(2, 77, r).unwrap();
            s.eigenvalues().iter().map(|z| z.modulus()).fold(0.0, f64::max)
        })
        .collect();
    let mean = samples.iter().sum::<f64>() / reps as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let expected = integrate_to_infinity(|r: f64| 1.0 - max_modulus_cdf_n2(r), 0.0, QuadOptions::absolute(1e-12))
        .unwrap()
        .value;
    let se = (var / reps as f64).sqrt();
    assert!((mean - expected).abs() < 4.0 * se, "mean {mean} vs {expected} (se {se})");

    // empirical CDF against the closed form at a few radii
    for &r in &[0.3, 0.6, 0.9, 1.2, 1.6] {
        let emp = samples.iter().filter(|&&x| x <= r).count() as f64 / reps as f64;
        let f = max_modulus_cdf_n2(r);
        assert!((emp - f).abs() < 4.0 * (f * (1.0 - f) / reps as f64).sqrt() + 1e-4, "r={r}");
    }
}

#[test]
fn radial_law_agrees_with_gamma_oracle() {
    let n = 16;
    let reps = 300u64;
    let mut eig = Vec::new();
    let mut oracle = Vec::new();
    for r in 0..reps {
        let s: Spectrum<f64> = sample_spectrum(n, 11, r).unwrap();
        eig.extend(s.eigenvalues().iter().map(|z| z.modulus_sqr()));
        oracle.extend(sample_radii_oracle::<f64>(n, 11, r).unwrap().radii_squared);
    }
    let ks = ks_two_sample(&eig, &oracle, 0.001).unwrap();
    assert!(ks.passes(), "D = {} ≥ {}", ks.statistic, ks.critical);
}

#[test]
fn disc_counts_match_bernoulli_moments() {
    let n = 16;
    let reps = 4000u64;
    let region = Region::disc(0.7).unwrap();
    let counts: Vec<f64> = (0..reps)
        .map(|r| sample_spectrum::<f64>(n, 23, r).unwrap().count_in(&region) as f64)
        .collect();
    let mean = counts.iter().sum::<f64>() / reps as f64;
    let var = counts.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let stats = expected_count(&region, n).unwrap();
    let se_mean = (stats.variance / reps as f64).sqrt();
    assert!((mean - stats.mean).abs() < 4.0 * se_mean, "mean {mean} vs {}", stats.mean);
    // sample variance of a bounded count: relative SE about √(2/reps)
    assert!((var / stats.variance - 1.0).abs() < 6.0 * (2.0 / reps as f64).sqrt(), "var {var} vs {}", stats.variance);
}
