//! Ginibre sampling, spectra, and the two exact distributional oracles.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{domain, Error, Result};
use crate::measures::{ComplexPoint, Spectrum};
use crate::scalar::Real;
use crate::special::poisson_cdf_sf;
use crate::spiral::sort_spectrum_spiral;

/// Independent random streams derived from one campaign seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purpose {
    Matrix = 0,
    Radii = 1,
    DiscCount = 2,
    Coupling = 3,
}

/// ChaCha20 keyed by `(seed, n, replicate, purpose)`; any two distinct keys
/// give unrelated streams, so cells can be evaluated in any order.
pub fn stream(seed: u64, n: usize, replicate: u64, purpose: Purpose) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(n as u64).to_le_bytes());
    key[16..24].copy_from_slice(&replicate.to_le_bytes());
    key[24..].copy_from_slice(&(purpose as u64).to_le_bytes());
    ChaCha20Rng::from_seed(key)
}

/// Standard complex Gaussian (`E|g|² = 1`) by Box–Muller in polar form:
/// `√(-ln u₁) · e^{2πi u₂}` with `u₁ ∈ (0, 1]`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex<f64> {
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = rng.random::<f64>();
    let r = (-u1.ln()).sqrt();
    let a = std::f64::consts::TAU * u2;
    Complex::new(r * a.cos(), r * a.sin())
}

/// `n × n` complex matrix, column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GinibreMatrix<T> {
    n: usize,
    entries: Vec<Complex<T>>,
    seed: u64,
    replicate: u64,
}

impl<T: Real> GinibreMatrix<T> {
    /// Wraps arbitrary entries (column-major) so fixtures go through the
    /// same spectrum path as sampled matrices.
    pub fn from_entries(n: usize, entries: Vec<Complex<T>>, seed: u64, replicate: u64) -> Result<Self> {
        if n == 0 {
            return domain("matrix size must be positive");
        }
        if entries.len() != n * n {
            return domain(format!("{} entries for an {n}×{n} matrix", entries.len()));
        }
        if entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return domain("non-finite matrix entry");
        }
        Ok(Self {
            n,
            entries,
            seed,
            replicate,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    /// Entry in row `i`, column `j`.
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.entries[j * self.n + i]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replicate(&self) -> u64 {
        self.replicate
    }

    pub fn trace(&self) -> Complex<T> {
        let re = crate::special::compensated_sum((0..self.n).map(|i| self.get(i, i).re));
        let im = crate::special::compensated_sum((0..self.n).map(|i| self.get(i, i).im));
        Complex::new(re, im)
    }
}

pub fn sample_ginibre<T: Real>(n: usize, seed: u64, replicate: u64) -> Result<GinibreMatrix<T>> {
    if n == 0 {
        return domain("matrix size must be positive");
    }
    let mut rng = stream(seed, n, replicate, Purpose::Matrix);
    let entries = (0..n * n)
        .map(|_| {
            let g = complex_gaussian(&mut rng);
            Complex::new(T::lit(g.re), T::lit(g.im))
        })
        .collect();
    Ok(GinibreMatrix {
        n,
        entries,
        seed,
        replicate,
    })
}

/// Eigenvalues of `g/√n` in spiral order, with the trace identity checked.
pub fn spectrum<T: Real>(g: &GinibreMatrix<T>) -> Result<Spectrum<T>> {
    let n = g.n;
    let mut a = g.entries.clone();
    let w = T::geev(n, &mut a).map_err(|info| Error::Eigensolver {
        seed: g.seed,
        replicate: g.replicate,
        info,
    })?;
    let scale = T::of(n).sqrt().recip();
    let eigenvalues = w
        .into_iter()
        .map(|z| ComplexPoint::new(z.re * scale, z.im * scale))
        .collect::<Result<Vec<_>>>()
        .map_err(|_| Error::Eigensolver {
            seed: g.seed,
            replicate: g.replicate,
            info: -1000,
        })?;
    let s = Spectrum::with_trace(eigenvalues, g.trace() * scale, g.seed, g.replicate)?;
    Ok(sort_spectrum_spiral(&s))
}

pub fn sample_spectrum<T: Real>(n: usize, seed: u64, replicate: u64) -> Result<Spectrum<T>> {
    spectrum(&sample_ginibre::<T>(n, seed, replicate)?)
}

/// Squared moduli `{γ_k / n}` with `γ_k ~ Gamma(k, 1)` independent, sorted
/// ascending. Same law as `{|λ_k|²}` for the normalized spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialSample<T> {
    pub n: usize,
    pub radii_squared: Vec<T>,
}

pub fn sample_radii_oracle<T: Real>(n: usize, seed: u64, replicate: u64) -> Result<RadialSample<T>> {
    if n == 0 {
        return domain("oracle size must be positive");
    }
    let mut rng = stream(seed, n, replicate, Purpose::Radii);
    let nf = n as f64;
    let mut radii_squared: Vec<T> = (1..=n)
        .map(|k| {
            let g = Gamma::new(k as f64, 1.0).expect("positive shape");
            T::lit(g.sample(&mut rng) / nf)
        })
        .collect();
    radii_squared.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    Ok(RadialSample { n, radii_squared })
}

/// Exact sampler for `N(rD)`: a sum of independent Bernoulli(`F_k(nr²)`).
#[derive(Clone, Debug)]
pub struct DiscCountSampler {
    n: usize,
    params: Vec<f64>,
}

impl DiscCountSampler {
    pub fn new(n: usize, r: f64) -> Result<Self> {
        if n == 0 {
            return domain("n must be positive");
        }
        if !(r >= 0.0) {
            return domain(format!("radius must be ≥ 0, got {r}"));
        }
        let x = n as f64 * r * r;
        let params = if x.is_finite() {
            (0..n).map(|k| poisson_cdf_sf(x, k).1).collect()
        } else {
            vec![1.0; n]
        };
        Ok(Self { n, params })
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn sample(&self, seed: u64, replicate: u64) -> usize {
        let mut rng = stream(seed, self.n, replicate, Purpose::DiscCount);
        self.params
            .iter()
            .filter(|&&p| rng.random::<f64>() < p)
            .count()
    }
}

pub fn sample_disc_count(n: usize, r: f64, seed: u64, replicate: u64) -> Result<usize> {
    Ok(DiscCountSampler::new(n, r)?.sample(seed, replicate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_stream_separated() {
        let a = sample_ginibre::<f64>(1, 42, 0).unwrap();
        let b = sample_ginibre::<f64>(1, 42, 0).unwrap();
        assert_eq!(a, b);
        let c = sample_ginibre::<f64>(2, 7, 3).unwrap();
        let d = sample_ginibre::<f64>(2, 7, 4).unwrap();
        assert_ne!(c.entries(), d.entries());
        assert!(sample_ginibre::<f64>(0, 1, 0).is_err());
    }

    #[test]
    fn second_moment_is_one() {
        let g = sample_ginibre::<f64>(100, 5, 0).unwrap();
        let m: f64 = g.entries().iter().map(|z| z.norm_sqr()).sum::<f64>() / 1e4;
        assert!((m - 1.0).abs() < 0.05, "mean |g|² = {m}");
        let re_var: f64 = g.entries().iter().map(|z| z.re * z.re).sum::<f64>() / 1e4;
        assert!((re_var - 0.5).abs() < 0.05);
    }

    #[test]
    fn one_by_one_spectrum_is_the_entry() {
        let g = sample_ginibre::<f64>(1, 11, 2).unwrap();
        let s = spectrum(&g).unwrap();
        let z = s.eigenvalues()[0];
        assert!((z.to_complex() - g.get(0, 0)).norm() < 1e-15);
        assert_eq!((s.seed(), s.replicate()), (11, 2));
    }

    #[test]
    fn diagonal_injection() {
        let n = 4;
        let d = [Complex::new(0.3, 0.0), Complex::new(-1.0, 0.5), Complex::new(0.0, 2.0), Complex::new(1.5, -1.5)];
        let mut e = vec![Complex::new(0.0, 0.0); n * n];
        for i in 0..n {
            e[i * n + i] = d[i];
        }
        let s = spectrum(&GinibreMatrix::<f64>::from_entries(n, e, 0, 0).unwrap()).unwrap();
        for di in d {
            let target = di / 2.0;
            assert!(s.eigenvalues().iter().any(|z| (z.to_complex() - target).norm() < 1e-14));
        }
    }

    #[test]
    fn trace_identity_n6() {
        let g = sample_ginibre::<f64>(6, 99, 1).unwrap();
        let s = spectrum(&g).unwrap();
        let sum: Complex<f64> = s.eigenvalues().iter().map(|z| z.to_complex()).sum();
        assert!((sum - g.trace() / 6f64.sqrt()).norm() < 1e-8);
    }

    #[test]
    fn single_precision_path() {
        let s = sample_spectrum::<f32>(16, 3, 0).unwrap();
        assert_eq!(s.n(), 16);
    }

    #[test]
    fn radial_oracle_single_exponential_mean() {
        let reps = 100_000;
        let m: f64 = (0..reps)
            .map(|r| sample_radii_oracle::<f64>(1, 8, r).unwrap().radii_squared[0])
            .sum::<f64>()
            / reps as f64;
        assert!((m - 1.0).abs() < 0.02, "mean {m}");
    }

    #[test]
    fn radial_oracle_sorted_without_ties() {
        let s = sample_radii_oracle::<f64>(200, 1, 0).unwrap();
        assert!(s.radii_squared.windows(2).all(|w| w[0] < w[1]));
        assert!(s.radii_squared.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn disc_count_extremes_and_mean() {
        assert_eq!(sample_disc_count(5, 0.0, 1, 0).unwrap(), 0);
        assert_eq!(sample_disc_count(5, 1e6, 1, 0).unwrap(), 5);
        let sampler = DiscCountSampler::new(2, 1.0).unwrap();
        let reps = 100_000u64;
        let mean = (0..reps).map(|r| sampler.sample(17, r) as f64).sum::<f64>() / reps as f64;
        let expect = 2.0 - 4.0 * (-2.0f64).exp();
        assert!((mean - expect).abs() < 0.01, "mean {mean}");
    }
}
