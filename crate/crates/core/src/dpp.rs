//! Determinantal structure of the Ginibre eigenvalues: kernel, exact
//! counting moments, outside-disc expectations, the TV distance of the mean
//! spectral measure, and the elementary lemmas behind them.
//!
//! Kernel arguments are in unnormalized coordinates (eigenvalues of `G`, not
//! `G/√n`); regions are in disc scale and are stretched by `√n` internally.

use num_complex::Complex;

use crate::error::{domain, Error, Result};
use crate::measures::{ComplexPoint, Region};
use crate::quadrature::{integrate, integrate_to_infinity, QuadOptions};
use crate::scalar::Real;
use crate::special::{
    compensated_sum, ln_factorial, ln_poisson_term, log_sum_exp, poisson_cdf_sf, CompensatedSum,
    PoissonTable,
};

/// `K(z, w) = (1/π) e^{-(|z|² + |w|²)/2} Σ_{k<n} (z w̄)^k / k!`, summed with
/// log magnitudes shifted by their maximum and the phase kept separately.
pub fn kernel<T: Real>(z: &ComplexPoint<T>, w: &ComplexPoint<T>, n: usize) -> Complex<T> {
    let gauss = -(z.modulus_sqr() + w.modulus_sqr()) * T::lit(0.5);
    let u = z.to_complex() * w.to_complex().conj();
    let rho = u.norm();
    if n == 0 {
        return Complex::new(T::zero(), T::zero());
    }
    if rho == T::zero() {
        return Complex::new(gauss.exp() * T::FRAC_1_PI(), T::zero());
    }
    let ln_rho = rho.ln();
    let alpha = u.im.atan2(u.re);
    let logs: Vec<T> = (0..n)
        .map(|k| T::of(k) * ln_rho - ln_factorial::<T>(k))
        .collect();
    let top = logs.iter().copied().fold(T::neg_infinity(), T::max);
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for (k, &l) in logs.iter().enumerate() {
        let mag = (l - top).exp();
        let phase = T::of(k) * alpha;
        re.add(mag * phase.cos());
        im.add(mag * phase.sin());
    }
    let scale = (top + gauss).exp() * T::FRAC_1_PI();
    Complex::new(re.value() * scale, im.value() * scale)
}

/// Bernoulli parameters of `N(rD)`: `params[k] = F_k(n r²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliProfile<T> {
    pub n: usize,
    pub x: T,
    pub params: Vec<T>,
    complements: Vec<T>,
}

impl<T: Real> BernoulliProfile<T> {
    /// `1 - params[k]`, computed directly rather than by subtraction.
    pub fn complements(&self) -> &[T] {
        &self.complements
    }

    pub fn mean(&self) -> T {
        compensated_sum(self.params.iter().copied())
    }

    pub fn variance(&self) -> T {
        compensated_sum(self.params.iter().zip(&self.complements).map(|(&p, &q)| p * q))
    }
}

pub fn bernoulli_profile<T: Real>(n: usize, r: T) -> Result<BernoulliProfile<T>> {
    if n == 0 {
        return domain("n must be positive");
    }
    if !(r >= T::zero()) || !r.is_finite() {
        return domain(format!("radius must be finite and ≥ 0, got {r}"));
    }
    let x = T::of(n) * r * r;
    Ok(profile_at(n, x))
}

fn profile_at<T: Real>(n: usize, x: T) -> BernoulliProfile<T> {
    let table = PoissonTable::new(x, n);
    BernoulliProfile {
        n,
        x,
        params: (0..n).map(|k| table.sf(k)).collect(),
        complements: (0..n).map(|k| table.cdf(k)).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CountMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

impl CountMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            CountMethod::ClosedForm => "closed-form",
            CountMethod::Quadrature => "quadrature",
            CountMethod::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountingStats<T> {
    pub region: Region<T>,
    pub n: usize,
    pub mean: T,
    pub variance: T,
    pub method: CountMethod,
    pub error_estimate: T,
}

/// `E N(A)` and `Var N(A)` for the rotation-invariant regions and the
/// initial segments.
pub fn expected_count<T: Real>(region: &Region<T>, n: usize) -> Result<CountingStats<T>> {
    region.validate()?;
    if n == 0 {
        return domain("n must be positive");
    }
    let closed = |mean: T, variance: T| CountingStats {
        region: *region,
        n,
        mean,
        variance,
        method: CountMethod::ClosedForm,
        error_estimate: T::zero(),
    };
    match *region {
        Region::Disc { radius } => {
            let p = bernoulli_profile(n, radius)?;
            Ok(closed(p.mean(), p.variance()))
        }
        Region::DiscComplement { radius } => {
            let p = bernoulli_profile(n, radius)?;
            let mean = compensated_sum(p.complements().iter().copied());
            Ok(closed(mean, p.variance()))
        }
        Region::Annulus { inner, outer } => {
            let a = bernoulli_profile(n, inner)?;
            let b = bernoulli_profile(n, outer)?;
            let params: Vec<T> = (0..n).map(|k| ring_param(&a, &b, k)).collect();
            let mean = compensated_sum(params.iter().copied());
            let variance = compensated_sum(params.iter().map(|&p| p * (T::one() - p)));
            Ok(closed(mean, variance))
        }
        Region::InitialSegment { j, theta, n: rn } => {
            if rn != n {
                return domain(format!("segment built for n={rn}, asked for n={n}"));
            }
            if j * j >= n {
                return domain(format!("initial segment j={j} is not below √n for n={n}"));
            }
            let jj = T::of(j);
            let inner = profile_at(n, jj * jj);
            let outer = profile_at(n, (jj + T::one()) * (jj + T::one()));
            let frac = theta / T::TAU();
            let ring = compensated_sum((0..n).map(|k| ring_param(&inner, &outer, k)));
            let mean = inner.mean() + frac * ring;
            let v = var_quadrature_with(j, theta, n, QuadOptions::absolute(default_var_tol()))?;
            Ok(CountingStats {
                region: *region,
                n,
                mean,
                variance: v.value,
                method: CountMethod::Quadrature,
                error_estimate: v.error,
            })
        }
        Region::Sector { .. } => domain(
            "sectors are not rotation invariant; their counting law has no closed form here",
        ),
    }
}

/// `F_k(b) - F_k(a)` using whichever tail avoids cancellation.
fn ring_param<T: Real>(a: &BernoulliProfile<T>, b: &BernoulliProfile<T>, k: usize) -> T {
    let v = if b.params[k] < T::lit(0.5) {
        b.params[k] - a.params[k]
    } else {
        a.complements()[k] - b.complements()[k]
    };
    v.max(T::zero())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceEstimate<T> {
    pub value: T,
    pub error: T,
}

/// `Var N(A_{j,θ})` with the default absolute tolerance `1e-4` (loosened to
/// `4096 ε` for single precision).
pub fn var_quadrature<T: Real>(j: usize, theta: T, n: usize) -> Result<VarianceEstimate<T>> {
    var_quadrature_with(j, theta, n, QuadOptions::absolute(default_var_tol()))
}

fn default_var_tol<T: Real>() -> T {
    T::lit(1e-4).max(T::lit(4096.0) * T::epsilon())
}

/// `Var N(A) = tr G - Σ_{k,l} |G_{kl}|²` with `G` the Gram matrix of the
/// kernel's eigenfunctions restricted to `A`.
///
/// For `A = {|z| < j} ∪ {j ≤ |z| < j+1, arg z ≤ θ}` (unnormalized scale),
/// `G_{kl} = δ_{kl} F_k(j²) + (1/π) R_{kl} Θ_{kl}` with
/// `R_{kl} = ∫_j^{j+1} r^{k+l+1} e^{-r²} dr / √(k! l!)` and
/// `Θ_{kl} = ∫_0^θ e^{i(k-l)φ} dφ`. Diagonal radial integrals are exact
/// (`R_{kk} = ΔF_k / 2`); off-diagonal ones use adaptive quadrature in log
/// form, skipping pairs with `R_{kk} R_{ll}` below `1e-30` (Cauchy–Schwarz
/// bounds their contribution).
pub fn var_quadrature_with<T: Real>(
    j: usize,
    theta: T,
    n: usize,
    opts: QuadOptions<T>,
) -> Result<VarianceEstimate<T>> {
    if j == 0 || (j + 1) * (j + 1) > n {
        return domain(format!("variance needs 1 ≤ j ≤ √n - 1 (j={j}, n={n})"));
    }
    if !(theta > T::zero() && theta <= T::TAU()) {
        return domain(format!("angle {theta} outside (0, 2π]"));
    }
    let jj = T::of(j);
    let inner = profile_at(n, jj * jj);
    let outer = profile_at(n, (jj + T::one()) * (jj + T::one()));
    let delta: Vec<T> = (0..n).map(|k| ring_param(&inner, &outer, k)).collect();
    let frac = theta / T::TAU();
    let diag: Vec<T> = (0..n).map(|k| inner.params[k] + frac * delta[k]).collect();

    let trace = compensated_sum(diag.iter().copied());
    let mut sq = CompensatedSum::new();
    for &g in &diag {
        sq.add(g * g);
    }

    let full_turn = theta >= T::TAU();
    let mut err = T::zero();
    if !full_turn {
        let half = T::lit(0.5);
        let rkk: Vec<T> = delta.iter().map(|&d| d * half).collect();
        let active: Vec<usize> = (0..n).filter(|&k| rkk[k] > T::lit(1e-15)).collect();
        let roundoff = T::lit(1e-12).max(T::lit(64.0) * T::epsilon());
        let pair_tol = opts.abs_tol / T::of(active.len().max(1) * active.len().max(1));
        let lo = jj;
        let hi = jj + T::one();
        for (ai, &k) in active.iter().enumerate() {
            for &l in &active[ai + 1..] {
                if rkk[k] * rkk[l] < T::lit(1e-30) {
                    continue;
                }
                let d = T::of(l - k);
                // |Θ_{kl}|² = (2 - 2cos(dθ)) / d²
                let theta_sq = (T::lit(2.0) - T::lit(2.0) * (d * theta).cos()) / (d * d);
                if theta_sq == T::zero() {
                    continue;
                }
                let shift = (ln_factorial::<T>(k) + ln_factorial::<T>(l)) * half;
                let power = T::of(k + l + 1);
                let f = |r: T| (power * r.ln() - r * r - shift).exp();
                let bound = (rkk[k] * rkk[l]).sqrt();
                let opts_pair = QuadOptions {
                    abs_tol: pair_tol.max(bound * roundoff),
                    rel_tol: T::lit(1e-10).max(roundoff),
                    max_intervals: opts.max_intervals,
                };
                let q = integrate(f, lo, hi, opts_pair)?;
                let r = q.value;
                // G_kl and G_lk contribute equally
                let coeff = T::lit(2.0) * theta_sq * T::FRAC_1_PI() * T::FRAC_1_PI();
                sq.add(coeff * r * r);
                err += coeff * T::lit(2.0) * r.abs() * q.error;
            }
        }
    }
    let value = (trace - sq.value()).max(T::zero());
    let err = err + T::lit(64.0) * T::epsilon() * trace;
    if err > opts.abs_tol {
        return Err(Error::Quadrature {
            estimate: value.to_f64_lossy(),
            error: err.to_f64_lossy(),
            tolerance: opts.abs_tol.to_f64_lossy(),
        });
    }
    Ok(VarianceEstimate { value, error: err })
}

/// The four-integral split of `Var N(A_{j,θ})` into disc/ring/outside
/// interactions. An independent code path used only to cross-check
/// [`var_quadrature`].
pub fn var_split<T: Real>(j: usize, theta: T, n: usize) -> Result<T> {
    if j == 0 || (j + 1) * (j + 1) > n {
        return domain(format!("variance needs 1 ≤ j ≤ √n - 1 (j={j}, n={n})"));
    }
    if !(theta > T::zero() && theta <= T::TAU()) {
        return domain(format!("angle {theta} outside (0, 2π]"));
    }
    let jj = T::of(j);
    let lo = jj;
    let hi = jj + T::one();
    let inner = profile_at(n, lo * lo);
    let outer = profile_at(n, hi * hi);
    let frac = theta / T::TAU();
    let two_pi = T::TAU();
    let half = T::lit(0.5);

    // Radial integrals computed by quadrature throughout (including the
    // diagonal), so this path shares nothing numerical with the Gram form.
    let radial = |k: usize, l: usize| -> Result<T> {
        let shift = (ln_factorial::<T>(k) + ln_factorial::<T>(l)) * half;
        let power = T::of(k + l + 1);
        let q = integrate(
            |r: T| (power * r.ln() - r * r - shift).exp(),
            lo,
            hi,
            QuadOptions {
                abs_tol: T::lit(1e-300),
                rel_tol: T::lit(1e-12),
                max_intervals: 4000,
            },
        )?;
        Ok(q.value)
    };

    let mut i1 = CompensatedSum::new();
    let mut i2 = CompensatedSum::new();
    let mut i3 = CompensatedSum::new();
    let mut rkk = vec![T::zero(); n];
    for k in 0..n {
        rkk[k] = radial(k, k)?;
        let dfk = T::lit(2.0) * rkk[k];
        i1.add(inner.params[k] * outer.complements()[k]);
        i2.add(inner.params[k] * dfk);
        i3.add(dfk * outer.complements()[k]);
    }
    let mut i4 = CompensatedSum::new();
    for k in 0..n {
        i4.add(rkk[k] * rkk[k] * theta * (two_pi - theta));
    }
    for k in 0..n {
        for l in 0..n {
            if k == l || rkk[k] * rkk[l] < T::lit(1e-30) {
                continue;
            }
            let d = T::of(k.abs_diff(l));
            let theta_sq = (T::lit(2.0) - T::lit(2.0) * (d * theta).cos()) / (d * d);
            let r = radial(k, l)?;
            i4.add(-(r * r * theta_sq));
        }
    }
    let pi2 = T::PI() * T::PI();
    Ok(i1.value()
        + (T::one() - frac) * i2.value()
        + frac * i3.value()
        + i4.value() / pi2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutsideEstimate<T> {
    pub exact: T,
    pub bound: T,
    pub ln_exact: T,
    pub ln_bound: T,
}

/// `E N(ℂ \ RD) = e^{-nR²} Σ_{ℓ<n} (nR²)^ℓ/ℓ! (n - ℓ)` and the Stirling
/// bound `(2π)^{-1/2} √n eⁿ R^{2(n-1)} e^{-nR²}`, both also as logarithms
/// since they underflow quickly.
pub fn expected_count_outside<T: Real>(n: usize, radius: T) -> Result<OutsideEstimate<T>> {
    if n == 0 {
        return domain("n must be positive");
    }
    if !(radius >= T::one()) || !radius.is_finite() {
        return domain(format!("outside-disc estimate needs finite R ≥ 1, got {radius}"));
    }
    let nn = T::of(n);
    let x = nn * radius * radius;
    let logs: Vec<T> = (0..n)
        .map(|l| ln_poisson_term(x, l) + T::of(n - l).ln())
        .collect();
    let ln_exact = log_sum_exp(&logs);
    let ln_bound = -T::lit(0.5) * T::TAU().ln() + T::lit(0.5) * nn.ln() + nn
        + T::lit(2.0) * T::of(n - 1) * radius.ln()
        - x;
    Ok(OutsideEstimate {
        exact: ln_exact.exp(),
        bound: ln_bound.exp(),
        ln_exact,
        ln_bound,
    })
}

/// Density of the mean spectral measure at modulus `r`:
/// `(1/π) P[Poisson(n r²) ≤ n - 1]`, together with its complement
/// `(1/π) P[Poisson(n r²) ≥ n]`.
fn mean_density<T: Real>(n: usize, r: T) -> (T, T) {
    let (cdf, sf) = poisson_cdf_sf(T::of(n) * r * r, n - 1);
    (cdf * T::FRAC_1_PI(), sf * T::FRAC_1_PI())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TvEstimate<T> {
    pub value: T,
    pub error: T,
}

/// `d_TV(ν, E μ_n)` by radial quadrature, split at the unit circle where
/// the uniform density jumps.
pub fn tv_mean_vs_uniform<T: Real>(n: usize) -> Result<TvEstimate<T>> {
    if n == 0 {
        return domain("n must be positive");
    }
    let opts = QuadOptions {
        abs_tol: T::lit(1e-10),
        rel_tol: T::zero(),
        max_intervals: 4000,
    };
    let tau = T::TAU();
    let inside = integrate(|r: T| tau * r * mean_density(n, r).1, T::zero(), T::one(), opts)?;
    let outside = integrate_to_infinity(|r: T| tau * r * mean_density(n, r).0, T::one(), opts)?;
    let half = T::lit(0.5);
    Ok(TvEstimate {
        value: half * (inside.value + outside.value),
        error: half * (inside.error + outside.error),
    })
}

/// Closed form `e^{-n} nⁿ / n!` of the same distance.
pub fn tv_mean_vs_uniform_closed<T: Real>(n: usize) -> T {
    let nn = T::of(n);
    (-nn + nn * nn.ln() - ln_factorial::<T>(n)).exp()
}

/// `((1/k!) ∫_a^∞ s^k e^{-s} ds, e^{-a} Σ_{ℓ≤k} a^ℓ/ℓ!)`.
pub fn lemma_gamma_identity<T: Real>(k: usize, a: T) -> Result<(T, T)> {
    if !(a > T::zero()) || !a.is_finite() {
        return domain(format!("a must be finite and > 0, got {a}"));
    }
    let lk = ln_factorial::<T>(k);
    let kk = T::of(k);
    let f = |s: T| (kk * s.ln() - s - lk).exp();
    let lhs = integrate_to_infinity(
        f,
        a,
        QuadOptions {
            abs_tol: T::lit(1e-13),
            rel_tol: T::zero(),
            max_intervals: 4000,
        },
    )?
    .value;
    let rhs = poisson_cdf_sf(a, k).0;
    Ok((lhs, rhs))
}

/// `(Σ_{k≥n} λ^k/k!, (eλ/n)ⁿ)` for `0 < λ ≤ n`.
pub fn lemma_poisson_tail<T: Real>(lam: T, n: usize) -> Result<(T, T)> {
    if n == 0 || !(lam > T::zero() && lam <= T::of(n)) {
        return domain(format!("Poisson tail lemma needs 0 < λ ≤ n (λ={lam}, n={n})"));
    }
    let upper = poisson_cdf_sf(lam, n - 1).1;
    let tail = upper * lam.exp();
    let bound = (T::E() * lam / T::of(n)).powi(n as i32);
    Ok((tail, bound))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StirlingSandwich<T> {
    pub ln_lower: T,
    pub ln_factorial: T,
    pub ln_upper: T,
}

impl<T: Real> StirlingSandwich<T> {
    pub fn holds(&self) -> bool {
        self.ln_lower <= self.ln_factorial && self.ln_factorial <= self.ln_upper
    }
}

/// `√(2π) n^{n+1/2} e^{-n} ≤ n! ≤ e n^{n+1/2} e^{-n}` in log form. `ln n!` is
/// a compensated sum of logarithms up to `10⁶`, the Stirling series beyond.
pub fn lemma_stirling<T: Real>(n: usize) -> Result<StirlingSandwich<T>> {
    if n == 0 {
        return domain("Stirling sandwich is stated for n ≥ 1");
    }
    let nn = T::of(n);
    let core = (nn + T::lit(0.5)) * nn.ln() - nn;
    let ln_factorial = if n <= 1_000_000 {
        compensated_sum((2..=n).map(|i| T::of(i).ln()))
    } else {
        ln_factorial::<T>(n)
    };
    Ok(StirlingSandwich {
        ln_lower: T::lit(0.5) * T::TAU().ln() + core,
        ln_factorial,
        ln_upper: T::one() + core,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{E, PI};

    fn pt(re: f64, im: f64) -> ComplexPoint<f64> {
        ComplexPoint::new(re, im).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let k = kernel(&pt(0.0, 0.0), &pt(0.0, 0.0), 5);
        assert!((k.re - 1.0 / PI).abs() < 1e-15 && k.im == 0.0);
        let k = kernel(&pt(1.0, 0.0), &pt(1.0, 0.0), 2);
        assert!((k.re - 2.0 / E / PI).abs() < 1e-15);
    }

    #[test]
    fn kernel_large_arguments_do_not_overflow() {
        let z = pt(30.0, 10.0);
        let k = kernel(&z, &z, 2000);
        // deep in the bulk K(z, z) ≈ 1/π
        assert!((k.re - 1.0 / PI).abs() < 1e-10, "{k}");
        let far = kernel(&pt(60.0, 0.0), &pt(60.0, 0.0), 200);
        assert!(far.re.is_finite() && far.re >= 0.0 && far.re < 1e-100);
    }

    #[test]
    fn profile_examples() {
        let p = bernoulli_profile(5, 0.0).unwrap();
        assert!(p.params.iter().all(|&x| x == 0.0));
        let p = bernoulli_profile(2, 1.0).unwrap();
        let e2 = (-2.0f64).exp();
        assert!((p.params[0] - (1.0 - e2)).abs() < 1e-15);
        assert!((p.params[1] - (1.0 - 3.0 * e2)).abs() < 1e-15);
    }

    #[test]
    fn disc_mean_n2() {
        let s = expected_count(&Region::disc(1.0).unwrap(), 2).unwrap();
        assert!((s.mean - (2.0 - 4.0 * (-2.0f64).exp())).abs() < 1e-14);
        assert!(s.variance <= s.mean);
    }

    #[test]
    fn sector_is_unsupported() {
        assert!(expected_count(&Region::<f64>::sector(1, 16).unwrap(), 16).is_err());
    }

    #[test]
    fn disc_plus_complement_is_n() {
        for &n in &[1usize, 7, 64, 256] {
            for &r in &[0.0, 0.3, 0.99, 1.0, 1.2] {
                let a = expected_count(&Region::disc(r).unwrap(), n).unwrap().mean;
                let b = expected_count(&Region::disc_complement(r).unwrap(), n).unwrap().mean;
                assert!((a + b - n as f64).abs() < 1e-10 * n as f64);
            }
        }
    }

    #[test]
    fn full_segment_variance_equals_disc_variance() {
        for &(j, n) in &[(1usize, 4usize), (1, 16), (3, 16), (5, 64), (15, 256)] {
            let v = var_quadrature(j, 2.0 * PI, n).unwrap().value;
            let d = bernoulli_profile(n, (j + 1) as f64 / (n as f64).sqrt()).unwrap().variance();
            assert!((v - d).abs() < 1e-6, "j={j} n={n}: {v} vs {d}");
        }
    }

    #[test]
    fn gram_and_split_agree() {
        for &(j, theta, n) in &[(1usize, PI / 2.0, 16usize), (3, PI, 64), (5, 1.0, 64)] {
            let g = var_quadrature(j, theta, n).unwrap().value;
            let s = var_split(j, theta, n).unwrap();
            assert!((g - s).abs() < 1e-6, "j={j} θ={theta}: {g} vs {s}");
        }
    }

    #[test]
    fn segment_stats_are_bernoulli_like() {
        let s = expected_count(&Region::initial_segment(3, PI, 64).unwrap(), 64).unwrap();
        assert!(s.variance >= 0.0 && s.variance <= s.mean && s.variance <= 48.0);
        assert_eq!(s.method, CountMethod::Quadrature);
    }

    #[test]
    fn outside_examples() {
        let o = expected_count_outside(1, 1.0).unwrap();
        assert!((o.exact - (-1.0f64).exp()).abs() < 1e-15);
        assert!((o.bound - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        let o = expected_count_outside(256, 1.3).unwrap();
        assert!(o.exact < 1e-8 && o.bound < 1e-8 && o.exact <= o.bound);
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let r = 3.0 + 0.1 * i as f64;
            let o = expected_count_outside(64, r).unwrap();
            assert!(o.ln_exact < prev);
            prev = o.ln_exact;
        }
        assert!(expected_count_outside(64, 3.0).unwrap().exact < 1e-40);
        assert!(expected_count_outside::<f64>(4, 0.5).is_err());
    }

    #[test]
    fn outside_matches_complement_mean() {
        for &n in &[1usize, 16, 256] {
            for &r in &[1.0, 1.05, 1.3] {
                let o = expected_count_outside(n, r).unwrap().exact;
                let inside = expected_count(&Region::disc(r).unwrap(), n).unwrap().mean;
                assert!((inside + o - n as f64).abs() < 1e-8, "n={n} r={r}");
            }
        }
    }

    #[test]
    fn tv_matches_closed_form() {
        for &n in &[1usize, 2, 4, 16, 64, 256] {
            let q = tv_mean_vs_uniform::<f64>(n).unwrap().value;
            let c = tv_mean_vs_uniform_closed::<f64>(n);
            assert!((q - c).abs() < 1e-8, "n={n}: {q} vs {c}");
        }
        assert!((tv_mean_vs_uniform_closed::<f64>(1) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn gamma_identity_examples() {
        let (l, r) = lemma_gamma_identity(0, 1.0).unwrap();
        assert!((l - (-1.0f64).exp()).abs() < 1e-12 && (r - (-1.0f64).exp()).abs() < 1e-15);
        let (l, r) = lemma_gamma_identity(1, 1.0).unwrap();
        assert!((l - 2.0 / E).abs() < 1e-12 && (r - 2.0 / E).abs() < 1e-15);
        let (l, r) = lemma_gamma_identity::<f64>(5, 3.7).unwrap();
        assert!((l - r).abs() < 1e-10);
    }

    #[test]
    fn poisson_tail_examples() {
        let (t, b) = lemma_poisson_tail(1.0, 2).unwrap();
        assert!((t - (E - 2.0)).abs() < 1e-14);
        assert!((b - (E / 2.0).powi(2)).abs() < 1e-14);
        let (t, b) = lemma_poisson_tail(20.0, 20).unwrap();
        assert!(t < b && (b - 20f64.exp()).abs() < 1e-6 * b);
        let (t, b) = lemma_poisson_tail(10.0, 20).unwrap();
        assert!(t <= b);
        assert!(lemma_poisson_tail(3.0, 2).is_err());
    }

    #[test]
    fn stirling_examples() {
        let s = lemma_stirling::<f64>(1).unwrap();
        assert!((s.ln_lower.exp() - 0.92214).abs() < 1e-5);
        assert_eq!(s.ln_factorial, 0.0);
        assert!(s.holds());
        assert!(lemma_stirling::<f64>(10).unwrap().holds());
        assert!(lemma_stirling::<f64>(1_000_000).unwrap().holds());
    }

    proptest! {
        #[test]
        fn kernel_is_hermitian(
            a in -4.0f64..4.0, b in -4.0f64..4.0, c in -4.0f64..4.0, d in -4.0f64..4.0,
            n in 1usize..60,
        ) {
            let (z, w) = (pt(a, b), pt(c, d));
            let k1 = kernel(&z, &w, n);
            let k2 = kernel(&w, &z, n).conj();
            prop_assert!((k1 - k2).norm() <= 1e-12);
        }

        #[test]
        fn profile_is_monotone(n in 1usize..300, r in 0.0f64..1.5) {
            let p = bernoulli_profile(n, r).unwrap();
            for w in p.params.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
            prop_assert!(p.params.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
    }
}
