//! Special functions and compensated summation.

use crate::scalar::Real;

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

impl<T: Real> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<T: Real, I: IntoIterator<Item = T>>(iter: I) -> T {
    iter.into_iter().collect::<CompensatedSum<T>>().value()
}

/// `ln(k!)`. Exact product below 20, Stirling series with five correction
/// terms above (truncation error below 1e-17 there).
pub fn ln_factorial<T: Real>(k: usize) -> T {
    if k < 20 {
        let mut prod = 1.0_f64;
        for i in 2..=k {
            prod *= i as f64;
        }
        return T::lit(prod.ln());
    }
    stirling_ln_gamma(T::of(k) + T::one())
}

/// `ln Γ(x)` for `x > 0`: upward shift to `x ≥ 15` followed by the Stirling
/// series.
pub fn ln_gamma<T: Real>(x: T) -> T {
    debug_assert!(x > T::zero());
    let threshold = T::lit(15.0);
    let mut shift = T::zero();
    let mut y = x;
    while y < threshold {
        shift += y.ln();
        y += T::one();
    }
    stirling_ln_gamma(y) - shift
}

pub fn gamma<T: Real>(x: T) -> T {
    ln_gamma(x).exp()
}

fn stirling_ln_gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    let inv = x.recip();
    let inv2 = inv * inv;
    let series = inv
        * (T::lit(1.0 / 12.0)
            - inv2
                * (T::lit(1.0 / 360.0)
                    - inv2
                        * (T::lit(1.0 / 1260.0)
                            - inv2 * (T::lit(1.0 / 1680.0) - inv2 * T::lit(1.0 / 1188.0)))));
    (x - half) * x.ln() - x + half * (T::TAU()).ln() + series
}

/// Numerically stable `ln Σ exp(v)`; returns `-inf` for an empty or all
/// `-inf` input.
pub fn log_sum_exp<T: Real>(values: &[T]) -> T {
    let max = values
        .iter()
        .copied()
        .fold(T::neg_infinity(), |a, b| a.max(b));
    if max == T::neg_infinity() {
        return max;
    }
    let s = compensated_sum(values.iter().map(|&v| (v - max).exp()));
    max + s.ln()
}

/// `ln(e^{-x} x^l / l!)`, with the `x = 0` limit handled.
///
/// Uses the saddle-point form `-½ln(2πl) - δ(l) - D(l, x)` (Loader), where
/// `δ` is the Stirling remainder and `D(l, x) = l ln(l/x) + x - l` is
/// evaluated without cancellation near `l = x`. The naive sum of three large
/// logarithms would lose about `log10(x)` digits.
pub fn ln_poisson_term<T: Real>(x: T, l: usize) -> T {
    if x == T::zero() {
        return if l == 0 { T::zero() } else { T::neg_infinity() };
    }
    if l == 0 {
        return -x;
    }
    let lf = T::of(l);
    -(T::TAU() * lf).ln() * T::lit(0.5) - stirling_remainder::<T>(l) - bd0(lf, x)
}

/// `ln l! - (l + ½) ln l + l - ½ ln 2π`.
fn stirling_remainder<T: Real>(l: usize) -> T {
    if l < 16 {
        let lf = l as f64;
        let exact = ln_factorial::<f64>(l) - (lf + 0.5) * lf.ln() + lf - 0.5 * std::f64::consts::TAU.ln();
        return T::lit(exact);
    }
    let inv = T::of(l).recip();
    let inv2 = inv * inv;
    inv * (T::lit(1.0 / 12.0)
        - inv2
            * (T::lit(1.0 / 360.0)
                - inv2 * (T::lit(1.0 / 1260.0) - inv2 * (T::lit(1.0 / 1680.0) - inv2 * T::lit(1.0 / 1188.0)))))
}

/// `l ln(l/x) + x - l ≥ 0`.
fn bd0<T: Real>(l: T, x: T) -> T {
    let d = l - x;
    if d.abs() < T::lit(0.1) * (l + x) {
        let v = d / (l + x);
        let mut s = d * v;
        let mut ej = T::lit(2.0) * l * v;
        let v2 = v * v;
        let mut j = 1;
        loop {
            ej *= v2;
            let next = s + ej / T::of(2 * j + 1);
            if next == s {
                return s;
            }
            s = next;
            j += 1;
        }
    }
    l * (l / x).ln() + x - l
}

/// Poisson(x) probabilities `π_l = e^{-x} x^l / l!` together with both
/// cumulative directions, so that lower and upper tails are each obtained
/// without cancellation.
///
/// Terms are anchored at the mode in log form and then filled by the ratio
/// recurrence `π_{l+1} = π_l · x / (l + 1)` in both directions; far terms
/// underflow to zero harmlessly.
#[derive(Clone, Debug)]
pub struct PoissonTable<T> {
    x: T,
    terms: Vec<T>,
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Real> PoissonTable<T> {
    /// Table valid for indices `0..=need`.
    pub fn new(x: T, need: usize) -> Self {
        assert!(x >= T::zero() && x.is_finite(), "Poisson mean must be finite and ≥ 0");
        let xf = x.to_f64_lossy();
        let reach = (xf + 40.0 * xf.sqrt() + 60.0).ceil() as usize;
        let top = need.max(reach) + 1;
        let mut terms = vec![T::zero(); top + 1];
        if x == T::zero() {
            terms[0] = T::one();
        } else {
            let mode = (xf.floor() as usize).min(top);
            terms[mode] = ln_poisson_term(x, mode).exp();
            for l in mode..top {
                terms[l + 1] = terms[l] * x / T::of(l + 1);
            }
            for l in (1..=mode).rev() {
                terms[l - 1] = terms[l] * T::of(l) / x;
            }
            // the table spans all but a negligible tail, so renormalizing
            // removes the rounding carried in by the log-domain anchor
            let total: T = compensated_sum(terms.iter().copied());
            terms.iter_mut().for_each(|t| *t /= total);
        }
        let mut lower = vec![T::zero(); top + 1];
        let mut acc = CompensatedSum::new();
        for (l, &t) in terms.iter().enumerate() {
            acc.add(t);
            lower[l] = acc.value().min(T::one());
        }
        // upper[k] = Σ_{l > k} π_l, accumulated from the far tail inward.
        let mut upper = vec![T::zero(); top + 1];
        let mut acc = CompensatedSum::new();
        for l in (0..top).rev() {
            acc.add(terms[l + 1]);
            upper[l] = acc.value().min(T::one());
        }
        Self {
            x,
            terms,
            lower,
            upper,
        }
    }

    pub fn mean(&self) -> T {
        self.x
    }

    pub fn term(&self, l: usize) -> T {
        self.terms.get(l).copied().unwrap_or(T::zero())
    }

    /// `P[X ≤ k] = e^{-x} Σ_{l ≤ k} x^l / l!`.
    pub fn cdf(&self, k: usize) -> T {
        self.lower.get(k).copied().unwrap_or(T::one())
    }

    /// `P[X > k] = Σ_{l > k} π_l`, i.e. the regularized lower incomplete
    /// gamma function with shape `k + 1` at `x`.
    pub fn sf(&self, k: usize) -> T {
        self.upper.get(k).copied().unwrap_or(T::zero())
    }
}

/// `(P[X ≤ k], P[X > k])` for `X ~ Poisson(x)`, summing only the tail on
/// the far side of the mode, where terms decay geometrically. Cost is
/// `O(√x)` rather than the `O(x)` of a full table.
pub fn poisson_cdf_sf<T: Real>(x: T, k: usize) -> (T, T) {
    if x == T::zero() {
        return (T::one(), T::zero());
    }
    let eps = T::epsilon() * T::lit(0.01);
    if x <= T::of(k) {
        // upper tail from l = k + 1 upward
        let mut term = ln_poisson_term(x, k + 1).exp();
        let mut acc = CompensatedSum::new();
        let mut l = k + 1;
        while term > T::zero() {
            acc.add(term);
            if term <= eps * acc.value() {
                break;
            }
            l += 1;
            term = term * x / T::of(l);
        }
        let sf = acc.value().min(T::one());
        (T::one() - sf, sf)
    } else {
        // lower tail from l = k downward
        let mut term = ln_poisson_term(x, k).exp();
        let mut acc = CompensatedSum::new();
        let mut l = k;
        loop {
            acc.add(term);
            if l == 0 || term <= eps * acc.value() {
                break;
            }
            term = term * T::of(l) / x;
            l -= 1;
        }
        let cdf = acc.value().min(T::one());
        (cdf, T::one() - cdf)
    }
}
