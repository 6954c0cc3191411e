//! Small statistics kit: two-sample Kolmogorov–Smirnov, Wilson intervals,
//! least-squares fits.

use crate::error::{domain, Result};

/// Two-sided normal quantile for 99% coverage.
pub const Z_99: f64 = 2.5758293035489004;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    /// Asymptotic critical value at level `alpha`:
    /// `√(-ln(alpha/2)/2) · √((n₁+n₂)/(n₁n₂))`.
    pub critical: f64,
    pub alpha: f64,
}

impl KsResult {
    pub fn passes(&self) -> bool {
        self.statistic < self.critical
    }
}

/// Two-sample KS statistic `sup |F₁ - F₂|`. Inputs need not be sorted.
pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return domain("KS test needs two non-empty samples");
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return domain("KS test on non-finite data");
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    Ok(KsResult {
        statistic: d,
        critical: c * ((n1 + n2) / (n1 * n2)).sqrt(),
        alpha,
    })
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let phat = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (phat + z2 / (2.0 * nf)) / denom;
    let half = z * (phat * (1.0 - phat) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = intercept + slope·x`. Needs at least three
/// distinct `x` for a standard error.
pub fn least_squares(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return domain("x and y lengths differ");
    }
    let n = x.len();
    let mut xs: Vec<f64> = x.to_vec();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return domain(format!("slope fit needs ≥ 3 distinct x, got {}", xs.len()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let slope_se = (sse / (nf - 2.0) / sxx).sqrt();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(LinearFit {
        slope,
        intercept,
        slope_se,
        r_squared,
    })
}

/// Least squares `y = b₀ + b₁ x₁ + b₂ x₂`; returns `[b₀, b₁, b₂]`.
pub fn least_squares2(x1: &[f64], x2: &[f64], y: &[f64]) -> Result<[f64; 3]> {
    let n = y.len();
    if x1.len() != n || x2.len() != n {
        return domain("regressor lengths differ");
    }
    if n < 3 {
        return domain("two-covariate fit needs ≥ 3 points");
    }
    let mut a = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for i in 0..n {
        let row = [1.0, x1[i], x2[i]];
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] += row[r] * row[c];
            }
            rhs[r] += row[r] * y[i];
        }
    }
    // Gaussian elimination with partial pivoting
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
            .unwrap_or(col);
        if a[piv][col].abs() < 1e-300 {
            return domain("singular design matrix");
        }
        a.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut b = [0.0f64; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * b[c]).sum();
        b[r] = (rhs[r] - s) / a[r][r];
    }
    Ok(b)
}
