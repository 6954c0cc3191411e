//! Deterministic checks of the closed-form and quadrature results, one
//! ledger row per inequality.

use std::f64::consts::{E, TAU};

use circlaw::dpp::{lemma_gamma_identity, lemma_poisson_tail, lemma_stirling};
use circlaw::spiral::ring_displacements;
use circlaw::transport::MAX_FLOW_ARCS;
use circlaw::{
    bernoulli_profile, build_reference_measure, expected_count, expected_count_outside, m_for,
    quantization_error_bound, quantization_lower_bound, tv_mean_vs_uniform, tv_mean_vs_uniform_closed,
    var_quadrature, wasserstein_measure_to_uniform, MPolicy, Region, SolverMode,
};

use crate::config::{rounded_square, ExperimentConfig};
use crate::error::LabResult;
use crate::ledger::LedgerRow;

pub const MEAN_RADII: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
pub const OUTSIDE_RADII: [f64; 4] = [1.0, 1.1, 1.3, 2.0];

/// `1/(e√n) ≤ d_TV ≤ e/√n`, plus agreement of the quadrature with the
/// closed form. `eq` absorbs quadrature error at the `n = 1` endpoint.
pub fn tv_rows(n: usize, eq: f64) -> LabResult<Vec<LedgerRow>> {
    let tv = tv_mean_vs_uniform::<f64>(n)?;
    let root = (n as f64).sqrt();
    let params = format!("n={n}");
    Ok(vec![
        LedgerRow::at_least("tv_lower", params.clone(), tv.value, 1.0 / (E * root), eq),
        LedgerRow::at_most("tv_upper", params.clone(), tv.value, E / root, eq),
        LedgerRow::at_most(
            "tv_closed_form",
            params,
            (tv.value - tv_mean_vs_uniform_closed::<f64>(n)).abs(),
            eq,
            0.0,
        ),
    ])
}

/// Sector displacements against `8/√n` and against the per-ring bound.
pub fn coupling_rows(n: usize, m: usize) -> LabResult<Vec<LedgerRow>> {
    let rings = ring_displacements::<f64>(n, m)?;
    let overall = rings.iter().map(|r| r.max_displacement).fold(0.0, f64::max);
    let bound = quantization_error_bound::<f64>(n, m)?;
    let params = format!("n={n} m={m}");
    let mut rows = vec![LedgerRow::below("coupling_max", params.clone(), overall, bound)];
    let worst = rings
        .iter()
        .map(|r| r.bound - r.max_displacement)
        .fold(f64::INFINITY, f64::min);
    rows.push(LedgerRow::at_least(
        "coupling_ring",
        format!("{params} rings={}", rings.len()),
        worst,
        0.0,
        0.0,
    ));
    Ok(rows)
}

/// Certified `W_1(ν_n, ν)` through the `M`-point lattice; the whole
/// interval must sit above the quantization lower bound.
pub fn quantization_row(n: usize, big_m: usize) -> LabResult<Vec<LedgerRow>> {
    let lattice = build_reference_measure::<f64>(n, 0)?.lattice_measure()?;
    let cert = wasserstein_measure_to_uniform(&lattice, 1.0, big_m, SolverMode::Exact)?;
    let floor = quantization_lower_bound::<f64>(n)?;
    let params = format!("n={n} M={big_m}");
    Ok(vec![
        LedgerRow::at_least("quantization_interval", params.clone(), cert.lower, floor, 0.0),
        LedgerRow::info("quantization_upper", params, cert.upper),
    ])
}

/// `n r² - e√n ≤ E N(rD) ≤ n r²`, and `E N(rD) ≥ n r² - e²` away from the
/// edge.
pub fn mean_rows(n: usize, radii: &[f64]) -> LabResult<Vec<LedgerRow>> {
    let nf = n as f64;
    let edge = 1.0 - (nf.ln() / nf).sqrt();
    let mut rows = Vec::new();
    for &r in radii {
        let mean = expected_count(&Region::disc(r)?, n)?.mean;
        let area = nf * r * r;
        let params = format!("n={n} r={r}");
        rows.push(LedgerRow::within("mean_disc", params.clone(), mean, area - E * nf.sqrt(), area));
        if r <= edge {
            rows.push(LedgerRow::at_least("mean_disc_bulk", params, mean, area - E * E, 0.0));
        }
    }
    Ok(rows)
}

/// `Var N(A_{j,θ}) ≤ 16j` for every `j` with `j² < n`, and the `θ = 2π`
/// segment against the Bernoulli variance of the disc it equals.
pub fn variance_rows(n: usize, js: &[usize], thetas: &[f64], eq: f64) -> LabResult<Vec<LedgerRow>> {
    let mut rows = Vec::new();
    for &j in js.iter().filter(|&&j| j >= 1 && j * j < n) {
        for &theta in thetas {
            let v = var_quadrature::<f64>(j, theta, n)?;
            let params = format!("n={n} j={j} theta={theta}");
            rows.push(LedgerRow::at_most("variance_segment", params.clone(), v.value, 16.0 * j as f64, 0.0));
            if (theta - TAU).abs() < 1e-12 {
                let disc = bernoulli_profile::<f64>(n, (j + 1) as f64 / (n as f64).sqrt())?.variance();
                rows.push(LedgerRow::at_most("variance_full_segment", params, (v.value - disc).abs(), eq, 0.0));
            }
        }
    }
    Ok(rows)
}

/// Exact `E N(ℂ \ RD)` against its Stirling bound.
pub fn outside_rows(n: usize, radii: &[f64]) -> LabResult<Vec<LedgerRow>> {
    let mut rows = Vec::new();
    for &r in radii {
        let o = expected_count_outside::<f64>(n, r)?;
        let params = format!("n={n} R={r}");
        let mut row = LedgerRow::at_most("outside_disc", params, o.exact, o.bound, 0.0);
        if o.bound == 0.0 {
            // both underflow: compare logarithms
            row = LedgerRow::at_most(&row.anchor, format!("{} (log)", row.params), o.ln_exact, o.ln_bound, 0.0);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// The three auxiliary lemmas at a handful of points.
pub fn lemma_rows() -> LabResult<Vec<LedgerRow>> {
    let mut rows = Vec::new();
    for (k, a) in [(0usize, 0.5f64), (3, 2.0), (10, 7.5), (25, 40.0)] {
        let (lhs, rhs) = lemma_gamma_identity::<f64>(k, a)?;
        rows.push(LedgerRow::at_most(
            "lemma_gamma_integral",
            format!("k={k} a={a}"),
            (lhs - rhs).abs(),
            1e-10 * rhs.max(1e-300),
            0.0,
        ));
    }
    for (lam, n) in [(0.5f64, 1usize), (3.0, 5), (10.0, 10), (50.0, 64)] {
        let (tail, bound) = lemma_poisson_tail::<f64>(lam, n)?;
        rows.push(LedgerRow::at_most("lemma_poisson_tail", format!("lambda={lam} n={n}"), tail, bound, 0.0));
    }
    for n in [1usize, 2, 10, 100, 10_000] {
        let s = lemma_stirling::<f64>(n)?;
        let params = format!("n={n}");
        rows.push(LedgerRow::at_least("lemma_stirling_lower", params.clone(), s.ln_factorial, s.ln_lower, 0.0));
        rows.push(LedgerRow::at_most("lemma_stirling_upper", params, s.ln_factorial, s.ln_upper, 0.0));
    }
    Ok(rows)
}

/// Every deterministic check on the config's `n` grid.
pub fn verify_analytics(cfg: &ExperimentConfig) -> LabResult<Vec<LedgerRow>> {
    cfg.validate()?;
    let eq = cfg.tol("equality");
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        rows.extend(tv_rows(n, eq)?);
        let m = match m_for(n, cfg.m_policy) {
            Ok(m) => m,
            Err(_) => m_for(n, MPolicy::Paper)?,
        };
        rows.extend(coupling_rows(n, m)?);
        rows.extend(mean_rows(n, &MEAN_RADII)?);
        rows.extend(variance_rows(n, &cfg.j_list, &cfg.theta_list, 1e-6)?);
        rows.extend(outside_rows(n, &OUTSIDE_RADII)?);
        if m_for(n, MPolicy::Zero).is_ok() {
            let big_m = rounded_square(cfg.tol("quantization_m_factor") as usize * n, n)?;
            if n * big_m <= MAX_FLOW_ARCS {
                rows.extend(quantization_row(n, big_m)?);
            } else {
                rows.push(LedgerRow::info(
                    "quantization_interval",
                    format!("n={n} M={big_m} skipped: flow instance too large"),
                    (n * big_m) as f64,
                ));
            }
        }
    }
    rows.extend(lemma_rows()?);
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::any_failed;
    use std::f64::consts::PI;

    #[test]
    fn tv_at_one_is_inverse_e() {
        let rows = tv_rows(1, 1e-8).unwrap();
        assert!(!any_failed(&rows));
        assert!((rows[0].value - (-1f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn coupling_and_means_pass() {
        assert!(!any_failed(&coupling_rows(16, 0).unwrap()));
        assert!(!any_failed(&coupling_rows(20, 4).unwrap()));
        let rows = mean_rows(64, &MEAN_RADII).unwrap();
        assert!(rows.len() > MEAN_RADII.len());
        assert!(!any_failed(&rows));
    }

    #[test]
    fn outside_and_lemmas_pass() {
        let rows = outside_rows(1, &[1.0]).unwrap();
        assert!((rows[0].value - (-1f64).exp()).abs() < 1e-12);
        assert!(!any_failed(&outside_rows(256, &OUTSIDE_RADII).unwrap()));
        assert!(!any_failed(&lemma_rows().unwrap()));
    }

    #[test]
    fn variance_rows_include_full_segment() {
        let rows = variance_rows(64, &[2, 3], &[PI, TAU], 1e-6).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(!any_failed(&rows));
    }

    #[test]
    fn small_grid_ledger() {
        let cfg = ExperimentConfig {
            n_grid: vec![9, 10],
            j_list: vec![1, 2],
            ..ExperimentConfig::default()
        };
        let rows = verify_analytics(&cfg).unwrap();
        let failed: Vec<_> = rows.iter().filter(|r| r.failed()).collect();
        assert!(failed.is_empty(), "{failed:?}");
        assert!(rows.iter().any(|r| r.anchor == "quantization_interval"));
    }
}
