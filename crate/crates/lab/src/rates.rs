//! Convergence-rate campaigns: certified `W_p(μ_n, ν)` per replicate, the
//! spiral-coupling upper bound, and log-log slope fits.

use std::time::{Duration, Instant};

use circlaw::stats::{least_squares, least_squares2};
use circlaw::{
    build_reference_measure, m_for, quantization_lower_bound, spiral_coupling_cost,
    wasserstein_to_uniform, MPolicy, Reference, Spectrum64,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bank::SpectrumBank;
use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};
use crate::ledger::LedgerRow;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateCell {
    pub n: usize,
    pub p: f64,
    pub replicate: u64,
    pub m: usize,
    pub big_m: usize,
    pub value: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub spiral_upper: Option<f64>,
    pub method: String,
    pub duality_gap: Option<f64>,
    pub status: String,
    /// Wall time for this cell. Not serialized, so reports stay
    /// byte-stable.
    #[serde(skip)]
    pub runtime: Duration,
}

impl RateCell {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub n: usize,
    pub p: f64,
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub mean_lower: f64,
    pub mean_upper: f64,
    pub mean_spiral_upper: f64,
    pub q95: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub p: f64,
    pub distinct_n: usize,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub slope_se: Option<f64>,
    /// `[b₀, b_log n, b_log log n]` of the fit with a `log log n` covariate.
    pub loglog: Option<[f64; 3]>,
    pub spiral_slope: Option<f64>,
    /// Smallest `K` with every per-n 95% quantile below `K √(log n) / n^{1/4}`.
    pub k_fit: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub cells: Vec<RateCell>,
    pub summaries: Vec<RateSummary>,
    pub fits: Vec<SlopeFit>,
    pub failures: Vec<String>,
    pub ledger: Vec<LedgerRow>,
}

pub fn run_rate_experiment(cfg: &ExperimentConfig) -> LabResult<RateReport> {
    cfg.validate()?;
    let mut bank = SpectrumBank::new(cfg.seed, cfg.reps);
    run_rate_experiment_with(cfg, &mut bank)
}

pub fn run_rate_experiment_with(cfg: &ExperimentConfig, bank: &mut SpectrumBank) -> LabResult<RateReport> {
    let mut cells = Vec::new();
    for &n in &cfg.n_grid {
        let m = m_for(n, cfg.m_policy).map_err(|e| match cfg.m_policy {
            MPolicy::Zero => LabError::Config(format!("zero-override needs square n: {e}")),
            MPolicy::Paper => LabError::Core(e),
        })?;
        let reference = build_reference_measure::<f64>(n, m)?;
        let big_m = cfg.big_m(n)?;
        let spectra = bank.get(n)?;
        let per_rep: Vec<Vec<RateCell>> = spectra
            .par_iter()
            .map(|s| rate_cells(cfg, s, &reference, big_m))
            .collect::<LabResult<_>>()?;
        for (pi, _) in cfg.p_list.iter().enumerate() {
            cells.extend(per_rep.iter().map(|row| row[pi].clone()));
        }
    }
    Ok(assemble(cfg, cells))
}

fn rate_cells(
    cfg: &ExperimentConfig,
    s: &Spectrum64,
    reference: &Reference,
    big_m: usize,
) -> LabResult<Vec<RateCell>> {
    let n = s.n();
    let coupling_slack = 8.0 / (n as f64).sqrt();
    cfg.p_list
        .iter()
        .map(|&p| {
            let start = Instant::now();
            let spiral = spiral_coupling_cost(s, reference, p, cfg.seed)? + coupling_slack;
            let mut cell = RateCell {
                n,
                p,
                replicate: s.replicate(),
                m: reference.m(),
                big_m,
                value: None,
                lower: None,
                upper: None,
                spiral_upper: Some(spiral),
                method: String::new(),
                duality_gap: None,
                status: "ok".into(),
                runtime: Duration::ZERO,
            };
            match wasserstein_to_uniform(s, p, big_m, cfg.solver_mode) {
                Ok(c) => {
                    cell.value = Some(c.value);
                    cell.lower = Some(c.lower);
                    cell.upper = Some(c.upper);
                    cell.method = c.method.as_str().into();
                    cell.duality_gap = Some(c.duality_gap);
                }
                Err(e @ (circlaw::Error::Resource(_) | circlaw::Error::NeedsFlow(_))) => {
                    cell.status = format!("error: {e}");
                }
                Err(e) => return Err(e.into()),
            }
            cell.runtime = start.elapsed();
            Ok(cell)
        })
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn upper_quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let idx = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
    v[idx]
}

fn assemble(cfg: &ExperimentConfig, cells: Vec<RateCell>) -> RateReport {
    let mut summaries = Vec::new();
    let mut ledger = Vec::new();
    let failures: Vec<String> = cells
        .iter()
        .filter(|c| !c.is_ok())
        .map(|c| format!("n={} p={} replicate={}: {}", c.n, c.p, c.replicate, c.status))
        .collect();

    for &n in &cfg.n_grid {
        for &p in &cfg.p_list {
            let ok: Vec<&RateCell> = cells.iter().filter(|c| c.n == n && c.p == p && c.is_ok()).collect();
            if ok.is_empty() {
                continue;
            }
            let values: Vec<f64> = ok.iter().filter_map(|c| c.value).collect();
            let lows: Vec<f64> = ok.iter().filter_map(|c| c.lower).collect();
            let ups: Vec<f64> = ok.iter().filter_map(|c| c.upper).collect();
            let spirals: Vec<f64> = ok.iter().filter_map(|c| c.spiral_upper).collect();
            let mu = mean(&values);
            let sd = if values.len() > 1 {
                (values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
            } else {
                0.0
            };
            summaries.push(RateSummary {
                n,
                p,
                count: ok.len(),
                mean: mu,
                sd,
                mean_lower: mean(&lows),
                mean_upper: mean(&ups),
                mean_spiral_upper: mean(&spirals),
                q95: upper_quantile(&values, 0.95),
            });
            let params = format!("n={n} p={p}");
            let dominance = ok
                .iter()
                .map(|c| c.spiral_upper.unwrap_or(f64::NAN) - c.value.unwrap_or(f64::NAN))
                .fold(f64::INFINITY, f64::min);
            ledger.push(LedgerRow::at_least("spiral_dominance", params.clone(), dominance, 0.0, 0.0));
            let min_upper = ups.iter().copied().fold(f64::INFINITY, f64::min);
            let floor = quantization_lower_bound::<f64>(n).unwrap_or(0.0);
            ledger.push(LedgerRow::at_least("quantization_lower", params, min_upper, floor, 0.0));
        }
    }

    let mut fits = Vec::new();
    for &p in &cfg.p_list {
        let rows: Vec<&RateSummary> = summaries.iter().filter(|s| s.p == p).collect();
        let x: Vec<f64> = rows.iter().map(|s| (s.n as f64).ln()).collect();
        let y: Vec<f64> = rows.iter().map(|s| s.mean.ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|s| s.mean_spiral_upper.ln()).collect();
        let lnln: Vec<f64> = rows.iter().map(|s| (s.n as f64).ln().ln()).collect();
        let main = least_squares(&x, &y).ok();
        let k_fit = rows
            .iter()
            .map(|s| s.q95 / ((s.n as f64).ln().sqrt() / (s.n as f64).powf(0.25)))
            .fold(None, |acc: Option<f64>, k| Some(acc.map_or(k, |a| a.max(k))));
        let fit = SlopeFit {
            p,
            distinct_n: rows.len(),
            slope: main.map(|f| f.slope),
            intercept: main.map(|f| f.intercept),
            slope_se: main.map(|f| f.slope_se),
            loglog: if main.is_some() { least_squares2(&x, &lnln, &y).ok() } else { None },
            spiral_slope: least_squares(&x, &ys).ok().map(|f| f.slope),
            k_fit,
        };
        let params = format!("p={p}");
        if let (Some(slope), Some(se)) = (fit.slope, fit.slope_se) {
            let hi = if p == 1.0 { cfg.tol("slope_max_p1") } else { cfg.tol("slope_max") };
            ledger.push(LedgerRow::within("rate_slope", params.clone(), slope, cfg.tol("slope_min"), hi));
            ledger.push(LedgerRow::info("rate_slope_se", params.clone(), se));
            if let Some(c) = fit.intercept {
                ledger.push(LedgerRow::info("rate_constant", params.clone(), c.exp()));
            }
            if let Some(b) = fit.loglog {
                ledger.push(LedgerRow::info("rate_slope_loglog", params.clone(), b[1]));
            }
            if let Some(s) = fit.spiral_slope {
                ledger.push(LedgerRow::info("spiral_slope", params.clone(), s));
            }
        }
        if let Some(k) = fit.k_fit {
            ledger.push(LedgerRow::info("quantile_constant", params, k));
        }
        fits.push(fit);
    }
    if !failures.is_empty() {
        ledger.push(LedgerRow::info("cell_failures", String::new(), failures.len() as f64));
    }
    RateReport {
        cells,
        summaries,
        fits,
        failures,
        ledger,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            n_grid: vec![4, 9, 16],
            reps: 3,
            p_list: vec![1.0, 2.0],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn cells_are_ordered_and_coherent() {
        let r = run_rate_experiment(&small()).unwrap();
        assert_eq!(r.cells.len(), 3 * 3 * 2);
        let keys: Vec<(usize, u64)> = r.cells.iter().map(|c| (c.n, c.replicate)).collect();
        assert_eq!(&keys[..4], &[(4, 0), (4, 1), (4, 2), (4, 0)]);
        for c in &r.cells {
            assert!(c.is_ok());
            let (v, lo, hi) = (c.value.unwrap(), c.lower.unwrap(), c.upper.unwrap());
            assert!(lo <= v && v <= hi);
            assert!(c.spiral_upper.unwrap() >= v);
        }
        assert_eq!(r.fits.len(), 2);
        assert!(r.fits.iter().all(|f| f.slope.is_some() && f.distinct_n == 3));
    }

    #[test]
    fn single_n_has_no_slope() {
        let cfg = ExperimentConfig { n_grid: vec![16], ..small() };
        let r = run_rate_experiment(&cfg).unwrap();
        assert_eq!(r.summaries.len(), 2);
        assert!(r.fits.iter().all(|f| f.slope.is_none()));
        assert!(r.ledger.iter().all(|row| row.anchor != "rate_slope"));
    }

    #[test]
    fn zero_override_needs_square_n() {
        let cfg = ExperimentConfig { n_grid: vec![10], ..small() };
        assert!(matches!(run_rate_experiment(&cfg), Err(LabError::Config(_))));
        let cfg = ExperimentConfig { m_policy: MPolicy::Paper, ..cfg };
        run_rate_experiment(&cfg).unwrap();
    }

    #[test]
    fn solver_refusal_is_a_cell_failure() {
        // M = 3·9 rounds to 25, not a multiple of 9, which auction mode rejects
        let cfg = ExperimentConfig {
            n_grid: vec![9],
            m_factor: 3,
            solver_mode: circlaw::SolverMode::Auction,
            ..small()
        };
        let r = run_rate_experiment(&cfg).unwrap();
        assert!(r.cells.iter().all(|c| !c.is_ok()));
        assert_eq!(r.failures.len(), r.cells.len());
        assert!(r.summaries.is_empty());
    }
}
