//! Campaign runner and report files. Everything written is a pure function
//! of the results, so repeated runs produce identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use circlaw::io::fmt_sci;
use serde::{Deserialize, Serialize};

use crate::analytics::verify_analytics;
use crate::bank::SpectrumBank;
use crate::config::ExperimentConfig;
use crate::deviations::{
    verify_counting_concentration_with, verify_edge_moment_with, verify_eigenvalue_deviation_with,
    DeviationTable,
};
use crate::error::LabResult;
use crate::ledger::{any_failed, LedgerRow};
use crate::rates::{run_rate_experiment_with, RateReport};

pub const RATES_CSV: &str = "rates.csv";
pub const RATES_JSON: &str = "rates.json";
pub const DEVIATIONS_CSV: &str = "deviations.csv";
pub const LEDGER_CSV: &str = "ledger.csv";
pub const PLOTS_GP: &str = "plots.gp";

pub const RATES_HEADER: [&str; 12] = [
    "n", "p", "replicate", "m", "big_m", "value", "lower", "upper", "spiral_upper", "method", "duality_gap",
    "status",
];
pub const DEVIATIONS_HEADER: [&str; 12] = [
    "kind", "n", "index", "theta", "level", "trials", "exceed", "frequency", "wilson_lo", "wilson_hi", "bound",
    "verdict",
];
pub const LEDGER_HEADER: [&str; 6] = ["anchor", "params", "value", "bound", "verdict", "margin"];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: BTreeMap<String, String>,
    pub rates: RateReport,
    pub deviations: DeviationTable,
    /// Analytic checks plus the ledgers of every campaign, in run order.
    pub ledger: Vec<LedgerRow>,
}

impl Report {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            config: cfg.summary().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            ..Self::default()
        }
    }

    pub fn failed(&self) -> bool {
        any_failed(&self.ledger)
    }
}

/// Which campaigns `run_campaign` executes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Campaigns {
    pub rates: bool,
    pub counts: bool,
    pub deviations: bool,
    pub edge: bool,
    pub analytics: bool,
}

impl Campaigns {
    pub const ALL: Campaigns = Campaigns {
        rates: true,
        counts: true,
        deviations: true,
        edge: true,
        analytics: true,
    };
    pub const NONE: Campaigns = Campaigns {
        rates: false,
        counts: false,
        deviations: false,
        edge: false,
        analytics: false,
    };
}

/// Runs the selected campaigns on one shared spectrum bank.
pub fn run_campaign(cfg: &ExperimentConfig, which: Campaigns) -> LabResult<Report> {
    cfg.validate()?;
    let mut bank = SpectrumBank::new(cfg.seed, cfg.reps);
    let mut report = Report::new(cfg);
    if which.analytics {
        report.ledger.extend(verify_analytics(cfg)?);
    }
    if which.rates {
        report.rates = run_rate_experiment_with(cfg, &mut bank)?;
        report.ledger.extend(report.rates.ledger.iter().cloned());
    }
    let mut table = DeviationTable::default();
    if which.counts {
        table.extend(verify_counting_concentration_with(cfg, &mut bank)?);
    }
    if which.deviations {
        table.extend(verify_eigenvalue_deviation_with(cfg, &mut bank)?);
    }
    if which.edge {
        table.extend(verify_edge_moment_with(cfg, &mut bank)?);
    }
    report.ledger.extend(table.ledger.iter().cloned());
    report.deviations = table;
    Ok(report)
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sci).unwrap_or_default()
}

fn write_csv<const K: usize>(path: &Path, header: [&str; K], rows: impl Iterator<Item = [String; K]>) -> LabResult<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn plot_script(report: &Report) -> String {
    let mut ps: Vec<f64> = report.rates.summaries.iter().map(|s| s.p).collect();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set logscale xy\n");
    s.push_str("set xlabel 'n'\n");
    s.push_str("set ylabel 'W_p(mu_n, nu)'\n");
    s.push_str("set key top right\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str("set output 'rates.png'\n");
    if ps.is_empty() {
        s.push_str("# no rate cells\n");
        return s;
    }
    let plots: Vec<String> = ps
        .iter()
        .flat_map(|p| {
            [
                format!("'{RATES_CSV}' using ($2=={p} && $12 eq \"ok\" ? $1 : 1/0):6 with points title 'W_{p}'"),
                format!("'{RATES_CSV}' using ($2=={p} && $12 eq \"ok\" ? $1 : 1/0):9 with points title 'spiral {p}'"),
            ]
        })
        .collect();
    s.push_str("plot ");
    s.push_str(&plots.join(", \\\n     "));
    s.push('\n');
    s
}

/// Writes the five report files into `dir` and returns their paths.
pub fn emit_report(report: &Report, dir: &Path) -> LabResult<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let paths: Vec<PathBuf> = [RATES_CSV, RATES_JSON, DEVIATIONS_CSV, LEDGER_CSV, PLOTS_GP]
        .iter()
        .map(|f| dir.join(f))
        .collect();

    write_csv(
        &paths[0],
        RATES_HEADER,
        report.rates.cells.iter().map(|c| {
            [
                c.n.to_string(),
                fmt_sci(c.p),
                c.replicate.to_string(),
                c.m.to_string(),
                c.big_m.to_string(),
                opt(c.value),
                opt(c.lower),
                opt(c.upper),
                opt(c.spiral_upper),
                c.method.clone(),
                opt(c.duality_gap),
                c.status.clone(),
            ]
        }),
    )?;

    let mut json = serde_json::to_string_pretty(&report.rates)?;
    json.push('\n');
    fs::write(&paths[1], json)?;

    write_csv(
        &paths[2],
        DEVIATIONS_HEADER,
        report.deviations.rows.iter().map(|r| {
            [
                r.kind.clone(),
                r.n.to_string(),
                r.index.to_string(),
                opt(r.theta),
                fmt_sci(r.level),
                r.trials.to_string(),
                r.exceed.to_string(),
                fmt_sci(r.frequency),
                fmt_sci(r.wilson_lo),
                fmt_sci(r.wilson_hi),
                opt(r.bound),
                r.verdict.as_str().to_string(),
            ]
        }),
    )?;

    write_csv(
        &paths[3],
        LEDGER_HEADER,
        report.ledger.iter().map(|r| {
            [
                r.anchor.clone(),
                r.params.clone(),
                fmt_sci(r.value),
                opt(r.bound),
                r.verdict.as_str().to_string(),
                opt(r.margin),
            ]
        }),
    )?;

    fs::write(&paths[4], plot_script(report))?;
    Ok(paths)
}
