use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use circlaw::io::{fmt_sci, write_lattice, write_spectrum};
use circlaw::{build_reference_measure, m_for, sample_spectrum, wasserstein_to_uniform};
use circlaw_lab::analytics::tv_rows;
use circlaw_lab::config::{parse_m_policy, parse_solver, ExperimentConfig};
use circlaw_lab::error::{EXIT_LEDGER, EXIT_OK, EXIT_RESOURCE, EXIT_USAGE};
use circlaw_lab::{emit_report, run_campaign, Campaigns, LabError, LabResult, Report, Verdict};
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "circlaw", version, about = "Ginibre spectra, spiral lattices and circular-law checks")]
struct Cli {
    /// Campaign seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// exact or auction.
    #[arg(long, global = true)]
    solver: Option<String>,
    /// Comma-separated matrix sizes.
    #[arg(long, global = true)]
    n_grid: Option<String>,
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Comma-separated exponents.
    #[arg(long = "p", global = true)]
    p_list: Option<String>,
    #[arg(long, global = true)]
    m_factor: Option<usize>,
    /// paper or zero-override.
    #[arg(long, global = true)]
    m_policy: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample one spectrum and write it in spiral order.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        replicate: u64,
    },
    /// Write the spiral lattice of the predicted measure.
    Lattice {
        #[arg(long)]
        n: usize,
        /// Points left off the lattice (default: from the m policy).
        #[arg(long)]
        m: Option<usize>,
    },
    /// Certified W_p distance from one spectrum to the uniform law.
    Wasserstein {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        replicate: u64,
    },
    /// Counting-function concentration tables.
    Counts,
    /// Eigenvalue deviation tables and outer-eigenvalue moments.
    Deviations,
    /// Convergence-rate campaign.
    Rates,
    /// Total variation between the mean spectral measure and the uniform law.
    Tv,
    /// Deterministic analytic checks.
    Verify,
    /// Every campaign.
    Report,
}

fn load_config(cli: &Cli) -> LabResult<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_text(&fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(s) = &cli.solver {
        cfg.solver_mode = parse_solver(s).ok_or_else(|| LabError::Config(format!("unknown solver {s:?}")))?;
    }
    if let Some(p) = &cli.m_policy {
        cfg.m_policy = parse_m_policy(p).ok_or_else(|| LabError::Config(format!("unknown m policy {p:?}")))?;
    }
    if let Some(v) = &cli.n_grid {
        cfg.set("n_grid", v)?;
    }
    if let Some(v) = &cli.p_list {
        cfg.set("p_list", v)?;
    }
    if let Some(r) = cli.reps {
        cfg.reps = r;
    }
    if let Some(f) = cli.m_factor {
        cfg.m_factor = f;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn finish(report: &Report, cfg: &ExperimentConfig) -> LabResult<i32> {
    emit_report(report, &cfg.output_dir)?;
    let count = |v: Verdict| report.ledger.iter().filter(|r| r.verdict == v).count();
    for r in report.ledger.iter().filter(|r| r.failed()) {
        eprintln!("FAIL {} [{}] value={} bound={:?}", r.anchor, r.params, r.value, r.bound);
    }
    println!(
        "{} pass, {} fail, {} info; report in {}",
        count(Verdict::Pass),
        count(Verdict::Fail),
        count(Verdict::Info),
        cfg.output_dir.display()
    );
    Ok(if report.failed() { EXIT_LEDGER } else { EXIT_OK })
}

fn create(cfg: &ExperimentConfig, name: &str) -> LabResult<(PathBuf, BufWriter<File>)> {
    fs::create_dir_all(&cfg.output_dir)?;
    let path = cfg.output_dir.join(name);
    let file = File::create(&path)?;
    Ok((path, BufWriter::new(file)))
}

fn run(cli: &Cli, cfg: &ExperimentConfig) -> LabResult<i32> {
    let only = |f: fn(&mut Campaigns)| {
        let mut c = Campaigns::NONE;
        f(&mut c);
        c
    };
    match &cli.command {
        Command::Sample { n, replicate } => {
            let s = sample_spectrum::<f64>(*n, cfg.seed, *replicate)?;
            let (path, mut w) = create(cfg, &format!("spectrum_n{n}_r{replicate}.txt"))?;
            write_spectrum(&mut w, &s)?;
            w.flush()?;
            println!("{}", path.display());
            Ok(EXIT_OK)
        }
        Command::Lattice { n, m } => {
            let m = match m {
                Some(m) => *m,
                None => m_for(*n, cfg.m_policy)?,
            };
            let nu = build_reference_measure::<f64>(*n, m)?;
            let (path, mut w) = create(cfg, &format!("lattice_n{n}_m{m}.txt"))?;
            write_lattice(&mut w, &nu)?;
            w.flush()?;
            println!("{}", path.display());
            Ok(EXIT_OK)
        }
        Command::Wasserstein { n, replicate } => {
            let s = sample_spectrum::<f64>(*n, cfg.seed, *replicate)?;
            let big_m = cfg.big_m(*n)?;
            for &p in &cfg.p_list {
                let c = wasserstein_to_uniform(&s, p, big_m, cfg.solver_mode)?;
                println!(
                    "n={n} replicate={replicate} p={p} M={big_m} value={} lower={} upper={} method={} gap={}",
                    fmt_sci(c.value),
                    fmt_sci(c.lower),
                    fmt_sci(c.upper),
                    c.method.as_str(),
                    fmt_sci(c.duality_gap)
                );
            }
            Ok(EXIT_OK)
        }
        Command::Counts => finish(&run_campaign(cfg, only(|c| c.counts = true))?, cfg),
        Command::Deviations => finish(
            &run_campaign(
                cfg,
                only(|c| {
                    c.deviations = true;
                    c.edge = true;
                }),
            )?,
            cfg,
        ),
        Command::Rates => finish(&run_campaign(cfg, only(|c| c.rates = true))?, cfg),
        Command::Tv => {
            let mut report = Report::new(cfg);
            for &n in &cfg.n_grid {
                report.ledger.extend(tv_rows(n, cfg.tol("equality"))?);
            }
            finish(&report, cfg)
        }
        Command::Verify => finish(&run_campaign(cfg, only(|c| c.analytics = true))?, cfg),
        Command::Report => finish(&run_campaign(cfg, Campaigns::ALL)?, cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK } as u8);
        }
    };
    let code = match load_config(&cli) {
        Err(e) => {
            eprintln!("circlaw: {e}");
            e.exit_code()
        }
        Ok(cfg) => {
            let pool = match cli.threads {
                Some(0) => {
                    eprintln!("circlaw: --threads must be positive");
                    return ExitCode::from(EXIT_USAGE as u8);
                }
                Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build(),
                None => rayon::ThreadPoolBuilder::new().build(),
            };
            match pool {
                Err(e) => {
                    eprintln!("circlaw: cannot start worker threads: {e}");
                    EXIT_RESOURCE
                }
                Ok(pool) => pool.install(|| run(&cli, &cfg)).unwrap_or_else(|e| {
                    eprintln!("circlaw: {e}");
                    e.exit_code()
                }),
            }
        }
    };
    ExitCode::from(code as u8)
}
