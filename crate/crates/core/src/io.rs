//! Plain-text formats: spectrum files, lattice dumps, transport plans and
//! analytic tables.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::measures::{ComplexPoint, Spectrum};
use crate::scalar::Real;
use crate::spiral::{sort_spectrum_spiral, PredictedMeasure};
use crate::transport::TransportPlan;

pub const SPECTRUM_MAGIC: &str = "# circlaw-spectrum";
pub const LATTICE_MAGIC: &str = "# circlaw-lattice";
pub const FORMAT_VERSION: &str = "v1";

pub const PLAN_HEADER: &str = "source_index,target_index,mass";
pub const ANALYTIC_HEADER: &str = "n,region,param1,param2,mean,variance,bound,method,error_estimate";

/// 17 significant digits in scientific notation.
pub fn fmt_sci<T: Real>(x: T) -> String {
    format!("{:.16e}", x.to_f64_lossy())
}

fn format_err<T>(line: usize, msg: impl std::fmt::Display) -> Result<T> {
    Err(Error::Format(format!("line {line}: {msg}")))
}

fn parse_num<T: Real>(s: &str, line: usize) -> Result<T> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(T::lit(v)),
        _ => format_err(line, format!("bad number {s:?}")),
    }
}

/// Parses `key=value` pairs following the magic and version tokens.
fn header_fields<'a>(header: &'a str, magic: &str) -> Result<Vec<(&'a str, &'a str)>> {
    let rest = match header.strip_prefix(magic) {
        Some(r) => r.trim(),
        None => return format_err(1, format!("expected header starting with {magic:?}")),
    };
    let mut tokens = rest.split_whitespace();
    match tokens.next() {
        Some(FORMAT_VERSION) => {}
        Some(v) => return format_err(1, format!("unsupported format version {v:?}")),
        None => return format_err(1, "missing format version"),
    }
    tokens
        .map(|t| t.split_once('=').ok_or_else(|| Error::Format(format!("line 1: bad field {t:?}"))))
        .collect()
}

fn field<T: std::str::FromStr>(fields: &[(&str, &str)], key: &str) -> Result<T> {
    let raw = fields
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::Format(format!("line 1: header lacks {key}")))?;
    raw.parse()
        .map_err(|_| Error::Format(format!("line 1: bad {key} value {raw:?}")))
}

fn write_points<T: Real, W: Write>(w: &mut W, points: &[ComplexPoint<T>]) -> Result<()> {
    for z in points {
        writeln!(w, "{},{}", fmt_sci(z.re()), fmt_sci(z.im()))?;
    }
    Ok(())
}

fn read_points<T: Real, R: BufRead>(lines: &mut std::io::Lines<R>) -> Result<Vec<ComplexPoint<T>>> {
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let Some((re, im)) = line.split_once(',') else {
            return format_err(lineno, "expected <re>,<im>");
        };
        out.push(ComplexPoint::new(parse_num(re, lineno)?, parse_num(im, lineno)?)?);
    }
    Ok(out)
}

/// Writes the header and one `<re>,<im>` line per eigenvalue in spiral order.
pub fn write_spectrum<T: Real, W: Write>(w: &mut W, s: &Spectrum<T>) -> Result<()> {
    let sorted = sort_spectrum_spiral(s);
    writeln!(
        w,
        "{SPECTRUM_MAGIC} {FORMAT_VERSION} n={} seed={} replicate={}",
        s.n(),
        s.seed(),
        s.replicate()
    )?;
    write_points(w, sorted.eigenvalues())
}

pub fn read_spectrum<T: Real, R: BufRead>(r: R) -> Result<Spectrum<T>> {
    let mut lines = r.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return format_err(1, "empty spectrum file"),
    };
    let fields = header_fields(&header, SPECTRUM_MAGIC)?;
    let n: usize = field(&fields, "n")?;
    let seed: u64 = field(&fields, "seed")?;
    let replicate: u64 = field(&fields, "replicate")?;
    let points = read_points(&mut lines)?;
    if points.len() != n {
        return Err(Error::Format(format!("header says n={n}, found {} eigenvalues", points.len())));
    }
    Spectrum::new(points, seed, replicate)
}

/// Lattice points of a reference measure, in index order.
pub fn write_lattice<T: Real, W: Write>(w: &mut W, nu: &PredictedMeasure<T>) -> Result<()> {
    writeln!(
        w,
        "{LATTICE_MAGIC} {FORMAT_VERSION} n={} m={} annulus_inner={}",
        nu.n(),
        nu.m(),
        fmt_sci(nu.annulus_inner())
    )?;
    write_points(w, nu.lattice())
}

pub struct LatticeDump<T> {
    pub n: usize,
    pub m: usize,
    pub points: Vec<ComplexPoint<T>>,
}

pub fn read_lattice<T: Real, R: BufRead>(r: R) -> Result<LatticeDump<T>> {
    let mut lines = r.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return format_err(1, "empty lattice file"),
    };
    let fields = header_fields(&header, LATTICE_MAGIC)?;
    let n: usize = field(&fields, "n")?;
    let m: usize = field(&fields, "m")?;
    let points = read_points(&mut lines)?;
    if points.len() + m != n {
        return Err(Error::Format(format!("expected {} lattice points, found {}", n - m.min(n), points.len())));
    }
    Ok(LatticeDump { n, m, points })
}

pub fn write_plan_csv<T: Real, W: Write>(w: &mut W, plan: &TransportPlan<T>) -> Result<()> {
    writeln!(w, "{PLAN_HEADER}")?;
    for &(i, j, mass) in &plan.pairs {
        writeln!(w, "{i},{j},{}", fmt_sci(mass))?;
    }
    Ok(())
}

/// One row of an analytic table. Unused parameters are written as empty
/// fields.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticRow {
    pub n: usize,
    pub region: String,
    pub param1: Option<f64>,
    pub param2: Option<f64>,
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    pub bound: Option<f64>,
    pub method: String,
    pub error_estimate: Option<f64>,
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sci).unwrap_or_default()
}

pub fn write_analytic_csv<W: Write>(w: &mut W, rows: &[AnalyticRow]) -> Result<()> {
    writeln!(w, "{ANALYTIC_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            r.region,
            opt(r.param1),
            opt(r.param2),
            opt(r.mean),
            opt(r.variance),
            opt(r.bound),
            r.method,
            opt(r.error_estimate)
        )?;
    }
    Ok(())
}
