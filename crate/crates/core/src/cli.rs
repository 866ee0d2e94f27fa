//! Batch front end: configuration, parameter sweeps and CSV output.

use crate::config::Config;
use crate::error::{Error, Result};
use crate::first_order::{
    avg_first_order_closed, avg_first_order_exact, inverse_path_loss_closed, inverse_path_loss_exact, to_db,
};
use crate::montecarlo;
use crate::pdp::{delay_stats, DelayStats};
use crate::scenario::Orientation;
use clap::{Parser, ValueEnum};
use std::ffi::OsString;
use std::fmt::Write;
use std::path::PathBuf;

pub const SCHEMA: &str = "# schema=1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Closed-form and quadrature results.
    Analyze,
    /// Monte Carlo estimates.
    Simulate,
    /// Analytic values next to Monte Carlo estimates.
    Compare,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub key: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Sweep {
    /// Parse `key:start:stop:steps`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Config { line: 0, key: "sweep".into(), msg: msg.into() };
        let parts: Vec<&str> = text.split(':').collect();
        let [key, a, b, n] = parts[..] else {
            return Err(bad("expected key:start:stop:steps"));
        };
        if !Config::is_numeric(key) {
            return Err(bad(&format!("`{key}` is not a numeric configuration key")));
        }
        let num = |v: &str| v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| bad(&format!("bad bound `{v}`")));
        let steps: usize = n.parse().map_err(|_| bad(&format!("bad step count `{n}`")))?;
        if steps < 2 {
            return Err(bad("a sweep needs at least 2 steps"));
        }
        Ok(Self { key: key.to_string(), start: num(a)?, stop: num(b)?, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        let h = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps).map(|k| if k + 1 == self.steps { self.stop } else { self.start + h * k as f64 }).collect()
    }
}

fn parse_sweep(s: &str) -> std::result::Result<Sweep, String> {
    Sweep::parse(s).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Parser)]
#[command(name = "mmgeo", version, about = "Directional mmWave reflection channel statistics")]
pub struct RunSpec {
    #[arg(value_enum)]
    pub mode: Mode,
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    pub config: PathBuf,
    /// Sweep one numeric key: `key:start:stop:steps`.
    #[arg(long, value_parser = parse_sweep)]
    pub sweep: Option<Sweep>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub realizations: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

/// CSV token for a number: `inf`, `-inf` and `nan` are spelled out.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:e}")
    }
}

pub fn header(mode: Mode) -> &'static str {
    match mode {
        Mode::Analyze => "sweep_value,n_r_exact,n_r_closed,pl_db_exact,pl_db_closed,tau_mean_ns,tau_rms_ns,bc_mhz",
        Mode::Simulate => "sweep_value,n_r_mc,n_r_se,pl_db_mc,pl_db_se,tau_rms_ns_mc",
        Mode::Compare => {
            "sweep_value,n_r_exact,n_r_mc,n_r_se,n_r_rel_err,n_r_flag,pl_db_exact,pl_db_mc,pl_db_se,pl_rel_err,pl_flag"
        }
    }
}

fn analytic_delay(cfg: &Config) -> Result<Option<DelayStats>> {
    let s = cfg.scenario();
    if !matches!(s.orientation, Orientation::Fixed(_)) {
        return Ok(None);
    }
    match delay_stats(&s) {
        Ok(d) => Ok(Some(d)),
        Err(Error::UndefinedStats(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn closed_or_nan(r: Result<f64>, fixed: bool) -> Result<f64> {
    if fixed {
        r
    } else {
        Ok(f64::NAN)
    }
}

/// |a − b| relative to `a`; zero when both vanish or both are infinite.
fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / a).abs()
    }
}

fn row(mode: Mode, cfg: &Config) -> Result<Vec<f64>> {
    let s = cfg.scenario();
    let fixed = matches!(s.orientation, Orientation::Fixed(_));
    Ok(match mode {
        Mode::Analyze => {
            let d = analytic_delay(cfg)?;
            let (tm, tr, bc) = d.map_or((f64::NAN, f64::NAN, f64::NAN), |d| {
                (d.tau_mean * 1e9, d.tau_rms * 1e9, d.coherence_bw * 1e-6)
            });
            vec![
                avg_first_order_exact(&s)?,
                closed_or_nan(avg_first_order_closed(&s), fixed)?,
                -to_db(inverse_path_loss_exact(&s)?),
                closed_or_nan(inverse_path_loss_closed(&s).map(|g| -to_db(g)), fixed)?,
                tm,
                tr,
                bc,
            ]
        }
        Mode::Simulate => {
            let r = montecarlo::run(&s, &cfg.scene_config()?)?;
            let tr = r.delay.map_or(f64::NAN, |d| d.tau_rms * 1e9);
            vec![r.n_r.mean, r.n_r.se, r.path_loss_db, r.path_loss_db_se, tr]
        }
        Mode::Compare => {
            let n = avg_first_order_exact(&s)?;
            let g = inverse_path_loss_exact(&s)?;
            let r = montecarlo::run(&s, &cfg.scene_config()?)?;
            let flag = |a: f64, m: f64, se: f64| if (a - m).abs() > 2.0 * se { 1.0 } else { 0.0 };
            vec![
                n,
                r.n_r.mean,
                r.n_r.se,
                rel_err(n, r.n_r.mean),
                flag(n, r.n_r.mean, r.n_r.se),
                -to_db(g),
                r.path_loss_db,
                r.path_loss_db_se,
                rel_err(1.0 / g, 1.0 / r.received.mean),
                flag(g, r.received.mean, r.received.se),
            ]
        }
    })
}

/// CSV text for every sweep point of `spec` applied to `base`.
pub fn render(spec: &RunSpec, base: &Config) -> Result<String> {
    let mut cfg = base.clone();
    if let Some(seed) = spec.seed {
        cfg.seed = seed;
    }
    if let Some(m) = spec.realizations {
        cfg.set("realizations", &m.to_string(), 0)?;
    }
    let points: Vec<(f64, Config)> = match &spec.sweep {
        None => vec![(f64::NAN, cfg.clone())],
        Some(sw) => sw
            .values()
            .into_iter()
            .map(|v| {
                let mut c = cfg.clone();
                let at = |e: Error| Error::AtSweepPoint { key: sw.key.clone(), value: v, source: Box::new(e) };
                c.set(&sw.key, &v.to_string(), 0).map_err(at)?;
                c.validate().map_err(at)?;
                Ok((v, c))
            })
            .collect::<Result<_>>()?,
    };
    let mut out = format!("{SCHEMA}\n{}\n", header(spec.mode));
    for (v, c) in &points {
        let vals = row(spec.mode, c).map_err(|e| match &spec.sweep {
            Some(sw) => Error::AtSweepPoint { key: sw.key.clone(), value: *v, source: Box::new(e) },
            None => e,
        })?;
        log::info!("point {}: {:?}", fmt_num(*v), vals);
        let cells: Vec<String> = std::iter::once(*v).chain(vals).map(fmt_num).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    Ok(out)
}

fn io(path: &std::path::Path, e: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), msg: e.to_string() }
}

/// Read the configuration, write the CSV and print a short summary.
pub fn execute(spec: &RunSpec) -> Result<usize> {
    let text = std::fs::read_to_string(&spec.config).map_err(|e| io(&spec.config, e))?;
    let cfg = Config::parse(&text)?;
    let csv = render(spec, &cfg)?;
    std::fs::write(&spec.out, &csv).map_err(|e| io(&spec.out, e))?;
    let rows = csv.lines().count() - 2;
    let cols: Vec<&str> = header(spec.mode).split(',').collect();
    for line in csv.lines().skip(2) {
        let summary: Vec<String> = cols.iter().zip(line.split(',')).map(|(k, v)| format!("{k}={v}")).collect();
        println!("{}", summary.join(" "));
    }
    println!("wrote {rows} rows to {}", spec.out.display());
    Ok(rows)
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let spec = match RunSpec::try_parse_from(args) {
        Ok(s) => s,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&spec) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("mmgeo: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(mode: Mode, sweep: Option<&str>) -> RunSpec {
        RunSpec {
            mode,
            config: PathBuf::new(),
            sweep: sweep.map(|s| Sweep::parse(s).unwrap()),
            seed: None,
            realizations: Some(100),
            out: PathBuf::new(),
        }
    }

    #[test]
    fn sweep_parsing() {
        let s = Sweep::parse("d:25:150:6").unwrap();
        assert_eq!(s.values(), vec![25.0, 50.0, 75.0, 100.0, 125.0, 150.0]);
        assert!(Sweep::parse("d:25:150:1").is_err());
        assert!(Sweep::parse("orientation:0:1:2").is_err());
        assert!(Sweep::parse("nope:0:1:2").is_err());
        assert!(Sweep::parse("d:0:1").is_err());
    }

    #[test]
    fn number_tokens() {
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(f64::NAN), "nan");
        assert_eq!(fmt_num(0.5).parse::<f64>().unwrap(), 0.5);
    }

    #[test]
    fn analyze_rows_match_steps() {
        let csv = render(&spec(Mode::Analyze, Some("d:25:150:6")), &Config { theta_bt_deg: 20.0, theta_br_deg: 20.0, lambda_b: 8e-5, ..Config::default() }).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], SCHEMA);
        assert_eq!(lines.len(), 2 + 6);
        let pl: Vec<f64> = lines[2..].iter().map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
        assert!(pl.windows(2).all(|w| w[1] > w[0]), "{pl:?}");
    }

    #[test]
    fn sweep_point_errors_carry_context() {
        let e = render(&spec(Mode::Analyze, Some("lambda_b:0:0.01:3")), &Config::default()).unwrap_err();
        assert!(matches!(e, Error::AtSweepPoint { value, .. } if value == 0.005));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn compare_without_buildings() {
        let cfg = Config { lambda_b: 0.0, ..Config::default() };
        let csv = render(&spec(Mode::Compare, None), &cfg).unwrap();
        let row: Vec<&str> = csv.lines().nth(2).unwrap().split(',').collect();
        assert_eq!(row[6], "inf");
        assert_eq!(row[7], "inf");
        assert_eq!(row[5], "0e0");
        assert_eq!(row[10], "0e0");
    }
}
