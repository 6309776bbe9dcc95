//! Command-line front end.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::circle_map::{wrap, CircleMap, Side};
use crate::config::AnalysisConfig;
use crate::error::{Error, Result};
use crate::output::num;
use crate::potential::Potential;
use crate::pressure::{gap_collapse, gap_sweep, transition_points_with, write_gap_sweep_csv, PressureEngine};
use crate::spec::{load_map, load_potential, MapSpec, PotentialSpec};
use crate::spectra::{birkhoff_spectrum, rate_function};
use crate::transfer_op::{spectral_report_with, UlamGeometry};

#[derive(Debug, Parser)]
#[command(name = "thermoscope", version, about = "Pressure, phase transitions and Birkhoff spectra of circle maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pressure curve t -> P(t phi).
    Pressure(CommonArgs),
    /// Transition points, zone table and spectral-gap sweep.
    Transitions(CommonArgs),
    /// Rate function and entropy spectrum over query intervals.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        /// Query interval `a,b` (repeatable).
        #[arg(long = "interval", value_parser = parse_interval)]
        intervals: Vec<(f64, f64)>,
    },
    /// Samples of x, f(x), Df(x) with explicit break-point rows.
    MapTable(CommonArgs),
    /// Leading/subleading eigendata and the essential-radius bound of t phi.
    SpectralReport {
        #[command(flatten)]
        common: CommonArgs,
        /// Parameter t (repeatable); defaults to 1.
        #[arg(long = "t", allow_hyphen_values = true)]
        ts: Vec<f64>,
        /// Also write the Ulam matrix triplets and eigenvectors of the first t.
        #[arg(long)]
        dump: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args, Clone)]
pub struct CommonArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub potential: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub t_samples: Option<usize>,
    #[arg(long)]
    pub ulam_n: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub tol_flat: Option<f64>,
    #[arg(long)]
    pub tol_strict: Option<f64>,
    #[arg(long)]
    pub max_period: Option<usize>,
    /// Sample count for map-table and rate tables.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Reserved; the pipeline is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn parse_interval(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected a,b but got {s:?}"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    Ok((a, b))
}

/// Fully resolved run configuration, embedded in every output file.
#[derive(Debug, Serialize)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub map_path: PathBuf,
    pub potential_path: Option<PathBuf>,
    pub map: MapSpec,
    pub potential: Option<PotentialSpec>,
    pub analysis: AnalysisConfig,
    pub format: Format,
    pub out: PathBuf,
    pub samples: usize,
    pub seed: u64,
}

impl RunConfig {
    fn from_args(subcommand: &'static str, a: &CommonArgs) -> Result<Self> {
        let map = load_map(&a.map)?;
        let potential = a.potential.as_deref().map(load_potential).transpose()?;
        let mut analysis = AnalysisConfig::default();
        if let Some(v) = a.t_min {
            analysis.t_min = v;
        }
        if let Some(v) = a.t_max {
            analysis.t_max = v;
        }
        if let Some(v) = a.t_samples {
            analysis.t_samples = v;
        }
        if let Some(v) = a.ulam_n {
            analysis.operator.ulam_n = v;
        }
        if let Some(v) = a.tol_flat {
            analysis.tol_flat = v;
        }
        if let Some(v) = a.tol_strict {
            analysis.tol_strict = v;
        }
        analysis.max_period = a.max_period.or(analysis.max_period);
        let samples = a.samples.unwrap_or(if subcommand == "map-table" { 1001 } else { analysis.s_samples });
        analysis.s_samples = samples;
        Ok(Self {
            subcommand,
            map_path: a.map.clone(),
            potential_path: a.potential.clone(),
            map,
            potential,
            analysis,
            format: a.format,
            out: a.out.clone(),
            samples,
            seed: a.seed,
        })
    }

    fn validate(&self, map: &CircleMap) -> Result<()> {
        let c = &self.analysis;
        if !(c.t_min.is_finite() && c.t_max.is_finite() && c.t_min < c.t_max) {
            return Err(Error::Spec(format!("empty t window [{}, {}]", c.t_min, c.t_max)));
        }
        if c.t_samples < 5 {
            return Err(Error::Spec("--t-samples must be at least 5".into()));
        }
        if c.operator.ulam_n < map.degree() {
            return Err(Error::Spec(format!(
                "--ulam-n {} is below the map degree {}",
                c.operator.ulam_n,
                map.degree()
            )));
        }
        if !(c.tol_flat > 0.0 && c.tol_strict > 0.0) {
            return Err(Error::Spec("tolerances must be positive".into()));
        }
        if c.max_period == Some(0) {
            return Err(Error::Spec("--max-period must be at least 1".into()));
        }
        if self.samples < 2 {
            return Err(Error::Spec("--samples must be at least 2".into()));
        }
        Ok(())
    }

    fn header(&self) -> String {
        format!("config: {}", serde_json::to_string(self).unwrap_or_default())
    }

    fn json(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or_default()
    }
}

struct Setup {
    cfg: RunConfig,
    map: Arc<CircleMap>,
    phi: Option<Potential>,
}

fn setup(subcommand: &'static str, a: &CommonArgs) -> Result<Setup> {
    let cfg = RunConfig::from_args(subcommand, a)?;
    let map = Arc::new(cfg.map.build()?);
    cfg.validate(&map)?;
    let phi = cfg.potential.as_ref().map(|p| p.build(&map)).transpose()?;
    std::fs::create_dir_all(&cfg.out)?;
    Ok(Setup { cfg, map, phi })
}

impl Setup {
    fn potential(&self) -> Result<&Potential> {
        self.phi
            .as_ref()
            .ok_or_else(|| Error::Spec(format!("{} needs --potential", self.cfg.subcommand)))
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.cfg.out.join(name))?))
    }

    fn write_json(&self, name: &str, value: &serde_json::Value) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Numeric(e.to_string()))?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    /// Writes `name.csv` through `csv`, or `name.json` from `rows` in JSON mode.
    fn write_table(
        &self,
        name: &str,
        csv: impl FnOnce(&mut BufWriter<File>, &str) -> Result<()>,
        rows: impl FnOnce() -> serde_json::Value,
    ) -> Result<()> {
        match self.cfg.format {
            Format::Csv => {
                let mut w = self.create(&format!("{name}.csv"))?;
                csv(&mut w, &self.cfg.header())?;
                w.flush()?;
                Ok(())
            }
            Format::Json => self.write_json(
                &format!("{name}.json"),
                &json!({ "config": self.cfg.json(), "rows": rows() }),
            ),
        }
    }
}

/// Caps the worker pool at `THERMOSCOPE_THREADS` when set.
pub fn init_threads() {
    if let Some(n) = std::env::var("THERMOSCOPE_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    init_threads();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("thermoscope: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Pressure(a) => cmd_pressure(&setup("pressure", a)?),
        Command::Transitions(a) => cmd_transitions(&setup("transitions", a)?),
        Command::Spectrum { common, intervals } => cmd_spectrum(&setup("spectrum", common)?, intervals),
        Command::MapTable(a) => cmd_map_table(&setup("map-table", a)?),
        Command::SpectralReport { common, ts, dump } => {
            cmd_spectral_report(&setup("spectral-report", common)?, ts, *dump)
        }
    }
}

fn cmd_pressure(s: &Setup) -> Result<()> {
    let phi = s.potential()?;
    let acfg = &s.cfg.analysis;
    let engine = PressureEngine::new(&s.map, acfg)?;
    let curve = engine.curve(phi, &acfg.t_grid())?;
    let p1 = match curve.value_at(1.0) {
        Some(v) => v,
        None => engine.estimate(&phi.scale(1.0))?.pressure,
    };
    let confidence = curve.points.iter().fold(0.0f64, |m, q| m.max(q.confidence));
    let mut warnings: Vec<String> = s.map.warnings().to_vec();
    if !curve.is_convex(1e-6) {
        warnings.push(format!(
            "discrete convexity violated: min second difference {:.3e}",
            curve.min_second_difference()
        ));
    }
    let unconverged: Vec<f64> = curve.points.iter().filter(|q| !q.converged).map(|q| q.t).collect();
    if !unconverged.is_empty() {
        warnings.push(format!("power iteration hit its cap at {} parameter(s)", unconverged.len()));
    }
    s.write_table(
        "pressure_curve",
        |w, h| curve.write_csv(w, Some(h)),
        || serde_json::to_value(&curve.points).unwrap_or_default(),
    )?;
    s.write_json(
        "summary.json",
        &json!({
            "config": s.cfg.json(),
            "h_top": s.map.topological_entropy(),
            "P0": curve.value_at(0.0),
            "P1": p1,
            "confidence": confidence,
            "convex": curve.is_convex(1e-6),
            "unconverged_t": unconverged,
            "warnings": warnings,
        }),
    )
}

fn cmd_transitions(s: &Setup) -> Result<()> {
    let phi = s.potential()?;
    let engine = PressureEngine::new(&s.map, &s.cfg.analysis)?;
    let mut report = transition_points_with(&engine, phi)?;
    let ts = s.cfg.analysis.t_grid();
    let sweep = gap_sweep(&engine, phi, &ts)?;
    report.gap_collapse = gap_collapse(&sweep);
    let message = if report.cohomologous {
        "cohomologous to a constant: transitions suppressed".to_string()
    } else if report.no_transition {
        "no finite transition in window".to_string()
    } else {
        "finite transition found".to_string()
    };
    let mut warnings = s.map.warnings().to_vec();
    warnings.extend(report.warnings.iter().cloned());
    s.write_json(
        "transitions.json",
        &json!({
            "config": s.cfg.json(),
            "message": message,
            "report": report,
            "warnings": warnings,
        }),
    )?;
    s.write_table(
        "gap_sweep",
        |w, h| write_gap_sweep_csv(&sweep, w, Some(h)),
        || serde_json::to_value(&sweep).unwrap_or_default(),
    )
}

fn cmd_spectrum(s: &Setup, intervals: &[(f64, f64)]) -> Result<()> {
    let phi = s.potential()?;
    let engine = PressureEngine::new(&s.map, &s.cfg.analysis)?;
    let report = transition_points_with(&engine, phi)?;
    let rate = rate_function(&report, s.cfg.analysis.s_samples)?;
    let mut warnings: Vec<String> = rate.warnings.clone();
    let results: Vec<serde_json::Value> = intervals
        .iter()
        .map(|&(a, b)| match birkhoff_spectrum(&rate, a, b) {
            Ok(r) => serde_json::to_value(r).unwrap_or_default(),
            Err(e) => {
                warnings.push(format!("interval [{a}, {b}]: {e}"));
                json!({ "requested": [a, b], "error": e.to_string() })
            }
        })
        .collect();
    s.write_table(
        "rate",
        |w, h| rate.write_csv(s.cfg.samples, w, Some(h)),
        || {
            let rows: Vec<_> = rate
                .spectrum_grid(s.cfg.samples)
                .into_iter()
                .map(|x| json!({ "s": x, "I": rate.eval(x), "tau_hat": rate.tau_hat(x), "zone": rate.zone(x) }))
                .collect();
            serde_json::Value::Array(rows)
        },
    )?;
    s.write_json(
        "spectrum.json",
        &json!({
            "config": s.cfg.json(),
            "rate": rate,
            "delta_regions": rate.delta_regions(),
            "intervals": results,
            "warnings": warnings,
        }),
    )
}

#[derive(Serialize)]
struct MapRow {
    x: f64,
    f: f64,
    df_left: f64,
    df_right: f64,
    break_point: bool,
}

fn cmd_map_table(s: &Setup) -> Result<()> {
    let map = &s.map;
    let n = s.cfg.samples;
    let breaks: Vec<f64> = map.break_points().into_iter().map(wrap).collect();
    let mut xs: Vec<(f64, bool)> = (0..n).map(|i| (i as f64 / n as f64, false)).collect();
    for &b in &breaks {
        match xs.iter_mut().find(|(x, _)| (*x - b).abs() < 1e-15) {
            Some(slot) => *slot = (b, true),
            None => xs.push((b, true)),
        }
    }
    xs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let rows: Vec<MapRow> = xs
        .iter()
        .map(|&(x, br)| MapRow {
            x,
            f: map.eval(x),
            df_left: map.deriv(x, Side::Left),
            df_right: map.deriv(x, Side::Right),
            break_point: br,
        })
        .collect();
    s.write_table(
        "map",
        |w, h| {
            writeln!(w, "# {h}")?;
            writeln!(w, "x,f,df_left,df_right,break_point")?;
            for r in &rows {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    num(r.x),
                    num(r.f),
                    num(r.df_left),
                    num(r.df_right),
                    r.break_point
                )?;
            }
            Ok(())
        },
        || serde_json::to_value(&rows).unwrap_or_default(),
    )
}

fn cmd_spectral_report(s: &Setup, ts: &[f64], dump: bool) -> Result<()> {
    let phi = s.potential()?;
    let ts: Vec<f64> = if ts.is_empty() { vec![1.0] } else { ts.to_vec() };
    let acfg = &s.cfg.analysis;
    let geom = UlamGeometry::new(&s.map, &acfg.operator)?;
    let mut reports = Vec::with_capacity(ts.len());
    for (k, &t) in ts.iter().enumerate() {
        let tphi = phi.scale(t);
        let u = geom.matrix(&s.map, &tphi)?;
        let r = spectral_report_with(&s.map, &tphi, &u, acfg)?;
        if dump && k == 0 {
            let mut w = s.create("ulam_matrix.csv")?;
            writeln!(w, "# {}", s.cfg.header())?;
            u.write_csv(&mut w)?;
            w.flush()?;
            let mut w = s.create("eigenvectors.csv")?;
            writeln!(w, "# {}", s.cfg.header())?;
            r.write_eigenvectors_csv(&mut w)?;
            w.flush()?;
        }
        reports.push(json!({ "t": t, "report": r }));
    }
    s.write_json(
        "spectral_report.json",
        &json!({ "config": s.cfg.json(), "reports": reports, "warnings": s.map.warnings() }),
    )
}

/// Output directory of a run, for callers embedding the CLI.
pub fn out_dir(cli: &Cli) -> &Path {
    match &cli.command {
        Command::Pressure(a) | Command::Transitions(a) | Command::MapTable(a) => &a.out,
        Command::Spectrum { common, .. } | Command::SpectralReport { common, .. } => &common.out,
    }
}
