//! Subcommand implementations.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rdr_core::analysis::{
    calibrate_sideband, fit_piecewise_decay, report_text, write_report_csv, PiecewiseForm, ReportRow,
};
use rdr_core::model::SystemParams;
use rdr_core::protocols::{run_experiment, write_experiment};
use rdr_core::tomography::{extract_nbar, CharSamples, DEFAULT_THRESHOLD};
use rdr_core::{angular_to_hz, hz_to_angular};

use crate::config::{parse_config, RunConfig};

const DEFAULT_OUT: &str = "rdr-out";

#[derive(Debug, Parser)]
#[command(name = "rdr", version, about = "Simulate and analyse Rabi-driven reset experiments")]
pub struct Cli {
    /// Output directory; overrides the config's `output_dir`.
    #[arg(long, global = true, env = "RDR_OUT_DIR")]
    pub out: Option<PathBuf>,
    /// Seed for stochastic state preparation; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for sweep points and tomography.
    #[arg(long, global = true, env = "RDR_WORKERS")]
    pub workers: Option<usize>,
    /// Relative integrator tolerance; overrides the config.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment described by a config file.
    Simulate(SimulateArgs),
    /// Infer the sideband drive scale from Stark-shift samples.
    Calibrate(CalibrateArgs),
    /// Photon number from characteristic-function samples.
    Tomo(TomoArgs),
    /// Piecewise linear-then-exponential fit of a cooling curve.
    Fit(FitArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// CSV with columns `setting`, `shift_hz` and optionally `flagged`.
    #[arg(long)]
    pub input: PathBuf,
    /// Config supplying device parameters; the device table otherwise.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sideband detuning `Delta / 2pi`; the Rabi frequency by default.
    #[arg(long)]
    pub detuning_hz: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TomoArgs {
    /// CSV with columns `re_alpha`, `im_alpha`, `re_C`, `im_C`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormArg {
    Corrected,
    Printed,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with a time column in us and a photon-number column.
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to the first column.
    #[arg(long)]
    pub time_column: Option<String>,
    /// Defaults to the second column.
    #[arg(long)]
    pub value_column: Option<String>,
    /// Optional per-point standard deviations.
    #[arg(long)]
    pub sigma_column: Option<String>,
    #[arg(long, value_enum, default_value_t = FormArg::Corrected)]
    pub form: FormArg,
    /// Readout linewidth `kappa / 2pi` for the rate in units of kappa.
    #[arg(long)]
    pub kappa_hz: Option<f64>,
}

/// Output of a command: text for stdout and files written.
#[derive(Debug, Default)]
pub struct Outcome {
    pub text: String,
    pub files: Vec<PathBuf>,
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    if let Some(n) = cli.workers {
        if n == 0 {
            bail!("--workers must be at least 1");
        }
        // Fails only if a pool already exists, e.g. when called twice in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Simulate(a) => simulate(cli, a),
        Command::Calibrate(a) => calibrate(cli, a),
        Command::Tomo(a) => tomo(cli, a),
        Command::Fit(a) => fit(cli, a),
    }
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text)
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Result<Outcome> {
    let cfg = load_config(&a.config)?;
    let spec = cfg.resolve(cli.seed, cli.tol)?;
    let dir = cli.out.clone().or(cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let out = run_experiment(&spec)?;
    let files = write_experiment(&dir, &spec, &out)?;
    let mut text = format!("{} -> {}\n", spec.experiment.kind(), dir.display());
    for row in &out.summary {
        text += &format!("{:>3} {:<20} {:>16.8e} {:>12.3e} {}\n", row.point, row.quantity, row.value, row.std_error, row.unit);
    }
    Ok(Outcome { text, files })
}

fn column(headers: &csv::StringRecord, name: Option<&str>, fallback: usize) -> Result<usize> {
    match name {
        Some(n) => headers.iter().position(|h| h == n).with_context(|| format!("no column named `{n}`")),
        None if fallback < headers.len() => Ok(fallback),
        None => bail!("the input needs at least {} columns", fallback + 1),
    }
}

/// Reads the selected columns as floats.
fn read_columns(path: &Path, names: &[(Option<&str>, usize)]) -> Result<Vec<Vec<f64>>> {
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let headers = rd.headers()?.clone();
    let idx: Vec<usize> = names.iter().map(|&(n, f)| column(&headers, n, f)).collect::<Result<_>>()?;
    let mut cols = vec![Vec::new(); idx.len()];
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        for (c, &i) in idx.iter().enumerate() {
            let field = rec.get(i).unwrap_or("");
            let v: f64 = field.parse().with_context(|| format!("row {}: `{field}` is not a number", line + 2))?;
            cols[c].push(v);
        }
    }
    Ok(cols)
}

fn write_report(cli: &Cli, name: &str, rows: &[ReportRow], files: &mut Vec<PathBuf>) -> Result<()> {
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(name);
        write_report_csv(rows, std::fs::File::create(&path)?)?;
        files.push(path);
    }
    Ok(())
}

fn calibrate(cli: &Cli, a: &CalibrateArgs) -> Result<Outcome> {
    let params = match &a.config {
        Some(p) => load_config(p)?.params.resolve()?,
        None => SystemParams::device(),
    };
    let detuning = a.detuning_hz.map_or(params.omega_rabi, hz_to_angular);
    let has_flag = {
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(&a.input)?;
        rd.headers()?.iter().any(|h| h == "flagged")
    };
    let mut spec = vec![(Some("setting"), 0), (Some("shift_hz"), 1)];
    if has_flag {
        spec.push((Some("flagged"), 2));
    }
    let cols = read_columns(&a.input, &spec)?;
    let samples: Vec<(f64, f64)> = (0..cols[0].len())
        .filter(|&i| !has_flag || cols[2][i] == 0.0)
        .map(|i| (cols[0][i], hz_to_angular(cols[1][i])))
        .collect();
    let cal = calibrate_sideband(&samples, params.chi_m, detuning, params.kappa_m)?;
    let err = cal.variance.sqrt();
    let rows = vec![
        ReportRow::new("eps_scale", cal.scale, err, "rad/us per setting"),
        ReportRow::new("eps_scale_hz", angular_to_hz(cal.scale), angular_to_hz(err), "Hz per setting"),
        ReportRow::new("samples", samples.len() as f64, 0.0, ""),
    ];
    let mut files = Vec::new();
    write_report(cli, "calibration.csv", &rows, &mut files)?;
    Ok(Outcome { text: report_text(&rows), files })
}

fn tomo(cli: &Cli, a: &TomoArgs) -> Result<Outcome> {
    let samples = CharSamples::load_csv(&a.input)?;
    let est = extract_nbar(&samples, a.threshold)?;
    let rows = vec![
        ReportRow::new("nbar", est.nbar, est.uncertainty, "photons"),
        ReportRow::new("intercept", est.intercept, 0.0, ""),
        ReportRow::new("points_used", est.points_used as f64, 0.0, ""),
        ReportRow::new("threshold", est.threshold, 0.0, ""),
    ];
    let mut files = Vec::new();
    write_report(cli, "tomography.csv", &rows, &mut files)?;
    Ok(Outcome { text: report_text(&rows), files })
}

fn fit(cli: &Cli, a: &FitArgs) -> Result<Outcome> {
    let mut spec = vec![(a.time_column.as_deref(), 0), (a.value_column.as_deref(), 1)];
    if let Some(s) = &a.sigma_column {
        spec.push((Some(s.as_str()), 2));
    }
    let cols = read_columns(&a.input, &spec)?;
    let weights: Option<Vec<f64>> = cols.get(2).map(|s| s.iter().map(|v| 1.0 / (v * v)).collect());
    let form = match a.form {
        FormArg::Corrected => PiecewiseForm::Corrected,
        FormArg::Printed => PiecewiseForm::Printed,
    };
    let fit = fit_piecewise_decay(&cols[0], &cols[1], weights.as_deref(), form)?;
    let kappa = a.kappa_hz.map_or(SystemParams::device().kappa_r, hz_to_angular);
    let rows = fit.report(kappa);
    let mut files = Vec::new();
    write_report(cli, "fit.csv", &rows, &mut files)?;
    Ok(Outcome { text: report_text(&rows), files })
}
