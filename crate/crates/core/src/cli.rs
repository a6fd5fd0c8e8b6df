//! Command-line front end: runs the reference models end to end, reconstructs
//! generators from tomogram files and writes the resulting time series.
//!
//! Exit codes: `0` success, `1` a sample or input failed validation (output is
//! still written when possible), `2` bad arguments or unreadable input.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::liouvillian::{
    differentiate_d, generator_at, lindblad_fit_two_level, reconstruct_g, validate_generator,
    GeneratorMatrix, Quality,
};
use crate::models::{
    example_a_tomograms, fock_state, jc_model, AmplitudeDampingParams, Frame, JaynesCummingsParams,
    ModeParity, MultimodeCavityParams, SingleExcitationSector, MIN_POPULATION,
};
use crate::quantum::{c64, ComplexMatrix, DensityMatrix, DensityTolerance};
use crate::stencil::{local_times, uniform_step, Stencil, STENCIL_POINTS};
use crate::tomography::{
    build_m, d_from_tomograms, pair_of_index, simulate_tomograms, validate_process, ProcessMatrix,
    TomogramSeries,
};
use crate::validation::ValidationReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Default derivative step as a fraction of the fastest model time scale.
const DEFAULT_STEP_FRACTION: f64 = 1e-3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Parity {
    #[default]
    Odd,
    All,
}

#[derive(Debug, Parser)]
#[command(
    name = "liouville",
    version,
    about = "Reconstruct time-local generators of open two-level and N-level systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Final time of the output grid.
    #[arg(long, default_value_t = 5.0)]
    pub t_max: f64,
    /// Number of steps; the grid has `steps + 1` points starting at zero.
    #[arg(long, default_value_t = 500)]
    pub steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Step of the local five-point derivative stencil (model commands).
    #[arg(long)]
    pub h_derivative: Option<f64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Zero-temperature amplitude damping from its output states.
    ExampleA {
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Atom coupled to a resonant cavity mode in a Fock state.
    ExampleB {
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Photon number of the initial field.
        #[arg(long, default_value_t = 1)]
        fock: usize,
        /// Field (and atomic transition) frequency.
        #[arg(long, default_value_t = 0.0)]
        omega: f64,
        /// Fock cutoff; defaults to the exact value `fock + 1`.
        #[arg(long)]
        n_max: Option<usize>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Initially excited atom at the center of a multimode cavity.
    ExampleC {
        #[arg(long, default_value_t = 400)]
        modes: usize,
        #[arg(long, default_value_t = 0.3)]
        lambda: f64,
        #[arg(long, default_value_t = 101.0)]
        omega_a: f64,
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        length: f64,
        #[arg(long, default_value_t = 1.0)]
        light_speed: f64,
        #[arg(long, value_enum, default_value_t = Parity::Odd)]
        parity: Parity,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Reconstruct the generator from a tomogram file on a uniform grid.
    Reconstruct {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check a tomogram file: snapshot, channel and generator residuals.
    Validate {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    ExampleA(AmplitudeDampingParams),
    ExampleB(JaynesCummingsParams),
    ExampleC(MultimodeCavityParams),
    Reconstruct { input: PathBuf },
    Validate { input: PathBuf },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub t_max: f64,
    pub steps: usize,
    pub h_derivative: Option<f64>,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let (command, grid, output) = match cli.command {
            CliCommand::ExampleA {
                gamma,
                grid,
                output,
            } => (
                Command::ExampleA(AmplitudeDampingParams::new(gamma)?),
                Some(grid),
                output,
            ),
            CliCommand::ExampleB {
                lambda,
                fock,
                omega,
                n_max,
                grid,
                output,
            } => {
                let p = JaynesCummingsParams {
                    omega_a: omega,
                    omega,
                    lambda,
                    fock_m: fock,
                    n_max: n_max.unwrap_or(fock + 1),
                };
                p.validate()?;
                (Command::ExampleB(p), Some(grid), output)
            }
            CliCommand::ExampleC {
                modes,
                lambda,
                omega_a,
                length,
                light_speed,
                parity,
                grid,
                output,
            } => {
                let p = MultimodeCavityParams {
                    modes_k: modes,
                    length,
                    light_speed,
                    lambda,
                    omega_a,
                    parity: match parity {
                        Parity::Odd => ModeParity::OddOnly,
                        Parity::All => ModeParity::All,
                    },
                };
                p.validate()?;
                (Command::ExampleC(p), Some(grid), output)
            }
            CliCommand::Reconstruct { input, output } => {
                (Command::Reconstruct { input }, None, output)
            }
            CliCommand::Validate { input, output } => (Command::Validate { input }, None, output),
        };
        let (t_max, steps) = grid.map_or((0.0, 0), |g| (g.t_max, g.steps));
        let config = Self {
            command,
            t_max,
            steps,
            h_derivative: output.h_derivative,
            output_path: output.out,
            output_format: output.format,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if matches!(
            self.command,
            Command::ExampleA(_) | Command::ExampleB(_) | Command::ExampleC(_)
        ) {
            if !(self.t_max > 0.0 && self.t_max.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "t-max must be positive, got {}",
                    self.t_max
                )));
            }
            if self.steps < STENCIL_POINTS {
                return Err(Error::InvalidParameter(format!(
                    "at least {STENCIL_POINTS} steps required, got {}",
                    self.steps
                )));
            }
        }
        if let Some(h) = self.h_derivative {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "h-derivative must be positive, got {h}"
                )));
            }
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps)
            .map(|i| self.t_max * i as f64 / self.steps as f64)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

/// Column-labelled output rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Validation problems of the emitted samples; not serialized.
    pub failures: Vec<String>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[j]).collect())
    }

    /// Numeric column values; text cells read as NaN.
    pub fn numbers(&self, name: &str) -> Option<Vec<f64>> {
        self.column(name).map(|cells| {
            cells
                .into_iter()
                .map(|c| match c {
                    Cell::Num(x) => *x,
                    Cell::Text(_) => f64::NAN,
                })
                .collect()
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| match c {
                Cell::Num(x) if x.is_nan() => "nan".to_string(),
                Cell::Num(x) => format!("{x:?}"),
                Cell::Text(s) => s.clone(),
            }))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|c| match c {
                            Cell::Num(x) if x.is_finite() => json!(x),
                            Cell::Num(_) => Value::Null,
                            Cell::Text(s) => json!(s),
                        })
                        .collect(),
                )
            })
            .collect();
        json!({ "columns": self.columns, "rows": rows })
    }

    pub fn write<W: Write>(&self, format: OutputFormat, mut out: W) -> Result<()> {
        match format {
            OutputFormat::Csv => self.write_csv(out),
            OutputFormat::Json => {
                serde_json::to_writer_pretty(&mut out, &self.to_json())?;
                writeln!(out)?;
                Ok(())
            }
        }
    }
}

/// `G_re[j1j2,k1k2]` / `G_im[j1j2,k1k2]` headers in ascending flattening.
pub fn generator_columns(n: usize) -> Vec<String> {
    let mut cols = Vec::with_capacity(2 * n.pow(4));
    for row in 0..n * n {
        for col in 0..n * n {
            let (j1, j2) = pair_of_index(n, row);
            let (k1, k2) = pair_of_index(n, col);
            cols.push(format!("G_re[{j1}{j2},{k1}{k2}]"));
            cols.push(format!("G_im[{j1}{j2},{k1}{k2}]"));
        }
    }
    cols
}

const RATE_COLUMNS: [&str; 4] = ["gamma1", "gamma2", "gamma3", "eta"];

/// One output sample: the generator at `t` plus model-specific scalars.
struct Sample {
    t: f64,
    generator: Option<GeneratorMatrix>,
    scalars: Vec<f64>,
    failures: Vec<String>,
}

impl Sample {
    fn usable(&self) -> bool {
        self.generator
            .as_ref()
            .is_some_and(|g| g.quality() == Quality::Ok)
    }
}

fn check_sample(t: f64, d: &ProcessMatrix, g: &GeneratorMatrix) -> Vec<String> {
    let mut failures = Vec::new();
    let report = validate_process(d);
    for c in report.failures() {
        failures.push(format!(
            "t = {t}: process {} residual {:e}",
            c.name, c.residual
        ));
    }
    if g.quality() == Quality::NearSingular {
        failures.push(format!(
            "t = {t}: process matrix near singular (condition {:e})",
            g.condition_of_d()
        ));
    } else {
        for c in validate_generator(g).failures() {
            failures.push(format!(
                "t = {t}: generator {} residual {:e}",
                c.name, c.residual
            ));
        }
    }
    failures
}

fn rate_values(g: &GeneratorMatrix) -> Vec<f64> {
    if g.quality() == Quality::NearSingular {
        return vec![f64::NAN; RATE_COLUMNS.len()];
    }
    match lindblad_fit_two_level(g) {
        Ok(r) => vec![r.gamma1, r.gamma2, r.gamma3, r.eta],
        Err(_) => vec![f64::NAN; RATE_COLUMNS.len()],
    }
}

fn build_table(n: usize, scalar_columns: &[&str], samples: &[Sample]) -> Table {
    let mut columns = vec!["t".to_string()];
    columns.extend(generator_columns(n));
    columns.extend(scalar_columns.iter().map(|s| s.to_string()));
    columns.push("quality".to_string());
    let width = 2 * n.pow(4);
    let rows = samples
        .iter()
        .map(|s| {
            let mut row = vec![Cell::Num(s.t)];
            match &s.generator {
                Some(g) if s.usable() => {
                    // Column-major storage of the transpose walks G row by row.
                    for z in g.matrix().transpose().iter() {
                        row.push(Cell::Num(z.re));
                        row.push(Cell::Num(z.im));
                    }
                }
                _ => row.extend(std::iter::repeat_n(Cell::Num(f64::NAN), width)),
            }
            row.extend(s.scalars.iter().map(|&x| Cell::Num(x)));
            let quality = match &s.generator {
                Some(g) => g.quality().as_str(),
                None => Quality::NearSingular.as_str(),
            };
            row.push(Cell::Text(quality.to_string()));
            row
        })
        .collect();
    Table {
        columns,
        rows,
        failures: Vec::new(),
    }
}

/// Result of a successful invocation; `failures` lists validation problems
/// that make the exit status nonzero.
#[derive(Clone, Debug, Default)]
pub struct RunOutcome {
    pub table: Option<Table>,
    pub report: Option<String>,
    pub failures: Vec<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            EXIT_OK
        } else {
            EXIT_VALIDATION
        }
    }
}

fn model_samples<F>(
    times: &[f64],
    h: f64,
    mut d_of_t: F,
) -> Result<Vec<(f64, ProcessMatrix, GeneratorMatrix)>>
where
    F: FnMut(f64) -> Result<ProcessMatrix>,
{
    times
        .iter()
        .map(|&t| {
            let (d, g) = generator_at(t, h, &mut d_of_t)?;
            Ok((t, d, g))
        })
        .collect()
}

fn run_example_a(config: &RunConfig, p: &AmplitudeDampingParams) -> Result<Table> {
    let h = config
        .h_derivative
        .unwrap_or(DEFAULT_STEP_FRACTION / p.gamma);
    let m = build_m(2)?;
    let samples = model_samples(&config.times(), h, |t| {
        let series = example_a_tomograms(p, &[t])?;
        d_from_tomograms(&series, &m, 0)
    })?;
    Ok(two_level_table(&[], samples, |_, _| Vec::new()))
}

fn run_example_b(config: &RunConfig, p: &JaynesCummingsParams) -> Result<Table> {
    let fastest = p.lambda.abs() * ((p.fock_m + 1) as f64).sqrt();
    let h = config
        .h_derivative
        .unwrap_or(DEFAULT_STEP_FRACTION / fastest.max(f64::MIN_POSITIVE));
    let model = jc_model(p)?;
    let rho_e = fock_state(p.field_dim(), p.fock_m)?;
    let m = build_m(2)?;
    let samples = model_samples(&config.times(), h, |t| {
        let series = simulate_tomograms(&model, &rho_e, &[t])?;
        d_from_tomograms(&series, &m, 0)
    })?;
    Ok(two_level_table(&[], samples, |_, _| Vec::new()))
}

fn run_example_c(config: &RunConfig, p: &MultimodeCavityParams) -> Result<Table> {
    let sector = SingleExcitationSector::new(p)?;
    // Sector energies are measured from the atomic transition, so the largest
    // detuning sets the fastest time scale.
    let fastest = sector
        .eigen()
        .values()
        .iter()
        .map(|e| (e - p.omega_a / 2.0).abs())
        .fold(p.golden_rule_rate(), f64::max);
    let h = config
        .h_derivative
        .unwrap_or(DEFAULT_STEP_FRACTION / fastest);
    let samples = model_samples(&config.times(), h, |t| {
        Ok(sector.process_matrix(t, Frame::Rotating))
    })?;
    Ok(two_level_table(&["P", "gamma"], samples, |t, _| {
        let population = sector.excited_probability(t);
        let (ts, pos) = local_times(t, h);
        let ps: Vec<f64> = ts.iter().map(|&s| sector.excited_probability(s)).collect();
        let gamma = if population <= MIN_POPULATION {
            f64::NAN
        } else {
            let dp = Stencil::for_index(pos, STENCIL_POINTS, h)
                .expect("five local samples")
                .apply(&ps);
            -dp / population
        };
        vec![population, gamma]
    }))
}

fn two_level_table<F>(
    extra: &[&str],
    samples: Vec<(f64, ProcessMatrix, GeneratorMatrix)>,
    mut scalars: F,
) -> Table
where
    F: FnMut(f64, &GeneratorMatrix) -> Vec<f64>,
{
    let mut columns: Vec<&str> = extra.to_vec();
    columns.extend(RATE_COLUMNS);
    let samples: Vec<Sample> = samples
        .into_iter()
        .map(|(t, d, g)| {
            let mut values = scalars(t, &g);
            values.extend(rate_values(&g));
            Sample {
                t,
                failures: check_sample(t, &d, &g),
                generator: Some(g),
                scalars: values,
            }
        })
        .collect();
    let mut table = build_table(2, &columns, &samples);
    table.failures = samples.into_iter().flat_map(|s| s.failures).collect();
    table
}

fn reconstruct_samples(series: &TomogramSeries) -> Result<Vec<Sample>> {
    uniform_step(series.times())?;
    let m = build_m(series.n())?;
    let ds = (0..series.len())
        .map(|k| d_from_tomograms(series, &m, k))
        .collect::<Result<Vec<_>>>()?;
    ds.iter()
        .enumerate()
        .map(|(k, d)| {
            let g = reconstruct_g(d, &differentiate_d(&ds, k)?)?;
            let scalars = if series.n() == 2 {
                rate_values(&g)
            } else {
                Vec::new()
            };
            Ok(Sample {
                t: d.t(),
                failures: check_sample(d.t(), d, &g),
                generator: Some(g),
                scalars,
            })
        })
        .collect()
}

fn run_reconstruct(input: &Path) -> Result<Table> {
    let series = ingest_tomograms(input)?;
    let samples = reconstruct_samples(&series)?;
    let scalar_columns: &[&str] = if series.n() == 2 { &RATE_COLUMNS } else { &[] };
    let mut table = build_table(series.n(), scalar_columns, &samples);
    table.failures = samples.into_iter().flat_map(|s| s.failures).collect();
    Ok(table)
}

/// Worst residual per constraint over all times, in first-seen order.
fn merge_reports<'a>(reports: impl Iterator<Item = &'a ValidationReport>) -> ValidationReport {
    let mut merged = ValidationReport::default();
    for report in reports {
        for c in &report.checks {
            match merged.checks.iter_mut().find(|m| m.name == c.name) {
                Some(m) if c.residual > m.residual || c.residual.is_nan() => {
                    m.residual = c.residual
                }
                Some(_) => {}
                None => merged.checks.push(c.clone()),
            }
        }
    }
    merged
}

fn run_validate(input: &Path) -> Result<RunOutcome> {
    let series = ingest_tomograms(input)?;
    let m = build_m(series.n())?;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{}: n = {}, {} times, snapshots valid at tolerance {:e}",
        input.display(),
        series.n(),
        series.len(),
        crate::tomography::INGESTION_TOLERANCE
    );
    let ds = (0..series.len())
        .map(|k| d_from_tomograms(&series, &m, k))
        .collect::<Result<Vec<_>>>()?;
    let process = merge_reports(ds.iter().map(validate_process).collect::<Vec<_>>().iter());
    let _ = writeln!(text, "process matrix (worst over times):");
    let _ = write!(text, "{process}");
    let mut failures: Vec<String> = process
        .failures()
        .map(|c| format!("process {} residual {:e}", c.name, c.residual))
        .collect();

    if uniform_step(series.times()).is_ok() {
        let mut generators = Vec::new();
        let mut singular = Vec::new();
        for (k, d) in ds.iter().enumerate() {
            let g = reconstruct_g(d, &differentiate_d(&ds, k)?)?;
            if g.quality() == Quality::NearSingular {
                singular.push(d.t());
            } else {
                generators.push(validate_generator(&g));
            }
        }
        let generator = merge_reports(generators.iter());
        let _ = writeln!(
            text,
            "generator (worst over {} regular times):",
            generators.len()
        );
        let _ = write!(text, "{generator}");
        failures.extend(
            generator
                .failures()
                .map(|c| format!("generator {} residual {:e}", c.name, c.residual)),
        );
        if !singular.is_empty() {
            let _ = writeln!(
                text,
                "near-singular process matrix at {} times",
                singular.len()
            );
            failures.push(format!(
                "near-singular process matrix at t = {:?}",
                singular
            ));
        }
    } else {
        let _ = writeln!(
            text,
            "generator: skipped (needs a uniform grid of at least {STENCIL_POINTS} times)"
        );
    }
    let _ = writeln!(
        text,
        "{}",
        if failures.is_empty() { "PASS" } else { "FAIL" }
    );
    Ok(RunOutcome {
        table: None,
        report: Some(text),
        failures,
    })
}

/// Executes a configuration and writes its output.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let mut outcome = match &config.command {
        Command::ExampleA(p) => table_outcome(run_example_a(config, p)?),
        Command::ExampleB(p) => table_outcome(run_example_b(config, p)?),
        Command::ExampleC(p) => table_outcome(run_example_c(config, p)?),
        Command::Reconstruct { input } => table_outcome(run_reconstruct(input)?),
        Command::Validate { input } => run_validate(input)?,
    };
    emit(config, &mut outcome)?;
    Ok(outcome)
}

fn table_outcome(mut table: Table) -> RunOutcome {
    RunOutcome {
        failures: std::mem::take(&mut table.failures),
        table: Some(table),
        report: None,
    }
}

fn emit(config: &RunConfig, outcome: &mut RunOutcome) -> Result<()> {
    let write_to = |f: &mut dyn FnMut(&mut dyn Write) -> Result<()>| -> Result<()> {
        match &config.output_path {
            Some(path) => {
                let mut file = io::BufWriter::new(fs::File::create(path)?);
                f(&mut file)?;
                file.flush()?;
                Ok(())
            }
            None => f(&mut io::stdout().lock()),
        }
    };
    if let Some(table) = &outcome.table {
        write_to(&mut |w| table.write(config.output_format, w))?;
    }
    if let Some(report) = &outcome.report {
        match config.output_format {
            OutputFormat::Csv => write_to(&mut |w| Ok(w.write_all(report.as_bytes())?))?,
            OutputFormat::Json => {
                let value = json!({ "report": report, "failures": outcome.failures });
                write_to(&mut |w| {
                    serde_json::to_writer_pretty(&mut *w, &value)?;
                    writeln!(w)?;
                    Ok(())
                })?
            }
        }
    }
    Ok(())
}

/// Maps an error to its exit status.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::InvalidSnapshot { .. }
        | Error::InvalidProcess { .. }
        | Error::InvalidDensityMatrix { .. }
        | Error::SingularWindow { .. }
        | Error::TraceDrift { .. } => EXIT_VALIDATION,
        _ => EXIT_CONFIG,
    }
}

/// Parses arguments, runs, reports diagnostics on stderr and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = RunConfig::from_cli(cli).and_then(|config| run(&config));
    match result {
        Ok(outcome) => {
            for f in &outcome.failures {
                eprintln!("validation failure: {f}");
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

// ---------------------------------------------------------------------------
// Tomogram files

/// On-disk tomogram layout. Snapshot keys are `"k1,k2"`; each holds one
/// matrix per time, stored as rows of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomogramFile {
    pub n: usize,
    pub times: Vec<f64>,
    pub snapshots: BTreeMap<String, Vec<Vec<Vec<[f64; 2]>>>>,
}

fn parse_label(key: &str) -> Option<(usize, usize)> {
    let (a, b) = key.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

impl TomogramFile {
    pub fn from_series(series: &TomogramSeries) -> Self {
        let snapshots = series
            .snapshots()
            .iter()
            .map(|(&(k1, k2), list)| {
                let mats = list
                    .iter()
                    .map(|rho| {
                        let m = rho.matrix();
                        (0..m.nrows())
                            .map(|r| {
                                (0..m.ncols())
                                    .map(|c| [m[(r, c)].re, m[(r, c)].im])
                                    .collect()
                            })
                            .collect()
                    })
                    .collect();
                (format!("{k1},{k2}"), mats)
            })
            .collect();
        Self {
            n: series.n(),
            times: series.times().to_vec(),
            snapshots,
        }
    }

    /// Validates every snapshot at the ingestion tolerance.
    pub fn into_series(self) -> Result<TomogramSeries> {
        let n = self.n;
        let mut snapshots = BTreeMap::new();
        for (key, mats) in self.snapshots {
            let (k1, k2) = parse_label(&key).ok_or_else(|| {
                Error::MalformedTomograms(format!(
                    "snapshot key {key:?} is not of the form \"k1,k2\""
                ))
            })?;
            let list = mats
                .into_iter()
                .enumerate()
                .map(|(time_index, rows)| {
                    let shape_ok = rows.len() == n && rows.iter().all(|r| r.len() == n);
                    if !shape_ok {
                        return Err(Error::MalformedTomograms(format!(
                            "label ({k1},{k2}), time index {time_index}: expected a {n}x{n} matrix"
                        )));
                    }
                    let m = ComplexMatrix::from_fn(n, n, |r, c| c64(rows[r][c][0], rows[r][c][1]));
                    DensityMatrix::with_tolerance(m, DensityTolerance::INGESTION).map_err(|e| {
                        match e {
                            Error::InvalidDensityMatrix {
                                constraint,
                                residual,
                            } => Error::InvalidSnapshot {
                                k1,
                                k2,
                                time_index,
                                constraint,
                                residual,
                            },
                            other => other,
                        }
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            snapshots.insert((k1, k2), list);
        }
        TomogramSeries::new(n, self.times, snapshots)
    }
}

pub fn parse_tomograms(text: &str, origin: &str) -> Result<TomogramSeries> {
    let file: TomogramFile = serde_json::from_str(text).map_err(|source| Error::Parse {
        path: origin.to_string(),
        source,
    })?;
    file.into_series()
}

pub fn ingest_tomograms(path: &Path) -> Result<TomogramSeries> {
    let text = fs::read_to_string(path)?;
    parse_tomograms(&text, &path.display().to_string())
}

pub fn export_tomograms(series: &TomogramSeries, path: &Path) -> Result<()> {
    let mut file = io::BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut file, &TomogramFile::from_series(series))?;
    writeln!(file)?;
    file.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tomography::identity_tomograms;

    fn parse(args: &[&str]) -> RunConfig {
        let mut full = vec!["liouville"];
        full.extend_from_slice(args);
        RunConfig::from_cli(Cli::try_parse_from(full).unwrap()).unwrap()
    }

    #[test]
    fn header_lists_generator_in_ascending_order() {
        let cols = generator_columns(2);
        assert_eq!(cols.len(), 32);
        assert_eq!(cols[0], "G_re[00,00]");
        assert_eq!(cols[1], "G_im[00,00]");
        assert_eq!(cols[2], "G_re[00,01]");
        assert_eq!(cols[31], "G_im[11,11]");
    }

    #[test]
    fn config_rejects_short_grids() {
        let cli = Cli::try_parse_from(["liouville", "example-a", "--steps", "4"]).unwrap();
        assert!(RunConfig::from_cli(cli).is_err());
        let cli = Cli::try_parse_from(["liouville", "example-a", "--t-max", "0"]).unwrap();
        assert!(RunConfig::from_cli(cli).is_err());
        let cli =
            Cli::try_parse_from(["liouville", "example-b", "--fock", "2", "--n-max", "2"]).unwrap();
        assert!(RunConfig::from_cli(cli).is_err());
    }

    #[test]
    fn example_a_generator_is_constant() {
        let config = parse(&["example-a", "--t-max", "2", "--steps", "20"]);
        let table = run_example_a(&config, &AmplitudeDampingParams::new(1.0).unwrap()).unwrap();
        assert!(table.failures.is_empty(), "{:?}", table.failures);
        let ee = table.numbers("G_re[11,11]").unwrap();
        let eg = table.numbers("G_re[11,00]").unwrap();
        let coh = table.numbers("G_re[10,10]").unwrap();
        for i in 0..ee.len() {
            assert!((ee[i] + 1.0).abs() < 1e-8);
            assert!((eg[i] - 1.0).abs() < 1e-8);
            assert!((coh[i] + 0.5).abs() < 1e-8);
        }
        assert!(table
            .numbers("gamma3")
            .unwrap()
            .iter()
            .all(|g| g.abs() < 1e-8));
    }

    #[test]
    fn singular_samples_are_flagged_not_dropped() {
        // M = 0, λ = 1: D is singular at t = π/2.
        let config = parse(&[
            "example-b",
            "--fock",
            "0",
            "--t-max",
            "3.141592653589793",
            "--steps",
            "10",
        ]);
        let Command::ExampleB(p) = config.command else {
            unreachable!()
        };
        let mut table = run_example_b(&config, &p).unwrap();
        assert_eq!(table.rows.len(), 11);
        let quality = table.column("quality").unwrap();
        assert_eq!(quality[5], &Cell::Text("near_singular".into()));
        assert!(table.numbers("gamma1").unwrap()[5].is_nan());
        assert!(!table.failures.is_empty());
        let mut csv = Vec::new();
        table.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let line = text.lines().nth(6).unwrap();
        assert!(line.contains(",nan,") && line.ends_with("near_singular"));
        table.failures.clear();
        let json = table.to_json();
        assert!(json["rows"][5][1].is_null());
    }

    #[test]
    fn tomogram_file_round_trip() {
        let p = AmplitudeDampingParams::new(1.0).unwrap();
        let series = example_a_tomograms(&p, &[0.0, 0.5, 1.0]).unwrap();
        let text = serde_json::to_string(&TomogramFile::from_series(&series)).unwrap();
        let back = parse_tomograms(&text, "memory").unwrap();
        assert_eq!(back, series);
    }

    #[test]
    fn parse_errors_carry_location() {
        let err =
            parse_tomograms("{\n  \"n\": 2,\n  \"times\": [0.0,, 1.0]\n}", "bad.json").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.json") && msg.contains("line 3"), "{msg}");
        let err = parse_tomograms(r#"{"n": 2, "times": [0.0], "snapshots": {"x": []}}"#, "f")
            .unwrap_err();
        assert!(matches!(err, Error::MalformedTomograms(_)));
    }

    #[test]
    fn identity_reconstruction_is_zero() {
        let times: Vec<f64> = (0..8).map(|i| i as f64 * 0.25).collect();
        let samples = reconstruct_samples(&identity_tomograms(3, &times).unwrap()).unwrap();
        for s in samples {
            assert!(s.failures.is_empty());
            assert_eq!(crate::quantum::max_abs(s.generator.unwrap().matrix()), 0.0);
        }
    }
}
