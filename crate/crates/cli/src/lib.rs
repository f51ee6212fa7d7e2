//! Command-line driver: argument parsing, config files and the command
//! implementations behind the `surfest` binary.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use surfest::configcount::{count_configurations, count_configurations_naive, ConfigHistogram};
use surfest::decomposition::{nprime_count, verify_pixel_bounds_2d};
use surfest::estimator::{
    calibrate_halfspace_weights, default_calibration_samples, estimate, WeightTable, DEFAULT_SEED,
};
use surfest::experiments::{
    cusp_experiment, fit_envelope_slope, sweep_shifts, t_schedule, variance_curve, Curve, Envelope,
    ShiftSampler,
};
use surfest::geometry::{parse_shape, Solid};
use surfest::lattice::{digitize_capped, LatticeImage, DEFAULT_MEMORY_CAP_BITS};

/// Raised when a computation finished but a checked property did not hold.
/// The binary maps it to exit code 2.
#[derive(Debug)]
pub struct AssertionFailure(pub String);

impl std::fmt::Display for AssertionFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for AssertionFailure {}

#[derive(Parser, Debug)]
#[command(
    name = "surfest",
    version,
    about = "Local surface-area estimators on lattice digitizations"
)]
pub struct Cli {
    /// Worker threads (default: all available cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// File of `key = value` lines supplying defaults for any long flag of the command.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Accept weight tables with nonzero weight on the all-white or all-black configuration.
    #[arg(long, global = true)]
    pub allow_nonzero_endpoints: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Digitize a solid and write the binary image dump.
    Digitize(DigitizeArgs),
    /// Count n×…×n window configurations; prints `index,count` CSV.
    Count(CountArgs),
    /// Evaluate the local estimator on one digitization.
    Estimate(EstimateArgs),
    /// Estimator statistics over many shifts at one lattice distance.
    Sweep(SweepArgs),
    /// Estimator statistics over a geometric schedule of lattice distances.
    Curve(CurveArgs),
    /// Variance curve and decay slope for the cusp union.
    Cusp(CuspArgs),
    /// Count cells meeting two boundary components of r K + v.
    Nprime(NprimeArgs),
    /// Check the per-component configuration count bounds of a polygon.
    VerifyBounds(VerifyArgs),
    /// Fit weights that are exact on digitized half-spaces.
    Calibrate(CalibrateArgs),
}

#[derive(Args, Debug)]
pub struct ImageSource {
    /// Shape: `ball:r=1[,d=3][,c=x;y;z]`, `box:a,b,..`, `poly:FILE.json`, `cusp:k=2`, `preset:parallelepiped`.
    #[arg(long)]
    pub shape: Option<String>,
    /// Lattice distance.
    #[arg(long)]
    pub t: Option<f64>,
    /// Shift in [0,1)^d, comma separated (default: origin).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub shift: Vec<f64>,
    /// Read a binary image dump instead of digitizing.
    #[arg(long, conflicts_with_all = ["shape", "t", "shift"])]
    pub image: Option<PathBuf>,
    /// Refuse images with more pixels than this.
    #[arg(long, default_value_t = DEFAULT_MEMORY_CAP_BITS)]
    pub memory_cap_bits: u64,
}

#[derive(Args, Debug)]
pub struct DigitizeArgs {
    /// Shape specification (see `count --help`).
    #[arg(long)]
    pub shape: String,
    /// Lattice distance.
    #[arg(long)]
    pub t: f64,
    /// Shift in [0,1)^d, comma separated (default: origin).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub shift: Vec<f64>,
    /// White border width kept around the solid.
    #[arg(long, default_value_t = 1)]
    pub margin: usize,
    /// Refuse images with more pixels than this.
    #[arg(long, default_value_t = DEFAULT_MEMORY_CAP_BITS)]
    pub memory_cap_bits: u64,
    /// Output file for the image dump.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[command(flatten)]
    pub source: ImageSource,
    /// Window side length.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Use the direct per-position counter.
    #[arg(long)]
    pub naive: bool,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub source: ImageSource,
    /// Window side length.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// `default` for the shipped table of this (d, n), or a weight CSV path.
    #[arg(long, default_value = "default")]
    pub weights: String,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Shape specification.
    #[arg(long)]
    pub shape: String,
    /// Lattice distance.
    #[arg(long)]
    pub t: f64,
    /// `mc:RUNS` for uniform random shifts, `grid:M` for the M^d cell midpoints, or `grid` for the default M (32 in 2D, 8 in 3D).
    #[arg(long, default_value = "mc:400")]
    pub shifts: String,
    /// Seed of the random shifts.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Window side length.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// `default` or a weight CSV path.
    #[arg(long, default_value = "default")]
    pub weights: String,
}

#[derive(Args, Debug)]
pub struct ScheduleArgs {
    /// Largest lattice distance.
    #[arg(long, default_value_t = 0.1)]
    pub t_max: f64,
    /// Smallest lattice distance.
    #[arg(long)]
    pub t_min: f64,
    /// Ratio between consecutive lattice distances.
    #[arg(long, default_value_t = 0.999)]
    pub ratio: f64,
    /// Random shifts per lattice distance.
    #[arg(long, default_value_t = 400, conflicts_with = "grid")]
    pub runs: usize,
    /// Use the M^d cell-midpoint shifts instead of random ones (M defaults to 32 in 2D, 8 in 3D).
    #[arg(long, num_args = 0..=1, value_name = "M")]
    pub grid: Option<Option<usize>>,
    /// Seed of the random shifts.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// `default` or a weight CSV path.
    #[arg(long, default_value = "default")]
    pub weights: String,
    /// Window of the upper-envelope slope fit, in octaves of t.
    #[arg(long, default_value_t = 1.0)]
    pub window: f64,
    /// Write the curve CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    /// Shape specification.
    #[arg(long)]
    pub shape: String,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Window side length.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
}

#[derive(Args, Debug)]
pub struct CuspArgs {
    /// Cusp exponent, at least 2.
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
}

#[derive(Args, Debug)]
pub struct NprimeArgs {
    /// Shape specification (polygon or box).
    #[arg(long)]
    pub shape: String,
    /// Scale factors, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub r: Vec<f64>,
    /// Fixed translation, comma separated; without it `--shifts` random ones are drawn.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub v: Vec<f64>,
    /// Random translations in [0,1)^d per scale.
    #[arg(long, default_value_t = 16)]
    pub shifts: usize,
    /// Seed of the random translations.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Window side length.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Shape specification (2D polygon or rectangle).
    #[arg(long)]
    pub shape: String,
    /// Scale factor.
    #[arg(long)]
    pub r: f64,
    /// Translation, comma separated (default: origin).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub v: Vec<f64>,
    /// Window side length.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
}

#[derive(Args, Debug)]
pub struct CalibrateArgs {
    /// Window side length.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Dimension.
    #[arg(long)]
    pub d: usize,
    /// Random base directions (default: 64 in 2D, 256 otherwise).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Seed of the directions.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Write the weight CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Outcome of parsing the command line.
pub enum Parsed {
    Run(Cli),
    /// Help or version text, to be printed with exit code 0.
    Info(String),
}

/// Parses `argv` (program name first), merging in `--config` defaults.
pub fn parse(argv: &[String]) -> Result<Parsed> {
    let merged = merge_config(argv)?;
    match Cli::try_parse_from(&merged) {
        Ok(cli) => Ok(Parsed::Run(cli)),
        Err(e) => match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                Ok(Parsed::Info(e.to_string()))
            }
            _ => Err(anyhow!("{}", e.to_string().trim_end())),
        },
    }
}

/// Inserts `--key value` for every config entry whose flag is not already
/// on the command line. Booleans become bare flags when true; arrays are
/// joined with commas.
fn merge_config(argv: &[String]) -> Result<Vec<String>> {
    let mut path = None;
    let mut i = 0;
    while i < argv.len() {
        if argv[i] == "--config" {
            path = argv.get(i + 1).cloned();
            break;
        }
        if let Some(p) = argv[i].strip_prefix("--config=") {
            path = Some(p.to_string());
            break;
        }
        i += 1;
    }
    let Some(path) = path else {
        return Ok(argv.to_vec());
    };
    let text =
        fs::read_to_string(&path).with_context(|| format!("--config: cannot read {path}"))?;
    let table: toml::Table = text
        .parse()
        .with_context(|| format!("--config: {path} is not key = value"))?;
    let mut extra = Vec::new();
    for (key, value) in table {
        let flag = format!("--{}", key.replace('_', "-"));
        if argv
            .iter()
            .any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
        {
            continue;
        }
        let scalar = |v: &toml::Value| -> Result<String> {
            Ok(match v {
                toml::Value::String(s) => s.clone(),
                toml::Value::Integer(i) => i.to_string(),
                toml::Value::Float(f) => format!("{f:?}"),
                other => bail!("--config: unsupported value for `{key}`: {other}"),
            })
        };
        match &value {
            toml::Value::Boolean(true) => extra.push(flag),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) => {
                extra.push(flag);
                extra.push(
                    items
                        .iter()
                        .map(scalar)
                        .collect::<Result<Vec<_>>>()?
                        .join(","),
                );
            }
            v => {
                extra.push(flag);
                extra.push(scalar(v)?);
            }
        }
    }
    let mut out = argv.to_vec();
    out.extend(extra);
    Ok(out)
}

/// Runs a parsed command, writing its report to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cli.threads {
            if n == 0 {
                bail!("--threads must be at least 1");
            }
            b = b.num_threads(n);
        }
        b.build().context("--threads: cannot start worker pool")?
    };
    let mut buf = Vec::new();
    let allow = cli.allow_nonzero_endpoints;
    let result = pool.install(|| dispatch(cli.command, allow, &mut buf));
    out.write_all(&buf).context("writing output")?;
    out.flush().context("writing output")?;
    result
}

/// Parses and runs; returns the process exit code.
pub fn run(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match parse(argv) {
        Ok(Parsed::Info(text)) => {
            let _ = write!(out, "{text}");
            return 0;
        }
        Ok(Parsed::Run(cli)) => execute(cli, out),
        Err(e) => Err(e),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            if e.downcast_ref::<AssertionFailure>().is_some() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(command: Command, allow: bool, out: &mut Vec<u8>) -> Result<()> {
    match command {
        Command::Digitize(a) => cmd_digitize(a, out),
        Command::Count(a) => cmd_count(a, out),
        Command::Estimate(a) => cmd_estimate(a, allow, out),
        Command::Sweep(a) => cmd_sweep(a, allow, out),
        Command::Curve(a) => cmd_curve(a, allow, out),
        Command::Cusp(a) => cmd_cusp(a, allow, out),
        Command::Nprime(a) => cmd_nprime(a, out),
        Command::VerifyBounds(a) => cmd_verify(a, out),
        Command::Calibrate(a) => cmd_calibrate(a, out),
    }
}

fn shape(spec: &str) -> Result<Solid> {
    parse_shape(spec).context("--shape")
}

fn shift_or_origin(shift: Vec<f64>, d: usize, flag: &str) -> Result<Vec<f64>> {
    if shift.is_empty() {
        return Ok(vec![0.0; d]);
    }
    if shift.len() != d {
        bail!("{flag}: expected {d} components, got {}", shift.len());
    }
    Ok(shift)
}

fn load_weights(
    spec: &str,
    n: usize,
    d: usize,
    allow_nonzero_endpoints: bool,
) -> Result<WeightTable> {
    if spec == "default" {
        return WeightTable::default_for(n, d).context("--weights");
    }
    let text =
        fs::read_to_string(spec).with_context(|| format!("--weights: cannot read {spec}"))?;
    WeightTable::from_csv(&text, n, d, allow_nonzero_endpoints)
        .with_context(|| format!("--weights: {spec}"))
}

fn image(src: ImageSource, margin: usize) -> Result<LatticeImage> {
    if let Some(path) = src.image {
        let file = fs::File::open(&path)
            .with_context(|| format!("--image: cannot open {}", path.display()))?;
        return LatticeImage::read_from(std::io::BufReader::new(file)).context("--image");
    }
    let spec = src
        .shape
        .ok_or_else(|| anyhow!("--shape or --image is required"))?;
    let t = src
        .t
        .ok_or_else(|| anyhow!("--t is required with --shape"))?;
    let solid = shape(&spec)?;
    let shift = shift_or_origin(src.shift, solid.dim(), "--shift")?;
    digitize_capped(&solid, t, &shift, margin, src.memory_cap_bits)
        .context("digitize (--t, --shift, --memory-cap-bits)")
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => {
            fs::write(p, text).with_context(|| format!("--out: cannot write {}", p.display()))
        }
        None => out.write_all(text.as_bytes()).context("writing output"),
    }
}

fn join(v: &[f64], sep: &str) -> String {
    v.iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(sep)
}

fn cmd_digitize(a: DigitizeArgs, out: &mut dyn Write) -> Result<()> {
    let solid = shape(&a.shape)?;
    let shift = shift_or_origin(a.shift, solid.dim(), "--shift")?;
    let img = digitize_capped(&solid, a.t, &shift, a.margin, a.memory_cap_bits)
        .context("digitize (--t, --shift, --memory-cap-bits)")?;
    let file = fs::File::create(&a.out)
        .with_context(|| format!("--out: cannot create {}", a.out.display()))?;
    let mut w = std::io::BufWriter::new(file);
    img.write_to(&mut w).context("--out")?;
    w.flush().context("--out")?;
    let dims: Vec<String> = img.dims().iter().map(|x| x.to_string()).collect();
    writeln!(out, "dims={} black={}", dims.join("x"), img.black_count())?;
    Ok(())
}

fn histogram(src: ImageSource, n: usize, naive: bool) -> Result<(ConfigHistogram, f64)> {
    let img = image(src, n.saturating_sub(1))?;
    let hist = if naive {
        count_configurations_naive(&img, n)
    } else {
        count_configurations(&img, n)
    };
    Ok((hist.context("--n")?, img.t()))
}

fn cmd_count(a: CountArgs, out: &mut dyn Write) -> Result<()> {
    let (hist, _) = histogram(a.source, a.n, a.naive)?;
    write_output(a.out.as_deref(), &hist.to_csv(), out)
}

fn cmd_estimate(a: EstimateArgs, allow: bool, out: &mut dyn Write) -> Result<()> {
    let (hist, t) = histogram(a.source, a.n, false)?;
    let w = load_weights(&a.weights, a.n, hist.d(), allow)?;
    let r = estimate(&hist, &w, t).context("--weights")?;
    writeln!(
        out,
        "value={:?} t={:?} provenance={}",
        r.value, r.t, r.provenance
    )?;
    Ok(())
}

/// Grid side used when `grid` is given without one.
pub fn default_grid(d: usize) -> usize {
    if d <= 2 {
        32
    } else {
        8
    }
}

/// Parses `mc:RUNS`, `grid:M` or `grid` (default side for dimension `d`).
pub fn parse_sampler(spec: &str, seed: u64, d: usize) -> Result<ShiftSampler> {
    if spec == "grid" {
        return Ok(ShiftSampler::Grid { m: default_grid(d) });
    }
    let (kind, count) = spec
        .split_once(':')
        .ok_or_else(|| anyhow!("--shifts: expected mc:RUNS, grid:M or grid"))?;
    let count: usize = count
        .parse()
        .map_err(|_| anyhow!("--shifts: `{count}` is not a count"))?;
    if count == 0 {
        bail!("--shifts: count must be positive");
    }
    match kind {
        "mc" => Ok(ShiftSampler::MonteCarlo { runs: count, seed }),
        "grid" => Ok(ShiftSampler::Grid { m: count }),
        _ => bail!("--shifts: unknown sampler `{kind}`"),
    }
}

const CURVE_HEADER: &str = "t,runs,mean,std,sup,inf";

fn cmd_sweep(a: SweepArgs, allow: bool, out: &mut dyn Write) -> Result<()> {
    let solid = shape(&a.shape)?;
    let sampler = parse_sampler(&a.shifts, a.seed, solid.dim())?;
    let w = load_weights(&a.weights, a.n, solid.dim(), allow)?;
    let p = sweep_shifts(&solid, a.t, &w, &sampler).context("sweep (--t)")?;
    writeln!(out, "{CURVE_HEADER}")?;
    writeln!(
        out,
        "{:?},{},{:?},{:?},{:?},{:?}",
        p.t, p.runs, p.mean, p.std, p.sup, p.inf
    )?;
    Ok(())
}

fn schedule_sampler(s: &ScheduleArgs, d: usize) -> Result<(Vec<f64>, ShiftSampler)> {
    let schedule = t_schedule(s.t_max, s.ratio, s.t_min).context("--t-max/--t-min/--ratio")?;
    let sampler = match s.grid {
        Some(Some(0)) => bail!("--grid must be positive"),
        Some(Some(m)) => ShiftSampler::Grid { m },
        Some(None) => ShiftSampler::Grid { m: default_grid(d) },
        None if s.runs == 0 => bail!("--runs must be positive"),
        None => ShiftSampler::MonteCarlo {
            runs: s.runs,
            seed: s.seed,
        },
    };
    Ok((schedule, sampler))
}

fn report_failures(curve: &Curve) {
    for (t, e) in &curve.failures {
        eprintln!("warning: t={t:?} skipped: {e}");
    }
}

fn cmd_curve(a: CurveArgs, allow: bool, out: &mut dyn Write) -> Result<()> {
    let solid = shape(&a.shape)?;
    let w = load_weights(&a.schedule.weights, a.n, solid.dim(), allow)?;
    let (schedule, sampler) = schedule_sampler(&a.schedule, solid.dim())?;
    let curve = variance_curve(&solid, &w, &schedule, &sampler);
    report_failures(&curve);
    write_output(a.schedule.out.as_deref(), &curve.to_csv(), out)?;
    if a.schedule.out.is_some() {
        match fit_envelope_slope(&curve.std_series(), Envelope::Upper, a.schedule.window) {
            Ok(fit) => writeln!(
                out,
                "std envelope slope={:?} stderr={:?}",
                fit.slope, fit.stderr
            )?,
            Err(e) => writeln!(out, "std envelope slope unavailable: {e}")?,
        }
    }
    Ok(())
}

fn cmd_cusp(a: CuspArgs, allow: bool, out: &mut dyn Write) -> Result<()> {
    let w = load_weights(&a.schedule.weights, 2, 2, allow)?;
    let (schedule, sampler) = schedule_sampler(&a.schedule, 2)?;
    let r = cusp_experiment(a.k, &schedule, &sampler, &w, a.schedule.window).context("--k")?;
    if let Some(warning) = &r.warning {
        eprintln!("warning: {warning}");
    }
    report_failures(&r.curve);
    match &a.schedule.out {
        Some(p) => fs::write(p, r.curve.to_csv())
            .with_context(|| format!("--out: cannot write {}", p.display()))?,
        None => out.write_all(r.curve.to_csv().as_bytes())?,
    }
    match &r.fit {
        Ok(fit) => writeln!(
            out,
            "std envelope slope={:?} stderr={:?}",
            fit.slope, fit.stderr
        )?,
        Err(e) => writeln!(out, "std envelope slope unavailable: {e}")?,
    }
    Ok(())
}

fn cmd_nprime(a: NprimeArgs, out: &mut dyn Write) -> Result<()> {
    let solid = shape(&a.shape)?;
    let d = solid.dim();
    let fixed = if a.v.is_empty() {
        None
    } else {
        Some(shift_or_origin(a.v, d, "--v")?)
    };
    let mut text = String::from("r,v,nprime\n");
    for (ri, &r) in a.r.iter().enumerate() {
        let translations: Vec<Vec<f64>> = match &fixed {
            Some(v) => vec![v.clone()],
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
                rng.set_stream(ri as u64);
                (0..a.shifts)
                    .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
                    .collect()
            }
        };
        for v in translations {
            let rep = nprime_count(&solid, r, &v, a.n).context("--shape/--r")?;
            writeln!(text, "{r:?},{},{}", join(&v, ";"), rep.nprime)?;
        }
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> Result<()> {
    let solid = shape(&a.shape)?;
    let v = shift_or_origin(a.v, solid.dim(), "--v")?;
    let rep = verify_pixel_bounds_2d(&solid, a.r, &v, a.n).context("--shape/--r/--n")?;
    writeln!(
        out,
        "components={} checks={} violations={} non_halfspace={}",
        rep.components.len(),
        rep.checks.len() + rep.prefix_checks.len(),
        rep.violations(),
        rep.non_halfspace.iter().sum::<u64>()
    )?;
    if !rep.all_hold() {
        return Err(AssertionFailure(format!("{} bound checks failed", rep.violations())).into());
    }
    Ok(())
}

fn cmd_calibrate(a: CalibrateArgs, out: &mut dyn Write) -> Result<()> {
    let samples = a
        .samples
        .unwrap_or_else(|| default_calibration_samples(a.d));
    let cal =
        calibrate_halfspace_weights(a.n, a.d, samples, a.seed).context("--n/--d/--samples")?;
    eprintln!(
        "rank {} of {} unknowns, training rms {:?}{}",
        cal.rank,
        cal.unknowns,
        cal.training_rms,
        if cal.rank_deficient() {
            " (rank deficient: minimum-norm solution)"
        } else {
            ""
        }
    );
    write_output(a.out.as_deref(), &cal.weights.to_csv(), out)
}
