//! Command-line front end for `kdekit`.
//!
//! [`run`] parses arguments, reads the data column, dispatches to a
//! subcommand and writes CSV (and for `sizer` a PPM image). Errors go to
//! standard error as one JSON object; usage errors exit with 2 and
//! computation failures with 1.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kdekit::bandwidth::{
    bootstrap_ziegler, chan_local, hsjm, hsjm_with_pilot, plugin_iterative, robust_rule,
    rule_of_thumb, select_bcv, select_icv, select_likelihood_cv, select_lscv, select_sarda,
    ChanParams,
};
use kdekit::estimators::{default_grid, gamma_kde_grid, kde_grid, kdfe_grid};
use kdekit::histogram::{build_histogram, sturges};
use kdekit::sizer::sizer_map;
use kdekit::{
    linspace, log_space, IcvKernel, KdeError, Kernel, ReportFlag, Sample64, ScaleSpaceGrid,
    SearchInterval, SelectorReport64,
};
use serde_json::json;
use thiserror::Error;

pub mod ingest;

pub use ingest::{ingest, Column, DataSource, Delimiter, Ingested, RowWarning};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Ingestion(String),
    #[error("cannot write {what}: {source}")]
    Output { what: String, source: io::Error },
    #[error(transparent)]
    Compute(#[from] KdeError),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io-failure",
            CliError::Parse { .. } => "parse-failure",
            CliError::Ingestion(_) => "ingestion-failure",
            CliError::Output { .. } => "output-failure",
            CliError::Compute(e) => e.kind(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

fn output_error(what: impl Into<String>) -> impl FnOnce(io::Error) -> CliError {
    let what = what.into();
    move |source| CliError::Output { what, source }
}

#[derive(Parser, Debug)]
#[command(name = "kdekit", version, about = "Kernel density estimation toolkit")]
struct Cli {
    /// Worker threads for parallel evaluation (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Histogram heights as CSV (bin_left, height).
    #[command(allow_negative_numbers = true)]
    Hist(HistArgs),
    /// Fixed-bandwidth kernel density estimate as CSV (x, value).
    #[command(allow_negative_numbers = true)]
    Kde(CurveArgs),
    /// Kernel distribution function estimate as CSV (x, value).
    #[command(allow_negative_numbers = true)]
    Cdf(CurveArgs),
    /// Gamma-kernel estimate for nonnegative data as CSV (x, value).
    #[command(allow_negative_numbers = true)]
    GammaKde(GammaArgs),
    /// Select a bandwidth; prints h on standard output.
    #[command(allow_negative_numbers = true)]
    Bandwidth(BandwidthArgs),
    /// SiZer significance map: writes map.ppm and map.csv.
    #[command(allow_negative_numbers = true)]
    Sizer(SizerArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Input file; omit or pass '-' for standard input.
    input: Option<PathBuf>,
    /// Column as a 1-based position or a header name.
    #[arg(long, default_value = "1")]
    column: Column,
    /// Field delimiter: one character, 'tab', or 'whitespace'.
    #[arg(long, default_value = ",")]
    delimiter: Delimiter,
    /// Treat the first row as a header.
    #[arg(long)]
    skip_header: bool,
    /// Drop the k largest values before estimating.
    #[arg(long, value_name = "K", default_value_t = 0)]
    exclude_top: usize,
}

impl InputArgs {
    fn source(&self) -> DataSource {
        DataSource {
            path: self.input.clone().filter(|p| p.as_os_str() != "-"),
            column: self.column.clone(),
            delimiter: self.delimiter,
            skip_header: self.skip_header,
            exclude_top: self.exclude_top,
        }
    }
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Number of evaluation points.
    #[arg(long, default_value_t = 401, value_parser = clap::value_parser!(u32).range(2..))]
    points: u32,
    /// Left end of the evaluation grid.
    #[arg(long)]
    from: Option<f64>,
    /// Right end of the evaluation grid.
    #[arg(long)]
    to: Option<f64>,
}

impl GridArgs {
    /// The requested grid; unset ends come from `default`.
    fn grid(&self, default: (f64, f64)) -> Result<Vec<f64>, CliError> {
        let lo = self.from.unwrap_or(default.0);
        let hi = self.to.unwrap_or(default.1);
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(CliError::Usage(format!("grid needs finite --from < --to, got [{lo}, {hi}]")));
        }
        Ok(linspace(lo, hi, self.points as usize))
    }
}

#[derive(Args, Debug)]
struct HistArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of bins (default: Sturges).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    bins: Option<u32>,
    /// Left edge of the first bin (default: sample minimum).
    #[arg(long)]
    origin: Option<f64>,
    /// Bin width (default: covers the data).
    #[arg(long)]
    width: Option<f64>,
}

fn parse_kernel(s: &str) -> Result<Kernel, String> {
    s.parse::<Kernel>().map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Bandwidth (default: normal-reference rule of thumb).
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, default_value = "gaussian", value_parser = parse_kernel)]
    kernel: Kernel,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args, Debug)]
struct GammaArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Gamma-kernel smoothing parameter.
    #[arg(long)]
    b: f64,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Rot,
    Robust,
    Plugin,
    Hsjm,
    Lscv,
    Bcv,
    Lcv,
    Icv,
    Chan,
    Bootstrap,
    Sarda,
}

#[derive(Args, Debug)]
struct BandwidthArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    method: Method,
    /// Kernel for lscv, lcv and sarda; the other methods are Gaussian only.
    #[arg(long, default_value = "gaussian", value_parser = parse_kernel)]
    kernel: Kernel,
    /// icv: weight of the negative component (default 0, plain LSCV).
    /// chan: two-sided test level (default 0.05).
    #[arg(long)]
    alpha: Option<f64>,
    /// icv: scale of the negative component; required when alpha > 0.
    #[arg(long)]
    sigma: Option<f64>,
    /// chan: the scan starts at c·n^(-1/5).
    #[arg(long)]
    c: Option<f64>,
    /// chan: the scan ends at n^(-eps).
    #[arg(long)]
    eps: Option<f64>,
    /// chan, bootstrap: point at which the bandwidth is chosen.
    #[arg(long)]
    x: Option<f64>,
    /// bootstrap: resamples per candidate.
    #[arg(long = "B", value_name = "B", default_value_t = 200)]
    replicates: usize,
    /// bootstrap: random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// hsjm, bootstrap: pilot bandwidth (default: rule of thumb).
    #[arg(long)]
    pilot: Option<f64>,
    /// Lower end of the search interval (default 0.05 × rule of thumb).
    #[arg(long)]
    lo: Option<f64>,
    /// Upper end of the search interval (default 3 × rule of thumb).
    #[arg(long)]
    hi: Option<f64>,
    /// Write the criterion trace as CSV (h, criterion) to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SizerArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Family-wise significance level per row.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Derivative order.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    order: u32,
    /// Directory receiving map.ppm and map.csv.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u32).range(1..))]
    x_points: u32,
    #[arg(long, default_value_t = 21, value_parser = clap::value_parser!(u32).range(1..))]
    h_points: u32,
    /// Smallest bandwidth (default: twice the x spacing).
    #[arg(long)]
    h_min: Option<f64>,
    /// Largest bandwidth (default: the data range).
    #[arg(long)]
    h_max: Option<f64>,
}

/// Formats `v` with 9 significant digits in the shortest form that reads
/// back to the rounded value.
pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.8e}").parse().expect("formatted float parses");
    rounded.to_string()
}

fn write_pairs(out: &mut dyn Write, header: &str, xs: &[f64], ys: &[f64]) -> io::Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{header}")?;
    for (x, y) in xs.iter().zip(ys) {
        writeln!(w, "{},{}", format_number(*x), format_number(*y))?;
    }
    w.flush()
}

fn warn(stderr: &mut dyn Write, value: serde_json::Value) {
    // a failing diagnostic stream must not mask the real result
    let _ = writeln!(stderr, "{value}");
}

fn load(input: &InputArgs, stdin: &mut dyn Read, stderr: &mut dyn Write) -> Result<Sample64, CliError> {
    let Ingested { sample, warnings } = ingest(&input.source(), stdin)?;
    for w in warnings {
        warn(stderr, json!({"warning": "unparseable-row", "line": w.line, "message": w.message}));
    }
    Ok(sample)
}

fn bandwidth_or_default(sample: &Sample64, h: Option<f64>) -> Result<f64, CliError> {
    match h {
        Some(h) => Ok(h),
        None => Ok(rule_of_thumb(sample)?.h),
    }
}

fn hist(args: &HistArgs, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    use kdekit::HistogramSpec;
    let s = load(&args.input, stdin, err)?;
    let bins = match args.bins {
        Some(k) => k as usize,
        None => sturges(s.n())?,
    };
    let spec = match (args.origin, args.width) {
        (None, None) => HistogramSpec::with_bin_count(&s, bins)?,
        (origin, width) => {
            let origin = origin.unwrap_or(s.min());
            let width = match width {
                Some(w) => w,
                None if s.max() > origin => (s.max() - origin) / bins as f64 * (1.0 + 1e-9),
                None => 1.0,
            };
            HistogramSpec::new(origin, width, bins)?
        }
    };
    let h = build_histogram(&s, spec)?;
    let lefts: Vec<f64> = (0..spec.bin_count).map(|j| spec.bin_left(j)).collect();
    write_pairs(out, "bin_left,height", &lefts, &h.heights).map_err(output_error("output"))
}

fn curve(
    args: &CurveArgs,
    cdf: bool,
    stdin: &mut dyn Read,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let s = load(&args.input, stdin, err)?;
    let h = bandwidth_or_default(&s, args.h)?;
    kdekit::estimators::check_bandwidth(h)?;
    let fallback = default_grid(&s, h);
    let grid = args.grid.grid((fallback[0], fallback[fallback.len() - 1]))?;
    let est = if cdf {
        kdfe_grid(&s, args.kernel, h, &grid)?
    } else {
        kde_grid(&s, args.kernel, h, &grid)?
    };
    write_pairs(out, "x,value", &est.grid, &est.values).map_err(output_error("output"))
}

fn gamma(args: &GammaArgs, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let s = load(&args.input, stdin, err)?;
    kdekit::estimators::check_bandwidth(args.b)?;
    // the kernel at x has standard deviation about √(xb)
    let top = s.max() + 3.0 * (args.b * s.max().max(0.0)).sqrt() + 3.0 * args.b;
    let grid = args.grid.grid((0.0, top))?;
    let est = gamma_kde_grid(&s, args.b, &grid)?;
    write_pairs(out, "x,value", &est.grid, &est.values).map_err(output_error("output"))
}

fn require_gaussian(kernel: Kernel, method: Method) -> Result<(), CliError> {
    if kernel == Kernel::Gaussian {
        return Ok(());
    }
    let name = method.to_possible_value().expect("no skipped variants");
    Err(KdeError::Unsupported(format!("method {} uses the gaussian kernel only, got {kernel}", name.get_name())).into())
}

fn select(args: &BandwidthArgs, s: &Sample64) -> Result<SelectorReport64, CliError> {
    let rot = rule_of_thumb(s)?.h;
    let interval = |reference: f64| -> Result<SearchInterval<f64>, CliError> {
        let base = SearchInterval::around(reference)?;
        Ok(SearchInterval::new(args.lo.unwrap_or(base.lo), args.hi.unwrap_or(base.hi), base.grid_size)?)
    };
    let need_x = || args.x.ok_or_else(|| CliError::Usage("--x is required for this method".into()));
    let m = args.method;
    if !matches!(m, Method::Lscv | Method::Lcv | Method::Sarda) {
        require_gaussian(args.kernel, m)?;
    }
    Ok(match m {
        Method::Rot => rule_of_thumb(s)?,
        Method::Robust => robust_rule(s)?,
        Method::Plugin => plugin_iterative(s, Kernel::Gaussian)?,
        Method::Hsjm => match args.pilot {
            Some(g) => hsjm_with_pilot(s, Kernel::Gaussian, g)?,
            None => hsjm(s, Kernel::Gaussian)?,
        },
        Method::Lscv => select_lscv(s, &args.kernel, interval(rot)?)?,
        Method::Bcv => select_bcv(s, interval(rot)?)?,
        Method::Lcv => select_likelihood_cv(s, args.kernel, interval(rot)?)?,
        Method::Icv => {
            let alpha = args.alpha.unwrap_or(0.0);
            let sigma = match args.sigma {
                Some(v) => v,
                None if alpha == 0.0 => 1.0,
                None => return Err(CliError::Usage("--sigma is required when --alpha is nonzero".into())),
            };
            let params = IcvKernel::new(alpha, sigma)?;
            // the search runs over the L-kernel bandwidth b = h/C
            let c = params.bandwidth_ratio()?;
            select_icv(s, &params, interval(rot / c)?)?
        }
        Method::Chan => {
            let d = ChanParams::default();
            let params = ChanParams {
                c: args.c.unwrap_or(d.c),
                eps: args.eps.unwrap_or(d.eps),
                alpha: args.alpha.unwrap_or(d.alpha),
            };
            chan_local(s, need_x()?, params)?
        }
        Method::Bootstrap => {
            let x = need_x()?;
            let pilot = args.pilot.unwrap_or(rot);
            let iv = interval(rot)?;
            // candidates h = n^{-1/5}·s over the search interval
            let scale = (s.n() as f64).powf(0.2);
            let s_grid: Vec<f64> = log_space(iv.lo, iv.hi, iv.grid_size).iter().map(|h| h * scale).collect();
            bootstrap_ziegler(s, x, pilot, &s_grid, args.replicates, args.seed)?
        }
        Method::Sarda => select_sarda(s, args.kernel, interval(rot)?)?,
    })
}

fn flag_name(flag: ReportFlag) -> &'static str {
    match flag {
        ReportFlag::BoundarySolution => "boundary-solution",
        ReportFlag::IterationLimit => "iteration-limit",
        ReportFlag::NonPositiveRoughness => "non-positive-roughness",
        ReportFlag::EmptyAdmissibleSet => "empty-admissible-set",
    }
}

fn bandwidth(args: &BandwidthArgs, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let s = load(&args.input, stdin, err)?;
    let report = select(args, &s)?;
    if let Some(flag) = report.flag {
        warn(
            err,
            json!({
                "warning": flag_name(flag),
                "h": report.h,
                "converged": report.converged,
                "iterations": report.iterations,
            }),
        );
    }
    if let Some(path) = &args.trace {
        let what = path.display().to_string();
        let file = fs::File::create(path).map_err(output_error(what.clone()))?;
        let mut file = file;
        let (hs, vs): (Vec<f64>, Vec<f64>) = report.criterion_trace.iter().copied().unzip();
        write_pairs(&mut file, "h,criterion", &hs, &vs).map_err(output_error(what))?;
    }
    writeln!(out, "{}", format_number(report.h)).map_err(output_error("output"))
}

fn sizer(args: &SizerArgs, stdin: &mut dyn Read, err: &mut dyn Write) -> Result<(), CliError> {
    let s = load(&args.input, stdin, err)?;
    let default = ScaleSpaceGrid::default_for(&s)?;
    let xd = default.x_grid();
    let x_grid = linspace(xd[0], xd[xd.len() - 1], args.x_points as usize);
    let spacing = if x_grid.len() > 1 { x_grid[1] - x_grid[0] } else { default.h_grid()[0] / 2.0 };
    let h_min = args.h_min.unwrap_or(2.0 * spacing);
    let h_max = args.h_max.unwrap_or(s.range());
    if !(h_min > 0.0 && h_min.is_finite() && h_max.is_finite() && (h_min < h_max || args.h_points == 1)) {
        return Err(CliError::Usage(format!("need 0 < --h-min < --h-max, got {h_min} and {h_max}")));
    }
    let grid = ScaleSpaceGrid::new(x_grid, log_space(h_min, h_max, args.h_points as usize))?;
    let map = sizer_map(&s, grid, args.order as usize, args.alpha)?;

    fs::create_dir_all(&args.out_dir).map_err(output_error(args.out_dir.display().to_string()))?;
    let ppm_path = args.out_dir.join("map.ppm");
    let what = ppm_path.display().to_string();
    let file = fs::File::create(&ppm_path).map_err(output_error(what.clone()))?;
    let mut w = BufWriter::new(file);
    map.write_ppm(&mut w).and_then(|_| w.flush()).map_err(output_error(what))?;

    let csv_path = args.out_dir.join("map.csv");
    let what = csv_path.display().to_string();
    let file = fs::File::create(&csv_path).map_err(output_error(what.clone()))?;
    let mut w = BufWriter::new(file);
    let mut body = || -> io::Result<()> {
        writeln!(w, "x,h,class")?;
        for (row, &h) in map.grid.h_grid().iter().enumerate() {
            for (&x, p) in map.grid.x_grid().iter().zip(map.row(row)) {
                writeln!(w, "{},{},{}", format_number(x), format_number(h), p.name())?;
            }
        }
        w.flush()
    };
    body().map_err(output_error(what))
}

fn dispatch(
    cli: &Cli,
    stdin: &mut (dyn Read + Send),
    out: &mut (dyn Write + Send),
    err: &mut (dyn Write + Send),
) -> Result<(), CliError> {
    match &cli.command {
        Command::Hist(a) => hist(a, stdin, out, err),
        Command::Kde(a) => curve(a, false, stdin, out, err),
        Command::Cdf(a) => curve(a, true, stdin, out, err),
        Command::GammaKde(a) => gamma(a, stdin, out, err),
        Command::Bandwidth(a) => bandwidth(a, stdin, out, err),
        Command::Sizer(a) => sizer(a, stdin, err),
    }
}

/// Runs one invocation and returns the process exit status.
pub fn run<I, A>(
    args: I,
    stdin: &mut (dyn Read + Send),
    stdout: &mut (dyn Write + Send),
    stderr: &mut (dyn Write + Send),
) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // help and version requests
            let _ = write!(stdout, "{e}");
            return 0;
        }
        Err(e) => {
            let message = e.render().to_string();
            let message = message.trim_start_matches("error: ").trim_end();
            warn(stderr, json!({"error": "usage", "message": message}));
            return 2;
        }
    };
    let result = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))
            .and_then(|pool| pool.install(|| dispatch(&cli, stdin, stdout, stderr))),
        None => dispatch(&cli, stdin, stdout, stderr),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            warn(stderr, json!({"error": e.kind(), "message": e.to_string()}));
            e.exit_code()
        }
    }
}
