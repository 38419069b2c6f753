//! The `tailband` command line: analyze, simulate, coverage, quantiles and
//! replay. [`run`] returns the process exit code: 0 on success, 1 for
//! internal failures, 2 for usage and domain errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bands::{
    conservative_xi, coverage_experiment, me_band_levels, qq_band_levels, ConfidenceBand, DistSpec, McSettings,
    PlotChoice,
};
use crate::data::{hill_estimate, parse_text, InputFormat, TailIndexEstimate};
use crate::distributions::{
    limit_quantile, sample_gpd, sample_nonstd, sample_pareto, sample_stable, GpdParams, QuantileMethod, StableKind,
    StableSpec,
};
use crate::error::{invalid, Error, Result};
use crate::limitsim::{
    me_band_quantiles, me_c_quantile, qq_sup_quantile, QuantileEstimate, QuantileSource, DEFAULT_GRID,
    DEFAULT_PATHS,
};
use crate::output::{band_csv, parse_manifest, plot_csv, render_svg, to_json, write_recorded, RunManifest};
use crate::plotsets::{me_set, qq_set, PlotConfig};
use crate::rng::RngStream;

pub const SEED_ENV: &str = "TAILBAND_SEED";
const MULTI_ALPHAS: [f64; 3] = [0.01, 0.05, 0.10];

#[derive(Debug, Parser)]
#[command(name = "tailband", version, about = "QQ and mean excess plots with confidence bands for heavy tails")]
struct Cli {
    /// Worker threads for Monte Carlo work (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a truncated QQ or ME plot, optionally with a confidence band.
    Analyze(AnalyzeArgs),
    /// Draw a sample from a heavy-tailed law.
    Simulate(SimulateArgs),
    /// Run a band coverage experiment on simulated data.
    Coverage(CoverageArgs),
    /// Tabulate a quantile of a limit functional.
    Quantiles(QuantilesArgs),
    /// Re-run the command recorded in a manifest and check the output hashes.
    Replay { manifest: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlotArg {
    Qq,
    Me,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    file: PathBuf,
    #[arg(long, value_enum)]
    plot: PlotArg,
    #[arg(long)]
    k: usize,
    /// Truncation fraction; required with --band.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    band: bool,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Use this shape instead of the Hill estimate at k.
    #[arg(long)]
    xi: Option<f64>,
    /// Inflate the shape estimate by 1.96 xi/sqrt(k).
    #[arg(long)]
    conservative_xi: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_PATHS)]
    paths: usize,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// Read this 0-based column of a comma-separated file.
    #[arg(long)]
    column: Option<usize>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Bands at alpha = 0.01, 0.05 and 0.10.
    #[arg(long)]
    multi_alpha: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DistArg {
    Pareto,
    Gpd,
    Stable,
    Nonstd,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    dist: DistArg,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Stable skewness.
    #[arg(long, default_value_t = 1.0)]
    skew: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Sample file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CoverageArgs {
    #[arg(long, value_enum)]
    dist: DistArg,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, value_enum)]
    plot: PlotArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 100)]
    replications: usize,
    #[arg(long, default_value_t = DEFAULT_PATHS)]
    paths: usize,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Report JSON; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FunctionalArg {
    QqSup,
    MeC,
    MeD,
    Stilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Cf,
    Mc,
    Both,
}

#[derive(Debug, Args)]
struct QuantilesArgs {
    #[arg(long, value_enum)]
    functional: FunctionalArg,
    #[arg(long, default_value_t = 0.0)]
    xi: f64,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    #[arg(long)]
    level: f64,
    #[arg(long, default_value_t = DEFAULT_PATHS)]
    paths: usize,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Used by the stilde functional.
    #[arg(long, value_enum, default_value = "cf")]
    method: MethodArg,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| invalid(format!("{SEED_ENV} is not a u64: {v:?}"))),
        Err(_) => Ok(0),
    }
}

/// `argv` with an explicit `--seed`, so a manifest replays without the environment.
fn pinned_argv(argv: &[String], seed: u64, has_flag: bool) -> Vec<String> {
    let mut v = argv.to_vec();
    if !has_flag {
        v.push("--seed".into());
        v.push(seed.to_string());
    }
    v
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::ConvergenceFailure(_) => 1,
        _ => 2,
    }
}

/// Parses `argv` (including the program name) and runs the command with
/// standard output as the sink.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout())
}

/// [`run`] writing command output to `out`; diagnostics still go to stderr.
pub fn run_with<I, T>(argv: I, out: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let raw: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&raw) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let strings: Vec<String> = raw.iter().map(|s| s.to_string_lossy().into_owned()).collect();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("Io: cannot start thread pool: {e}");
            return 1;
        }
    };
    match pool.install(|| dispatch(cli.command, &strings, out)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command, argv: &[String], out: &mut (dyn Write + Send)) -> Result<()> {
    match cmd {
        Command::Analyze(a) => analyze(a, argv, out),
        Command::Simulate(a) => simulate(a, argv, out),
        Command::Coverage(a) => coverage(a, argv, out),
        Command::Quantiles(a) => quantiles(a, out),
        Command::Replay { manifest } => replay(&manifest, out),
    }
}

#[derive(Serialize)]
struct BandMeta<'a> {
    regime: crate::bands::BandRegime,
    level: f64,
    quantiles: &'a crate::bands::QuantilesUsed,
    warning: &'a Option<String>,
}

#[derive(Serialize)]
struct PlotMeta<'a> {
    kind: crate::plotsets::PlotKind,
    points: usize,
    config: &'a Option<PlotConfig>,
    normalizers: &'a crate::plotsets::Normalizers,
}

#[derive(Serialize)]
struct AnalyzeMeta<'a> {
    input: String,
    n: usize,
    plot: PlotMeta<'a>,
    xi: Option<TailIndexEstimate>,
    seed: u64,
    bands: Vec<BandMeta<'a>>,
}

fn analyze(a: AnalyzeArgs, argv: &[String], out: &mut (dyn Write + Send)) -> Result<()> {
    let seed = resolve_seed(a.seed)?;
    let bytes = fs::read(&a.file).map_err(|_| Error::FileNotFound(a.file.clone()))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Error::ParseError { line: 0, message: "input is not UTF-8".into() })?;
    let format = a.column.map_or(InputFormat::Plain, InputFormat::CsvColumn);
    let sample = parse_text(&text, format)?;
    if a.band && a.eps.is_none() {
        return Err(invalid("--band needs an explicit --eps"));
    }
    let cfg = match a.eps {
        Some(eps) => PlotConfig::new(a.k, eps, a.alpha)?,
        None => PlotConfig { alpha: a.alpha, ..PlotConfig::untruncated(a.k)? },
    };
    let plot = match a.plot {
        PlotArg::Qq => qq_set(&sample, &cfg)?,
        PlotArg::Me => me_set(&sample, &cfg)?,
    };
    let xi = match a.xi {
        Some(x) => Some(TailIndexEstimate::fixed(x, a.k)?),
        None if a.band => Some(hill_estimate(&sample, a.k)?),
        None => hill_estimate(&sample, a.k).ok(),
    };
    let xi = if a.conservative_xi { xi.map(|x| conservative_xi(&x)) } else { xi };
    let alphas: Vec<f64> = if a.multi_alpha { MULTI_ALPHAS.to_vec() } else { vec![a.alpha] };
    let bands: Vec<ConfidenceBand> = match (a.band, xi) {
        (true, Some(x)) => match a.plot {
            PlotArg::Qq => qq_band_levels(&sample, &cfg, &x, &alphas)?,
            PlotArg::Me => me_band_levels(
                &sample,
                &cfg,
                &x,
                &alphas,
                RngStream::new(seed, 0),
                McSettings { n_paths: a.paths, grid: a.grid },
            )?,
        },
        _ => Vec::new(),
    };
    for w in bands.iter().filter_map(|b| b.warning.as_ref()) {
        eprintln!("warning: {w}");
    }

    fs::create_dir_all(&a.out_dir)?;
    let mut manifest = RunManifest::new(pinned_argv(argv, seed, a.seed.is_some()), Some(seed));
    manifest.add_input(&a.file, text.as_bytes());
    write_recorded(&mut manifest, &a.out_dir.join("plot.csv"), plot_csv(&plot).as_bytes())?;
    if let Some(b) = bands.iter().find(|b| (b.level - (1.0 - a.alpha)).abs() < 1e-12).or(bands.first()) {
        write_recorded(&mut manifest, &a.out_dir.join("band.csv"), band_csv(b).as_bytes())?;
    }
    if let Some(svg) = &a.svg {
        let slope = xi.map(|x| match a.plot {
            PlotArg::Qq => x.xi,
            PlotArg::Me => x.xi / (1.0 - x.xi),
        });
        let slope = slope.filter(|s| s.is_finite() && *s > 0.0);
        write_recorded(&mut manifest, svg, render_svg(&plot, &bands, slope).as_bytes())?;
    }
    let meta = AnalyzeMeta {
        input: a.file.display().to_string(),
        n: sample.n(),
        plot: PlotMeta {
            kind: plot.kind,
            points: plot.points.len(),
            config: &plot.config,
            normalizers: &plot.normalizers,
        },
        xi,
        seed,
        bands: bands
            .iter()
            .map(|b| BandMeta { regime: b.regime, level: b.level, quantiles: &b.quantiles_used, warning: &b.warning })
            .collect(),
    };
    write_recorded(&mut manifest, &a.out_dir.join("meta.json"), to_json(&meta).as_bytes())?;
    fs::write(a.out_dir.join("manifest.json"), manifest.to_json())?;
    writeln!(out, "{} points written to {}", plot.points.len(), a.out_dir.display())?;
    Ok(())
}

fn need_xi(xi: Option<f64>, dist: DistArg) -> Result<f64> {
    xi.ok_or_else(|| invalid(format!("--dist {dist:?} needs --xi").to_lowercase()))
}

fn simulate(a: SimulateArgs, argv: &[String], out: &mut (dyn Write + Send)) -> Result<()> {
    let seed = resolve_seed(a.seed)?;
    let rng = RngStream::new(seed, 0);
    let sample = match a.dist {
        DistArg::Pareto => sample_pareto(need_xi(a.xi, a.dist)?, a.n, rng)?,
        DistArg::Gpd => sample_gpd(&GpdParams::new(need_xi(a.xi, a.dist)?, a.beta)?, a.n, rng)?,
        DistArg::Stable => sample_stable(&StableSpec::simulation(1.0 / need_xi(a.xi, a.dist)?, a.skew)?, a.n, rng)?,
        DistArg::Nonstd => sample_nonstd(a.n, rng)?,
    };
    let text = sample.to_plain_text();
    match &a.out {
        Some(path) => {
            let mut manifest = RunManifest::new(pinned_argv(argv, seed, a.seed.is_some()), Some(seed));
            write_recorded(&mut manifest, path, text.as_bytes())?;
            fs::write(manifest_path(path), manifest.to_json())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn dist_spec(dist: DistArg, xi: Option<f64>, beta: f64) -> Result<DistSpec> {
    Ok(match dist {
        DistArg::Pareto => DistSpec::Pareto { xi: need_xi(xi, dist)? },
        DistArg::Gpd => DistSpec::Gpd { xi: need_xi(xi, dist)?, beta },
        DistArg::Stable => DistSpec::Stable { xi: need_xi(xi, dist)? },
        DistArg::Nonstd => DistSpec::Nonstd,
    })
}

fn coverage(a: CoverageArgs, argv: &[String], out: &mut (dyn Write + Send)) -> Result<()> {
    let seed = resolve_seed(a.seed)?;
    let dist = dist_spec(a.dist, a.xi, a.beta)?;
    let cfg = PlotConfig::new(a.k, a.eps, a.alpha)?;
    let plot = match a.plot {
        PlotArg::Qq => PlotChoice::Qq,
        PlotArg::Me => PlotChoice::Me,
    };
    let mc = McSettings { n_paths: a.paths, grid: a.grid };
    let report = coverage_experiment(&dist, a.n, &cfg, plot, a.replications, RngStream::new(seed, 0), mc)?;
    let json = to_json(&report);
    match &a.out {
        Some(path) => {
            let mut manifest = RunManifest::new(pinned_argv(argv, seed, a.seed.is_some()), Some(seed));
            write_recorded(&mut manifest, path, json.as_bytes())?;
            fs::write(manifest_path(path), manifest.to_json())?;
            writeln!(out, "coverage {} over {} replications", report.coverage, report.replications.len())?;
        }
        None => out.write_all(json.as_bytes())?,
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct QuantileReport {
    functional: &'static str,
    xi: f64,
    eps: f64,
    level: f64,
    estimate: QuantileEstimate,
    estimates: Vec<QuantileEstimate>,
    cache_hit: bool,
}

fn functional_name(f: FunctionalArg) -> &'static str {
    match f {
        FunctionalArg::QqSup => "qq-sup",
        FunctionalArg::MeC => "me-c",
        FunctionalArg::MeD => "me-d",
        FunctionalArg::Stilde => "stilde",
    }
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Cf => "cf",
        MethodArg::Mc => "mc",
        MethodArg::Both => "both",
    }
}

fn compute_quantiles(a: &QuantilesArgs, seed: u64) -> Result<Vec<QuantileEstimate>> {
    let rng = RngStream::new(seed, 0);
    Ok(match a.functional {
        FunctionalArg::QqSup => vec![qq_sup_quantile(a.level, a.eps)?],
        FunctionalArg::MeC => vec![me_c_quantile(a.xi, a.eps, a.level, a.paths, a.grid, rng)?],
        FunctionalArg::MeD => vec![me_band_quantiles(a.xi, a.eps, a.level, a.paths, a.grid, rng)?.1],
        FunctionalArg::Stilde => {
            let spec = StableSpec::limit(StableKind::LimitSTilde, a.xi)?;
            let methods: &[QuantileMethod] = match a.method {
                MethodArg::Cf => &[QuantileMethod::CfInversion],
                MethodArg::Mc => &[QuantileMethod::MonteCarlo],
                MethodArg::Both => &[QuantileMethod::CfInversion, QuantileMethod::MonteCarlo],
            };
            methods.iter().map(|&m| limit_quantile(&spec, a.level, m, rng)).collect::<Result<_>>()?
        }
    })
}

const CACHE_FILE: &str = "quantiles.csv";
const CACHE_HEADER: &str = "functional,xi,eps,level,paths,grid,seed,method,value,quantile_level,source,std_error,n_paths,grid_m";

fn cache_key(a: &QuantilesArgs, seed: u64) -> String {
    format!(
        "{},{:.4},{},{},{},{},{},{}",
        functional_name(a.functional),
        a.xi,
        a.eps,
        a.level,
        a.paths,
        a.grid,
        seed,
        method_name(a.method)
    )
}

fn source_name(s: QuantileSource) -> &'static str {
    match s {
        QuantileSource::Series => "series",
        QuantileSource::MonteCarlo => "monte-carlo",
        QuantileSource::CfInversion => "cf-inversion",
    }
}

fn parse_cached(fields: &[&str]) -> Option<QuantileEstimate> {
    let source = match fields[2] {
        "series" => QuantileSource::Series,
        "monte-carlo" => QuantileSource::MonteCarlo,
        "cf-inversion" => QuantileSource::CfInversion,
        _ => return None,
    };
    Some(QuantileEstimate {
        value: fields[0].parse().ok()?,
        level: fields[1].parse().ok()?,
        source,
        std_error: fields[3].parse().ok()?,
        n_paths: fields[4].parse().ok()?,
        grid_m: fields[5].parse().ok()?,
    })
}

fn cache_lookup(dir: &Path, key: &str) -> Option<Vec<QuantileEstimate>> {
    let text = fs::read_to_string(dir.join(CACHE_FILE)).ok()?;
    let prefix = format!("{key},");
    let hits: Vec<QuantileEstimate> = text
        .lines()
        .skip(1)
        .filter_map(|l| l.strip_prefix(&prefix))
        .filter_map(|rest| {
            let f: Vec<&str> = rest.split(',').collect();
            (f.len() == 6).then(|| parse_cached(&f)).flatten()
        })
        .collect();
    (!hits.is_empty()).then_some(hits)
}

fn cache_store(dir: &Path, key: &str, estimates: &[QuantileEstimate]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(CACHE_FILE);
    let mut text = fs::read_to_string(&path).unwrap_or_else(|_| format!("{CACHE_HEADER}\n"));
    for e in estimates {
        text.push_str(&format!(
            "{key},{},{},{},{},{},{}\n",
            e.value,
            e.level,
            source_name(e.source),
            e.std_error,
            e.n_paths,
            e.grid_m
        ));
    }
    fs::write(path, text)?;
    Ok(())
}

fn quantiles(a: QuantilesArgs, out: &mut (dyn Write + Send)) -> Result<()> {
    let seed = resolve_seed(a.seed)?;
    let key = cache_key(&a, seed);
    let cached = a.cache_dir.as_deref().and_then(|d| cache_lookup(d, &key));
    let cache_hit = cached.is_some();
    let estimates = match cached {
        Some(e) => e,
        None => {
            let e = compute_quantiles(&a, seed)?;
            if let Some(dir) = &a.cache_dir {
                cache_store(dir, &key, &e)?;
            }
            e
        }
    };
    let report = QuantileReport {
        functional: functional_name(a.functional),
        xi: a.xi,
        eps: a.eps,
        level: a.level,
        estimate: estimates[0],
        estimates,
        cache_hit,
    };
    out.write_all(to_json(&report).as_bytes())?;
    Ok(())
}

fn replay(path: &Path, out: &mut (dyn Write + Send)) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|_| Error::FileNotFound(path.to_path_buf()))?;
    let manifest = parse_manifest(&text)?;
    if manifest.argv.get(1).map(String::as_str) == Some("replay") {
        return Err(invalid("a manifest cannot replay a replay"));
    }
    let code = run_with(manifest.argv.iter().cloned(), out);
    if code != 0 {
        return Err(Error::Io(format!("replayed command exited with {code}")));
    }
    for (out, want) in &manifest.outputs {
        let got = crate::output::sha256_hex(&fs::read(out)?);
        if &got != want {
            return Err(Error::Io(format!("output {out} differs from the manifest")));
        }
    }
    writeln!(out, "replayed {} outputs, all hashes match", manifest.outputs.len())?;
    Ok(())
}
