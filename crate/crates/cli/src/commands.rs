//! Command-line definitions and the subcommand drivers.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rhull::density::Gaussian;
use rhull::sim::{
    consistency_study, level_power_study, rate_study, ConsistencyConfig, ExperimentReport, LevelPowerConfig,
    RateConfig,
};
use rhull::spacing::CandidateSet;
use rhull::{
    build_index, estimate_support, r_convex_hull, BandwidthRule, DensityField, Fallback, HullRegion,
};
use serde::de::DeserializeOwned;
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};
use crate::export;
use crate::ingest::{ingest, Filters, Format, OccurrenceTable};
use crate::manifest::{file_sha256, sha256_hex, InputRecord, OutputRecord, ResultSummary, RunManifest, WallClock};

#[derive(Debug, Parser)]
#[command(name = "rhull", version, about = "Support estimation with data-driven r-convex hulls")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select r by testing r-convexity and write the fitted support.
    Estimate(EstimateArgs),
    /// Test r-convexity of the sample's support at a fixed r.
    Test(TestArgs),
    /// Build and export the r-convex hull at a fixed r.
    Hull(HullArgs),
    /// Run a simulation study from a JSON config.
    #[command(subcommand)]
    Simulate(SimulateCommand),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// CSV (x,y or GBIF columns) or GeoJSON points.
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Keep rows dated on or after this day (YYYY-MM-DD).
    #[arg(long)]
    pub date_from: Option<chrono::NaiveDate>,
    /// Keep rows dated on or before this day (YYYY-MM-DD).
    #[arg(long)]
    pub date_to: Option<chrono::NaiveDate>,
    #[arg(long)]
    pub species: Option<String>,
    /// Scale longitudes by the cosine of the mean latitude before fitting.
    #[arg(long)]
    pub equirect: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long)]
    pub out_geojson: Option<PathBuf>,
    #[arg(long)]
    pub out_svg: Option<PathBuf>,
    #[arg(long)]
    pub out_manifest: Option<PathBuf>,
    /// Chord tolerance for flattening arcs (default r/256).
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Repeat the run described by a manifest; flags given here override it.
    #[arg(long)]
    pub manifest_in: Option<PathBuf>,
    /// Add a timestamp and elapsed time to the manifest.
    #[arg(long)]
    pub record_time: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Largest number of connected components allowed (C).
    #[arg(long)]
    pub max_components: Option<usize>,
    /// Bisection steps (I).
    #[arg(long)]
    pub iterations: Option<u32>,
    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    /// The fitted hull uses nu * r_hat.
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub bandwidth_h0: Option<f64>,
    /// Fixed kernel bandwidth, overriding the rule of thumb.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    #[arg(long)]
    pub angular_samples: Option<usize>,
    #[arg(long)]
    pub max_expansions: Option<u32>,
    /// Recorded in the manifest. The estimate itself involves no randomness.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Print the full selection result as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub r: f64,
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub bandwidth_h0: f64,
    #[arg(long)]
    pub bandwidth: Option<f64>,
    #[arg(long, default_value_t = 128)]
    pub angular_samples: usize,
    /// Print the test result as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct HullArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub r: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// JSON study configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report path; the report goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-replicate rows as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    LevelPower(SimulateArgs),
    Rate(SimulateArgs),
    Consistency(SimulateArgs),
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Test(a) => cmd_test(a),
        Command::Hull(a) => cmd_hull(a),
        Command::Simulate(s) => cmd_simulate(s),
    }
}

fn usage(e: rhull::Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// JSON number, or a string for non-finite values.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("nan")
    }
}

fn fallback_name(f: Fallback) -> String {
    serde_json::to_value(f)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

struct Loaded {
    table: OccurrenceTable,
    record: InputRecord,
    index: std::sync::Arc<rhull::geom::TriangulationIndex>,
}

fn load_input(args: &InputArgs, base: Option<&InputRecord>) -> CliResult<Loaded> {
    let path = match (&args.input, base) {
        (Some(p), _) => p.clone(),
        (None, Some(b)) => PathBuf::from(&b.path),
        (None, None) => return Err(CliError::Usage("an input file is required".into())),
    };
    let format = args
        .format
        .or(base.map(|b| b.format))
        .unwrap_or_else(|| Format::from_path(&path));
    let base_filters = base.map(|b| b.filters.clone()).unwrap_or_default();
    let filters = Filters {
        date_from: args.date_from.or(base_filters.date_from),
        date_to: args.date_to.or(base_filters.date_to),
        species: args.species.clone().or(base_filters.species),
    };
    let equirect = args.equirect || base.is_some_and(|b| b.equirect);
    let sha256 = file_sha256(&path)?;
    if let Some(b) = base {
        if args.input.is_none() && b.sha256 != sha256 {
            return Err(CliError::Usage(format!(
                "{} has changed since the manifest was written",
                path.display()
            )));
        }
    }
    let table = ingest(&path, Some(format), &filters)?;
    for d in &table.diagnostics {
        eprintln!("warning: line {}: {}", d.line, d.message);
    }
    let (points, x_scale) = table.point_set(equirect)?;
    let index = build_index(points)?;
    let record = InputRecord {
        path: path.display().to_string(),
        format,
        sha256,
        rows: table.rows.len(),
        diagnostics: table.diagnostics.len(),
        duplicates_removed: table.duplicates_removed,
        filters,
        equirect,
        x_scale,
    };
    Ok(Loaded { table, record, index })
}

fn load_manifest(path: &Option<PathBuf>, command: &str) -> CliResult<Option<RunManifest>> {
    let Some(p) = path else { return Ok(None) };
    let m = RunManifest::load(p)?;
    if m.command != command {
        return Err(CliError::Usage(format!(
            "manifest was written by `{}`, not `{command}`",
            m.command
        )));
    }
    Ok(Some(m))
}

struct Outputs {
    geojson: Option<PathBuf>,
    svg: Option<PathBuf>,
    manifest: Option<PathBuf>,
}

fn resolve_outputs(args: &OutputArgs, base: Option<&RunManifest>) -> Outputs {
    let pick = |given: &Option<PathBuf>, role: &str| {
        given
            .clone()
            .or_else(|| base.and_then(|m| m.output(role)).map(PathBuf::from))
    };
    Outputs {
        geojson: pick(&args.out_geojson, "geojson"),
        svg: pick(&args.out_svg, "svg"),
        manifest: args.out_manifest.clone(),
    }
}

#[allow(clippy::too_many_arguments)]
fn write_outputs(
    region: &HullRegion,
    properties: &Map<String, Value>,
    tol: f64,
    x_scale: f64,
    outputs: &Outputs,
) -> CliResult<Vec<OutputRecord>> {
    let mut records = Vec::new();
    if let Some(p) = &outputs.geojson {
        let text = export::geojson(region, properties, tol, x_scale);
        write(p, &text)?;
        records.push(OutputRecord {
            role: "geojson".into(),
            path: p.display().to_string(),
            sha256: sha256_hex(text.as_bytes()),
        });
    }
    if let Some(p) = &outputs.svg {
        let text = export::svg(region, tol, x_scale);
        write(p, &text)?;
        records.push(OutputRecord {
            role: "svg".into(),
            path: p.display().to_string(),
            sha256: sha256_hex(text.as_bytes()),
        });
    }
    Ok(records)
}

fn chord_tolerance(given: Option<f64>, r: f64, region: &HullRegion) -> CliResult<f64> {
    let tol = match given {
        Some(t) => t,
        None if r.is_finite() => r / 256.0,
        None => region.bbox().diagonal().max(f64::MIN_POSITIVE) / 256.0,
    };
    if tol > 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(CliError::Usage(format!("tolerance must be positive, got {tol}")))
    }
}

fn wall_clock(record: bool, started: chrono::DateTime<chrono::Utc>, t0: Instant) -> Option<WallClock> {
    record.then(|| WallClock {
        started: started.to_rfc3339(),
        elapsed_seconds: t0.elapsed().as_secs_f64(),
    })
}

pub fn cmd_estimate(args: EstimateArgs) -> CliResult<()> {
    let t0 = Instant::now();
    let started = chrono::Utc::now();
    let base = load_manifest(&args.output.manifest_in, "estimate")?;
    let mut config = base
        .as_ref()
        .and_then(|m| m.selection.clone())
        .unwrap_or_default();
    if let Some(v) = args.alpha {
        config.alpha = v;
    }
    if let Some(v) = args.max_components {
        config.max_components = v;
    }
    if let Some(v) = args.iterations {
        config.max_iterations = v;
    }
    if args.r_min.is_some() {
        config.r_min = args.r_min;
    }
    if args.r_max.is_some() {
        config.r_max = args.r_max;
    }
    if let Some(v) = args.nu {
        config.nu = v;
    }
    if let Some(v) = args.bandwidth_h0 {
        config.bandwidth.h0 = v;
    }
    if args.bandwidth.is_some() {
        config.bandwidth.explicit = args.bandwidth;
    }
    if let Some(v) = args.angular_samples {
        config.angular_samples = v;
    }
    if let Some(v) = args.max_expansions {
        config.max_expansions = v;
    }
    config.validate().map_err(usage)?;
    let seed = args.seed.or(base.as_ref().map(|m| m.seed)).unwrap_or(0);
    let tolerance = args.output.tolerance.or(base.as_ref().and_then(|m| m.tolerance));
    let outputs = resolve_outputs(&args.output, base.as_ref());

    let input = load_input(&args.input, base.as_ref().map(|m| &m.input))?;
    let res = estimate_support(&input.index, &config)?;
    let region = &res.support.region;
    let tol = chord_tolerance(tolerance, res.r_used, region)?;

    let mut props = Map::new();
    props.insert("r_hat".into(), num(res.r_hat));
    props.insert("r_used".into(), num(res.r_used));
    props.insert("alpha".into(), json!(config.alpha));
    props.insert("max_components".into(), json!(config.max_components));
    props.insert("fallback".into(), json!(fallback_name(res.fallback)));
    props.insert("n".into(), json!(input.table.rows.len()));
    let written = write_outputs(region, &props, tol, input.record.x_scale, &outputs)?;

    let manifest = RunManifest {
        tool: "rhull".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: "estimate".into(),
        input: input.record,
        selection: Some(config),
        r: None,
        seed,
        tolerance,
        result: ResultSummary {
            r_hat: Some(res.r_hat),
            r_used: Some(res.r_used),
            fallback: Some(res.fallback),
            components: res.components,
            area: res.area,
        },
        outputs: written,
        wall_clock: wall_clock(args.output.record_time, started, t0),
    };
    if let Some(p) = &outputs.manifest {
        write(p, &manifest.to_json())?;
    }

    if args.json {
        println!("{}", res.to_json());
    } else {
        println!("r_hat = {}", res.r_hat);
        println!("r_used = {}", res.r_used);
        println!("fallback = {}", fallback_name(res.fallback));
        println!("components = {}", res.components);
        println!("area = {}", res.area);
    }
    Ok(())
}

pub fn cmd_test(args: TestArgs) -> CliResult<()> {
    if !(args.r > 0.0) {
        return Err(usage(rhull::Error::InvalidRadius(args.r)));
    }
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(usage(rhull::Error::AlphaOutOfRange(args.alpha)));
    }
    let rule = BandwidthRule {
        h0: args.bandwidth_h0,
        explicit: args.bandwidth,
    };
    let input = load_input(&args.input, None)?;
    let field = DensityField::estimate(&input.index, &rule, &Gaussian)?;
    let candidates = CandidateSet::build(&field, args.alpha, args.angular_samples)?;
    let region = if args.r.is_finite() {
        r_convex_hull(&input.index, args.r)?
    } else {
        rhull::convex_hull(&input.index)
    };
    let t = candidates.evaluate(&region);
    if args.json {
        println!("{}", serde_json::to_string_pretty(&t).expect("test result serializes"));
        return Ok(());
    }
    let s = &t.statistic;
    println!("r = {}", t.r);
    println!("n = {}", t.n);
    println!("alpha = {}", t.alpha);
    println!("critical value = {}", t.c_crit);
    println!("v_hat = {}", s.v_hat);
    println!("delta_hat = {}", s.delta_hat);
    println!("max boundary distance = {}", s.m_r);
    println!("candidates = {} on {} extreme points", s.candidates, s.extremes);
    println!("components at r = {}", t.components_at_r);
    println!("decision = {}", if t.reject { "REJECT" } else { "FAIL TO REJECT" });
    if let (true, Some(w)) = (t.reject, &s.witness) {
        let x = w.center.x / input.record.x_scale;
        println!(
            "witness = ball at ({}, {}) of radius {} with depth {}",
            x, w.center.y, w.radius, w.depth
        );
    }
    Ok(())
}

pub fn cmd_hull(args: HullArgs) -> CliResult<()> {
    let t0 = Instant::now();
    let started = chrono::Utc::now();
    let base = load_manifest(&args.output.manifest_in, "hull")?;
    let r = args
        .r
        .or(base.as_ref().and_then(|m| m.r))
        .ok_or_else(|| CliError::Usage("--r is required".into()))?;
    if !(r > 0.0) || r.is_nan() {
        return Err(usage(rhull::Error::InvalidRadius(r)));
    }
    let tolerance = args.output.tolerance.or(base.as_ref().and_then(|m| m.tolerance));
    let outputs = resolve_outputs(&args.output, base.as_ref());
    let input = load_input(&args.input, base.as_ref().map(|m| &m.input))?;
    let region = if r.is_finite() {
        r_convex_hull(&input.index, r)?
    } else {
        rhull::convex_hull(&input.index)
    };
    let tol = chord_tolerance(tolerance, r, &region)?;
    let mut props = Map::new();
    props.insert("r".into(), num(r));
    props.insert("n".into(), json!(input.table.rows.len()));
    let written = write_outputs(&region, &props, tol, input.record.x_scale, &outputs)?;
    let manifest = RunManifest {
        tool: "rhull".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: "hull".into(),
        input: input.record,
        selection: None,
        r: Some(r),
        seed: base.as_ref().map_or(0, |m| m.seed),
        tolerance,
        result: ResultSummary {
            r_hat: None,
            r_used: Some(r),
            fallback: None,
            components: region.component_count(),
            area: region.area(),
        },
        outputs: written,
        wall_clock: wall_clock(args.output.record_time, started, t0),
    };
    if let Some(p) = &outputs.manifest {
        write(p, &manifest.to_json())?;
    }
    println!("r = {r}");
    println!("components = {}", region.component_count());
    println!("isolated points = {}", region.isolated_points().len());
    println!("area = {}", region.area());
    Ok(())
}

fn read_config<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        line: e.line(),
        message: format!("{}: {e}", path.display()),
    })
}

pub fn cmd_simulate(cmd: SimulateCommand) -> CliResult<()> {
    let (report, args): (ExperimentReport, SimulateArgs) = match cmd {
        SimulateCommand::LevelPower(a) => {
            let mut c: LevelPowerConfig = read_config(&a.config)?;
            c.seed = a.seed.unwrap_or(c.seed);
            (level_power_study(&c).map_err(study_error)?, a)
        }
        SimulateCommand::Rate(a) => {
            let mut c: RateConfig = read_config(&a.config)?;
            c.seed = a.seed.unwrap_or(c.seed);
            (rate_study(&c).map_err(study_error)?, a)
        }
        SimulateCommand::Consistency(a) => {
            let mut c: ConsistencyConfig = read_config(&a.config)?;
            c.seed = a.seed.unwrap_or(c.seed);
            (consistency_study(&c).map_err(study_error)?, a)
        }
    };
    if let Some(p) = &args.csv {
        write(p, &report.rows_csv())?;
    }
    match &args.out {
        Some(p) => {
            write(p, &report.to_json())?;
            print_summary(&report);
        }
        None => println!("{}", report.to_json()),
    }
    Ok(())
}

fn study_error(e: rhull::Error) -> CliError {
    match e {
        rhull::Error::InvalidConfig(_) | rhull::Error::AlphaOutOfRange(_) | rhull::Error::InvalidEndpoints { .. } => {
            usage(e)
        }
        e => CliError::Core(e),
    }
}

fn print_summary(report: &ExperimentReport) {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
    for s in &report.summary {
        match report.kind.as_str() {
            "level-power" => println!(
                "n = {}  r = {}  rejection rate = {} (se {})",
                s.n,
                opt(s.r),
                opt(s.rejection_rate),
                opt(s.rejection_se)
            ),
            "consistency" => println!(
                "n = {}  median r_hat = {}  IQR = {}",
                s.n,
                opt(s.r_hat_median),
                opt(s.r_hat_iqr)
            ),
            _ => println!(
                "n = {}  median d_H = {}  boundary = {}  d_mu = {}",
                s.n,
                opt(s.d_h_median),
                opt(s.d_h_boundary_median),
                opt(s.d_mu_median)
            ),
        }
    }
    for f in &report.fits {
        println!("slope[{}] = {:.4} (se {:.4})", f.metric, f.slope, f.std_error);
    }
}
