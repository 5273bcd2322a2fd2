//! Command-line front end.
//!
//! Standard output carries JSON only; diagnostics go to standard error.
//! Exit codes: 0 success, 2 bad input or arguments, 3 no edges for emt
//! (or every method failed in `compare`).

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use thresh_core::io::{decode_image, round6, write_pgm, write_report, PgmEncoding, ReportEntry};
use thresh_core::{
    apply_threshold, compute_histogram, foreground_fraction, gray_level, pixel_disagreement,
    select_threshold_with_histogram, BinaryImage, Error, Execution, GrayImage, Histogram, Method,
    MethodSpec, DEFAULT_EDGE_PERCENTILE, DEFAULT_P,
};
use thresh_service::{ServiceConfig, DEFAULT_PORT};

pub const EXIT_OK: u8 = 0;
pub const EXIT_BAD_INPUT: u8 = 2;
pub const EXIT_NO_EDGES: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "thresh",
    version,
    about = "Global gray-level thresholding: mean, ptile, hdt, emt and manual",
    after_help = "Exit codes: 0 success, 2 bad input or arguments, 3 emt found no edges \
                  (compare: every method failed)."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Threshold one image and write the binary mask as PGM.
    Apply(ApplyArgs),
    /// Print the 256-bin gray-level histogram as JSON.
    Histogram(HistogramArgs),
    /// Run every method on each input and write masks plus a JSON report.
    Compare(CompareArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Mean,
    Ptile,
    Hdt,
    Emt,
    Manual,
}

#[derive(Debug, Clone, Args)]
pub struct MethodParamArgs {
    /// Object area fraction for ptile, in (0, 1).
    #[arg(long, default_value_t = DEFAULT_P)]
    pub p: f64,
    /// Edge magnitude percentile for emt, in (0, 1).
    #[arg(long = "edge-percentile", default_value_t = DEFAULT_EDGE_PERCENTILE)]
    pub edge_percentile: f64,
}

#[derive(Debug, Args)]
pub struct ApplyArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Threshold for the manual method.
    #[arg(long, required_if_eq("method", "manual"), allow_negative_numbers = true)]
    pub t: Option<i64>,
    #[command(flatten)]
    pub params: MethodParamArgs,
    /// Input PGM (P2/P5) or PNG.
    #[arg(short, long)]
    pub input: PathBuf,
    /// Output mask path (P5 PGM, 0/255).
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    #[arg(short, long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Input images; repeat for several.
    #[arg(short, long, required = true)]
    pub input: Vec<PathBuf>,
    /// Manual thresholds: one for all inputs, or one per input in order.
    #[arg(long, allow_negative_numbers = true)]
    pub t: Vec<i64>,
    #[command(flatten)]
    pub params: MethodParamArgs,
    /// Output directory for masks, report.json and disagreement.json.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = DEFAULT_PORT)]
    pub port: u16,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn bad_input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_BAD_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e == Error::NoEdges {
            EXIT_NO_EDGES
        } else {
            EXIT_BAD_INPUT
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

/// Run a parsed command, writing JSON to `out` and diagnostics to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = match cli.command {
        Command::Apply(a) => cmd_apply(&a, out),
        Command::Histogram(a) => cmd_histogram(&a, out),
        Command::Compare(a) => cmd_compare(&a, out, err),
        Command::Serve(a) => cmd_serve(&a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load(path: &Path) -> Result<GrayImage, Failure> {
    let bytes =
        fs::read(path).map_err(|e| Failure::bad_input(format!("{}: {e}", path.display())))?;
    decode_image(&bytes).map_err(|e| Failure::bad_input(format!("{}: {e}", path.display())))
}

fn image_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn write_file(path: &Path, bytes: &[u8]) -> CmdResult {
    fs::write(path, bytes).map_err(|e| Failure::bad_input(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, bytes: &[u8]) -> CmdResult {
    out.write_all(bytes)
        .and_then(|_| out.write_all(b"\n"))
        .map_err(|e| Failure::bad_input(format!("stdout: {e}")))
}

fn spec_for(method: Method, params: &MethodParamArgs, t: Option<i64>) -> MethodSpec {
    match method {
        Method::Mean => MethodSpec::Mean,
        Method::Ptile => MethodSpec::Ptile { p: params.p },
        Method::Hdt => MethodSpec::Hdt,
        Method::Emt => MethodSpec::Emt {
            edge_percentile: params.edge_percentile,
        },
        Method::Manual => MethodSpec::Manual { t: t.unwrap_or(-1) },
    }
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Mean => Method::Mean,
            MethodArg::Ptile => Method::Ptile,
            MethodArg::Hdt => Method::Hdt,
            MethodArg::Emt => Method::Emt,
            MethodArg::Manual => Method::Manual,
        }
    }
}

/// Select a threshold and binarize, timing both.
fn run_method(
    img: &GrayImage,
    hist: &Histogram,
    image_id: &str,
    spec: MethodSpec,
) -> (ReportEntry, Result<BinaryImage, Error>) {
    let start = Instant::now();
    let outcome = select_threshold_with_histogram(img, hist, spec)
        .map(|r| (r.clone(), apply_threshold(img, r.t)));
    let elapsed_micros = start.elapsed().as_micros() as u64;
    match outcome {
        Ok((r, mask)) => (
            ReportEntry {
                image_id: image_id.to_owned(),
                method: r.method,
                t: Some(r.t),
                criterion: r.criterion,
                foreground_fraction: Some(foreground_fraction(&mask)),
                elapsed_micros,
                error: None,
            },
            Ok(mask),
        ),
        Err(e) => (
            ReportEntry {
                image_id: image_id.to_owned(),
                method: spec.method(),
                t: None,
                criterion: None,
                foreground_fraction: None,
                elapsed_micros,
                error: Some(e.to_string()),
            },
            Err(e),
        ),
    }
}

fn check_ratio(name: &str, v: f64) -> CmdResult {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Failure::bad_input(format!("--{name} must lie in (0, 1), got {v}")))
    }
}

fn cmd_apply(args: &ApplyArgs, out: &mut dyn Write) -> CmdResult {
    let method = Method::from(args.method);
    if method == Method::Manual {
        let t = args.t.ok_or_else(|| Failure::bad_input("--t is required for manual"))?;
        gray_level(t).map_err(Failure::from)?;
    }
    let img = load(&args.input)?;
    let hist = compute_histogram(&img);
    let spec = spec_for(method, &args.params, args.t);
    let (entry, mask) = run_method(&img, &hist, &image_id(&args.input), spec);
    let mask = mask?;
    write_file(&args.output, &write_pgm(&mask, PgmEncoding::Binary))?;
    let line = serde_json::to_vec(&entry).expect("report entry serializes");
    emit(out, &line)
}

fn cmd_histogram(args: &HistogramArgs, out: &mut dyn Write) -> CmdResult {
    let img = load(&args.input)?;
    let json = serde_json::to_vec(&compute_histogram(&img)).expect("histogram serializes");
    emit(out, &json)
}

#[derive(Debug, Serialize)]
struct Disagreement {
    image_id: String,
    methods: Vec<Method>,
    matrix: Vec<Vec<f64>>,
}

struct ImageRun {
    entries: Vec<ReportEntry>,
    masks: Vec<(Method, BinaryImage)>,
}

fn compare_one(img: &GrayImage, id: &str, manual: Option<i64>, params: &MethodParamArgs) -> ImageRun {
    let hist = compute_histogram(img);
    let mut run = ImageRun {
        entries: Vec::new(),
        masks: Vec::new(),
    };
    for method in Method::ALL {
        if method == Method::Manual && manual.is_none() {
            continue;
        }
        let (entry, mask) = run_method(img, &hist, id, spec_for(method, params, manual));
        if let Ok(mask) = mask {
            run.masks.push((method, mask));
        }
        run.entries.push(entry);
    }
    run
}

fn cmd_compare(args: &CompareArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    check_ratio("p", args.params.p)?;
    check_ratio("edge-percentile", args.params.edge_percentile)?;
    let manual: Vec<Option<i64>> = match args.t.len() {
        0 => vec![None; args.input.len()],
        1 => vec![Some(args.t[0]); args.input.len()],
        n if n == args.input.len() => args.t.iter().copied().map(Some).collect(),
        n => {
            return Err(Failure::bad_input(format!(
                "got {n} --t values for {} inputs (give one, or one per input)",
                args.input.len()
            )))
        }
    };
    for t in manual.iter().flatten() {
        gray_level(*t).map_err(Failure::from)?;
    }
    let mut seen = HashSet::new();
    let mut jobs = Vec::new();
    for (path, t) in args.input.iter().zip(manual) {
        let id = image_id(path);
        if !seen.insert(id.clone()) {
            return Err(Failure::bad_input(format!("duplicate image stem `{id}`")));
        }
        jobs.push((id, load(path)?, t));
    }
    fs::create_dir_all(&args.output)
        .map_err(|e| Failure::bad_input(format!("{}: {e}", args.output.display())))?;

    let runs = thresh_core::exec::map_ordered(Execution::Parallel, &jobs, |(id, img, t)| {
        compare_one(img, id, *t, &args.params)
    });

    let mut entries = Vec::new();
    let mut disagreements = Vec::new();
    for ((id, _, _), run) in jobs.iter().zip(runs) {
        for (method, mask) in &run.masks {
            let path = args.output.join(format!("{id}.{method}.pgm"));
            write_file(&path, &write_pgm(mask, PgmEncoding::Binary))?;
        }
        for e in run.entries.iter().filter(|e| e.error.is_some()) {
            let _ = writeln!(
                err,
                "warning: {} on {}: {}",
                e.method,
                e.image_id,
                e.error.as_deref().unwrap_or_default()
            );
        }
        let matrix = run
            .masks
            .iter()
            .map(|(_, a)| {
                run.masks
                    .iter()
                    .map(|(_, b)| round6(pixel_disagreement(a, b).expect("masks share dimensions")))
                    .collect()
            })
            .collect();
        disagreements.push(Disagreement {
            image_id: id.clone(),
            methods: run.masks.iter().map(|(m, _)| *m).collect(),
            matrix,
        });
        entries.extend(run.entries);
    }

    let report = write_report(&entries);
    write_file(&args.output.join("report.json"), &report)?;
    let matrix = serde_json::to_vec(&disagreements).expect("disagreement serializes");
    write_file(&args.output.join("disagreement.json"), &matrix)?;
    emit(out, &report)?;

    if !entries.is_empty() && entries.iter().all(|e| e.error.is_some()) {
        return Err(Failure {
            code: EXIT_NO_EDGES,
            message: "every method failed".into(),
        });
    }
    Ok(())
}

fn cmd_serve(args: &ServeArgs) -> CmdResult {
    let _ = tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .try_init();
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::bad_input(format!("runtime: {e}")))?;
    let addr = SocketAddr::from(([0, 0, 0, 0], args.port));
    runtime
        .block_on(thresh_service::serve(addr, ServiceConfig::default()))
        .map_err(|e| Failure::bad_input(format!("serve on {addr}: {e}")))
}
