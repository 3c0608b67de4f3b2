//! `calibra` — batch front end for pointwise calibrations of minimal graphs.
//!
//! Exit codes: 0 success, 2 input or spec error, 3 domain or numerical
//! error, 4 internal failure (including a failing property suite).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use calibra::certify::{certify_grid, parse_grid, render_report, CertifyOptions, ReportFormat};
use calibra::comass::{comass_estimate, epsilon_star, DEFAULT_RESTARTS};
use calibra::exterior::Frame;
use calibra::frames::svd_frame;
use calibra::gallery;
use calibra::maps::{builtin_from_name, parse_map_spec, GraphMap, Jacobian};
use calibra::suite::{run_suite, DEFAULT_SEED};
use calibra::theta::{all_routes, theta_h, ThetaForm};
use calibra::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "calibra", version, about = "Pointwise calibrations of minimal graphs")]
struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true, env = "CALIBRA_THREADS", value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum CertifyFormat {
    Csv,
    Json,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "source")]
struct MapSource {
    /// JSON map spec file.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Builtin map by gallery name.
    #[arg(long)]
    builtin: Option<String>,
}

#[derive(Args)]
struct MapArgs {
    #[command(flatten)]
    source: MapSource,
    /// Builtin parameters (comma separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "builtin")]
    params: Vec<f64>,
    /// Domain dimension of a builtin with free shape.
    #[arg(long, requires = "builtin")]
    n: Option<usize>,
    /// Codomain dimension of a builtin with free shape.
    #[arg(long, requires = "builtin")]
    m: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the coefficients of Θ(F) at a point.
    Theta {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        point: Vec<f64>,
        /// Also evaluate every cross-check route and report their deviation.
        #[arg(long)]
        all_routes: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
    },
    /// Certify a grid of points and write a region report.
    Certify {
        #[command(flatten)]
        map: MapArgs,
        /// `x1=lo:hi:count,x2=...`
        #[arg(long)]
        grid: String,
        /// Report file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: CertifyFormat,
        /// Also compute optimized lower bounds for the comass.
        #[arg(long)]
        optimize: bool,
        #[arg(long, default_value_t = DEFAULT_RESTARTS as u32, value_parser = clap::value_parser!(u32).range(1..))]
        restarts: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        minimality_tol: f64,
        #[arg(long, default_value_t = 1e-10)]
        epsilon_tol: f64,
    },
    /// Bracket the comass of Θ for a diagonal differential.
    Comass {
        /// Singular values (comma separated).
        #[arg(long, value_delimiter = ',', required = true)]
        lambdas: Vec<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_RESTARTS as u32, value_parser = clap::value_parser!(u32).range(1..))]
        restarts: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
    },
    /// Compute the refined dilation constant for a rank.
    Epsilon {
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 1e-10, allow_hyphen_values = true)]
        tol: f64,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
    },
    /// Browse the curated example maps.
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
        #[arg(long, value_enum, default_value = "text", global = true)]
        format: OutFormat,
    },
    /// Run a seeded property suite.
    Suite {
        /// One of algebra, frames, theta, minimality, comass, certify.
        tag: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Also write a JUnit XML report.
        #[arg(long)]
        junit: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
    },
}

#[derive(Subcommand)]
enum GalleryAction {
    List,
    Show { name: String },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_input_error() || matches!(e, Error::Io(_)) { 2 } else { 3 };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

type Outcome = Result<String, Failure>;

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn load_map(args: &MapArgs) -> Result<GraphMap, Failure> {
    if let Some(path) = &args.source.map {
        return Ok(parse_map_spec(&read_file(path)?)?);
    }
    let name = args.source.builtin.as_deref().expect("clap enforces a map source");
    let b = builtin_from_name(name, &args.params)?;
    let (n, m) = match b.shape() {
        Some(shape) => (args.n.unwrap_or(shape.0), args.m.unwrap_or(shape.1)),
        None => (args.n.unwrap_or(2), args.m.unwrap_or(2)),
    };
    let domain = gallery::entry(name)
        .ok()
        .filter(|e| (e.map.n(), e.map.m()) == (n, m))
        .map(|e| e.map.domain().to_vec());
    Ok(GraphMap::builtin(b, n, m, domain)?)
}

fn ensure_finite(name: &str, values: &[f64]) -> Result<(), Failure> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be finite")))
    }
}

fn ensure_positive(name: &str, v: f64) -> Result<(), Failure> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be positive, got {v}")))
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// `dx1^dy2`-style label for a 0-based multi-index over `R^{n+m}`.
fn label(idx: &[usize], n: usize) -> String {
    idx.iter()
        .map(|&i| if i < n { format!("dx{}", i + 1) } else { format!("dy{}", i - n + 1) })
        .collect::<Vec<_>>()
        .join("^")
}

fn nonzero_terms(t: &ThetaForm, n: usize) -> Vec<(Vec<usize>, String, f64)> {
    t.form
        .terms()
        .filter(|(_, c)| *c != 0.0)
        .map(|(idx, c)| {
            let l = label(&idx, n);
            (idx, l, c)
        })
        .collect()
}

fn cmd_theta(map: &MapArgs, point: &[f64], all: bool, format: OutFormat) -> Outcome {
    ensure_finite("point", point)?;
    let f = load_map(map)?;
    if point.len() != f.n() {
        return Err(usage(format!("--point needs {} coordinates, got {}", f.n(), point.len())));
    }
    let df = f.jacobian(point)?;
    let (forms, deviation) = if all { all_routes(&df) } else { (vec![theta_h(&df)], 0.0) };
    let (n, m) = (f.n(), f.m());
    Ok(match format {
        OutFormat::Json => {
            let routes: Vec<Value> = forms
                .iter()
                .map(|t| {
                    let terms: Vec<Value> = nonzero_terms(t, n)
                        .into_iter()
                        .map(|(idx, l, c)| json!({"index": idx.iter().map(|i| i + 1).collect::<Vec<_>>(), "label": l, "coeff": c}))
                        .collect();
                    json!({"route": t.route.as_str(), "terms": terms})
                })
                .collect();
            let mut doc = json!({"n": n, "m": m, "point": point, "routes": routes});
            if all {
                doc["max_deviation"] = json!(deviation);
            }
            pretty(&doc)
        }
        OutFormat::Text => {
            let mut out = format!("Θ(F) at {point:?} (n = {n}, m = {m})\n");
            for t in &forms {
                out.push_str(&format!("route {}\n", t.route.as_str()));
                for (_, l, c) in nonzero_terms(t, n) {
                    out.push_str(&format!("  {l:<32} {c:.16e}\n"));
                }
            }
            if all {
                out.push_str(&format!("max pairwise deviation {deviation:.3e}\n"));
            }
            out
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_certify(
    map: &MapArgs,
    grid: &str,
    output: Option<&Path>,
    format: CertifyFormat,
    optimize: bool,
    restarts: u32,
    seed: u64,
    minimality_tol: f64,
    epsilon_tol: f64,
    threads: Option<u32>,
) -> Outcome {
    ensure_positive("minimality-tol", minimality_tol)?;
    ensure_positive("epsilon-tol", epsilon_tol)?;
    let f = load_map(map)?;
    let grid = parse_grid(grid, f.n())?;
    let opts = CertifyOptions {
        minimality_tol,
        epsilon_tol,
        optimize,
        restarts: restarts as usize,
        seed,
        threads: threads.map(|t| t as usize),
        ..CertifyOptions::default()
    };
    let rep = certify_grid(&f, &grid, &opts)?;
    let fmt = match format {
        CertifyFormat::Csv => ReportFormat::Csv,
        CertifyFormat::Json => ReportFormat::Json,
    };
    let text = render_report(&rep, fmt);
    match output {
        Some(path) => {
            write_file(path, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn cmd_comass(lambdas: &[f64], n: Option<usize>, m: Option<usize>, restarts: u32, seed: u64, format: OutFormat) -> Outcome {
    if lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(usage("--lambdas must be finite and nonnegative"));
    }
    let k = lambdas.len();
    let (n, m) = (n.unwrap_or(k), m.unwrap_or(k));
    if n == 0 || m == 0 || k > n.min(m) {
        return Err(usage(format!("{k} singular values do not fit n = {n}, m = {m}")));
    }
    let df = Jacobian::diagonal(m, n, lambdas);
    let fr = svd_frame(&df);
    let theta = theta_h(&df);
    let est = comass_estimate(&theta, &fr.lambdas, fr.rank_r, restarts as usize, seed);
    Ok(match format {
        OutFormat::Json => pretty(&json!({
            "n": n,
            "m": m,
            "lambdas": fr.lambdas,
            "rank": fr.rank_r,
            "estimate": est,
        })),
        OutFormat::Text => format!(
            "lambdas {:?} (n = {n}, m = {m}, rank {})\nlower {:.16e}\nupper {:.16e}\ntheta* {:.16e}\nrestarts {} (seed {})\nwitness {}\n",
            fr.lambdas,
            fr.rank_r,
            est.lower,
            est.upper,
            est.theta_star,
            est.restarts_used,
            est.seed,
            witness_text(&est.witness),
        ),
    })
}

fn witness_text(w: &Frame) -> String {
    w.columns()
        .column_iter()
        .map(|c| format!("[{}]", c.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(", ")))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_epsilon(rank: usize, tol: f64, format: OutFormat) -> Outcome {
    if rank < 2 {
        return Err(usage(format!("--rank must be at least 2, got {rank}")));
    }
    ensure_positive("tol", tol)?;
    let (eps, theta) = epsilon_star(rank, tol)?;
    Ok(match format {
        OutFormat::Json => pretty(&json!({"rank": rank, "tol": tol, "epsilon": eps, "theta": theta})),
        OutFormat::Text => format!("epsilon*({rank}) = {eps:.16e}\ntheta = {theta:.16e}\n"),
    })
}

fn cmd_gallery(action: &GalleryAction, format: OutFormat) -> Outcome {
    match action {
        GalleryAction::List => {
            let infos: Vec<_> = gallery::entries().iter().map(|e| e.info()).collect();
            Ok(match format {
                OutFormat::Json => pretty(&serde_json::to_value(&infos).expect("serializable")),
                OutFormat::Text => {
                    let mut out = format!("{:<20} {:>2} {:>2} {:<8} {}\n", "name", "n", "m", "minimal", "domain");
                    for i in infos {
                        out.push_str(&format!("{:<20} {:>2} {:>2} {:<8} {}\n", i.name, i.n, i.m, i.is_minimal, i.natural_domain));
                    }
                    out
                }
            })
        }
        GalleryAction::Show { name } => {
            let info = gallery::entry(name)?.info();
            Ok(match format {
                OutFormat::Json => pretty(&serde_json::to_value(&info).expect("serializable")),
                OutFormat::Text => format!(
                    "name     {}\nshape    n = {}, m = {}\nminimal  {}\ndomain   {}\nbox      {:?}\nverdict  {}\nnotes    {}\nspec     {}\n",
                    info.name,
                    info.n,
                    info.m,
                    info.is_minimal,
                    info.natural_domain,
                    info.default_domain,
                    info.expected_verdict.map(|v| v.as_str()).unwrap_or("mixed"),
                    info.notes,
                    info.spec,
                ),
            })
        }
    }
}

fn cmd_suite(tag: &str, seed: u64, junit: Option<&Path>, format: OutFormat) -> Outcome {
    let rep = run_suite(tag, seed)?;
    if let Some(path) = junit {
        write_file(path, &rep.render_junit())?;
    }
    let text = match format {
        OutFormat::Json => pretty(&json!({
            "tag": rep.tag,
            "seed": rep.seed,
            "passed": rep.passed(),
            "cases": rep.cases.iter().map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail})).collect::<Vec<_>>(),
        })),
        OutFormat::Text => rep.render_text(),
    };
    if rep.passed() {
        Ok(text)
    } else {
        print!("{text}");
        Err(Failure { code: 4, message: format!("suite `{tag}` failed (seed {seed})") })
    }
}

fn run(cli: Cli) -> Outcome {
    if let Some(t) = cli.threads {
        // ignore "already initialised": only one pool per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t as usize).build_global();
    }
    match &cli.command {
        Command::Theta { map, point, all_routes, format } => cmd_theta(map, point, *all_routes, *format),
        Command::Certify { map, grid, output, format, optimize, restarts, seed, minimality_tol, epsilon_tol } => cmd_certify(
            map,
            grid,
            output.as_deref(),
            *format,
            *optimize,
            *restarts,
            *seed,
            *minimality_tol,
            *epsilon_tol,
            cli.threads,
        ),
        Command::Comass { lambdas, n, m, restarts, seed, format } => cmd_comass(lambdas, *n, *m, *restarts, *seed, *format),
        Command::Epsilon { rank, tol, format } => cmd_epsilon(*rank, *tol, *format),
        Command::Gallery { action, format } => cmd_gallery(action, *format),
        Command::Suite { tag, seed, junit, format } => cmd_suite(tag, *seed, junit.as_deref(), *format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(out)) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Ok(Err(f)) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
        Err(_) => ExitCode::from(4),
    }
}
