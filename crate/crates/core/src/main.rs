use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use num_complex::Complex64;
use serde::Serialize;

use cauchyquad::aaa::AaaOptions;
use cauchyquad::cauchy::Phase;
use cauchyquad::io::{self, TOOL_NAME, TOOL_VERSION};
use cauchyquad::portrait::{self, Image};
use cauchyquad::recipes::{run_recipe, GeometryFile, Integrand, RecipeConfig, RecipeName, RecipeRun, RunMetrics, SweepRange};

const EXIT_APPROXIMATION: u8 = 2;
const EXIT_IO: u8 = 3;

/// Quadrature rules from rational approximation of Cauchy transforms.
#[derive(Parser, Debug)]
#[command(name = "cauchyquad", version, about)]
struct Cli {
    /// Recipe to run.
    recipe: RecipeName,
    /// Fixed rational degree (number of nodes).
    #[arg(long, conflicts_with = "tol")]
    degree: Option<usize>,
    /// Relative approximation tolerance; the degree is chosen adaptively.
    #[arg(long)]
    tol: Option<f64>,
    /// Number of Lawson steps after the greedy fit.
    #[arg(long, value_name = "K")]
    lawson: Option<usize>,
    /// Lawson damping exponent in (0, 1].
    #[arg(long, value_name = "D")]
    damping: Option<f64>,
    /// Blend near-null singular vectors when choosing barycentric weights.
    #[arg(long, overrides_with = "no_sign")]
    sign: bool,
    /// Use the smallest singular vector only.
    #[arg(long, overrides_with = "sign")]
    no_sign: bool,
    /// Fit conjugate-symmetric data and pair poles into conjugates.
    #[arg(long, overrides_with = "no_real_symmetry")]
    real_symmetry: bool,
    /// Fit the samples as given.
    #[arg(long, overrides_with = "real_symmetry")]
    no_real_symmetry: bool,
    /// Degree sweep; without a value, the recipe's default range.
    #[arg(long, value_name = "N1:STEP:N2", num_args = 0..=1, default_missing_value = "default")]
    sweep: Option<String>,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Write a phase portrait of the rational approximation.
    #[arg(long, value_name = "WxH")]
    portrait: Option<String>,
    /// Contour (and, for `custom`, weight) description in JSON.
    #[arg(long, value_name = "FILE.json")]
    seed_geometry: Option<PathBuf>,
    /// Test integrand replacing the recipe default.
    #[arg(long, value_name = "NAME")]
    integrand: Option<Integrand>,
    /// Phase function for the oscillatory recipe.
    #[arg(long)]
    phase: Option<Phase>,
}

enum Failure {
    Approximation(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Approximation(_) => EXIT_APPROXIMATION,
            Failure::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Approximation(m) | Failure::Io(m) => m,
        }
    }
}

fn config_from(cli: &Cli) -> Result<RecipeConfig, Failure> {
    let mut cfg = RecipeConfig::new(cli.recipe);
    cfg.degree = cli.degree;
    cfg.tol = cli.tol;
    cfg.lawson_steps = cli.lawson;
    cfg.damping = cli.damping;
    cfg.sign_blend = match (cli.sign, cli.no_sign) {
        (true, _) => Some(true),
        (_, true) => Some(false),
        _ => None,
    };
    cfg.real_symmetry = match (cli.real_symmetry, cli.no_real_symmetry) {
        (true, _) => Some(true),
        (_, true) => Some(false),
        _ => None,
    };
    cfg.integrand = cli.integrand;
    cfg.phase = cli.phase;
    cfg.sweep = match cli.sweep.as_deref() {
        None => None,
        Some("default") => Some(cfg.default_sweep()),
        Some(s) => Some(s.parse::<SweepRange>().map_err(|e| Failure::Approximation(format!("{}: {e}", cli.recipe)))?),
    };
    if let Some(path) = &cli.seed_geometry {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        let file: GeometryFile =
            serde_json::from_str(&text).map_err(|e| Failure::Io(format!("{}:{}: {e}", path.display(), e.line())))?;
        cfg.geometry = Some(file);
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct SweepSummary {
    fitted_rate: Option<f64>,
    failures: Vec<(usize, String)>,
}

#[derive(Serialize)]
struct RunRecord<'a> {
    tool: &'a str,
    version: &'a str,
    config: &'a RecipeConfig,
    options: &'a AaaOptions,
    options_hash: String,
    metrics: RunMetrics,
    filtered_nodes: Vec<Complex64>,
    sweep: Option<SweepSummary>,
    artifacts: Vec<String>,
}

fn sweep_csv(run: &RecipeRun) -> Result<Option<String>, Failure> {
    let Some(s) = &run.sweep else { return Ok(None) };
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Failure::Io(e.to_string());
    w.write_record(["degree", "error", "baseline_error"]).map_err(err)?;
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for (i, n) in s.degrees.iter().enumerate() {
        let base = s.baseline.as_ref().and_then(|b| b[i]);
        w.write_record([n.to_string(), fmt(s.errors[i]), fmt(base)]).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    Ok(Some(String::from_utf8(bytes).expect("csv output is ASCII")))
}

/// Collects every artifact in memory, then writes them; on a write failure
/// the files already written are removed.
fn write_artifacts(out: &Path, run: &RecipeRun, image: Option<&Image>) -> Result<Vec<PathBuf>, Failure> {
    let ioerr = |e: io::IoError| Failure::Io(e.to_string());
    let mut files: Vec<(&str, Vec<u8>)> = vec![
        ("rule.csv", io::rule_to_csv(&run.rule).map_err(ioerr)?.into_bytes()),
        ("rule.json", io::rule_to_json(&run.rule).map_err(ioerr)?.into_bytes()),
    ];
    if let Some(s) = sweep_csv(run)? {
        files.push(("sweep.csv", s.into_bytes()));
    }
    if let Some(img) = image {
        files.push(("portrait.ppm", img.to_ppm()));
    }
    let mut names: Vec<String> = files.iter().map(|f| f.0.to_string()).collect();
    names.push("run.json".into());
    let record = RunRecord {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        config: &run.config,
        options: &run.options,
        options_hash: run.config.options_hash(),
        metrics: run.metrics(),
        filtered_nodes: run.filter.as_ref().map(|f| f.removed_nodes.clone()).unwrap_or_default(),
        sweep: run.sweep.as_ref().map(|s| SweepSummary { fitted_rate: s.fitted_rate(), failures: s.failures.clone() }),
        artifacts: names,
    };
    let mut json = serde_json::to_string_pretty(&record).map_err(|e| Failure::Io(e.to_string()))?;
    json.push('\n');
    files.push(("run.json", json.into_bytes()));

    std::fs::create_dir_all(out).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = out.join(name);
        if let Err(e) = std::fs::write(&path, bytes) {
            for p in &written {
                let _ = std::fs::remove_file(p);
            }
            return Err(Failure::Io(format!("{}: {e}", path.display())));
        }
        written.push(path);
    }
    Ok(written)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = config_from(cli)?;
    let result = run_recipe(&cfg).map_err(|e| Failure::Approximation(e.to_string()))?;
    let image = match &cli.portrait {
        Some(res) => {
            let (w, h) = portrait::parse_resolution(res).map_err(|e| Failure::Approximation(e.to_string()))?;
            let r = &result.fit.rational;
            let p = &result.problem;
            Some(portrait::render(|z| r.evaluate(z), &p.window, w, h, p.portrait_shift).map_err(|e| Failure::Approximation(e.to_string()))?)
        }
        None => None,
    };
    let written = write_artifacts(&cli.out, &result, image.as_ref())?;
    let m = result.metrics();
    println!("{}: degree {}, {} nodes, approximation error {:.3e}", cfg.recipe, m.degree, m.nodes, m.approx_error);
    if let (Some(f), Some(v)) = (m.integrand, m.integral) {
        let integrand = serde_json::to_value(f).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        match (&m.reference, m.error) {
            (Some(r), Some(e)) => println!("I_n[{integrand}] = {v} (reference {}, error {e:.3e})", r.value),
            _ => println!("I_n[{integrand}] = {v}"),
        }
    }
    if let Some(rate) = result.sweep.as_ref().and_then(|s| s.fitted_rate()) {
        println!("sweep: fitted geometric rate {rate:.3}");
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
