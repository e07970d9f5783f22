use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use capra::capra_l0::{self, ConjugateReport, SearchParams};
use capra::engine::{capra_coupling, conjugate, SampledFunction};
use capra::norms::{ksupport_norm, topk_norm};
use capra::report::{self, Suite, VerifyConfig};
use capra::vector::l0;
use capra::{Vector, XReal};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "capra", version, about = "Capra conjugacy and the l0 pseudonorm")]
struct Cli {
    /// TOML or JSON file with defaults; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate l0, a top-k norm, a k-support norm or the Euclidean norm.
    Norm {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        k: Option<usize>,
        /// Vector file: a JSON array, or whitespace/comma separated numbers.
        #[arg(long)]
        vec: PathBuf,
        /// Entries with magnitude at most this count as zero for l0.
        #[arg(long)]
        zero_tol: Option<f64>,
    },
    /// Capra conjugate of l0 or of a level set indicator.
    Conjugate {
        #[arg(long = "fn", value_enum)]
        func: Func,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        at: PathBuf,
        #[arg(long, value_enum, default_value = "closed")]
        engine: Engine,
        /// Primal sample size for the grid engine.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Numerical Capra biconjugate of l0 at a point.
    Biconjugate {
        #[arg(long)]
        at: PathBuf,
        #[arg(long)]
        lambda_max: Option<f64>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a verification suite and write its JSON report.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        #[arg(long)]
        seed: Option<u64>,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma separated dimensions, e.g. 2,3,4.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        /// Random inputs per dimension.
        #[arg(long)]
        samples: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    L0,
    Topk,
    Ksup,
    Euclid,
}

#[derive(Clone, Copy, ValueEnum)]
enum Func {
    L0,
    Levelset,
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Closed,
    Grid,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Moreau,
    Norms,
    Engine,
    Theorem,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::Moreau => Suite::Moreau,
            SuiteArg::Norms => Suite::Norms,
            SuiteArg::Engine => Suite::Engine,
            SuiteArg::Theorem => Suite::Theorem,
            SuiteArg::All => Suite::All,
        }
    }
}

/// Everything a config file may set.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    zero_tol: Option<f64>,
    grid_samples: Option<usize>,
    dims: Option<Vec<usize>>,
    samples: Option<usize>,
    search: Option<SearchParams>,
}

enum Failure {
    Usage(String),
    Io(String),
}

impl From<capra::vector::VectorError> for Failure {
    fn from(e: capra::vector::VectorError) -> Self {
        Failure::Io(e.to_string())
    }
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn load_config(path: &Path) -> Result<FileConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let parsed = if is_json {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| Failure::Io(format!("cannot parse {}: {e}", path.display())))
}

fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var("CAPRA_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| usage(format!("CAPRA_SEED is not an unsigned integer: {s:?}"))),
        Err(_) => Ok(None),
    }
}

/// flag, then config file, then CAPRA_SEED, then 0
fn resolve_seed(flag: Option<u64>, cfg: &FileConfig) -> Result<u64, Failure> {
    if let Some(s) = flag.or(cfg.seed) {
        return Ok(s);
    }
    Ok(env_seed()?.unwrap_or(0))
}

fn print_json(v: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

#[derive(Serialize)]
struct NormOutput {
    kind: &'static str,
    k: Option<usize>,
    input: Vector,
    value: f64,
}

fn cmd_norm(
    kind: Kind,
    k: Option<usize>,
    path: &Path,
    zero_tol: Option<f64>,
    cfg: &FileConfig,
) -> Result<u8, Failure> {
    let x = Vector::from_file(path)?;
    let need_k = || k.ok_or_else(|| usage("--k is required for this norm"));
    let (name, k, value) = match kind {
        Kind::L0 => {
            let tol = zero_tol.or(cfg.zero_tol).unwrap_or(0.0);
            if tol.is_nan() || tol < 0.0 {
                return Err(usage("--zero-tol must be nonnegative"));
            }
            ("l0", None, l0(&x, tol) as f64)
        }
        Kind::Topk => {
            let k = need_k()?;
            ("topk", Some(k), topk_norm(&x, k).map_err(usage)?)
        }
        Kind::Ksup => {
            let k = need_k()?;
            ("ksup", Some(k), ksupport_norm(&x, k).map_err(usage)?)
        }
        Kind::Euclid => ("euclid", None, x.norm()),
    };
    print_json(&NormOutput {
        kind: name,
        k,
        input: x,
        value,
    });
    Ok(0)
}

/// Primal sample for the grid engine: the origin plus seeded points with a
/// random support of size at most `max_support` and Gaussian entries on it.
fn grid_points(d: usize, max_support: usize, n: usize, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![Vector::zeros(d)];
    if max_support == 0 {
        return pts;
    }
    while pts.len() <= n {
        let size = rng.random_range(1..=max_support);
        let mut idx: Vec<usize> = (0..d).collect();
        idx.shuffle(&mut rng);
        let mut e = vec![0.0; d];
        for &i in &idx[..size] {
            e[i] = StandardNormal.sample(&mut rng);
        }
        let p = Vector::new(e).expect("finite");
        if !p.is_zero() && !pts.iter().any(|q| q.same_point(&p)) {
            pts.push(p);
        }
    }
    pts
}

fn cmd_conjugate(
    func: Func,
    k: Option<usize>,
    path: &Path,
    engine: Engine,
    samples: Option<usize>,
    seed: Option<u64>,
    cfg: &FileConfig,
) -> Result<u8, Failure> {
    let y = Vector::from_file(path)?;
    let d = y.dim();
    let (name, k, closed) = match func {
        Func::L0 => ("conjugate_l0", None, capra_l0::conj_l0(&y)),
        Func::Levelset => {
            let k = k.ok_or_else(|| usage("--k is required for --fn levelset"))?;
            let v = capra_l0::conj_levelset_indicator(&y, k).map_err(usage)?;
            ("conjugate_levelset_indicator", Some(k), v)
        }
    };
    let grid = match engine {
        Engine::Closed => None,
        Engine::Grid => {
            let n = samples.or(cfg.grid_samples).unwrap_or(4096);
            let seed = resolve_seed(seed, cfg)?;
            let pts = grid_points(d, k.unwrap_or(d).min(d), n, seed);
            let f = match func {
                Func::L0 => SampledFunction::from_fn(pts, |x| XReal::from_f64(l0(x, 0.0) as f64)),
                Func::Levelset => SampledFunction::indicator(pts),
            }
            .map_err(usage)?;
            let v = conjugate(&f, &capra_coupling(), std::slice::from_ref(&y)).map_err(usage)?;
            let g = v.values()[0]
                .finite()
                .ok_or_else(|| usage("grid conjugate is infinite"))?;
            Some((g, f.len()))
        }
    };
    let report = ConjugateReport::new(
        y,
        name,
        k,
        closed,
        grid.map(|g| g.0),
        grid.map_or(0, |g| g.1),
    );
    print_json(&report);
    Ok(0)
}

fn search_params(cfg: &FileConfig) -> SearchParams {
    cfg.search.unwrap_or_default()
}

fn cmd_biconjugate(
    path: &Path,
    lambda_max: Option<f64>,
    restarts: Option<usize>,
    seed: Option<u64>,
    cfg: &FileConfig,
) -> Result<u8, Failure> {
    let x = Vector::from_file(path)?;
    let mut params = search_params(cfg);
    if let Some(l) = lambda_max {
        params.lambda_max = l;
    }
    if params.lambda_max.is_nan() || params.lambda_max < 1.0 {
        return Err(usage("--lambda-max must be at least 1"));
    }
    if let Some(r) = restarts {
        params.restarts = r;
    }
    params.seed = match seed.or(cfg.search.map(|s| s.seed)) {
        Some(s) => s,
        None => resolve_seed(None, cfg)?,
    };
    print_json(&capra_l0::biconj_l0_report(&x, &params));
    Ok(0)
}

fn cmd_verify(
    suite: Suite,
    seed: Option<u64>,
    out: Option<&Path>,
    dims: Option<Vec<usize>>,
    samples: Option<usize>,
    cfg: &FileConfig,
) -> Result<u8, Failure> {
    let seed = resolve_seed(seed, cfg)?;
    let mut config = VerifyConfig::default();
    if let Some(d) = dims.or_else(|| cfg.dims.clone()) {
        config.dims = d;
    }
    if let Some(&bad) = config.dims.iter().find(|&&d| !(1..=64).contains(&d)) {
        return Err(usage(format!("dimension {bad} outside 1..=64")));
    }
    if let Some(n) = samples.or(cfg.samples) {
        config.samples = n;
    }
    if let Some(s) = cfg.search {
        config.search = s;
    }
    let report = report::run_suite(suite, seed, &config);
    let json = serde_json::to_string_pretty(&report).expect("serializable");
    match out {
        Some(p) => std::fs::write(p, json + "\n")
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display())))?,
        None => println!("{json}"),
    }
    for c in &report.checks {
        eprintln!(
            "{:4} {:40} cases={:<7} worst_gap={:.3e}",
            if c.status == report::Status::Pass { "PASS" } else { "FAIL" },
            c.id,
            c.cases,
            c.worst_gap
        );
    }
    eprintln!(
        "{} of {} checks passed",
        report.summary.passed, report.summary.total
    );
    Ok(if report.passed() { 0 } else { EXIT_FAIL })
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => FileConfig::default(),
    };
    match cli.cmd {
        Cmd::Norm {
            kind,
            k,
            vec,
            zero_tol,
        } => cmd_norm(kind, k, &vec, zero_tol, &cfg),
        Cmd::Conjugate {
            func,
            k,
            at,
            engine,
            samples,
            seed,
        } => cmd_conjugate(func, k, &at, engine, samples, seed, &cfg),
        Cmd::Biconjugate {
            at,
            lambda_max,
            restarts,
            seed,
        } => cmd_biconjugate(&at, lambda_max, restarts, seed, &cfg),
        Cmd::Verify {
            suite,
            seed,
            out,
            dims,
            samples,
        } => cmd_verify(suite.into(), seed, out.as_deref(), dims, samples, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_IO)
        }
    }
}
