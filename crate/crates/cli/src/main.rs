//! `zetaglue`: runs one experiment, writes a JSON report and a CSV summary,
//! and exits 0 when every row passes, 1 on usage or configuration errors,
//! 2 when a hypothesis of the computation fails and 3 on tolerance or
//! certification failures.

mod cache;
mod config;
mod report;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use zetaglue::glue::Identity;
use zetaglue::Error;

use crate::cache::{Cache, CacheEntry};
use crate::config::{Experiment, Format, Model, RunConfig};

const EXIT_USAGE: u8 = 1;
const EXIT_HYPOTHESIS: u8 = 2;
const EXIT_TOLERANCE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "zetaglue", version, about = "Determinant gluing experiments on flat cylinders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues of the cross-section below the cutoff and its heat expansion.
    Spectrum(RunArgs),
    /// `zeta(0)`, `zeta'(0)` and `log Det` of the cross-section, optionally shifted.
    Zeta(RunArgs),
    /// Determinant of the Laplacian on a cylinder over the cross-section.
    Logdet(RunArgs),
    /// Determinant of a Dirichlet-to-Neumann family.
    Dtn(RunArgs),
    /// Symbol expansion of the one-sided map and its smoothing remainder.
    Symbols(RunArgs),
    /// Gluing identity for a cut cylinder.
    Glue(RunArgs),
    /// Gluing identity for the square of the Laplacian.
    PowerGlue(RunArgs),
    /// Limit of a stretched-collar expression as the collar grows.
    Adiabatic(RunArgs),
    /// Torsion limits under absolute and relative conditions.
    Torsion(RunArgs),
}

impl Command {
    fn split(self) -> (Experiment, RunArgs) {
        match self {
            Command::Spectrum(a) => (Experiment::Spectrum, a),
            Command::Zeta(a) => (Experiment::Zeta, a),
            Command::Logdet(a) => (Experiment::Logdet, a),
            Command::Dtn(a) => (Experiment::Dtn, a),
            Command::Symbols(a) => (Experiment::Symbols, a),
            Command::Glue(a) => (Experiment::Glue, a),
            Command::PowerGlue(a) => (Experiment::PowerGlue, a),
            Command::Adiabatic(a) => (Experiment::Adiabatic, a),
            Command::Torsion(a) => (Experiment::Torsion, a),
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Eigenvalue cutoff.
    #[arg(long)]
    cutoff: Option<f64>,
    /// Tolerance applied to every row class (exact, fixed and limit).
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated collar half-lengths.
    #[arg(long, value_delimiter = ',')]
    r_grid: Option<Vec<f64>>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Skip the result cache.
    #[arg(long)]
    no_cache: bool,
    /// Limit identity for `adiabatic`.
    #[arg(long, value_parser = parse_identity)]
    identity: Option<Identity>,
    /// Cross-section shorthand.
    #[arg(long, value_enum)]
    model: Option<Model>,
    /// Circle circumference (default 2 pi).
    #[arg(long)]
    circumference: Option<f64>,
    /// Circle holonomy.
    #[arg(long)]
    holonomy: Option<f64>,
    /// Offset `beta` of the spectrum `n + beta`.
    #[arg(long)]
    offset: Option<f64>,
    /// Length of the left piece.
    #[arg(long)]
    a: Option<f64>,
    /// Length of the right piece.
    #[arg(long)]
    b: Option<f64>,
    /// Shift modulus for power gluing and symbols.
    #[arg(long)]
    t: Option<f64>,
    /// Cylinder length for `logdet`.
    #[arg(long)]
    length: Option<f64>,
    /// Ray angle of the operator shift.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Modulus of the operator shift.
    #[arg(long)]
    shift: Option<f64>,
    /// Number of symbol orders below the leading one.
    #[arg(long)]
    depth: Option<usize>,
}

fn parse_identity(s: &str) -> Result<Identity, String> {
    Identity::parse(s).map_err(|e| e.to_string())
}

fn build_config(experiment: Experiment, args: &RunArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match cfg.experiment {
        Some(e) if e != experiment => bail!("configuration is for `{e}`, not `{experiment}`"),
        _ => cfg.experiment = Some(experiment),
    }
    if let Some(model) = args.model {
        cfg.geometry.cross_section = model.build(args.circumference, args.holonomy, args.offset);
    } else if args.circumference.is_some() || args.holonomy.is_some() || args.offset.is_some() {
        bail!("--circumference, --holonomy and --offset need --model");
    }
    let n = &mut cfg.numeric;
    if let Some(c) = args.cutoff {
        n.cutoff = c;
    }
    if let Some(t) = args.tol {
        n.tolerances.exact = t;
        n.tolerances.fixed = t;
        n.tolerances.limit = t;
    }
    if let Some(g) = &args.r_grid {
        n.r_grid = Some(g.clone());
    }
    if let Some(id) = args.identity {
        n.identity = id;
    }
    let g = &mut cfg.geometry;
    for (slot, v) in [(&mut g.a, args.a), (&mut g.b, args.b), (&mut g.t, args.t)] {
        if let Some(v) = v {
            *slot = v;
        }
    }
    if let Some(t) = args.t {
        cfg.symbols.t = t;
    }
    if let Some(l) = args.length {
        cfg.cylinder.length = l;
    }
    if let Some(theta) = args.theta {
        cfg.shift.theta = theta;
    }
    if let Some(s) = args.shift {
        cfg.shift.t = s;
    }
    if let Some(d) = args.depth {
        cfg.symbols.depth = d;
    }
    if let Some(out) = &args.out {
        cfg.output.dir = out.to_string_lossy().into_owned();
    }
    if let Some(f) = args.format {
        cfg.output.format = f;
    }
    if args.no_cache {
        cfg.output.cache = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_) | Error::Unsupported(_) | Error::MissingAsymptotics(_) => EXIT_USAGE,
        Error::Kernel(_) | Error::Hypothesis(_) | Error::NotTraceClass(_) => EXIT_HYPOTHESIS,
        Error::Conditioning { .. } | Error::Uncertified(_) | Error::Extrapolation(_) => EXIT_TOLERANCE,
    }
}

fn write_outputs(cfg: &RunConfig, entry: &CacheEntry) -> anyhow::Result<()> {
    let dir = Path::new(&cfg.output.dir);
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let stem = cfg.experiment().name();
    let format = cfg.output.format;
    if matches!(format, Format::Json | Format::Both) {
        let path = dir.join(format!("{stem}.json"));
        fs::write(&path, &entry.json).with_context(|| format!("writing {}", path.display()))?;
    }
    if matches!(format, Format::Csv | Format::Both) {
        let path = dir.join(format!("{stem}.csv"));
        fs::write(&path, &entry.csv).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn execute(experiment: Experiment, args: RunArgs) -> anyhow::Result<u8> {
    let cfg = run::resolve(build_config(experiment, &args)?);
    let key = cache::key(&cfg);
    let store = cfg
        .output
        .cache
        .then(|| Cache::new(cache::default_dir(Path::new(&cfg.output.dir))));
    let cached = store.as_ref().and_then(|c| c.lookup(&key));
    let entry = match cached {
        Some(entry) => {
            eprintln!("zetaglue: cache hit {key}");
            entry
        }
        None => {
            let doc = match run::run(&cfg) {
                Ok(doc) => doc,
                Err(e) => {
                    eprintln!("zetaglue: {experiment}: {e}");
                    return Ok(exit_code(&e));
                }
            };
            let entry = CacheEntry {
                version: run::VERSION.into(),
                key: key.clone(),
                pass: doc.pass,
                json: report::render_json(&doc),
                csv: report::render_csv(&doc.rows),
            };
            if let Some(c) = &store {
                if let Err(e) = c.store(&entry) {
                    eprintln!("zetaglue: cache store failed: {e}");
                }
            }
            entry
        }
    };
    write_outputs(&cfg, &entry)?;
    print!("{}", entry.csv);
    Ok(if entry.pass { 0 } else { EXIT_TOLERANCE })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let (experiment, args) = cli.command.split();
    match execute(experiment, args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("zetaglue: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
