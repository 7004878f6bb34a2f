//! Batch driver for the tensor-recovery experiments.
//!
//! Subcommands: `analyze` (sample-complexity formulas), `phase` (completion
//! phase diagram), `gaussian-sweep` (Gaussian measurement sweep), `replay`
//! (re-run one recorded cell). Sweeps read an optional JSON config mirroring
//! the experiment spec; command-line flags override config values. Outputs
//! land in TENSOREC_OUTPUT_DIR if set, else --out, else the config's
//! output_dir, else the current directory.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};

use tensorec_core::experiment::{
    replay_completion_trial, run_gaussian_sweep, run_phase_transition, ExperimentSpec,
    GaussianSweepSpec, Model, ModelKind, PhaseGrid,
};
use tensorec_core::geometry::ComplexityReport;

const OUTPUT_DIR_ENV: &str = "TENSOREC_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "tensorec", about = "low-rank tensor recovery experiments", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Snn,
    Square,
    Both,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Snn => Model::Snn,
            ModelArg::Square => Model::Square,
            ModelArg::Both => Model::Both,
        }
    }
}

#[derive(Args)]
struct PhaseArgs {
    /// JSON config file mirroring the experiment spec.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Comma-separated problem sizes, e.g. 10,14,18.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    /// Comma-separated observation ratios, e.g. 0.02,0.04.
    #[arg(long, value_delimiter = ',')]
    rho_grid: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    snn_max_iters: Option<usize>,
    #[arg(long)]
    alm_max_outer: Option<usize>,
    /// Run the full-scale grid (n up to 30, rho step 0.01); hours of SVDs.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GaussianArgs {
    /// JSON config file mirroring the sweep spec.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated measurement counts, e.g. 62,300,625.
    #[arg(long, value_delimiter = ',')]
    m_grid: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print sample-complexity formulas for an (n, r, K) instance family.
    Analyze {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        r: u64,
        #[arg(long)]
        k: u32,
        /// Emit the report as JSON only.
        #[arg(long)]
        json: bool,
    },
    /// Completion phase-transition sweep over (n, rho).
    Phase(PhaseArgs),
    /// Gaussian-measurement sweep over m for both models.
    GaussianSweep(GaussianArgs),
    /// Re-run one recorded sweep cell and print its trial record.
    Replay {
        #[command(flatten)]
        phase: PhaseArgs,
        /// Cell to replay as model:n_index,rho_index,trial (e.g. snn:2,5,0).
        #[arg(long)]
        cell: String,
    },
}

fn load_phase_spec(args: &PhaseArgs) -> Result<ExperimentSpec> {
    let mut spec = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None if args.full => ExperimentSpec::full_grid(0),
        None => ExperimentSpec::desk_grid(0),
    };
    if args.full && args.config.is_some() {
        bail!("--full conflicts with --config; put the grid in the config file");
    }
    if let Some(m) = args.model {
        spec.model = m.into();
    }
    if let Some(ns) = &args.n_grid {
        spec.n_grid = ns.clone();
    }
    if let Some(rhos) = &args.rho_grid {
        spec.rho_grid = rhos.clone();
    }
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    if let Some(th) = args.threshold {
        spec.success_threshold = th;
    }
    if let Some(s) = args.seed {
        spec.master_seed = s;
    }
    if let Some(it) = args.snn_max_iters {
        spec.snn_max_iters = it;
    }
    if let Some(it) = args.alm_max_outer {
        spec.alm_max_outer = it;
    }
    if let Some(out) = &args.out {
        spec.output_dir = Some(out.clone());
    }
    Ok(spec)
}

fn resolve_output_dir(spec_dir: Option<&Path>) -> PathBuf {
    if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
        return PathBuf::from(dir);
    }
    spec_dir.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."))
}

fn write_grid_files(dir: &Path, grids: &[PhaseGrid]) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    for grid in grids {
        let base = format!("grid_{}", grid.model.name());
        grid.write_csv(&dir.join(format!("{base}.csv")))?;
        grid.write_pgm(&dir.join(format!("{base}.pgm")))?;
    }
    Ok(())
}

fn parse_cell(cell: &str) -> Result<(ModelKind, usize, usize, usize)> {
    let (model, rest) = cell
        .split_once(':')
        .context("cell format is model:n_index,rho_index,trial")?;
    let model = match model {
        "snn" => ModelKind::Snn,
        "square" => ModelKind::Square,
        other => bail!("unknown model {other:?}; expected snn or square"),
    };
    let idx: Vec<usize> = rest
        .split(',')
        .map(|s| s.trim().parse::<usize>().context("cell indices must be integers"))
        .collect::<Result<_>>()?;
    if idx.len() != 3 {
        bail!("cell needs exactly three indices, got {}", idx.len());
    }
    Ok((model, idx[0], idx[1], idx[2]))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Analyze { n, r, k, json } => {
            let report = ComplexityReport::compute(n, r, k);
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                println!("instance family: n={n}, r={r}, K={k}");
                println!("  nonconvex sampling bound   {}", report.nonconvex_bound);
                println!("  SNN lower-bound scale      {}", report.kappa);
                println!("  square sufficiency scale   {}", report.square_exponent_bound);
            }
        }
        Command::Phase(args) => {
            let spec = load_phase_spec(&args)?;
            let grids = run_phase_transition(&spec).map_err(anyhow::Error::from)?;
            let dir = resolve_output_dir(spec.output_dir.as_deref());
            write_grid_files(&dir, &grids)?;
            let report = serde_json::json!({ "spec": spec, "grids": grids });
            std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)?)?;
            for grid in &grids {
                eprintln!(
                    "{}: wrote grid_{}.csv / .pgm ({} cells)",
                    grid.model.name(),
                    grid.model.name(),
                    grid.cells.len()
                );
            }
            eprintln!("report: {}", dir.join("report.json").display());
        }
        Command::GaussianSweep(args) => {
            let mut spec = match &args.config {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .with_context(|| format!("reading config {}", path.display()))?;
                    serde_json::from_str::<GaussianSweepSpec>(&text)
                        .with_context(|| format!("parsing config {}", path.display()))?
                }
                None => GaussianSweepSpec {
                    n: 5,
                    r: 1,
                    k: 4,
                    m_grid: vec![62, 300, 625],
                    trials: 10,
                    success_threshold: 1e-2,
                    master_seed: 0,
                    max_iters: 30000,
                },
            };
            if let Some(n) = args.n {
                spec.n = n;
            }
            if let Some(r) = args.r {
                spec.r = r;
            }
            if let Some(k) = args.k {
                spec.k = k;
            }
            if let Some(ms) = &args.m_grid {
                spec.m_grid = ms.clone();
            }
            if let Some(t) = args.trials {
                spec.trials = t;
            }
            if let Some(th) = args.threshold {
                spec.success_threshold = th;
            }
            if let Some(s) = args.seed {
                spec.master_seed = s;
            }
            if let Some(it) = args.max_iters {
                spec.max_iters = it;
            }
            let res = run_gaussian_sweep(&spec).map_err(anyhow::Error::from)?;
            let dir = resolve_output_dir(args.out.as_deref());
            write_grid_files(&dir, &[res.snn.clone(), res.square.clone()])?;
            let report = serde_json::json!({ "spec": spec, "result": res });
            std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)?)?;
            eprintln!(
                "kappa {} | square exponent {} | ambient {}",
                res.kappa, res.square_exponent, res.ambient_dim
            );
            eprintln!("report: {}", dir.join("report.json").display());
        }
        Command::Replay { phase, cell } => {
            let spec = load_phase_spec(&phase)?;
            let (model, i, j, t) = parse_cell(&cell)?;
            let record =
                replay_completion_trial(&spec, model, i, j, t).map_err(anyhow::Error::from)?;
            println!("{}", serde_json::to_string_pretty(&record)?);
        }
    }
    Ok(())
}
