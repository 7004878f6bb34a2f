//! Phase-transition experiment driver: instance generation, (n, rho) and
//! m-grid sweeps with per-cell success fractions, CSV and grayscale PGM
//! emission, and bit-exact replay of any single trial from recorded seeds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

use crate::geometry;
use crate::measure::{GaussianOperator, LinearMeasurement, SamplingOperator};
use crate::solver::{self, AlbConfig, AlmConfig, Matricization, Measurement, SquareConfig};
use crate::tensor::{self, DenseTensor, TuckerFactors};
use crate::{Error, Result};

/// Stable seed mixing (splitmix64 over the master seed and path parts), so
/// any (cell, trial) trial is replayable from the master seed alone.
pub fn mix_seed(master: u64, parts: &[u64]) -> u64 {
    let mut state = master;
    for &p in parts {
        state ^= splitmix64(p.wrapping_add(0x9e3779b97f4a7c15));
        state = splitmix64(state);
    }
    state
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Which recovery model(s) a sweep exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Snn,
    Square,
    Both,
}

impl Model {
    pub fn each(self) -> Vec<ModelKind> {
        match self {
            Model::Snn => vec![ModelKind::Snn],
            Model::Square => vec![ModelKind::Square],
            Model::Both => vec![ModelKind::Snn, ModelKind::Square],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Snn,
    Square,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Snn => "snn",
            ModelKind::Square => "square",
        }
    }
}

/// The completion test instance: a 4-way n x n x n x n Tucker tensor with a
/// 1 x 1 x 2 x 2 i.i.d. Gaussian core and random orthonormal factors
/// (n x 1, n x 1, n x 2, n x 2), so the Tucker rank is at most (1, 1, 2, 2).
pub fn generate_completion_instance(n: usize, seed: u64) -> Result<DenseTensor> {
    let core = crate::linalg::random_gaussian_tensor(&[1, 1, 2, 2], mix_seed(seed, &[0]))?;
    let ranks = [1usize, 1, 2, 2];
    let factors = ranks
        .iter()
        .enumerate()
        .map(|(i, &r)| crate::linalg::random_orthonormal(n, r, mix_seed(seed, &[1 + i as u64])))
        .collect::<Result<Vec<_>>>()?;
    tensor::tucker_compose(&TuckerFactors::new(core, factors)?)
}

/// Sweep definition for the completion phase diagram.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(default = "default_model")]
    pub model: Model,
    /// Problem sizes n (tensor is n x n x n x n).
    pub n_grid: Vec<usize>,
    /// Observation ratios rho.
    pub rho_grid: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// A trial succeeds when rel_error <= this.
    #[serde(default = "default_success_threshold")]
    pub success_threshold: f64,
    #[serde(default)]
    pub master_seed: u64,
    /// Bregman iteration cap for the SNN solver.
    #[serde(default = "default_snn_max_iters")]
    pub snn_max_iters: usize,
    /// Outer-iteration cap for the ALM completion solver.
    #[serde(default = "default_alm_max_outer")]
    pub alm_max_outer: usize,
    #[serde(default)]
    pub output_dir: Option<std::path::PathBuf>,
}

fn default_model() -> Model {
    Model::Both
}
fn default_trials() -> usize {
    5
}
fn default_success_threshold() -> f64 {
    1e-2
}
fn default_snn_max_iters() -> usize {
    3000
}
fn default_alm_max_outer() -> usize {
    600
}

impl ExperimentSpec {
    /// The full-scale grid: n from 10 to 30 step 1, rho from 0.01 to 0.20
    /// step 0.01. Hours of SVDs; the desk grid below is the default.
    pub fn full_grid(master_seed: u64) -> Self {
        Self {
            model: Model::Both,
            n_grid: (10..=30).collect(),
            rho_grid: (1..=20).map(|i| i as f64 / 100.0).collect(),
            trials: 5,
            success_threshold: 1e-2,
            master_seed,
            snn_max_iters: default_snn_max_iters(),
            alm_max_outer: default_alm_max_outer(),
            output_dir: None,
        }
    }

    /// Desk-scale grid: n in {10, 14, 18}, rho from 0.02 to 0.20 step 0.02.
    pub fn desk_grid(master_seed: u64) -> Self {
        Self {
            model: Model::Both,
            n_grid: vec![10, 14, 18],
            rho_grid: (1..=10).map(|i| 0.02 * i as f64).collect(),
            trials: 5,
            success_threshold: 1e-2,
            master_seed,
            snn_max_iters: default_snn_max_iters(),
            alm_max_outer: default_alm_max_outer(),
            output_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.rho_grid.is_empty() {
            return Err(Error::InvalidArgument("grids must be nonempty".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1])
            || self.rho_grid.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidArgument("grids must be strictly increasing".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be >= 1".into()));
        }
        if self.rho_grid.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
            return Err(Error::InvalidArgument("rho values must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// One solver run inside a sweep, with everything needed to replay it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialRecord {
    pub rel_error: f64,
    pub iterations: usize,
    pub converged: bool,
    pub instance_seed: u64,
    pub operator_seed: u64,
}

/// Aggregated results for one grid cell.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellResult {
    pub n: usize,
    /// rho for completion sweeps, m for Gaussian sweeps.
    pub x_value: f64,
    pub successes: usize,
    pub trials: usize,
    pub mean_rel_err: f64,
    pub mean_iters: f64,
    pub records: Vec<TrialRecord>,
}

impl CellResult {
    pub fn success_fraction(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// Success-fraction grid for one model: rows indexed by n, columns by the
/// swept axis (rho or m).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub model: ModelKind,
    pub n_values: Vec<usize>,
    pub x_values: Vec<f64>,
    pub master_seed: u64,
    /// Row-major: cells[i * x_values.len() + j] is (n_values[i], x_values[j]).
    pub cells: Vec<CellResult>,
}

impl PhaseGrid {
    pub fn cell(&self, n_index: usize, x_index: usize) -> &CellResult {
        &self.cells[n_index * self.x_values.len() + x_index]
    }

    /// CSV with exact success counts (numerator and denominator).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "n,rho_or_m,successes,trials,mean_rel_err,mean_iters")?;
        for c in &self.cells {
            writeln!(
                f,
                "{},{},{},{},{},{}",
                c.n, c.x_value, c.successes, c.trials, c.mean_rel_err, c.mean_iters
            )?;
        }
        Ok(())
    }

    /// 8-bit grayscale PGM: brightness = success fraction, black = certain
    /// failure, white = certain success. Rows follow n_values top to bottom,
    /// columns follow x_values left to right.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let w = self.x_values.len();
        let h = self.n_values.len();
        let mut buf = Vec::with_capacity(w * h + 32);
        buf.extend_from_slice(format!("P5\n{w} {h}\n255\n").as_bytes());
        for c in &self.cells {
            buf.push((c.success_fraction() * 255.0).round() as u8);
        }
        std::fs::write(path, buf)?;
        Ok(())
    }
}

fn summarize(
    model: ModelKind,
    n_values: Vec<usize>,
    x_values: Vec<f64>,
    master_seed: u64,
    threshold: f64,
    mut raw: Vec<(usize, usize, usize, TrialRecord)>,
) -> PhaseGrid {
    raw.sort_by_key(|(i, j, t, _)| (*i, *j, *t));
    let mut cells = Vec::with_capacity(n_values.len() * x_values.len());
    for i in 0..n_values.len() {
        for j in 0..x_values.len() {
            let records: Vec<TrialRecord> = raw
                .iter()
                .filter(|(a, b, _, _)| *a == i && *b == j)
                .map(|(_, _, _, r)| r.clone())
                .collect();
            let trials = records.len();
            let successes = records.iter().filter(|r| r.rel_error <= threshold).count();
            let mean_rel_err =
                records.iter().map(|r| r.rel_error).sum::<f64>() / trials as f64;
            let mean_iters =
                records.iter().map(|r| r.iterations as f64).sum::<f64>() / trials as f64;
            cells.push(CellResult {
                n: n_values[i],
                x_value: x_values[j],
                successes,
                trials,
                mean_rel_err,
                mean_iters,
                records,
            });
        }
    }
    PhaseGrid { model, n_values, x_values, master_seed, cells }
}

fn completion_trial(
    spec: &ExperimentSpec,
    model: ModelKind,
    n_index: usize,
    rho_index: usize,
    trial: usize,
) -> Result<TrialRecord> {
    let n = spec.n_grid[n_index];
    let rho = spec.rho_grid[rho_index];
    let dims = vec![n; 4];
    // instance and mask seeds are model-independent so both models see the
    // same trials
    let instance_seed = mix_seed(spec.master_seed, &[n_index as u64, rho_index as u64, trial as u64, 0]);
    let operator_seed = mix_seed(spec.master_seed, &[n_index as u64, rho_index as u64, trial as u64, 1]);
    let x0 = generate_completion_instance(n, instance_seed)?;
    let omega = SamplingOperator::new(&dims, rho, operator_seed)?;
    let z = omega.apply(&x0)?;
    let (rel_error, iterations, converged) = match model {
        ModelKind::Snn => {
            let cfg = AlbConfig {
                max_iters: spec.snn_max_iters,
                // stop as soon as success at the sweep threshold is locked in,
                // and bail out of plainly stalled failure cells
                reference_rel_tol: spec.success_threshold / 2.0,
                stall_patience: Some(600),
                ..AlbConfig::default()
            };
            let res = solver::alb_snn(&omega, &z, &dims, &cfg, Some(&x0))?;
            (res.rel_error.unwrap(), res.iterations, res.converged)
        }
        ModelKind::Square => {
            let cfg = SquareConfig {
                alm: AlmConfig { max_outer: spec.alm_max_outer, ..AlmConfig::default() },
                ..SquareConfig::default()
            };
            let res = solver::square_recover(
                Measurement::Sampling(&omega),
                &z,
                &dims,
                None,
                &cfg,
                Some(&x0),
            )?;
            (res.rel_error.unwrap(), res.iterations, res.converged)
        }
    };
    Ok(TrialRecord { rel_error, iterations, converged, instance_seed, operator_seed })
}

/// Run the completion phase-transition sweep; one grid per requested model.
///
/// Trials run on a work-stealing pool; solver failures count as failed
/// trials and never abort the sweep.
pub fn run_phase_transition(spec: &ExperimentSpec) -> Result<Vec<PhaseGrid>> {
    spec.validate()?;
    let mut grids = Vec::new();
    for model in spec.model.each() {
        let jobs: Vec<(usize, usize, usize)> = (0..spec.n_grid.len())
            .flat_map(|i| {
                (0..spec.rho_grid.len())
                    .flat_map(move |j| (0..spec.trials).map(move |t| (i, j, t)))
            })
            .collect();
        let raw: Vec<(usize, usize, usize, TrialRecord)> = jobs
            .par_iter()
            .map(|&(i, j, t)| {
                let rec = completion_trial(spec, model, i, j, t).unwrap_or(TrialRecord {
                    rel_error: f64::INFINITY,
                    iterations: 0,
                    converged: false,
                    instance_seed: 0,
                    operator_seed: 0,
                });
                (i, j, t, rec)
            })
            .collect();
        grids.push(summarize(
            model,
            spec.n_grid.clone(),
            spec.rho_grid.clone(),
            spec.master_seed,
            spec.success_threshold,
            raw,
        ));
    }
    Ok(grids)
}

/// Replay one completion trial from its cell indices; reproduces the
/// recorded rel_error bit-exactly.
pub fn replay_completion_trial(
    spec: &ExperimentSpec,
    model: ModelKind,
    n_index: usize,
    rho_index: usize,
    trial: usize,
) -> Result<TrialRecord> {
    spec.validate()?;
    if n_index >= spec.n_grid.len() || rho_index >= spec.rho_grid.len() || trial >= spec.trials {
        return Err(Error::InvalidArgument("cell indices out of range".into()));
    }
    completion_trial(spec, model, n_index, rho_index, trial)
}

/// Sweep definition for Gaussian-measurement recovery at a fixed instance
/// family (cubic supersymmetric-core Tucker tensors).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaussianSweepSpec {
    pub n: usize,
    pub r: usize,
    pub k: usize,
    pub m_grid: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_success_threshold")]
    pub success_threshold: f64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_gaussian_max_iters")]
    pub max_iters: usize,
}

fn default_gaussian_max_iters() -> usize {
    30000
}

/// Gaussian sweep output: success fractions per m for both models plus the
/// theory quantities they are compared against.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaussianSweepResult {
    pub snn: PhaseGrid,
    pub square: PhaseGrid,
    /// kappa of the instance family (measured on the first instance).
    pub kappa: f64,
    pub square_exponent: f64,
    pub ambient_dim: usize,
}

fn gaussian_trial(
    spec: &GaussianSweepSpec,
    model: ModelKind,
    m_index: usize,
    trial: usize,
) -> Result<TrialRecord> {
    let dims = vec![spec.n; spec.k];
    let m = spec.m_grid[m_index];
    let instance_seed = mix_seed(spec.master_seed, &[m_index as u64, trial as u64, 0]);
    let operator_seed = mix_seed(spec.master_seed, &[m_index as u64, trial as u64, 1]);
    let x0 = tensor::tucker_compose(&geometry::supersymmetric_instance(
        spec.n,
        spec.r,
        spec.k,
        instance_seed,
    )?)?;
    let op = GaussianOperator::new(&dims, m, operator_seed)?;
    let z = op.apply(&x0)?;
    let cfg = AlbConfig {
        max_iters: spec.max_iters,
        stall_patience: Some(3000),
        ..AlbConfig::default()
    };
    let res = match model {
        ModelKind::Snn => solver::alb_snn(&op, &z, &dims, &cfg, Some(&x0))?,
        ModelKind::Square => solver::alb_composite(
            &op,
            &z,
            &dims,
            &[Matricization::Square(spec.k / 2)],
            &cfg,
            Some(&x0),
        )?,
    };
    Ok(TrialRecord {
        rel_error: res.rel_error.unwrap(),
        iterations: res.iterations,
        converged: res.converged,
        instance_seed,
        operator_seed,
    })
}

/// Sweep the measurement budget m for both models on the supersymmetric-core
/// instance family, reporting kappa and the square-norm exponent alongside so
/// the empirical transitions can be compared against theory.
pub fn run_gaussian_sweep(spec: &GaussianSweepSpec) -> Result<GaussianSweepResult> {
    if spec.m_grid.is_empty() || spec.trials == 0 {
        return Err(Error::InvalidArgument("m grid and trials must be nonempty".into()));
    }
    let x_values: Vec<f64> = spec.m_grid.iter().map(|&m| m as f64).collect();
    let first = tensor::tucker_compose(&geometry::supersymmetric_instance(
        spec.n,
        spec.r,
        spec.k,
        mix_seed(spec.master_seed, &[0, 0, 0]),
    )?)?;
    let kappa = geometry::kappa_tensor_snn(&first)?;
    let mut grids = Vec::new();
    for model in [ModelKind::Snn, ModelKind::Square] {
        let jobs: Vec<(usize, usize)> = (0..spec.m_grid.len())
            .flat_map(|j| (0..spec.trials).map(move |t| (j, t)))
            .collect();
        let raw: Vec<(usize, usize, usize, TrialRecord)> = jobs
            .par_iter()
            .map(|&(j, t)| {
                let rec = gaussian_trial(spec, model, j, t).unwrap_or(TrialRecord {
                    rel_error: f64::INFINITY,
                    iterations: 0,
                    converged: false,
                    instance_seed: 0,
                    operator_seed: 0,
                });
                (0usize, j, t, rec)
            })
            .collect();
        grids.push(summarize(
            model,
            vec![spec.n],
            x_values.clone(),
            spec.master_seed,
            spec.success_threshold,
            raw,
        ));
    }
    let square = grids.pop().unwrap();
    let snn = grids.pop().unwrap();
    Ok(GaussianSweepResult {
        snn,
        square,
        kappa,
        square_exponent: geometry::square_sample_exponent(spec.n as u64, spec.r as u64, spec.k as u32),
        ambient_dim: spec.n.pow(spec.k as u32),
    })
}
