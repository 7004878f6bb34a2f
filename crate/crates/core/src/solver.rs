//! Recovery solvers: accelerated linearized Bregman for composite
//! nuclear-norm models (sum of unfolding nuclear norms, or the single
//! square-matricization nuclear norm) under any linear measurement operator,
//! and inexact augmented Lagrangian nuclear-norm matrix completion for the
//! square-norm model under entry sampling.

use ndarray::{Array1, Array2};
use std::io::Write;
use std::path::Path;

use crate::linalg;
use crate::measure::{GaussianOperator, LinearMeasurement, SamplingOperator};
use crate::tensor::{self, DenseTensor};
use crate::{Error, Result};

/// How a tensor variable is matricized before singular-value shrinkage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Matricization {
    /// Mode-i unfolding (0-based mode).
    Mode(usize),
    /// Balanced square reshaping with the given split index (1..K-1).
    Square(usize),
}

/// Parameters of the accelerated linearized Bregman solver.
#[derive(Clone, Debug)]
pub struct AlbConfig {
    /// Smoothing parameter; when absent, anchored to 50 * ||X0||_F if a
    /// reference is supplied, else 50 * ||adjoint(z)||_F as a proxy.
    pub mu: Option<f64>,
    /// Dual step size; default 1 / (5 mu).
    pub tau: Option<f64>,
    /// Per-block weights lambda_i; default all 1.
    pub weights: Option<Vec<f64>>,
    pub max_iters: usize,
    /// Stop when ||op(W) - z|| / max(||z||, 1) falls below this.
    pub primal_tol: f64,
    /// Optional stop on relative change of W between iterations.
    pub rel_tol: Option<f64>,
    /// Experiment-mode exit: stop once rel_error vs the reference is below
    /// this (only used when a reference tensor is supplied).
    pub reference_rel_tol: f64,
    /// Experiment-mode bailout: give up when the reference rel_error has not
    /// improved by at least 2% over this many iterations. Off by default.
    pub stall_patience: Option<usize>,
}

impl Default for AlbConfig {
    fn default() -> Self {
        Self {
            mu: None,
            tau: None,
            weights: None,
            max_iters: 5000,
            primal_tol: 1e-4,
            rel_tol: None,
            reference_rel_tol: 1e-3,
            stall_patience: None,
        }
    }
}

/// Convergence record of a recovery run.
#[derive(Clone, Debug)]
pub struct RecoveryResult {
    pub estimate: DenseTensor,
    /// ||estimate - X0||_F / ||X0||_F when a reference was supplied.
    pub rel_error: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Relative constraint residual per iteration.
    pub residual_history: Vec<f64>,
    /// Relative error per iteration (empty without a reference).
    pub rel_error_history: Vec<f64>,
}

impl RecoveryResult {
    /// CSV trace (iteration, residual, rel_error) for convergence plots.
    pub fn write_trace_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "iteration,residual,rel_error")?;
        for (i, r) in self.residual_history.iter().enumerate() {
            let e = self
                .rel_error_history
                .get(i)
                .map(|e| e.to_string())
                .unwrap_or_default();
            writeln!(f, "{},{},{}", i + 1, r, e)?;
        }
        Ok(())
    }
}

struct Block {
    kind: Matricization,
    weight: f64,
    // unfold map cached for Mode blocks
    map: Option<Vec<usize>>,
}

impl Block {
    fn matricize(&self, x: &DenseTensor) -> Result<Array2<f64>> {
        match self.kind {
            Matricization::Mode(i) => {
                tensor::unfold_with_map(x, i, self.map.as_ref().unwrap())
            }
            Matricization::Square(j) => tensor::square_reshape(x, j),
        }
    }

    fn dematricize(&self, m: &Array2<f64>, dims: &[usize]) -> Result<DenseTensor> {
        match self.kind {
            Matricization::Mode(i) => {
                tensor::fold_with_map(m, i, dims, self.map.as_ref().unwrap())
            }
            Matricization::Square(j) => tensor::square_fold(m, dims, j),
        }
    }
}

/// One-step-at-a-time accelerated linearized Bregman iteration.
///
/// Solves the smoothed dual of
///   minimize sum_i w_i ||B_i(X_i)||_*  s.t.  X_i = W, op(W) = z
/// by Nesterov-accelerated dual ascent. Each step performs, per block,
///   X_i <- mu * shrink(B_i(Y_i), w_i),
///   W   <- mu * (op*(Z) - sum_i Y_i),
///   Y_i~ <- Y_i - tau (X_i - W),
///   Z~  <- Z - tau (op(W) - z),
/// followed by the t-sequence extrapolation of Y and Z. The measurement
/// operator is normalized to unit spectral norm internally, which leaves
/// entry-sampling operators untouched.
pub struct AlbSolver<'a> {
    op: &'a dyn LinearMeasurement,
    dims: Vec<usize>,
    blocks: Vec<Block>,
    z_scaled: Array1<f64>,
    scale: f64,
    z_norm: f64,
    pub mu: f64,
    pub tau: f64,
    // dual state
    y: Vec<DenseTensor>,
    y_tilde_prev: Option<Vec<DenseTensor>>,
    z_dual: Array1<f64>,
    z_tilde_prev: Option<Array1<f64>>,
    t: f64,
    iterations: usize,
    // last primal iterates, for inspection and convergence checks
    last_x: Vec<DenseTensor>,
    last_w: DenseTensor,
    last_residual: f64,
}

impl<'a> AlbSolver<'a> {
    pub fn new(
        op: &'a dyn LinearMeasurement,
        z: &Array1<f64>,
        dims: &[usize],
        matricizations: &[Matricization],
        cfg: &AlbConfig,
        reference: Option<&DenseTensor>,
    ) -> Result<Self> {
        if z.len() != op.num_measurements() {
            return Err(Error::ShapeMismatch(format!(
                "observation length {} vs operator m = {}",
                z.len(),
                op.num_measurements()
            )));
        }
        if matricizations.is_empty() {
            return Err(Error::InvalidArgument("need at least one regularizer block".into()));
        }
        let weights = match &cfg.weights {
            Some(w) => {
                if w.len() != matricizations.len() {
                    return Err(Error::InvalidArgument(format!(
                        "{} weights for {} blocks",
                        w.len(),
                        matricizations.len()
                    )));
                }
                if w.iter().any(|&x| x < 0.0) {
                    return Err(Error::InvalidArgument("weights must be nonnegative".into()));
                }
                w.clone()
            }
            None => vec![1.0; matricizations.len()],
        };
        let mut blocks = Vec::with_capacity(matricizations.len());
        for (kind, weight) in matricizations.iter().zip(weights) {
            let map = match kind {
                Matricization::Mode(i) => Some(tensor::unfold_map(dims, *i)?),
                Matricization::Square(j) => {
                    if *j == 0 || *j >= dims.len() {
                        return Err(Error::InvalidArgument(format!(
                            "square split {j} out of range for dims {dims:?}"
                        )));
                    }
                    None
                }
            };
            blocks.push(Block { kind: *kind, weight, map });
        }
        let mu = match cfg.mu {
            Some(m) if m > 0.0 => m,
            Some(m) => {
                return Err(Error::InvalidArgument(format!("mu must be positive, got {m}")))
            }
            None => {
                let anchor = match reference {
                    Some(x0) => x0.frobenius_norm(),
                    None => op.adjoint(z)?.frobenius_norm(),
                };
                if anchor > 0.0 {
                    50.0 * anchor
                } else {
                    1.0
                }
            }
        };
        let tau = match cfg.tau {
            Some(t) if t > 0.0 => t,
            Some(t) => {
                return Err(Error::InvalidArgument(format!("tau must be positive, got {t}")))
            }
            None => 1.0 / (5.0 * mu),
        };
        let scale = op.operator_norm().max(1.0);
        let zeros_t = DenseTensor::zeros(dims)?;
        let nb = blocks.len();
        Ok(Self {
            op,
            dims: dims.to_vec(),
            blocks,
            z_scaled: z / scale,
            scale,
            z_norm: z.dot(z).sqrt(),
            mu,
            tau,
            y: vec![zeros_t.clone(); nb],
            y_tilde_prev: None,
            z_dual: Array1::zeros(z.len()),
            z_tilde_prev: None,
            t: 1.0,
            iterations: 0,
            last_x: vec![zeros_t.clone(); nb],
            last_w: zeros_t,
            last_residual: f64::INFINITY,
        })
    }

    pub fn step(&mut self) -> Result<()> {
        let mu = self.mu;
        let tau = self.tau;
        let nb = self.blocks.len();
        // primal block updates
        for (i, b) in self.blocks.iter().enumerate() {
            let m = b.matricize(&self.y[i])?;
            let shrunk = linalg::svt_shrink(&m, b.weight)?;
            let mut x = b.dematricize(&shrunk, &self.dims)?;
            x.scale_mut(mu);
            self.last_x[i] = x;
        }
        // W update: mu * (op*(Z) - sum_i Y_i)
        let mut w = self.op.adjoint(&self.z_dual)?;
        w.scale_mut(1.0 / self.scale);
        for y in &self.y {
            w.axpy_mut(-1.0, y)?;
        }
        w.scale_mut(mu);
        // dual gradient steps; Y_i~ = Y_i - tau (X_i - W) computed in place
        for i in 0..nb {
            self.y[i].axpy_mut(-tau, &self.last_x[i])?;
            self.y[i].axpy_mut(tau, &w)?;
        }
        let resid = &(self.op.apply(&w)? / self.scale) - &self.z_scaled;
        let z_tilde = &self.z_dual - &(tau * &resid);
        // Nesterov extrapolation; the first step uses tilde^{-1} = tilde^0
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * self.t * self.t).sqrt());
        let coef = (self.t - 1.0) / t_next;
        // self.y currently holds Y~; reuse the previous Y~ buffers for the
        // extrapolated point Y = (1+coef) Y~ - coef Y~_prev
        let y_tilde = std::mem::take(&mut self.y);
        let prev = self.y_tilde_prev.take().unwrap_or_else(|| y_tilde.clone());
        let mut y_new = prev;
        for i in 0..nb {
            y_new[i].scale_mut(-coef);
            y_new[i].axpy_mut(1.0 + coef, &y_tilde[i])?;
        }
        self.y = y_new;
        let z_prev = self.z_tilde_prev.take().unwrap_or_else(|| z_tilde.clone());
        self.z_dual = &z_tilde + &(coef * &(&z_tilde - &z_prev));
        self.t = t_next;
        self.last_residual = resid.dot(&resid).sqrt() * self.scale / self.z_norm.max(1.0);
        self.y_tilde_prev = Some(y_tilde);
        self.z_tilde_prev = Some(z_tilde);
        self.last_w = w;
        self.iterations += 1;
        Ok(())
    }

    pub fn w(&self) -> &DenseTensor {
        &self.last_w
    }

    pub fn block_iterates(&self) -> &[DenseTensor] {
        &self.last_x
    }

    pub fn y_tilde(&self) -> &[DenseTensor] {
        self.y_tilde_prev.as_deref().unwrap_or(&[])
    }

    pub fn z_tilde(&self) -> &Array1<f64> {
        self.z_tilde_prev.as_ref().unwrap_or(&self.z_dual)
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Relative constraint residual ||op(W) - z|| / max(||z||, 1).
    pub fn residual(&self) -> f64 {
        self.last_residual
    }

    /// Norm of the gradient of the smoothed dual: the full constraint
    /// residual sqrt(sum_i ||X_i - W||_F^2 + ||op(W) - z||_2^2).
    pub fn dual_gradient_norm(&self) -> Result<f64> {
        let mut acc = 0.0;
        for x in &self.last_x {
            let d = x.axpy(-1.0, &self.last_w)?;
            acc += d.data().iter().map(|v| v * v).sum::<f64>();
        }
        let r = &(self.op.apply(&self.last_w)? / self.scale) - &self.z_scaled;
        acc += r.dot(&r) * self.scale * self.scale;
        Ok(acc.sqrt())
    }
}

/// Run the composite-norm Bregman solver to convergence.
pub fn alb_composite(
    op: &dyn LinearMeasurement,
    z: &Array1<f64>,
    dims: &[usize],
    matricizations: &[Matricization],
    cfg: &AlbConfig,
    reference: Option<&DenseTensor>,
) -> Result<RecoveryResult> {
    let mut solver = AlbSolver::new(op, z, dims, matricizations, cfg, reference)?;
    let ref_norm = reference.map(|x0| x0.frobenius_norm().max(f64::MIN_POSITIVE));
    let mut residual_history = Vec::new();
    let mut rel_error_history = Vec::new();
    let mut converged = false;
    let mut prev_w: Option<DenseTensor> = None;
    let mut best_err = f64::INFINITY;
    let mut best_iter = 0usize;
    for it in 0..cfg.max_iters {
        solver.step()?;
        residual_history.push(solver.residual());
        let mut rel_err = None;
        if let (Some(x0), Some(nrm)) = (reference, ref_norm) {
            let diff_sq: f64 = solver
                .w()
                .data()
                .iter()
                .zip(x0.data())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let e = diff_sq.sqrt() / nrm;
            rel_error_history.push(e);
            rel_err = Some(e);
        }
        if solver.residual() <= cfg.primal_tol {
            converged = true;
            break;
        }
        if let Some(e) = rel_err {
            if e <= cfg.reference_rel_tol {
                converged = true;
                break;
            }
            if let Some(patience) = cfg.stall_patience {
                if e < 0.98 * best_err {
                    best_err = e;
                    best_iter = it;
                } else if it - best_iter >= patience {
                    break;
                }
            }
        }
        if let Some(tol) = cfg.rel_tol {
            if let Some(prev) = &prev_w {
                let change = solver.w().axpy(-1.0, prev)?.frobenius_norm();
                let scale = solver.w().frobenius_norm().max(1e-30);
                if change / scale <= tol {
                    converged = true;
                    break;
                }
            }
            prev_w = Some(solver.w().clone());
        }
    }
    let estimate = solver.w().clone();
    let rel_error = match (reference, ref_norm) {
        (Some(x0), Some(nrm)) => Some(estimate.axpy(-1.0, x0)?.frobenius_norm() / nrm),
        _ => None,
    };
    Ok(RecoveryResult {
        estimate,
        rel_error,
        iterations: solver.iterations(),
        converged,
        residual_history,
        rel_error_history,
    })
}

/// Sum-of-nuclear-norms recovery: one unfolding block per mode, unit weights.
pub fn alb_snn(
    op: &dyn LinearMeasurement,
    z: &Array1<f64>,
    dims: &[usize],
    cfg: &AlbConfig,
    reference: Option<&DenseTensor>,
) -> Result<RecoveryResult> {
    let blocks: Vec<Matricization> = (0..dims.len()).map(Matricization::Mode).collect();
    alb_composite(op, z, dims, &blocks, cfg, reference)
}

/// SNN recovery with per-mode weights lambda_i.
pub fn snn_recover(
    op: &dyn LinearMeasurement,
    z: &Array1<f64>,
    dims: &[usize],
    lambda: &[f64],
    cfg: &AlbConfig,
    reference: Option<&DenseTensor>,
) -> Result<RecoveryResult> {
    let blocks: Vec<Matricization> = (0..dims.len()).map(Matricization::Mode).collect();
    let mut cfg = cfg.clone();
    cfg.weights = Some(lambda.to_vec());
    alb_composite(op, z, dims, &blocks, &cfg, reference)
}

/// Parameters of the inexact augmented Lagrangian completion solver.
#[derive(Clone, Debug)]
pub struct AlmConfig {
    /// Initial penalty; default 1.25 / ||P_Omega(M0)||_op.
    pub mu0: Option<f64>,
    /// Penalty growth factor, applied only once the iterate has settled at
    /// the current penalty level.
    pub rho: f64,
    pub max_outer: usize,
    /// Stop when ||P_Omega(M - M0)||_F / ||P_Omega(M0)||_F falls below this.
    pub feas_tol: f64,
    /// The iterate counts as settled when mu * ||M_{k+1} - M_k||_F /
    /// ||P_Omega(M0)||_F drops below this; growing mu any earlier quenches
    /// the shrinkage before the nuclear norm is actually minimized.
    pub eps_mu: f64,
    pub mu_max: f64,
}

impl Default for AlmConfig {
    fn default() -> Self {
        Self { mu0: None, rho: 1.5, max_outer: 600, feas_tol: 1e-7, eps_mu: 1e-3, mu_max: 1e12 }
    }
}

/// Result of a matrix-completion run.
#[derive(Clone, Debug)]
pub struct CompletionResult {
    pub estimate: Array2<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub feasibility_history: Vec<f64>,
}

/// Inexact ALM for  minimize ||M||_*  s.t.  P_Omega(M) = P_Omega(M0).
///
/// `observed` holds the known entries (zeros elsewhere) and `mask[i][j]`
/// marks membership in Omega. Alternates a singular-value shrinkage step on
/// the observed-consistent point plus scaled multiplier with the multiplier
/// update Y <- Y + mu * P_Omega(M0 - M); mu grows geometrically but only
/// after the iterate settles at the current level, so the method keeps
/// descending the nuclear norm instead of merely chasing feasibility.
pub fn alm_nuclear_completion(
    observed: &Array2<f64>,
    mask: &Array2<bool>,
    cfg: &AlmConfig,
) -> Result<CompletionResult> {
    if observed.dim() != mask.dim() {
        return Err(Error::ShapeMismatch(format!(
            "observed {:?} vs mask {:?}",
            observed.dim(),
            mask.dim()
        )));
    }
    if let Some(m) = cfg.mu0 {
        if m <= 0.0 {
            return Err(Error::InvalidArgument(format!("mu0 must be positive, got {m}")));
        }
    }
    let observed_count = mask.iter().filter(|&&b| b).count();
    if observed_count == 0 {
        return Err(Error::InvalidArgument("mask must observe at least one entry".into()));
    }
    let d_norm = observed
        .iter()
        .zip(mask.iter())
        .filter(|(_, &b)| b)
        .map(|(v, _)| v * v)
        .sum::<f64>()
        .sqrt();
    if d_norm == 0.0 {
        // feasible minimizer of the nuclear norm with zero data
        return Ok(CompletionResult {
            estimate: Array2::zeros(observed.dim()),
            iterations: 1,
            converged: true,
            feasibility_history: vec![0.0],
        });
    }
    if observed_count == mask.len() {
        // fully observed: the constraint pins M down
        return Ok(CompletionResult {
            estimate: observed.clone(),
            iterations: 0,
            converged: true,
            feasibility_history: vec![0.0],
        });
    }
    let mut mu = match cfg.mu0 {
        Some(m) => m,
        None => 1.25 / linalg::spectral_norm(observed)?,
    };
    let (nr, nc) = observed.dim();
    let mut m_hat = Array2::<f64>::zeros((nr, nc));
    let mut e = Array2::<f64>::zeros((nr, nc));
    let mut y = Array2::<f64>::zeros((nr, nc));
    let mut feasibility_history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..cfg.max_outer {
        let g = observed - &e + &(&y / mu);
        let m_new = linalg::svt_shrink(&g, 1.0 / mu)?;
        let step_sq: f64 = m_new
            .iter()
            .zip(m_hat.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        m_hat = m_new;
        // E lives on the complement of Omega and absorbs the unobserved part
        for ((i, j), v) in e.indexed_iter_mut() {
            *v = if mask[(i, j)] { 0.0 } else { observed[(i, j)] - m_hat[(i, j)] + y[(i, j)] / mu };
        }
        let mut feas_sq = 0.0;
        for ((i, j), v) in y.indexed_iter_mut() {
            let r = observed[(i, j)] - m_hat[(i, j)] - e[(i, j)];
            *v += mu * r;
            if mask[(i, j)] {
                feas_sq += r * r;
            }
        }
        iterations += 1;
        let feas = feas_sq.sqrt() / d_norm;
        feasibility_history.push(feas);
        let step_rel = step_sq.sqrt() / d_norm;
        let settled = mu * step_rel < cfg.eps_mu;
        if feas <= cfg.feas_tol && settled {
            converged = true;
            break;
        }
        // frozen at a feasible fixed point: nothing left to optimize
        if feas <= cfg.feas_tol && step_rel < 1e-12 && iterations > 1 {
            converged = true;
            break;
        }
        if settled {
            mu = (mu * cfg.rho).min(cfg.mu_max);
        }
    }
    Ok(CompletionResult { estimate: m_hat, iterations, converged, feasibility_history })
}

/// The measurement ensembles the square-norm model knows how to handle.
pub enum Measurement<'a> {
    Sampling(&'a SamplingOperator),
    Gaussian(&'a GaussianOperator),
}

/// Configuration for square-norm recovery, covering both solver paths.
#[derive(Clone, Debug, Default)]
pub struct SquareConfig {
    pub alm: AlmConfig,
    pub alb: AlbConfig,
}

/// Recover a tensor by minimizing the nuclear norm of its balanced square
/// matricization X_[j] (j defaults to floor(K/2)).
///
/// Entry sampling reduces to matrix completion of the reshaped mask and is
/// solved by inexact ALM; Gaussian measurements run the Bregman solver with
/// a single square-matricization block.
pub fn square_recover(
    op: Measurement<'_>,
    z: &Array1<f64>,
    dims: &[usize],
    split: Option<usize>,
    cfg: &SquareConfig,
    reference: Option<&DenseTensor>,
) -> Result<RecoveryResult> {
    let k = dims.len();
    if k < 2 {
        return Err(Error::InvalidArgument("square recovery needs K >= 2".into()));
    }
    let j = split.unwrap_or(k / 2).max(1).min(k - 1);
    match op {
        Measurement::Gaussian(g) => {
            alb_composite(g, z, dims, &[Matricization::Square(j)], &cfg.alb, reference)
        }
        Measurement::Sampling(omega) => {
            let rows: usize = dims[..j].iter().product();
            let cols: usize = dims[j..].iter().product();
            let mut observed = Array2::<f64>::zeros((rows, cols));
            let mut mask = Array2::<bool>::from_elem((rows, cols), false);
            // linear tensor indices coincide with column-major indices of X_[j]
            for (&idx, &v) in omega.indices().iter().zip(z.iter()) {
                observed[(idx % rows, idx / rows)] = v;
                mask[(idx % rows, idx / rows)] = true;
            }
            let res = alm_nuclear_completion(&observed, &mask, &cfg.alm)?;
            let estimate = tensor::square_fold(&res.estimate, dims, j)?;
            let rel_error = reference
                .map(|x0| {
                    let nrm = x0.frobenius_norm().max(f64::MIN_POSITIVE);
                    estimate.axpy(-1.0, x0).map(|d| d.frobenius_norm() / nrm)
                })
                .transpose()?;
            Ok(RecoveryResult {
                estimate,
                rel_error,
                iterations: res.iterations,
                converged: res.converged,
                residual_history: res.feasibility_history,
                rel_error_history: Vec::new(),
            })
        }
    }
}
