//! Sample-complexity formulas and the convex-geometry verification toolkit:
//! circular cones, statistical dimension estimation, kappa lower bounds, and
//! the cos^2(theta) brackets for the standard structure-inducing norms.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::tensor::{self, DenseTensor, TuckerFactors};
use crate::{Error, Result};

/// Measurements sufficient for the nonconvex vector-rank program to recover
/// every Tucker-rank-(r,...,r) tensor: (2r)^K + 2nrK + 1, exact integer
/// arithmetic.
pub fn nonconvex_sample_bound(n: u64, r: u64, k: u32) -> u128 {
    if r == 0 {
        return 1;
    }
    (2 * r as u128).pow(k) + 2 * n as u128 * r as u128 * k as u128 + 1
}

/// Constant-free exponent of the square-norm sufficiency bound:
/// r^floor(K/2) * n^ceil(K/2).
pub fn square_sample_exponent(n: u64, r: u64, k: u32) -> f64 {
    let lo = k / 2;
    let hi = k - lo;
    ((r as u128).pow(lo) * (n as u128).pow(hi)) as f64
}

/// Composite-norm measurement lower-bound scale for a signal with several
/// structures: kappa = min_i n ||x0||_(i)^2 / (L_i^2 ||x0||_2^2), where
/// each norm is L_i-Lipschitz with respect to the Euclidean norm and n is
/// the ambient dimension.
pub fn kappa(x0: &[f64], norms: &[(&dyn Fn(&[f64]) -> f64, f64)]) -> Result<f64> {
    let x_sq: f64 = x0.iter().map(|v| v * v).sum();
    if x_sq == 0.0 {
        return Err(Error::InvalidArgument("kappa undefined at the zero signal".into()));
    }
    if norms.is_empty() {
        return Err(Error::InvalidArgument("kappa needs at least one norm".into()));
    }
    let n = x0.len() as f64;
    let mut best = f64::INFINITY;
    for (norm, lip) in norms {
        if *lip <= 0.0 {
            return Err(Error::InvalidArgument("Lipschitz constant must be positive".into()));
        }
        let v = norm(x0);
        best = best.min(n * v * v / (lip * lip * x_sq));
    }
    Ok(best)
}

/// Specialization of [`kappa`] to the K unfolding nuclear norms. For a cubic
/// tensor this is min_i ||X_(i)||_*^2 / ||X||_F^2 * n^(K-1); non-cubic shapes
/// use Lipschitz constants L_i = sqrt(min(n_i, N/n_i)).
pub fn kappa_tensor_snn(x: &DenseTensor) -> Result<f64> {
    let fro_sq = {
        let f = x.frobenius_norm();
        if f == 0.0 {
            return Err(Error::InvalidArgument("kappa undefined at the zero tensor".into()));
        }
        f * f
    };
    let n_total = x.len() as f64;
    let mut best = f64::INFINITY;
    for mode in 0..x.ndim() {
        let unf = tensor::unfold(x, mode)?;
        let nuc = linalg::nuclear_norm(&unf)?;
        let lip_sq = unf.nrows().min(unf.ncols()) as f64;
        best = best.min(n_total * nuc * nuc / (lip_sq * fro_sq));
    }
    Ok(best)
}

/// Outcome of the failure-probability bound for composite-norm recovery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FailureBound {
    /// Upper bound (clamped to 1) on the probability that x0 is the unique
    /// solution, valid when m <= kappa - 2.
    Bound(f64),
    /// Precondition m <= kappa - 2 (with kappa > 2) does not hold.
    Vacuous,
}

/// 4 exp(-(kappa - m - 2)^2 / (16 (kappa - 2))), clamped to 1.
pub fn snn_failure_bound(m: f64, kappa: f64) -> FailureBound {
    if kappa <= 2.0 || m > kappa - 2.0 {
        return FailureBound::Vacuous;
    }
    let num = (kappa - m - 2.0).powi(2);
    FailureBound::Bound((4.0 * (-num / (16.0 * (kappa - 2.0))).exp()).min(1.0))
}

/// Upper bound on the statistical dimension of a circular cone with angle
/// theta in ambient dimension n: n sin^2(theta) + 2.
pub fn circ_sd_bound(n: usize, theta: f64) -> f64 {
    let s = theta.sin();
    n as f64 * s * s + 2.0
}

/// Circular cone circ(axis, theta): all vectors within angle theta of axis.
#[derive(Clone, Debug)]
pub struct CircularConeSpec {
    axis: Array1<f64>,
    angle: f64,
}

impl CircularConeSpec {
    /// Axis is normalized; theta must lie in (0, pi/2).
    pub fn new(axis: Array1<f64>, angle: f64) -> Result<Self> {
        if !(angle > 0.0 && angle < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidArgument(format!(
                "cone angle must be in (0, pi/2), got {angle}"
            )));
        }
        let norm = axis.dot(&axis).sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("cone axis must be nonzero".into()));
        }
        Ok(Self { axis: axis / norm, angle })
    }

    pub fn dim(&self) -> usize {
        self.axis.len()
    }

    pub fn axis(&self) -> &Array1<f64> {
        &self.axis
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// The polar of circ(x, theta) is circ(-x, pi/2 - theta).
    pub fn polar(&self) -> Self {
        Self {
            axis: self.axis.mapv(|v| -v),
            angle: std::f64::consts::FRAC_PI_2 - self.angle,
        }
    }

    /// Membership check up to a small angular slack.
    pub fn contains(&self, v: &Array1<f64>, slack: f64) -> bool {
        let norm = v.dot(v).sqrt();
        if norm == 0.0 {
            return true;
        }
        self.axis.dot(v) / norm >= self.angle.cos() - slack
    }
}

/// Euclidean projection onto a circular cone.
///
/// With alpha = <g, axis>, w = g - alpha * axis, beta = ||w||:
/// inside the cone (beta <= alpha tan theta) the point is returned as is;
/// with t = alpha cos theta + beta sin theta, the projection is zero when
/// t <= 0 (the point lies in the polar cone) and otherwise equals
/// t (cos theta * axis + sin theta * w / beta). Satisfies the Moreau identity.
pub fn project_circular_cone(g: &Array1<f64>, cone: &CircularConeSpec) -> Result<Array1<f64>> {
    if g.len() != cone.dim() {
        return Err(Error::ShapeMismatch(format!(
            "vector length {} vs cone dimension {}",
            g.len(),
            cone.dim()
        )));
    }
    let theta = cone.angle;
    let alpha = g.dot(&cone.axis);
    let w = g - &(alpha * &cone.axis);
    let beta = w.dot(&w).sqrt();
    if beta <= alpha * theta.tan() {
        return Ok(g.clone());
    }
    let t = alpha * theta.cos() + beta * theta.sin();
    if t <= 0.0 {
        return Ok(Array1::zeros(g.len()));
    }
    Ok(t * (theta.cos() * &cone.axis + theta.sin() / beta * &w))
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Monte-Carlo estimate of the statistical dimension delta(C): the expected
/// squared norm of the projection of a standard Gaussian vector onto C.
pub fn estimate_statistical_dimension(
    cone: &CircularConeSpec,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let mut rng = linalg::seeded_rng(seed);
    use rand::Rng;
    let n = cone.dim();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let g = Array1::from_iter(
            (0..n).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)),
        );
        let p = project_circular_cone(&g, cone)?;
        let v = p.dot(&p);
        sum += v;
        sum_sq += v * v;
    }
    let mean = sum / samples as f64;
    let var = (sum_sq - samples as f64 * mean * mean) / (samples as f64 - 1.0);
    Ok(McEstimate {
        mean,
        std_error: (var.max(0.0) / samples as f64).sqrt(),
        samples,
    })
}

/// Which structure-inducing norm a cos^2(theta) bracket refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// l1 norm of a vector (1-way tensor).
    L1,
    /// Sum of column l2 norms of a matrix.
    ColumnGroup,
    /// Matrix nuclear norm.
    Nuclear,
    /// Sum of nuclear norms of all unfoldings.
    SnnTensor,
    /// Nuclear norm of the balanced square matricization.
    SquareTensor,
}

/// cos^2(theta) of the circular cone containing the subdifferential, with
/// the admissible range implied by the signal's measured complexity.
#[derive(Debug, Clone, Copy)]
pub struct Cos2Bracket {
    pub cos2: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Cos2Bracket {
    pub fn contains(&self, slack: f64) -> bool {
        self.cos2 >= self.lower - slack && self.cos2 <= self.upper + slack
    }
}

/// Compute cos^2(theta) = ||x0||^2_norm / (L^2 ||x0||_2^2) for the given
/// norm, along with its admissible bracket. The complexity measure (support
/// size, number of nonzero columns, rank) is measured from the signal.
pub fn table1_cos2(x0: &DenseTensor, kind: NormKind) -> Result<Cos2Bracket> {
    let fro = x0.frobenius_norm();
    if fro == 0.0 {
        return Err(Error::InvalidArgument("cos^2 undefined at the zero signal".into()));
    }
    let fro_sq = fro * fro;
    match kind {
        NormKind::L1 => {
            if x0.ndim() != 1 {
                return Err(Error::InvalidArgument("l1 bracket expects a vector".into()));
            }
            let n = x0.len() as f64;
            let l1: f64 = x0.data().iter().map(|v| v.abs()).sum();
            let k = x0.data().iter().filter(|v| **v != 0.0).count() as f64;
            Ok(Cos2Bracket { cos2: l1 * l1 / (n * fro_sq), lower: 1.0 / n, upper: k / n })
        }
        NormKind::ColumnGroup => {
            if x0.ndim() != 2 {
                return Err(Error::InvalidArgument("column-group bracket expects a matrix".into()));
            }
            let m = tensor::unfold(x0, 0)?;
            let n2 = m.ncols() as f64;
            let mut group = 0.0;
            let mut nonzero_cols = 0usize;
            for col in m.columns() {
                let nrm = col.dot(&col).sqrt();
                group += nrm;
                if nrm > 0.0 {
                    nonzero_cols += 1;
                }
            }
            Ok(Cos2Bracket {
                cos2: group * group / (n2 * fro_sq),
                lower: 1.0 / n2,
                upper: nonzero_cols as f64 / n2,
            })
        }
        NormKind::Nuclear => {
            if x0.ndim() != 2 {
                return Err(Error::InvalidArgument("nuclear bracket expects a matrix".into()));
            }
            let m = tensor::unfold(x0, 0)?;
            let lip_sq = m.nrows().min(m.ncols()) as f64;
            let nuc = linalg::nuclear_norm(&m)?;
            let r = linalg::numerical_rank(&m, None)? as f64;
            Ok(Cos2Bracket {
                cos2: nuc * nuc / (lip_sq * fro_sq),
                lower: 1.0 / lip_sq,
                upper: r / lip_sq,
            })
        }
        NormKind::SnnTensor => {
            let mut cos2 = f64::INFINITY;
            let mut lower: f64 = 1.0;
            let mut upper = f64::INFINITY;
            for mode in 0..x0.ndim() {
                let m = tensor::unfold(x0, mode)?;
                let lip_sq = m.nrows().min(m.ncols()) as f64;
                let nuc = linalg::nuclear_norm(&m)?;
                let r = linalg::numerical_rank(&m, None)? as f64;
                cos2 = cos2.min(nuc * nuc / (lip_sq * fro_sq));
                lower = lower.min(1.0 / lip_sq);
                upper = upper.min(r / lip_sq);
            }
            Ok(Cos2Bracket { cos2, lower, upper })
        }
        NormKind::SquareTensor => {
            let k = x0.ndim();
            if k < 2 {
                return Err(Error::InvalidArgument("square bracket expects K >= 2".into()));
            }
            let j = k / 2;
            let m = tensor::square_reshape(x0, j)?;
            let lip_sq = m.nrows().min(m.ncols()) as f64;
            let nuc = linalg::nuclear_norm(&m)?;
            let mut row_rank = 1usize;
            let mut col_rank = 1usize;
            for mode in 0..k {
                let r = linalg::numerical_rank(&tensor::unfold(x0, mode)?, None)?;
                if mode < j {
                    row_rank = row_rank.saturating_mul(r);
                } else {
                    col_rank = col_rank.saturating_mul(r);
                }
            }
            Ok(Cos2Bracket {
                cos2: nuc * nuc / (lip_sq * fro_sq),
                lower: 1.0 / lip_sq,
                upper: row_rank.min(col_rank) as f64 / lip_sq,
            })
        }
    }
}

/// The worst-case instance of the SNN lower bound: a cubic Tucker tensor
/// whose core has ones on the superdiagonal (C_{i...i} = 1) and random
/// orthonormal factors. Its kappa equals r * n^(K-1).
pub fn supersymmetric_instance(n: usize, r: usize, k: usize, seed: u64) -> Result<TuckerFactors> {
    if r > n {
        return Err(Error::InvalidArgument(format!("need r <= n, got r={r}, n={n}")));
    }
    let mut data = vec![0.0; r.pow(k as u32)];
    let stride: usize = (0..k).map(|p| r.pow(p as u32)).sum();
    for i in 0..r {
        data[i * stride] = 1.0;
    }
    let core = DenseTensor::new(vec![r; k], data)?;
    let factors = (0..k)
        .map(|i| linalg::random_orthonormal(n, r, seed.wrapping_add(i as u64 + 1)))
        .collect::<Result<Vec<_>>>()?;
    TuckerFactors::new(core, factors)
}

/// A cubic Tucker instance whose square matricization has a flat spectrum of
/// full rank r^floor(K/2): the core's balanced reshaping is a partial
/// isometry. Achieves the upper endpoint of the square-norm cos^2 bracket.
pub fn balanced_core_instance(n: usize, r: usize, k: usize, seed: u64) -> Result<TuckerFactors> {
    if r > n {
        return Err(Error::InvalidArgument(format!("need r <= n, got r={r}, n={n}")));
    }
    let j = k / 2;
    let rows: usize = r.pow(j as u32);
    let cols: usize = r.pow((k - j) as u32);
    let mut m = ndarray::Array2::<f64>::zeros((rows, cols));
    for i in 0..rows.min(cols) {
        m[(i, i)] = 1.0;
    }
    let core = tensor::square_fold(&m, &vec![r; k], j)?;
    let factors = (0..k)
        .map(|i| linalg::random_orthonormal(n, r, seed.wrapping_add(i as u64 + 1)))
        .collect::<Result<Vec<_>>>()?;
    TuckerFactors::new(core, factors)
}

/// The three sample-complexity scales for a cubic rank-(r,...,r) instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub n: u64,
    pub r: u64,
    pub k: u32,
    /// (2r)^K + 2nrK + 1, exact.
    pub nonconvex_bound: u128,
    /// r * n^(K-1): the SNN lower-bound scale at the worst-case instance.
    pub kappa: f64,
    /// r^floor(K/2) * n^ceil(K/2), constant-free.
    pub square_exponent_bound: f64,
    pub notes: String,
}

impl ComplexityReport {
    pub fn compute(n: u64, r: u64, k: u32) -> Self {
        let kappa = r as f64 * (n as f64).powi(k as i32 - 1);
        Self {
            n,
            r,
            k,
            nonconvex_bound: nonconvex_sample_bound(n, r, k),
            kappa,
            square_exponent_bound: square_sample_exponent(n, r, k),
            notes: "kappa evaluated at the supersymmetric-core worst case; \
                    square bound reported without its numerical constant"
                .into(),
        }
    }
}
