//! Measurement operators: dense Gaussian ensembles and entry sampling,
//! behind a single forward/adjoint contract consumed by the solvers.

use ndarray::{Array1, Array2};
use rand::seq::index::sample;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::linalg;
use crate::tensor::DenseTensor;
use crate::{Error, Result};

/// Abstract linear measurement z = G[X] with adjoint G*[z].
///
/// Implementations must satisfy <apply(X), z> = <X, adjoint(z)>.
pub trait LinearMeasurement: Sync {
    /// Input tensor shape.
    fn dims(&self) -> &[usize];
    /// Output dimension m.
    fn num_measurements(&self) -> usize;
    fn apply(&self, x: &DenseTensor) -> Result<Array1<f64>>;
    fn adjoint(&self, z: &Array1<f64>) -> Result<DenseTensor>;
    /// Spectral norm of the operator viewed as an m x N matrix; the Bregman
    /// solver normalizes its dual step by this.
    fn operator_norm(&self) -> f64;
}

/// m tensors with i.i.d. standard normal entries, stored densely as an
/// m x N matrix; row i applied to X is <G_i, X>.
pub struct GaussianOperator {
    dims: Vec<usize>,
    matrix: Array2<f64>,
    op_norm: f64,
    pub seed: u64,
}

impl GaussianOperator {
    pub fn new(dims: &[usize], m: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("need at least one measurement".into()));
        }
        let n: usize = dims.iter().product();
        let matrix = linalg::random_gaussian_matrix(m, n, seed);
        let op_norm = linalg::spectral_norm(&matrix)?;
        Ok(Self { dims: dims.to_vec(), matrix, op_norm, seed })
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }
}

impl LinearMeasurement for GaussianOperator {
    fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn num_measurements(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, x: &DenseTensor) -> Result<Array1<f64>> {
        if x.dims() != self.dims {
            return Err(Error::ShapeMismatch(format!(
                "operator dims {:?}, tensor dims {:?}",
                self.dims,
                x.dims()
            )));
        }
        let v = Array1::from(x.data().to_vec());
        Ok(self.matrix.dot(&v))
    }

    fn adjoint(&self, z: &Array1<f64>) -> Result<DenseTensor> {
        if z.len() != self.matrix.nrows() {
            return Err(Error::ShapeMismatch(format!(
                "adjoint input length {}, operator has m = {}",
                z.len(),
                self.matrix.nrows()
            )));
        }
        let v = self.matrix.t().dot(z);
        DenseTensor::new(self.dims.clone(), v.to_vec())
    }

    fn operator_norm(&self) -> f64 {
        self.op_norm
    }
}

/// Entry-sampling operator P_Omega: a uniform fixed-size subset of the
/// linear (column-major) indices. apply gathers observed entries, adjoint
/// zero-fills the complement.
pub struct SamplingOperator {
    dims: Vec<usize>,
    indices: Vec<usize>,
    pub seed: u64,
}

impl SamplingOperator {
    /// Observe round(rho * N) entries chosen uniformly without replacement.
    pub fn new(dims: &[usize], rho: f64, seed: u64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "observation ratio must be in (0, 1], got {rho}"
            )));
        }
        let n: usize = dims.iter().product();
        let m = ((rho * n as f64).round() as usize).clamp(1, n);
        let mut rng = linalg::seeded_rng(seed);
        let mut indices = sample(&mut rng, n, m).into_vec();
        indices.sort_unstable();
        Ok(Self { dims: dims.to_vec(), indices, seed })
    }

    pub fn from_indices(dims: &[usize], mut indices: Vec<usize>) -> Result<Self> {
        let n: usize = dims.iter().product();
        indices.sort_unstable();
        indices.dedup();
        if indices.is_empty() || *indices.last().unwrap() >= n {
            return Err(Error::InvalidArgument(
                "indices must be nonempty and in range".into(),
            ));
        }
        Ok(Self { dims: dims.to_vec(), indices, seed: 0 })
    }

    /// Sorted linear indices of the observed entries.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn observation_ratio(&self) -> f64 {
        let n: usize = self.dims.iter().product();
        self.indices.len() as f64 / n as f64
    }

    /// One index per line, sorted; a trial is fully replayable from this.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        for i in &self.indices {
            writeln!(f, "{i}")?;
        }
        Ok(())
    }

    pub fn read_csv(dims: &[usize], path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        let indices = BufReader::new(f)
            .lines()
            .map(|l| {
                l.map_err(Error::from).and_then(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|e| Error::Parse(format!("bad index: {e}")))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_indices(dims, indices)
    }
}

impl LinearMeasurement for SamplingOperator {
    fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn num_measurements(&self) -> usize {
        self.indices.len()
    }

    fn apply(&self, x: &DenseTensor) -> Result<Array1<f64>> {
        if x.dims() != self.dims {
            return Err(Error::ShapeMismatch(format!(
                "operator dims {:?}, tensor dims {:?}",
                self.dims,
                x.dims()
            )));
        }
        let data = x.data();
        Ok(Array1::from_iter(self.indices.iter().map(|&i| data[i])))
    }

    fn adjoint(&self, z: &Array1<f64>) -> Result<DenseTensor> {
        if z.len() != self.indices.len() {
            return Err(Error::ShapeMismatch(format!(
                "adjoint input length {}, |Omega| = {}",
                z.len(),
                self.indices.len()
            )));
        }
        let n: usize = self.dims.iter().product();
        let mut data = vec![0.0; n];
        for (&i, &v) in self.indices.iter().zip(z.iter()) {
            data[i] = v;
        }
        DenseTensor::new(self.dims.clone(), data)
    }

    fn operator_norm(&self) -> f64 {
        1.0
    }
}

/// Zero-fill every entry outside Omega; idempotent masking.
pub fn project_omega(x: &DenseTensor, omega: &SamplingOperator) -> Result<DenseTensor> {
    omega.adjoint(&omega.apply(x)?)
}
