//! Dense K-way tensors and their matricizations.
//!
//! Storage is column-major: the first index varies fastest, so the flat
//! data of a tensor is exactly the columnwise vectorization of its mode-1
//! unfolding. Under this convention the balanced square reshaping
//! [`square_reshape`] is a zero-cost reinterpretation of the flat data.

use ndarray::{Array1, Array2, ShapeBuilder};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::{Error, Result};

/// Dense real tensor with `K >= 1` modes.
#[derive(Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl fmt::Debug for DenseTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseTensor(dims={:?}, len={})", self.dims, self.data.len())
    }
}

impl DenseTensor {
    /// Build a tensor from dims and column-major flat data.
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument(format!(
                "tensor dims must be nonempty and positive, got {dims:?}"
            )));
        }
        let n: usize = dims.iter().product();
        if data.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "data length {} does not match dims {:?} (product {})",
                data.len(),
                dims,
                n
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        let n: usize = dims.iter().product();
        Self::new(dims.to_vec(), vec![0.0; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of modes K.
    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    /// Total number of entries N.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Column-major flat data, vec(X).
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn scale_mut(&mut self, alpha: f64) {
        for v in &mut self.data {
            *v *= alpha;
        }
    }

    /// self += alpha * other, without allocating.
    pub fn axpy_mut(&mut self, alpha: f64, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::ShapeMismatch(format!(
                "axpy dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    /// self + alpha * other.
    pub fn axpy(&self, alpha: f64, other: &Self) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::ShapeMismatch(format!(
                "axpy dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + alpha * b)
            .collect();
        Ok(Self { dims: self.dims.clone(), data })
    }

    /// Write as CSV fixture: first line the dims, then one entry per line
    /// in column-major order.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        let dims: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        writeln!(f, "{}", dims.join(","))?;
        for v in &self.data {
            writeln!(f, "{v:.17e}")?;
        }
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        let mut lines = BufReader::new(f).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty tensor file".into()))??;
        let dims: Vec<usize> = header
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("bad dims header: {e}")))?;
        let mut data = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            data.push(
                line.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad entry: {e}")))?,
            );
        }
        Self::new(dims, data)
    }
}

/// Euclidean inner product over flat data.
pub fn inner(x: &DenseTensor, y: &DenseTensor) -> Result<f64> {
    if x.dims != y.dims {
        return Err(Error::ShapeMismatch(format!(
            "inner product dims {:?} vs {:?}",
            x.dims, y.dims
        )));
    }
    Ok(x.data.iter().zip(&y.data).map(|(a, b)| a * b).sum())
}

/// For each linear index p of a tensor with `dims`, the column-major offset
/// of that entry inside the mode-`mode` unfolding (offset = row + col * n_i).
///
/// Column ordering follows the convention that the remaining modes are taken
/// in increasing order, i.e. col = sum_{k != mode} idx_k * J_k with
/// J_k = prod_{m < k, m != mode} n_m.
pub fn unfold_map(dims: &[usize], mode: usize) -> Result<Vec<usize>> {
    let k = dims.len();
    if mode >= k {
        return Err(Error::InvalidArgument(format!(
            "mode {mode} out of range for {k}-way tensor"
        )));
    }
    let n: usize = dims.iter().product();
    let n_i = dims[mode];
    let mut jstride = vec![0usize; k];
    let mut acc = 1usize;
    for m in 0..k {
        if m != mode {
            jstride[m] = acc;
            acc *= dims[m];
        }
    }
    let mut map = Vec::with_capacity(n);
    let mut idx = vec![0usize; k];
    let mut row = 0usize;
    let mut col = 0usize;
    for _ in 0..n {
        map.push(row + col * n_i);
        for m in 0..k {
            idx[m] += 1;
            if m == mode {
                row += 1;
            } else {
                col += jstride[m];
            }
            if idx[m] < dims[m] {
                break;
            }
            idx[m] = 0;
            if m == mode {
                row = 0;
            } else {
                col -= jstride[m] * dims[m];
            }
        }
    }
    Ok(map)
}

/// Mode-`mode` unfolding: an n_i x (N / n_i) matrix whose columns are the
/// mode-`mode` fibers. Modes are 0-based.
pub fn unfold(x: &DenseTensor, mode: usize) -> Result<Array2<f64>> {
    let map = unfold_map(x.dims(), mode)?;
    unfold_with_map(x, mode, &map)
}

/// Unfold using a precomputed [`unfold_map`]; the solver hot loop caches maps.
pub fn unfold_with_map(x: &DenseTensor, mode: usize, map: &[usize]) -> Result<Array2<f64>> {
    let n_i = x.dims[mode];
    let cols = x.len() / n_i;
    let mut flat = vec![0.0; x.len()];
    for (p, &off) in map.iter().enumerate() {
        flat[off] = x.data[p];
    }
    Array2::from_shape_vec((n_i, cols).f(), flat)
        .map_err(|e| Error::ShapeMismatch(e.to_string()))
}

/// Inverse of [`unfold`].
pub fn fold(m: &Array2<f64>, mode: usize, dims: &[usize]) -> Result<DenseTensor> {
    let map = unfold_map(dims, mode)?;
    fold_with_map(m, mode, dims, &map)
}

pub fn fold_with_map(
    m: &Array2<f64>,
    mode: usize,
    dims: &[usize],
    map: &[usize],
) -> Result<DenseTensor> {
    let n: usize = dims.iter().product();
    let n_i = dims[mode];
    if m.nrows() != n_i || m.ncols() != n / n_i {
        return Err(Error::ShapeMismatch(format!(
            "fold expects {}x{} matrix for dims {:?} mode {}, got {}x{}",
            n_i,
            n / n_i,
            dims,
            mode,
            m.nrows(),
            m.ncols()
        )));
    }
    let mut data = vec![0.0; n];
    for (p, &off) in map.iter().enumerate() {
        data[p] = m[(off % n_i, off / n_i)];
    }
    DenseTensor::new(dims.to_vec(), data)
}

/// Mode product A x_mode B: the result C satisfies C_(mode) = B * A_(mode).
pub fn mode_product(a: &DenseTensor, b: &Array2<f64>, mode: usize) -> Result<DenseTensor> {
    if mode >= a.ndim() {
        return Err(Error::InvalidArgument(format!(
            "mode {mode} out of range for {}-way tensor",
            a.ndim()
        )));
    }
    if b.ncols() != a.dims[mode] {
        return Err(Error::ShapeMismatch(format!(
            "mode product: matrix has {} columns, mode {} has length {}",
            b.ncols(),
            mode,
            a.dims[mode]
        )));
    }
    let unfolded = unfold(a, mode)?;
    let product = b.dot(&unfolded);
    let mut new_dims = a.dims.clone();
    new_dims[mode] = b.nrows();
    fold(&product, mode, &new_dims)
}

/// Balanced reshaping X_[j]: the mode-1 unfolding reshaped columnwise into a
/// (prod_{i<j} n_i) x (prod_{i>=j} n_i) matrix. `split` counts leading modes
/// grouped into rows, 1 <= split <= K-1. Zero-cost under column-major storage:
/// the columnwise vectorization of the result is bit-identical to the data.
pub fn square_reshape(x: &DenseTensor, split: usize) -> Result<Array2<f64>> {
    if split == 0 || split >= x.ndim() {
        return Err(Error::InvalidArgument(format!(
            "split index {split} out of range 1..{} for {}-way tensor",
            x.ndim() - 1,
            x.ndim()
        )));
    }
    let rows: usize = x.dims[..split].iter().product();
    let cols: usize = x.dims[split..].iter().product();
    Array2::from_shape_vec((rows, cols).f(), x.data.clone())
        .map_err(|e| Error::ShapeMismatch(e.to_string()))
}

/// Inverse of [`square_reshape`].
pub fn square_fold(m: &Array2<f64>, dims: &[usize], split: usize) -> Result<DenseTensor> {
    if split == 0 || split >= dims.len() {
        return Err(Error::InvalidArgument(format!(
            "split index {split} out of range for dims {dims:?}"
        )));
    }
    let rows: usize = dims[..split].iter().product();
    let cols: usize = dims[split..].iter().product();
    if m.nrows() != rows || m.ncols() != cols {
        return Err(Error::ShapeMismatch(format!(
            "square fold expects {}x{} matrix for dims {:?} split {}, got {}x{}",
            rows,
            cols,
            dims,
            split,
            m.nrows(),
            m.ncols()
        )));
    }
    // t().iter() yields entries of m in column-major order.
    let data: Vec<f64> = m.t().iter().copied().collect();
    DenseTensor::new(dims.to_vec(), data)
}

/// Kronecker product with the standard block layout.
pub fn kron(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    ndarray::linalg::kron(a, b)
}

/// Tucker factorization: a core tensor plus one factor matrix per mode.
#[derive(Clone, Debug)]
pub struct TuckerFactors {
    pub core: DenseTensor,
    pub factors: Vec<Array2<f64>>,
}

impl TuckerFactors {
    pub fn new(core: DenseTensor, factors: Vec<Array2<f64>>) -> Result<Self> {
        if factors.len() != core.ndim() {
            return Err(Error::ShapeMismatch(format!(
                "{} factors for a {}-way core",
                factors.len(),
                core.ndim()
            )));
        }
        for (i, f) in factors.iter().enumerate() {
            if f.ncols() != core.dims()[i] {
                return Err(Error::ShapeMismatch(format!(
                    "factor {} has {} columns, core mode {} has length {}",
                    i,
                    f.ncols(),
                    i,
                    core.dims()[i]
                )));
            }
        }
        Ok(Self { core, factors })
    }

    /// Outer dims (n_1..n_K).
    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.nrows()).collect()
    }

    /// Core dims (r_1..r_K).
    pub fn ranks(&self) -> &[usize] {
        self.core.dims()
    }
}

/// Compose [[C; U_1, ..., U_K]] by sequential mode products.
pub fn tucker_compose(t: &TuckerFactors) -> Result<DenseTensor> {
    let mut out = t.core.clone();
    for (mode, u) in t.factors.iter().enumerate() {
        out = mode_product(&out, u, mode)?;
    }
    Ok(out)
}

/// CP factorization: weights plus one n_k x r matrix of term vectors per mode.
#[derive(Clone, Debug)]
pub struct CpFactors {
    pub weights: Vec<f64>,
    pub vectors: Vec<Array2<f64>>,
}

impl CpFactors {
    pub fn new(weights: Vec<f64>, vectors: Vec<Array2<f64>>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("CP rank must be >= 1".into()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument("CP weights must be finite".into()));
        }
        let r = weights.len();
        for (k, v) in vectors.iter().enumerate() {
            if v.ncols() != r {
                return Err(Error::ShapeMismatch(format!(
                    "mode {} vectors have {} columns, expected rank {}",
                    k,
                    v.ncols(),
                    r
                )));
            }
        }
        Ok(Self { weights, vectors })
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }
}

/// Compose sum_i lambda_i a_i^(1) o ... o a_i^(K); the vectorization is
/// sum_i lambda_i (a_i^(K) kron ... kron a_i^(1)).
pub fn cp_compose(f: &CpFactors, dims: &[usize]) -> Result<DenseTensor> {
    if f.vectors.len() != dims.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} factor modes for dims {:?}",
            f.vectors.len(),
            dims
        )));
    }
    for (k, v) in f.vectors.iter().enumerate() {
        if v.nrows() != dims[k] {
            return Err(Error::ShapeMismatch(format!(
                "mode {} vectors have length {}, dims say {}",
                k,
                v.nrows(),
                dims[k]
            )));
        }
    }
    let n: usize = dims.iter().product();
    let mut data = vec![0.0; n];
    for (i, &w) in f.weights.iter().enumerate() {
        // Accumulate a_i^(K) kron ... kron a_i^(1) mode by mode; with
        // column-major flat data this is exactly the outer-product tensor.
        let mut term: Array1<f64> = f.vectors[0].column(i).to_owned();
        for v in &f.vectors[1..] {
            let a = v.column(i);
            let mut next = Array1::zeros(term.len() * a.len());
            for (q, &aq) in a.iter().enumerate() {
                for (p, &tp) in term.iter().enumerate() {
                    next[q * term.len() + p] = aq * tp;
                }
            }
            term = next;
        }
        for (d, t) in data.iter_mut().zip(term.iter()) {
            *d += w * t;
        }
    }
    DenseTensor::new(dims.to_vec(), data)
}
