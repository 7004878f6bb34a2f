//! Matrix kernels: thin SVD, nuclear/spectral norms, singular-value
//! shrinkage, and seeded random factor generation.
//!
//! All randomness flows through ChaCha8 seeded streams with rand_distr's
//! ziggurat normal sampler, so fixtures and experiments reproduce bit-exactly
//! across platforms.

use ndarray::{Array1, Array2, ShapeBuilder};
use ndarray_linalg::{Eigh, JobSvd, UPLO, QR, SVDDC};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::tensor::DenseTensor;
use crate::{Error, Result};

/// Relative threshold for numerical rank decisions.
pub const DEFAULT_RANK_RTOL: f64 = 1e-9;

/// Thin SVD A = U diag(sigma) V^T with k = min(m, n).
pub struct SvdResult {
    /// m x k.
    pub u: Array2<f64>,
    /// Nonincreasing, nonnegative.
    pub singular_values: Vec<f64>,
    /// n x k.
    pub v: Array2<f64>,
}

impl SvdResult {
    pub fn reconstruct(&self) -> Array2<f64> {
        let k = self.singular_values.len();
        let mut us = self.u.clone();
        for (j, &s) in self.singular_values.iter().enumerate().take(k) {
            us.column_mut(j).mapv_inplace(|x| x * s);
        }
        us.dot(&self.v.t())
    }
}

/// LAPACK divide-and-conquer thin SVD; singular values come back sorted
/// nonincreasing.
pub fn thin_svd(a: &Array2<f64>) -> Result<SvdResult> {
    let (u, s, vt) = a
        .svddc(JobSvd::Some)
        .map_err(|e| Error::Linalg(format!("SVD did not converge: {e}")))?;
    let u = u.ok_or_else(|| Error::Linalg("SVD returned no U".into()))?;
    let vt = vt.ok_or_else(|| Error::Linalg("SVD returned no V^T".into()))?;
    Ok(SvdResult {
        u,
        singular_values: s.to_vec(),
        v: vt.t().to_owned(),
    })
}

pub fn nuclear_norm(a: &Array2<f64>) -> Result<f64> {
    Ok(singular_values(a)?.iter().sum())
}

pub fn spectral_norm(a: &Array2<f64>) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

pub fn singular_values(a: &Array2<f64>) -> Result<Vec<f64>> {
    let (_, s, _) = a
        .svddc(JobSvd::None)
        .map_err(|e| Error::Linalg(format!("SVD did not converge: {e}")))?;
    Ok(s.to_vec())
}

/// Number of singular values above `rtol * sigma_max` (default rtol 1e-9).
pub fn numerical_rank(a: &Array2<f64>, rtol: Option<f64>) -> Result<usize> {
    let rtol = rtol.unwrap_or(DEFAULT_RANK_RTOL);
    let s = singular_values(a)?;
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > rtol * smax).count())
}

/// Singular-value soft thresholding: U diag(max(sigma - tau, 0)) V^T, the
/// proximal operator of tau * nuclear norm.
///
/// Strongly rectangular inputs take a Gram-matrix route: an eigensolve on
/// the short side plus two GEMMs is several times faster than LAPACK's
/// divide-and-conquer SVD on e.g. an 18 x 5832 unfolding, and the squared
/// conditioning only perturbs singular values far below the threshold.
pub fn svt_shrink(a: &Array2<f64>, tau: f64) -> Result<Array2<f64>> {
    if tau < 0.0 {
        return Err(Error::InvalidArgument(format!("negative tau {tau}")));
    }
    let (r, c) = a.dim();
    if r.min(c) * 4 <= r.max(c) {
        return svt_shrink_gram(a, tau);
    }
    let svd = thin_svd(a)?;
    let kept = svd
        .singular_values
        .iter()
        .filter(|&&s| s > tau)
        .count();
    if kept == 0 {
        return Ok(Array2::zeros((a.nrows(), a.ncols())));
    }
    let mut us = svd.u.slice(ndarray::s![.., ..kept]).to_owned();
    for j in 0..kept {
        let s = svd.singular_values[j] - tau;
        us.column_mut(j).mapv_inplace(|x| x * s);
    }
    Ok(us.dot(&svd.v.slice(ndarray::s![.., ..kept]).t()))
}

/// svt_shrink via eigendecomposition of the short-side Gram matrix.
fn svt_shrink_gram(a: &Array2<f64>, tau: f64) -> Result<Array2<f64>> {
    let (r, c) = a.dim();
    let wide = c >= r;
    // G = A A^T (wide) or A^T A (tall); k x k with k = min(r, c)
    let g = if wide { a.dot(&a.t()) } else { a.t().dot(a) };
    let (evals, evecs) = g
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Linalg(format!("eigensolve failed: {e}")))?;
    // eigenvalues come back ascending; sigma_i = sqrt(max(lambda_i, 0))
    let k = evals.len();
    let mut cols = Vec::with_capacity(k);
    for j in (0..k).rev() {
        let sigma = evals[j].max(0.0).sqrt();
        if sigma > tau {
            // shrink factor applied through the Gram eigenvector
            cols.push((j, (sigma - tau) / sigma));
        }
    }
    if cols.is_empty() {
        return Ok(Array2::zeros((r, c)));
    }
    let mut u = Array2::zeros((k, cols.len()));
    let mut uf = Array2::zeros((k, cols.len()));
    for (out, &(j, f)) in cols.iter().enumerate() {
        let col = evecs.column(j);
        u.column_mut(out).assign(&col);
        uf.column_mut(out).assign(&col.mapv(|x| x * f));
    }
    // wide: U diag(f) U^T A; tall: A V diag(f) V^T
    Ok(if wide {
        uf.dot(&u.t().dot(a))
    } else {
        a.dot(&u).dot(&uf.t())
    })
}

/// Deterministic seeded generator used throughout.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// i.i.d. standard normal matrix, filled column by column.
pub fn random_gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = seeded_rng(seed);
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Array2::from_shape_vec((rows, cols).f(), data).expect("shape matches data length")
}

pub fn random_gaussian_vec(len: usize, seed: u64) -> Array1<f64> {
    let mut rng = seeded_rng(seed);
    Array1::from_iter((0..len).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

pub fn random_gaussian_tensor(dims: &[usize], seed: u64) -> Result<DenseTensor> {
    let n: usize = dims.iter().product();
    let mut rng = seeded_rng(seed);
    let data: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    DenseTensor::new(dims.to_vec(), data)
}

/// n x r matrix with orthonormal columns: QR orthogonalization of an i.i.d.
/// standard Gaussian matrix, with signs fixed so diag(R) > 0.
pub fn random_orthonormal(n: usize, r: usize, seed: u64) -> Result<Array2<f64>> {
    if r > n {
        return Err(Error::InvalidArgument(format!(
            "cannot build {n}x{r} orthonormal columns with r > n"
        )));
    }
    let g = random_gaussian_matrix(n, r, seed);
    let (q, rmat) = g
        .qr()
        .map_err(|e| Error::Linalg(format!("QR failed: {e}")))?;
    let mut q = q;
    for j in 0..r {
        if rmat[(j, j)] < 0.0 {
            q.column_mut(j).mapv_inplace(|x| -x);
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn thin_svd_diagonal() {
        let a = array![[3.0, 0.0], [0.0, 1.0]];
        let s = singular_values(&a).unwrap();
        assert_abs_diff_eq!(s[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn thin_svd_reconstructs() {
        let a = random_gaussian_matrix(50, 80, 1);
        let svd = thin_svd(&a).unwrap();
        let diff = (&svd.reconstruct() - &a).iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(diff <= 1e-10, "reconstruction error {diff}");
        // orthonormal factors
        let utu = svd.u.t().dot(&svd.u);
        let vtv = svd.v.t().dot(&svd.v);
        for i in 0..50 {
            for j in 0..50 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(utu[(i, j)], e, epsilon = 1e-12);
                assert_abs_diff_eq!(vtv[(i, j)], e, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn low_rank_product_has_tiny_tail() {
        let a = random_gaussian_matrix(30, 3, 2).dot(&random_gaussian_matrix(3, 40, 3));
        let s = singular_values(&a).unwrap();
        assert!(s[3] / s[0] <= 1e-10);
        assert_eq!(numerical_rank(&a, None).unwrap(), 3);
    }

    #[test]
    fn nuclear_norm_basics() {
        assert_abs_diff_eq!(nuclear_norm(&array![[3.0, 0.0], [0.0, 4.0]]).unwrap(), 7.0, epsilon = 1e-12);
        let q = random_orthonormal(6, 6, 4).unwrap();
        assert_abs_diff_eq!(nuclear_norm(&q).unwrap(), 6.0, epsilon = 1e-10);
    }

    #[test]
    fn norm_ordering() {
        for seed in 0..5 {
            let a = random_gaussian_matrix(7, 9, seed);
            let nuc = nuclear_norm(&a).unwrap();
            let fro = a.iter().map(|v| v * v).sum::<f64>().sqrt();
            let spec = spectral_norm(&a).unwrap();
            assert!(nuc >= fro - 1e-12 && fro >= spec - 1e-12);
        }
    }

    #[test]
    fn nuclear_norm_matches_gram_eigen_oracle() {
        // independent oracle: trace of sqrt(A^T A) via eigenvalues
        let a = random_gaussian_matrix(6, 8, 5);
        let g = a.t().dot(&a);
        let (evals, _) = g.eigh(UPLO::Lower).unwrap();
        let oracle: f64 = evals.iter().map(|&l| l.max(0.0).sqrt()).sum();
        assert_abs_diff_eq!(nuclear_norm(&a).unwrap(), oracle, epsilon = 1e-9);
    }

    #[test]
    fn svt_shrink_diagonal_and_zero_tau() {
        let a = array![[3.0, 0.0], [0.0, 1.0]];
        let s = svt_shrink(&a, 2.0).unwrap();
        assert_abs_diff_eq!(s[(0, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[(1, 1)], 0.0, epsilon = 1e-12);
        let b = random_gaussian_matrix(5, 7, 6);
        let same = svt_shrink(&b, 0.0).unwrap();
        let diff = (&same - &b).iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(diff <= 1e-12);
        assert!(svt_shrink(&b, -1.0).is_err());
    }

    #[test]
    fn svt_is_the_nuclear_prox_on_2x2_grid() {
        // brute force: over diagonal candidates Z = diag(z1, z2) the objective
        // tau ||Z||_* + 0.5 ||Z - A||_F^2 must be minimized by soft thresholding
        let a = array![[2.3, 0.0], [0.0, 0.7]];
        let tau = 1.0;
        let prox = svt_shrink(&a, tau).unwrap();
        let obj = |z1: f64, z2: f64| {
            tau * (z1.abs() + z2.abs())
                + 0.5 * ((z1 - a[(0, 0)]).powi(2) + (z2 - a[(1, 1)]).powi(2))
        };
        let best = obj(prox[(0, 0)], prox[(1, 1)]);
        let mut z1 = -1.0;
        while z1 <= 3.0 {
            let mut z2 = -1.0;
            while z2 <= 3.0 {
                assert!(best <= obj(z1, z2) + 1e-9, "beaten at ({z1}, {z2})");
                z2 += 0.01;
            }
            z1 += 0.01;
        }
    }

    #[test]
    fn svt_gram_paths_match_dgesdd() {
        for (r, c, seed) in [(5usize, 40usize, 7u64), (40, 5, 8), (3, 100, 9)] {
            let a = random_gaussian_matrix(r, c, seed);
            let fast = svt_shrink(&a, 0.5).unwrap();
            // reference through the unconditional SVD route
            let svd = thin_svd(&a).unwrap();
            let mut us = svd.u.clone();
            for j in 0..svd.singular_values.len() {
                let s = (svd.singular_values[j] - 0.5).max(0.0);
                us.column_mut(j).mapv_inplace(|x| x * s);
            }
            let slow = us.dot(&svd.v.t());
            let diff = (&fast - &slow).iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(diff <= 1e-11, "{r}x{c} diff {diff}");
        }
    }

    #[test]
    fn svt_large_tau_gives_zero() {
        let a = random_gaussian_matrix(4, 30, 10);
        let z = svt_shrink(&a, 1e6).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn random_generation_is_deterministic() {
        assert_eq!(random_gaussian_matrix(4, 5, 42), random_gaussian_matrix(4, 5, 42));
        assert_ne!(random_gaussian_matrix(4, 5, 42), random_gaussian_matrix(4, 5, 43));
        let q1 = random_orthonormal(6, 3, 11).unwrap();
        let q2 = random_orthonormal(6, 3, 11).unwrap();
        assert_eq!(q1, q2);
    }

    #[test]
    fn random_orthonormal_has_orthonormal_columns() {
        let q = random_orthonormal(9, 4, 12).unwrap();
        let qtq = q.t().dot(&q);
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(qtq[(i, j)], e, epsilon = 1e-12);
            }
        }
        assert!(random_orthonormal(3, 4, 1).is_err());
    }

    #[test]
    fn gaussian_moments_look_standard() {
        let v = random_gaussian_vec(100_000, 13);
        let mean = v.sum() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (v.len() - 1) as f64;
        // 3 sigma bands for mean and variance of 1e5 standard normals
        assert!(mean.abs() <= 3.0 / (v.len() as f64).sqrt());
        assert!((var - 1.0).abs() <= 3.0 * (2.0 / v.len() as f64).sqrt());
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

        #[test]
        fn prop_svt_never_increases_singular_values(seed in 0u64..500, tau in 0.0f64..2.0) {
            let a = random_gaussian_matrix(4, 6, seed);
            let s_before = singular_values(&a).unwrap();
            let s_after = singular_values(&svt_shrink(&a, tau).unwrap()).unwrap();
            for (b, c) in s_before.iter().zip(&s_after) {
                prop_assert!(*c <= *b + 1e-10);
                prop_assert!((b - c) <= tau + 1e-10);
            }
        }

        #[test]
        fn prop_prox_inequality_random_probes(seed in 0u64..500) {
            // prox optimality against arbitrary competitors
            let a = random_gaussian_matrix(3, 5, seed);
            let tau = 0.8;
            let p = svt_shrink(&a, tau).unwrap();
            let obj = |z: &Array2<f64>| {
                nuclear_norm(z).unwrap() * tau
                    + 0.5 * (z - &a).iter().map(|v| v * v).sum::<f64>()
            };
            let base = obj(&p);
            for probe in 0..5 {
                let z = random_gaussian_matrix(3, 5, seed * 7 + probe + 1);
                prop_assert!(base <= obj(&z) + 1e-9);
            }
        }
    }
}
