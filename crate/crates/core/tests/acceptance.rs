//! End-to-end acceptance gate. Each test prints a single PASS/FAIL line for
//! its criterion; the suite doubles as a quick health report:
//!
//!   cargo test --test acceptance -- --nocapture
//!
//! Criteria 8 and 9 run the full desk-scale sweeps and dominate the runtime
//! (minutes, not seconds).

use ndarray::{Array1, Array2};
use rand::Rng;
use std::time::Instant;

use tensorec_core::experiment::{
    generate_completion_instance, mix_seed, replay_completion_trial, run_gaussian_sweep,
    run_phase_transition, ExperimentSpec, GaussianSweepSpec, Model, ModelKind,
};
use tensorec_core::geometry::{
    circ_sd_bound, estimate_statistical_dimension, kappa_tensor_snn, nonconvex_sample_bound,
    project_circular_cone, square_sample_exponent, supersymmetric_instance, table1_cos2,
    CircularConeSpec, NormKind,
};
use tensorec_core::linalg::{
    self, random_gaussian_matrix, random_gaussian_tensor, random_orthonormal, seeded_rng,
};
use tensorec_core::measure::{LinearMeasurement, SamplingOperator};
use tensorec_core::solver::{AlbConfig, AlbSolver, Matricization};
use tensorec_core::tensor::{
    cp_compose, fold, kron, square_reshape, tucker_compose, unfold, CpFactors, DenseTensor,
    TuckerFactors,
};

fn report(criterion: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion:2}: {} — {name} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {name} ({detail})");
}

/// Random Tucker instance with K in {3,4,5}, n <= 6, ranks <= 3.
fn random_tucker(rng: &mut impl Rng, idx: u64) -> TuckerFactors {
    let k = 3 + (rng.gen::<u32>() % 3) as usize;
    let dims: Vec<usize> = (0..k).map(|_| 2 + (rng.gen::<u32>() % 5) as usize).collect();
    let ranks: Vec<usize> =
        dims.iter().map(|&n| 1 + (rng.gen::<u32>() as usize % n.min(3))).collect();
    let core = random_gaussian_tensor(&ranks, mix_seed(900, &[idx, 0])).unwrap();
    let factors: Vec<Array2<f64>> = ranks
        .iter()
        .zip(&dims)
        .enumerate()
        .map(|(i, (&r, &n))| random_orthonormal(n, r, mix_seed(900, &[idx, 1 + i as u64])).unwrap())
        .collect();
    TuckerFactors::new(core, factors).unwrap()
}

/// Random CP instance over the same size range.
fn random_cp(rng: &mut impl Rng, idx: u64) -> (CpFactors, Vec<usize>) {
    let k = 3 + (rng.gen::<u32>() % 3) as usize;
    let dims: Vec<usize> = (0..k).map(|_| 2 + (rng.gen::<u32>() % 5) as usize).collect();
    let r = 1 + (rng.gen::<u32>() % 3) as usize;
    let weights: Vec<f64> = (0..r).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
    let vectors: Vec<Array2<f64>> = dims
        .iter()
        .enumerate()
        .map(|(i, &n)| random_gaussian_matrix(n, r, mix_seed(901, &[idx, i as u64])))
        .collect();
    (CpFactors::new(weights, vectors).unwrap(), dims)
}

/// kron(a_K, ..., a_1) of a list given in mode order.
fn kron_reversed(mats: &[Array2<f64>]) -> Array2<f64> {
    let mut it = mats.iter().rev();
    let first = it.next().unwrap().clone();
    it.fold(first, |acc, m| kron(&acc, m))
}

#[test]
fn criterion_01_square_reshape_kronecker_identities() {
    let start = Instant::now();
    let mut rng = seeded_rng(801);
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    for idx in 0..100u64 {
        // Tucker: X_[j] = (U_j kron ... kron U_1) C_[j] (U_K kron ... kron U_{j+1})^T
        let t = random_tucker(&mut rng, idx);
        let x = tucker_compose(&t).unwrap();
        let c = &t.core;
        let k = t.factors.len();
        for j in 1..k {
            let left = kron_reversed(&t.factors[..j]);
            let right = kron_reversed(&t.factors[j..]);
            let expect = left.dot(&square_reshape(c, j).unwrap()).dot(&right.t());
            let got = square_reshape(&x, j).unwrap();
            let err = (&got - &expect).iter().map(|v| v * v).sum::<f64>().sqrt()
                / x.frobenius_norm();
            worst = worst.max(err);
            checked += 1;
        }
        // CP: X_[j] = sum_l w_l (u_j kron ... kron u_1)(u_K kron ... kron u_{j+1})^T
        let (cp, dims) = random_cp(&mut rng, idx);
        let x = cp_compose(&cp, &dims).unwrap();
        for j in 1..dims.len() {
            let rows: usize = dims[..j].iter().product();
            let cols: usize = dims[j..].iter().product();
            let mut expect = Array2::<f64>::zeros((rows, cols));
            for (l, &w) in cp.weights.iter().enumerate() {
                let cols_l: Vec<Array2<f64>> = cp
                    .vectors
                    .iter()
                    .map(|v| {
                        let col = v.column(l);
                        Array2::from_shape_fn((v.nrows(), 1), |(i, _)| col[i])
                    })
                    .collect();
                let u = kron_reversed(&cols_l[..j]);
                let v = kron_reversed(&cols_l[j..]);
                expect = expect + w * u.dot(&v.t());
            }
            let got = square_reshape(&x, j).unwrap();
            let err = (&got - &expect).iter().map(|v| v * v).sum::<f64>().sqrt()
                / x.frobenius_norm();
            worst = worst.max(err);
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-10 && checked >= 200 && elapsed.as_secs_f64() < 10.0;
    report(
        1,
        "square reshaping matches explicit Kronecker forms",
        pass,
        &format!("{checked} reshapes, worst rel err {worst:.2e}, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_02_square_reshape_rank_bounds() {
    let start = Instant::now();
    let mut rng = seeded_rng(802);
    let mut bound_ok = true;
    let mut tucker_total = 0usize;
    let mut tucker_equal = 0usize;
    for idx in 0..100u64 {
        let t = random_tucker(&mut rng, idx);
        let ranks = t.ranks().to_vec();
        let x = tucker_compose(&t).unwrap();
        for j in 1..ranks.len() {
            let cap = ranks[..j]
                .iter()
                .product::<usize>()
                .min(ranks[j..].iter().product::<usize>());
            let rank =
                linalg::numerical_rank(&square_reshape(&x, j).unwrap(), Some(1e-9)).unwrap();
            bound_ok &= rank <= cap;
            tucker_total += 1;
            tucker_equal += usize::from(rank == cap);
        }
        let (cp, dims) = random_cp(&mut rng, idx);
        let x = cp_compose(&cp, &dims).unwrap();
        for j in 1..dims.len() {
            let rank =
                linalg::numerical_rank(&square_reshape(&x, j).unwrap(), Some(1e-9)).unwrap();
            bound_ok &= rank <= cp.rank();
        }
    }
    let frac = tucker_equal as f64 / tucker_total as f64;
    let elapsed = start.elapsed();
    // the rank caps min(prod r_{i<=j}, prod r_{i>j}) can exceed the ambient
    // matrix rank only when some prod r exceeds the matching dim product;
    // our corpus keeps r_i <= n_i so equality is the generic outcome
    let pass = bound_ok && frac >= 0.95 && elapsed.as_secs_f64() < 30.0;
    report(
        2,
        "square reshaping rank caps with generic equality",
        pass,
        &format!("equality on {frac:.3} of Tucker reshapes, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_03_factor_perturbation_inequality() {
    let start = Instant::now();
    let mut rng = seeded_rng(803);
    let mut violations = 0usize;
    let mut min_slack = f64::INFINITY;
    for idx in 0..1000u64 {
        let k = 3 + (rng.gen::<u32>() % 3) as usize;
        let dims: Vec<usize> = (0..k).map(|_| 2 + (rng.gen::<u32>() % 4) as usize).collect();
        let ranks: Vec<usize> =
            dims.iter().map(|&n| 1 + (rng.gen::<u32>() as usize % n.min(3))).collect();
        let unit_core = |seed: u64| {
            let mut c = random_gaussian_tensor(&ranks, seed).unwrap();
            let nrm = c.frobenius_norm();
            c.scale_mut(1.0 / nrm);
            c
        };
        let c = unit_core(mix_seed(30, &[idx, 0]));
        let c2 = if idx % 2 == 0 {
            unit_core(mix_seed(30, &[idx, 1]))
        } else {
            // nearby perturbation instead of an independent draw
            let mut p = c.clone();
            let noise = random_gaussian_tensor(&ranks, mix_seed(30, &[idx, 2])).unwrap();
            p.axpy_mut(1e-3, &noise).unwrap();
            let nrm = p.frobenius_norm();
            p.scale_mut(1.0 / nrm);
            p
        };
        let us: Vec<Array2<f64>> = ranks
            .iter()
            .zip(&dims)
            .enumerate()
            .map(|(i, (&r, &n))| {
                random_orthonormal(n, r, mix_seed(31, &[idx, i as u64])).unwrap()
            })
            .collect();
        let us2: Vec<Array2<f64>> = ranks
            .iter()
            .zip(&dims)
            .enumerate()
            .map(|(i, (&r, &n))| {
                random_orthonormal(n, r, mix_seed(32, &[idx, i as u64])).unwrap()
            })
            .collect();
        let t1 = tucker_compose(&TuckerFactors::new(c.clone(), us.clone()).unwrap()).unwrap();
        let t2 = tucker_compose(&TuckerFactors::new(c2.clone(), us2.clone()).unwrap()).unwrap();
        let lhs = t1.axpy(-1.0, &t2).unwrap().frobenius_norm();
        let mut rhs = c.axpy(-1.0, &c2).unwrap().frobenius_norm();
        for (u, u2) in us.iter().zip(&us2) {
            rhs += linalg::spectral_norm(&(u - u2)).unwrap();
        }
        let slack = rhs - lhs;
        min_slack = min_slack.min(slack);
        if slack < -1e-12 {
            violations += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = violations == 0 && elapsed.as_secs_f64() < 10.0;
    report(
        3,
        "composition perturbation inequality on 1000 factor pairs",
        pass,
        &format!("min slack {min_slack:.2e}, {violations} violations, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_04_circular_cone_geometry() {
    let start = Instant::now();
    // Moreau identity g = P_C(g) + P_{C_polar}(g) on 10^4 random probes
    let mut rng = seeded_rng(804);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let n = 2 + (rng.gen::<u32>() % 199) as usize;
        let axis = Array1::from_iter(
            (0..n).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)),
        );
        let theta = 0.05 + rng.gen::<f64>() * (std::f64::consts::FRAC_PI_2 - 0.1);
        let cone = CircularConeSpec::new(axis, theta).unwrap();
        let g = Array1::from_iter(
            (0..n).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)),
        );
        let p = project_circular_cone(&g, &cone).unwrap();
        let q = project_circular_cone(&g, &cone.polar()).unwrap();
        let resid = (&g - &p - &q).mapv(|v| v * v).sum().sqrt();
        let scale = g.dot(&g).sqrt().max(1.0);
        worst = worst.max(resid / scale);
    }
    let moreau_ok = worst <= 1e-10;

    // Monte-Carlo statistical dimension against the n sin^2 + 2 bound
    let n = 100usize;
    let axis = Array1::from(vec![1.0; n]);
    let mut mc_ok = true;
    let mut split_ok = true;
    for (i, theta) in [
        std::f64::consts::FRAC_PI_6,
        std::f64::consts::FRAC_PI_4,
        std::f64::consts::FRAC_PI_3,
    ]
    .iter()
    .enumerate()
    {
        let cone = CircularConeSpec::new(axis.clone(), *theta).unwrap();
        let est = estimate_statistical_dimension(&cone, 100_000, 40 + i as u64).unwrap();
        mc_ok &= est.mean <= circ_sd_bound(n, *theta) + 3.0 * est.std_error;
        let polar = estimate_statistical_dimension(&cone.polar(), 100_000, 50 + i as u64).unwrap();
        let se = 3.0 * (est.std_error + polar.std_error);
        split_ok &= (est.mean + polar.mean - n as f64).abs() <= se;
    }
    let elapsed = start.elapsed();
    let pass = moreau_ok && mc_ok && split_ok && elapsed.as_secs_f64() < 60.0;
    report(
        4,
        "Moreau identity, statistical-dimension bound, polar split",
        pass,
        &format!(
            "worst Moreau residual {worst:.2e}, bound ok {mc_ok}, split ok {split_ok}, {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_05_sample_complexity_formulas() {
    let t = supersymmetric_instance(10, 2, 4, 5).unwrap();
    let x = tucker_compose(&t).unwrap();
    let kappa = kappa_tensor_snn(&x).unwrap();
    let kappa_ok = (kappa - 2000.0).abs() / 2000.0 <= 1e-9;
    let nc = nonconvex_sample_bound(10, 2, 4);
    let sq = square_sample_exponent(10, 2, 4);
    let pass = kappa_ok && nc == 417 && sq == 400.0;
    report(
        5,
        "kappa and sample-count formulas at (n=10, r=2, K=4)",
        pass,
        &format!("kappa {kappa:.6}, nonconvex {nc}, square exponent {sq}"),
    );
}

#[test]
fn criterion_06_cos2_brackets() {
    let start = Instant::now();
    let mut rng = seeded_rng(806);
    let mut all_in = true;

    // l1 on sparse vectors
    for idx in 0..100u64 {
        let n = 10 + (rng.gen::<u32>() % 90) as usize;
        let k = 1 + (rng.gen::<u32>() as usize % n);
        let mut data = vec![0.0; n];
        for slot in 0..k {
            data[slot] = rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        let _ = idx;
        let x = DenseTensor::new(vec![n], data).unwrap();
        all_in &= table1_cos2(&x, NormKind::L1).unwrap().contains(1e-9);
    }
    // equal-magnitude k-sparse hits the upper endpoint k/n
    let endpoint = {
        let mut data = vec![0.0; 50];
        for v in data.iter_mut().take(7) {
            *v = if rand::random::<bool>() { 1.0 } else { -1.0 };
        }
        let b = table1_cos2(&DenseTensor::new(vec![50], data).unwrap(), NormKind::L1).unwrap();
        (b.cos2 - b.upper).abs() <= 1e-12 && (b.upper - 7.0 / 50.0).abs() <= 1e-12
    };
    all_in &= endpoint;

    // column-sparse matrices
    for idx in 0..100u64 {
        let n1 = 4 + (rng.gen::<u32>() % 8) as usize;
        let n2 = 4 + (rng.gen::<u32>() % 8) as usize;
        let cols = 1 + (rng.gen::<u32>() as usize % n2);
        let mut m = random_gaussian_matrix(n1, n2, mix_seed(60, &[idx]));
        for j in cols..n2 {
            m.column_mut(j).fill(0.0);
        }
        // column-major data: entry (i, j) at j * n1 + i
        let mut data = vec![0.0; n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                data[j * n1 + i] = m[(i, j)];
            }
        }
        let x = DenseTensor::new(vec![n1, n2], data).unwrap();
        all_in &= table1_cos2(&x, NormKind::ColumnGroup).unwrap().contains(1e-9);
    }
    // equal-column-norm matrix hits the upper endpoint
    {
        let n1 = 6;
        let n2 = 9;
        let active = 4;
        let mut data = vec![0.0; n1 * n2];
        for j in 0..active {
            data[j * n1 + (j % n1)] = 2.5;
        }
        let b = table1_cos2(&DenseTensor::new(vec![n1, n2], data).unwrap(), NormKind::ColumnGroup)
            .unwrap();
        all_in &= (b.cos2 - active as f64 / n2 as f64).abs() <= 1e-12;
    }

    // nuclear norm on random low-rank matrices
    for idx in 0..100u64 {
        let n1 = 5 + (rng.gen::<u32>() % 10) as usize;
        let n2 = 5 + (rng.gen::<u32>() % 10) as usize;
        let r = 1 + (rng.gen::<u32>() as usize % n1.min(n2));
        let a = random_gaussian_matrix(n1, r, mix_seed(61, &[idx, 0]));
        let bmat = random_gaussian_matrix(n2, r, mix_seed(61, &[idx, 1]));
        let m = a.dot(&bmat.t());
        let mut data = vec![0.0; n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                data[j * n1 + i] = m[(i, j)];
            }
        }
        let x = DenseTensor::new(vec![n1, n2], data).unwrap();
        all_in &= table1_cos2(&x, NormKind::Nuclear).unwrap().contains(1e-9);
    }
    // equal singular values (orthonormal times orthonormal^T) hit r / n_min
    {
        let u = random_orthonormal(8, 3, 1).unwrap();
        let v = random_orthonormal(10, 3, 2).unwrap();
        let m = u.dot(&v.t());
        let mut data = vec![0.0; 80];
        for i in 0..8 {
            for j in 0..10 {
                data[j * 8 + i] = m[(i, j)];
            }
        }
        let b = table1_cos2(&DenseTensor::new(vec![8, 10], data).unwrap(), NormKind::Nuclear)
            .unwrap();
        all_in &= (b.cos2 - 3.0 / 8.0).abs() <= 1e-10 && (b.cos2 - b.upper).abs() <= 1e-10;
    }

    // SNN and square norms on random Tucker instances
    let mut rng2 = seeded_rng(807);
    for idx in 0..100u64 {
        let t = random_tucker(&mut rng2, idx);
        let x = tucker_compose(&t).unwrap();
        all_in &= table1_cos2(&x, NormKind::SnnTensor).unwrap().contains(1e-9);
        all_in &= table1_cos2(&x, NormKind::SquareTensor).unwrap().contains(1e-9);
    }
    // supersymmetric-core instance sits inside [(1/n)^2, (r/n)^2] for K = 4
    {
        let t = supersymmetric_instance(6, 2, 4, 3).unwrap();
        let x = tucker_compose(&t).unwrap();
        let b = table1_cos2(&x, NormKind::SquareTensor).unwrap();
        all_in &= b.cos2 >= (1.0f64 / 36.0) - 1e-12 && b.cos2 <= (4.0f64 / 36.0) + 1e-12;
    }
    // balanced-core instance achieves the square upper endpoint (r/n)^(K/2)
    {
        let t = tensorec_core::geometry::balanced_core_instance(5, 2, 4, 9).unwrap();
        let x = tucker_compose(&t).unwrap();
        let b = table1_cos2(&x, NormKind::SquareTensor).unwrap();
        all_in &= (b.cos2 - b.upper).abs() <= 1e-10;
    }

    let elapsed = start.elapsed();
    report(
        6,
        "cos^2 brackets for the five norms with endpoint constructions",
        all_in,
        &format!("{elapsed:.2?}"),
    );
}

#[test]
fn criterion_07_bregman_first_iteration_oracle() {
    // transcription of the first iteration on a 2x2x2x2 fixture: with
    // Y = 0, Z = 0 the updates reduce to X = 0, W = 0, Y~ = 0, Z~ = tau z
    let dims = vec![2usize, 2, 2, 2];
    let x0 = random_gaussian_tensor(&dims, 77).unwrap();
    let omega = SamplingOperator::new(&dims, 0.5, 8).unwrap();
    let z = omega.apply(&x0).unwrap();
    let mu = 2.0;
    let tau = 1.0 / (5.0 * mu);
    let cfg = AlbConfig { mu: Some(mu), tau: Some(tau), ..AlbConfig::default() };
    let blocks: Vec<Matricization> = (0..4).map(Matricization::Mode).collect();
    let mut solver = AlbSolver::new(&omega, &z, &dims, &blocks, &cfg, None).unwrap();
    solver.step().unwrap();

    let mut worst: f64 = 0.0;
    for i in 0..4 {
        // X_i^1 = mu * shrink(unfold_i(0), 1) = 0
        let y0 = DenseTensor::zeros(&dims).unwrap();
        let shrunk = linalg::svt_shrink(&unfold(&y0, i).unwrap(), 1.0).unwrap();
        let x_expect = fold(&shrunk, i, &dims).unwrap().scale(mu);
        for (a, b) in solver.block_iterates()[i].data().iter().zip(x_expect.data()) {
            worst = worst.max((a - b).abs());
        }
        for v in solver.y_tilde()[i].data() {
            worst = worst.max(v.abs()); // Y~^0 = 0 - tau (0 - 0) = 0
        }
    }
    for v in solver.w().data() {
        worst = worst.max(v.abs()); // W^1 = mu (op*(0) - 0) = 0
    }
    // Z~^0 = 0 - tau (op(0) - z) = tau z
    for (a, b) in solver.z_tilde().iter().zip(z.iter()) {
        worst = worst.max((a - tau * b).abs());
    }
    report(
        7,
        "first Bregman iteration matches the hand oracle",
        worst <= 1e-12,
        &format!("max deviation {worst:.2e}"),
    );
}

#[test]
fn criterion_08_desk_scale_phase_diagram() {
    let start = Instant::now();
    let spec = ExperimentSpec::desk_grid(7);
    let grids = run_phase_transition(&spec).unwrap();
    let snn = grids.iter().find(|g| g.model == ModelKind::Snn).unwrap();
    let square = grids.iter().find(|g| g.model == ModelKind::Square).unwrap();
    let mut superset = true;
    for i in 0..spec.n_grid.len() {
        for j in 0..spec.rho_grid.len() {
            let snn_success = snn.cell(i, j).successes * 5 >= 4 * snn.cell(i, j).trials;
            let square_success = square.cell(i, j).successes * 5 >= 4 * square.cell(i, j).trials;
            if snn_success && !square_success {
                superset = false;
            }
        }
    }
    let i18 = spec.n_grid.iter().position(|&n| n == 18).unwrap();
    let mut separated = false;
    for j in 0..spec.rho_grid.len() {
        let sq = square.cell(i18, j);
        let sn = snn.cell(i18, j);
        if sq.successes * 5 >= 4 * sq.trials && sn.successes * 5 <= sn.trials {
            separated = true;
        }
    }
    let elapsed = start.elapsed();
    report(
        8,
        "desk-scale completion phase diagram",
        superset && separated,
        &format!("square region contains SNN: {superset}, n=18 separation: {separated}, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_09_gaussian_measurement_sweep() {
    let start = Instant::now();
    let spec = GaussianSweepSpec {
        n: 5,
        r: 1,
        k: 4,
        m_grid: vec![62, 300, 625],
        trials: 10,
        success_threshold: 1e-2,
        master_seed: 3,
        max_iters: 30000,
    };
    let res = run_gaussian_sweep(&spec).unwrap();
    let snn_62 = res.snn.cell(0, 0).success_fraction();
    let square_300 = res.square.cell(0, 1).success_fraction();
    let snn_625 = res.snn.cell(0, 2).success_fraction();
    let square_625 = res.square.cell(0, 2).success_fraction();
    let elapsed = start.elapsed();
    let pass = snn_62 <= 0.2 && square_300 >= 0.8 && snn_625 == 1.0 && square_625 == 1.0;
    report(
        9,
        "Gaussian m-sweep matches the predicted transitions",
        pass,
        &format!(
            "snn@62 {snn_62}, square@300 {square_300}, snn@625 {snn_625}, square@625 {square_625}, {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_10_bit_exact_replay() {
    let spec = ExperimentSpec {
        model: Model::Both,
        n_grid: vec![10],
        rho_grid: vec![0.16],
        trials: 2,
        success_threshold: 1e-2,
        master_seed: 17,
        snn_max_iters: 3000,
        alm_max_outer: 600,
        output_dir: None,
    };
    let grids = run_phase_transition(&spec).unwrap();
    let mut pass = true;
    for grid in &grids {
        for (t, rec) in grid.cell(0, 0).records.iter().enumerate() {
            let replayed = replay_completion_trial(&spec, grid.model, 0, 0, t).unwrap();
            pass &= replayed.rel_error.to_bits() == rec.rel_error.to_bits()
                && replayed.iterations == rec.iterations;
        }
    }
    // recorded seeds alone regenerate the instance and mask
    let rec = &grids[0].cell(0, 0).records[0];
    let x = generate_completion_instance(10, rec.instance_seed).unwrap();
    let y = generate_completion_instance(10, rec.instance_seed).unwrap();
    pass &= x.data() == y.data();
    report(10, "cells replay bit-exactly from recorded seeds", pass, "2 cells x 2 trials");
}
