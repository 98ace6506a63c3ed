//! Weighted l1-penalized least squares via cyclic coordinate descent.
//!
//! Minimizes  (1 / (2 * objective_scale)) * sum_l w_l (y_l - x_l' beta)^2
//!            + lambda * |beta|_1
//! over a column-major data block. Inner products with the response and the
//! weighted Gram columns are cached; Gram columns are computed lazily the
//! first time a coordinate moves.

use crate::error::{Error, Result};
use crate::mat::{dot, ColMat};

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Iteration stops once the largest coordinate update in a full sweep
    /// falls below this value and the KKT residual is below it too.
    pub tol: f64,
    /// Maximum number of coordinate sweeps.
    pub max_iters: usize,
    /// Divisor of the quadratic term: n for the weighted subsample estimator
    /// and the full-data fit, N for the classic subagging baseline.
    pub objective_scale: f64,
}

impl SolverConfig {
    pub fn new(objective_scale: f64) -> Self {
        SolverConfig { tol: 1e-7, max_iters: 10_000, objective_scale }
    }
}

#[derive(Debug, Clone)]
pub struct LassoFit {
    pub beta: Vec<f64>,
    pub lambda: f64,
    /// 0-based indices with beta[j] != 0, ascending.
    pub active_set: Vec<usize>,
    /// Coordinate sweeps performed.
    pub iterations: usize,
    /// Exact KKT violation of the returned iterate.
    pub kkt_residual: f64,
    /// False when max_iters ran out before the tolerances were met; the best
    /// iterate is still returned.
    pub converged: bool,
    /// Set when lambda = 0 and p > N: the returned point is a minimizer but
    /// not claimed unique.
    pub underdetermined: bool,
}

/// sign(z) * max(|z| - gamma, 0)
#[inline]
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Smallest lambda for which the all-zero vector satisfies the KKT
/// conditions: max_j |sum_l w_l x_lj y_l| / scale.
pub fn lambda_max(x: &ColMat, y: &[f64], weights: Option<&[f64]>, scale: f64) -> f64 {
    let mut best = 0.0f64;
    let wy: Vec<f64> = match weights {
        Some(w) => w.iter().zip(y).map(|(wi, yi)| wi * yi).collect(),
        None => y.to_vec(),
    };
    for j in 0..x.cols() {
        best = best.max(dot(x.col(j), &wy).abs());
    }
    best / scale
}

/// Penalized objective value.
pub fn objective(x: &ColMat, y: &[f64], weights: &[f64], beta: &[f64], lambda: f64, scale: f64) -> f64 {
    let fitted = x.matvec_sparse(beta);
    let mut quad = 0.0;
    for l in 0..y.len() {
        let r = y[l] - fitted[l];
        quad += weights[l] * r * r;
    }
    quad / (2.0 * scale) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

/// Exact KKT violation of `beta`: for active coordinates the distance of the
/// quadratic gradient from -lambda*sign(beta_j), for inactive ones the excess
/// of |gradient| over lambda. Recomputed from the data, independent of any
/// solver caches.
pub fn kkt_check(
    beta: &[f64],
    x: &ColMat,
    y: &[f64],
    weights: &[f64],
    lambda: f64,
    scale: f64,
) -> f64 {
    let fitted = x.matvec_sparse(beta);
    let wr: Vec<f64> = (0..y.len()).map(|l| weights[l] * (y[l] - fitted[l])).collect();
    let mut worst = 0.0f64;
    for j in 0..x.cols() {
        let g = -dot(x.col(j), &wr) / scale;
        let v = if beta[j] != 0.0 {
            (g + lambda * beta[j].signum()).abs()
        } else {
            (g.abs() - lambda).max(0.0)
        };
        worst = worst.max(v);
    }
    worst
}

struct CovCache<'a> {
    x: &'a ColMat,
    w: &'a [f64],
    /// Diagonal of the weighted Gram, all coordinates.
    diag: Vec<f64>,
    /// Lazily filled weighted Gram columns.
    cols: Vec<Option<Vec<f64>>>,
}

impl<'a> CovCache<'a> {
    fn new(x: &'a ColMat, w: &'a [f64]) -> Self {
        let p = x.cols();
        let mut diag = vec![0.0; p];
        for (j, d) in diag.iter_mut().enumerate() {
            let col = x.col(j);
            *d = col.iter().zip(w).map(|(v, wi)| wi * v * v).sum();
        }
        CovCache { x, w, diag, cols: vec![None; p] }
    }

    fn col(&mut self, j: usize) -> &[f64] {
        if self.cols[j].is_none() {
            let n = self.x.rows();
            let p = self.x.cols();
            let cj = self.x.col(j);
            let wj: Vec<f64> = cj.iter().zip(self.w).map(|(v, wi)| wi * v).collect();
            let mut g = vec![0.0; p];
            for (k, gk) in g.iter_mut().enumerate() {
                let ck = self.x.col(k);
                let mut s = 0.0;
                for l in 0..n {
                    s += wj[l] * ck[l];
                }
                *gk = s;
            }
            self.cols[j] = Some(g);
        }
        self.cols[j].as_ref().unwrap()
    }
}

/// Fits the weighted Lasso. `warm_start` must have length p when given.
pub fn fit_weighted_lasso(
    x: &ColMat,
    y: &[f64],
    weights: &[f64],
    lambda: f64,
    config: &SolverConfig,
    warm_start: Option<&[f64]>,
) -> Result<LassoFit> {
    let n = x.rows();
    let p = x.cols();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("y has length {}, x has {n} rows", y.len())));
    }
    if weights.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "weights have length {}, x has {n} rows",
            weights.len()
        )));
    }
    if let Some(ws) = warm_start {
        if ws.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "warm start has length {}, x has {p} columns",
                ws.len()
            )));
        }
    }
    if lambda < 0.0 {
        return Err(Error::InvalidConfig("lambda must be nonnegative".into()));
    }
    let scale = config.objective_scale;
    let thr = scale * lambda;

    let mut beta: Vec<f64> = warm_start.map_or_else(|| vec![0.0; p], <[f64]>::to_vec);
    let mut cache = CovCache::new(x, weights);
    // c_j = sum_l w_l x_lj y_l
    let wy: Vec<f64> = weights.iter().zip(y).map(|(wi, yi)| wi * yi).collect();
    let c: Vec<f64> = (0..p).map(|j| dot(x.col(j), &wy)).collect();
    // q_j = sum_k G_jk beta_k, maintained incrementally
    let mut q = vec![0.0; p];
    for j in 0..p {
        if beta[j] != 0.0 {
            let bj = beta[j];
            for (qk, gk) in q.iter_mut().zip(cache.col(j)) {
                *qk += bj * gk;
            }
        }
    }

    #[cfg(debug_assertions)]
    let mut prev_obj = objective(x, y, weights, &beta, lambda, scale);

    let mut sweeps = 0usize;
    let mut converged = false;
    let mut kkt_residual;
    'outer: loop {
        // Full cyclic sweep over all coordinates.
        let max_delta = sweep(&mut beta, &c, &mut q, &mut cache, thr, None);
        sweeps += 1;

        #[cfg(debug_assertions)]
        {
            let obj = objective(x, y, weights, &beta, lambda, scale);
            debug_assert!(
                obj <= prev_obj + 1e-9 * prev_obj.abs().max(1.0),
                "objective increased across a sweep: {prev_obj} -> {obj}"
            );
            prev_obj = obj;
        }

        if max_delta <= config.tol {
            kkt_residual = kkt_check(&beta, x, y, weights, lambda, scale);
            if kkt_residual <= config.tol.max(1e-12) {
                converged = true;
                break;
            }
            // Cache drift can leave a stale q; refresh and keep sweeping.
            refresh_q(&mut q, &beta, &mut cache, p);
        }
        if sweeps >= config.max_iters {
            kkt_residual = kkt_check(&beta, x, y, weights, lambda, scale);
            break;
        }

        // Iterate on the current active set until it stabilizes, then return
        // to a full sweep for the optimality check.
        let active: Vec<usize> = (0..p).filter(|&j| beta[j] != 0.0).collect();
        if !active.is_empty() {
            for _ in 0..200 {
                let d = sweep(&mut beta, &c, &mut q, &mut cache, thr, Some(&active));
                sweeps += 1;
                if d <= config.tol || sweeps >= config.max_iters {
                    break;
                }
            }
            if sweeps >= config.max_iters {
                kkt_residual = kkt_check(&beta, x, y, weights, lambda, scale);
                break 'outer;
            }
        }
    }

    let active_set: Vec<usize> = (0..p).filter(|&j| beta[j] != 0.0).collect();
    Ok(LassoFit {
        beta,
        lambda,
        active_set,
        iterations: sweeps,
        kkt_residual,
        converged,
        underdetermined: lambda == 0.0 && p > n,
    })
}

fn refresh_q(q: &mut [f64], beta: &[f64], cache: &mut CovCache, p: usize) {
    for v in q.iter_mut() {
        *v = 0.0;
    }
    for j in 0..p {
        if beta[j] != 0.0 {
            let bj = beta[j];
            for (qk, gk) in q.iter_mut().zip(cache.col(j)) {
                *qk += bj * gk;
            }
        }
    }
}

/// One cyclic pass; returns the largest |beta_j change|.
fn sweep(
    beta: &mut [f64],
    c: &[f64],
    q: &mut [f64],
    cache: &mut CovCache,
    thr: f64,
    subset: Option<&[usize]>,
) -> f64 {
    let mut max_delta = 0.0f64;
    let idx_all: Vec<usize>;
    let idx: &[usize] = match subset {
        Some(s) => s,
        None => {
            idx_all = (0..beta.len()).collect();
            &idx_all
        }
    };
    for &j in idx {
        let d = cache.diag[j];
        if d <= 0.0 {
            continue;
        }
        let old = beta[j];
        let r = c[j] - (q[j] - d * old);
        let new = soft_threshold(r, thr) / d;
        if new != old {
            let delta = new - old;
            for (qk, gk) in q.iter_mut().zip(cache.col(j)) {
                *qk += delta * gk;
            }
            beta[j] = new;
            max_delta = max_delta.max(delta.abs());
        }
    }
    max_delta
}

/// Fits along a strictly descending lambda sequence, warm-starting each fit
/// from the previous solution.
pub fn lasso_path(
    x: &ColMat,
    y: &[f64],
    weights: &[f64],
    lambdas: &[f64],
    config: &SolverConfig,
) -> Result<Vec<LassoFit>> {
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidConfig("lambda path must be strictly descending".into()));
    }
    let mut fits = Vec::with_capacity(lambdas.len());
    let mut warm: Option<Vec<f64>> = None;
    for &lambda in lambdas {
        let fit = fit_weighted_lasso(x, y, weights, lambda, config, warm.as_deref())?;
        warm = Some(fit.beta.clone());
        fits.push(fit);
    }
    Ok(fits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::Mat;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_instance(seed: u64, n: usize, p: usize) -> (ColMat, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Mat::zeros(n, p);
        for i in 0..n {
            for j in 0..p {
                x.set(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        crate::model::normalize_columns(&mut x).unwrap();
        let y: Vec<f64> = (0..n)
            .map(|i| x.get(i, 0) * 2.0 - x.get(i, 1.min(p - 1)) + 0.1 * rng.gen_range(-1.0..1.0))
            .collect();
        (ColMat::from_mat(&x), y)
    }

    #[test]
    fn soft_threshold_shrinks() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
    }

    #[test]
    fn lambda_max_single_column() {
        // x = unit column (1, 0), y = (0.8, 0.3), w = 1, scale = 2
        let x = ColMat::from_cols(2, vec![vec![1.0, 0.0]]);
        let lm = lambda_max(&x, &[0.8, 0.3], None, 2.0);
        assert!((lm - 0.4).abs() < 1e-15);
    }

    #[test]
    fn lambda_max_zero_response() {
        let (x, _) = random_instance(1, 10, 3);
        let lm = lambda_max(&x, &vec![0.0; 10], None, 10.0);
        assert_eq!(lm, 0.0);
    }

    #[test]
    fn lambda_max_is_zero_nonzero_boundary() {
        // Bisect lambda with the solver and confirm the boundary matches.
        let (x, y) = random_instance(7, 20, 5);
        let w = vec![1.0; 20];
        let cfg = SolverConfig::new(20.0);
        let lm = lambda_max(&x, &y, Some(&w), 20.0);
        let above = fit_weighted_lasso(&x, &y, &w, lm * (1.0 + 1e-9), &cfg, None).unwrap();
        assert!(above.active_set.is_empty(), "fit above lambda_max must be zero");
        let below = fit_weighted_lasso(&x, &y, &w, lm * (1.0 - 1e-6), &cfg, None).unwrap();
        assert!(!below.active_set.is_empty(), "fit just below lambda_max must activate");
        // tighten with bisection: the boundary the solver sees equals lm
        let mut lo = lm * 0.5;
        let mut hi = lm * 1.5;
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            let f = fit_weighted_lasso(&x, &y, &w, mid, &cfg, None).unwrap();
            if f.active_set.is_empty() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((hi - lm).abs() <= 1e-6 * lm, "bisected boundary {hi} vs lambda_max {lm}");
    }

    #[test]
    fn orthonormal_design_matches_soft_threshold() {
        // Columns of sqrt(scale) * I are orthonormal after weighting by 1:
        // X' W X / scale = I, so beta_j = soft(c_j / scale, lambda).
        let n = 6;
        let scale = n as f64;
        let root = scale.sqrt();
        let mut x = Mat::zeros(n, n);
        for i in 0..n {
            x.set(i, i, root);
        }
        let x = ColMat::from_mat(&x);
        let y = vec![0.9, -0.4, 0.05, 1.3, -0.02, 0.6];
        let w = vec![1.0; n];
        let lambda = 0.1;
        let cfg = SolverConfig::new(scale);
        let fit = fit_weighted_lasso(&x, &y, &w, lambda, &cfg, None).unwrap();
        for j in 0..n {
            let c_j = root * y[j];
            let expect = soft_threshold(c_j / scale, lambda) / (scale / scale);
            assert!(
                (fit.beta[j] - expect).abs() < 1e-12,
                "coordinate {j}: {} vs {expect}",
                fit.beta[j]
            );
        }
    }

    #[test]
    fn zero_solution_at_lambda_max() {
        let (x, y) = random_instance(3, 30, 6);
        let w = vec![1.0; 30];
        let cfg = SolverConfig::new(30.0);
        let lm = lambda_max(&x, &y, Some(&w), 30.0);
        let fit = fit_weighted_lasso(&x, &y, &w, lm, &cfg, None).unwrap();
        assert!(fit.active_set.is_empty());
        assert_eq!(fit.kkt_residual, 0.0);
    }

    #[test]
    fn kkt_zero_fit_residual_zero() {
        let (x, y) = random_instance(11, 15, 4);
        let w = vec![1.0; 15];
        let lm = lambda_max(&x, &y, Some(&w), 15.0);
        let r = kkt_check(&vec![0.0; 4], &x, &y, &w, lm * 1.01, 15.0);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn kkt_converged_fit_small_residual() {
        let (x, y) = random_instance(5, 40, 7);
        let w = vec![2.0; 40];
        let cfg = SolverConfig::new(80.0);
        let fit = fit_weighted_lasso(&x, &y, &w, 0.01, &cfg, None).unwrap();
        assert!(fit.converged);
        assert!(fit.kkt_residual <= 1e-7, "kkt residual {}", fit.kkt_residual);
        assert!(!fit.active_set.is_empty());
    }

    #[test]
    fn kkt_detects_perturbation() {
        let (x, y) = random_instance(5, 40, 7);
        let w = vec![1.0; 40];
        let cfg = SolverConfig::new(40.0);
        let fit = fit_weighted_lasso(&x, &y, &w, 0.01, &cfg, None).unwrap();
        let mut beta = fit.beta.clone();
        let j = fit.active_set[0];
        beta[j] += 0.1;
        let r = kkt_check(&beta, &x, &y, &w, 0.01, 40.0);
        assert!(r > 1e-4, "perturbed residual {r}");
    }

    #[test]
    fn path_single_lambda_matches_direct_fit() {
        let (x, y) = random_instance(9, 25, 5);
        let w = vec![1.0; 25];
        let cfg = SolverConfig::new(25.0);
        let path = lasso_path(&x, &y, &w, &[0.02], &cfg).unwrap();
        let direct = fit_weighted_lasso(&x, &y, &w, 0.02, &cfg, None).unwrap();
        assert_eq!(path[0].beta, direct.beta);
    }

    #[test]
    fn path_starting_at_lambda_max_is_zero_first() {
        let (x, y) = random_instance(13, 25, 5);
        let w = vec![1.0; 25];
        let cfg = SolverConfig::new(25.0);
        let lm = lambda_max(&x, &y, Some(&w), 25.0);
        let path = lasso_path(&x, &y, &w, &[lm, lm * 0.5, lm * 0.1], &cfg).unwrap();
        assert!(path[0].active_set.is_empty());
        for fit in &path {
            let r = kkt_check(&fit.beta, &x, &y, &w, fit.lambda, 25.0);
            assert!(r <= 1e-7, "path fit kkt residual {r}");
        }
    }

    #[test]
    fn warm_start_does_not_change_minimizer() {
        let (x, y) = random_instance(17, 50, 8);
        let w = vec![1.0; 50];
        let cfg = SolverConfig::new(50.0);
        let lm = lambda_max(&x, &y, Some(&w), 50.0);
        let grid: Vec<f64> = (0..6).map(|k| lm * 0.8f64.powi(k + 1)).collect();
        let path = lasso_path(&x, &y, &w, &grid, &cfg).unwrap();
        for (k, &lambda) in grid.iter().enumerate() {
            let cold = fit_weighted_lasso(&x, &y, &w, lambda, &cfg, None).unwrap();
            let diff = crate::mat::max_abs_diff(&path[k].beta, &cold.beta);
            assert!(diff < 1e-6, "warm vs cold at {lambda}: {diff}");
        }
    }

    #[test]
    fn path_rejects_non_descending() {
        let (x, y) = random_instance(2, 10, 3);
        let w = vec![1.0; 10];
        let cfg = SolverConfig::new(10.0);
        assert!(lasso_path(&x, &y, &w, &[0.1, 0.1], &cfg).is_err());
    }

    #[test]
    fn column_permutation_changes_little() {
        // Reordering coordinates is equivalent to permuting columns; on a
        // full-rank instance the solutions must agree.
        let (x, y) = random_instance(23, 50, 6);
        let w = vec![1.0; 50];
        let cfg = SolverConfig::new(50.0);
        let fit = fit_weighted_lasso(&x, &y, &w, 0.01, &cfg, None).unwrap();
        let perm = [5usize, 2, 0, 4, 1, 3];
        let cols: Vec<Vec<f64>> = perm.iter().map(|&j| x.col(j).to_vec()).collect();
        let xp = ColMat::from_cols(50, cols);
        let fitp = fit_weighted_lasso(&xp, &y, &w, 0.01, &cfg, None).unwrap();
        for (a, &j) in perm.iter().enumerate() {
            assert!((fitp.beta[a] - fit.beta[j]).abs() < 1e-6);
        }
    }

    #[test]
    fn scale_equivalence_is_exact_for_power_of_two() {
        let (x, y) = random_instance(29, 30, 5);
        let w: Vec<f64> = (0..30).map(|i| 1.0 + (i % 4) as f64).collect();
        let scale = w.iter().sum::<f64>();
        let cfg_a = SolverConfig::new(scale);
        let half: Vec<f64> = w.iter().map(|v| v / 2.0).collect();
        let cfg_b = SolverConfig::new(scale / 2.0);
        let fa = fit_weighted_lasso(&x, &y, &w, 0.01, &cfg_a, None).unwrap();
        let fb = fit_weighted_lasso(&x, &y, &half, 0.01, &cfg_b, None).unwrap();
        assert_eq!(fa.beta, fb.beta, "joint rescaling by 1/2 must be bit-exact");
    }

    #[test]
    fn not_converged_flag_on_iteration_cap() {
        let (x, y) = random_instance(31, 40, 8);
        let w = vec![1.0; 40];
        let cfg = SolverConfig { tol: 1e-12, max_iters: 1, objective_scale: 40.0 };
        let fit = fit_weighted_lasso(&x, &y, &w, 1e-6, &cfg, None).unwrap();
        assert!(!fit.converged);
    }

    #[test]
    fn underdetermined_flag_at_lambda_zero() {
        let (x, y) = random_instance(37, 5, 9);
        let w = vec![1.0; 5];
        let cfg = SolverConfig::new(5.0);
        let fit = fit_weighted_lasso(&x, &y, &w, 0.0, &cfg, None).unwrap();
        assert!(fit.underdetermined);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let (x, y) = random_instance(41, 10, 3);
        let cfg = SolverConfig::new(10.0);
        assert!(fit_weighted_lasso(&x, &y, &[1.0; 9], 0.1, &cfg, None).is_err());
        assert!(fit_weighted_lasso(&x, &y[..9], &[1.0; 10], 0.1, &cfg, None).is_err());
        assert!(fit_weighted_lasso(&x, &y, &[1.0; 10], 0.1, &cfg, Some(&[0.0; 2])).is_err());
    }
}
