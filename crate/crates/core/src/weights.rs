//! Exchangeable weight generation and eigenvalue-optimal weighting.
//!
//! Random weights are shifted multinomial draws, w = 1 + M(n - N, uniform),
//! so every entry is at least 1 and the sum is exactly n. Optimal weights
//! maximize the minimal eigenvalue of the weighted subsample Gram over the
//! scaled simplex { w >= 0, sum w = n }, a concave problem solved by entropic
//! mirror ascent with a backtracking step so the objective never decreases.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::mat::{power_iteration, ColMat, Mat};
use crate::model::WeightVector;

/// Derives an independent RNG stream for a tagged task.
pub fn stream_rng(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    let mut state = seed ^ 0x9e37_79b9_7f4a_7c15;
    for &t in tags {
        state ^= t.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(state << 6).wrapping_add(state >> 2);
        state = state.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        state ^= state >> 27;
    }
    ChaCha8Rng::seed_from_u64(state)
}

/// One multinomial count vector: `trials` balls into `cells` boxes, uniform.
fn multinomial_counts(trials: u64, cells: usize, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut counts = vec![0u64; cells];
    let mut remaining = trials;
    for (i, c) in counts.iter_mut().enumerate().take(cells - 1) {
        if remaining == 0 {
            break;
        }
        let p = 1.0 / (cells - i) as f64;
        let draw = Binomial::new(remaining, p).expect("valid binomial").sample(rng);
        *c = draw;
        remaining -= draw;
    }
    counts[cells - 1] += remaining;
    counts
}

/// Draws `count` weight vectors for subsample `subsample_id`, each of length
/// `n_sub`, summing exactly to `n` with every entry >= 1. Streams are keyed
/// by (seed, subsample, replicate) so draws do not depend on scheduling.
pub fn multinomial_weights(
    n: usize,
    n_sub: usize,
    count: usize,
    seed: u64,
    subsample_id: usize,
) -> Result<Vec<WeightVector>> {
    if n_sub == 0 || n_sub > n {
        return Err(Error::InvalidSize { n_sub, n });
    }
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let mut rng = stream_rng(seed, &[0x77, subsample_id as u64, k as u64]);
        let counts = multinomial_counts((n - n_sub) as u64, n_sub, &mut rng);
        let values: Vec<f64> = counts.iter().map(|&c| 1.0 + c as f64).collect();
        debug_assert_eq!(values.iter().sum::<f64>(), n as f64);
        out.push(WeightVector { values, subsample_id, replicate_id: k });
    }
    Ok(out)
}

/// Result of the eigenvalue-optimal weight search.
#[derive(Debug, Clone)]
pub struct OptimalWeights {
    pub weights: Vec<f64>,
    /// lambda_min of the weighted Gram at the returned weights.
    pub objective: f64,
    /// Objective value after each accepted iteration; non-decreasing.
    pub objective_trace: Vec<f64>,
}

fn min_eigenpair(gram: &Mat) -> (f64, Vec<f64>) {
    let p = gram.rows();
    if p == 1 {
        return (gram.get(0, 0), vec![1.0]);
    }
    let (top, _) = power_iteration(p, |v| gram.matvec(v), 1e-10, 10_000);
    let shift = top.max(0.0) * (1.0 + 1e-9) + 1e-12;
    let (inv_top, v) = power_iteration(p, |v| {
        let gv = gram.matvec(v);
        v.iter().zip(gv).map(|(vi, gvi)| shift * vi - gvi).collect()
    }, 1e-10, 10_000);
    (shift - inv_top, v)
}

fn weighted_gram(x: &ColMat, w: &[f64]) -> Mat {
    let p = x.cols();
    let n = x.rows();
    let mut g = Mat::zeros(p, p);
    for a in 0..p {
        let ca = x.col(a);
        for b in a..p {
            let cb = x.col(b);
            let mut s = 0.0;
            for l in 0..n {
                s += w[l] * ca[l] * cb[l];
            }
            g.set(a, b, s);
            g.set(b, a, s);
        }
    }
    g
}

/// Maximizes lambda_min( sum_l w_l x_l x_l' ) over { w >= 0, sum w = n }.
/// Always returns a feasible point; the trace of accepted objectives is
/// non-decreasing by construction.
pub fn optimal_weights(x_sub: &ColMat, n: usize, iters: usize, tol: f64) -> OptimalWeights {
    let rows = x_sub.rows();
    assert!(rows >= 1, "need at least one row");
    let nf = n as f64;
    let mut w = vec![nf / rows as f64; rows];
    let eval = |w: &[f64]| -> (f64, Vec<f64>) {
        let g = weighted_gram(x_sub, w);
        min_eigenpair(&g)
    };
    let (mut obj, mut vmin) = eval(&w);
    let mut trace = vec![obj];
    for t in 1..=iters {
        // Supergradient of lambda_min at w: d/dw_l = (x_l . v_min)^2.
        let grad: Vec<f64> = (0..rows)
            .map(|l| {
                let mut s = 0.0;
                for j in 0..x_sub.cols() {
                    s += x_sub.get(l, j) * vmin[j];
                }
                s * s
            })
            .collect();
        let gmax = grad.iter().fold(0.0f64, |m, &g| m.max(g));
        if gmax <= 0.0 {
            break;
        }
        let mut eta = 1.0 / (t as f64).sqrt();
        let mut accepted = false;
        for _ in 0..40 {
            // Multiplicative step, renormalized to the scaled simplex.
            let cand: Vec<f64> = w.iter().zip(&grad).map(|(wi, g)| wi * (eta * g / gmax).exp()).collect();
            let s: f64 = cand.iter().sum();
            let cand: Vec<f64> = cand.iter().map(|v| v * nf / s).collect();
            let (cand_obj, cand_v) = eval(&cand);
            if cand_obj >= obj {
                let improved = cand_obj > obj + tol * obj.abs().max(1e-12);
                w = cand;
                obj = cand_obj;
                vmin = cand_v;
                accepted = improved;
                break;
            }
            eta *= 0.5;
        }
        trace.push(obj);
        if !accepted && t > 8 {
            break;
        }
    }
    OptimalWeights { weights: w, objective: obj, objective_trace: trace }
}

/// Rounds a nonnegative real weight vector with sum n to an integer vector
/// with every entry >= 1 and exact sum n, by largest-remainder rounding after
/// flooring at 1. Ties break toward the lowest index.
pub fn round_weights(w: &[f64], n: usize, subsample_id: usize, replicate_id: usize) -> Result<WeightVector> {
    let len = w.len();
    if n < len {
        return Err(Error::Infeasible { n, n_sub: len });
    }
    let mut v: Vec<u64> = w.iter().map(|&wi| (wi.floor() as u64).max(1)).collect();
    let mut total: i64 = v.iter().map(|&x| x as i64).sum();
    let target = n as i64;
    if total < target {
        // Distribute the deficit to the largest fractional remainders.
        let mut rem: Vec<(usize, f64)> = w
            .iter()
            .enumerate()
            .map(|(i, &wi)| (i, wi - wi.floor()))
            .collect();
        rem.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        let mut k = 0usize;
        while total < target {
            v[rem[k % len].0] += 1;
            total += 1;
            k += 1;
        }
    } else if total > target {
        // Flooring at 1 overshot; take back from reducible entries, smallest
        // fractional remainder first.
        let mut rem: Vec<(usize, f64)> = w
            .iter()
            .enumerate()
            .map(|(i, &wi)| (i, wi - wi.floor()))
            .collect();
        rem.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        while total > target {
            let mut moved = false;
            for &(i, _) in &rem {
                if v[i] > 1 {
                    v[i] -= 1;
                    total -= 1;
                    moved = true;
                    if total == target {
                        break;
                    }
                }
            }
            assert!(moved, "reduction must always be possible when n >= len");
        }
    }
    let values: Vec<f64> = v.iter().map(|&x| x as f64).collect();
    debug_assert_eq!(values.iter().sum::<f64>(), n as f64);
    debug_assert!(values.iter().all(|&x| x >= 1.0));
    Ok(WeightVector { values, subsample_id, replicate_id })
}
