//! Random disjoint subsampling and contrast-group bookkeeping.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::model::PartitionPlan;
use crate::weights::stream_rng;

/// Splits {0..n-1} into d = b*m disjoint subsets of size `n_sub` by shuffling
/// once and cutting consecutive blocks. Leftover indices stay available for
/// calibration draws.
pub fn make_partition(n: usize, n_sub: usize, b: usize, m: usize, seed: u64) -> Result<PartitionPlan> {
    if n_sub == 0 || b == 0 || m == 0 {
        return Err(Error::InvalidConfig("N, b and m must all be positive".into()));
    }
    let d = b * m;
    let needed = d * n_sub;
    if needed > n {
        return Err(Error::InsufficientSamples { needed, available: n });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = stream_rng(seed, &[0x50]);
    idx.shuffle(&mut rng);
    let subsets: Vec<Vec<usize>> = (0..d).map(|i| idx[i * n_sub..(i + 1) * n_sub].to_vec()).collect();
    let leftover = idx[needed..].to_vec();
    Ok(PartitionPlan { subsets, b, m, seed, leftover })
}

/// Subset ids of contrast group `q` (0-based): {m*q, ..., m*q + m - 1}.
/// Groups partition {0..d-1}; with m = 1 the group is the single subset q.
pub fn group(plan: &PartitionPlan, q: usize) -> Result<Vec<usize>> {
    if q >= plan.b {
        return Err(Error::IndexOutOfRange(q));
    }
    Ok((0..plan.m).map(|l| plan.m * q + l).collect())
}

/// Uniform random subset of the complement of subset `i`, preferring leftover
/// indices so calibration data stays disjoint from all fitting data.
pub fn complement_block(plan: &PartitionPlan, i: usize, size: usize, seed: u64) -> Result<Vec<usize>> {
    if i >= plan.d() {
        return Err(Error::IndexOutOfRange(i));
    }
    let n_sub = plan.subsets[i].len();
    let n: usize = plan.subsets.iter().map(Vec::len).sum::<usize>() + plan.leftover.len();
    if size > n - n_sub {
        return Err(Error::InsufficientSamples { needed: size, available: n - n_sub });
    }
    let mut rng = stream_rng(seed, &[0x43, i as u64]);
    let mut pool = plan.leftover.clone();
    pool.shuffle(&mut rng);
    if pool.len() < size {
        let mut rest: Vec<usize> = plan
            .subsets
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i)
            .flat_map(|(_, s)| s.iter().copied())
            .collect();
        rest.shuffle(&mut rng);
        pool.extend(rest);
    }
    pool.truncate(size);
    Ok(pool)
}
