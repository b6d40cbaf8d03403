//! Brute-force verifiers that share no code with the closed-form modules:
//! repeated matrix products, exact determinants, and a ball-level simulator.

use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::matrix::DenseMatrix;
use crate::mixing::{distribution_at, tv_distance};
use crate::model::{DistributionVector, ModelParams, TridiagonalKernel};
use crate::scalar::{Rational, Scalar};

/// `T^m` by repeated multiplication.
pub fn dense_power<S: Scalar>(kernel: &TridiagonalKernel<S>, m: u64) -> DenseMatrix<S> {
    let t = kernel.to_dense();
    let mut acc = DenseMatrix::identity(kernel.states());
    for _ in 0..m {
        acc = t.mul(&acc);
    }
    acc
}

/// Column `j` of `T^m` by stepping a point mass `m` times.
pub fn propagate<S: Scalar>(kernel: &TridiagonalKernel<S>, j: usize, m: u64) -> Vec<S> {
    let mut dist = vec![S::zero(); kernel.states()];
    dist[j] = S::one();
    for _ in 0..m {
        dist = kernel.apply(&dist);
    }
    dist
}

/// Exact `det(T - lambda I)`.
///
/// Entries are scaled to integers by the common denominator and reduced with
/// fraction-free (Bareiss) elimination.
pub fn charpoly_residual(kernel: &TridiagonalKernel<Rational>, lambda: &Rational) -> Rational {
    let s = kernel.states();
    let shifted = DenseMatrix::from_fn(s, s, |i, j| {
        let e = kernel.entry(i, j);
        if i == j {
            e - lambda
        } else {
            e
        }
    });
    let scale = (0..s)
        .flat_map(|i| {
            shifted
                .row(i)
                .iter()
                .map(|x| x.denom().clone())
                .collect::<Vec<_>>()
        })
        .fold(BigInt::one(), |acc, d| acc.lcm(&d));
    let mut a: Vec<Vec<BigInt>> = (0..s)
        .map(|i| {
            shifted
                .row(i)
                .iter()
                .map(|x| x.numer() * (&scale / x.denom()))
                .collect()
        })
        .collect();
    let det = bareiss_determinant(&mut a);
    Rational::new(det, num_traits::pow::Pow::pow(&scale, s as u32))
}

fn bareiss_determinant(a: &mut [Vec<BigInt>]) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Kernel of an arbitrary (possibly non-canonical) model, built by
/// enumerating every pair of drawn balls. Rows and columns are indexed by
/// the valid white counts of urn 1, offset to start at zero.
pub fn ball_swap_kernel(
    n1: u32,
    n2: u32,
    nw: u32,
) -> (RangeInclusive<usize>, DenseMatrix<Rational>) {
    let lo = nw.saturating_sub(n2) as usize;
    let hi = nw.min(n1) as usize;
    let s = hi - lo + 1;
    let mut counts = DenseMatrix::<Rational>::zeros(s, s);
    let total = Rational::from_integer(BigInt::from(n1 as u64 * n2 as u64));
    for state in lo..=hi {
        let whites_1 = state;
        let whites_2 = nw as usize - state;
        for a in 0..n1 as usize {
            for b in 0..n2 as usize {
                let white_from_1 = a < whites_1;
                let white_from_2 = b < whites_2;
                let next = match (white_from_1, white_from_2) {
                    (false, true) => state + 1,
                    (true, false) => state - 1,
                    _ => state,
                };
                let cell = &mut counts[(next - lo, state - lo)];
                *cell = cell.clone() + Rational::one();
            }
        }
    }
    (lo..=hi, counts.map(|c| c / &total))
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub params: ModelParams,
    pub start: usize,
    pub steps: u64,
    pub walkers: u64,
    pub seed: u64,
    pub empirical: Vec<f64>,
    pub exact: Vec<f64>,
    pub tv_vs_exact: f64,
}

/// Walkers are split over this many partitions, each with its own ChaCha8
/// stream (`seed`, stream = partition index). The count is fixed so the
/// histogram does not depend on the thread pool.
const PARTITIONS: u64 = 64;

/// Runs `walkers` independent copies of the chain for `m` steps from `j`.
///
/// Each step draws one ball per urn with a single uniform draw from
/// `0..n1*n2` and swaps them; the empirical law of the final states is
/// compared with the spectral distribution.
pub fn simulate(
    params: &ModelParams,
    j: usize,
    m: u64,
    walkers: u64,
    seed: u64,
) -> Result<SimulationReport> {
    params.check_state(j, "start")?;
    if walkers == 0 {
        return Err(crate::Error::InvalidArgument(
            "walkers must be at least 1".into(),
        ));
    }
    let s = params.states();
    let (n1, n2, nw) = (params.n1() as u64, params.n2() as u64, params.nw() as u64);
    let histogram = (0..PARTITIONS)
        .into_par_iter()
        .map(|part| {
            let share = walkers / PARTITIONS + u64::from(part < walkers % PARTITIONS);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(part);
            let mut counts = vec![0u64; s];
            for _ in 0..share {
                let mut state = j as u64;
                for _ in 0..m {
                    let draw = rng.gen_range(0..n1 * n2);
                    let (a, b) = (draw / n2, draw % n2);
                    let white_from_1 = a < state;
                    let white_from_2 = b < nw - state;
                    if white_from_2 && !white_from_1 {
                        state += 1;
                    } else if white_from_1 && !white_from_2 {
                        state -= 1;
                    }
                }
                counts[state as usize] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; s],
            |mut acc, part| {
                acc.iter_mut().zip(part).for_each(|(a, b)| *a += b);
                acc
            },
        );
    let empirical: Vec<f64> = histogram
        .iter()
        .map(|&c| c as f64 / walkers as f64)
        .collect();
    let exact = distribution_at::<f64>(params, j, m)?;
    let tv_vs_exact = tv_distance(&DistributionVector::from_raw(empirical.clone()), &exact)?;
    Ok(SimulationReport {
        params: *params,
        start: j,
        steps: m,
        walkers,
        seed,
        empirical,
        exact: exact.into_weights(),
        tv_vs_exact,
    })
}
