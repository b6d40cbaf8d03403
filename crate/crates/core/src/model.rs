//! Model parameters, the transition kernel and the stationary law.
//!
//! The state `i` is the number of white balls in urn 1. Each step picks one
//! ball uniformly from each urn and swaps them.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::{binomial, Rational, Scalar};

/// Ball counts of a Bernoulli-Laplace model. Construction guarantees the
/// canonical form `1 <= nw <= min(n1, n2)`, so the states are `0..=nw`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ModelParams {
    n1: u32,
    n2: u32,
    nw: u32,
}

impl ModelParams {
    pub fn n1(&self) -> u32 {
        self.n1
    }

    pub fn n2(&self) -> u32 {
        self.n2
    }

    pub fn nw(&self) -> u32 {
        self.nw
    }

    pub fn nb(&self) -> u32 {
        self.n1 + self.n2 - self.nw
    }

    pub fn n(&self) -> u32 {
        self.n1 + self.n2
    }

    /// Number of states, `nw + 1`.
    pub fn states(&self) -> usize {
        self.nw as usize + 1
    }

    pub fn is_balanced(&self) -> bool {
        self.n1 == self.n2
    }

    /// `n1 * n2`, the common denominator of every transition probability.
    pub fn denominator(&self) -> i64 {
        self.n1 as i64 * self.n2 as i64
    }

    pub fn check_state(&self, i: usize, what: &'static str) -> Result<()> {
        if i > self.nw as usize {
            return Err(Error::IndexOutOfRange {
                what,
                index: i,
                max: self.nw as usize,
            });
        }
        Ok(())
    }

    /// Every canonical model with total ball count `n <= max_n`.
    pub fn enumerate_canonical(max_n: u32) -> Vec<ModelParams> {
        let mut out = Vec::new();
        for n in 2..=max_n {
            for n1 in 1..n {
                let n2 = n - n1;
                for nw in 1..=n1.min(n2) {
                    out.push(ModelParams { n1, n2, nw });
                }
            }
        }
        out
    }
}

fn validate(n1: u32, n2: u32, nw: u32) -> Result<()> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::ZeroCapacity { n1, n2 });
    }
    if nw > n1 + n2 {
        return Err(Error::ImpossibleColorCount { nw, n: n1 + n2 });
    }
    Ok(())
}

/// Validates ball counts and returns canonical parameters.
///
/// A model whose white count exceeds an urn is reported as needing
/// canonicalization instead of being relabelled silently.
pub fn new_model(n1: u32, n2: u32, nw: u32) -> Result<ModelParams> {
    validate(n1, n2, nw)?;
    if nw == 0 || nw == n1 + n2 {
        return Err(Error::TrivialChain);
    }
    if nw > n1.min(n2) {
        return Err(Error::NeedsCanonicalization { n1, n2, nw });
    }
    Ok(ModelParams { n1, n2, nw })
}

/// One involution of the model's labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relabel {
    /// `n1 <-> n2`; state `i -> nw - i`.
    UrnSwap,
    /// `nw <-> nb`; state `i -> n1 - i`.
    ColorSwap,
}

impl Relabel {
    fn apply_params(self, (n1, n2, nw): (u32, u32, u32)) -> (u32, u32, u32) {
        match self {
            Relabel::UrnSwap => (n2, n1, nw),
            Relabel::ColorSwap => (n1, n2, n1 + n2 - nw),
        }
    }

    fn apply_state(self, (n1, _, nw): (u32, u32, u32), i: i64) -> i64 {
        match self {
            Relabel::UrnSwap => nw as i64 - i,
            Relabel::ColorSwap => n1 as i64 - i,
        }
    }
}

/// Bijection between the states of an arbitrary model and its canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateMap {
    pub original: (u32, u32, u32),
    pub steps: Vec<Relabel>,
}

impl StateMap {
    /// Valid white counts in urn 1 for the original labelling.
    pub fn original_range(&self) -> std::ops::RangeInclusive<usize> {
        let (n1, n2, nw) = self.original;
        let lo = nw.saturating_sub(n2) as usize;
        let hi = nw.min(n1) as usize;
        lo..=hi
    }

    pub fn is_identity(&self) -> bool {
        self.steps.is_empty()
    }

    /// Maps an original state to its canonical label.
    pub fn apply(&self, i: usize) -> usize {
        let mut tuple = self.original;
        let mut state = i as i64;
        for step in &self.steps {
            state = step.apply_state(tuple, state);
            tuple = step.apply_params(tuple);
        }
        debug_assert!(state >= 0);
        state as usize
    }

    /// `(original, canonical)` pairs over the whole state space.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.original_range().map(|i| (i, self.apply(i))).collect()
    }
}

/// Relabels `(n1, n2, nw)` into canonical form using the fewest swaps.
///
/// Only a color swap can lower `nw` relative to `min(n1, n2)`, so models
/// where both `nw` and `nb` exceed the smaller urn are rejected with
/// [`Error::NotCanonicalizable`].
pub fn canonicalize(n1: u32, n2: u32, nw: u32) -> Result<(ModelParams, StateMap)> {
    validate(n1, n2, nw)?;
    const CANDIDATES: [&[Relabel]; 4] = [
        &[],
        &[Relabel::UrnSwap],
        &[Relabel::ColorSwap],
        &[Relabel::UrnSwap, Relabel::ColorSwap],
    ];
    for steps in CANDIDATES {
        let (c1, c2, cw) = steps
            .iter()
            .fold((n1, n2, nw), |t, step| step.apply_params(t));
        if cw <= c1.min(c2) {
            if cw == 0 {
                return Err(Error::TrivialChain);
            }
            let map = StateMap {
                original: (n1, n2, nw),
                steps: steps.to_vec(),
            };
            return Ok((
                ModelParams {
                    n1: c1,
                    n2: c2,
                    nw: cw,
                },
                map,
            ));
        }
    }
    Err(Error::NotCanonicalizable { n1, n2, nw })
}

/// Applies a single relabelling to a canonical model. The result must itself
/// be canonical (an urn swap always is).
pub fn relabel(params: ModelParams, step: Relabel) -> Result<(ModelParams, StateMap)> {
    let (n1, n2, nw) = step.apply_params((params.n1, params.n2, params.nw));
    let relabelled = new_model(n1, n2, nw)?;
    let map = StateMap {
        original: (params.n1, params.n2, params.nw),
        steps: vec![step],
    };
    Ok((relabelled, map))
}

/// Probabilities of moving up, down, or holding from one state.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRow<S> {
    pub p: S,
    pub q: S,
    pub r: S,
}

pub fn transition_row(params: &ModelParams, i: usize) -> Result<TransitionRow<Rational>> {
    params.check_state(i, "state")?;
    let i = i as i64;
    let (n1, nw, nb) = (params.n1 as i64, params.nw as i64, params.nb() as i64);
    let den = params.denominator();
    let p = Rational::new(((n1 - i) * (nw - i)).into(), den.into());
    let q = Rational::new((i * (nb - (n1 - i))).into(), den.into());
    let r = Rational::one() - &p - &q;
    Ok(TransitionRow { p, q, r })
}

/// Column-stochastic tridiagonal kernel, `T[i][j] = Pr(i at m+1 | j at m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalKernel<S> {
    pub p: Vec<S>,
    pub q: Vec<S>,
    pub r: Vec<S>,
}

impl<S: Scalar> TridiagonalKernel<S> {
    pub fn states(&self) -> usize {
        self.p.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> S {
        if i == j {
            self.r[j].clone()
        } else if i == j + 1 {
            self.p[j].clone()
        } else if j == i + 1 {
            self.q[j].clone()
        } else {
            S::zero()
        }
    }

    pub fn to_dense(&self) -> DenseMatrix<S> {
        let s = self.states();
        DenseMatrix::from_fn(s, s, |i, j| self.entry(i, j))
    }

    pub fn to_float(&self) -> TridiagonalKernel<f64> {
        let conv = |v: &Vec<S>| v.iter().map(S::to_f64).collect();
        TridiagonalKernel {
            p: conv(&self.p),
            q: conv(&self.q),
            r: conv(&self.r),
        }
    }

    /// One step of the chain: `T * dist`.
    pub fn apply(&self, dist: &[S]) -> Vec<S> {
        let s = self.states();
        (0..s)
            .map(|i| {
                let mut acc = self.r[i].clone() * dist[i].clone();
                if i > 0 {
                    acc = acc + self.p[i - 1].clone() * dist[i - 1].clone();
                }
                if i + 1 < s {
                    acc = acc + self.q[i + 1].clone() * dist[i + 1].clone();
                }
                acc
            })
            .collect()
    }
}

pub fn build_kernel(params: &ModelParams) -> TridiagonalKernel<Rational> {
    let rows: Vec<_> = (0..params.states())
        .map(|i| transition_row(params, i).expect("state in range"))
        .collect();
    TridiagonalKernel {
        p: rows.iter().map(|row| row.p.clone()).collect(),
        q: rows.iter().map(|row| row.q.clone()).collect(),
        r: rows.into_iter().map(|row| row.r).collect(),
    }
}

/// Probability vector over the states `0..=nw`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionVector<S> {
    weights: Vec<S>,
}

impl<S: Scalar> DistributionVector<S> {
    /// Checks non-negativity and normalization (exactly for rationals,
    /// within `1e-12` for floats).
    pub fn new(weights: Vec<S>) -> Result<Self> {
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::InvalidArgument(
                "distribution has a negative weight".into(),
            ));
        }
        let total = weights.iter().fold(S::zero(), |acc, w| acc + w.clone());
        let normalized = match S::BACKEND {
            crate::scalar::Backend::Exact => total.is_one(),
            crate::scalar::Backend::Float => (total.to_f64() - 1.0).abs() <= 1e-12,
        };
        if !normalized {
            return Err(Error::InvalidArgument(format!(
                "distribution sums to {total}, not 1"
            )));
        }
        Ok(Self { weights })
    }

    /// Wraps weights without validation; for spectral evaluations whose
    /// float rounding may leave tiny negative entries.
    pub(crate) fn from_raw(weights: Vec<S>) -> Self {
        Self { weights }
    }

    pub fn point_mass(states: usize, j: usize) -> Self {
        let mut weights = vec![S::zero(); states];
        weights[j] = S::one();
        Self { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<S> {
        self.weights
    }

    pub fn to_float(&self) -> DistributionVector<f64> {
        DistributionVector {
            weights: self.weights.iter().map(S::to_f64).collect(),
        }
    }
}

impl<S> std::ops::Index<usize> for DistributionVector<S> {
    type Output = S;

    fn index(&self, i: usize) -> &S {
        &self.weights[i]
    }
}

/// Hypergeometric law `C(nw,i) C(n-nw, n1-i) / C(n, n1)`.
pub fn stationary_distribution(params: &ModelParams) -> DistributionVector<Rational> {
    let (n, n1, nw) = (params.n() as i64, params.n1() as i64, params.nw() as i64);
    let total = binomial(n, n1);
    let weights = (0..=nw)
        .map(|i| Rational::new(binomial(nw, i) * binomial(n - nw, n1 - i), total.clone()))
        .collect();
    DistributionVector { weights }
}

/// `true` when every column of the kernel sums to one (exactly).
pub fn is_column_stochastic(kernel: &TridiagonalKernel<Rational>) -> bool {
    (0..kernel.states()).all(|j| {
        let sum = kernel.p[j].clone() + &kernel.q[j] + &kernel.r[j];
        sum.is_one()
            && [&kernel.p[j], &kernel.q[j], &kernel.r[j]]
                .iter()
                .all(|x| !x.is_negative() && **x <= Rational::one())
    }) && kernel.q.first().is_none_or(Zero::is_zero)
        && kernel.p.last().is_none_or(Zero::is_zero)
}
