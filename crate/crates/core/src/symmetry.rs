//! Symmetrizing transform and spectral decomposition of matrix powers.
//!
//! `D^{-1} T D` with `D = diag(sqrt(pi))` is symmetric. Square roots only
//! enter through `w_k`, `v_k` and `Z`; every identity that involves them has
//! a squared form (`Delta_k^2`, products `v_k(i) v_k(j)`) that stays exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::model::{build_kernel, stationary_distribution, ModelParams};
use crate::scalar::{Rational, Scalar};
use crate::spectral::{eigen_basis, EigenBasis};

/// `Delta_k^2 = 1 / sum_i c_k(i)^2 / pi_i`.
pub fn delta_sq(params: &ModelParams, c_k: &[Rational]) -> Result<Rational> {
    if c_k.len() != params.states() {
        return Err(Error::LengthMismatch {
            left: c_k.len(),
            right: params.states(),
        });
    }
    let pi = stationary_distribution(params);
    delta_sq_with(pi.weights(), c_k)
}

fn delta_sq_with(pi: &[Rational], c_k: &[Rational]) -> Result<Rational> {
    let norm = c_k
        .iter()
        .zip(pi)
        .fold(Rational::zero(), |acc, (c, p)| acc + c * c / p);
    if norm.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(norm.recip())
}

/// `sqrt(root_of) * times`, kept symbolic so exact values survive a square
/// root of a non-square rational.
#[derive(Debug, Clone, PartialEq)]
pub struct Radical<S> {
    pub root_of: S,
    pub times: S,
}

impl<S: Scalar> Radical<S> {
    pub fn to_f64(&self) -> f64 {
        self.root_of.to_f64().sqrt() * self.times.to_f64()
    }
}

/// A vector `sqrt(scale_sq) * unscaled`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledVector {
    pub scale_sq: Rational,
    pub unscaled: Vec<Rational>,
}

impl ScaledVector {
    pub fn component(&self, i: usize) -> Radical<Rational> {
        Radical {
            root_of: self.scale_sq.clone(),
            times: self.unscaled[i].clone(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.unscaled.len())
            .map(|i| self.component(i).to_f64())
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SymmetricEigenSystem {
    pub params: ModelParams,
    pub pi: Vec<Rational>,
    pub eigenvalues: Vec<Rational>,
    /// Right eigenvectors with the sign fixed so that `c_k(0) > 0`.
    pub c: Vec<Vec<Rational>>,
    pub delta_sq: Vec<Rational>,
    /// Columns are the orthonormal eigenvectors `w_k` of `Z`.
    pub w: DenseMatrix<f64>,
    /// Columns are the pi-orthonormal vectors `v_k = Delta_k c_k / pi`.
    pub v: DenseMatrix<f64>,
}

impl SymmetricEigenSystem {
    pub fn states(&self) -> usize {
        self.pi.len()
    }

    /// `v_k` in exact symbolic form.
    pub fn v_exact(&self, k: usize) -> ScaledVector {
        ScaledVector {
            scale_sq: self.delta_sq[k].clone(),
            unscaled: self.c[k].iter().zip(&self.pi).map(|(c, p)| c / p).collect(),
        }
    }

    /// `v_k(i) v_k(j)`, exact.
    pub fn v_product(&self, k: usize, i: usize, j: usize) -> Rational {
        &self.delta_sq[k] * &self.c[k][i] * &self.c[k][j] / (&self.pi[i] * &self.pi[j])
    }

    /// `sum_i c_k(i) c_l(i) / pi_i`, which is `delta_{kl} / Delta_k^2`.
    pub fn weighted_gram(&self, k: usize, l: usize) -> Rational {
        self.c[k]
            .iter()
            .zip(&self.c[l])
            .zip(&self.pi)
            .fold(Rational::zero(), |acc, ((a, b), p)| acc + a * b / p)
    }
}

fn signed_sqrt(square: &Rational, negative: bool) -> f64 {
    let root = Scalar::to_f64(square).sqrt();
    if negative {
        -root
    } else {
        root
    }
}

pub fn symmetric_system(params: &ModelParams, basis: &EigenBasis) -> SymmetricEigenSystem {
    let pi = stationary_distribution(params).into_weights();
    let c: Vec<Vec<Rational>> = basis
        .columns
        .iter()
        .map(|col| {
            if col[0].is_negative() {
                col.iter().map(|x| -x).collect()
            } else {
                col.clone()
            }
        })
        .collect();
    let delta_sq: Vec<Rational> = c
        .par_iter()
        .map(|col| delta_sq_with(&pi, col).expect("eigenvectors are nonzero"))
        .collect();
    let s = pi.len();
    let w = DenseMatrix::from_fn(s, s, |i, k| {
        let sq = &delta_sq[k] * &c[k][i] * &c[k][i] / &pi[i];
        signed_sqrt(&sq, c[k][i].is_negative())
    });
    let v = DenseMatrix::from_fn(s, s, |i, k| {
        let sq = &delta_sq[k] * &c[k][i] * &c[k][i] / (&pi[i] * &pi[i]);
        signed_sqrt(&sq, c[k][i].is_negative())
    });
    SymmetricEigenSystem {
        params: *params,
        pi,
        eigenvalues: basis.spectrum.values.clone(),
        c,
        delta_sq,
        w,
        v,
    }
}

/// `Z = D^{-1} T D`, `Z_ij = T_ij sqrt(pi_j / pi_i)`.
pub fn symmetrized_matrix(params: &ModelParams) -> DenseMatrix<f64> {
    let t = build_kernel(params).to_dense();
    let pi = stationary_distribution(params);
    let s = params.states();
    DenseMatrix::from_fn(s, s, |i, j| {
        let tij = &t[(i, j)];
        if tij.is_zero() {
            return 0.0;
        }
        // T_ij^2 pi_j / pi_i is symmetric in (i, j) by detailed balance.
        let sq = tij * tij * &pi[j] / &pi[i];
        signed_sqrt(&sq, tij.is_negative())
    })
}

/// Precomputed data for `T^m_ij = (1/pi_j) sum_k Delta_k^2 lambda_k^m c_k(i) c_k(j)`.
///
/// The exact route sums rationals. The float route evaluates the same sum
/// in binary fixed point with enough fractional bits to absorb the
/// cancellation between terms of size up to `1/sqrt(pi_i pi_j)`, then rounds
/// once to `f64`.
#[derive(Debug, Clone)]
pub struct SpectralExpansion {
    params: ModelParams,
    pi: Vec<Rational>,
    eigenvalues: Vec<Rational>,
    /// `Delta_k^2 c_k(i)`
    left: Vec<Vec<Rational>>,
    /// `c_k(j) / pi_j`
    right: Vec<Vec<Rational>>,
    fixed: FixedData,
}

#[derive(Debug, Clone)]
struct FixedData {
    frac_bits: u64,
    pi: Vec<BigInt>,
    eigenvalues: Vec<BigInt>,
    /// `v_k(i)` in fixed point, indexed `[k][i]`.
    v: Vec<Vec<BigInt>>,
}

fn to_fixed(x: &Rational, frac_bits: u64) -> BigInt {
    (x.numer() << frac_bits).div_floor(x.denom())
}

fn fixed_to_f64(x: BigInt, frac_bits: u64) -> f64 {
    let r = Rational::new_raw(x, BigInt::one() << frac_bits);
    Scalar::to_f64(&r)
}

fn fixed_pow(base: &BigInt, mut exp: u64, frac_bits: u64) -> BigInt {
    let mut result = BigInt::one() << frac_bits;
    let mut b = base.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            result = (result * &b) >> frac_bits;
        }
        exp >>= 1;
        if exp > 0 {
            b = (&b * &b) >> frac_bits;
        }
    }
    result
}

fn rational_pow(x: &Rational, m: u64) -> Rational {
    let m = u32::try_from(m).expect("exact powers are limited to u32 exponents");
    Rational::new_raw(
        num_traits::pow::Pow::pow(x.numer(), m),
        num_traits::pow::Pow::pow(x.denom(), m),
    )
}

impl SpectralExpansion {
    pub fn new(params: &ModelParams) -> Self {
        let basis = eigen_basis(params);
        Self::from_system(&symmetric_system(params, &basis))
    }

    pub fn from_system(system: &SymmetricEigenSystem) -> Self {
        let s = system.states();
        let left: Vec<Vec<Rational>> = (0..s)
            .map(|k| {
                system.c[k]
                    .iter()
                    .map(|c| c * &system.delta_sq[k])
                    .collect()
            })
            .collect();
        let right: Vec<Vec<Rational>> = (0..s)
            .map(|k| {
                system.c[k]
                    .iter()
                    .zip(&system.pi)
                    .map(|(c, p)| c / p)
                    .collect()
            })
            .collect();

        // |v_k(i)| <= 1/sqrt(pi_i): the largest partial sums carry about
        // bits(1/pi_min) integer bits; the rest of the budget is precision.
        let inv_pi_min = system
            .pi
            .iter()
            .map(|p| p.recip().ceil().to_integer())
            .max()
            .unwrap_or_else(BigInt::one);
        let frac_bits = inv_pi_min.bits() + 192 + (s as u64).max(2).ilog2() as u64 + 64;
        let v = (0..s)
            .into_par_iter()
            .map(|k| {
                (0..s)
                    .map(|i| {
                        if k == 0 {
                            return BigInt::one() << frac_bits;
                        }
                        let sq = &system.delta_sq[k] * &system.c[k][i] * &system.c[k][i]
                            / (&system.pi[i] * &system.pi[i]);
                        let root = ((sq.numer() << (2 * frac_bits)) / sq.denom()).sqrt();
                        if system.c[k][i].is_negative() {
                            -root
                        } else {
                            root
                        }
                    })
                    .collect()
            })
            .collect();
        let fixed = FixedData {
            frac_bits,
            pi: system.pi.iter().map(|p| to_fixed(p, frac_bits)).collect(),
            eigenvalues: system
                .eigenvalues
                .iter()
                .map(|l| to_fixed(l, frac_bits))
                .collect(),
            v,
        };
        Self {
            params: system.params,
            pi: system.pi.clone(),
            eigenvalues: system.eigenvalues.clone(),
            left,
            right,
            fixed,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn stationary(&self) -> &[Rational] {
        &self.pi
    }

    pub fn eigenvalues(&self) -> &[Rational] {
        &self.eigenvalues
    }

    pub fn states(&self) -> usize {
        self.pi.len()
    }

    /// Column `j` of `T^m` (or of `T^m - pi 1^T` when `deviation` is set).
    pub fn column_exact(&self, j: usize, m: u64, deviation: bool) -> Vec<Rational> {
        let s = self.states();
        let first = usize::from(deviation);
        let weights: Vec<Rational> = (first..s)
            .map(|k| rational_pow(&self.eigenvalues[k], m) * &self.right[k][j])
            .collect();
        (0..s)
            .map(|i| {
                weights
                    .iter()
                    .enumerate()
                    .fold(Rational::zero(), |acc, (idx, wk)| {
                        acc + wk * &self.left[idx + first][i]
                    })
            })
            .collect()
    }

    /// Float evaluation of [`Self::column_exact`], correct to well below
    /// one `f64` ulp before the final rounding.
    pub fn column_float(&self, j: usize, m: u64, deviation: bool) -> Vec<f64> {
        let s = self.states();
        if m == 0 {
            // T^0 is known exactly; skip the rounding of the expansion.
            return (0..s)
                .map(|i| {
                    let delta = if i == j {
                        Rational::one()
                    } else {
                        Rational::zero()
                    };
                    if deviation {
                        Scalar::to_f64(&(delta - &self.pi[i]))
                    } else {
                        Scalar::to_f64(&delta)
                    }
                })
                .collect();
        }
        let fx = &self.fixed;
        let f = fx.frac_bits;
        let first = usize::from(deviation);
        let weights: Vec<BigInt> = (first..s)
            .map(|k| (fixed_pow(&fx.eigenvalues[k], m, f) * &fx.v[k][j]) >> f)
            .collect();
        (0..s)
            .map(|i| {
                let mut acc = BigInt::zero();
                for (idx, wk) in weights.iter().enumerate() {
                    acc += wk * &fx.v[idx + first][i];
                }
                fixed_to_f64(acc * &fx.pi[i], 3 * f)
            })
            .collect()
    }
}

/// Backends able to evaluate a [`SpectralExpansion`].
pub trait PowerBackend: Scalar {
    fn power_column(expansion: &SpectralExpansion, j: usize, m: u64, deviation: bool) -> Vec<Self>;
}

impl PowerBackend for Rational {
    fn power_column(expansion: &SpectralExpansion, j: usize, m: u64, deviation: bool) -> Vec<Self> {
        expansion.column_exact(j, m, deviation)
    }
}

impl PowerBackend for f64 {
    fn power_column(expansion: &SpectralExpansion, j: usize, m: u64, deviation: bool) -> Vec<Self> {
        expansion.column_float(j, m, deviation)
    }
}

impl SpectralExpansion {
    pub fn power<S: PowerBackend>(&self, m: u64) -> DenseMatrix<S> {
        let columns: Vec<Vec<S>> = (0..self.states())
            .into_par_iter()
            .map(|j| S::power_column(self, j, m, false))
            .collect();
        DenseMatrix::from_columns(&columns)
    }
}

/// `T^m` from the spectral decomposition.
pub fn spectral_power<S: PowerBackend>(params: &ModelParams, m: u64) -> DenseMatrix<S> {
    SpectralExpansion::new(params).power(m)
}

/// `sum_k Delta_k^2 c_k(i) c_k(j)`, which equals `pi_j` on the diagonal and
/// zero elsewhere.
pub fn orthogonality_matrix(system: &SymmetricEigenSystem) -> DenseMatrix<Rational> {
    let s = system.states();
    DenseMatrix::from_fn(s, s, |i, j| {
        (0..s).fold(Rational::zero(), |acc, k| {
            acc + &system.delta_sq[k] * &system.c[k][i] * &system.c[k][j]
        })
    })
}
