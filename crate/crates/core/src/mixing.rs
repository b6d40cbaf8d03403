//! m-step distributions, total-variation curves and mixing-time bounds.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DistributionVector, ModelParams};
use crate::scalar::{Rational, Scalar};
use crate::symmetry::{
    PowerBackend, Radical, ScaledVector, SpectralExpansion, SymmetricEigenSystem,
};

impl SpectralExpansion {
    /// `rho_m(.; j)`, column `j` of `T^m`.
    pub fn distribution_at<S: PowerBackend>(
        &self,
        j: usize,
        m: u64,
    ) -> Result<DistributionVector<S>> {
        self.params().check_state(j, "start")?;
        Ok(DistributionVector::from_raw(S::power_column(
            self, j, m, false,
        )))
    }

    /// `|| rho_m(.; j) - pi ||_TV`, summed from the `k >= 1` terms only so
    /// that small distances keep full relative precision.
    pub fn tv_from_start<S: PowerBackend>(&self, j: usize, m: u64) -> Result<S> {
        self.params().check_state(j, "start")?;
        let deviation = S::power_column(self, j, m, true);
        Ok(half_abs_sum(deviation.into_iter()))
    }
}

fn half_abs_sum<S: Scalar>(terms: impl Iterator<Item = S>) -> S {
    let total = terms.fold(S::zero(), |acc, x| acc + x.abs());
    total / S::from_int(2)
}

pub fn distribution_at<S: PowerBackend>(
    params: &ModelParams,
    j: usize,
    m: u64,
) -> Result<DistributionVector<S>> {
    params.check_state(j, "start")?;
    SpectralExpansion::new(params).distribution_at(j, m)
}

/// `1/2 sum_i |a_i - b_i|`.
pub fn tv_distance<S: Scalar>(a: &DistributionVector<S>, b: &DistributionVector<S>) -> Result<S> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(half_abs_sum(
        a.weights()
            .iter()
            .zip(b.weights())
            .map(|(x, y)| x.clone() - y.clone()),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TvCurve<S> {
    pub params: ModelParams,
    pub start: usize,
    pub points: Vec<(u64, S)>,
}

/// TV distance to stationarity from state `j` at each requested step count.
/// Points are evaluated concurrently and returned in input order.
pub fn tv_curve<S: PowerBackend>(
    expansion: &SpectralExpansion,
    j: usize,
    m_values: &[u64],
) -> Result<TvCurve<S>> {
    expansion.params().check_state(j, "start")?;
    if m_values.is_empty() {
        return Err(Error::InvalidArgument("m_values must be non-empty".into()));
    }
    let points = m_values
        .par_iter()
        .map(|&m| expansion.tv_from_start::<S>(j, m).map(|tv| (m, tv)))
        .collect::<Result<Vec<_>>>()?;
    Ok(TvCurve {
        params: *expansion.params(),
        start: j,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Upper,
    Lower,
}

impl std::str::FromStr for BoundKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "upper" => Ok(BoundKind::Upper),
            "lower" => Ok(BoundKind::Lower),
            other => Err(format!(
                "unknown bound kind `{other}` (expected upper|lower)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSpec {
    pub kind: BoundKind,
    pub c: f64,
    pub constant: f64,
    pub m: u64,
    /// Upper: bound on `E_pi[TV]`. Lower: bound on `2 TV` from state 0.
    pub bound_value: f64,
}

/// Step count and bound value of the balanced-case mixing bounds.
///
/// Upper: `m = n ln n / 4 + (c/2 - ln 2 / 8) n` and `E_pi[TV] <= A e^{-2c}`.
/// Lower: `m = n ln n / 8 - c n / 2` and `2 TV >= 1 - b e^{4c}`.
/// Logarithms are natural; `m` is rounded to the nearest integer.
pub fn mixing_bound(
    params: &ModelParams,
    kind: BoundKind,
    c: f64,
    constant: f64,
) -> Result<BoundSpec> {
    if !params.is_balanced() {
        return Err(Error::Unbalanced {
            n1: params.n1(),
            n2: params.n2(),
        });
    }
    if !(constant > 0.0 && constant.is_finite()) || !c.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need finite c and a positive constant (got c={c}, constant={constant})"
        )));
    }
    let n = params.n() as f64;
    let (m, bound_value) = match kind {
        BoundKind::Upper => (
            0.25 * n * n.ln() + (c / 2.0 - std::f64::consts::LN_2 / 8.0) * n,
            constant * (-2.0 * c).exp(),
        ),
        BoundKind::Lower => (
            0.125 * n * n.ln() - c * n / 2.0,
            1.0 - constant * (4.0 * c).exp(),
        ),
    };
    let m = m.round();
    if m < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "c={c} gives a negative step count"
        )));
    }
    Ok(BoundSpec {
        kind,
        c,
        constant,
        m: m as u64,
        bound_value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedTv<S> {
    /// `sum_j pi_j TV(rho_m(.; j), pi)`
    pub average: S,
    /// TV from each start state.
    pub per_state: Vec<S>,
}

/// Stationary average of the TV distance after `m` steps, the quantity the
/// upper mixing bound controls. Requires balanced urns.
pub fn expected_bound_check<S: PowerBackend>(
    expansion: &SpectralExpansion,
    m: u64,
) -> Result<ExpectedTv<S>> {
    let params = expansion.params();
    if !params.is_balanced() {
        return Err(Error::Unbalanced {
            n1: params.n1(),
            n2: params.n2(),
        });
    }
    let per_state = (0..expansion.states())
        .into_par_iter()
        .map(|j| expansion.tv_from_start::<S>(j, m))
        .collect::<Result<Vec<S>>>()?;
    let average = per_state
        .iter()
        .zip(expansion.stationary())
        .fold(S::zero(), |acc, (tv, p)| {
            acc + tv.clone() * S::from_rational(p)
        });
    Ok(ExpectedTv { average, per_state })
}

/// The Cauchy-Schwarz bound on the TV from state 0:
/// `1/2 (n pi_0)^{-1/2} lambda_1^m (sum_i sqrt(pi_i))^2`.
pub fn intermediate_upper_bound(expansion: &SpectralExpansion, m: u64) -> f64 {
    let n = expansion.params().n() as f64;
    let pi0 = Scalar::to_f64(&expansion.stationary()[0]);
    let lambda1 = expansion.eigenvalues().get(1).map_or(0.0, Scalar::to_f64);
    let root_sum: f64 = expansion
        .stationary()
        .iter()
        .map(|p| Scalar::to_f64(p).sqrt())
        .sum();
    0.5 * (n * pi0).powf(-0.5) * lambda1.powf(m as f64) * root_sum * root_sum
}

fn check_pi_orthonormal(system: &SymmetricEigenSystem, k: usize) -> Result<ScaledVector> {
    system.params.check_state(k, "eigen")?;
    let v = system.v_exact(k);
    let norm = v
        .unscaled
        .iter()
        .zip(&system.pi)
        .fold(Rational::zero(), |acc, (u, p)| acc + u * u * p)
        * &v.scale_sq;
    if !norm.is_one() {
        return Err(Error::NotOrthonormal);
    }
    Ok(v)
}

/// `E_{rho_m(.; j)}[v_k]` in exact symbolic form, checked against
/// `lambda_k^m v_k(j)`.
pub fn eigen_moment_exact(
    system: &SymmetricEigenSystem,
    expansion: &SpectralExpansion,
    j: usize,
    m: u64,
    k: usize,
) -> Result<Radical<Rational>> {
    let v = check_pi_orthonormal(system, k)?;
    let rho = expansion.distribution_at::<Rational>(j, m)?;
    let times = v
        .unscaled
        .iter()
        .zip(rho.weights())
        .fold(Rational::zero(), |acc, (u, r)| acc + u * r);
    let lambda_m = num_traits::pow::Pow::pow(&system.eigenvalues[k], m as u32);
    if times != lambda_m * &v.unscaled[j] {
        return Err(Error::Internal(format!(
            "eigen-moment identity fails for k={k}, j={j}, m={m}"
        )));
    }
    Ok(Radical {
        root_of: v.scale_sq,
        times,
    })
}

/// Float counterpart of [`eigen_moment_exact`], checked to `1e-9` relative.
pub fn eigen_moment_float(
    system: &SymmetricEigenSystem,
    expansion: &SpectralExpansion,
    j: usize,
    m: u64,
    k: usize,
) -> Result<f64> {
    check_pi_orthonormal(system, k)?;
    let rho = expansion.distribution_at::<f64>(j, m)?;
    let v = system.v.column(k);
    let moment: f64 = v.iter().zip(rho.weights()).map(|(a, b)| a * b).sum();
    let expected = Scalar::to_f64(&system.eigenvalues[k]).powi(m as i32) * v[j];
    let scale = v.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
    if (moment - expected).abs() > 1e-9 * scale {
        return Err(Error::Internal(format!(
            "eigen-moment identity fails for k={k}, j={j}, m={m}: {moment} vs {expected}"
        )));
    }
    Ok(moment)
}

/// `E[v^2] - E[v]^2` under `dist`.
pub fn variance_under<S: Scalar>(dist: &DistributionVector<S>, v: &[S]) -> Result<S> {
    if dist.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: dist.len(),
            right: v.len(),
        });
    }
    let (mean, second) =
        dist.weights()
            .iter()
            .zip(v)
            .fold((S::zero(), S::zero()), |(m1, m2), (p, x)| {
                let px = p.clone() * x.clone();
                (m1 + px.clone(), m2 + px * x.clone())
            });
    Ok(second - mean.clone() * mean)
}

/// Exact variance of `sqrt(s) u`, which is `s Var(u)`.
pub fn variance_under_scaled(
    dist: &DistributionVector<Rational>,
    v: &ScaledVector,
) -> Result<Rational> {
    Ok(variance_under(dist, &v.unscaled)? * &v.scale_sq)
}

/// Upper limit on the doubling phase of [`cutoff_scan`].
const MAX_SCAN_STEPS: u64 = 1 << 40;

/// A step count `m` with `TV(m - 1) > epsilon >= TV(m)`, found by doubling
/// and bisection on float TV values. TV is not assumed monotone; the
/// crossing is re-checked at `m` and `m - 1` before returning.
pub fn cutoff_scan(expansion: &SpectralExpansion, j: usize, epsilon: f64) -> Result<u64> {
    expansion.params().check_state(j, "start")?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if let Some(k) = expansion
        .eigenvalues()
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, l)| l.abs().is_one())
        .map(|(k, _)| k)
    {
        return Err(Error::NonConvergent {
            k,
            eigenvalue: expansion.eigenvalues()[k].to_string(),
        });
    }
    let tv = |m: u64| expansion.tv_from_start::<f64>(j, m);
    if tv(0)? <= epsilon {
        return Ok(0);
    }
    let (mut lo, mut hi) = (0u64, 1u64);
    while tv(hi)? > epsilon {
        lo = hi;
        hi *= 2;
        if hi > MAX_SCAN_STEPS {
            return Err(Error::Internal(format!(
                "TV stayed above {epsilon} for {MAX_SCAN_STEPS} steps"
            )));
        }
    }
    // Invariant: tv(lo) > epsilon >= tv(hi).
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if tv(mid)? > epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if !(tv(hi)? <= epsilon && tv(hi - 1)? > epsilon) {
        return Err(Error::Internal("cutoff crossing failed re-check".into()));
    }
    Ok(hi)
}
