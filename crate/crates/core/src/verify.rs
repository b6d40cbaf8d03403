//! Exhaustive exact check of the structural identities over every canonical
//! model up to a given ball count.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::matrix::DenseMatrix;
use crate::mixing::eigen_moment_exact;
use crate::model::{
    build_kernel, canonicalize, is_column_stochastic, stationary_distribution, ModelParams,
};
use crate::oracle::{ball_swap_kernel, charpoly_residual, dense_power};
use crate::scalar::{int, rat, Rational, Scalar};
use crate::spectral::{
    b_coefficients, c_hypergeometric, c_to_b, eigen_basis, inverse_pascal_matrix, pascal_matrix,
    pascal_to_c, proportionality, triangularized_matrix,
};
use crate::symmetry::{
    delta_sq, orthogonality_matrix, symmetric_system, symmetrized_matrix, SpectralExpansion,
};

#[derive(Debug, Clone, Serialize)]
pub struct InvariantResult {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// First failing case, if any.
    pub failure: Option<String>,
}

type Check = fn(&ModelParams) -> Result<(), String>;

/// Largest exponent used by the power and moment checks.
pub const MAX_POWER: u64 = 20;

const CHECKS: &[(&str, Check)] = &[
    ("column-stochastic kernel", check_column_stochastic),
    ("detailed balance", check_detailed_balance),
    ("stationary fixed point", check_fixed_point),
    ("float backend consistency", check_backend_consistency),
    ("b recursion equals Pochhammer form", check_recursion),
    ("eigen-equation, Pascal route", check_eigen_pascal),
    (
        "eigen-equation, hypergeometric route",
        check_eigen_hypergeometric,
    ),
    ("simple decreasing spectrum", check_spectrum_simple),
    ("triangularization P T P^-1 = T'", check_triangularization),
    ("Pascal round trip", check_pascal_round_trip),
    ("charpoly roots and non-roots", check_charpoly),
    ("eigenbasis invertible", check_basis_invertible),
    ("orthogonality relation", check_orthogonality),
    ("measure positivity", check_measure_positive),
    ("normalization invariance", check_normalization_invariance),
    ("Z symmetric with eigenvectors w_k", check_symmetrized),
    ("spectral power equals dense power", check_spectral_power),
    ("sum_k>=1 v_k(i)^2 = 1/pi_i - 1", check_variance_identity),
    ("eigen-moment identity", check_eigen_moment),
];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn label(p: &ModelParams) -> String {
    format!("({},{},{})", p.n1(), p.n2(), p.nw())
}

/// Runs every invariant over all canonical models with `n <= max_n`, plus
/// the canonicalization check over all raw `(n1, n2, nw)` triples.
pub fn run_suite(max_n: u32) -> Vec<InvariantResult> {
    let models = ModelParams::enumerate_canonical(max_n);
    let mut results: Vec<InvariantResult> = CHECKS
        .par_iter()
        .map(|(name, check)| {
            let failure = models
                .iter()
                .find_map(|p| check(p).err().map(|e| format!("{}: {e}", label(p))));
            InvariantResult {
                name,
                passed: failure.is_none(),
                cases: models.len(),
                failure,
            }
        })
        .collect();
    let (cases, failure) = check_canonicalization(max_n);
    results.push(InvariantResult {
        name: "canonicalization soundness",
        passed: failure.is_none(),
        cases,
        failure,
    });
    results
}

fn check_column_stochastic(p: &ModelParams) -> Result<(), String> {
    ensure(is_column_stochastic(&build_kernel(p)), || {
        "column sums differ from 1".into()
    })
}

fn check_detailed_balance(p: &ModelParams) -> Result<(), String> {
    let t = build_kernel(p).to_dense();
    let pi = stationary_distribution(p);
    for i in 0..p.states() {
        for j in 0..p.states() {
            ensure(&t[(i, j)] * &pi[j] == &t[(j, i)] * &pi[i], || {
                format!("pair ({i},{j})")
            })?;
        }
    }
    Ok(())
}

fn check_fixed_point(p: &ModelParams) -> Result<(), String> {
    let pi = stationary_distribution(p);
    let sum = pi.weights().iter().fold(Rational::zero(), |a, x| a + x);
    ensure(sum.is_one(), || "pi does not sum to 1".into())?;
    ensure(build_kernel(p).apply(pi.weights()) == pi.weights(), || {
        "T pi != pi".into()
    })
}

fn check_backend_consistency(p: &ModelParams) -> Result<(), String> {
    let exact = build_kernel(p).to_dense();
    let float = exact.to_float();
    for i in 0..p.states() {
        for j in 0..p.states() {
            let e = Scalar::to_f64(&exact[(i, j)]);
            ensure((e - float[(i, j)]).abs() <= 1e-15 * e.abs(), || {
                format!("entry ({i},{j})")
            })?;
        }
    }
    Ok(())
}

fn check_recursion(p: &ModelParams) -> Result<(), String> {
    for k in 0..p.states() {
        let b = b_coefficients(p, k).map_err(|e| e.to_string())?;
        ensure(b.b[k].is_one(), || format!("b_{k}[{k}] != 1"))?;
    }
    Ok(())
}

fn is_eigenvector(t: &DenseMatrix<Rational>, c: &[Rational], lambda: &Rational) -> bool {
    c.iter().any(|x| !x.is_zero())
        && t.mul_vec(c) == c.iter().map(|x| x * lambda).collect::<Vec<_>>()
}

fn check_eigen_pascal(p: &ModelParams) -> Result<(), String> {
    let t = build_kernel(p).to_dense();
    let basis = eigen_basis(p);
    for k in 0..p.states() {
        ensure(
            is_eigenvector(&t, &basis.columns[k], &basis.spectrum.values[k]),
            || format!("k={k}"),
        )?;
    }
    Ok(())
}

fn check_eigen_hypergeometric(p: &ModelParams) -> Result<(), String> {
    let t = build_kernel(p).to_dense();
    let basis = eigen_basis(p);
    for k in 0..p.states() {
        let c = c_hypergeometric(p, k).map_err(|e| e.to_string())?.c;
        ensure(is_eigenvector(&t, &c, &basis.spectrum.values[k]), || {
            format!("k={k}")
        })?;
        let ratio = proportionality(&basis.columns[k], &c);
        ensure(ratio.is_some_and(|s| !s.is_zero()), || {
            format!("k={k} not proportional")
        })?;
    }
    Ok(())
}

fn check_spectrum_simple(p: &ModelParams) -> Result<(), String> {
    let values = eigen_basis(p).spectrum.values;
    ensure(values[0].is_one(), || "lambda_0 != 1".into())?;
    ensure(values.windows(2).all(|w| w[0] > w[1]), || {
        "not strictly decreasing".into()
    })?;
    ensure(values.iter().all(|l| l.abs() <= Rational::one()), || {
        "outside [-1,1]".into()
    })
}

fn check_triangularization(p: &ModelParams) -> Result<(), String> {
    let s = p.states();
    let t = build_kernel(p).to_dense();
    let conj = pascal_matrix(s).mul(&t).mul(&inverse_pascal_matrix(s));
    let closed = triangularized_matrix(p);
    ensure(conj == closed, || {
        "P T P^-1 differs from closed form".into()
    })?;
    ensure(closed.is_lower_triangular(), || {
        "not lower triangular".into()
    })?;
    ensure(closed.diagonal() == eigen_basis(p).spectrum.values, || {
        "diagonal != spectrum".into()
    })
}

fn check_pascal_round_trip(p: &ModelParams) -> Result<(), String> {
    let basis = eigen_basis(p);
    for (k, c) in basis.columns.iter().enumerate() {
        ensure(c_to_b(c) == basis.triangular[k].b, || {
            format!("c_to_b, k={k}")
        })?;
        ensure(pascal_to_c(&c_to_b(c)) == *c, || {
            format!("round trip, k={k}")
        })?;
    }
    Ok(())
}

fn check_charpoly(p: &ModelParams) -> Result<(), String> {
    let kernel = build_kernel(p);
    let values = eigen_basis(p).spectrum.values;
    for (k, l) in values.iter().enumerate() {
        ensure(charpoly_residual(&kernel, l).is_zero(), || {
            format!("lambda_{k} not a root")
        })?;
    }
    for w in values.windows(2) {
        let mid = (&w[0] + &w[1]) / int(2);
        ensure(!charpoly_residual(&kernel, &mid).is_zero(), || {
            format!("{mid} is a root")
        })?;
    }
    Ok(())
}

fn check_basis_invertible(p: &ModelParams) -> Result<(), String> {
    let basis = eigen_basis(p);
    let s = basis.matrix();
    ensure(s.inverse().is_some(), || "S singular".into())?;
    let pi = stationary_distribution(p);
    ensure(
        proportionality(&basis.columns[0], pi.weights()).is_some(),
        || "c_0 not proportional to pi".into(),
    )
}

fn check_orthogonality(p: &ModelParams) -> Result<(), String> {
    let sys = symmetric_system(p, &eigen_basis(p));
    let gram = orthogonality_matrix(&sys);
    let s = p.states();
    let expected = DenseMatrix::from_fn(s, s, |i, j| {
        if i == j {
            sys.pi[j].clone()
        } else {
            Rational::zero()
        }
    });
    ensure(gram == expected, || {
        "sum_k Delta_k^2 c_k(i) c_k(j) != pi_j delta_ij".into()
    })?;
    for k in 0..s {
        for l in 0..s {
            let g = sys.weighted_gram(k, l) * &sys.delta_sq[k];
            let want = if k == l {
                Rational::one()
            } else {
                Rational::zero()
            };
            ensure(g == want, || format!("c-orthogonality ({k},{l})"))?;
        }
    }
    Ok(())
}

fn check_measure_positive(p: &ModelParams) -> Result<(), String> {
    let sys = symmetric_system(p, &eigen_basis(p));
    ensure(sys.delta_sq.iter().all(Signed::is_positive), || {
        "Delta^2 <= 0".into()
    })
}

fn check_normalization_invariance(p: &ModelParams) -> Result<(), String> {
    let basis = eigen_basis(p);
    let scale = rat(-3, 7);
    for (k, c) in basis.columns.iter().enumerate() {
        let scaled: Vec<Rational> = c.iter().map(|x| x * &scale).collect();
        let d = delta_sq(p, c).map_err(|e| e.to_string())?;
        let ds = delta_sq(p, &scaled).map_err(|e| e.to_string())?;
        for i in 0..c.len() {
            for j in 0..c.len() {
                ensure(&d * &c[i] * &c[j] == &ds * &scaled[i] * &scaled[j], || {
                    format!("k={k}")
                })?;
            }
        }
    }
    Ok(())
}

fn check_symmetrized(p: &ModelParams) -> Result<(), String> {
    let z = symmetrized_matrix(p);
    ensure(z.max_abs_diff(&z.transpose()) <= 1e-12, || {
        "Z not symmetric".into()
    })?;
    let sys = symmetric_system(p, &eigen_basis(p));
    for k in 0..p.states() {
        let w = sys.w.column(k);
        let zw = z.mul_vec(&w);
        let lambda = Scalar::to_f64(&sys.eigenvalues[k]);
        let err = zw
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - lambda * b).abs())
            .fold(0.0, f64::max);
        ensure(err <= 1e-9, || format!("Z w_{k} residual {err}"))?;
        ensure(w[0] > 0.0, || format!("w_{k}(0) <= 0"))?;
    }
    let wtw = sys.w.transpose().mul(&sys.w);
    let err = wtw.max_abs_diff(&DenseMatrix::identity(p.states()));
    ensure(err <= 1e-10, || format!("W not orthonormal ({err})"))
}

fn check_spectral_power(p: &ModelParams) -> Result<(), String> {
    let kernel = build_kernel(p);
    let exp = SpectralExpansion::new(p);
    let t = kernel.to_dense();
    let mut dense = DenseMatrix::identity(p.states());
    for m in 0..=MAX_POWER {
        ensure(exp.power::<Rational>(m) == dense, || format!("m={m}"))?;
        dense = t.mul(&dense);
    }
    ensure(dense_power(&kernel, 3) == exp.power::<Rational>(3), || {
        "dense_power m=3".into()
    })
}

fn check_variance_identity(p: &ModelParams) -> Result<(), String> {
    let sys = symmetric_system(p, &eigen_basis(p));
    for i in 0..p.states() {
        let sum = (1..p.states()).fold(Rational::zero(), |acc, k| acc + sys.v_product(k, i, i));
        ensure(sum == sys.pi[i].recip() - Rational::one(), || {
            format!("i={i}")
        })?;
    }
    Ok(())
}

fn check_eigen_moment(p: &ModelParams) -> Result<(), String> {
    let sys = symmetric_system(p, &eigen_basis(p));
    let exp = SpectralExpansion::from_system(&sys);
    for m in [0, 1, 2, 5, MAX_POWER] {
        for j in 0..p.states() {
            for k in 0..p.states() {
                eigen_moment_exact(&sys, &exp, j, m, k).map_err(|e| e.to_string())?;
            }
        }
    }
    Ok(())
}

/// Every raw triple with `n <= max_n`: canonicalizable ones must be
/// permutation-similar to their canonical kernel; the rest must be exactly
/// those where both color counts exceed the smaller urn.
fn check_canonicalization(max_n: u32) -> (usize, Option<String>) {
    let mut cases = 0;
    for n in 2..=max_n {
        for n1 in 1..n {
            let n2 = n - n1;
            for nw in 1..n {
                cases += 1;
                let label = format!("({n1},{n2},{nw})");
                match canonicalize(n1, n2, nw) {
                    Ok((canon, map)) => {
                        let (_, original) = ball_swap_kernel(n1, n2, nw);
                        let t = build_kernel(&canon).to_dense();
                        let lo = *map.original_range().start();
                        for (a, ca) in map.pairs() {
                            for (b, cb) in map.pairs() {
                                if original[(a - lo, b - lo)] != t[(ca, cb)] {
                                    return (cases, Some(format!("{label}: entry ({a},{b})")));
                                }
                            }
                        }
                    }
                    Err(crate::Error::NotCanonicalizable { .. }) => {
                        let small = n1.min(n2);
                        if nw <= small || n - nw <= small {
                            return (cases, Some(format!("{label}: wrongly rejected")));
                        }
                    }
                    Err(e) => return (cases, Some(format!("{label}: {e}"))),
                }
            }
        }
    }
    (cases, None)
}
