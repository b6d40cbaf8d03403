//! Closed-form eigenvalues and right eigenvectors.
//!
//! Substituting `x = u + yz` in the generating polynomial
//! `sum_i c(i) x^i y^(n1-i) z^(nw-i)` expands each monomial binomially. On
//! coefficient vectors this is the Pascal map `b = P c`, and it turns the
//! tridiagonal kernel into a lower-bidiagonal matrix whose eigenvectors
//! `b_k` follow from a two-term recursion.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::model::ModelParams;
use crate::scalar::{binomial, factorial, pochhammer, Rational};

/// `lambda_k = 1 - k (n - k + 1) / (n1 n2)`.
pub fn eigenvalue(params: &ModelParams, k: usize) -> Result<Rational> {
    params.check_state(k, "eigen")?;
    let k = k as i64;
    let n = params.n() as i64;
    Ok(Rational::one() - Rational::new((k * (n - k + 1)).into(), params.denominator().into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<Rational>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the first `k >= 1` with `|lambda_k| = 1`, if any.
    pub fn unit_modulus_index(&self) -> Option<usize> {
        self.values
            .iter()
            .enumerate()
            .skip(1)
            .find(|(_, l)| l.abs().is_one())
            .map(|(k, _)| k)
    }
}

pub fn spectrum(params: &ModelParams) -> Spectrum {
    let values = (0..params.states())
        .map(|k| eigenvalue(params, k).expect("k in range"))
        .collect();
    Spectrum { values }
}

/// Eigenvector of the triangularized kernel, normalized so `b[k] = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularCoefficients {
    pub k: usize,
    pub b: Vec<Rational>,
}

/// Computes `b_k` by the running product of the recursion and by the
/// Pochhammer closed form, and insists they agree.
pub fn b_coefficients(params: &ModelParams, k: usize) -> Result<TriangularCoefficients> {
    params.check_state(k, "eigen")?;
    let product = b_by_recursion(params, k)?;
    let closed = b_by_pochhammer(params, k);
    if product != closed {
        return Err(Error::Internal(format!(
            "recursion and Pochhammer forms of b_{k} disagree"
        )));
    }
    Ok(TriangularCoefficients { k, b: product })
}

fn b_by_recursion(params: &ModelParams, k: usize) -> Result<Vec<Rational>> {
    let (n, n1, nw) = (params.n() as i64, params.n1() as i64, params.nw() as i64);
    let kk = k as i64;
    let mut b = vec![Rational::zero(); params.states()];
    b[k] = Rational::one();
    for j in (k + 1)..params.states() {
        let jj = j as i64;
        let den = (jj - kk) * (jj + kk - n - 1);
        if den == 0 {
            return Err(Error::Internal(format!(
                "vanishing recursion denominator at j={j}, k={k}"
            )));
        }
        let num = -(jj - n1 - 1) * (jj - nw - 1);
        b[j] = &b[j - 1] * Rational::new(num.into(), den.into());
    }
    Ok(b)
}

fn b_by_pochhammer(params: &ModelParams, k: usize) -> Vec<Rational> {
    let (n, n1, nw) = (params.n() as i64, params.n1() as i64, params.nw() as i64);
    let kk = k as i64;
    (0..params.states())
        .map(|i| {
            if i < k {
                return Rational::zero();
            }
            let len = i - k;
            let num = pochhammer(kk - n1, len) * pochhammer(kk - nw, len);
            let den = factorial(len) * pochhammer(2 * kk - n, len);
            let value = Rational::new(num, den);
            if len % 2 == 1 {
                -value
            } else {
                value
            }
        })
        .collect()
}

/// Forward Pascal map `P` with `P[j][i] = C(i, j)`, so `b = P c`.
pub fn pascal_matrix(states: usize) -> DenseMatrix<Rational> {
    DenseMatrix::from_fn(states, states, |j, i| {
        Rational::from_integer(binomial(i as i64, j as i64))
    })
}

/// Inverse Pascal map, `P^{-1}[i][j] = (-1)^(j-i) C(j, i)`.
pub fn inverse_pascal_matrix(states: usize) -> DenseMatrix<Rational> {
    DenseMatrix::from_fn(states, states, |i, j| {
        let c = Rational::from_integer(binomial(j as i64, i as i64));
        if (j + i) % 2 == 1 {
            -c
        } else {
            c
        }
    })
}

/// Clears denominators: returns integers `v * d` and the common denominator `d`.
fn to_integer_vector(v: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let d = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints = v.iter().map(|x| x.numer() * (&d / x.denom())).collect();
    (ints, d)
}

fn binomial_rows(states: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(states);
    for j in 0..states {
        let mut row = vec![BigInt::one(); j + 1];
        for i in 1..j {
            row[i] = &rows[j - 1][i - 1] + &rows[j - 1][i];
        }
        rows.push(row);
    }
    rows
}

/// Triangular-space coefficients to original coefficients:
/// `c_i = sum_{j >= i} (-1)^(j-i) C(j,i) b_j`.
pub fn pascal_to_c(b: &[Rational]) -> Vec<Rational> {
    pascal_apply(b, true)
}

/// Inverse of [`pascal_to_c`]: `b_j = sum_{i >= j} C(i,j) c_i`.
pub fn c_to_b(c: &[Rational]) -> Vec<Rational> {
    pascal_apply(c, false)
}

fn pascal_apply(v: &[Rational], alternate: bool) -> Vec<Rational> {
    let s = v.len();
    let (ints, d) = to_integer_vector(v);
    let binom = binomial_rows(s);
    (0..s)
        .map(|i| {
            let mut acc = BigInt::zero();
            for (j, x) in ints.iter().enumerate().skip(i) {
                if x.is_zero() {
                    continue;
                }
                let term = &binom[j][i] * x;
                if alternate && (j - i) % 2 == 1 {
                    acc -= term;
                } else {
                    acc += term;
                }
            }
            Rational::new(acc, d.clone())
        })
        .collect()
}

/// Right eigenvector of the kernel in the original state coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenVectorOriginal {
    pub k: usize,
    pub c: Vec<Rational>,
}

pub fn pascal_eigenvector(b: &TriangularCoefficients) -> EigenVectorOriginal {
    EigenVectorOriginal {
        k: b.k,
        c: pascal_to_c(&b.b),
    }
}

/// Eigenvector from the terminating hypergeometric series,
/// `c_i = sum_m C(k,m) (-1)^m (k-n1)_{i-m} (k-nw)_{i-m} / ((n2-nw+1)_{i-m} (i-m)!)`.
///
/// Unnormalized; it is a nonzero multiple of the Pascal-route vector.
pub fn c_hypergeometric(params: &ModelParams, k: usize) -> Result<EigenVectorOriginal> {
    params.check_state(k, "eigen")?;
    let (n1, n2, nw) = (params.n1() as i64, params.n2() as i64, params.nw() as i64);
    if n2 < nw {
        return Err(Error::NeedsCanonicalization {
            n1: params.n1(),
            n2: params.n2(),
            nw: params.nw(),
        });
    }
    let kk = k as i64;
    // Hypergeometric coefficients h_r, then a k-th order backward difference.
    let h: Vec<Rational> = (0..params.states())
        .map(|r| {
            let num = pochhammer(kk - n1, r) * pochhammer(kk - nw, r);
            if num.is_zero() {
                return Rational::zero();
            }
            Rational::new(num, pochhammer(n2 - nw + 1, r) * factorial(r))
        })
        .collect();
    let c = (0..params.states())
        .map(|i| {
            (0..=k.min(i)).fold(Rational::zero(), |acc, m| {
                let term = Rational::from_integer(binomial(kk, m as i64)) * &h[i - m];
                if m % 2 == 1 {
                    acc - term
                } else {
                    acc + term
                }
            })
        })
        .collect();
    Ok(EigenVectorOriginal { k, c })
}

/// Returns `s` with `a = s * b`, or `None` when the vectors are not
/// proportional (or `b` is zero).
pub fn proportionality(a: &[Rational], b: &[Rational]) -> Option<Rational> {
    if a.len() != b.len() {
        return None;
    }
    let pivot = b.iter().position(|x| !x.is_zero())?;
    let s = &a[pivot] / &b[pivot];
    a.iter().zip(b).all(|(x, y)| *x == &s * y).then_some(s)
}

/// The bidiagonal matrix `T' = P T P^{-1}`: diagonal
/// `1 - [i(nw-i) + (nb+1)i]/(n1 n2)`, sub-diagonal `(n1-i+1)(nw-i+1)/(n1 n2)`.
pub fn triangularized_matrix(params: &ModelParams) -> DenseMatrix<Rational> {
    let (n1, nw, nb) = (params.n1() as i64, params.nw() as i64, params.nb() as i64);
    let den = params.denominator();
    let s = params.states();
    DenseMatrix::from_fn(s, s, |i, j| {
        let ii = i as i64;
        if i == j {
            Rational::one() - Rational::new((ii * (nw - ii) + (nb + 1) * ii).into(), den.into())
        } else if j + 1 == i {
            Rational::new(((n1 - ii + 1) * (nw - ii + 1)).into(), den.into())
        } else {
            Rational::zero()
        }
    })
}

/// Complete closed-form eigensystem of the kernel.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub params: ModelParams,
    pub spectrum: Spectrum,
    pub triangular: Vec<TriangularCoefficients>,
    /// Pascal-route right eigenvectors, `columns[k] = c_k`.
    pub columns: Vec<Vec<Rational>>,
}

impl EigenBasis {
    /// The matrix `S` whose `k`-th column is `c_k`.
    pub fn matrix(&self) -> DenseMatrix<Rational> {
        DenseMatrix::from_columns(&self.columns)
    }

    pub fn states(&self) -> usize {
        self.columns.len()
    }
}

pub fn eigen_basis(params: &ModelParams) -> EigenBasis {
    let triangular: Vec<TriangularCoefficients> = (0..params.states())
        .into_par_iter()
        .map(|k| b_coefficients(params, k).expect("canonical params have nonzero denominators"))
        .collect();
    let columns = triangular.par_iter().map(|b| pascal_to_c(&b.b)).collect();
    EigenBasis {
        params: *params,
        spectrum: spectrum(params),
        triangular,
        columns,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_kernel, new_model, stationary_distribution};
    use crate::scalar::{int, rat};
    use proptest::prelude::*;

    fn m222() -> ModelParams {
        new_model(2, 2, 2).unwrap()
    }

    #[test]
    fn eigenvalue_examples() {
        let m = m222();
        assert_eq!(eigenvalue(&m, 0).unwrap(), int(1));
        assert_eq!(eigenvalue(&m, 1).unwrap(), int(0));
        assert_eq!(eigenvalue(&m, 2).unwrap(), rat(-1, 2));
        assert!(eigenvalue(&m, 3).is_err());
        // n1 = nw gives lambda_1 = 1 - n / (n1 n2).
        let m = new_model(3, 5, 3).unwrap();
        assert_eq!(eigenvalue(&m, 1).unwrap(), int(1) - rat(8, 15));
    }

    #[test]
    fn b_examples() {
        let m = m222();
        assert_eq!(
            b_coefficients(&m, 1).unwrap().b,
            vec![int(0), int(1), rat(1, 2)]
        );
        assert_eq!(
            b_coefficients(&m, 0).unwrap().b,
            vec![int(1), int(1), rat(1, 6)]
        );
        assert_eq!(
            b_coefficients(&m, 2).unwrap().b,
            vec![int(0), int(0), int(1)]
        );
    }

    #[test]
    fn pascal_examples() {
        assert_eq!(
            pascal_to_c(&[int(0), int(1), rat(1, 2)]),
            vec![rat(-1, 2), int(0), rat(1, 2)]
        );
        let pi = stationary_distribution(&m222());
        assert_eq!(pascal_to_c(&[int(1), int(1), rat(1, 6)]), pi.weights());
        assert_eq!(
            pascal_to_c(&[int(1), int(0), int(0)]),
            vec![int(1), int(0), int(0)]
        );
    }

    #[test]
    fn pascal_maps_match_matrices() {
        let v: Vec<Rational> = (0..6).map(|i| rat(i * i - 3, i + 2)).collect();
        assert_eq!(pascal_to_c(&v), inverse_pascal_matrix(6).mul_vec(&v));
        assert_eq!(c_to_b(&v), pascal_matrix(6).mul_vec(&v));
    }

    #[test]
    fn hypergeometric_examples() {
        let m = m222();
        assert_eq!(
            c_hypergeometric(&m, 1).unwrap().c,
            vec![int(1), int(0), int(-1)]
        );
        assert_eq!(
            c_hypergeometric(&m, 0).unwrap().c,
            vec![int(1), int(4), int(1)]
        );
    }

    #[test]
    fn triangularized_222() {
        let t = triangularized_matrix(&m222());
        assert_eq!(t.diagonal(), vec![int(1), int(0), rat(-1, 2)]);
        assert!(t.is_lower_triangular());
    }

    #[test]
    fn eigen_basis_222() {
        let m = m222();
        let basis = eigen_basis(&m);
        let t = build_kernel(&m).to_dense();
        let s = basis.matrix();
        let lambda = DenseMatrix::from_fn(3, 3, |i, j| {
            if i == j {
                basis.spectrum.values[i].clone()
            } else {
                int(0)
            }
        });
        assert_eq!(t.mul(&s), s.mul(&lambda));
        assert!(proportionality(&basis.columns[1], &[int(1), int(0), int(-1)]).is_some());
        assert!(proportionality(&basis.columns[0], &[int(1), int(4), int(1)]).is_some());
        assert!(s.inverse().is_some());
    }

    #[test]
    fn proportionality_rejects_mismatch() {
        assert_eq!(
            proportionality(&[int(2), int(4)], &[int(1), int(2)]),
            Some(int(2))
        );
        assert_eq!(proportionality(&[int(2), int(5)], &[int(1), int(2)]), None);
        assert_eq!(proportionality(&[int(0), int(0)], &[int(0), int(0)]), None);
    }

    #[test]
    fn large_basis_is_exact() {
        // Spot-check the eigen-equation on a 101-state chain.
        let m = new_model(100, 100, 100).unwrap();
        let basis = eigen_basis(&m);
        let kernel = build_kernel(&m);
        for k in [1usize, 37, 100] {
            let tc = kernel.apply(&basis.columns[k]);
            let expected: Vec<Rational> = basis.columns[k]
                .iter()
                .map(|x| x * &basis.spectrum.values[k])
                .collect();
            assert_eq!(tc, expected);
        }
    }

    proptest! {
        #[test]
        fn pascal_round_trip(v in proptest::collection::vec((-50i64..50, 1i64..20), 1..14)) {
            let v: Vec<Rational> = v.into_iter().map(|(a, b)| rat(a, b)).collect();
            prop_assert_eq!(c_to_b(&pascal_to_c(&v)), v.clone());
            prop_assert_eq!(pascal_to_c(&c_to_b(&v)), v);
        }
    }
}
