//! Scalar backends.
//!
//! Every closed-form quantity of the chain is built in exact rational
//! arithmetic. Values may be converted to `f64` (total, rounding once), but
//! there is deliberately no conversion in the other direction.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Arbitrary-precision rational number.
pub type Rational = BigRational;

/// Which arithmetic a computation runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Backend::Exact),
            "float" => Ok(Backend::Float),
            other => Err(format!("unknown backend `{other}` (expected exact|float)")),
        }
    }
}

impl Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Exact => "exact",
            Backend::Float => "float",
        })
    }
}

/// Numeric type usable by the generic linear algebra and distribution code.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    const BACKEND: Backend;

    /// Exact-to-backend conversion. Identity for the exact backend.
    fn from_rational(r: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    fn from_int(v: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(v)))
    }

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Text form used by the CLI: `num/den` for rationals, shortest
    /// round-trip decimal for floats.
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Scalar for Rational {
    const BACKEND: Backend = Backend::Exact;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_int(v: i64) -> Self {
        v as f64
    }

    /// Shortest round-trip digits; exponent form outside `[1e-5, 1e16)`.
    fn render(&self) -> String {
        let a = self.abs();
        if *self == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
            self.to_string()
        } else {
            format!("{self:e}")
        }
    }

    fn ratio(num: i64, den: i64) -> Self {
        f64::from_i64(num).unwrap() / f64::from_i64(den).unwrap()
    }
}

pub(crate) fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub(crate) fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Binomial coefficient as a big integer; zero outside `0 <= k <= n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for t in 0..k {
        acc *= n - t;
        acc /= t + 1;
    }
    acc
}

/// Rising factorial `(a)_m = a (a+1) ... (a+m-1)`, with `(a)_0 = 1`.
///
/// Stops as soon as a factor is zero, so a nonpositive integer `a` gives an
/// exact zero once the product crosses the origin.
pub fn pochhammer(a: i64, m: usize) -> BigInt {
    let mut acc = BigInt::one();
    for t in 0..m as i64 {
        let factor = a + t;
        if factor == 0 {
            return BigInt::zero();
        }
        acc *= factor;
    }
    acc
}

pub fn factorial(m: usize) -> BigInt {
    (1..=m as u64).fold(BigInt::one(), |acc, t| acc * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pochhammer_vanishes_past_zero() {
        assert_eq!(pochhammer(-1, 2), BigInt::zero());
        assert_eq!(pochhammer(-2, 2), BigInt::from(2));
        assert_eq!(pochhammer(3, 0), BigInt::one());
        assert_eq!(pochhammer(1, 5), factorial(5));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(200, 100).to_string().len(), 59);
        assert_eq!(binomial(4, 2), BigInt::from(6));
        assert_eq!(binomial(3, 5), BigInt::zero());
    }

    #[test]
    fn render_forms() {
        assert_eq!(rat(-1, 2).render(), "-1/2");
        assert_eq!(int(1).render(), "1");
        assert_eq!((-0.5f64).render(), "-0.5");
        assert_eq!(4.04e-6f64.render(), "4.04e-6");
        assert_eq!(0.0f64.render(), "0");
        assert_eq!(<f64 as Scalar>::from_rational(&rat(1, 3)), 1.0 / 3.0);
    }

    #[test]
    fn backend_parse() {
        assert_eq!("EXACT".parse::<Backend>().unwrap(), Backend::Exact);
        assert!("double".parse::<Backend>().is_err());
    }
}
