//! Log-domain probabilities, binomial coefficients and an exact rational
//! oracle.
//!
//! Every probability in this crate that involves `2^(n-1)` or `(t+1)^(n-t)`
//! is carried as a natural logarithm; those factors leave the `f64` range
//! near `n = 1100`.

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rankprob::Mode;

/// Natural log of a probability. Zero probability is `-inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogProb(f64);

impl LogProb {
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);
    pub const ONE: LogProb = LogProb(0.0);

    /// Wraps a log value. Positive values produced by rounding are clamped
    /// to `0`.
    ///
    /// # Panics
    ///
    /// On NaN, or on a value clearly above zero (`> 1e-9`).
    pub fn from_ln(value: f64) -> Self {
        assert!(!value.is_nan(), "log-probability is NaN");
        assert!(value <= 1e-9, "log-probability {value} is above zero");
        LogProb(value.min(0.0))
    }

    pub fn from_prob(p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p), "probability {p} outside [0, 1]");
        LogProb(p.ln())
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn prob(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

// Multiplying probabilities adds their logs.
#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for LogProb {
    type Output = LogProb;

    fn mul(self, rhs: LogProb) -> LogProb {
        LogProb(self.0 + rhs.0)
    }
}

/// `ln Γ(x)` for `x > 0`.
///
/// Backed by `libm::lgamma`, the msun rational/Stirling scheme, which is
/// accurate to about one ulp on the positive axis.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `table[k] = ln(k!)` for `k <= max_n`, built by running sums of `ln k`.
#[derive(Debug, Clone)]
pub struct LogFactorialTable {
    table: Vec<f64>,
}

impl LogFactorialTable {
    pub fn new(max_n: usize) -> Self {
        let mut table = Vec::with_capacity(max_n + 1);
        table.push(0.0);
        let mut acc = 0.0;
        for k in 1..=max_n {
            acc += (k as f64).ln();
            table.push(acc);
        }
        LogFactorialTable { table }
    }

    pub fn max_n(&self) -> usize {
        self.table.len() - 1
    }

    pub fn ln_factorial(&self, k: usize) -> f64 {
        self.table[k]
    }

    /// `ln C(n, k)`, `-inf` when `k` is outside `[0, n]`.
    ///
    /// # Panics
    ///
    /// If `n > max_n`.
    pub fn log_binomial(&self, n: usize, k: i64) -> f64 {
        if k < 0 || k as u64 > n as u64 {
            return f64::NEG_INFINITY;
        }
        let k = k as usize;
        self.table[n] - self.table[k] - self.table[n - k]
    }
}

const SHARED_TABLE_MAX: usize = 1 << 16;

fn shared_table() -> &'static LogFactorialTable {
    static TABLE: OnceLock<LogFactorialTable> = OnceLock::new();
    TABLE.get_or_init(|| LogFactorialTable::new(SHARED_TABLE_MAX))
}

/// `ln C(n, k)` for integer arguments; `-inf` outside `[0, n]`.
///
/// Uses a shared factorial table up to `n = 65536` and log-gamma above.
pub fn log_binomial(n: usize, k: i64) -> f64 {
    if k < 0 || k as u64 > n as u64 {
        return f64::NEG_INFINITY;
    }
    if n <= SHARED_TABLE_MAX {
        return shared_table().log_binomial(n, k);
    }
    let (n, k) = (n as f64, k as f64);
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// Gamma-extended `ln C(n, z) = ln Γ(n+1) - ln Γ(z+1) - ln Γ(n-z+1)`.
pub fn real_log_binomial(n: f64, z: f64) -> Result<f64> {
    if n.is_nan() || n < 0.0 || !z.is_finite() {
        return Err(Error::Domain(format!("C({n}, {z}) needs n >= 0 and finite z")));
    }
    let (a, b) = (z + 1.0, n - z + 1.0);
    if a <= 0.0 || b <= 0.0 {
        return Err(Error::Domain(format!(
            "C({n}, {z}): gamma arguments {a} and {b} must be positive"
        )));
    }
    Ok(ln_gamma(n + 1.0) - ln_gamma(a) - ln_gamma(b))
}

/// `ln Σ exp(x_i)` with a max shift. An empty slice gives `-inf`.
pub fn logsumexp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if terms.len() == 1 {
        return terms[0];
    }
    let sum: f64 = terms.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// `ln(e^a + e^b)`.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(BigRational);

impl ExactRational {
    /// # Panics
    ///
    /// If `den` is zero.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        ExactRational(BigRational::new(num.into(), den.into()))
    }

    pub fn from_integer(value: impl Into<BigInt>) -> Self {
        ExactRational(BigRational::from_integer(value.into()))
    }

    pub fn zero() -> Self {
        ExactRational(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactRational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn pow(&self, exp: i32) -> Self {
        ExactRational(num_traits::Pow::pow(&self.0, exp))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: ExactRational) -> ExactRational {
                ExactRational($trait::$method(self.0, rhs.0))
            }
        }

        impl<'a> $trait<&'a ExactRational> for &'a ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: &'a ExactRational) -> ExactRational {
                ExactRational($trait::$method(&self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

/// Exact `C(n, k)`; zero outside `[0, n]`.
pub fn big_binomial(n: u64, k: i64) -> BigUint {
    if k < 0 || k as u64 > n {
        return BigUint::zero();
    }
    num_integer::binomial(BigUint::from(n), BigUint::from(k as u64))
}

/// Largest `n` accepted by the rational oracle.
pub const RATIONAL_ORACLE_MAX_N: usize = 64;

/// Exact `P_r^(t)`: probability that the rank-`r` arrival at round `t` ends
/// up closest to `1/2`, in the selected rank model.
pub fn rational_will_best(n: usize, t: usize, r: usize, mode: Mode) -> Result<ExactRational> {
    if n > RATIONAL_ORACLE_MAX_N {
        return Err(Error::Size {
            what: "rational oracle",
            n,
            cap: RATIONAL_ORACLE_MAX_N,
        });
    }
    if t < 1 || t > n {
        return Err(Error::range("t", t, 1, n));
    }
    if r < 1 || r > t {
        return Err(Error::range("r", r, 1, t));
    }
    let final_prob = |rank: usize| {
        ExactRational::new(
            BigInt::from(big_binomial(n as u64 - 1, rank as i64 - 1)),
            BigInt::from(BigUint::one() << (n - 1)),
        )
    };
    match mode {
        Mode::Paper => {
            let gaps = (t + 1) as u64;
            let steps = (n - t) as u32;
            let mut sum = ExactRational::zero();
            for j in 0..=steps {
                let weight = BigInt::from(big_binomial(steps as u64, j as i64))
                    * BigInt::from(r as u64).pow(j)
                    * BigInt::from(gaps - r as u64).pow(steps - j);
                sum = sum + final_prob(r + j as usize) * ExactRational::from_integer(weight);
            }
            Ok(sum / ExactRational::from_integer(BigInt::from(gaps).pow(steps)))
        }
        Mode::Exact => {
            let mut row: Vec<ExactRational> = (1..=n).map(final_prob).collect();
            for s in (t..n).rev() {
                let denom = (s + 1) as i64;
                row = (1..=s)
                    .map(|q| {
                        &ExactRational::new(q as i64, denom) * &row[q]
                            + &ExactRational::new(denom - q as i64, denom) * &row[q - 1]
                    })
                    .collect();
            }
            Ok(row[r - 1].clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn log_binomial_examples() {
        assert_eq!(log_binomial(0, 0), 0.0);
        assert_relative_eq!(log_binomial(9, 4), 126f64.ln(), max_relative = 1e-14);
        assert_eq!(log_binomial(5, 7), f64::NEG_INFINITY);
        assert_eq!(log_binomial(5, -1), f64::NEG_INFINITY);
    }

    #[test]
    fn log_binomial_matches_big_integers_up_to_1000() {
        for n in (0..=1000usize).step_by(7).chain([999, 1000]) {
            for k in 0..=n {
                let exact = big_binomial(n as u64, k as i64);
                let ln_exact = big_ln(&BigInt::from(exact));
                let err = (log_binomial(n, k as i64) - ln_exact).abs();
                // |exp(a) - exp(b)| / exp(b) ~ |a - b|
                assert!(err <= 1e-10, "n={n} k={k} err={err}");
            }
        }
    }

    fn big_ln(x: &BigInt) -> f64 {
        let bits = x.bits();
        if bits <= 1000 {
            return x.to_f64().unwrap().ln();
        }
        let shift = bits - 900;
        let top: BigInt = x >> shift;
        top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }

    #[test]
    fn factorial_table_shape() {
        let table = LogFactorialTable::new(50);
        assert_eq!(table.ln_factorial(0), 0.0);
        for k in 1..=50 {
            assert!(table.ln_factorial(k) >= table.ln_factorial(k - 1));
        }
        assert_relative_eq!(table.ln_factorial(10), 3628800f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn ln_gamma_against_mpmath() {
        // 50-digit mpmath values (tests/oracle/gen_values.py).
        let cases = [
            (0.5, 0.57236494292470008707),
            (1.5, -0.12078223763524522235),
            (5.5, 3.9578139676187162939),
            (10.0, 12.801827480081469611),
            (100.5, 361.43554046777762156),
            (1000.25, 5906.947268271117177),
            (1000000.5, 12815511.476902765642),
        ];
        for (x, want) in cases {
            assert_relative_eq!(ln_gamma(x), want, max_relative = 1e-13);
        }
    }

    #[test]
    fn real_log_binomial_examples() {
        assert_relative_eq!(real_log_binomial(9.0, 4.0).unwrap(), 126f64.ln(), epsilon = 1e-10);
        assert_relative_eq!(
            real_log_binomial(9.0, 4.5).unwrap(),
            4.8861995448440370235,
            max_relative = 1e-13
        );
        assert_relative_eq!(real_log_binomial(4.0, 2.0).unwrap(), 6f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(
            real_log_binomial(4.0, 2.5).unwrap(),
            1.6923973575279522352,
            max_relative = 1e-12
        );
        assert!(real_log_binomial(4.0, -1.0).is_err());
        assert!(real_log_binomial(4.0, 5.0).is_err());
        assert!(real_log_binomial(4.0, -0.5).is_ok());
    }

    #[test]
    fn real_and_integer_binomials_agree() {
        for n in [1usize, 2, 7, 50, 300, 1000, 5000] {
            for k in 0..=n {
                let a = real_log_binomial(n as f64, k as f64).unwrap();
                let b = log_binomial(n, k as i64);
                assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn logsumexp_examples() {
        assert_relative_eq!(logsumexp(&[0.5f64.ln(), 0.5f64.ln()]), 0.0, epsilon = 1e-15);
        assert_eq!(logsumexp(&[-3.25]), -3.25);
        assert_relative_eq!(
            logsumexp(&[4f64.ln(), 12f64.ln(), 3f64.ln()]),
            19f64.ln(),
            max_relative = 1e-15
        );
        assert_eq!(logsumexp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert_eq!(ln_add_exp(f64::NEG_INFINITY, -2.0), -2.0);
    }

    #[test]
    fn rational_oracle_examples() {
        let r = rational_will_best(4, 2, 1, Mode::Paper).unwrap();
        assert_eq!(r, ExactRational::new(19, 72));
        let r = rational_will_best(4, 2, 1, Mode::Exact).unwrap();
        assert_eq!(r, ExactRational::new(1, 4));
        for mode in [Mode::Paper, Mode::Exact] {
            assert_eq!(rational_will_best(2, 1, 1, mode).unwrap(), ExactRational::new(1, 2));
        }
        assert_eq!(
            rational_will_best(3, 1, 1, Mode::Paper).unwrap(),
            ExactRational::new(3, 8)
        );
        assert_eq!(
            rational_will_best(3, 1, 1, Mode::Exact).unwrap(),
            ExactRational::new(1, 3)
        );
    }

    #[test]
    fn rational_oracle_errors() {
        assert!(matches!(
            rational_will_best(65, 1, 1, Mode::Exact),
            Err(Error::Size { .. })
        ));
        assert!(matches!(
            rational_will_best(5, 3, 4, Mode::Exact),
            Err(Error::Range { .. })
        ));
        assert!(matches!(
            rational_will_best(5, 0, 1, Mode::Paper),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn log_prob_bounds() {
        assert!(LogProb::ZERO.is_zero());
        assert_eq!(LogProb::ONE.prob(), 1.0);
        assert_eq!(LogProb::from_ln(1e-13).ln(), 0.0);
        let p = LogProb::from_prob(0.25) * LogProb::from_prob(0.5);
        assert_relative_eq!(p.prob(), 0.125, max_relative = 1e-15);
    }

    proptest! {
        #[test]
        fn logsumexp_permutation_invariant(mut xs in prop::collection::vec(-50.0f64..5.0, 1..20), seed in any::<u64>()) {
            let a = logsumexp(&xs);
            let n = xs.len();
            for i in 0..n {
                xs.swap(i, (seed as usize).wrapping_add(i * 31) % n);
            }
            let b = logsumexp(&xs);
            let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            prop_assert!(a >= max);
        }

        #[test]
        fn rational_products_are_canonical(a in -500i64..500, b in 1i64..500, c in -500i64..500, d in 1i64..500) {
            let prod = ExactRational::new(a, b) * ExactRational::new(c, d);
            let direct = ExactRational::new(a * c, b * d);
            prop_assert_eq!(&prod, &direct);
            prop_assert!(prod.denom() > &BigInt::zero());
            let g = num_integer::Integer::gcd(prod.numer(), prod.denom());
            prop_assert!(g == BigInt::one() || prod.numer().is_zero());
        }
    }
}
