//! Exact first and second moments of `M_m`, the number of m-dimensional
//! subspaces `H` with `H ∖ {0} ⊆ A` for a uniformly random `A`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::gaussian_binomial;

pub const MAX_MOMENT_N: u32 = 64;
/// Probabilities `2^{-(2^m-1)}` are kept exact; beyond this the
/// denominators stop being practical.
pub const MAX_MOMENT_M: u32 = 20;

fn pow2(e: i64) -> BigRational {
    let p: BigInt = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

fn int(x: BigUint) -> BigRational {
    BigRational::from_integer(x.into())
}

fn check(n: u32, m: u32) -> Result<()> {
    if n > MAX_MOMENT_N {
        return Err(Error::DimensionOutOfRange { n, min: 0, max: MAX_MOMENT_N });
    }
    if m > n {
        return Err(Error::pre(format!("m = {m} exceeds n = {n}")));
    }
    if m > MAX_MOMENT_M {
        return Err(Error::pre(format!("m = {m} exceeds supported maximum {MAX_MOMENT_M}")));
    }
    Ok(())
}

/// Ordered pairs `(H, H')` of m-dimensional subspaces of GF(2)^n with
/// `dim(H ∩ H') = j`: choose `H`, the intersection inside `H`, then extend
/// the intersection to `H'` avoiding `H`.
pub fn pairs_by_intersection(n: u32, m: u32, j: u32) -> Result<BigUint> {
    if j > m || m > n {
        return Err(Error::pre(format!("need j ≤ m ≤ n, got j={j} m={m} n={n}")));
    }
    let d = m - j;
    Ok(gaussian_binomial(n, m)
        * gaussian_binomial(m, j)
        * (BigUint::one() << (d as u64 * d as u64))
        * gaussian_binomial(n - m, d))
}

/// `E M_m = [n choose m]_2 · 2^{-(2^m - 1)}`.
pub fn expected_m(n: u32, m: u32) -> Result<BigRational> {
    check(n, m)?;
    Ok(int(gaussian_binomial(n, m)) * pow2(-((1i64 << m) - 1)))
}

/// `Var M_m`; two subspaces meeting in dimension `j` jointly need
/// `2^{m+1} - 2^j - 1` nonzero elements in `A`.
pub fn variance_m(n: u32, m: u32) -> Result<BigRational> {
    check(n, m)?;
    let mut second = BigRational::zero();
    for j in 0..=m {
        let pairs = pairs_by_intersection(n, m, j)?;
        if pairs.is_zero() {
            continue;
        }
        second += int(pairs) * pow2(-((1i64 << (m + 1)) - (1i64 << j) - 1));
    }
    let e = expected_m(n, m)?;
    Ok(second - &e * &e)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct MomentReport {
    pub n: u32,
    pub m: u32,
    #[serde(with = "crate::ratio_serde")]
    pub E_M: BigRational,
    #[serde(with = "crate::ratio_serde")]
    pub Var_M: BigRational,
    /// `2^{nm - m² - 2^m}`.
    #[serde(with = "crate::ratio_serde")]
    pub paper_E_lb: BigRational,
    /// `2 Σ_{l=1}^m 2^{2mn - 2^{m+1} + 2^l - nl}`.
    #[serde(with = "crate::ratio_serde")]
    pub paper_Var_ub: BigRational,
    /// `Var M / (E M)²`.
    #[serde(with = "crate::ratio_serde")]
    pub chebyshev: BigRational,
    /// `8m · 2^{2m² - n}`.
    #[serde(with = "crate::ratio_serde")]
    pub paper_cheb_ub: BigRational,
    pub holds_E: bool,
    pub holds_Var: bool,
    pub holds_cheb: bool,
}

impl MomentReport {
    pub const CSV_HEADER: &'static str =
        "n,m,E_M,Var_M,paper_E_lb,paper_Var_ub,cheb,cheb_ub,holds_E,holds_Var,holds_cheb";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.m,
            self.E_M,
            self.Var_M,
            self.paper_E_lb,
            self.paper_Var_ub,
            self.chebyshev,
            self.paper_cheb_ub,
            self.holds_E,
            self.holds_Var,
            self.holds_cheb
        )
    }
}

pub fn moment_report(n: u32, m: u32) -> Result<MomentReport> {
    let e = expected_m(n, m)?;
    let var = variance_m(n, m)?;
    let (ni, mi) = (n as i64, m as i64);
    let paper_e_lb = pow2(ni * mi - mi * mi - (1i64 << m));
    let paper_var_ub = (1..=mi)
        .fold(BigRational::zero(), |acc, l| acc + pow2(2 * mi * ni - (1i64 << (m + 1)) + (1i64 << l) - ni * l))
        * pow2(1);
    // E > 0 since m ≤ n
    let chebyshev = &var / (&e * &e);
    let paper_cheb_ub = BigRational::from_integer(BigInt::from(8 * mi)) * pow2(2 * mi * mi - ni);
    Ok(MomentReport {
        n,
        m,
        holds_E: e >= paper_e_lb,
        holds_Var: var <= paper_var_ub,
        holds_cheb: chebyshev <= paper_cheb_ub,
        E_M: e,
        Var_M: var,
        paper_E_lb: paper_e_lb,
        paper_Var_ub: paper_var_ub,
        chebyshev,
        paper_cheb_ub,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqknValue {
    pub n: u64,
    pub m: u32,
    pub value: i128,
    pub nonpositive: bool,
}

/// `2^m - n(m-1) - 2`.
pub fn eqkn_value(n: u64, m: u32) -> Result<EqknValue> {
    if n < 2 {
        return Err(Error::pre(format!("n = {n} must be at least 2")));
    }
    if m >= 126 {
        return Err(Error::pre(format!("m = {m} too large")));
    }
    let value = (1i128 << m) - n as i128 * (m as i128 - 1) - 2;
    Ok(EqknValue { n, m, value, nonpositive: value <= 0 })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqknReport {
    pub at_m: EqknValue,
    pub at_m_plus_1: EqknValue,
}

/// [`eqkn_value`] at `m = ⌊log₂n + log₂log₂n⌋` and at `m + 1`.
pub fn eqkn_check(n: u64) -> Result<EqknReport> {
    let class = crate::experiments::classify_n(n, 0.5)?;
    let m = class.m_pred as u32;
    Ok(EqknReport { at_m: eqkn_value(n, m)?, at_m_plus_1: eqkn_value(n, m + 1)? })
}
