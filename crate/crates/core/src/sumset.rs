//! Sumsets, restricted sumsets and stabilizers in GF(2)^n, together with
//! checkers for Kneser's inequality and its power-of-two consequence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{translate_words, ElemSet, Subspace};

fn same_dim(x: &ElemSet, y: &ElemSet) -> Result<()> {
    if x.n() != y.n() {
        return Err(Error::DimensionMismatch { left: x.n(), right: y.n() });
    }
    Ok(())
}

/// `X + Y = {x + y}`.
pub fn sumset(x: &ElemSet, y: &ElemSet) -> Result<ElemSet> {
    same_dim(x, y)?;
    // translate the larger set by each member of the smaller one
    let (small, big) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    let mut acc = vec![0u64; big.words().len()];
    let mut tmp = vec![0u64; big.words().len()];
    for s in small.iter() {
        translate_words(big.words(), s, &mut tmp);
        acc.iter_mut().zip(&tmp).for_each(|(a, t)| *a |= t);
    }
    Ok(ElemSet::from_words(x.n(), acc))
}

/// `{x + y : x ∈ X, y ∈ Y, x ≠ y}`, built pair by pair.
pub fn restricted_sumset(x: &ElemSet, y: &ElemSet) -> Result<ElemSet> {
    same_dim(x, y)?;
    let mut acc = vec![0u64; y.words().len()];
    let mut tmp = vec![0u64; y.words().len()];
    for a in x.iter() {
        translate_words(y.words(), a, &mut tmp);
        if y.contains(a) {
            // the excluded pair (a, a) lands on element 0 of this translate
            tmp[0] &= !1;
        }
        acc.iter_mut().zip(&tmp).for_each(|(s, t)| *s |= t);
    }
    Ok(ElemSet::from_words(x.n(), acc))
}

/// Stabilizer `{g : g + S = S}` of a nonempty set.
pub fn sym(s: &ElemSet) -> Result<Subspace> {
    let s0 = s.min().ok_or(Error::EmptySet("stabilizer of the empty set"))?;
    let mut stab = Subspace::zero(s.n())?;
    let mut tmp = vec![0u64; s.words().len()];
    // any g in Sym(S) maps s0 into S, so g = s + s0 for some s in S
    for t in s.iter() {
        let g = t ^ s0;
        if stab.contains(g) {
            continue;
        }
        translate_words(s.words(), g, &mut tmp);
        if tmp == s.words() {
            stab.insert(g);
        }
    }
    Ok(stab)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub lhs: u64,
    pub rhs: i64,
    pub holds: bool,
}

impl InequalityReport {
    fn new(lhs: u64, rhs: i64) -> Self {
        InequalityReport { lhs, rhs, holds: lhs as i64 >= rhs }
    }
}

/// `|A+B| ≥ |A| + |B| − |Sym(A+B)|`.
pub fn kneser_check(a: &ElemSet, b: &ElemSet) -> Result<InequalityReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet("Kneser check needs nonempty A and B"));
    }
    let ab = sumset(a, b)?;
    let stab = sym(&ab)?.size() as i64;
    Ok(InequalityReport::new(ab.len() as u64, a.len() as i64 + b.len() as i64 - stab))
}

/// `|A+B| ≥ min(|A| + m, 2m)` for `m` a power of two with `|B| > m`.
pub fn sandwich_check(a: &ElemSet, b: &ElemSet, m: u64) -> Result<InequalityReport> {
    if !m.is_power_of_two() {
        return Err(Error::pre(format!("m = {m} is not a power of two")));
    }
    if a.is_empty() {
        return Err(Error::EmptySet("sandwich check needs nonempty A"));
    }
    if b.len() as u64 <= m {
        return Err(Error::pre(format!("|B| = {} must exceed m = {m}", b.len())));
    }
    let ab = sumset(a, b)?;
    let rhs = (a.len() as u64 + m).min(2 * m);
    Ok(InequalityReport::new(ab.len() as u64, rhs as i64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingStats {
    pub k: u64,
    pub sum_size: u64,
    pub restricted_size: u64,
    pub ratio: f64,
}

/// Size of `X`, of `X+X`, of `X∔X`, and the doubling ratio `|X+X|/|X|`.
pub fn doubling_stats(x: &ElemSet) -> Result<DoublingStats> {
    if x.is_empty() {
        return Err(Error::EmptySet("doubling of the empty set"));
    }
    let k = x.len() as u64;
    let sum_size = sumset(x, x)?.len() as u64;
    let restricted_size = restricted_sumset(x, x)?.len() as u64;
    assert_eq!(sum_size, restricted_size + 1, "0 = x + x must be the only extra sum");
    Ok(DoublingStats { k, sum_size, restricted_size, ratio: sum_size as f64 / k as f64 })
}
