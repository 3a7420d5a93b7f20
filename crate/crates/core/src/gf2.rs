//! Linear algebra over GF(2): vectors as bit words, dense element sets over
//! the whole group, canonical subspaces and subspace counting.
//!
//! Elements of GF(2)^n are `u32` words; bit `i` is coordinate `i`. Addition
//! is XOR. An [`ElemSet`] is a bitset indexed by the element value, so a set
//! over GF(2)^n occupies `2^n` bits.

use std::fmt;
use std::ops::{Add, AddAssign};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest ambient dimension for dense set operations.
pub const MAX_SET_DIM: u32 = 20;
/// Largest ambient dimension for a [`Subspace`] (one `u32` per basis row).
pub const MAX_SUBSPACE_DIM: u32 = 32;
/// Default refusal threshold for exhaustive enumerations.
pub const DEFAULT_ENUM_BUDGET: u64 = 100_000_000;

/// An element of GF(2)^n.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gf2Vec(pub u32);

impl Gf2Vec {
    pub const ZERO: Gf2Vec = Gf2Vec(0);

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }

    /// True when the vector lies in GF(2)^n.
    pub fn fits(self, n: u32) -> bool {
        n >= 32 || self.0 >> n == 0
    }
}

// addition in characteristic 2 is XOR
#[allow(clippy::suspicious_arithmetic_impl)]
impl Add for Gf2Vec {
    type Output = Gf2Vec;
    fn add(self, rhs: Gf2Vec) -> Gf2Vec {
        Gf2Vec(self.0 ^ rhs.0)
    }
}

#[allow(clippy::suspicious_op_assign_impl)]
impl AddAssign for Gf2Vec {
    fn add_assign(&mut self, rhs: Gf2Vec) {
        self.0 ^= rhs.0;
    }
}

impl fmt::Display for Gf2Vec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

#[inline]
pub(crate) fn top_bit(x: u32) -> u32 {
    debug_assert!(x != 0);
    31 - x.leading_zeros()
}

pub(crate) fn check_set_dim(n: u32) -> Result<()> {
    if n > MAX_SET_DIM {
        return Err(Error::DimensionOutOfRange { n, min: 0, max: MAX_SET_DIM });
    }
    Ok(())
}

#[inline]
pub(crate) fn words_for(n: u32) -> usize {
    if n <= 6 {
        1
    } else {
        1usize << (n - 6)
    }
}

#[inline]
pub(crate) fn low_mask(n: u32) -> u64 {
    if n >= 6 {
        u64::MAX
    } else {
        (1u64 << (1u32 << n)) - 1
    }
}

const SWAP_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0f0f_0f0f_0f0f_0f0f,
    0x00ff_00ff_00ff_00ff,
    0x0000_ffff_0000_ffff,
    0x0000_0000_ffff_ffff,
];

/// Permutes the bits of one word by `i -> i ^ k` for `k < 64`.
#[inline]
fn xor_permute_word(mut w: u64, k: u32) -> u64 {
    for (b, &m) in SWAP_MASKS.iter().enumerate() {
        if k >> b & 1 == 1 {
            let s = 1u32 << b;
            w = ((w & m) << s) | ((w >> s) & m);
        }
    }
    w
}

/// Writes the bitset `{x ^ t : x in src}` into `dst`.
pub(crate) fn translate_words(src: &[u64], t: u32, dst: &mut [u64]) {
    debug_assert_eq!(src.len(), dst.len());
    let hi = (t >> 6) as usize;
    let lo = t & 63;
    for (w, &word) in src.iter().enumerate() {
        dst[w ^ hi] = xor_permute_word(word, lo);
    }
}

pub(crate) fn iter_words(words: &[u64]) -> impl Iterator<Item = u32> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| {
        let mut rest = w;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let b = rest.trailing_zeros();
                rest &= rest - 1;
                Some(((wi as u32) << 6) | b)
            }
        })
    })
}

/// Dense bitset over all `2^n` elements of GF(2)^n.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ElemSet {
    n: u32,
    words: Vec<u64>,
}

impl ElemSet {
    pub fn empty(n: u32) -> Result<Self> {
        check_set_dim(n)?;
        Ok(ElemSet { n, words: vec![0; words_for(n)] })
    }

    pub fn full(n: u32) -> Result<Self> {
        let mut s = Self::empty(n)?;
        let m = low_mask(n);
        s.words.iter_mut().for_each(|w| *w = m);
        Ok(s)
    }

    pub fn singleton(n: u32, v: u32) -> Result<Self> {
        Self::from_elems(n, [v])
    }

    pub fn from_elems<I: IntoIterator<Item = u32>>(n: u32, elems: I) -> Result<Self> {
        let mut s = Self::empty(n)?;
        for v in elems {
            if !Gf2Vec(v).fits(n) {
                return Err(Error::ElementOutOfRange { value: v as u64, n });
            }
            s.insert(v);
        }
        Ok(s)
    }

    /// Wraps raw words; bits above `2^n` must be clear.
    pub(crate) fn from_words(n: u32, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), words_for(n));
        debug_assert_eq!(words[0] & !low_mask(n), 0);
        ElemSet { n, words }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of elements of the ambient group.
    pub fn universe(&self) -> u32 {
        1 << self.n
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        debug_assert!(Gf2Vec(v).fits(self.n));
        self.words[(v >> 6) as usize] >> (v & 63) & 1 == 1
    }

    /// Inserts `v`; returns true if it was absent.
    #[inline]
    pub fn insert(&mut self, v: u32) -> bool {
        assert!(Gf2Vec(v).fits(self.n), "element {v:#x} outside GF(2)^{}", self.n);
        let w = &mut self.words[(v >> 6) as usize];
        let bit = 1u64 << (v & 63);
        let fresh = *w & bit == 0;
        *w |= bit;
        fresh
    }

    #[inline]
    pub fn remove(&mut self, v: u32) -> bool {
        if !Gf2Vec(v).fits(self.n) {
            return false;
        }
        let w = &mut self.words[(v >> 6) as usize];
        let bit = 1u64 << (v & 63);
        let had = *w & bit != 0;
        *w &= !bit;
        had
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        iter_words(&self.words)
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.iter().collect()
    }

    pub fn min(&self) -> Option<u32> {
        self.iter().next()
    }

    /// The translate `t + S`.
    pub fn translate(&self, t: u32) -> ElemSet {
        assert!(Gf2Vec(t).fits(self.n));
        let mut words = vec![0; self.words.len()];
        translate_words(&self.words, t, &mut words);
        ElemSet { n: self.n, words }
    }

    fn same_dim(&self, other: &ElemSet) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    fn zip_with(&self, other: &ElemSet, f: impl Fn(u64, u64) -> u64) -> Result<ElemSet> {
        self.same_dim(other)?;
        let words = self.words.iter().zip(&other.words).map(|(&a, &b)| f(a, b)).collect();
        Ok(ElemSet { n: self.n, words })
    }

    pub fn union(&self, other: &ElemSet) -> Result<ElemSet> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &ElemSet) -> Result<ElemSet> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &ElemSet) -> Result<ElemSet> {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn is_subset(&self, other: &ElemSet) -> Result<bool> {
        self.same_dim(other)?;
        Ok(self.words.iter().zip(&other.words).all(|(&a, &b)| a & !b == 0))
    }

    pub fn is_disjoint(&self, other: &ElemSet) -> Result<bool> {
        self.same_dim(other)?;
        Ok(self.words.iter().zip(&other.words).all(|(&a, &b)| a & b == 0))
    }

    /// Complement inside the whole group.
    pub fn complement(&self) -> ElemSet {
        let m = low_mask(self.n);
        ElemSet { n: self.n, words: self.words.iter().map(|&w| !w & m).collect() }
    }

    /// Lowercase hex of the bitset, one byte per 8 elements, element `8j+b`
    /// at bit `b` of byte `j`.
    pub fn to_hex(&self) -> String {
        let nbytes = (1usize << self.n).div_ceil(8);
        let mut out = String::with_capacity(nbytes * 2);
        for j in 0..nbytes {
            let byte = (self.words[j / 8] >> ((j % 8) * 8)) as u8;
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    pub fn from_hex(n: u32, hex: &str) -> Result<ElemSet> {
        let mut s = ElemSet::empty(n)?;
        let nbytes = (1usize << n).div_ceil(8);
        let hex = hex.trim();
        if hex.len() != nbytes * 2 {
            return Err(Error::Parse(format!("expected {} hex digits for n={n}, found {}", nbytes * 2, hex.len())));
        }
        for j in 0..nbytes {
            let byte = u8::from_str_radix(&hex[2 * j..2 * j + 2], 16)
                .map_err(|e| Error::Parse(format!("bad hex byte {j}: {e}")))?;
            s.words[j / 8] |= (byte as u64) << ((j % 8) * 8);
        }
        if s.words[0] & !low_mask(n) != 0 {
            return Err(Error::Parse("bits set beyond 2^n".into()));
        }
        Ok(s)
    }
}

impl fmt::Debug for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ElemSet(n={}, ", self.n)?;
        f.debug_set().entries(self.iter()).finish()?;
        write!(f, ")")
    }
}

/// A linear subspace of GF(2)^n held as its reduced row echelon basis.
///
/// Rows are ordered by strictly decreasing pivot (highest set bit) and each
/// pivot bit is set in exactly one row, so equal subspaces compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "SubspaceRepr", into = "SubspaceRepr")]
pub struct Subspace {
    n: u32,
    basis: Vec<u32>,
}

/// Serialized form; any spanning list is accepted on input.
#[derive(Serialize, Deserialize)]
struct SubspaceRepr {
    n: u32,
    basis: Vec<u32>,
}

impl From<Subspace> for SubspaceRepr {
    fn from(s: Subspace) -> Self {
        SubspaceRepr { n: s.n, basis: s.basis }
    }
}

impl TryFrom<SubspaceRepr> for Subspace {
    type Error = Error;

    fn try_from(r: SubspaceRepr) -> Result<Self> {
        Subspace::from_generators(r.n, r.basis)
    }
}

impl Subspace {
    pub fn zero(n: u32) -> Result<Self> {
        if n > MAX_SUBSPACE_DIM {
            return Err(Error::DimensionOutOfRange { n, min: 0, max: MAX_SUBSPACE_DIM });
        }
        Ok(Subspace { n, basis: Vec::new() })
    }

    pub fn full(n: u32) -> Result<Self> {
        let mut s = Self::zero(n)?;
        s.basis = (0..n).rev().map(|i| 1u32 << i).collect();
        Ok(s)
    }

    /// Span of arbitrary generators.
    pub fn from_generators<I: IntoIterator<Item = u32>>(n: u32, gens: I) -> Result<Self> {
        let mut s = Self::zero(n)?;
        for g in gens {
            if !Gf2Vec(g).fits(n) {
                return Err(Error::ElementOutOfRange { value: g as u64, n });
            }
            s.insert(g);
        }
        Ok(s)
    }

    /// Trusts `basis` to already be in canonical form.
    pub(crate) fn from_rref_unchecked(n: u32, basis: Vec<u32>) -> Self {
        let s = Subspace { n, basis };
        debug_assert!(s.is_canonical());
        s
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> u32 {
        self.basis.len() as u32
    }

    pub fn basis(&self) -> &[u32] {
        &self.basis
    }

    pub fn pivots(&self) -> impl Iterator<Item = u32> + '_ {
        self.basis.iter().map(|&b| top_bit(b))
    }

    /// Member count `2^dim` (saturating at `u64::MAX`).
    pub fn size(&self) -> u64 {
        1u64.checked_shl(self.dim()).unwrap_or(u64::MAX)
    }

    /// Reduces `v` against the basis; the result has zeros on every pivot.
    #[inline]
    pub fn reduce(&self, mut v: u32) -> u32 {
        for &b in &self.basis {
            if v >> top_bit(b) & 1 == 1 {
                v ^= b;
            }
        }
        v
    }

    pub fn contains(&self, v: u32) -> bool {
        Gf2Vec(v).fits(self.n) && self.reduce(v) == 0
    }

    /// Adds `v` to the span; returns true if the dimension grew.
    pub fn insert(&mut self, v: u32) -> bool {
        let r = self.reduce(v);
        if r == 0 {
            return false;
        }
        let p = top_bit(r);
        for b in &mut self.basis {
            if *b >> p & 1 == 1 {
                *b ^= r;
            }
        }
        let pos = self.basis.iter().position(|&b| top_bit(b) < p).unwrap_or(self.basis.len());
        self.basis.insert(pos, r);
        true
    }

    pub fn is_canonical(&self) -> bool {
        let piv: Vec<u32> = self.pivots().collect();
        piv.windows(2).all(|w| w[0] > w[1])
            && self.basis.iter().all(|&b| b != 0 && Gf2Vec(b).fits(self.n))
            && self.basis.iter().all(|&b| piv.iter().filter(|&&p| b >> p & 1 == 1).count() == 1)
    }

    /// Sum `self + other` as a subspace.
    pub fn join(&self, other: &Subspace) -> Result<Subspace> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        let mut s = self.clone();
        for &b in &other.basis {
            s.insert(b);
        }
        Ok(s)
    }

    /// `dim(self ∩ other)` by the dimension formula.
    pub fn intersection_dim(&self, other: &Subspace) -> Result<u32> {
        let j = self.join(other)?;
        Ok(self.dim() + other.dim() - j.dim())
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.n == other.n && self.basis.iter().all(|&b| other.contains(b))
    }

    /// All `2^dim` members, in Gray-code order starting at 0.
    pub fn members_iter(&self) -> impl Iterator<Item = u32> + '_ {
        let total: u64 = 1u64 << self.dim();
        let mut cur = 0u32;
        (0..total).map(move |i| {
            if i > 0 {
                cur ^= self.basis[i.trailing_zeros() as usize];
            }
            cur
        })
    }

    pub fn members(&self) -> Result<ElemSet> {
        subspace_members(self)
    }
}

/// Linear span of the members of `x`.
pub fn span(x: &ElemSet) -> Subspace {
    let mut s = Subspace { n: x.n(), basis: Vec::new() };
    for v in x.iter() {
        if s.dim() == x.n() {
            break;
        }
        s.insert(v);
    }
    s
}

/// Every XOR combination of the basis, as a dense set.
pub fn subspace_members(v: &Subspace) -> Result<ElemSet> {
    let mut out = ElemSet::empty(v.n())?;
    for x in v.members_iter() {
        out.insert(x);
    }
    Ok(out)
}

/// Number of `m`-dimensional subspaces of GF(2)^n; zero when `m > n`.
pub fn gaussian_binomial(n: u32, m: u32) -> BigUint {
    if m > n {
        return BigUint::zero();
    }
    let one = BigUint::one();
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..m {
        num *= (&one << (n - i)) - &one;
        den *= (&one << (m - i)) - &one;
    }
    num / den
}

/// Streams every `m`-dimensional subspace of GF(2)^n exactly once.
///
/// Order: pivot sets in lexicographic order of their increasing column
/// tuples, then free entries counted upward. Refuses (instead of truncating)
/// when the total exceeds `budget`.
pub fn enumerate_subspaces(n: u32, m: u32, budget: u64) -> Result<SubspaceIter> {
    if n > MAX_SUBSPACE_DIM {
        return Err(Error::DimensionOutOfRange { n, min: 0, max: MAX_SUBSPACE_DIM });
    }
    if m > n {
        return Err(Error::pre(format!("subspace dimension {m} exceeds ambient {n}")));
    }
    let total = gaussian_binomial(n, m);
    if total > BigUint::from(budget) {
        return Err(Error::BudgetExceeded { needed: total.to_string(), budget });
    }
    let mut it = SubspaceIter { n, cols: (0..m).collect(), free: Vec::new(), counter: 0, limit: 0, done: false };
    it.load_pivots();
    Ok(it)
}

/// Iterator returned by [`enumerate_subspaces`].
#[derive(Debug)]
pub struct SubspaceIter {
    n: u32,
    /// Pivot columns, increasing.
    cols: Vec<u32>,
    /// (row index, bit) for every free entry of the current pivot pattern.
    free: Vec<(usize, u32)>,
    counter: u64,
    limit: u64,
    done: bool,
}

impl SubspaceIter {
    fn load_pivots(&mut self) {
        self.free.clear();
        let m = self.cols.len();
        // row r has pivot cols[m-1-r] (decreasing pivots)
        for r in 0..m {
            let p = self.cols[m - 1 - r];
            for j in 0..p {
                if !self.cols.contains(&j) {
                    self.free.push((r, j));
                }
            }
        }
        self.counter = 0;
        self.limit = 1u64 << self.free.len();
    }

    fn next_pivots(&mut self) -> bool {
        let m = self.cols.len();
        let n = self.n;
        let mut i = m;
        while i > 0 {
            i -= 1;
            if self.cols[i] < n - (m - i) as u32 {
                self.cols[i] += 1;
                for j in i + 1..m {
                    self.cols[j] = self.cols[j - 1] + 1;
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for SubspaceIter {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        if self.done {
            return None;
        }
        if self.counter == self.limit {
            if !self.next_pivots() {
                self.done = true;
                return None;
            }
            self.load_pivots();
        }
        let m = self.cols.len();
        let mut basis: Vec<u32> = (0..m).map(|r| 1u32 << self.cols[m - 1 - r]).collect();
        for (k, &(r, bit)) in self.free.iter().enumerate() {
            if self.counter >> k & 1 == 1 {
                basis[r] |= 1 << bit;
            }
        }
        self.counter += 1;
        if m == 0 {
            self.done = true;
        }
        Some(Subspace::from_rref_unchecked(self.n, basis))
    }
}

/// One coset of a subspace, labelled by its least element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coset {
    pub label: u32,
    pub members: ElemSet,
}

/// Partition of GF(2)^n into the cosets of `v`, ordered by label.
pub fn cosets(v: &Subspace, n: u32) -> Result<Vec<Coset>> {
    check_set_dim(n)?;
    if v.n() != n {
        return Err(Error::DimensionMismatch { left: v.n(), right: n });
    }
    let base = subspace_members(v)?;
    let mut seen = ElemSet::empty(n)?;
    let mut out = Vec::with_capacity(1 << (n - v.dim()));
    for x in 0..(1u32 << n) {
        if seen.contains(x) {
            continue;
        }
        let members = base.translate(x);
        for y in members.iter() {
            seen.insert(y);
        }
        out.push(Coset { label: x, members });
    }
    Ok(out)
}
