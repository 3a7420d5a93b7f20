//! Freiman isomorphism and dimension, the doubling-based containment bounds,
//! the census of `k`-sets by restricted doubling, the large-doubling tail
//! exponent, and a small-scale probe of the almost-coset covering family.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{check_set_dim, cosets, enumerate_subspaces, gaussian_binomial, span, ElemSet, DEFAULT_ENUM_BUDGET};
use crate::sumset::{restricted_sumset, sumset};

/// Largest set handled by the exhaustive isomorphism test.
pub const MAX_ISO_SIZE: usize = 8;
/// Largest set handled by the exhaustive dimension search.
pub const MAX_BRUTE_DIM_SIZE: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FreimanMethod {
    BruteForce,
    UniversalModel,
}

/// Freiman dimension together with an image realising it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreimanResult {
    pub r: u32,
    /// Image of the i-th smallest member of X, as a vector of GF(2)^r.
    pub witness: Vec<u32>,
    pub method: FreimanMethod,
}

/// True when the images of `xs[..=i]` agree with `xs` on every additive
/// quadruple that involves index `i`.
#[inline]
fn consistent_at(xs: &[u32], ys: &[u32], i: usize) -> bool {
    let (xi, yi) = (xs[i], ys[i]);
    for a in 0..=i {
        for b in a..=i {
            for c in b..=i {
                let lhs = xi ^ xs[a] ^ xs[b] ^ xs[c] == 0;
                let rhs = yi ^ ys[a] ^ ys[b] ^ ys[c] == 0;
                if lhs != rhs {
                    return false;
                }
            }
        }
    }
    true
}

/// Whether the pointwise correspondence `xs[i] ↦ ys[i]` is a Freiman
/// isomorphism (bijective and quadruple preserving in both directions).
pub fn preserves_quadruples(xs: &[u32], ys: &[u32]) -> bool {
    if xs.len() != ys.len() {
        return false;
    }
    let mut sorted = ys.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    sorted.len() == ys.len() && (0..xs.len()).all(|i| consistent_at(xs, ys, i))
}

/// Exhaustive search for a Freiman isomorphism between two sets of equal
/// size (at most 8). The sets may live in different ambient dimensions.
pub fn is_freiman_isomorphic(x: &ElemSet, y: &ElemSet) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::pre(format!("sizes differ: {} vs {}", x.len(), y.len())));
    }
    if x.len() > MAX_ISO_SIZE {
        return Err(Error::pre(format!("|X| = {} exceeds {MAX_ISO_SIZE}", x.len())));
    }
    let xs = x.to_vec();
    let ys = y.to_vec();
    let mut img = Vec::with_capacity(xs.len());
    let mut used = vec![false; ys.len()];
    Ok(iso_search(&xs, &ys, &mut img, &mut used))
}

fn iso_search(xs: &[u32], ys: &[u32], img: &mut Vec<u32>, used: &mut [bool]) -> bool {
    let i = img.len();
    if i == xs.len() {
        return true;
    }
    for j in 0..ys.len() {
        if used[j] {
            continue;
        }
        img.push(ys[j]);
        if consistent_at(xs, img, i) {
            used[j] = true;
            if iso_search(xs, ys, img, used) {
                return true;
            }
            used[j] = false;
        }
        img.pop();
    }
    false
}

/// Freiman dimension `r(X)`.
///
/// Sets of at most six elements use the exhaustive search; larger sets fall
/// back to the universal model, whose witness is re-verified before it is
/// returned.
pub fn freiman_dimension(x: &ElemSet) -> Result<FreimanResult> {
    if x.is_empty() {
        return Err(Error::EmptySet("Freiman dimension of the empty set"));
    }
    if x.len() <= MAX_BRUTE_DIM_SIZE {
        Ok(freiman_dimension_brute(&x.to_vec()))
    } else {
        freiman_dimension_universal(x)
    }
}

/// Exhaustive search over injections modulo affine equivalence.
///
/// The first point goes to 0 and every later point goes either into the span
/// of the images so far or onto the next unit vector. Any Freiman image can be
/// brought to this shape by a translation and an invertible linear map, both
/// of which preserve quadruples and affine dimension.
pub(crate) fn freiman_dimension_brute(xs: &[u32]) -> FreimanResult {
    let k = xs.len();
    let mut best: Option<(u32, Vec<u32>)> = None;
    let mut img = vec![0u32];
    brute_search(xs, &mut img, 0, &mut best);
    let (r, witness) = best.expect("the identity-like embedding always exists");
    debug_assert!(r as usize <= k.saturating_sub(1));
    FreimanResult { r, witness, method: FreimanMethod::BruteForce }
}

fn brute_search(xs: &[u32], img: &mut Vec<u32>, dim: u32, best: &mut Option<(u32, Vec<u32>)>) {
    let i = img.len();
    let k = xs.len();
    if i == k {
        if best.as_ref().is_none_or(|(r, _)| dim > *r) {
            *best = Some((dim, img.clone()));
        }
        return;
    }
    if let Some((r, _)) = best {
        if dim + (k - i) as u32 <= *r {
            return;
        }
    }
    for v in 0..=(1u32 << dim) {
        if v < (1 << dim) && img.contains(&v) {
            continue;
        }
        img.push(v);
        if consistent_at(xs, img, i) {
            let d = if v == 1 << dim { dim + 1 } else { dim };
            brute_search(xs, img, d, best);
        }
        img.pop();
    }
}

/// Row reduction on `u64` vectors; returns the canonical basis.
fn rref64(vectors: impl IntoIterator<Item = u64>) -> Vec<u64> {
    let mut basis: Vec<u64> = Vec::new();
    for v in vectors {
        let mut r = v;
        for &b in &basis {
            if r >> (63 - b.leading_zeros()) & 1 == 1 {
                r ^= b;
            }
        }
        if r == 0 {
            continue;
        }
        let p = 63 - r.leading_zeros();
        for b in &mut basis {
            if *b >> p & 1 == 1 {
                *b ^= r;
            }
        }
        basis.push(r);
        basis.sort_unstable_by_key(|b| b.leading_zeros());
    }
    basis
}

fn reduce64(basis: &[u64], mut v: u64) -> u64 {
    for &b in basis {
        if v >> (63 - b.leading_zeros()) & 1 == 1 {
            v ^= b;
        }
    }
    v
}

/// Affine rank of X inside the free GF(2)-space on X modulo all additive
/// quadruple relations of X.
///
/// This is only an upper bound on `r(X)` in general; the image is returned
/// only if it verifies as a Freiman isomorphism, and callers cross-check it
/// against the exhaustive search wherever both run.
pub fn freiman_dimension_universal(x: &ElemSet) -> Result<FreimanResult> {
    let xs = x.to_vec();
    let k = xs.len();
    if k == 0 {
        return Err(Error::EmptySet("Freiman dimension of the empty set"));
    }
    if k > 64 {
        return Err(Error::pre(format!("universal model limited to 64 points, got {k}")));
    }
    let mut relations = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                let want = xs[a] ^ xs[b] ^ xs[c];
                for (d, &xd) in xs.iter().enumerate().skip(c + 1) {
                    if xd == want {
                        relations.push(1u64 << a | 1 << b | 1 << c | 1 << d);
                    }
                }
            }
        }
    }
    let rel = rref64(relations);
    let r = (k - 1 - rel.len()) as u32;

    let reduced: Vec<u64> = (0..k).map(|i| reduce64(&rel, (1u64 << i) ^ 1)).collect();
    let img_basis = rref64(reduced.iter().copied());
    debug_assert_eq!(img_basis.len() as u32, r);
    let pivots: Vec<u32> = img_basis.iter().map(|b| 63 - b.leading_zeros()).collect();
    let witness: Vec<u32> = reduced
        .iter()
        .map(|&v| pivots.iter().enumerate().fold(0u32, |acc, (j, &p)| acc | (((v >> p) & 1) as u32) << j))
        .collect();
    if !preserves_quadruples(&xs, &witness) {
        return Err(Error::pre("universal model image is not a Freiman isomorphism for this set"));
    }
    Ok(FreimanResult { r, witness, method: FreimanMethod::UniversalModel })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimBoundReport {
    pub r: u32,
    pub k: u64,
    pub l: u64,
    pub bound: f64,
    pub holds: bool,
}

/// `r(X) ≤ log₂k + 2l/k` with `l = |X+X|`.
pub fn check_dim_bound(x: &ElemSet) -> Result<DimBoundReport> {
    if x.len() > MAX_BRUTE_DIM_SIZE {
        return Err(Error::pre(format!("|X| = {} exceeds {MAX_BRUTE_DIM_SIZE}", x.len())));
    }
    let res = freiman_dimension(x)?;
    let k = x.len() as u64;
    let l = sumset(x, x)?.len() as u64;
    let bound = (k as f64).log2() + 2.0 * l as f64 / k as f64;
    Ok(DimBoundReport { r: res.r, k, l, bound, holds: res.r as f64 <= bound })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvenZoharReport {
    pub k: u64,
    #[serde(rename = "K")]
    pub doubling: f64,
    pub span_size: u64,
    pub bound: f64,
    pub holds: bool,
}

/// `|span(X ∪ {0})| ≤ 4^K k / (2K)` where `K = |X+X|/k`.
pub fn check_even_zohar(x: &ElemSet) -> Result<EvenZoharReport> {
    if x.is_empty() {
        return Err(Error::EmptySet("Even-Zohar check of the empty set"));
    }
    let k = x.len() as u64;
    let kk = sumset(x, x)?.len() as f64 / k as f64;
    let span_size = span(x).size();
    let bound = 4f64.powf(kk) * k as f64 / (2.0 * kk);
    Ok(EvenZoharReport { k, doubling: kk, span_size, bound, holds: span_size as f64 <= bound })
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Number of `k`-subsets of GF(2)^n for each value of `l = |X∔X|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SklCensus {
    pub n: u32,
    pub k: u32,
    pub counts: BTreeMap<u64, u64>,
    pub total: u64,
    /// `Σ_l counts[l]·2^{-l}`, exact.
    #[serde(with = "crate::ratio_serde")]
    pub union_bound: BigRational,
}

impl SklCensus {
    /// CSV with columns `n,k,l,count,union_bound_term`; terms are exact
    /// rationals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,k,l,count,union_bound_term\n");
        for (&l, &c) in &self.counts {
            let term = BigRational::new(BigUint::from(c).into(), (BigUint::one() << l).into());
            out.push_str(&format!("{},{},{},{},{}\n", self.n, self.k, l, c, term));
        }
        out
    }
}

/// Exhaustive census of `k`-subsets of GF(2)^n by restricted doubling.
///
/// Subsets are visited depth first in increasing element order, and the
/// multiset of pairwise sums is updated incrementally as elements are pushed
/// and popped. The first element is split across rayon workers.
pub fn census_skl(n: u32, k: u32, budget: u64) -> Result<SklCensus> {
    check_set_dim(n)?;
    let universe = 1u64 << n;
    let total = binomial(universe, k as u64);
    if total > BigUint::from(budget) {
        return Err(Error::BudgetExceeded { needed: total.to_string(), budget });
    }
    let total = total.to_u64().expect("bounded by budget");
    let size = universe as usize;
    let mut hist = vec![0u64; size];
    if k == 0 {
        hist[0] = 1;
    } else if k as u64 <= universe {
        let firsts: Vec<u32> = (0..=(universe - k as u64) as u32).collect();
        hist = firsts
            .par_iter()
            .fold(
                || (vec![0u64; size], vec![0u32; size], Vec::with_capacity(k as usize)),
                |(mut h, mut cnt, mut chosen), &x0| {
                    chosen.push(x0);
                    census_dfs(size as u32, k as usize, x0 + 1, 0, &mut chosen, &mut cnt, &mut h);
                    chosen.pop();
                    (h, cnt, chosen)
                },
            )
            .map(|(h, _, _)| h)
            .reduce(
                || vec![0u64; size],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
    }
    let counts: BTreeMap<u64, u64> =
        hist.iter().enumerate().filter(|(_, &c)| c > 0).map(|(l, &c)| (l as u64, c)).collect();
    debug_assert_eq!(counts.values().sum::<u64>(), total);
    let union_bound = counts.iter().fold(BigRational::zero(), |acc, (&l, &c)| {
        acc + BigRational::new(BigUint::from(c).into(), (BigUint::one() << l).into())
    });
    Ok(SklCensus { n, k, counts, total, union_bound })
}

fn census_dfs(
    universe: u32,
    k: usize,
    start: u32,
    distinct: usize,
    chosen: &mut Vec<u32>,
    cnt: &mut [u32],
    hist: &mut [u64],
) {
    if chosen.len() == k {
        hist[distinct] += 1;
        return;
    }
    let remaining = (k - chosen.len()) as u32;
    for x in start..=universe - remaining {
        let mut d = distinct;
        for &y in chosen.iter() {
            let s = (x ^ y) as usize;
            if cnt[s] == 0 {
                d += 1;
            }
            cnt[s] += 1;
        }
        chosen.push(x);
        census_dfs(universe, k, x + 1, d, chosen, cnt, hist);
        chosen.pop();
        for &y in chosen.iter() {
            cnt[(x ^ y) as usize] -= 1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailRegime {
    /// `l ≥ k^{31/30}`: the `k^{4k}` count.
    Large,
    /// `l < k^{31/30}`: the `(el/k)^k exp(k^{31/32})` count.
    Moderate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub log2_bound: f64,
    pub regime: TailRegime,
}

/// Base-2 logarithm of the bound on `|S_k^l| 2^{-l}` obtained by plugging
/// `r ≤ log₂k + 2(l+1)/k` into the two counting bounds for `|S_k^l|`.
///
/// `n` is the ambient dimension (so `N = 2^n`). The regime is chosen by the
/// exact integer comparison `l^30 ≥ k^31`.
pub fn tail_exponent(n: u64, k: u128, l: u128) -> Result<TailBound> {
    if k < 2 {
        return Err(Error::pre(format!("k = {k} must be at least 2")));
    }
    if l < 10 * k {
        return Err(Error::pre(format!("l = {l} is below 10k = {}", 10 * k)));
    }
    let (nf, kf, lf) = (n as f64, k as f64, l as f64);
    let log2k = kf.log2();
    let dim_bound = log2k + 2.0 * (lf + 1.0) / kf;
    let translates = nf * (dim_bound + 1.0);
    let large = BigUint::from(l).pow(30) >= BigUint::from(k).pow(31);
    let (regime, shapes) = if large {
        (TailRegime::Large, 4.0 * kf * log2k)
    } else {
        let e = std::f64::consts::E;
        let log2e = std::f64::consts::LOG2_E;
        (TailRegime::Moderate, kf * (e * lf / kf).log2() + kf.powf(31.0 / 32.0) * log2e)
    };
    Ok(TailBound { log2_bound: translates + shapes - lf, regime })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverProbeReport {
    pub n: u32,
    pub k: u32,
    pub k_prime: u64,
    pub eps: f64,
    pub d: u32,
    /// Sets `X` for which no admissible union of almost cosets fits in `X+X`.
    pub failures: Vec<Vec<u32>>,
    pub sets_checked: u64,
    /// Upper bound on the size of the almost-coset family, summed over
    /// every subspace of codimension at most `d`.
    pub family_size_bound: String,
}

/// Checks, for every `k`-subset `X` of GF(2)^n, whether some union `F` of
/// almost cosets of a subspace of codimension at most `d` satisfies
/// `F ⊆ X+X` and `|F| ≥ (2-ε)k'`, where `k'` is the power of two with
/// `k' < k ≤ 2k'`. An almost coset is a coset with at most `ε³|V|` elements
/// removed.
pub fn family_cover_probe(n: u32, k: u32, eps: f64, d: u32) -> Result<CoverProbeReport> {
    if n > 4 {
        return Err(Error::pre(format!("cover probe limited to n ≤ 4, got {n}")));
    }
    if k < 2 || k > 1 << n {
        return Err(Error::pre(format!("k = {k} must lie in 2..=2^n")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::pre(format!("eps = {eps} must lie in (0, 1)")));
    }
    if d > n {
        return Err(Error::pre(format!("codimension {d} exceeds n = {n}")));
    }
    let k_prime = 1u64 << (63 - (k as u64 - 1).leading_zeros());
    debug_assert!(k_prime < k as u64 && k as u64 <= 2 * k_prime);
    let need = (2.0 - eps) * k_prime as f64;

    let mut cos_families = Vec::new();
    for dim in (n - d)..=n {
        for v in enumerate_subspaces(n, dim, DEFAULT_ENUM_BUDGET)? {
            let allowed = (eps.powi(3) * v.size() as f64).floor() as usize;
            cos_families.push((allowed, cosets(&v, n)?));
        }
    }

    let universe = 1u32 << n;
    let mut failures = Vec::new();
    let mut sets_checked = 0u64;
    let mut chosen = Vec::with_capacity(k as usize);
    let mut visit = |xs: &[u32]| -> Result<()> {
        sets_checked += 1;
        let x = ElemSet::from_elems(n, xs.iter().copied())?;
        let s = sumset(&x, &x)?;
        let covered = cos_families.iter().any(|(allowed, cs)| {
            let best: usize = cs
                .iter()
                .filter_map(|c| {
                    let inside = c.members.intersection(&s).ok()?.len();
                    (c.members.len() - inside <= *allowed).then_some(inside)
                })
                .sum();
            best as f64 >= need
        });
        if !covered {
            failures.push(xs.to_vec());
        }
        Ok(())
    };
    for_each_subset(universe, k as usize, 0, &mut chosen, &mut visit)?;

    let big_n = 1u64 << n;
    let mut bound = BigUint::zero();
    for dd in 0..=d {
        let cosets_count = 1u64 << dd;
        let coset_size = big_n / cosets_count;
        let removable = (eps.powi(3) * coset_size as f64).floor() as u64;
        let per_coset: BigUint = (0..=removable.min(coset_size)).map(|s| binomial(coset_size, s)).sum();
        bound += gaussian_binomial(n, n - dd) * (BigUint::one() << cosets_count) * per_coset.pow(cosets_count as u32);
    }

    Ok(CoverProbeReport { n, k, k_prime, eps, d, failures, sets_checked, family_size_bound: bound.to_string() })
}

fn for_each_subset(
    universe: u32,
    k: usize,
    start: u32,
    chosen: &mut Vec<u32>,
    f: &mut impl FnMut(&[u32]) -> Result<()>,
) -> Result<()> {
    if chosen.len() == k {
        return f(chosen);
    }
    let remaining = (k - chosen.len()) as u32;
    for x in start..=universe - remaining {
        chosen.push(x);
        for_each_subset(universe, k, x + 1, chosen, f)?;
        chosen.pop();
    }
    Ok(())
}

/// `|X∔X|` for a set given by its members.
pub fn restricted_doubling(x: &ElemSet) -> Result<u64> {
    Ok(restricted_sumset(x, x)?.len() as u64)
}
