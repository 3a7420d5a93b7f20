//! Cayley sum graphs on GF(2)^n: `x ~ y` iff `x ≠ y` and `x + y ∈ A`.

use std::fmt;

use crate::error::{Error, Result};
use crate::gf2::{translate_words, words_for, ElemSet};
use crate::rng::keystream_bits;

pub const MIN_GRAPH_DIM: u32 = 2;
pub const MAX_GRAPH_DIM: u32 = 13;

fn check_graph_dim(n: u32) -> Result<()> {
    if !(MIN_GRAPH_DIM..=MAX_GRAPH_DIM).contains(&n) {
        return Err(Error::DimensionOutOfRange { n, min: MIN_GRAPH_DIM, max: MAX_GRAPH_DIM });
    }
    Ok(())
}

/// A Cayley graph with one neighbour bitset per vertex.
#[derive(Clone)]
pub struct CayleyGraph {
    n: u32,
    gens: ElemSet,
    seed: Option<u64>,
    row_words: usize,
    adj: Vec<u64>,
}

impl CayleyGraph {
    fn build(n: u32, mut gens: ElemSet, seed: Option<u64>) -> Self {
        gens.remove(0);
        let row_words = words_for(n);
        let order = 1usize << n;
        let mut adj = vec![0u64; order * row_words];
        for (x, row) in adj.chunks_exact_mut(row_words).enumerate() {
            translate_words(gens.words(), x as u32, row);
        }
        CayleyGraph { n, gens, seed, row_words, adj }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of vertices, `2^n`.
    pub fn order(&self) -> usize {
        1 << self.n
    }

    pub fn generators(&self) -> &ElemSet {
        &self.gens
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Common degree `|A|` of every vertex.
    pub fn degree(&self) -> usize {
        self.gens.len()
    }

    #[inline]
    pub fn row(&self, x: u32) -> &[u64] {
        let start = x as usize * self.row_words;
        &self.adj[start..start + self.row_words]
    }

    pub fn row_words(&self) -> usize {
        self.row_words
    }

    #[inline]
    pub fn adjacent(&self, x: u32, y: u32) -> bool {
        x != y && self.gens.contains(x ^ y)
    }

    pub fn neighbors(&self, x: u32) -> ElemSet {
        ElemSet::from_words(self.n, self.row(x).to_vec())
    }

    /// The complement graph: the Cayley graph on `(GF(2)^n ∖ {0}) ∖ A`.
    pub fn complement(&self) -> CayleyGraph {
        let mut c = self.gens.complement();
        c.remove(0);
        CayleyGraph::build(self.n, c, None)
    }

    pub fn is_clique(&self, vertices: &[u32]) -> bool {
        vertices.iter().enumerate().all(|(i, &x)| vertices[i + 1..].iter().all(|&y| self.adjacent(x, y)))
    }

    pub fn is_independent(&self, vertices: &[u32]) -> bool {
        vertices.iter().enumerate().all(|(i, &x)| vertices[i + 1..].iter().all(|&y| x != y && !self.adjacent(x, y)))
    }

    /// Header line `n=<n> seed=<seed|none>` followed by the hex bitset of A.
    pub fn to_text(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!("n={} seed={}\n{}\n", self.n, seed, self.gens.to_hex())
    }

    pub fn from_text(text: &str) -> Result<CayleyGraph> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))?;
        let mut n = None;
        let mut seed = None;
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("n", v)) => n = Some(v.parse::<u32>().map_err(|e| Error::Parse(format!("n: {e}")))?),
                Some(("seed", "none")) => seed = Some(None),
                Some(("seed", v)) => {
                    seed = Some(Some(v.parse::<u64>().map_err(|e| Error::Parse(format!("seed: {e}")))?))
                }
                _ => return Err(Error::Parse(format!("unexpected header field {field:?}"))),
            }
        }
        let n = n.ok_or_else(|| Error::Parse("header lacks n".into()))?;
        let seed = seed.ok_or_else(|| Error::Parse("header lacks seed".into()))?;
        check_graph_dim(n)?;
        let hex = lines.next().ok_or_else(|| Error::Parse("missing generator bitset".into()))?;
        let gens = ElemSet::from_hex(n, hex)?;
        if gens.contains(0) {
            return Err(Error::Parse("generator set contains 0".into()));
        }
        Ok(CayleyGraph::build(n, gens, seed))
    }
}

impl fmt::Debug for CayleyGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CayleyGraph").field("n", &self.n).field("seed", &self.seed).field("gens", &self.gens).finish()
    }
}

impl PartialEq for CayleyGraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.seed == other.seed && self.gens == other.gens
    }
}

/// Generator set of the seeded random model: each nonzero element is kept
/// with probability ½; 0 is always excluded.
pub fn sample_generators(n: u32, seed: u64) -> Result<ElemSet> {
    check_graph_dim(n)?;
    let mut words = vec![0u64; words_for(n)];
    keystream_bits(seed, &mut words);
    if n < 6 {
        words[0] &= (1u64 << (1u32 << n)) - 1;
    }
    words[0] &= !1;
    Ok(ElemSet::from_words(n, words))
}

pub fn sample_cayley(n: u32, seed: u64) -> Result<CayleyGraph> {
    let gens = sample_generators(n, seed)?;
    Ok(CayleyGraph::build(n, gens, Some(seed)))
}

/// Graph for an explicit generator set; 0 is dropped silently.
pub fn from_generators(n: u32, gens: &ElemSet) -> Result<CayleyGraph> {
    check_graph_dim(n)?;
    if gens.n() != n {
        return Err(Error::DimensionMismatch { left: gens.n(), right: n });
    }
    Ok(CayleyGraph::build(n, gens.clone(), None))
}

pub fn neighbors(g: &CayleyGraph, x: u32) -> ElemSet {
    g.neighbors(x)
}
