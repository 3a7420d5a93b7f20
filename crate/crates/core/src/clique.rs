//! Clique number, independence number and chromatic number of Cayley sum
//! graphs, plus the subspace cliques counted by `M_m`.
//!
//! Every vertex of a Cayley graph looks the same (translation by `t` is an
//! automorphism), so a maximum clique may be assumed to contain 0. The exact
//! search therefore runs inside the neighbourhood `A` of vertex 0 only.

use serde::{Deserialize, Serialize};

use crate::cayley::CayleyGraph;
use crate::error::{Error, Result};
use crate::gf2::{cosets, iter_words, top_bit, ElemSet, Subspace};

/// Node budget meaning "search to completion".
pub const UNLIMITED: u64 = u64::MAX;
/// Default cap on stored subspaces per level in [`subspace_cliques`].
pub const DEFAULT_SUBSPACE_STORE: usize = 4_000_000;
/// Largest dimension for which the exact colouring search runs.
pub const MAX_EXACT_CHI_DIM: u32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CliqueMethod {
    /// Search completed and found a clique larger than the seed.
    Exact,
    /// Search completed without beating the subspace seed.
    SubspaceSeeded,
    /// Node budget ran out; `size` is a lower bound only.
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CliqueOutcome {
    pub size: u64,
    pub witness: Vec<u32>,
    pub optimal: bool,
    pub method: CliqueMethod,
    pub nodes_explored: u64,
    /// Proven upper bound; equals `size` when `optimal`.
    pub upper_bound: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceCliqueReport {
    /// `counts[m]` = number of m-dimensional `H` with `H ∖ {0} ⊆ A`.
    pub counts: Vec<u64>,
    pub max_dim: u32,
    /// One subspace attaining `max_dim`.
    pub largest: Subspace,
    /// Set when a level overflowed the storage cap; counts above
    /// `exact_through` are then lower bounds.
    pub truncated: bool,
    pub exact_through: u32,
}

/// Counts subspaces `H` with `H ∖ {0} ⊆ gens`, level by level.
///
/// A `(d+1)`-dimensional subspace `K` with canonical basis `b_1, …, b_{d+1}`
/// is produced exactly once: from its parent `span(b_1, …, b_d)` by adjoining
/// `b_{d+1}`. So a child of `H` is `H + v` for `v ∈ A` whose top bit lies
/// below every pivot of `H`, is clear in every row of `H`, and with
/// `v + h ∈ A` for all `h ∈ H`.
pub fn subspace_clique_counts(gens: &ElemSet, max_dim: Option<u32>, store_limit: usize) -> SubspaceCliqueReport {
    let n = gens.n();
    let limit_dim = max_dim.unwrap_or(n).min(n);
    let mut counts = vec![1u64];
    let mut largest: Vec<u32> = Vec::new();
    let mut level: Vec<u32> = Vec::new(); // flattened bases of the current level
    let mut dim = 0usize;
    let mut truncated = false;
    let mut exact_through = 0u32;
    let cand: Vec<u32> = gens.iter().filter(|&v| v != 0).collect();

    // level 0: the zero subspace
    let mut have_level = true;
    while have_level && (dim as u32) < limit_dim {
        let mut next: Vec<u32> = Vec::new();
        let mut next_count = 0u64;
        let mut overflow = false;
        let parents: Box<dyn Iterator<Item = &[u32]>> =
            if dim == 0 { Box::new(std::iter::once(&[][..])) } else { Box::new(level.chunks_exact(dim)) };
        for basis in parents {
            let min_pivot = basis.last().map_or(n, |&b| top_bit(b));
            let row_or = basis.iter().fold(0u32, |a, &b| a | b);
            for &v in &cand {
                if v >> min_pivot != 0 {
                    break;
                }
                let q = top_bit(v);
                if row_or >> q & 1 == 1 {
                    continue;
                }
                // v + h for every nonzero h in H
                let mut h = 0u32;
                let mut ok = true;
                for i in 1..(1u64 << dim) {
                    h ^= basis[i.trailing_zeros() as usize];
                    if !gens.contains(v ^ h) {
                        ok = false;
                        break;
                    }
                }
                if !ok {
                    continue;
                }
                next_count += 1;
                if next_count == 1 {
                    largest = basis.to_vec();
                    largest.push(v);
                }
                if next.len() / (dim + 1) < store_limit {
                    next.extend_from_slice(basis);
                    next.push(v);
                } else {
                    overflow = true;
                }
            }
        }
        if next_count == 0 {
            break;
        }
        counts.push(next_count);
        if !truncated {
            exact_through = (dim + 1) as u32;
        }
        truncated |= overflow;
        level = next;
        dim += 1;
        have_level = !level.is_empty();
    }
    let max_dim = (counts.len() - 1) as u32;
    SubspaceCliqueReport {
        counts,
        max_dim,
        largest: Subspace::from_rref_unchecked(n, largest),
        truncated,
        exact_through,
    }
}

/// Subspace-clique counts of a graph for every dimension.
pub fn subspace_cliques(g: &CayleyGraph) -> SubspaceCliqueReport {
    subspace_clique_counts(g.generators(), None, DEFAULT_SUBSPACE_STORE)
}

struct Search<'a> {
    g: &'a CayleyGraph,
    budget: u64,
    nodes: u64,
    aborted: bool,
    best: Vec<u32>,
    current: Vec<u32>,
}

impl Search<'_> {
    /// Greedy sequential colouring of `p`; returns vertices with their colour
    /// numbers, colours nondecreasing. Ties go to the lowest vertex index.
    fn color_sort(&self, p: &[u64]) -> Vec<(u32, u32)> {
        let mut order = Vec::new();
        let mut uncolored = p.to_vec();
        let mut q = vec![0u64; p.len()];
        let mut color = 0;
        while uncolored.iter().any(|&w| w != 0) {
            color += 1;
            q.copy_from_slice(&uncolored);
            while let Some(wi) = q.iter().position(|&w| w != 0) {
                let v = ((wi as u32) << 6) | q[wi].trailing_zeros();
                q[wi] &= q[wi] - 1;
                uncolored[wi] &= !(1u64 << (v & 63));
                for (qw, &nw) in q.iter_mut().zip(self.g.row(v)) {
                    *qw &= !nw;
                }
                order.push((v, color));
            }
        }
        order
    }

    fn expand(&mut self, mut p: Vec<u64>) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        let order = self.color_sort(&p);
        for &(v, color) in order.iter().rev() {
            if self.current.len() + color as usize <= self.best.len() {
                return;
            }
            self.current.push(v);
            let np: Vec<u64> = p.iter().zip(self.g.row(v)).map(|(&a, &b)| a & b).collect();
            if np.iter().all(|&w| w == 0) {
                if self.current.len() > self.best.len() {
                    self.best = self.current.clone();
                }
            } else {
                self.expand(np);
            }
            self.current.pop();
            if self.aborted {
                return;
            }
            p[(v >> 6) as usize] &= !(1u64 << (v & 63));
        }
    }
}

/// Maximum clique by branch and bound, started from the largest subspace
/// clique of the graph.
pub fn max_clique(g: &CayleyGraph, budget: u64) -> CliqueOutcome {
    let seed = subspace_clique_counts(g.generators(), None, DEFAULT_SUBSPACE_STORE);
    let members: Vec<u32> = seed.largest.members_iter().collect();
    max_clique_seeded(g, budget, &members)
}

/// Maximum clique with a caller-supplied incumbent clique.
pub fn max_clique_seeded(g: &CayleyGraph, budget: u64, incumbent: &[u32]) -> CliqueOutcome {
    assert!(g.is_clique(incumbent), "incumbent is not a clique");
    let mut seed: Vec<u32> = incumbent.to_vec();
    if seed.is_empty() {
        seed.push(0);
    }
    // translate the incumbent so that it contains 0
    let t = seed[0];
    let seed: Vec<u32> = seed.iter().map(|&x| x ^ t).collect();
    let seed_len = seed.len();

    let mut s = Search { g, budget, nodes: 0, aborted: false, best: seed, current: vec![0] };
    let root: Vec<u64> = g.row(0).to_vec();
    let root_colors = s.color_sort(&root).last().map_or(0, |&(_, c)| c) as u64;
    if root.iter().any(|&w| w != 0) {
        s.expand(root);
    }
    let optimal = !s.aborted;
    let method = if !optimal {
        CliqueMethod::BudgetExhausted
    } else if s.best.len() > seed_len {
        CliqueMethod::Exact
    } else {
        CliqueMethod::SubspaceSeeded
    };
    let mut witness = s.best;
    witness.sort_unstable();
    assert!(verify_clique(g, &witness), "search produced an invalid clique");
    let size = witness.len() as u64;
    CliqueOutcome {
        size,
        witness,
        optimal,
        method,
        nodes_explored: s.nodes,
        upper_bound: if optimal { size } else { root_colors + 1 },
    }
}

/// Independent-set analogue of [`max_clique`], run on the complement Cayley
/// graph.
pub fn independence_number(g: &CayleyGraph, budget: u64) -> CliqueOutcome {
    let out = max_clique(&g.complement(), budget);
    assert!(g.is_independent(&out.witness));
    out
}

pub fn verify_clique(g: &CayleyGraph, vertices: &[u32]) -> bool {
    let mut seen = std::collections::HashSet::new();
    vertices.iter().all(|&v| (v as usize) < g.order() && seen.insert(v)) && g.is_clique(vertices)
}

/// A proper vertex colouring, `colors[x]` being the colour of vertex `x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub colors: Vec<u32>,
    pub num_colors: u32,
}

pub fn verify_coloring(g: &CayleyGraph, coloring: &Coloring) -> bool {
    if coloring.colors.len() != g.order() {
        return false;
    }
    let used: std::collections::BTreeSet<u32> = coloring.colors.iter().copied().collect();
    if used.len() as u32 != coloring.num_colors || used.iter().any(|&c| c >= coloring.num_colors) {
        return false;
    }
    (0..g.order() as u32)
        .all(|x| iter_words(g.row(x)).all(|y| coloring.colors[x as usize] != coloring.colors[y as usize]))
}

/// Colours each coset of an independent subspace `v` with its own colour.
pub fn coset_coloring(g: &CayleyGraph, v: &Subspace) -> Result<Coloring> {
    if v.n() != g.n() {
        return Err(Error::DimensionMismatch { left: v.n(), right: g.n() });
    }
    // (i+V)∔(i+V) = V∖{0}, so V independent ⇔ V ∩ A = {0}
    if let Some(bad) = v.members_iter().find(|&x| x != 0 && g.generators().contains(x)) {
        return Err(Error::pre(format!("subspace is not independent: 0 ~ {bad:#x}")));
    }
    let parts = cosets(v, g.n())?;
    let mut colors = vec![0u32; g.order()];
    for (c, part) in parts.iter().enumerate() {
        for x in part.members.iter() {
            colors[x as usize] = c as u32;
        }
    }
    let coloring = Coloring { colors, num_colors: parts.len() as u32 };
    assert!(verify_coloring(g, &coloring));
    Ok(coloring)
}

/// DSATUR greedy colouring; ties broken by uncoloured degree, then index.
pub fn dsatur_coloring(g: &CayleyGraph) -> Coloring {
    let order = g.order();
    let none = u32::MAX;
    let mut colors = vec![none; order];
    let cap_words = order.div_ceil(64);
    let mut sat_sets = vec![0u64; order * cap_words];
    let mut sat = vec![0u32; order];
    let mut deg_unc = vec![g.degree() as u32; order];
    let mut num_colors = 0u32;
    for _ in 0..order {
        let mut pick = None;
        for v in 0..order {
            if colors[v] != none {
                continue;
            }
            let key = (sat[v], deg_unc[v]);
            match pick {
                Some((_, k)) if k >= key => {}
                _ => pick = Some((v, key)),
            }
        }
        let (v, _) = pick.expect("uncoloured vertex remains");
        let set = &sat_sets[v * cap_words..(v + 1) * cap_words];
        let c = (0..).find(|&c: &u32| set[(c / 64) as usize] >> (c % 64) & 1 == 0).unwrap();
        colors[v] = c;
        num_colors = num_colors.max(c + 1);
        for u in iter_words(g.row(v as u32)) {
            let u = u as usize;
            deg_unc[u] -= 1;
            let w = &mut sat_sets[u * cap_words + (c / 64) as usize];
            if *w >> (c % 64) & 1 == 0 {
                *w |= 1 << (c % 64);
                sat[u] += 1;
            }
        }
    }
    let coloring = Coloring { colors, num_colors };
    assert!(verify_coloring(g, &coloring));
    coloring
}

/// Exact chromatic number by DSATUR branch and bound, searching only for
/// colourings with fewer than `upper` colours. Returns `None` when the node
/// budget runs out.
pub fn exact_chromatic(g: &CayleyGraph, lower: u64, upper: Coloring, budget: u64) -> Option<(Coloring, u64)> {
    struct Dsat<'a> {
        g: &'a CayleyGraph,
        colors: Vec<u32>,
        best: Coloring,
        lower: u32,
        nodes: u64,
        budget: u64,
        aborted: bool,
    }
    const NONE: u32 = u32::MAX;
    impl Dsat<'_> {
        fn neighbor_colors(&self, v: u32) -> u64 {
            iter_words(self.g.row(v))
                .filter_map(|u| {
                    let c = self.colors[u as usize];
                    (c != NONE).then(|| 1u64 << c)
                })
                .fold(0, |a, b| a | b)
        }

        fn solve(&mut self, colored: usize, used: u32) {
            self.nodes += 1;
            if self.nodes > self.budget {
                self.aborted = true;
                return;
            }
            if colored == self.colors.len() {
                self.best = Coloring { colors: self.colors.clone(), num_colors: used };
                return;
            }
            let mut pick = (0u32, 0u32, 0u32);
            let mut found = false;
            for v in 0..self.colors.len() as u32 {
                if self.colors[v as usize] != NONE {
                    continue;
                }
                let s = self.neighbor_colors(v).count_ones();
                let d = iter_words(self.g.row(v)).filter(|&u| self.colors[u as usize] == NONE).count() as u32;
                if !found || (s, d) > (pick.1, pick.2) {
                    pick = (v, s, d);
                    found = true;
                }
            }
            let v = pick.0;
            let forbidden = self.neighbor_colors(v);
            let limit = (used + 1).min(self.best.num_colors - 1);
            for c in 0..limit {
                if forbidden >> c & 1 == 1 {
                    continue;
                }
                self.colors[v as usize] = c;
                self.solve(colored + 1, used.max(c + 1));
                self.colors[v as usize] = NONE;
                if self.aborted || self.best.num_colors <= self.lower {
                    return;
                }
            }
        }
    }

    assert!(g.n() <= MAX_EXACT_CHI_DIM, "exact colouring is limited to n ≤ {MAX_EXACT_CHI_DIM}");
    let mut s =
        Dsat { g, colors: vec![NONE; g.order()], lower: lower as u32, best: upper, nodes: 0, budget, aborted: false };
    if s.best.num_colors > s.lower {
        s.solve(0, 0);
    }
    if s.aborted {
        return None;
    }
    assert!(verify_coloring(g, &s.best));
    Some((s.best, s.nodes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChromaticBracket {
    pub lower: u64,
    pub upper: u64,
    pub exact: Option<u64>,
    pub omega_lb: u64,
    pub alpha_ub: u64,
    pub dsatur_colors: u64,
    /// Colours used by the best coset colouring found.
    pub coset_colors: u64,
    pub nodes: u64,
}

/// Lower bound `max(ω, ⌈2^n/α⌉)`, upper bound from DSATUR and coset
/// colourings, and the exact value for `n ≤ 5` when the budget allows.
pub fn chromatic_bracket(g: &CayleyGraph, budget: u64) -> ChromaticBracket {
    let omega = max_clique(g, budget);
    chromatic_bracket_with(g, budget, &omega)
}

/// As [`chromatic_bracket`], reusing an already computed clique outcome.
pub fn chromatic_bracket_with(g: &CayleyGraph, budget: u64, omega: &CliqueOutcome) -> ChromaticBracket {
    let comp = g.complement();
    let indep_sub = subspace_clique_counts(comp.generators(), None, DEFAULT_SUBSPACE_STORE);
    let seed: Vec<u32> = indep_sub.largest.members_iter().collect();
    let alpha = max_clique_seeded(&comp, budget, &seed);
    let order = g.order() as u64;
    let lower = omega.size.max(order.div_ceil(alpha.upper_bound));

    let greedy = dsatur_coloring(g);
    let cosets = coset_coloring(g, &indep_sub.largest).expect("complement subspace clique is independent");
    let dsatur_colors = greedy.num_colors as u64;
    let coset_colors = cosets.num_colors as u64;
    let best = if cosets.num_colors < greedy.num_colors { cosets } else { greedy };
    let upper = best.num_colors as u64;

    let mut nodes = omega.nodes_explored + alpha.nodes_explored;
    let exact = if g.n() <= MAX_EXACT_CHI_DIM {
        exact_chromatic(g, lower, best, budget).map(|(c, used)| {
            nodes += used;
            c.num_colors as u64
        })
    } else {
        None
    };
    if let Some(x) = exact {
        assert!(lower <= x && x <= upper);
    }
    ChromaticBracket {
        lower,
        upper,
        exact,
        omega_lb: omega.size,
        alpha_ub: alpha.upper_bound,
        dsatur_colors,
        coset_colors,
        nodes,
    }
}
