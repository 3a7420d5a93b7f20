//! Acceptance suite: one test per criterion, each writing a PASS/FAIL line
//! straight to stderr so the line shows up whether or not the test passes.

use std::io::Write;
use std::time::Instant;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use f2cayley::cayley::{from_generators, sample_cayley, sample_generators, CayleyGraph};
use f2cayley::clique::{
    chromatic_bracket, coset_coloring, max_clique, subspace_clique_counts, verify_coloring, UNLIMITED,
};
use f2cayley::experiments::{classify_n, density_measure, run_experiment, ExperimentConfig};
use f2cayley::freiman::{
    check_dim_bound, check_even_zohar, freiman_dimension, freiman_dimension_universal, tail_exponent, FreimanMethod,
};
use f2cayley::gf2::{enumerate_subspaces, gaussian_binomial, subspace_members, ElemSet, Subspace, DEFAULT_ENUM_BUDGET};
use f2cayley::moments::{eqkn_value, expected_m, moment_report, variance_m};
use f2cayley::rng::trial_seed;
use f2cayley::sumset::{kneser_check, restricted_sumset, sandwich_check, sumset};

fn report(id: u32, name: &str, pass: bool, start: Instant, detail: String) {
    let line = format!(
        "\ncriterion {id:>2} {} {name}: {detail} ({:.2}s)\n",
        if pass { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    assert!(pass, "{}", line.trim_end());
}

fn mask_set(n: u32, mask: u64) -> ElemSet {
    ElemSet::from_elems(n, (0..(1u32 << n)).filter(|&x| mask >> x & 1 == 1)).unwrap()
}

fn random_set(rng: &mut StdRng, n: u32, size: usize) -> ElemSet {
    let mut s = ElemSet::empty(n).unwrap();
    while s.len() < size {
        s.insert(rng.random_range(0..(1u32 << n)));
    }
    s
}

#[test]
fn c01_kneser_sweep() {
    let start = Instant::now();
    let mut checked = 0u64;
    let mut failures = 0u64;
    for am in 1u64..256 {
        for bm in 1u64..256 {
            let r = kneser_check(&mask_set(3, am), &mask_set(3, bm)).unwrap();
            checked += 1;
            failures += !r.holds as u64;
        }
    }
    let pass = failures == 0 && checked == 255 * 255 && start.elapsed().as_secs_f64() < 5.0;
    report(1, "Kneser sweep", pass, start, format!("{checked} pairs, {failures} failures"));
}

#[test]
fn c02_sandwich_sweep() {
    let start = Instant::now();
    let mut checked = 0u64;
    let mut failures = 0u64;
    for am in 1u64..256 {
        let a = mask_set(3, am);
        for bm in 1u64..256 {
            let b = mask_set(3, bm);
            for m in [1u64, 2, 4] {
                if b.len() as u64 > m {
                    checked += 1;
                    failures += !sandwich_check(&a, &b, m).unwrap().holds as u64;
                }
            }
        }
    }
    let pass = failures == 0 && start.elapsed().as_secs_f64() < 10.0;
    report(2, "Sandwich sweep", pass, start, format!("{checked} (A,B,m) cases, {failures} failures"));
}

#[test]
fn c03_sumset_identity() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(3);
    let mut failures = 0;
    for _ in 0..10_000 {
        let n = rng.random_range(2..=10u32);
        let size = rng.random_range(1..=(1usize << n).min(64));
        let x = random_set(&mut rng, n, size);
        let full = sumset(&x, &x).unwrap().len();
        let restricted = restricted_sumset(&x, &x).unwrap().len();
        failures += (full != restricted + 1) as u32;
    }
    report(3, "Sumset identity", failures == 0, start, format!("10000 sets, {failures} failures"));
}

fn apply_linear(cols: &[u32], x: u32) -> u32 {
    cols.iter().enumerate().filter(|(i, _)| x >> i & 1 == 1).fold(0, |acc, (_, &c)| acc ^ c)
}

#[test]
fn c04_freiman_oracles() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(4);
    let n = 5;
    let mut invariance_failures = 0;
    for _ in 0..100 {
        let size = rng.random_range(1..=5);
        let x = random_set(&mut rng, n, size);
        let r = freiman_dimension(&x).unwrap();
        assert_eq!(r.method, FreimanMethod::BruteForce);
        let cols: Vec<u32> = loop {
            let cols: Vec<u32> = (0..n).map(|_| rng.random_range(1..(1u32 << n))).collect();
            if Subspace::from_generators(n, cols.iter().copied()).unwrap().dim() == n {
                break cols;
            }
        };
        let t = rng.random_range(0..(1u32 << n));
        let moved = ElemSet::from_elems(n, x.iter().map(|v| apply_linear(&cols, v) ^ t)).unwrap();
        if freiman_dimension(&moved).unwrap().r != r.r || freiman_dimension(&x.translate(t)).unwrap().r != r.r {
            invariance_failures += 1;
        }
    }
    let mut agree_failures = 0;
    let mut compared = 0;
    for mask in 1u64..256 {
        let x = mask_set(3, mask);
        if x.len() > 5 {
            continue;
        }
        compared += 1;
        let brute = freiman_dimension(&x).unwrap();
        let universal = freiman_dimension_universal(&x).unwrap();
        agree_failures += (brute.r != universal.r) as u32;
    }
    let pass = invariance_failures == 0 && agree_failures == 0 && start.elapsed().as_secs_f64() < 60.0;
    report(
        4,
        "Freiman oracle agreement",
        pass,
        start,
        format!("100 invariance cases ({invariance_failures} failures), {compared} brute/universal comparisons ({agree_failures} disagreements)"),
    );
}

#[test]
fn c05_dimension_bound() {
    let start = Instant::now();
    let mut checked = 0;
    let mut failures = 0;
    for mask in 1u64..256 {
        let x = mask_set(3, mask);
        if x.len() > 5 {
            continue;
        }
        checked += 1;
        failures += !check_dim_bound(&x).unwrap().holds as u32;
    }
    report(5, "Dimension bound", failures == 0, start, format!("{checked} sets, {failures} failures"));
}

#[test]
fn c06_even_zohar_bound() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut checked = 0;
    for mask in 1u64..256 {
        let x = mask_set(3, mask);
        checked += 1;
        if !check_even_zohar(&x).unwrap().holds {
            failures.push(x.to_vec());
        }
    }
    let exhaustive_failures = failures.len();
    let mut rng = StdRng::seed_from_u64(6);
    let mut random_failures = 0;
    for _ in 0..10_000 {
        let size = rng.random_range(1..=16);
        let x = random_set(&mut rng, 4, size);
        checked += 1;
        random_failures += !check_even_zohar(&x).unwrap().holds as u32;
    }
    let detail = match failures.first() {
        Some(x) => {
            let r = check_even_zohar(&ElemSet::from_elems(3, x.iter().copied()).unwrap()).unwrap();
            format!(
                "{checked} sets, {exhaustive_failures} exhaustive + {random_failures} random failures; e.g. X={x:?}: span {} > bound {:.4} (K={:.4})",
                r.span_size, r.bound, r.doubling
            )
        }
        None => format!("{checked} sets, {random_failures} random failures"),
    };
    report(6, "Even-Zohar bound", exhaustive_failures == 0 && random_failures == 0, start, detail);
}

#[test]
fn c07_subspace_counts() {
    let start = Instant::now();
    let mut failures = 0;
    for n in 0..=5 {
        for m in 0..=n {
            let count = enumerate_subspaces(n, m, DEFAULT_ENUM_BUDGET).unwrap().count();
            failures += (BigUint::from(count) != gaussian_binomial(n, m)) as u32;
        }
    }
    report(7, "Subspace counts", failures == 0, start, format!("21 (n,m) pairs, {failures} mismatches"));
}

fn m_count(a: &ElemSet, m: u32) -> u64 {
    subspace_clique_counts(a, Some(m), usize::MAX).counts.get(m as usize).copied().unwrap_or(0)
}

#[test]
fn c08_moments_exact() {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    for n in 1..=3u32 {
        let sets = 1u64 << ((1u32 << n) - 1);
        for m in 0..=n {
            let values: Vec<u64> = (0..sets).map(|mask| m_count(&mask_set(n, mask << 1), m)).collect();
            let total = BigRational::from_integer(sets.into());
            let mean = values.iter().map(|&v| BigRational::from_integer(v.into())).sum::<BigRational>() / &total;
            let var = values
                .iter()
                .map(|&v| {
                    let d = BigRational::from_integer(v.into()) - &mean;
                    &d * &d
                })
                .sum::<BigRational>()
                / &total;
            if mean != expected_m(n, m).unwrap() || var != variance_m(n, m).unwrap() {
                mismatches.push((n, m));
            }
        }
    }
    let mut mc = Vec::new();
    let mut mc_ok = true;
    for (n, m) in [(6u32, 2u32), (8, 2)] {
        let trials = 100_000u64;
        let (mut s1, mut s2, mut s4) = (0f64, 0f64, 0f64);
        let e = expected_m(n, m).unwrap().to_f64().unwrap();
        let v = variance_m(n, m).unwrap().to_f64().unwrap();
        for i in 0..trials {
            let a = sample_generators(n, trial_seed(0x6d6f_6d65_6e74, i)).unwrap();
            let x = m_count(&a, m) as f64;
            s1 += x;
            s2 += (x - e) * (x - e);
            s4 += (x - e).powi(4);
        }
        let t = trials as f64;
        let mean = s1 / t;
        let var = s2 / t;
        let se_mean = (v / t).sqrt();
        let se_var = ((s4 / t - var * var) / t).sqrt();
        let z_mean = (mean - e) / se_mean;
        let z_var = (var - v) / se_var;
        mc_ok &= z_mean.abs() <= 4.0 && z_var.abs() <= 4.0;
        mc.push(format!("({n},{m}) z_mean={z_mean:.2} z_var={z_var:.2}"));
    }
    let pass = mismatches.is_empty() && mc_ok && start.elapsed().as_secs_f64() < 120.0;
    report(
        8,
        "Moments exactness",
        pass,
        start,
        format!("exhaustive mismatches {mismatches:?}; Monte Carlo {}", mc.join(", ")),
    );
}

#[test]
fn c09_expectation_lower_bound() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut checked = 0;
    for n in 2..=16u32 {
        for m in 1..=n.min(4) {
            checked += 1;
            if !moment_report(n, m).unwrap().holds_E {
                failures.push((n, m));
            }
        }
    }
    report(
        9,
        "Expectation lower bound",
        failures.is_empty(),
        start,
        format!("{checked} (n,m) pairs, failures {failures:?}"),
    );
}

#[test]
fn c10_eqkn() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut near_ties = 0;
    for n in 4..=1_000_000u64 {
        let c = classify_n(n, 0.5).unwrap();
        near_ties += c.near_tie as u32;
        if !eqkn_value(n, c.m_pred as u32).unwrap().nonpositive {
            failures.push(n);
        }
    }
    let mut at_next = Vec::new();
    for j in 2..=5u32 {
        let n = 1u64 << ((1u32 << j) - 1);
        let m = classify_n(n, 0.5).unwrap().m_pred as u32;
        let v = eqkn_value(n, m + 1).unwrap();
        if !v.nonpositive {
            failures.push(n);
        }
        at_next.push(format!("n={n}: m+1={} value={}", m + 1, v.value));
    }
    let pass = failures.is_empty() && near_ties == 0 && start.elapsed().as_secs_f64() < 30.0;
    report(
        10,
        "eq:kn checks",
        pass,
        start,
        format!("{} failures, {near_ties} near ties; {}", failures.len(), at_next.join("; ")),
    );
}

/// All-subsets clique oracle.
fn naive_omega(g: &CayleyGraph) -> u64 {
    let order = g.order() as u32;
    let mut best = 0;
    for mask in 1u64..(1u64 << order) {
        let size = mask.count_ones() as u64;
        if size <= best {
            continue;
        }
        let vs: Vec<u32> = (0..order).filter(|v| mask >> v & 1 == 1).collect();
        if g.is_clique(&vs) {
            best = size;
        }
    }
    best
}

fn subspace_graph(n: u32, h: &Subspace) -> CayleyGraph {
    let mut a = subspace_members(h).unwrap();
    a.remove(0);
    from_generators(n, &a).unwrap()
}

#[test]
fn c11_clique_oracle() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for n in 2..=4u32 {
        for i in 0..50 {
            let g = sample_cayley(n, trial_seed(11, i)).unwrap();
            let c = max_clique(&g, UNLIMITED);
            if !c.optimal || c.size != naive_omega(&g) {
                failures.push(format!("random n={n} i={i}"));
            }
        }
    }
    let mut subspaces = 0;
    for n in 2..=6u32 {
        for d in 0..=n {
            for h in enumerate_subspaces(n, d, DEFAULT_ENUM_BUDGET).unwrap() {
                subspaces += 1;
                let c = max_clique(&subspace_graph(n, &h), UNLIMITED);
                if !c.optimal || c.size != 1 << d {
                    failures.push(format!("subspace n={n} {h:?}"));
                }
            }
        }
    }
    report(
        11,
        "Clique oracle",
        failures.is_empty(),
        start,
        format!("150 random graphs, {subspaces} subspace graphs, failures {failures:?}"),
    );
}

/// Smallest number of colours by plain backtracking in vertex order.
fn naive_chi(g: &CayleyGraph) -> u64 {
    fn fits(g: &CayleyGraph, colors: &mut Vec<u32>, c: u32) -> bool {
        let v = colors.len() as u32;
        if v as usize == g.order() {
            return true;
        }
        let used = colors.iter().copied().max().map_or(0, |m| m + 1);
        for col in 0..c.min(used + 1) {
            if (0..v).all(|u| !g.adjacent(u, v) || colors[u as usize] != col) {
                colors.push(col);
                if fits(g, colors, c) {
                    return true;
                }
                colors.pop();
            }
        }
        false
    }
    (1..=g.order() as u32).find(|&c| fits(g, &mut Vec::new(), c)).unwrap() as u64
}

#[test]
fn c12_chromatic_consistency() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut colorings = 0;
    let mut check_graph = |g: &CayleyGraph, label: String, expected: Option<u64>| {
        let chi = naive_chi(g);
        let b = chromatic_bracket(g, UNLIMITED);
        if b.exact != Some(chi) || b.lower > chi || chi > b.upper || expected.is_some_and(|e| e != chi) {
            failures.push(format!("{label}: oracle {chi}, bracket {b:?}"));
        }
        for d in 0..=g.n() {
            for v in enumerate_subspaces(g.n(), d, DEFAULT_ENUM_BUDGET).unwrap() {
                let independent = v.members_iter().all(|x| x == 0 || !g.generators().contains(x));
                match coset_coloring(g, &v) {
                    Ok(c) => {
                        colorings += 1;
                        if !independent || !verify_coloring(g, &c) || c.num_colors != 1 << (g.n() - d) {
                            failures.push(format!("{label}: bad coset colouring for {v:?}"));
                        }
                        if (c.num_colors as u64) < chi {
                            failures.push(format!("{label}: coset colouring below chi"));
                        }
                    }
                    Err(_) if independent => failures.push(format!("{label}: refused independent {v:?}")),
                    Err(_) => {}
                }
            }
        }
    };
    for n in 2..=4u32 {
        for i in 0..20 {
            check_graph(&sample_cayley(n, trial_seed(12, i)).unwrap(), format!("random n={n} i={i}"), None);
        }
        for d in 0..=n {
            for h in enumerate_subspaces(n, d, DEFAULT_ENUM_BUDGET).unwrap() {
                check_graph(&subspace_graph(n, &h), format!("subspace n={n} {h:?}"), Some(1 << d));
            }
        }
    }
    report(
        12,
        "Chromatic consistency",
        failures.is_empty(),
        start,
        format!("{colorings} coset colourings verified, failures {failures:?}"),
    );
}

#[test]
fn c13_subspace_clique_statistics() {
    let start = Instant::now();
    let e4 = expected_m(9, 4).unwrap().to_f64().unwrap();
    let e5 = expected_m(9, 5).unwrap().to_f64().unwrap();
    let (mut with4, mut with5) = (0, 0);
    for i in 0..100 {
        let a = sample_generators(9, trial_seed(13, i)).unwrap();
        let r = subspace_clique_counts(&a, Some(5), usize::MAX);
        with4 += (r.max_dim >= 4) as u32;
        with5 += (r.max_dim >= 5) as u32;
    }
    let pass = with4 >= 95 && with5 <= 5 && start.elapsed().as_secs_f64() < 300.0;
    report(
        13,
        "Subspace-clique statistics",
        pass,
        start,
        format!("M_4≥1 in {with4}/100 (E={e4:.3}), M_5≥1 in {with5}/100 (E={e5:.3e})"),
    );
}

#[test]
fn c14_tail_exponent() {
    let start = Instant::now();
    let n = 1024u64;
    let k = (n as f64 * (n as f64).log2()).ceil() as u128;
    let points = [
        ("10k", 10 * k),
        ("k^(31/30)", (k as f64).powf(31.0 / 30.0).ceil() as u128),
        ("k^2", k * k),
        ("n*k", n as u128 * k),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, l) in points {
        match tail_exponent(n, k, l) {
            Ok(t) => {
                pass &= t.log2_bound < 0.0;
                parts.push(format!("{label} (l={l}, {:?}): {:.1}", t.regime, t.log2_bound));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{label} (l={l}): {e}"));
            }
        }
    }
    report(14, "Tail exponent", pass, start, format!("k={k}; {}", parts.join("; ")));
}

#[test]
fn c15_density() {
    let start = Instant::now();
    let half = density_measure(100_000, 0.5).unwrap();
    let tenth = density_measure(100_000, 0.1).unwrap();
    let pass = half.fraction >= 0.5 && tenth.fraction >= 0.9 * 0.95;
    report(15, "Density", pass, start, format!("eps=1/2: {:.5}, eps=1/10: {:.5}", half.fraction, tenth.fraction));
}

fn strip_elapsed(jsonl: &str) -> Vec<String> {
    jsonl.lines().map(|l| l.rsplit_once(",\"elapsed_ms\":").map_or(l, |(head, _)| head).to_string()).collect()
}

#[test]
fn c16_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: usize| {
        let cfg = ExperimentConfig {
            ns: vec![4, 6, 8],
            trials: 8,
            base_seed: 42,
            clique_budget: 1_000_000,
            chi_budget: 100_000,
            out_dir: dir.path().join(name),
            threads: None,
        };
        let out = run_experiment(&cfg, Some(threads)).unwrap();
        (std::fs::read_to_string(out.jsonl_path).unwrap(), std::fs::read_to_string(out.summary_path).unwrap())
    };
    let (a, sa) = run("a", 1);
    let (b, sb) = run("b", 1);
    let (c, sc) = run("c", 4);
    let lines = strip_elapsed(&a);
    let pass = lines.len() == 24 && lines == strip_elapsed(&b) && lines == strip_elapsed(&c) && sa == sb && sa == sc;
    report(16, "Determinism", pass, start, format!("{} records; 1 vs 1 vs 4 workers identical: {pass}", lines.len()));
}
