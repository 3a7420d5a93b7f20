use proptest::prelude::*;

use f2cayley::cayley::{from_generators, sample_cayley};
use f2cayley::clique::{
    chromatic_bracket, independence_number, max_clique, subspace_cliques, verify_clique, UNLIMITED,
};
use f2cayley::experiments::{load_records, run_experiment, ExperimentConfig};
use f2cayley::freiman::{
    binomial, census_skl, freiman_dimension, freiman_dimension_universal, is_freiman_isomorphic, preserves_quadruples,
    restricted_doubling,
};
use f2cayley::gf2::{span, subspace_members, ElemSet, Subspace, DEFAULT_ENUM_BUDGET};
use f2cayley::sumset::{kneser_check, restricted_sumset, sumset, sym};

fn elem_set(n: u32, max_len: usize) -> impl Strategy<Value = ElemSet> {
    prop::collection::btree_set(0..(1u32 << n), 1..=max_len).prop_map(move |xs| ElemSet::from_elems(n, xs).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn span_is_the_smallest_subspace(x in elem_set(6, 10)) {
        let s = span(&x);
        let members = subspace_members(&s).unwrap();
        prop_assert!(x.is_subset(&members).unwrap());
        // every basis row is needed: dropping one loses some member of X
        for skip in 0..s.basis().len() {
            let rest = Subspace::from_generators(6, s.basis().iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &b)| b)).unwrap();
            prop_assert!(!x.iter().all(|v| rest.contains(v)));
        }
    }

    #[test]
    fn kneser_holds_in_dimension_five(a in elem_set(5, 12), b in elem_set(5, 12)) {
        prop_assert!(kneser_check(&a, &b).unwrap().holds);
    }

    #[test]
    fn stabilizer_divides_sumset(a in elem_set(6, 20), b in elem_set(6, 20)) {
        let ab = sumset(&a, &b).unwrap();
        let st = sym(&ab).unwrap();
        prop_assert_eq!(ab.len() as u64 % st.size(), 0);
        for g in st.members_iter() {
            prop_assert_eq!(ab.translate(g), ab.clone());
        }
    }

    #[test]
    fn restricted_doubling_is_translation_invariant(x in elem_set(7, 15), t in 0u32..128) {
        prop_assert_eq!(restricted_doubling(&x).unwrap(), restricted_doubling(&x.translate(t)).unwrap());
        let rs = restricted_sumset(&x, &x).unwrap();
        prop_assert!(!rs.contains(0));
    }

    #[test]
    fn freiman_methods_agree(x in elem_set(4, 6)) {
        let brute = freiman_dimension(&x).unwrap();
        let universal = freiman_dimension_universal(&x).unwrap();
        prop_assert_eq!(brute.r, universal.r);
        let xs = x.to_vec();
        prop_assert!(preserves_quadruples(&xs, &brute.witness));
        prop_assert!(preserves_quadruples(&xs, &universal.witness));
    }

    #[test]
    fn freiman_isomorphism_is_translation_invariant(x in elem_set(4, 6), t in 0u32..16) {
        prop_assert!(is_freiman_isomorphic(&x, &x.translate(t)).unwrap());
    }

    #[test]
    fn clique_witness_translates(n in 5u32..=8, seed in any::<u64>(), t in any::<u32>()) {
        let g = sample_cayley(n, seed).unwrap();
        let c = max_clique(&g, UNLIMITED);
        prop_assert!(c.optimal);
        let r = subspace_cliques(&g);
        prop_assert!(c.size >= 1 << r.max_dim);
        let t = t & ((1 << n) - 1);
        let moved: Vec<u32> = c.witness.iter().map(|&v| v ^ t).collect();
        prop_assert!(verify_clique(&g, &moved));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn chromatic_bracket_brackets_exact(n in 2u32..=5, seed in any::<u64>()) {
        let g = sample_cayley(n, seed).unwrap();
        let b = chromatic_bracket(&g, UNLIMITED);
        let chi = b.exact.expect("small graphs finish");
        let alpha = independence_number(&g, UNLIMITED).size;
        prop_assert!((g.order() as u64).div_ceil(alpha) <= chi);
        prop_assert!(chi <= b.coset_colors && chi <= b.dsatur_colors);
        prop_assert!(b.lower <= chi && chi <= b.upper);
    }
}

#[test]
fn census_totals_match_binomials() {
    for n in 2..=4u32 {
        for k in 0..=5u32 {
            let c = census_skl(n, k, DEFAULT_ENUM_BUDGET).unwrap();
            assert_eq!(binomial(1 << n, k as u64), c.total.into());
        }
    }
}

#[test]
fn complement_graph_uses_remaining_generators() {
    let a = ElemSet::from_elems(4, [1, 2, 3]).unwrap();
    let g = from_generators(4, &a).unwrap();
    let c = g.complement();
    assert_eq!(c.degree(), 12);
    assert!(c.generators().is_disjoint(&a).unwrap());
}

#[test]
fn persisted_records_validate_on_load() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        ns: vec![3, 7],
        trials: 4,
        base_seed: 5,
        clique_budget: UNLIMITED,
        chi_budget: 10_000,
        out_dir: dir.path().to_path_buf(),
        threads: Some(1),
    };
    let out = run_experiment(&cfg, None).unwrap();
    let loaded = load_records(&out.jsonl_path).unwrap();
    assert_eq!(loaded, out.records);
    let csv = std::fs::read_to_string(&out.summary_path).unwrap();
    assert_eq!(csv.lines().count(), 3);

    // a tampered record fails validation
    let text = std::fs::read_to_string(&out.jsonl_path).unwrap();
    let first = text.lines().next().unwrap();
    let mut v: serde_json::Value = serde_json::from_str(first).unwrap();
    v["omega_size"] = serde_json::json!(0);
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, format!("{v}\n")).unwrap();
    assert!(load_records(&bad).is_err());
}
