//! Concentration-point arithmetic, the density scan, the two optimality
//! sequences, and the seeded Monte Carlo harness.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cayley::{sample_cayley, MAX_GRAPH_DIM, MIN_GRAPH_DIM};
use crate::clique::{chromatic_bracket_with, max_clique_seeded, subspace_cliques};
use crate::error::{Error, Result};
use crate::rng::trial_seed;

/// Distance to an integer below which a fractional part is flagged.
pub const NEAR_TIE: f64 = 1e-9;
pub const MAX_DENSITY_N: u64 = 10_000_000;

/// An integer that may be too large for `u64`, kept as `2^e` then.
/// Serialized as a JSON number, or as the string `"2^e"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "SeqRepr", try_from = "SeqRepr")]
pub enum SeqValue {
    Int(u64),
    Pow2(u64),
}

impl SeqValue {
    fn pow2(e: u64) -> Self {
        if e < 64 {
            SeqValue::Int(1 << e)
        } else {
            SeqValue::Pow2(e)
        }
    }
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum SeqRepr {
    Int(u64),
    Text(String),
}

impl From<SeqValue> for SeqRepr {
    fn from(v: SeqValue) -> Self {
        match v {
            SeqValue::Int(x) => SeqRepr::Int(x),
            SeqValue::Pow2(e) => SeqRepr::Text(format!("2^{e}")),
        }
    }
}

impl TryFrom<SeqRepr> for SeqValue {
    type Error = String;

    fn try_from(r: SeqRepr) -> std::result::Result<Self, String> {
        match r {
            SeqRepr::Int(x) => Ok(SeqValue::Int(x)),
            SeqRepr::Text(t) => t
                .strip_prefix("2^")
                .and_then(|e| e.parse().ok())
                .map(SeqValue::Pow2)
                .ok_or_else(|| format!("expected 2^<exponent>, got {t:?}")),
        }
    }
}

impl std::fmt::Display for SeqValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SeqValue::Int(v) => write!(f, "{v}"),
            SeqValue::Pow2(e) => write!(f, "2^{e}"),
        }
    }
}

/// Position of `n` relative to the concentration point `2^⌊log₂n + log₂log₂n⌋`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NClass {
    pub n: SeqValue,
    pub m_pred: u64,
    pub predicted_omega: SeqValue,
    /// Fractional part of `log₂n + log₂log₂n`.
    pub frac: f64,
    /// Set when `frac` is exactly 0 (`n = 2^{2^t}`).
    pub exact: bool,
    /// `frac` lies within [`NEAR_TIE`] of 0 or 1 without being exact.
    pub near_tie: bool,
}

impl NClass {
    pub fn in_t(&self, eps: f64) -> bool {
        self.frac < 1.0 - eps
    }
}

/// Splits `int_part + log₂(a)` into floor and fractional part, exactly
/// when `a` is a power of two.
fn split_log(int_part: u64, a: u64) -> (u64, f64, bool) {
    if a.is_power_of_two() {
        return (int_part + a.trailing_zeros() as u64, 0.0, true);
    }
    let fl = 63 - a.leading_zeros() as u64;
    let frac = ((a as f64) / (fl as f64).exp2()).log2().clamp(0.0, 1.0 - f64::EPSILON);
    (int_part + fl, frac, false)
}

fn make_class(n: SeqValue, m_pred: u64, frac: f64, exact: bool) -> NClass {
    let near_tie = !exact && (frac < NEAR_TIE || 1.0 - frac < NEAR_TIE);
    NClass { n, m_pred, predicted_omega: SeqValue::pow2(m_pred), frac, exact, near_tie }
}

/// Classifies `n ≥ 2`. `eps` is only validated here; use [`NClass::in_t`].
pub fn classify_n(n: u64, eps: f64) -> Result<NClass> {
    if n < 2 {
        return Err(Error::pre(format!("n = {n} must be at least 2")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::pre(format!("eps = {eps} must lie in (0, 1)")));
    }
    if n.is_power_of_two() {
        let (m, frac, exact) = split_log(n.trailing_zeros() as u64, n.trailing_zeros() as u64);
        return Ok(make_class(SeqValue::Int(n), m, frac, exact));
    }
    let x = (n as f64).log2() + (n as f64).log2().log2();
    let m = x.floor();
    Ok(make_class(SeqValue::Int(n), m as u64, x - m, false))
}

/// Classifies `n = 2^a` for `a ≥ 1`.
pub fn classify_pow2(a: u64) -> Result<NClass> {
    if a == 0 {
        return Err(Error::pre("n = 1 is not allowed"));
    }
    let (m, frac, exact) = split_log(a, a);
    Ok(make_class(SeqValue::pow2(a), m, frac, exact))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub n_max: u64,
    pub eps: f64,
    pub threshold: f64,
    pub count: u64,
    pub total: u64,
    pub fraction: f64,
    /// `n` whose classification was flagged as a near tie.
    pub near_ties: u64,
}

/// Fraction of `n ∈ [2, n_max]` with `frac(n) < 1 − eps/24`.
pub fn density_measure(n_max: u64, eps: f64) -> Result<DensityReport> {
    if !(2..=MAX_DENSITY_N).contains(&n_max) {
        return Err(Error::pre(format!("n_max = {n_max} outside 2..={MAX_DENSITY_N}")));
    }
    let threshold = 1.0 - eps / 24.0;
    let (count, near_ties) = (2..=n_max)
        .into_par_iter()
        .map(|n| {
            let c = classify_n(n, eps)?;
            Ok::<_, Error>(((c.frac < threshold) as u64, c.near_tie as u64))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    let total = n_max - 1;
    Ok(DensityReport { n_max, eps, threshold, count, total, fraction: count as f64 / total as f64, near_ties })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NiTerm {
    pub i: u32,
    pub m_i: u64,
    pub n_i: SeqValue,
}

/// `m_i = ⌊2^i/(1+eps)⌋` and `n_i = 2^{m_i}`, with `eps` taken as the exact
/// binary value of the float.
pub fn seq_ni(eps: f64, i: u32) -> Result<NiTerm> {
    if i == 0 || i > 63 {
        return Err(Error::pre(format!("i = {i} outside 1..=63")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::pre(format!("eps = {eps} must be positive")));
    }
    let e = BigRational::from_f64(eps).expect("finite");
    let q = BigRational::from_integer(BigInt::from(1u64 << i)) / (e + BigRational::from_integer(1.into()));
    let m_i = q.numer().div_floor(q.denom()).to_u64().expect("below 2^63");
    Ok(NiTerm { i, m_i, n_i: SeqValue::pow2(m_i) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NjTerm {
    pub j: u32,
    pub n_j: SeqValue,
    pub class: NClass,
    /// `log₂(1 + 2/x)` with `x = 2^j − 1`, an upper bound for the gap
    /// `1 − frac = log₂(1 + 1/x)`.
    pub delta: f64,
    pub near_one: bool,
}

/// `n_j = 2^{2^j − 1}`.
pub fn seq_nj(j: u32) -> Result<NjTerm> {
    if j == 0 || j > 63 {
        return Err(Error::pre(format!("j = {j} outside 1..=63")));
    }
    let a = (1u64 << j) - 1;
    let class = classify_pow2(a)?;
    let x = a as f64;
    let delta = (2.0 / x).ln_1p() / std::f64::consts::LN_2;
    let near_one = class.frac > 1.0 - delta;
    Ok(NjTerm { j, n_j: SeqValue::pow2(a), class, delta, near_one })
}

/// Outcome of one seeded graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialRecord {
    pub n: u32,
    pub seed: u64,
    pub a_size: u64,
    pub omega_size: u64,
    pub omega_optimal: bool,
    pub max_subspace_dim: u32,
    /// `m_counts[m] = M_m`.
    pub m_counts: Vec<u64>,
    pub m_counts_exact: bool,
    pub chi_lower: u64,
    pub chi_upper: u64,
    pub chi_exact: Option<u64>,
    pub predicted_omega: u64,
    pub nodes: u64,
    pub elapsed_ms: u64,
}

impl TrialRecord {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("record n={} seed={}: {msg}", self.n, self.seed)));
        if self.omega_size < 1u64 << self.max_subspace_dim {
            return bad("omega_size below 2^max_subspace_dim");
        }
        if self.m_counts.len() != self.max_subspace_dim as usize + 1 || self.m_counts.contains(&0) {
            return bad("m_counts inconsistent with max_subspace_dim");
        }
        if self.chi_lower > self.chi_upper {
            return bad("chi_lower exceeds chi_upper");
        }
        if let Some(x) = self.chi_exact {
            if x < self.chi_lower || x > self.chi_upper {
                return bad("chi_exact outside bracket");
            }
        }
        if self.omega_size > self.chi_upper {
            return bad("omega_size exceeds chi_upper");
        }
        Ok(())
    }
}

/// Samples the graph for `(n, seed)` and measures it. Deterministic apart
/// from `elapsed_ms`.
pub fn run_trial(n: u32, seed: u64, clique_budget: u64, chi_budget: u64) -> Result<TrialRecord> {
    let start = Instant::now();
    let g = sample_cayley(n, seed)?;
    let sub = subspace_cliques(&g);
    let incumbent: Vec<u32> = sub.largest.members_iter().collect();
    let omega = max_clique_seeded(&g, clique_budget, &incumbent);
    let chi = chromatic_bracket_with(&g, chi_budget, &omega);
    let class = classify_n(n as u64, 0.5)?;
    let record = TrialRecord {
        n,
        seed,
        a_size: g.degree() as u64,
        omega_size: omega.size,
        omega_optimal: omega.optimal,
        max_subspace_dim: sub.max_dim,
        m_counts: sub.counts,
        m_counts_exact: !sub.truncated,
        chi_lower: chi.lower,
        chi_upper: chi.upper,
        chi_exact: chi.exact,
        predicted_omega: match class.predicted_omega {
            SeqValue::Int(v) => v,
            SeqValue::Pow2(_) => unreachable!("n ≤ 13"),
        },
        nodes: omega.nodes_explored + chi.nodes,
        elapsed_ms: start.elapsed().as_millis() as u64,
    };
    record.validate()?;
    Ok(record)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ns: Vec<u32>,
    pub trials: u64,
    pub base_seed: u64,
    pub clique_budget: u64,
    pub chi_budget: u64,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(&n) = self.ns.iter().find(|&&n| !(MIN_GRAPH_DIM..=MAX_GRAPH_DIM).contains(&n)) {
            return Err(Error::Config(format!("n = {n} outside {MIN_GRAPH_DIM}..={MAX_GRAPH_DIM}")));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        Ok(())
    }
}

/// Per-`n` aggregate written to `summary.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: u32,
    pub trials: u64,
    pub predicted_omega: u64,
    /// omega_size ↦ number of trials.
    pub omega_dist: BTreeMap<u64, u64>,
    /// max_subspace_dim ↦ number of trials.
    pub max_dim_dist: BTreeMap<u32, u64>,
    pub match_rate: f64,
    pub optimal_rate: f64,
    pub mean_chi_lower: f64,
    pub mean_chi_upper: f64,
}

impl SummaryRow {
    pub const CSV_HEADER: &'static str =
        "n,trials,predicted_omega,omega_dist,max_dim_dist,match_rate,optimal_rate,mean_chi_lower,mean_chi_upper";

    pub fn csv_row(&self) -> String {
        let dist = |m: Vec<String>| m.join(";");
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n,
            self.trials,
            self.predicted_omega,
            dist(self.omega_dist.iter().map(|(k, v)| format!("{k}:{v}")).collect()),
            dist(self.max_dim_dist.iter().map(|(k, v)| format!("{k}:{v}")).collect()),
            self.match_rate,
            self.optimal_rate,
            self.mean_chi_lower,
            self.mean_chi_upper
        )
    }
}

pub fn summarize(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut by_n: BTreeMap<u32, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        by_n.entry(r.n).or_default().push(r);
    }
    by_n.into_iter()
        .map(|(n, rs)| {
            let t = rs.len() as f64;
            let mut omega_dist = BTreeMap::new();
            let mut max_dim_dist = BTreeMap::new();
            for r in &rs {
                *omega_dist.entry(r.omega_size).or_insert(0) += 1;
                *max_dim_dist.entry(r.max_subspace_dim).or_insert(0) += 1;
            }
            let count = |f: &dyn Fn(&TrialRecord) -> bool| rs.iter().filter(|r| f(r)).count() as f64;
            SummaryRow {
                n,
                trials: rs.len() as u64,
                predicted_omega: rs[0].predicted_omega,
                omega_dist,
                max_dim_dist,
                match_rate: count(&|r| r.omega_size == r.predicted_omega) / t,
                optimal_rate: count(&|r| r.omega_optimal) / t,
                mean_chi_lower: rs.iter().map(|r| r.chi_lower as f64).sum::<f64>() / t,
                mean_chi_upper: rs.iter().map(|r| r.chi_upper as f64).sum::<f64>() / t,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
    pub jsonl_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Seeds for every trial in config order: `(n, trial_seed(base, index))`
/// with a run-wide index. Fails if two seeds coincide.
pub fn trial_plan(cfg: &ExperimentConfig) -> Result<Vec<(u32, u64)>> {
    let mut plan = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for &n in &cfg.ns {
        for _ in 0..cfg.trials {
            let seed = trial_seed(cfg.base_seed, plan.len() as u64);
            if !seen.insert(seed) {
                return Err(Error::Config(format!("seed collision at trial {}", plan.len())));
            }
            plan.push((n, seed));
        }
    }
    Ok(plan)
}

/// Runs every trial of `cfg` and writes `trials.jsonl` and `summary.csv`
/// into `cfg.out_dir`, records in trial order. `threads` overrides the
/// config's worker count.
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let plan = trial_plan(cfg)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let jsonl_path = cfg.out_dir.join("trials.jsonl");
    let summary_path = cfg.out_dir.join("summary.csv");

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads.or(cfg.threads) {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    let records: Vec<TrialRecord> = pool.install(|| {
        plan.par_iter().map(|&(n, seed)| run_trial(n, seed, cfg.clique_budget, cfg.chi_budget)).collect::<Result<_>>()
    })?;

    let mut out = BufWriter::new(fs::File::create(&jsonl_path)?);
    for r in &records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;

    let summary = summarize(&records);
    let mut text = String::from(SummaryRow::CSV_HEADER);
    text.push('\n');
    for row in &summary {
        text.push_str(&row.csv_row());
        text.push('\n');
    }
    fs::write(&summary_path, text)?;
    Ok(ExperimentOutcome { records, summary, jsonl_path, summary_path })
}

/// Reads a JSONL file of trial records, validating each one.
pub fn load_records(path: &Path) -> Result<Vec<TrialRecord>> {
    let file = fs::File::open(path)?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: TrialRecord = serde_json::from_str(&line)?;
        r.validate()?;
        out.push(r);
    }
    Ok(out)
}
