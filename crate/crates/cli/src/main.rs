use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use f2cayley::cayley::{sample_cayley, CayleyGraph};
use f2cayley::clique::{chromatic_bracket, independence_number, max_clique};
use f2cayley::experiments::{self, ExperimentConfig, SummaryRow};
use f2cayley::freiman::{self, census_skl, tail_exponent};
use f2cayley::gf2::{ElemSet, DEFAULT_ENUM_BUDGET};
use f2cayley::moments::{moment_report, MomentReport};
use f2cayley::{Error, Result};

#[derive(Parser)]
#[command(name = "f2cayley", version, about = "Sumsets, Freiman dimension and random Cayley sum graphs over GF(2)^n")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct GraphSource {
    #[arg(long, requires = "seed", conflicts_with = "input")]
    n: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Graph file written by `sample --out`.
    #[arg(long = "in", value_name = "FILE")]
    input: Option<PathBuf>,
}

impl GraphSource {
    fn load(&self) -> Result<CayleyGraph> {
        match (&self.input, self.n, self.seed) {
            (Some(path), _, _) => CayleyGraph::from_text(&fs::read_to_string(path)?),
            (None, Some(n), Some(seed)) => sample_cayley(n, seed),
            _ => Err(Error::Precondition("give either --n and --seed, or --in".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random Cayley sum graph.
    Sample {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        seed: u64,
        /// Write the graph file here instead of printing a summary.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Clique number (or independence number with --independent).
    Omega {
        #[command(flatten)]
        graph: GraphSource,
        /// Search-tree node budget.
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
        #[arg(long)]
        independent: bool,
    },
    /// Bounds on the chromatic number, exact for n ≤ 5.
    Chi {
        #[command(flatten)]
        graph: GraphSource,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
    },
    /// Exact moments of the subspace-clique count.
    Moments {
        #[arg(long)]
        n: u32,
        /// Single dimension; all 0..=min(n, 20) when omitted.
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        csv: bool,
    },
    /// Census of k-subsets by restricted doubling.
    Skl {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = DEFAULT_ENUM_BUDGET)]
        budget: u64,
        #[arg(long)]
        csv: bool,
    },
    /// Freiman dimension of a set given as hex elements.
    FreimanDim {
        /// Elements, comma or space separated, e.g. "0,1,2,4".
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        set: Vec<String>,
        /// Ambient dimension; the smallest fitting one by default.
        #[arg(long)]
        n: Option<u32>,
    },
    /// Position of n relative to the concentration point.
    Classify {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
    },
    /// Fraction of n ≤ nmax with fractional part below 1 − eps/24.
    Density {
        #[arg(long)]
        nmax: u64,
        #[arg(long)]
        eps: f64,
    },
    /// Base-2 exponent of the large-doubling tail bound.
    Bounds {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u128,
        #[arg(long)]
        l: u128,
    },
    /// Run a seeded batch of trials from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

fn parse_elements(raw: &[String]) -> Result<Vec<u32>> {
    raw.iter()
        .flat_map(|s| s.split_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            let digits = s.trim_start_matches("0x").trim_start_matches("0X");
            u32::from_str_radix(digits, 16).map_err(|e| Error::Parse(format!("element {s:?}: {e}")))
        })
        .collect()
}

fn csv_cell(v: &Value) -> String {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        Value::Array(items) => items.iter().map(csv_cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    };
    if text.contains(',') || text.contains('"') {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text
    }
}

/// Header plus one row per object, columns in field order.
fn to_csv(rows: &[Value]) -> String {
    let Some(Value::Object(first)) = rows.first() else {
        return String::new();
    };
    let mut out = first.keys().cloned().collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in rows {
        if let Value::Object(map) = row {
            out.push_str(&map.values().map(csv_cell).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
    }
    out
}

fn emit(format: Format, value: Value) -> String {
    match format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&value).expect("serializable")),
        Format::Csv => match value {
            Value::Array(rows) => to_csv(&rows),
            single => to_csv(&[single]),
        },
    }
}

fn run(cli: Cli) -> Result<String> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Precondition("--threads must be positive".into()));
        }
        // ignore a second initialisation; the pool is process wide
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let fmt = cli.format;
    let out = match cli.command {
        Command::Sample { n, seed, out } => {
            let g = sample_cayley(n, seed)?;
            if let Some(path) = out {
                fs::write(&path, g.to_text())?;
            }
            emit(fmt, json!({"n": n, "seed": seed, "a_size": g.degree(), "generators": g.generators().to_hex()}))
        }
        Command::Omega { graph, budget, independent } => {
            let g = graph.load()?;
            let outcome = if independent { independence_number(&g, budget) } else { max_clique(&g, budget) };
            let mut v = serde_json::to_value(outcome)?;
            v["n"] = json!(g.n());
            v["seed"] = json!(g.seed());
            emit(fmt, v)
        }
        Command::Chi { graph, budget } => {
            let g = graph.load()?;
            let mut v = serde_json::to_value(chromatic_bracket(&g, budget))?;
            v["n"] = json!(g.n());
            v["seed"] = json!(g.seed());
            emit(fmt, v)
        }
        Command::Moments { n, m, csv } => {
            let ms: Vec<u32> = match m {
                Some(m) => vec![m],
                None => (0..=n.min(f2cayley::moments::MAX_MOMENT_M)).collect(),
            };
            let reports = ms.into_iter().map(|m| moment_report(n, m)).collect::<Result<Vec<_>>>()?;
            if csv || fmt == Format::Csv {
                let mut s = format!("{}\n", MomentReport::CSV_HEADER);
                for r in &reports {
                    s.push_str(&r.csv_row());
                    s.push('\n');
                }
                s
            } else {
                emit(fmt, serde_json::to_value(reports)?)
            }
        }
        Command::Skl { n, k, budget, csv } => {
            let census = census_skl(n, k, budget)?;
            if csv || fmt == Format::Csv {
                census.to_csv()
            } else {
                emit(fmt, serde_json::to_value(census)?)
            }
        }
        Command::FreimanDim { set, n } => {
            let elems = parse_elements(&set)?;
            let n = n.unwrap_or_else(|| {
                let top = elems.iter().fold(0u32, |a, &b| a | b);
                (32 - top.leading_zeros()).max(1)
            });
            let x = ElemSet::from_elems(n, elems)?;
            let r = freiman::freiman_dimension(&x)?;
            let mut v = serde_json::to_value(r)?;
            v["n"] = json!(n);
            v["k"] = json!(x.len());
            emit(fmt, v)
        }
        Command::Classify { n, eps } => {
            let c = experiments::classify_n(n, eps)?;
            let in_t = c.in_t(eps);
            let mut v = serde_json::to_value(c)?;
            v["eps"] = json!(eps);
            v["in_t"] = json!(in_t);
            emit(fmt, v)
        }
        Command::Density { nmax, eps } => emit(fmt, serde_json::to_value(experiments::density_measure(nmax, eps)?)?),
        Command::Bounds { n, k, l } => {
            let t = tail_exponent(n, k, l)?;
            let mut v = serde_json::to_value(t)?;
            v["n"] = json!(n);
            v["k"] = json!(k.to_string());
            v["l"] = json!(l.to_string());
            emit(fmt, v)
        }
        Command::Experiment { config } => {
            let text = fs::read_to_string(&config)?;
            let cfg = ExperimentConfig::from_json(&text)?;
            let outcome = experiments::run_experiment(&cfg, cli.threads)?;
            if fmt == Format::Csv {
                let mut s = format!("{}\n", SummaryRow::CSV_HEADER);
                for row in &outcome.summary {
                    s.push_str(&row.csv_row());
                    s.push('\n');
                }
                s
            } else {
                emit(
                    fmt,
                    json!({
                        "records": outcome.records.len(),
                        "jsonl": outcome.jsonl_path,
                        "summary_csv": outcome.summary_path,
                        "summary": outcome.summary,
                    }),
                )
            }
        }
    };
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
