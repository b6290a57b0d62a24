//! Command-line front end.
//!
//! Subcommands: `features` (vector CSV/JSON export), `cluster` (cluster
//! report), `suggest` (tactic suggestion through an external checker)
//! and `inspect` (term-tree dump of one object).
//!
//! Exit codes: 0 success, 2 input/parse errors (including unknown
//! objects), 3 internal errors, 4 no proof found within the budget,
//! 5 checker infrastructure failure. Log verbosity comes from the
//! `PROOFMINER_LOG` environment variable.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use proofminer::features::density;
use proofminer::premiss_selection::{suggest, CheckerConfig, SuggestError, SuggestionReport};
use proofminer::recurrent_clustering::{dump_model, model_dump, recurrent_cluster, ModelDump};
use proofminer::term_model::{parse_library, resolve_types, Library, TypedLibrary};
use proofminer::term_tree::build_term_tree;

const EXIT_PARSE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;
const EXIT_NO_PROOF: u8 = 4;
const EXIT_CHECKER: u8 = 5;

#[derive(Parser)]
#[command(name = "proofminer", version, about = "Mine term structure from proof libraries")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct CommonOpts {
    /// Library file to process.
    library: PathBuf,
    /// Clustering granularity, 1 (few big clusters) to 5 (many small).
    #[arg(short, long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=5))]
    granularity: u8,
    /// Seed for deterministic clustering.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Standardize the final vectors to zero mean and unit variance per
    /// dimension before the last clustering pass (off by default: raw
    /// values carry the band structure).
    #[arg(long, default_value_t = false)]
    standardize: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Export per-object feature vectors (text format is CSV).
    Features(CommonOpts),
    /// Run recurrent clustering and print the cluster report.
    Cluster(CommonOpts),
    /// Suggest a tactic script for an unproven target.
    Suggest {
        #[command(flatten)]
        common: CommonOpts,
        /// Object to prove.
        #[arg(long)]
        target: String,
        /// Checker command, split on whitespace; spawned once per candidate.
        #[arg(long)]
        checker_cmd: String,
        /// Maximum number of checker calls.
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        budget: u64,
        /// Per-call checker timeout in milliseconds.
        #[arg(long, default_value_t = 10_000)]
        checker_timeout_ms: u64,
    },
    /// Print the term-tree dump of one object.
    Inspect {
        /// Library file to process.
        library: PathBuf,
        /// Object to inspect.
        object: String,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("PROOFMINER_LOG")).init();
    let cli = Cli::parse();
    match cli.command {
        Cmd::Features(opts) => cmd_features(&opts),
        Cmd::Cluster(opts) => cmd_cluster(&opts),
        Cmd::Suggest { common, target, checker_cmd, budget, checker_timeout_ms } => {
            cmd_suggest(&common, &target, &checker_cmd, budget as usize, checker_timeout_ms)
        }
        Cmd::Inspect { library, object } => cmd_inspect(&library, &object),
    }
}

fn load_library(path: &PathBuf) -> Result<(Library, TypedLibrary), ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_PARSE)
    })?;
    let lib = parse_library(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_PARSE)
    })?;
    let typed = resolve_types(&lib).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_PARSE)
    })?;
    Ok((lib, typed))
}

struct Clustered {
    vectors: Vec<Vec<f64>>,
    matrices: Vec<proofminer::FeatureMatrix>,
    dims: (usize, usize),
    dump: ModelDump,
}

fn run_clustering(typed: &TypedLibrary, opts: &CommonOpts) -> Result<Clustered, ExitCode> {
    let internal = |e: String| {
        eprintln!("error: clustering failed: {e}");
        ExitCode::from(EXIT_INTERNAL)
    };
    let out = recurrent_cluster(typed, opts.granularity, opts.seed)
        .map_err(|e| internal(e.to_string()))?;
    let (vectors, dump) = if opts.standardize && !out.vectors.is_empty() {
        let vectors = proofminer::features::standardize(&out.vectors);
        let k = proofminer::kmeans::choose_k(vectors.len(), opts.granularity)
            .map_err(|e| internal(e.to_string()))?;
        let model = proofminer::kmeans::kmeans(&vectors, k, opts.seed)
            .map_err(|e| internal(e.to_string()))?;
        let dump = dump_model(&model, out.dims, typed, opts.granularity, opts.seed);
        (vectors, dump)
    } else {
        let dump = model_dump(&out, typed, opts.granularity, opts.seed);
        (out.vectors, dump)
    };
    Ok(Clustered { vectors, matrices: out.matrices, dims: out.dims, dump })
}

fn cmd_features(opts: &CommonOpts) -> ExitCode {
    let (_, typed) = match load_library(&opts.library) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let out = match run_clustering(&typed, opts) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let dens = density(&out.matrices);
    match opts.format {
        Format::Text => {
            let (depth, width) = out.dims;
            let mut header = vec!["object".to_string()];
            for d in 0..depth {
                for j in 0..width {
                    for comp in ["term", "type", "parent"] {
                        header.push(format!("d{d}_j{j}_{comp}"));
                    }
                }
            }
            println!("{}", header.join(","));
            for (i, v) in out.vectors.iter().enumerate() {
                let mut row = vec![typed.objects[i].name.clone()];
                row.extend(v.iter().map(|x| format_value(*x)));
                println!("{}", row.join(","));
            }
            eprintln!("density: {dens:.4}");
        }
        Format::Json => {
            let doc = serde_json::json!({
                "dims": {"depth": out.dims.0, "width": out.dims.1},
                "density": dens,
                "objects": typed.objects.iter().zip(&out.vectors).map(|(o, v)| {
                    serde_json::json!({"name": o.name, "vector": v})
                }).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
        }
    }
    ExitCode::SUCCESS
}

fn format_value(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

fn cmd_cluster(opts: &CommonOpts) -> ExitCode {
    let (_, typed) = match load_library(&opts.library) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let started = Instant::now();
    let out = match run_clustering(&typed, opts) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let elapsed = started.elapsed();
    let dump = out.dump;
    match opts.format {
        Format::Text => {
            print_cluster_report(&dump, elapsed);
        }
        Format::Json => {
            // deterministic output: the wall-clock time goes to stderr
            println!("{}", serde_json::to_string_pretty(&dump).expect("serializable"));
            eprintln!("clustered in {elapsed:.2?}");
        }
    }
    ExitCode::SUCCESS
}

fn print_cluster_report(dump: &ModelDump, elapsed: Duration) {
    println!(
        "k={} granularity={} seed={} grid={}x{}",
        dump.k, dump.granularity, dump.seed, dump.dims.depth, dump.dims.width
    );
    for cluster in &dump.clusters {
        println!("cluster {}:", cluster.id);
        for m in &cluster.members {
            println!("  {} (proximity {:.4})", m.name, m.proximity);
        }
    }
    println!("clustered in {elapsed:.2?}");
}

fn cmd_suggest(
    common: &CommonOpts,
    target: &str,
    checker_cmd: &str,
    budget: usize,
    checker_timeout_ms: u64,
) -> ExitCode {
    let (lib, typed) = match load_library(&common.library) {
        Ok(v) => v,
        Err(code) => return code,
    };
    if lib.get(target).is_none() {
        eprintln!("error: target `{target}` is not in the library");
        return ExitCode::from(EXIT_PARSE);
    }
    let out = match run_clustering(&typed, common) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let dump = out.dump;

    let command: Vec<String> = checker_cmd.split_whitespace().map(str::to_string).collect();
    if command.is_empty() {
        eprintln!("error: empty --checker-cmd");
        return ExitCode::from(EXIT_PARSE);
    }
    let checker = CheckerConfig {
        command,
        timeout: Duration::from_millis(checker_timeout_ms),
        budget,
    };

    let report = match suggest(target, &lib, &dump, &checker, &common.library) {
        Ok(r) => r,
        Err(e @ SuggestError::CheckerFailure { .. }) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CHECKER);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_PARSE);
        }
    };

    let found = report.accepted.is_some();
    match common.format {
        Format::Text => print_suggestion_report(&report),
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"))
        }
    }
    if found {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NO_PROOF)
    }
}

fn print_suggestion_report(report: &SuggestionReport) {
    println!("target: {}", report.target);
    println!("candidates tried: {}", report.tried);
    match &report.accepted {
        Some(acc) => {
            println!("accepted script from {}:", acc.source_lemma);
            for step in &acc.script.steps {
                let args: Vec<String> =
                    step.args.iter().map(|a| a.value.clone()).collect();
                println!("  {} {}", step.tactic, args.join(" "));
            }
            if acc.substitutions.is_empty() {
                println!("substitutions: none");
            } else {
                println!("substitutions:");
                for s in &acc.substitutions {
                    println!("  {} -> {}", s.original, s.replacement);
                }
            }
        }
        None => println!("no proof found within budget ({} candidates)", report.candidates_ranked.len()),
    }
}

fn cmd_inspect(library: &PathBuf, object: &str) -> ExitCode {
    let (_, typed) = match load_library(library) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let Some(index) = typed.index_of(object) else {
        eprintln!("error: object `{object}` is not in the library");
        return ExitCode::from(EXIT_PARSE);
    };
    let tree = build_term_tree(typed.objects[index].mined());
    print!("{}", tree.debug_dump());
    ExitCode::SUCCESS
}
