//! `factgraph` command line: batch runs over the canonical file formats.
//!
//! Subcommands: `build-index`, `retrieve`, `stats`, `prompt`, `parse`,
//! `eval`. Every flag can also come from a TOML config file given with
//! `--config`; explicit flags win. Payloads go to stdout or the named
//! output files (written atomically via a temp file and rename); timings
//! and diagnostics go to stderr.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use factgraph::dataset::{load_claims, ClaimRecord, Split};
use factgraph::kg::KnowledgeGraph;
use factgraph::metrics::report;
use factgraph::prompt::{build_prompt, chunk_claims, parse_response, LlmAnswer};
use factgraph::retrieval::{batch_retrieve, FallbackPolicy, RetrievalStrategy, SubgraphStats};
use factgraph::serialize::emit_examples;
use factgraph::EmbeddingTable32;

#[derive(Parser)]
#[command(
    name = "factgraph",
    version,
    about = "Knowledge-graph evidence retrieval and evaluation"
)]
struct Cli {
    /// TOML run configuration; explicit flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the graph index from a triple dump and persist it as a cache
    BuildIndex {
        /// Triple dump (TSV: head, relation, tail per line)
        #[arg(long)]
        kg: Option<PathBuf>,
        /// Cache file to write
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Retrieve evidence subgraphs and write serialized example records
    Retrieve(RetrieveArgs),
    /// Print retrieval statistics without writing examples
    Stats(RetrieveArgs),
    /// Write verification prompts, one file per claim chunk
    Prompt {
        /// Claim file (JSON Lines)
        #[arg(long)]
        claims: Option<PathBuf>,
        /// Claims per prompt (defaults to all claims in one prompt)
        #[arg(long)]
        chunk_size: Option<usize>,
        /// Directory for the prompt files
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Comma-separated splits to keep (train,validation,test)
        #[arg(long)]
        split: Option<String>,
    },
    /// Parse a model reply into answer records
    Parse {
        /// File holding the raw reply text
        #[arg(long)]
        answers: PathBuf,
        /// Number of answers the reply must contain
        #[arg(long)]
        expected: usize,
        /// Answer records output (JSON Lines); stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score predictions against gold labels and print the metrics table
    Eval {
        /// Answer records (JSON Lines, as written by `parse`), aligned
        /// with the claim file by record order
        #[arg(long)]
        preds: PathBuf,
        /// Claim file (JSON Lines)
        #[arg(long)]
        claims: Option<PathBuf>,
        /// Comma-separated splits to keep
        #[arg(long)]
        split: Option<String>,
        /// Also write the report as JSON to this path
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RetrieveArgs {
    /// Triple dump (TSV) or index cache built by `build-index`
    #[arg(long)]
    kg: Option<PathBuf>,
    /// Claim file (JSON Lines)
    #[arg(long)]
    claims: Option<PathBuf>,
    /// direct | contextual | single-step
    #[arg(long)]
    strategy: Option<RetrievalStrategy>,
    /// keep-empty | single-step-on-empty
    #[arg(long)]
    fallback: Option<FallbackPolicy>,
    /// Serialized examples output (JSON Lines); `retrieve` only
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated splits to keep (train,validation,test)
    #[arg(long)]
    split: Option<String>,
    /// Embedding table to validate before the run
    #[arg(long)]
    embeddings: Option<PathBuf>,
}

/// Config-file counterpart of the flags; all keys optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    kg: Option<PathBuf>,
    claims: Option<PathBuf>,
    strategy: Option<String>,
    fallback: Option<String>,
    out: Option<PathBuf>,
    out_dir: Option<PathBuf>,
    split: Option<String>,
    chunk_size: Option<usize>,
    embeddings: Option<PathBuf>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(FileConfig::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
            }
        }
    }

    fn strategy(&self) -> Result<Option<RetrievalStrategy>> {
        self.strategy
            .as_deref()
            .map(|s| s.parse().map_err(anyhow::Error::msg))
            .transpose()
    }

    fn fallback(&self) -> Result<Option<FallbackPolicy>> {
        self.fallback
            .as_deref()
            .map(|s| s.parse().map_err(anyhow::Error::msg))
            .transpose()
    }
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let config = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::BuildIndex { kg, out } => build_index(kg, out, &config),
        Command::Retrieve(args) => retrieve(args, &config, true),
        Command::Stats(args) => retrieve(args, &config, false),
        Command::Prompt {
            claims,
            chunk_size,
            out_dir,
            split,
        } => prompt(claims, chunk_size, out_dir, split, &config),
        Command::Parse {
            answers,
            expected,
            out,
        } => parse(&answers, expected, out.as_deref()),
        Command::Eval {
            preds,
            claims,
            split,
            json,
        } => eval(&preds, claims, split, json.as_deref(), &config),
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.with_context(|| format!("missing {flag} (pass the flag or set it in --config)"))
}

/// Write through a temp file in the target directory, then rename.
fn write_atomic<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<&mut File>) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temp file in {}", dir.display()))?;
    {
        let mut writer = BufWriter::new(tmp.as_file_mut());
        write(&mut writer)?;
        writer.flush()?;
    }
    tmp.persist(path)
        .with_context(|| format!("replacing {}", path.display()))?;
    Ok(())
}

fn load_graph(path: &Path) -> Result<KnowledgeGraph> {
    let started = Instant::now();
    let graph = KnowledgeGraph::load_file(path)
        .with_context(|| format!("loading graph {}", path.display()))?;
    eprintln!(
        "loaded graph: {} triples, {} entities in {:.2}s",
        graph.len(),
        graph.entity_count(),
        started.elapsed().as_secs_f64()
    );
    Ok(graph)
}

fn load_claim_file(path: &Path, split: Option<&str>) -> Result<Vec<ClaimRecord>> {
    let file = File::open(path).with_context(|| format!("opening claims {}", path.display()))?;
    let claims = load_claims(BufReader::new(file))
        .with_context(|| format!("parsing claims {}", path.display()))?;
    match split {
        None => Ok(claims),
        Some(spec) => {
            let keep = parse_splits(spec)?;
            Ok(claims
                .into_iter()
                .filter(|c| keep.contains(&c.split))
                .collect())
        }
    }
}

fn parse_splits(spec: &str) -> Result<Vec<Split>> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Split>().map_err(anyhow::Error::new))
        .collect()
}

fn build_index(kg: Option<PathBuf>, out: Option<PathBuf>, config: &FileConfig) -> Result<()> {
    let kg = require(kg.or_else(|| config.kg.clone()), "--kg")?;
    let out = require(out.or_else(|| config.out.clone()), "--out")?;
    let graph = load_graph(&kg)?;
    write_atomic(&out, |w| {
        graph.write_cache(w)?;
        Ok(())
    })?;
    println!("triples: {}", graph.len());
    println!("entities: {}", graph.entity_count());
    Ok(())
}

fn print_stats(stats: &SubgraphStats) {
    println!("total: {}", stats.total);
    println!(
        "non-empty: {} ({:.2}%)",
        stats.nonempty,
        stats.nonempty_fraction * 100.0
    );
    println!("mean size: {:.2}", stats.size_mean);
    println!("max size: {}", stats.size_max);
}

fn retrieve(args: RetrieveArgs, config: &FileConfig, write_examples: bool) -> Result<()> {
    let kg = require(args.kg.or_else(|| config.kg.clone()), "--kg")?;
    let claims_path = require(args.claims.or_else(|| config.claims.clone()), "--claims")?;
    let strategy = require(args.strategy.or(config.strategy()?), "--strategy")?;
    let fallback = require(args.fallback.or(config.fallback()?), "--fallback")?;
    let split = args.split.or_else(|| config.split.clone());

    if let Some(path) = args.embeddings.as_ref().or(config.embeddings.as_ref()) {
        let file =
            File::open(path).with_context(|| format!("opening embeddings {}", path.display()))?;
        let table = EmbeddingTable32::load(BufReader::new(file))
            .with_context(|| format!("parsing embeddings {}", path.display()))?;
        eprintln!(
            "embedding table: {} entries, dim {}",
            table.len(),
            table.dim()
        );
    }

    let graph = load_graph(&kg)?;
    let claims = load_claim_file(&claims_path, split.as_deref())?;

    let started = Instant::now();
    let (subgraphs, stats) = batch_retrieve(&graph, &claims, strategy, fallback)?;
    eprintln!(
        "retrieved {} subgraphs in {:.2}s",
        subgraphs.len(),
        started.elapsed().as_secs_f64()
    );

    if write_examples {
        let out = require(args.out.or_else(|| config.out.clone()), "--out")?;
        let mut written = 0;
        write_atomic(&out, |w| {
            written = emit_examples(&claims, &subgraphs, w)?;
            Ok(())
        })?;
        println!("records written: {written}");
    }
    print_stats(&stats);
    Ok(())
}

fn prompt(
    claims: Option<PathBuf>,
    chunk_size: Option<usize>,
    out_dir: Option<PathBuf>,
    split: Option<String>,
    config: &FileConfig,
) -> Result<()> {
    let claims_path = require(claims.or_else(|| config.claims.clone()), "--claims")?;
    let out_dir = require(out_dir.or_else(|| config.out_dir.clone()), "--out-dir")?;
    let split = split.or_else(|| config.split.clone());
    let claims = load_claim_file(&claims_path, split.as_deref())?;
    let chunk_size = chunk_size
        .or(config.chunk_size)
        .unwrap_or_else(|| claims.len().max(1));

    std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let batches = chunk_claims(&claims, chunk_size)?;
    for (i, batch) in batches.iter().enumerate() {
        let text = build_prompt(batch, None)?;
        let path = out_dir.join(format!("prompt_{:04}.txt", i + 1));
        write_atomic(&path, |w| {
            w.write_all(text.as_bytes())?;
            Ok(())
        })?;
        println!("{}: {} claims", path.display(), batch.len());
    }
    println!("prompts: {}", batches.len());
    Ok(())
}

fn parse(answers: &Path, expected: usize, out: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(answers)
        .with_context(|| format!("reading {}", answers.display()))?;
    let parsed = parse_response(&text, expected)?;
    match out {
        Some(path) => write_atomic(path, |w| {
            write_answers(&parsed, w)?;
            Ok(())
        })?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_answers(&parsed, &mut lock)?;
        }
    }
    eprintln!("parsed {} answers", parsed.len());
    Ok(())
}

fn write_answers<W: Write>(answers: &[LlmAnswer], sink: &mut W) -> Result<()> {
    for answer in answers {
        serde_json::to_writer(&mut *sink, answer)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}

fn eval(
    preds_path: &Path,
    claims: Option<PathBuf>,
    split: Option<String>,
    json: Option<&Path>,
    config: &FileConfig,
) -> Result<()> {
    let claims_path = require(claims.or_else(|| config.claims.clone()), "--claims")?;
    let split = split.or_else(|| config.split.clone());
    let claims = load_claim_file(&claims_path, split.as_deref())?;

    let file = File::open(preds_path)
        .with_context(|| format!("opening predictions {}", preds_path.display()))?;
    let mut preds = Vec::new();
    for (idx, line) in std::io::BufRead::lines(BufReader::new(file)).enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let answer: LlmAnswer = serde_json::from_str(&line)
            .with_context(|| format!("prediction record on line {}", idx + 1))?;
        preds.push(answer.verdict);
    }
    if preds.len() != claims.len() {
        bail!(
            "length mismatch: {} predictions vs {} claims",
            preds.len(),
            claims.len()
        );
    }

    let metrics = report(&preds, &claims)?;
    print!("{}", metrics.render_table());
    if let Some(path) = json {
        write_atomic(path, |w| {
            serde_json::to_writer_pretty(&mut *w, &metrics)?;
            w.write_all(b"\n")?;
            Ok(())
        })?;
    }
    Ok(())
}
