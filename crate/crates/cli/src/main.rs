//! `semspace`: train semantic spaces, query them and measure how well
//! extracted relations are reproduced in their neighborhoods.

mod config;

use std::collections::{BTreeSet, HashSet};
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use semspace::corpus::{Corpus, DEFAULT_MIN_COUNT};
use semspace::relation::{evaluate, parse_semeval, parse_tsv, render_report};
use semspace::store::{read_binary, read_text, write_binary, write_text};
use semspace::{
    lda, lsa, sgns, EmbeddingSpace, EvalOptions, LdaConfig, LsaConfig, ReportFormat, SamplingSpec,
    SgnsConfig, SparseCountMatrix, TokenizerConfig, Vocabulary,
};

#[derive(Parser, Debug)]
#[command(name = "semspace", version, about = "Semantic spaces and relation reproduction metrics")]
#[command(args_override_self = true)]
struct Cli {
    /// key=value file of default flags; explicit flags win
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train LSA vectors (randomized truncated SVD of a term-document matrix)
    TrainLsa {
        #[command(flatten)]
        io: TrainIo,
        #[arg(long, default_value_t = 300)]
        rank: usize,
        #[arg(long, default_value_t = 4)]
        power_iters: usize,
        #[arg(long, default_value_t = 10)]
        oversample: usize,
        /// factorize raw counts instead of TF-IDF weights
        #[arg(long)]
        no_tfidf: bool,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Train LDA topic vectors by collapsed Gibbs sampling
    TrainLda {
        #[command(flatten)]
        io: TrainIo,
        #[arg(long, default_value_t = 300)]
        topics: usize,
        /// document-topic prior [default: 50 / topics]
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0.01)]
        beta: f64,
        #[arg(long, default_value_t = 200)]
        sweeps: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Train skip-gram vectors with negative sampling
    TrainSgns {
        #[command(flatten)]
        io: TrainIo,
        #[arg(long, default_value_t = 300)]
        dim: usize,
        #[arg(long, default_value_t = 5)]
        window: usize,
        #[arg(long, default_value_t = 5)]
        negatives: usize,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        #[arg(long, default_value_t = 0.025)]
        lr_start: f64,
        #[arg(long, default_value_t = 0.0001)]
        lr_end: f64,
        /// frequent-word subsampling threshold (off when absent)
        #[arg(long)]
        subsample: Option<f64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Print the k nearest neighbors of a term, one "token<TAB>score" per line
    Query {
        #[command(flatten)]
        input: VectorInput,
        #[arg(long)]
        term: String,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
    },
    /// Measure relation reproduction in one or more spaces
    Eval {
        /// vector file; repeat to compare spaces side by side
        #[arg(long = "vectors", required = true, value_name = "FILE")]
        vectors: Vec<PathBuf>,
        /// label for the matching --vectors file [default: file stem]
        #[arg(long = "name", value_name = "NAME")]
        names: Vec<String>,
        /// read vector files in the text format
        #[arg(long)]
        text: bool,
        /// load only the terms listed in this file (one per line)
        #[arg(long, value_name = "FILE")]
        filter: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        relations: PathBuf,
        #[arg(long, value_enum, default_value_t = RelationsFormat::Auto)]
        relations_format: RelationsFormat,
        #[arg(long, default_value = "table", value_parser = parse_format)]
        format: ReportFormat,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        /// number of relation heads to sample
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        sample: u64,
        /// query exactly the terms in this file instead of sampling
        #[arg(long, value_name = "FILE", conflicts_with = "sample")]
        terms: Option<PathBuf>,
        /// only terms in this file may be queried (e.g. a noun list)
        #[arg(long, value_name = "FILE")]
        allow: Option<PathBuf>,
        /// count only head-to-tail hits
        #[arg(long)]
        asymmetric: bool,
        /// count relations with out-of-vocabulary terms in N
        #[arg(long)]
        strict_oov: bool,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// write the report here instead of stdout
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Convert between the binary and text vector formats
    Convert {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_name = "FILE")]
        output: PathBuf,
        #[arg(long, value_enum)]
        to: VectorFormat,
        #[arg(long, value_name = "FILE")]
        filter: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct TrainIo {
    /// text file with one document per line, or a directory of .txt files
    #[arg(long, value_name = "PATH")]
    corpus: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MIN_COUNT, value_parser = clap::value_parser!(u64).range(1..))]
    min_count: u64,
    /// write the text format instead of binary
    #[arg(long)]
    text: bool,
}

#[derive(Args, Debug)]
struct VectorInput {
    #[arg(long, value_name = "FILE")]
    vectors: PathBuf,
    /// read the text format instead of binary
    #[arg(long)]
    text: bool,
    /// load only the terms listed in this file (one per line)
    #[arg(long, value_name = "FILE")]
    filter: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RelationsFormat {
    /// `.tsv` files as TSV, anything else as SemEval
    Auto,
    Semeval,
    Tsv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VectorFormat {
    Binary,
    Text,
}

fn parse_format(s: &str) -> std::result::Result<ReportFormat, String> {
    s.parse()
}

/// Problems with the invocation itself rather than the data.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let args: Vec<OsString> = std::env::args_os().collect();
    let args = match config::splice(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {:#}", e);
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = format!("{:#}", e).replace('\n', " ");
            eprintln!("error: {}", line);
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::TrainLsa {
            io,
            rank,
            power_iters,
            oversample,
            no_tfidf,
            seed,
        } => {
            eprintln!("seed: {}", seed);
            let cfg = LsaConfig {
                rank,
                power_iters,
                oversample,
                seed,
                tfidf: !no_tfidf,
            };
            train(&io, |vocab, docs| {
                let m = SparseCountMatrix::build_term_doc(docs, vocab)?;
                Ok(lsa::train_lsa(&m, vocab, &cfg)?)
            })
        }
        Command::TrainLda {
            io,
            topics,
            alpha,
            beta,
            sweeps,
            seed,
        } => {
            eprintln!("seed: {}", seed);
            let cfg = LdaConfig {
                topics,
                alpha,
                beta,
                sweeps,
                seed,
            };
            train(&io, |vocab, docs| Ok(lda::train_lda(docs, vocab, &cfg)?))
        }
        Command::TrainSgns {
            io,
            dim,
            window,
            negatives,
            epochs,
            lr_start,
            lr_end,
            subsample,
            seed,
        } => {
            eprintln!("seed: {}", seed);
            let cfg = SgnsConfig {
                dim,
                window,
                negatives,
                epochs,
                lr_start,
                lr_end,
                seed,
                subsample,
            };
            train(&io, |vocab, docs| Ok(sgns::train_sgns(docs, vocab, &cfg)?))
        }
        Command::Query { input, term, k } => {
            let mut filter = read_term_set(input.filter.as_deref())?;
            if let Some(f) = filter.as_mut() {
                f.insert(term.clone());
            }
            let space = load_space(&input.vectors, input.text, filter.as_ref())?;
            let neighbors = space.top_k(&term, k as usize)?;
            let mut out = String::new();
            for (id, score) in &neighbors.neighbors {
                out.push_str(&format!("{}\t{}\n", space.vocab().token(*id), score));
            }
            io::stdout().write_all(out.as_bytes())?;
            Ok(())
        }
        Command::Eval {
            vectors,
            names,
            text,
            filter,
            relations,
            relations_format,
            format,
            k,
            sample,
            terms,
            allow,
            asymmetric,
            strict_oov,
            seed,
            out,
        } => {
            if names.len() > vectors.len() {
                return Err(Usage(format!("{} --name values for {} --vectors files", names.len(), vectors.len())).into());
            }
            let instances = match relations_format {
                RelationsFormat::Tsv => parse_tsv(&relations)?,
                RelationsFormat::Semeval => parse_semeval(&relations)?,
                RelationsFormat::Auto if relations.extension().is_some_and(|e| e == "tsv") => parse_tsv(&relations)?,
                RelationsFormat::Auto => parse_semeval(&relations)?,
            };
            let sample = match &terms {
                Some(path) => SamplingSpec::Terms(read_lines(path)?),
                None => {
                    eprintln!("seed: {}", seed);
                    SamplingSpec::Random {
                        n: sample as usize,
                        seed,
                    }
                }
            };
            let opts = EvalOptions {
                k: k as usize,
                sample,
                symmetric: !asymmetric,
                strict_oov,
                allow: match &allow {
                    Some(path) => Some(read_lines(path)?.into_iter().collect::<BTreeSet<_>>()),
                    None => None,
                },
            };
            let filter = read_term_set(filter.as_deref())?;

            let mut reports = Vec::with_capacity(vectors.len());
            for (i, path) in vectors.iter().enumerate() {
                let name = names.get(i).cloned().unwrap_or_else(|| stem(path));
                let space = load_space(path, text, filter.as_ref())?;
                let report = evaluate(&space, &name, &instances, &opts)
                    .with_context(|| format!("evaluating {}", path.display()))?;
                reports.push(report);
            }
            let bytes = render_report(&reports, format)?;
            match out {
                Some(path) => write_file_atomically(&path, &bytes),
                None => Ok(io::stdout().write_all(&bytes)?),
            }
        }
        Command::Convert {
            input,
            output,
            to,
            filter,
        } => {
            let filter = read_term_set(filter.as_deref())?;
            let space = load_space(&input, matches!(to, VectorFormat::Binary), filter.as_ref())?;
            match to {
                VectorFormat::Binary => write_binary(&space, &output)?,
                VectorFormat::Text => write_text(&space, &output)?,
            }
            println!("dim={}\tV={}", space.dim(), space.len());
            Ok(())
        }
    }
}

fn train<F>(io: &TrainIo, fit: F) -> Result<()>
where
    F: FnOnce(&Vocabulary, &[semspace::Document]) -> Result<EmbeddingSpace>,
{
    let start = Instant::now();
    let corpus = Corpus::open(&io.corpus)?;
    let (vocab, docs) = corpus.load(&TokenizerConfig::default(), io.min_count)?;
    let space = fit(&vocab, &docs)?;
    if io.text {
        write_text(&space, &io.out)?;
    } else {
        write_binary(&space, &io.out)?;
    }
    println!(
        "dim={}\tV={}\twall={:.3}s",
        space.dim(),
        space.len(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn load_space(path: &Path, text: bool, filter: Option<&HashSet<String>>) -> Result<EmbeddingSpace> {
    if text {
        let space = read_text(path)?;
        Ok(match filter {
            Some(f) => filter_space(space, f)?,
            None => space,
        })
    } else {
        Ok(read_binary(path, filter)?)
    }
}

fn filter_space(space: EmbeddingSpace, keep: &HashSet<String>) -> Result<EmbeddingSpace> {
    let ids: Vec<usize> = (0..space.len())
        .filter(|&i| keep.contains(space.vocab().token(i)))
        .collect();
    let data = ids.iter().flat_map(|&i| space.vector(i).iter().copied()).collect();
    Ok(EmbeddingSpace::new(
        space.vocab().subset(&ids),
        space.dim(),
        data,
        space.provenance().clone(),
    )?)
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect())
}

fn read_term_set(path: Option<&Path>) -> Result<Option<HashSet<String>>> {
    path.map(|p| read_lines(p).map(|v| v.into_iter().collect()))
        .transpose()
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn write_file_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
