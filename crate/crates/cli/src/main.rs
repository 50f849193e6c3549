use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tokenscore::analysis::{
    default_alpha_grid, grid_search_alpha, grid_search_percentile, pearson, spearman,
};
use tokenscore::coding::verify_bounds;
use tokenscore::metrics::evaluate;
use tokenscore::tokenizers::{train_bpe, train_lzw, TokenizerModel};
use tokenscore::{
    Distribution, Error, IngestOptions, Metric, MetricParams, Observations, Temperature,
    TokenizedCorpus,
};

#[derive(Parser, Debug)]
#[command(
    name = "tokenscore",
    version,
    about = "Information-theoretic evaluation of tokenizations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score tokenized text files (one text per line, tokens separated by spaces)
    Score {
        #[arg(short, long = "input", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(short, long, default_value_t = Metric::default())]
        metric: Metric,
        /// Metric parameters: power, perc_start, perc_end, base
        #[arg(short, long = "extra", value_name = "KEY=VALUE", num_args = 1..)]
        extras: Vec<String>,
    },
    /// Train a BPE model with temperature-annealed merge selection
    TrainBpe {
        #[arg(long = "input", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        vocab_size: usize,
        /// A non-zero number, greedy or antigreedy
        #[arg(long, default_value = "greedy", allow_negative_numbers = true)]
        temperature: Temperature,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        model_out: PathBuf,
    },
    /// Train an LZW dictionary
    TrainLzw {
        #[arg(long = "input", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        vocab_size: usize,
        #[arg(long)]
        model_out: PathBuf,
    },
    /// Tokenize raw text with a trained model, or restore tokenized text
    Apply {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        detokenize: bool,
    },
    /// Build Huffman and Campbell codes and check the coding bounds
    VerifyBounds {
        #[arg(short, long = "input", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 2.5)]
        alpha: f64,
        #[arg(long, default_value_t = 2)]
        base: u32,
    },
    /// Correlate predictor columns with performance
    Correlate {
        #[arg(long)]
        table: PathBuf,
        /// Predictor columns; all of them when omitted
        #[arg(long = "predictor", num_args = 1..)]
        predictors: Vec<String>,
    },
    /// Search the Rényi order or the percentile interval that best predicts performance
    GridSearch {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, value_enum)]
        grid: Grid,
        /// Directory holding each run's tokenized text as <run>.*
        #[arg(long)]
        corpus_dir: PathBuf,
        /// Select on even rows and report on odd rows
        #[arg(long)]
        holdout: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Grid {
    Alpha,
    Percentile,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{}:{line}: {source}", path.display())]
    AtLine {
        path: PathBuf,
        line: usize,
        source: Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },
    #[error("coding bounds violated")]
    BoundViolation,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        let core = match self {
            CliError::Core(e) | CliError::AtLine { source: e, .. } => e,
            CliError::Write { .. } => return 1,
            CliError::BoundViolation => return 3,
        };
        match core {
            Error::InvalidArgument(_) => 2,
            _ => 1,
        }
    }
}

type Result<T, E = CliError> = std::result::Result<T, E>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Score {
            inputs,
            metric,
            extras,
        } => score(&inputs, metric, &extras),
        Command::TrainBpe {
            inputs,
            vocab_size,
            temperature,
            seed,
            model_out,
        } => {
            let texts = read_lines(&inputs)?;
            let model = train_bpe(&texts, vocab_size, temperature, seed)?;
            write_file(&model_out, &model.serialize())?;
            println!("{}", model.vocabulary(&texts).len());
            Ok(())
        }
        Command::TrainLzw {
            inputs,
            vocab_size,
            model_out,
        } => {
            let texts = read_lines(&inputs)?;
            let model = train_lzw(&texts, vocab_size)?;
            write_file(&model_out, &model.serialize())?;
            println!("{}", model.len());
            Ok(())
        }
        Command::Apply {
            model,
            input,
            output,
            detokenize,
        } => apply(&model, &input, &output, detokenize),
        Command::VerifyBounds {
            inputs,
            alpha,
            base,
        } => {
            let corpus = TokenizedCorpus::load(&inputs, &IngestOptions::default())?;
            let report = verify_bounds(&corpus, alpha, base)?;
            print!("{}", report.to_kv());
            if report.all_pass() {
                Ok(())
            } else {
                Err(CliError::BoundViolation)
            }
        }
        Command::Correlate { table, predictors } => correlate(&table, &predictors),
        Command::GridSearch {
            table,
            grid,
            corpus_dir,
            holdout,
            output,
        } => grid_search(&table, grid, &corpus_dir, holdout, output.as_deref()),
    }
}

fn score(inputs: &[PathBuf], metric: Metric, extras: &[String]) -> Result<()> {
    let mut params = MetricParams::<f64>::default();
    for extra in extras {
        params.apply_extra(extra)?;
    }
    let corpus = TokenizedCorpus::load(inputs, &IngestOptions::default())?;
    let value = evaluate(&corpus, metric, &params)?;
    println!("{:?}", value.value);
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        CliError::Core(Error::Io {
            path: path.to_owned(),
            source: e,
        })
    })
}

/// Non-empty lines of every file, in argument order.
fn read_lines(paths: &[PathBuf]) -> Result<Vec<String>> {
    let mut lines = Vec::new();
    for path in paths {
        let text = read_text(path)?;
        lines.extend(
            text.lines()
                .filter(|l| !l.trim().is_empty())
                .map(str::to_owned),
        );
    }
    Ok(lines)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_owned(),
        source,
    })
}

fn apply(model: &Path, input: &Path, output: &Path, detokenize: bool) -> Result<()> {
    let model = TokenizerModel::parse(&read_text(model)?)?;
    let text = read_text(input)?;
    let mut out = String::with_capacity(text.len() * 2);
    for (i, line) in text.lines().enumerate() {
        let at_line = |source| CliError::AtLine {
            path: input.to_owned(),
            line: i + 1,
            source,
        };
        let converted = if detokenize {
            model.restore_line(line).map_err(at_line)?
        } else {
            let rendered = model.render_line(line).map_err(at_line)?;
            if model.restore_line(&rendered).map_err(at_line)? != line {
                return Err(at_line(Error::RoundTrip(
                    "the rendered line does not restore to the input; \
                     BPE needs single-space-separated words"
                        .into(),
                )));
            }
            rendered
        };
        out.push_str(&converted);
        out.push('\n');
    }
    write_file(output, &out)
}

fn correlate(table: &Path, predictors: &[String]) -> Result<()> {
    let table = Observations::load(table)?;
    let names: Vec<String> = if predictors.is_empty() {
        table.predictor_names().to_vec()
    } else {
        predictors.to_vec()
    };
    let perf = table.performance();
    let mut out = String::from("predictor\tmethod\tcoefficient\tp_value\tr_squared\tn\n");
    for name in &names {
        let xs = table.column(name)?;
        for (method, result) in [
            ("pearson", pearson(xs, perf)?),
            ("spearman", spearman(xs, perf)?),
        ] {
            out.push_str(&format!(
                "{name}\t{method}\t{:?}\t{:?}\t{:?}\t{}\n",
                result.coefficient, result.p_value, result.r_squared, result.n
            ));
        }
    }
    print!("{out}");
    Ok(())
}

/// Files in `dir` whose name up to the first dot is `run`, sorted.
fn run_files(dir: &Path, run: &str) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::Io {
        path: dir.to_owned(),
        source: e,
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|e| Error::Io {
                path: dir.to_owned(),
                source: e,
            })?
            .path();
        let stem = path
            .file_name()
            .and_then(|n| n.to_str())
            .map(|n| n.split('.').next().unwrap_or(n));
        if stem == Some(run) && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(
            Error::EmptyInput(format!("no corpus for run {run:?} in {}", dir.display())).into(),
        );
    }
    Ok(files)
}

fn grid_search(
    table: &Path,
    grid: Grid,
    corpus_dir: &Path,
    holdout: bool,
    output: Option<&Path>,
) -> Result<()> {
    let table = Observations::load(table)?;
    let dists = table
        .runs()
        .iter()
        .map(|run| {
            let corpus =
                TokenizedCorpus::load(&run_files(corpus_dir, run)?, &IngestOptions::default())?;
            Ok(Distribution::from_corpus(&corpus))
        })
        .collect::<Result<Vec<_>>>()?;
    let perf = table.performance();
    let (plot, summary) = match grid {
        Grid::Alpha => {
            let s = grid_search_alpha(&dists, perf, &default_alpha_grid(), holdout)?;
            let summary = format!(
                "best_alpha\t{}\tpearson\t{:?}",
                s.best_alpha, s.best.coefficient
            );
            (
                s.plot_table(),
                with_holdout(summary, s.holdout.map(|h| h.coefficient)),
            )
        }
        Grid::Percentile => {
            let s = grid_search_percentile(&dists, perf, holdout)?;
            let summary = format!(
                "best_interval\t{}\t{}\tpearson\t{:?}",
                s.best_start, s.best_end, s.best.coefficient
            );
            (
                s.plot_table(),
                with_holdout(summary, s.holdout.map(|h| h.coefficient)),
            )
        }
    };
    eprintln!("{summary}");
    match output {
        Some(path) => write_file(path, &plot.export()),
        None => io::stdout()
            .write_all(plot.export().as_bytes())
            .map_err(|source| CliError::Write {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn with_holdout(summary: String, held: Option<f64>) -> String {
    match held {
        Some(r) => format!("{summary}\theldout_pearson\t{r:?}"),
        None => summary,
    }
}
