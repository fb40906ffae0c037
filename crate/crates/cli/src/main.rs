use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

use funql_core::config::{RunConfig, CONFIG_ENV};
use funql_core::decode::Linker;
use funql_core::learn::{
    beam_sweep, evaluate, load_corpus, load_supervised, load_weak, sweep_table, synth_distant, train_supervised,
    train_weak, weak_to_jsonl, Dataset, Metric, Pipeline,
};
use funql_core::model::{build_token_vocab, build_word_vocab, ParserModel};
use funql_core::semantics::{print_funql, KnowledgeBase};
use funql_core::Error;

#[derive(Parser)]
#[command(name = "funql", version, about = "Neural transition-based semantic parser for FunQL queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Knowledge-base utilities.
    Kb {
        #[command(subcommand)]
        command: KbCommand,
    },
    /// Train a parser from logical forms (full) or from answers (weak).
    Train(TrainArgs),
    /// Turn an entity-annotated corpus into blanked question/answer pairs.
    SynthDistant {
        /// Corpus JSON-lines: {"tokens": [...], "mentions": [{"span": [i, j], "entity": id}]}.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        kb: PathBuf,
        /// Output weak dataset (JSON-lines).
        #[arg(long)]
        out: PathBuf,
    },
    /// Read utterances from stdin and print candidate logical forms as JSON-lines.
    Parse {
        #[arg(long)]
        ckpt: PathBuf,
        /// Beam width (defaults to the checkpoint's test_beam).
        #[arg(long)]
        beam: Option<usize>,
    },
    /// Answer questions given as arguments, or one per stdin line.
    Answer {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        beam: Option<usize>,
        /// Question text; read from stdin when omitted.
        question: Vec<String>,
    },
    /// Score a checkpoint on a dataset.
    Eval {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "f1")]
        metric: MetricArg,
        #[arg(long)]
        beam: Option<usize>,
        /// Comma-separated widths; prints a width/answerable/correct table.
        #[arg(long, value_delimiter = ',')]
        beam_sweep: Option<Vec<usize>>,
    },
    /// Interactive question answering.
    Repl {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        beam: Option<usize>,
    },
}

#[derive(Subcommand)]
enum KbCommand {
    /// Check a TSV knowledge base and print its size.
    Validate { kb: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Regime {
    Full,
    Weak,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Em,
    F1,
}

#[derive(clap::Args)]
struct TrainArgs {
    #[arg(long, value_enum)]
    regime: Regime,
    /// Flat `key = value` configuration file.
    #[arg(long, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Training data (JSON-lines).
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    kb: PathBuf,
    /// Checkpoint directory to write.
    #[arg(long)]
    out: PathBuf,
    /// Development set for checkpoint selection (full regime).
    #[arg(long)]
    dev: Option<PathBuf>,
    /// Entity linking dictionary (phrase<TAB>entity).
    #[arg(long)]
    linker: Option<PathBuf>,
    /// Synthesized weak examples mixed into weak training.
    #[arg(long)]
    distant: Option<PathBuf>,
    /// Transition system: td (top-down) or bu (bottom-up).
    #[arg(long)]
    mode: Option<String>,
    /// Attention: soft, structured, hard or binomial.
    #[arg(long)]
    attention: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Configuration override `key=value`; repeatable, applied after the file
    /// and the flags above.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

enum Failure {
    Data(Error),
    /// Subcommand name and message.
    Usage(&'static str, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Kb {
            command: KbCommand::Validate { kb },
        } => validate(&kb),
        Command::Train(args) => train(args),
        Command::SynthDistant { corpus, kb, out } => synth(&corpus, &kb, &out),
        Command::Parse { ckpt, beam } => parse(&ckpt, beam),
        Command::Answer { ckpt, beam, question } => answer(&ckpt, beam, &question),
        Command::Eval {
            ckpt,
            data,
            metric,
            beam,
            beam_sweep,
        } => eval(&ckpt, &data, metric, beam, beam_sweep),
        Command::Repl { ckpt, beam } => repl(&ckpt, beam),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(sub, m)) => {
            let mut cmd = Cli::command();
            let cmd = cmd.find_subcommand_mut(sub).expect("known subcommand");
            let _ = cmd.error(ErrorKind::InvalidValue, m).print();
            eprintln!("\n{}", cmd.render_long_help());
            ExitCode::from(2)
        }
    }
}

fn load_kb(path: &Path) -> Result<KnowledgeBase, Failure> {
    KnowledgeBase::load(path).map_err(|e| Failure::Data(Error::Invalid(format!("{}: {e}", path.display()))))
}

fn validate(path: &Path) -> Outcome {
    let kb = load_kb(path)?;
    println!(
        "ok: {} entities, {} relations ({} numeric), {} triples",
        kb.entities().len(),
        kb.relations().len(),
        kb.numeric_relations().len(),
        kb.triples().len()
    );
    Ok(())
}

fn run_config(args: &TrainArgs) -> Result<RunConfig, Failure> {
    let mut config = match &args.config {
        Some(p) => RunConfig::load(p).map_err(|e| Failure::Data(e.into()))?,
        None => RunConfig::default(),
    };
    let flags = [
        ("mode", args.mode.clone()),
        ("attention", args.attention.clone()),
        ("seed", args.seed.map(|s| s.to_string())),
        ("epochs", args.epochs.map(|e| e.to_string())),
    ];
    let overrides: Vec<String> = flags
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| format!("{k}={v}")))
        .chain(args.overrides.iter().cloned())
        .collect();
    config
        .apply_overrides(&overrides)
        .map_err(|e| Failure::Usage("train", e.to_string()))?;
    Ok(config)
}

fn train(args: TrainArgs) -> Outcome {
    let config = run_config(&args)?;
    let kb = load_kb(&args.kb)?;
    let linker = args.linker.as_deref().map(Linker::load).transpose()?;
    let system = match args.regime {
        Regime::Full => {
            let train = load_supervised(&args.data, Some(&kb))?;
            let dev = args.dev.as_deref().map(|p| load_supervised(p, Some(&kb))).transpose()?.unwrap_or_default();
            let words = build_word_vocab(train.iter().chain(&dev).map(|e| e.words.as_slice()));
            let lfs: Vec<_> = train.iter().map(|e| e.lf.clone()).collect();
            let mut model = ParserModel::new(config, words, build_token_vocab(&kb, &lfs));
            load_vectors(&mut model)?;
            let report = train_supervised(&mut model, &kb, linker.as_ref(), &train, &dev, &mut |s| {
                eprintln!(
                    "epoch {} loss {:.4} train_em {:.4}{} lr {}",
                    s.epoch,
                    s.loss,
                    s.train_accuracy,
                    s.dev_accuracy.map(|d| format!(" dev_em {d:.4}")).unwrap_or_default(),
                    s.lr
                );
            })?;
            eprintln!("trained {} epochs", report.epochs.len());
            Pipeline {
                linker,
                ..Pipeline::new(model, kb)
            }
        }
        Regime::Weak => {
            let train = load_weak(&args.data, Some(&kb))?;
            let distant = args.distant.as_deref().map(|p| load_weak(p, Some(&kb))).transpose()?.unwrap_or_default();
            let words = build_word_vocab(train.iter().chain(&distant).map(|e| e.words.as_slice()));
            let mut model = ParserModel::new(config, words, build_token_vocab(&kb, []));
            load_vectors(&mut model)?;
            let mut system = Pipeline {
                linker,
                ..Pipeline::new(model, kb)
            };
            let report = train_weak(&mut system, &train, &distant, &mut |s| {
                eprintln!(
                    "epoch {} accuracy {:.4} updated {}/{} parser_nll {:.4} ranker_nll {:.4}",
                    s.epoch, s.accuracy, s.updated, s.examples, s.parser_loss, s.ranker_loss
                );
            })?;
            eprintln!("trained {} epochs", report.epochs.len());
            system
        }
    };
    system.save(&args.out)?;
    println!("saved {}", args.out.display());
    Ok(())
}

fn load_vectors(model: &mut ParserModel) -> Outcome {
    if let Some(p) = model.config.word_vectors.clone() {
        let n = model.load_word_vectors(Path::new(&p))?;
        eprintln!("initialized {n} word vectors from {p}");
    }
    Ok(())
}

fn synth(corpus: &Path, kb: &Path, out: &Path) -> Outcome {
    let kb = load_kb(kb)?;
    let sentences = load_corpus(corpus)?;
    let result = synth_distant(&sentences, &kb);
    for i in &result.skipped {
        eprintln!("{}:{}: skipped, fewer than two linked mentions", corpus.display(), i + 1);
    }
    std::fs::write(out, weak_to_jsonl(&result.examples))?;
    println!("wrote {} examples to {}", result.examples.len(), out.display());
    Ok(())
}

fn open(ckpt: &Path) -> Result<Pipeline, Failure> {
    Ok(Pipeline::load(ckpt)?)
}

fn stdin_lines() -> Vec<String> {
    std::io::stdin()
        .lock()
        .lines()
        .map_while(Result::ok)
        .filter(|l| !l.trim().is_empty())
        .collect()
}

fn parse(ckpt: &Path, beam: Option<usize>) -> Outcome {
    let system = open(ckpt)?;
    let width = beam.unwrap_or(system.model.config.test_beam);
    let lines = stdin_lines();
    let mut out = std::io::stdout().lock();
    for set in system.parse_many(&lines, width) {
        writeln!(out, "{}", set?.to_json())?;
    }
    Ok(())
}

fn answer_line(system: &Pipeline, q: &str, width: usize) -> Result<String, Failure> {
    Ok(match system.answer(q, width)? {
        Some(c) => match &c.denotation {
            Ok(d) => d.to_strings().join("\t"),
            Err(e) => format!("(no answer: {e})"),
        },
        None => "(no answer)".to_string(),
    })
}

fn answer(ckpt: &Path, beam: Option<usize>, question: &[String]) -> Outcome {
    let system = open(ckpt)?;
    let width = beam.unwrap_or(system.model.config.test_beam);
    let questions = if question.is_empty() {
        stdin_lines()
    } else {
        vec![question.join(" ")]
    };
    for q in questions {
        println!("{}", answer_line(&system, &q, width)?);
    }
    Ok(())
}

fn eval(ckpt: &Path, data: &Path, metric: MetricArg, beam: Option<usize>, sweep: Option<Vec<usize>>) -> Outcome {
    let system = open(ckpt)?;
    let metric = match metric {
        MetricArg::Em => Metric::ExactMatch,
        MetricArg::F1 => Metric::F1,
    };
    let (examples, gold) = match Dataset::load(data, Some(&system.kb))? {
        Dataset::Supervised(s) => {
            let weak = s.iter().map(|e| e.to_weak(&system.kb)).collect::<Result<Vec<_>, _>>()?;
            (weak, Some(s.into_iter().map(|e| e.lf).collect::<Vec<_>>()))
        }
        Dataset::Weak(w) => (w, None),
    };
    if metric == Metric::ExactMatch && gold.is_none() {
        return Err(Failure::Usage("eval", "--metric em needs a dataset with logical forms".into()));
    }
    match sweep {
        Some(widths) => {
            let reports = beam_sweep(&system, &examples, gold.as_deref(), metric, &widths)?;
            print!("{}", sweep_table(&reports));
        }
        None => {
            let width = beam.unwrap_or(system.model.config.test_beam);
            let r = evaluate(&system, &examples, gold.as_deref(), metric, width)?;
            println!(
                "{} {:.4}\texamples {}\tanswerable {:.4}\tcorrect {:.4}\tbeam {}",
                r.metric, r.score, r.examples, r.answerable, r.correct, r.width
            );
        }
    }
    Ok(())
}

fn repl(ckpt: &Path, beam: Option<usize>) -> Outcome {
    let system = open(ckpt)?;
    let width = beam.unwrap_or(system.model.config.test_beam);
    let stdin = std::io::stdin();
    let mut out = std::io::stdout();
    loop {
        write!(out, "> ")?;
        out.flush()?;
        let mut line = String::new();
        if stdin.lock().read_line(&mut line)? == 0 {
            break;
        }
        let q = line.trim();
        if q.is_empty() {
            continue;
        }
        if q == ":quit" || q == ":q" {
            break;
        }
        match system.answer(q, width) {
            Ok(Some(c)) => {
                writeln!(out, "lf: {}", print_funql(&c.lf))?;
                match &c.denotation {
                    Ok(d) => writeln!(out, "answer: {}", d.to_strings().join(", "))?,
                    Err(e) => writeln!(out, "answer: none ({e})")?,
                }
            }
            Ok(None) => writeln!(out, "no parse")?,
            Err(e) => writeln!(out, "error: {e}")?,
        }
    }
    Ok(())
}
