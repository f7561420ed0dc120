use clap::{Args, Parser, Subcommand};
use qforage::env::{gen_corpus, load_corpus, write_corpus, Corpus, GenSpec, Mode};
use qforage::oracle::{run_oracles, OracleOptions};
use qforage::rng::SeedStreams;
use qforage::trainer::{evaluate, format_metrics, inspect, load_checkpoint, train, Checkpoint, TrainConfig, KEYS};
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const GEN_KEYS: [&str; 7] = ["docs", "patches", "vocab_size", "candidates", "noise", "doc_len", "query_len"];

#[derive(Parser, Debug)]
#[command(name = "qforage", version, about = "Quantum-probabilistic actor-critic query matching")]
struct Cli {
    /// Root seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat key=value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a separable toy corpus.
    GenCorpus(GenArgs),
    /// Train on a corpus and write a checkpoint and metric log.
    Train(TrainArgs),
    /// Greedy evaluation of a checkpoint.
    Eval(EvalArgs),
    /// Print actor and critic diagnostics for one document.
    Inspect(InspectArgs),
    /// Run the verification suite.
    Oracle(OracleArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    docs: Option<usize>,
    #[arg(long)]
    patches: Option<usize>,
    #[arg(long)]
    vocab: Option<usize>,
    #[arg(long)]
    candidates: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    doc_len: Option<usize>,
    #[arg(long)]
    query_len: Option<usize>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    lr_actor: Option<f64>,
    #[arg(long)]
    lr_critic: Option<f64>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    eval_interval: Option<usize>,
    /// Any configuration key, as KEY=VALUE; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    checkpoint: PathBuf,
}

#[derive(Args, Debug)]
struct InspectArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    checkpoint: PathBuf,
    /// Document id.
    #[arg(long)]
    doc: String,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Comma-separated check names; all checks when omitted.
    #[arg(long, value_delimiter = ',')]
    checks: Vec<String>,
    /// Offset added to implementation-side values.
    #[arg(long, default_value_t = 0.0)]
    perturb: f64,
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Display) -> Failure {
    Failure {
        code: 2,
        message: message.to_string(),
    }
}

fn runtime(message: impl Display) -> Failure {
    Failure {
        code: 1,
        message: message.to_string(),
    }
}

type CliResult<T = ()> = Result<T, Failure>;

/// Pairs from a `key=value` file. Keys must belong to the training or
/// generator configuration.
fn read_config_file(path: &Path) -> CliResult<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) && !GEN_KEYS.contains(&k) {
            return Err(usage(format!("{}:{}: unknown key {k:?}", path.display(), i + 1)));
        }
        pairs.push((k.to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

fn file_pairs(cli: &Cli) -> CliResult<Vec<(String, String)>> {
    cli.config.as_deref().map_or(Ok(Vec::new()), read_config_file)
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| usage(format!("{key}: cannot parse {value:?}")))
}

fn gen_spec(cli: &Cli, args: &GenArgs) -> CliResult<(GenSpec, u64)> {
    let mut spec = GenSpec::default();
    let mut seed = 0;
    for (k, v) in file_pairs(cli)? {
        match k.as_str() {
            "docs" => spec.docs = parse_value(&k, &v)?,
            "patches" => spec.patches = parse_value(&k, &v)?,
            "vocab_size" => spec.vocab_size = parse_value(&k, &v)?,
            "candidates" => spec.candidates = parse_value(&k, &v)?,
            "noise" => spec.noise = parse_value(&k, &v)?,
            "doc_len" => spec.doc_len = parse_value(&k, &v)?,
            "query_len" => spec.query_len = parse_value(&k, &v)?,
            "seed" => seed = parse_value(&k, &v)?,
            _ => {}
        }
    }
    let set = |slot: &mut usize, flag: Option<usize>| {
        if let Some(v) = flag {
            *slot = v;
        }
    };
    set(&mut spec.docs, args.docs);
    set(&mut spec.patches, args.patches);
    set(&mut spec.vocab_size, args.vocab);
    set(&mut spec.candidates, args.candidates);
    set(&mut spec.doc_len, args.doc_len);
    set(&mut spec.query_len, args.query_len);
    if let Some(n) = args.noise {
        spec.noise = n;
    }
    if let Some(s) = cli.seed {
        seed = s;
    }
    spec.validate().map_err(usage)?;
    Ok((spec, seed))
}

fn train_config(cli: &Cli, args: &TrainArgs) -> CliResult<TrainConfig> {
    let mut cfg = TrainConfig::default();
    for (k, v) in file_pairs(cli)? {
        if KEYS.contains(&k.as_str()) {
            cfg.set(&k, &v).map_err(usage)?;
        }
    }
    for kv in &args.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        if !KEYS.contains(&k) {
            return Err(usage(format!("unknown key {k:?}")));
        }
        cfg.set(k, v).map_err(usage)?;
    }
    if let Some(v) = args.episodes {
        cfg.episodes = v;
    }
    if let Some(v) = args.mode {
        cfg.mode = v;
    }
    if let Some(v) = args.lr_actor {
        cfg.lr_actor = v;
    }
    if let Some(v) = args.lr_critic {
        cfg.lr_critic = v;
    }
    if let Some(v) = args.temperature {
        cfg.temperature = v;
    }
    if let Some(v) = args.eval_interval {
        cfg.eval_interval = v;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn open_corpus(path: &Path) -> CliResult<Corpus> {
    if !path.is_file() {
        return Err(usage(format!("corpus {} does not exist", path.display())));
    }
    load_corpus(path).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn open_checkpoint(path: &Path) -> CliResult<Checkpoint> {
    if !path.is_file() {
        return Err(usage(format!("checkpoint {} does not exist", path.display())));
    }
    load_checkpoint(path).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn output_dir(cli: &Cli) -> CliResult<&Path> {
    std::fs::create_dir_all(&cli.out).map_err(|e| runtime(format!("{}: {e}", cli.out.display())))?;
    Ok(&cli.out)
}

fn write_file(path: &Path, text: &str) -> CliResult {
    std::fs::write(path, text).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn cmd_gen_corpus(cli: &Cli, args: &GenArgs) -> CliResult {
    let (spec, seed) = gen_spec(cli, args)?;
    let corpus = gen_corpus(&spec, &mut SeedStreams::new(seed).rng("corpus")).map_err(usage)?;
    let header: Vec<(String, String)> = [
        ("seed", seed.to_string()),
        ("docs", spec.docs.to_string()),
        ("patches", spec.patches.to_string()),
        ("vocab_size", spec.vocab_size.to_string()),
        ("candidates", spec.candidates.to_string()),
        ("noise", spec.noise.to_string()),
        ("doc_len", spec.doc_len.to_string()),
        ("query_len", spec.query_len.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let path = output_dir(cli)?.join("corpus.tsv");
    write_file(&path, &write_corpus(&corpus, &header))?;
    let candidates: usize = corpus.documents().iter().map(|d| d.candidates.len()).sum();
    println!(
        "wrote {}: {} documents, {} patches, {} candidates, {} words",
        path.display(),
        corpus.len(),
        corpus.patches().len(),
        candidates,
        corpus.vocabulary().len()
    );
    Ok(())
}

fn cmd_train(cli: &Cli, args: &TrainArgs) -> CliResult {
    let mut cfg = train_config(cli, args)?;
    let corpus = open_corpus(&args.corpus)?;
    let out = output_dir(cli)?;
    let checkpoint = out.join("checkpoint.txt");
    cfg.checkpoint_path = Some(checkpoint.clone());
    let outcome = train(&cfg, &corpus).map_err(runtime)?;
    let metrics = out.join("metrics.tsv");
    write_file(&metrics, &format_metrics(&cfg, &outcome.records))?;
    println!("wrote {} and {}", checkpoint.display(), metrics.display());
    if let Some(last) = outcome.records.last() {
        println!(
            "episode {}: greedy_acc {} critic_acc {} scent {}",
            last.episode, last.greedy_acc, last.critic_acc, last.scent_scalar
        );
    }
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> CliResult {
    let cp = open_checkpoint(&args.checkpoint)?;
    let corpus = open_corpus(&args.corpus)?;
    let m = evaluate(&cp.model, &corpus, &cp.config).map_err(runtime)?;
    println!("doc_id\tchosen\treward\tquery");
    for c in &m.choices {
        println!("{}\t{}\t{}\t{}", c.doc_id, c.chosen, c.reward, c.query);
    }
    let d = m.scent.distribution();
    println!("greedy_acc\t{}", m.greedy_accuracy);
    println!("mean_reward\t{}", m.mean_reward);
    println!("critic_acc\t{}", m.critic_accuracy);
    println!("scent_scalar\t{}", m.scent.scalar());
    println!("scent_distribution\t{} {} {}", d[0], d[1], d[2]);
    Ok(())
}

fn cmd_inspect(args: &InspectArgs) -> CliResult {
    let cp = open_checkpoint(&args.checkpoint)?;
    let corpus = open_corpus(&args.corpus)?;
    let doc = corpus
        .find(&args.doc)
        .ok_or_else(|| runtime(format!("unknown document {:?}", args.doc)))?;
    let report = inspect(&cp.model, doc, cp.config.keywords).map_err(runtime)?;
    print!("{}", report.render());
    Ok(())
}

fn cmd_oracle(cli: &Cli, args: &OracleArgs) -> CliResult {
    let opts = OracleOptions {
        seed: cli.seed.unwrap_or(0),
        perturb: args.perturb,
    };
    let reports = run_oracles(&args.checks, &opts).map_err(usage)?;
    let mut failed = 0;
    for r in &reports {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        println!(
            "{status}\t{}\tinstances={}\tmax_error={:.3e}\ttolerance={:.1e}",
            r.name, r.instances, r.max_error, r.tolerance
        );
        failed += usize::from(!r.passed());
    }
    if failed > 0 {
        return Err(Failure {
            code: 3,
            message: format!("{failed} of {} checks failed", reports.len()),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::GenCorpus(a) => cmd_gen_corpus(&cli, a),
        Command::Train(a) => cmd_train(&cli, a),
        Command::Eval(a) => cmd_eval(a),
        Command::Inspect(a) => cmd_inspect(a),
        Command::Oracle(a) => cmd_oracle(&cli, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
