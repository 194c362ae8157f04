use std::fs::{self, File, OpenOptions};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use agl::analysis::{aggregate, emit_plots, figure_analogues, parse_factors, read_results, BootstrapOptions, ResultSet};
use agl::grammar::{generate_instance, read_corpus_csv, write_corpus_csv, GrammarDescriptor, Level};
use agl::nn::{write_checkpoint, Architecture, Candidate};
use agl::sweep::config::{apply_setting, parse_levels};
use agl::sweep::{enumerate_grid, execute_job, parse_config, prepare_corpus, run_sweep, SweepGrid, SweepOptions};
use agl::train::RESULTS_HEADER;
use agl::{Error, Result};

#[derive(Parser)]
#[command(name = "agl", version, about = "Artificial grammar corpora and neural network learnability sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a labelled corpus for one grammar instance.
    Generate(GenerateArgs),
    /// Train and score a single network.
    Train(TrainArgs),
    /// Run a grid of training jobs, resumably.
    Sweep(SweepArgs),
    /// Summarize a results file and draw plots.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    level: Level,
    /// Window size; ignored for CF and CS.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Grammar instance seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    per_class: usize,
    /// Corpus CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    level: Option<Level>,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Grammar instance seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Train on this corpus file instead of generating one.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    arch: Architecture,
    #[arg(long, default_value_t = 64)]
    neurons: usize,
    #[arg(long, default_value_t = 1)]
    depth: usize,
    #[arg(long, default_value_t = 1)]
    laminations: usize,
    #[arg(long, default_value_t = 12)]
    window: usize,
    /// Replicate seed; split and initialization seeds derive from it.
    #[arg(long, default_value_t = 1)]
    replicate: u64,
    #[arg(long, default_value_t = 500)]
    per_class: usize,
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    /// Batches between test evaluations; 0 disables early stopping.
    #[arg(long, default_value_t = 1)]
    eval_stride: usize,
    #[arg(long, default_value_t = Candidate::Tanh)]
    gru_candidate: Candidate,
    /// Results CSV to append to; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the trained parameters here.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Grid configuration file (key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Levels, e.g. "SL:2,MSO,CS".
    #[arg(long)]
    level: Option<String>,
    /// k applied to levels given without one.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    arch: Option<String>,
    #[arg(long)]
    neurons: Option<String>,
    #[arg(long)]
    depth: Option<String>,
    #[arg(long)]
    laminations: Option<String>,
    #[arg(long)]
    window: Option<String>,
    /// Grammar instance seeds.
    #[arg(long)]
    seed: Option<String>,
    /// Replicate seeds.
    #[arg(long)]
    replicate: Option<String>,
    #[arg(long)]
    per_class: Option<String>,
    #[arg(long)]
    train_fraction: Option<String>,
    /// Batches between test evaluations, or "none".
    #[arg(long)]
    eval_stride: Option<String>,
    #[arg(long)]
    gru_candidate: Option<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
    /// Skip jobs already recorded in the results file and manifest.
    #[arg(long)]
    resume: bool,
    /// Run at most this many jobs, then stop.
    #[arg(long)]
    stop_after: Option<usize>,
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    results: PathBuf,
    /// Grouping factors, e.g. "architecture,level". Without it every
    /// standard figure is produced.
    #[arg(long)]
    by: Option<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    bootstrap_seed: u64,
    #[arg(long, default_value_t = agl::analysis::DEFAULT_RESAMPLES)]
    resamples: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Train(a) => train(a),
        Command::Sweep(a) => sweep(a),
        Command::Analyze(a) => analyze(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("agl: {e}");
            ExitCode::FAILURE
        }
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn generate(a: GenerateArgs) -> Result<()> {
    let k = a.level.normalize_k(a.k)?;
    let grammar = GrammarDescriptor { level: a.level, k, instance_seed: a.seed };
    let instance = generate_instance(a.level, k, a.seed)?;
    eprintln!("{instance}");
    let corpus = prepare_corpus(&grammar, a.per_class)?;
    write_corpus_csv(output(&a.out)?, grammar, &corpus)
}

fn train(a: TrainArgs) -> Result<()> {
    let (grammar, corpus) = match &a.corpus {
        Some(path) => {
            let (descriptor, corpus) = read_corpus_csv(BufReader::new(File::open(path)?))?;
            let grammar = match (descriptor, a.level) {
                (Some(g), _) => g,
                (None, Some(level)) => {
                    GrammarDescriptor { level, k: level.normalize_k(a.k)?, instance_seed: a.seed }
                }
                (None, None) => return Err(Error::Parameter("empty corpus file and no --level".into())),
            };
            (grammar, Some(corpus))
        }
        None => {
            let level = a.level.ok_or_else(|| Error::Parameter("--level or --corpus is required".into()))?;
            (GrammarDescriptor { level, k: level.normalize_k(a.k)?, instance_seed: a.seed }, None)
        }
    };
    let mut grid = SweepGrid {
        architectures: vec![a.arch],
        neurons: vec![a.neurons],
        depths: vec![a.depth],
        laminations: vec![a.laminations],
        windows: vec![a.window],
        levels: vec![(grammar.level, grammar.k)],
        instance_seeds: vec![grammar.instance_seed],
        replicate_seeds: vec![a.replicate],
        per_class: a.per_class,
        train_fraction: a.train_fraction,
        candidate: a.gru_candidate,
        ..SweepGrid::default()
    };
    grid.train.eval_stride = (a.eval_stride > 0).then_some(a.eval_stride);
    let job = enumerate_grid(&grid)?[0];
    let corpus = match corpus {
        Some(c) => c,
        None => prepare_corpus(&grammar, a.per_class)?,
    };
    let (outcome, params) = execute_job(&job, &corpus, &grid)?;
    let row = outcome.to_csv_row();
    match &a.out {
        Some(path) => append_row(path, &row)?,
        None => println!("{RESULTS_HEADER}\n{row}"),
    }
    if let Some(path) = &a.checkpoint {
        write_checkpoint(BufWriter::new(File::create(path)?), &params)?;
    }
    Ok(())
}

fn append_row(path: &Path, row: &str) -> Result<()> {
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(file, "{RESULTS_HEADER}")?;
    }
    writeln!(file, "{row}")?;
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut grid = match &a.config {
        Some(path) => parse_config(&fs::read_to_string(path)?)?,
        None => SweepGrid::default(),
    };
    if let Some(levels) = &a.level {
        grid.levels = match a.k {
            Some(k) => {
                let items: Vec<String> = levels
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| if s.contains(':') { s.to_string() } else { format!("{s}:{k}") })
                    .collect();
                parse_levels(&items.join(","))?
            }
            None => parse_levels(levels)?,
        };
    } else if let Some(k) = a.k {
        for (level, old_k) in &mut grid.levels {
            *old_k = level.normalize_k(k)?;
        }
    }
    let overrides = [
        ("architectures", &a.arch),
        ("neurons", &a.neurons),
        ("depths", &a.depth),
        ("laminations", &a.laminations),
        ("windows", &a.window),
        ("instance_seeds", &a.seed),
        ("replicate_seeds", &a.replicate),
        ("per_class", &a.per_class),
        ("train_fraction", &a.train_fraction),
        ("eval_stride", &a.eval_stride),
        ("candidate", &a.gru_candidate),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            apply_setting(&mut grid, key, v)?;
        }
    }
    let options = SweepOptions {
        parallelism: a.parallelism,
        resume: a.resume,
        stop_after: a.stop_after,
        verbose: !a.quiet,
    };
    let report = run_sweep(&grid, &a.out, &options)?;
    eprintln!(
        "{} jobs: {} already done, {} run ({} failed), {} remaining",
        report.total_jobs,
        report.already_done,
        report.executed,
        report.failed,
        report.remaining()
    );
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let results = read_results(BufReader::new(File::open(&a.results)?))?;
    fs::create_dir_all(&a.out)?;
    let options = BootstrapOptions { seed: a.bootstrap_seed, resamples: a.resamples, ..BootstrapOptions::default() };
    let figures: Vec<(String, Vec<_>, bool)> = match &a.by {
        Some(by) => {
            let factors = parse_factors(by)?;
            vec![("summary".to_string(), factors, false)]
        }
        None => figure_analogues().into_iter().map(|f| (f.name.to_string(), f.factors, f.recurrent_only)).collect(),
    };
    for (name, factors, recurrent_only) in figures {
        let subset;
        let rows = if recurrent_only {
            subset = ResultSet {
                rows: results.rows.iter().filter(|r| r.architecture != Architecture::Ffn).cloned().collect(),
                excluded: results.excluded,
            };
            &subset
        } else {
            &results
        };
        let summary = aggregate(rows, &factors, &options)?;
        if summary.groups.is_empty() {
            eprintln!("{name}: no rows, skipped");
            continue;
        }
        if a.by.is_some() {
            summary.write_csv(BufWriter::new(File::create(a.out.join("summary.csv"))?))?;
        }
        let plot = emit_plots(&summary, &a.out)?;
        for w in &plot.warnings {
            eprintln!("{name}: {w}");
        }
        eprintln!("{name}: {} groups -> {}", summary.groups.len(), plot.svg.display());
    }
    Ok(())
}
