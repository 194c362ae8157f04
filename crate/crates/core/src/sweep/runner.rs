use std::collections::{HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::sync::Arc;
use std::thread;

use crate::encoding::{split, Encoding};
use crate::error::{Error, Result};
use crate::grammar::{build_corpus, generate_instance, GrammarDescriptor, LabeledString};
use crate::nn::{Architecture, Parameters};
use crate::seed::rng_from_seed;
use crate::train::{train_model, TrainOutcome, RESULTS_HEADER};

use super::grid::{corpus_seed_for, enumerate_grid, JobKey, JobSpec, SweepGrid};

/// Marker placed in the brier column of a failed job's row.
pub const ERROR_MARKER: &str = "ERROR";

const KEY_COLUMNS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    /// Worker threads.
    pub parallelism: usize,
    /// Keep completed jobs from an existing results file and manifest.
    pub resume: bool,
    /// Run at most this many pending jobs, then return as if interrupted.
    pub stop_after: Option<usize>,
    /// Log one line per finished job to stderr.
    pub verbose: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { parallelism: 1, resume: false, stop_after: None, verbose: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepReport {
    pub total_jobs: usize,
    /// Jobs found complete on resume.
    pub already_done: usize,
    pub executed: usize,
    pub failed: usize,
}

impl SweepReport {
    pub fn remaining(&self) -> usize {
        self.total_jobs - self.already_done - self.executed
    }
}

/// Path of the completed-job manifest kept next to `results`.
pub fn manifest_path(results: &Path) -> PathBuf {
    let mut name = results.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

/// The job key of a results row: its first ten columns.
pub fn row_key(row: &str) -> Option<JobKey> {
    let mut end = 0;
    for (i, field) in row.split(',').enumerate() {
        end += field.len();
        if i + 1 == KEY_COLUMNS {
            return Some(JobKey(row[..end].to_string()));
        }
        end += 1;
    }
    None
}

pub fn is_error_row(row: &str) -> bool {
    row.split(',').nth(KEY_COLUMNS) == Some(ERROR_MARKER)
}

pub fn error_row(job: &JobSpec, message: &str) -> String {
    let clean: String = message
        .chars()
        .map(|c| match c {
            ',' => ';',
            '"' => '\'',
            c if c.is_control() => ' ',
            c => c,
        })
        .collect();
    format!("{},{ERROR_MARKER},{clean},,,", job.key())
}

/// Draws the corpus shared by every job on one grammar instance.
pub fn prepare_corpus(grammar: &GrammarDescriptor, per_class: usize) -> Result<Vec<LabeledString>> {
    let instance = generate_instance(grammar.level, grammar.k, grammar.instance_seed)?;
    build_corpus(&instance, per_class, &mut rng_from_seed(corpus_seed_for(grammar)))
}

/// Splits, encodes and trains one job.
pub fn execute_job(job: &JobSpec, corpus: &[LabeledString], grid: &SweepGrid) -> Result<(TrainOutcome, Parameters)> {
    let encoding = match job.config.architecture {
        Architecture::Ffn => Encoding::Full,
        _ => Encoding::Windows(job.config.window),
    };
    let data = split(corpus, grid.train_fraction, encoding, job.seeds.split_seed)?;
    train_model(&job.config, &data, job.grammar, job.seeds, &grid.train)
}

fn run_one(job: &JobSpec, corpus: &std::result::Result<Arc<Vec<LabeledString>>, String>, grid: &SweepGrid) -> (String, bool) {
    let corpus = match corpus {
        Ok(c) => c,
        Err(message) => return (error_row(job, message), false),
    };
    match panic::catch_unwind(AssertUnwindSafe(|| execute_job(job, corpus, grid))) {
        Ok(Ok((outcome, _))) => (outcome.to_csv_row(), true),
        Ok(Err(e)) => (error_row(job, &e.to_string()), false),
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "job panicked".to_string());
            (error_row(job, &format!("panic: {message}")), false)
        }
    }
}

/// Brings the results file and manifest into agreement: a job counts as
/// complete only when its row is fully written and its key is in the
/// manifest. Anything else is dropped so the job reruns.
fn reconcile(results: &Path, manifest: &Path) -> Result<HashSet<JobKey>> {
    let text = fs::read_to_string(results)?;
    let mut lines: Vec<&str> = text.split_inclusive('\n').collect();
    if lines.last().is_some_and(|l| !l.ends_with('\n')) {
        lines.pop();
    }
    let mut lines = lines.into_iter().map(|l| l.trim_end_matches(['\n', '\r']));
    match lines.next() {
        Some(RESULTS_HEADER) | None => {}
        Some(other) => {
            return Err(Error::Parse { line: 1, message: format!("unexpected results header {other:?}") })
        }
    }
    let rows: Vec<&str> = lines.filter(|l| !l.is_empty()).collect();

    let manifest_text = match fs::read_to_string(manifest) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(e.into()),
    };
    let listed: HashSet<JobKey> = manifest_text
        .split_inclusive('\n')
        .filter(|l| l.ends_with('\n'))
        .map(|l| JobKey(l.trim_end().to_string()))
        .collect();

    let mut done = HashSet::new();
    let mut kept = Vec::new();
    for row in rows {
        if let Some(key) = row_key(row) {
            if listed.contains(&key) && done.insert(key.clone()) {
                kept.push((row, key));
            }
        }
    }

    let mut new_results = format!("{RESULTS_HEADER}\n");
    let mut new_manifest = String::new();
    for (row, key) in &kept {
        new_results.push_str(row);
        new_results.push('\n');
        new_manifest.push_str(&key.0);
        new_manifest.push('\n');
    }
    if new_results != text {
        replace_file(results, &new_results)?;
    }
    if new_manifest != manifest_text {
        replace_file(manifest, &new_manifest)?;
    }
    Ok(done)
}

fn replace_file(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Runs every job of `grid` not already complete, appending one row per job
/// to `out` and its key to the manifest as each finishes.
pub fn run_sweep(grid: &SweepGrid, out: &Path, options: &SweepOptions) -> Result<SweepReport> {
    if options.parallelism == 0 {
        return Err(Error::param("parallelism must be at least 1"));
    }
    let jobs = enumerate_grid(grid)?;
    let manifest = manifest_path(out);

    let done = if options.resume && out.exists() {
        reconcile(out, &manifest)?
    } else {
        fs::write(out, format!("{RESULTS_HEADER}\n"))?;
        fs::write(&manifest, "")?;
        HashSet::new()
    };

    let mut pending: Vec<JobSpec> = jobs.iter().filter(|j| !done.contains(&j.key())).copied().collect();
    let mut report = SweepReport {
        total_jobs: jobs.len(),
        already_done: jobs.len() - pending.len(),
        ..SweepReport::default()
    };
    if let Some(limit) = options.stop_after {
        pending.truncate(limit);
    }
    if pending.is_empty() {
        return Ok(report);
    }

    let mut corpora = HashMap::new();
    for job in &pending {
        corpora.entry(job.grammar).or_insert_with(|| {
            prepare_corpus(&job.grammar, grid.per_class).map(Arc::new).map_err(|e| e.to_string())
        });
    }

    let mut results_file = OpenOptions::new().append(true).open(out)?;
    let mut manifest_file: File = OpenOptions::new().append(true).create(true).open(&manifest)?;
    let next = AtomicUsize::new(0);
    let workers = options.parallelism.min(pending.len());
    let (tx, rx) = mpsc::channel::<(usize, String, bool)>();

    let write_result = thread::scope(|scope| -> Result<()> {
        for _ in 0..workers {
            let tx = tx.clone();
            let (pending, corpora, next) = (&pending, &corpora, &next);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = pending.get(i) else { break };
                let (row, ok) = run_one(job, &corpora[&job.grammar], grid);
                if tx.send((i, row, ok)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (i, row, ok) in rx {
            let written = results_file
                .write_all(format!("{row}\n").as_bytes())
                .and_then(|_| manifest_file.write_all(format!("{}\n", pending[i].key()).as_bytes()));
            if let Err(e) = written {
                // Stop handing out work; in-flight jobs finish and are discarded.
                next.store(pending.len(), Ordering::Relaxed);
                return Err(e.into());
            }
            report.executed += 1;
            if !ok {
                report.failed += 1;
            }
            if options.verbose {
                eprintln!(
                    "[{}/{}] {}",
                    report.already_done + report.executed,
                    report.total_jobs,
                    row
                );
            }
        }
        Ok(())
    });
    write_result?;
    Ok(report)
}
