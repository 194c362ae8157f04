//! Acceptance gate. Runs every criterion and prints one PASS/FAIL line each.
//! Pass criterion numbers as arguments to run a subset, e.g.
//! `cargo test --test acceptance -- 1 2 3`.
//!
//! Correctness criteria gate the exit status. The directional reproductions of
//! empirical findings (5, 6, 7) are reported with the same PASS/FAIL line but
//! do not fail the run; set `AGL_ACCEPTANCE_STRICT=1` to make them gate too.

#[allow(dead_code)]
mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use agl::encoding::{encode_windows, EncodedExample, Features};
use agl::grammar::{generate_instance, oracle_accepts, sample_string, Label, Level};
use agl::nn::{Architecture, Candidate, NetworkConfig, Parameters};
use agl::seed::rng_from_seed;
use agl::sweep::{enumerate_grid, execute_job, prepare_corpus, run_sweep, SweepGrid, SweepOptions};
use agl::train::{evaluate, score, RESULTS_HEADER};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

/// Shared state: the scaled sweep is run once and reused by criteria 5, 7, 8.
struct Context {
    dir: tempfile::TempDir,
    scaled: Option<(PathBuf, Duration)>,
}

impl Context {
    fn scaled_sweep(&mut self) -> &Path {
        if self.scaled.is_none() {
            let out = self.dir.path().join("scaled_p4.csv");
            let started = Instant::now();
            let report =
                run_sweep(&scaled_grid(), &out, &SweepOptions { parallelism: 4, ..SweepOptions::default() }).unwrap();
            assert_eq!(report.failed, 0, "scaled sweep had failing jobs");
            self.scaled = Some((out, started.elapsed()));
        }
        &self.scaled.as_ref().unwrap().0
    }
}

/// FFN and GRU, 64/128 neurons, depth 1, dense and laminated, GRU windows
/// 5 and 12, SL k=2 and CS, five replicates.
fn scaled_grid() -> SweepGrid {
    SweepGrid {
        architectures: vec![Architecture::Ffn, Architecture::Gru],
        neurons: vec![64, 128],
        depths: vec![1],
        laminations: vec![1, 2],
        windows: vec![5, 12],
        levels: vec![(Level::Sl, 2), (Level::Cs, 0)],
        instance_seeds: vec![1],
        replicate_seeds: (1..=5).collect(),
        per_class: 500,
        train_fraction: 0.8,
        ..SweepGrid::default()
    }
}

/// Parsed results rows keyed by column name.
struct Row {
    level: String,
    architecture: String,
    neurons: usize,
    laminations: usize,
    window: usize,
    percent: f64,
}

fn read_rows(path: &Path) -> Vec<Row> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(RESULTS_HEADER));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            Row {
                level: f[0].to_string(),
                architecture: f[3].to_string(),
                neurons: f[4].parse().unwrap(),
                laminations: f[6].parse().unwrap(),
                window: f[7].parse().unwrap(),
                percent: f[11].parse().unwrap(),
            }
        })
        .collect()
}

fn mean<'a>(rows: impl Iterator<Item = &'a Row>) -> (f64, usize) {
    let v: Vec<f64> = rows.map(|r| r.percent).collect();
    (v.iter().sum::<f64>() / v.len().max(1) as f64, v.len())
}

/// Data rows with the wall_time column removed, sorted.
fn sorted_without_wall_time(path: &Path) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    let mut rows: Vec<String> =
        text.lines().skip(1).map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect();
    rows.sort();
    rows
}

fn criterion_1(_: &mut Context) -> Verdict {
    let started = Instant::now();
    let mut checked = 0;
    let mut mismatches = 0;
    for level in Level::ALL {
        for &k in level.valid_k() {
            for seed in 0..100 {
                let g = generate_instance(level, k, seed).unwrap();
                let mut rng = rng_from_seed(seed.wrapping_mul(31).wrapping_add(k as u64));
                for label in [Label::Grammatical, Label::Ungrammatical] {
                    for _ in 0..20 {
                        let s = sample_string(&g, label, &mut rng).unwrap();
                        checked += 1;
                        if oracle_accepts(&g, &s.text).unwrap() != (label == Label::Grammatical) {
                            mismatches += 1;
                        }
                    }
                }
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    verdict(mismatches == 0 && secs < 60.0, format!("{checked} strings, {mismatches} mismatches, {secs:.1}s"))
}

fn criterion_2(_: &mut Context) -> Verdict {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    let mut masks_ok = true;
    let mut cases = 0;
    let mut rng = rng_from_seed(2024);
    for arch in Architecture::ALL {
        let candidates: &[Candidate] =
            if arch == Architecture::Gru { &[Candidate::Tanh, Candidate::Relu] } else { &[Candidate::Tanh] };
        for &candidate in candidates {
            for lam in [1, 2] {
                for window in [1, 5, 12] {
                    let window = if arch == Architecture::Ffn { 12 } else { window };
                    let config = NetworkConfig::toy(arch, 8, 2, lam, window).unwrap().with_candidate(candidate);
                    for _ in 0..2 {
                        let (p, batch) = common::smooth_case(&config, 4, &mut rng);
                        let (rel, masked_zero) = common::gradient_check(&p, &batch);
                        worst = worst.max(rel);
                        masks_ok &= masked_zero;
                        cases += 1;
                    }
                }
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-4 && masks_ok && secs < 60.0,
        format!("{cases} cases, max relative error {worst:.2e}, masked gradients zero: {masks_ok}, {secs:.1}s"),
    )
}

fn criterion_3(_: &mut Context) -> Verdict {
    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };
    check("perfect predictor", score(&[0.0, 1.0, 0.0, 1.0], &[0.0, 1.0, 0.0, 1.0]).unwrap() == (0.0, 100.0));
    let targets = [1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
    check("constant 0.5", score(&[0.5; 10], &targets).unwrap() == (0.25, 40.0));
    let two = score(&[0.9, 0.2], &[1.0, 0.0]).unwrap();
    let expected = ((0.9f64 - 1.0).powi(2) + 0.2f64.powi(2)) / 2.0;
    check("{0.9, 0.2} arithmetic", two == (expected, 100.0) && (two.0 - 0.025).abs() < 1e-15);
    check("empty test set", score(&[], &[]).is_err());

    // A zero-weight network outputs exactly 0.5 for every string.
    let config = NetworkConfig::new(Architecture::Gru, 32, 1, 1, 4).unwrap();
    let zeros = Parameters::zeros(&config);
    let testset: Vec<EncodedExample> = (0..8)
        .map(|i| EncodedExample {
            features: Features::Sequence(encode_windows("abcdefabcdef", 4).unwrap()),
            target: if i < 3 { 1.0 } else { 0.0 },
        })
        .collect();
    check("zero network", evaluate(&zeros, &testset).unwrap() == (0.25, 37.5));
    verdict(
        failures.is_empty(),
        if failures.is_empty() { "all analytic examples exact".to_string() } else { format!("failed: {failures:?}") },
    )
}

fn criterion_4(_: &mut Context) -> Verdict {
    let started = Instant::now();
    let grid = SweepGrid {
        architectures: vec![Architecture::Ffn],
        neurons: vec![64],
        levels: vec![(Level::Sl, 1)],
        ..SweepGrid::default()
    };
    let job = enumerate_grid(&grid).unwrap()[0];
    let corpus = prepare_corpus(&job.grammar, 500).unwrap();
    let (outcome, _) = execute_job(&job, &corpus, &grid).unwrap();
    let secs = started.elapsed().as_secs_f64();
    verdict(
        outcome.percent_correct >= 95.0 && outcome.epochs_run <= 100 && secs < 120.0,
        format!("{:.1}% after {} epochs, {secs:.1}s", outcome.percent_correct, outcome.epochs_run),
    )
}

fn criterion_5(ctx: &mut Context) -> Verdict {
    let rows = read_rows(ctx.scaled_sweep());
    let dense = |level: &'static str, arch: &'static str| {
        mean(rows.iter().filter(move |r| r.laminations == 1 && r.level == level && r.architecture == arch))
    };
    let (gru_cs, n1) = dense("CS", "GRU");
    let (ffn_cs, n2) = dense("CS", "FFN");
    let (gru_sl, _) = dense("SL", "GRU");
    let (ffn_sl, _) = dense("SL", "FFN");
    let (gap_cs, gap_sl) = (gru_cs - ffn_cs, gru_sl - ffn_sl);
    let secs = ctx.scaled.as_ref().unwrap().1.as_secs_f64();
    verdict(
        gru_cs > ffn_cs && gap_cs > gap_sl,
        format!(
            "CS: GRU {gru_cs:.2} (n={n1}) vs FFN {ffn_cs:.2} (n={n2}), gap {gap_cs:+.2}; \
             SL: GRU {gru_sl:.2} vs FFN {ffn_sl:.2}, gap {gap_sl:+.2}; sweep {secs:.0}s"
        ),
    )
}

fn criterion_6(ctx: &mut Context) -> Verdict {
    let grid = SweepGrid {
        architectures: vec![Architecture::Gru],
        neurons: vec![128],
        depths: vec![1],
        laminations: vec![1],
        windows: vec![1, 12],
        levels: vec![(Level::Mso, 2), (Level::Sl, 2)],
        instance_seeds: vec![1],
        replicate_seeds: (1..=5).collect(),
        ..SweepGrid::default()
    };
    let out = ctx.dir.path().join("input_size.csv");
    run_sweep(&grid, &out, &SweepOptions { parallelism: 4, ..SweepOptions::default() }).unwrap();
    let rows = read_rows(&out);
    let at = |level: &'static str, window: usize| {
        mean(rows.iter().filter(move |r| r.level == level && r.window == window)).0
    };
    let (mso1, mso12, sl1, sl12) = (at("MSO", 1), at("MSO", 12), at("SL", 1), at("SL", 12));
    // "Absent" means within one percentage point.
    verdict(
        mso1 < mso12 && sl12 - sl1 <= 1.0,
        format!("MSO: w1 {mso1:.2} < w12 {mso12:.2}; SL: w1 {sl1:.2} vs w12 {sl12:.2} (w12 - w1 = {:+.2})", sl12 - sl1),
    )
}

fn criterion_7(ctx: &mut Context) -> Verdict {
    let rows = read_rows(ctx.scaled_sweep());
    let mut cells: BTreeMap<(String, String, usize, usize), [Vec<f64>; 2]> = BTreeMap::new();
    for r in &rows {
        let cell = cells.entry((r.level.clone(), r.architecture.clone(), r.neurons, r.window)).or_default();
        cell[r.laminations - 1].push(r.percent);
    }
    let mut worst = (0.0f64, String::new());
    for ((level, arch, neurons, window), [dense, laminated]) in &cells {
        let avg = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
        let diff = (avg(dense) - avg(laminated)).abs();
        if diff >= worst.0 {
            worst = (diff, format!("{level} {arch} {neurons} w{window}"));
        }
    }
    verdict(
        worst.0 <= 3.0,
        format!("{} cells, largest |dense - laminated| {:.2} pp ({})", cells.len(), worst.0, worst.1),
    )
}

fn criterion_8(ctx: &mut Context) -> Verdict {
    let parallel = ctx.scaled_sweep().to_path_buf();

    // Single job: a fresh run reproduces the sweep's row.
    let grid = scaled_grid();
    let job = *enumerate_grid(&grid)
        .unwrap()
        .iter()
        .find(|j| j.grammar.level == Level::Cs && j.config.architecture == Architecture::Gru && j.config.window == 5)
        .unwrap();
    let corpus = prepare_corpus(&job.grammar, grid.per_class).unwrap();
    let strip = |row: String| row.rsplit_once(',').unwrap().0.to_string();
    let a = strip(execute_job(&job, &corpus, &grid).unwrap().0.to_csv_row());
    let b = strip(execute_job(&job, &corpus, &grid).unwrap().0.to_csv_row());
    let in_sweep = sorted_without_wall_time(&parallel).contains(&a);

    let serial = ctx.dir.path().join("scaled_p1.csv");
    run_sweep(&grid, &serial, &SweepOptions { parallelism: 1, ..SweepOptions::default() }).unwrap();
    let (p4, p1) = (sorted_without_wall_time(&parallel), sorted_without_wall_time(&serial));
    verdict(
        a == b && in_sweep && p1 == p4,
        format!(
            "single job rerun identical: {}, matches sweep row: {in_sweep}, parallelism 1 vs 4: {} rows, identical: {}",
            a == b,
            p1.len(),
            p1 == p4
        ),
    )
}

fn criterion_9(ctx: &mut Context) -> Verdict {
    let grid = SweepGrid {
        architectures: vec![Architecture::Ffn, Architecture::Rnn, Architecture::Gru],
        neurons: vec![32],
        laminations: vec![1, 2],
        windows: vec![3],
        levels: vec![(Level::Sl, 2), (Level::Mso, 2)],
        replicate_seeds: vec![1, 2],
        per_class: 100,
        ..SweepGrid::default()
    };
    let total = enumerate_grid(&grid).unwrap().len();
    let full = ctx.dir.path().join("resume_full.csv");
    run_sweep(&grid, &full, &SweepOptions { parallelism: 2, ..SweepOptions::default() }).unwrap();

    let out = ctx.dir.path().join("resume.csv");
    let first = run_sweep(&grid, &out, &SweepOptions { parallelism: 2, stop_after: Some(9), ..SweepOptions::default() })
        .unwrap();
    // Simulate a crash mid-write: a torn trailing row with no manifest entry.
    let mut text = fs::read_to_string(&out).unwrap();
    text.push_str("MSO,2,1,GRU,32,1,2,3,");
    fs::write(&out, text).unwrap();
    let second =
        run_sweep(&grid, &out, &SweepOptions { parallelism: 2, resume: true, ..SweepOptions::default() }).unwrap();
    let same = sorted_without_wall_time(&out) == sorted_without_wall_time(&full);
    verdict(
        first.executed == 9 && second.already_done == 9 && second.executed == total - 9 && same,
        format!(
            "{total} jobs: interrupted after {}, resume ran {} (skipped {}), final file matches uninterrupted run: {same}",
            first.executed, second.executed, second.already_done
        ),
    )
}

fn main() -> ExitCode {
    // (number, name, empirical, check)
    let criteria: [(usize, &str, bool, fn(&mut Context) -> Verdict); 9] = [
        (1, "oracle/generator agreement", false, criterion_1),
        (2, "gradient fidelity", false, criterion_2),
        (3, "metric identities", false, criterion_3),
        (4, "SL k=1 training sanity", false, criterion_4),
        (5, "recurrence advantage grows with complexity", true, criterion_5),
        (6, "input size interacts with complexity", true, criterion_6),
        (7, "lamination neutrality", true, criterion_7),
        (8, "determinism", false, criterion_8),
        (9, "resume correctness", false, criterion_9),
    ];
    let strict = std::env::var("AGL_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut ctx = Context { dir: tempfile::tempdir().unwrap(), scaled: None };
    let (mut gating, mut reported) = (0, 0);
    for (n, name, empirical, run) in criteria {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let started = Instant::now();
        let v = run(&mut ctx);
        if !v.pass {
            if empirical && !strict {
                reported += 1;
            } else {
                gating += 1;
            }
        }
        println!(
            "{} criterion {n} ({name}): {} [{:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            started.elapsed().as_secs_f64()
        );
    }
    if reported > 0 {
        println!("{reported} empirical criteria failed (reported, not gating)");
    }
    if gating == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{gating} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
