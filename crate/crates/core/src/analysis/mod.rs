//! Grouped summaries of sweep results with percentile-bootstrap intervals,
//! and plot files built from them.

mod plot;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::grammar::Level;
use crate::nn::Architecture;
use crate::seed::{derive_seed, rng_from_seed};
use crate::sweep::ERROR_MARKER;
use crate::train::RESULTS_HEADER;

pub use plot::{emit_plots, figure_analogues, FigureSpec, PlotOutput};

pub const DEFAULT_RESAMPLES: usize = 10_000;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// One successful results row.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub level: Level,
    pub k: usize,
    pub instance_seed: u64,
    pub architecture: Architecture,
    pub neurons: usize,
    pub depth: usize,
    pub laminations: usize,
    pub window: usize,
    pub split_seed: u64,
    pub init_seed: u64,
    pub brier: f64,
    pub percent_correct: f64,
    pub epochs_run: usize,
    pub stopped_early: bool,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultSet {
    pub rows: Vec<ResultRow>,
    /// Error-marker rows skipped while reading.
    pub excluded: usize,
}

fn field<T: FromStr>(record: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    record[i].parse().map_err(|_| Error::Parse {
        line,
        message: format!("column {} has bad value {:?}", i + 1, &record[i]),
    })
}

fn parse_row(f: &csv::StringRecord, line: usize) -> Result<ResultRow> {
    let level: Level = f[0].parse().map_err(|_| Error::Parse { line, message: format!("unknown level {:?}", &f[0]) })?;
    let architecture: Architecture = f[3]
        .parse()
        .map_err(|_| Error::Parse { line, message: format!("unknown architecture {:?}", &f[3]) })?;
    Ok(ResultRow {
        level,
        k: field(f, 1, line)?,
        instance_seed: field(f, 2, line)?,
        architecture,
        neurons: field(f, 4, line)?,
        depth: field(f, 5, line)?,
        laminations: field(f, 6, line)?,
        window: field(f, 7, line)?,
        split_seed: field(f, 8, line)?,
        init_seed: field(f, 9, line)?,
        brier: field(f, 10, line)?,
        percent_correct: field(f, 11, line)?,
        epochs_run: field(f, 12, line)?,
        stopped_early: field(f, 13, line)?,
        wall_time: field(f, 14, line)?,
    })
}

/// Reads a results CSV, skipping and counting error-marker rows.
pub fn read_results<R: BufRead>(input: R) -> Result<ResultSet> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    if reader.headers()?.iter().ne(RESULTS_HEADER.split(',')) {
        return Err(Error::Parse { line: 1, message: "missing results header".into() });
    }
    let mut set = ResultSet::default();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.get(10) == Some(ERROR_MARKER) {
            set.excluded += 1;
        } else {
            set.rows.push(parse_row(&record, line)?);
        }
    }
    Ok(set)
}

/// A grouping column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Factor {
    Architecture,
    Level,
    K,
    Laminations,
    Window,
    Neurons,
    Depth,
}

impl Factor {
    pub const ALL: [Factor; 7] = [
        Factor::Architecture,
        Factor::Level,
        Factor::K,
        Factor::Laminations,
        Factor::Window,
        Factor::Neurons,
        Factor::Depth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Factor::Architecture => "architecture",
            Factor::Level => "level",
            Factor::K => "k",
            Factor::Laminations => "laminations",
            Factor::Window => "window",
            Factor::Neurons => "neurons",
            Factor::Depth => "depth",
        }
    }

    /// `(rank, label)` for a row; ranks give the natural order (hierarchy
    /// order for levels, FFN/RNN/GRU for architectures, numeric otherwise).
    fn value(self, row: &ResultRow) -> (u64, String) {
        match self {
            Factor::Architecture => (
                Architecture::ALL.iter().position(|&a| a == row.architecture).unwrap_or(0) as u64,
                row.architecture.to_string(),
            ),
            Factor::Level => (
                Level::ALL.iter().position(|&l| l == row.level).unwrap_or(0) as u64,
                row.level.to_string(),
            ),
            Factor::K => (row.k as u64, row.k.to_string()),
            Factor::Laminations => (row.laminations as u64, row.laminations.to_string()),
            Factor::Window => (row.window as u64, row.window.to_string()),
            Factor::Neurons => (row.neurons as u64, row.neurons.to_string()),
            Factor::Depth => (row.depth as u64, row.depth.to_string()),
        }
    }

    /// Rank of a label as written in a summary file.
    fn rank_of(self, label: &str) -> Result<u64> {
        let bad = || Error::param(format!("bad {} value {label:?}", self.name()));
        match self {
            Factor::Architecture => {
                let a: Architecture = label.parse()?;
                Ok(Architecture::ALL.iter().position(|&x| x == a).unwrap_or(0) as u64)
            }
            Factor::Level => {
                let l: Level = label.parse()?;
                Ok(Level::ALL.iter().position(|&x| x == l).unwrap_or(0) as u64)
            }
            _ => label.parse().map_err(|_| bad()),
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Factor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let s = if s == "arch" { "architecture" } else { s.as_str() };
        Factor::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::param(format!("unknown factor {s:?}")))
    }
}

/// Parses a comma-separated factor list such as `"architecture,level"`.
pub fn parse_factors(text: &str) -> Result<Vec<Factor>> {
    let factors = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Factor>>>()?;
    if factors.is_empty() {
        return Err(Error::param("no grouping factors given"));
    }
    Ok(factors)
}

/// Percentile bootstrap interval for the mean of `values`. Bounds are kept
/// within the sample range and on either side of the sample mean.
pub fn bootstrap_interval<R: Rng + ?Sized>(
    values: &[f64],
    resamples: usize,
    level: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::input("bootstrap of an empty list"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param(format!("confidence level {level} not in (0, 1)")));
    }
    if resamples == 0 {
        return Err(Error::param("resamples must be positive"));
    }
    let n = values.len();
    let (lo_v, hi_v) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.gen_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    let at = |q: f64| means[(q * (resamples - 1) as f64).round() as usize];
    let mean = mean_of(values);
    let lower = at(alpha).clamp(lo_v, hi_v).min(mean);
    let upper = at(1.0 - alpha).clamp(lo_v, hi_v).max(mean);
    Ok((lower, upper))
}

/// Arithmetic mean, clamped to the sample range against rounding drift.
fn mean_of(values: &[f64]) -> f64 {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    (values.iter().sum::<f64>() / values.len() as f64).clamp(lo, hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    /// One label per grouping factor.
    pub values: Vec<String>,
    pub count: usize,
    pub mean_percent: f64,
    pub percent_lower: f64,
    pub percent_upper: f64,
    pub mean_brier: f64,
    pub brier_lower: f64,
    pub brier_upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub factors: Vec<Factor>,
    /// Groups in natural factor order.
    pub groups: Vec<GroupSummary>,
    pub bootstrap_seed: u64,
    pub resamples: usize,
    pub level: f64,
    /// Error rows left out of the summary.
    pub excluded: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapOptions {
    pub seed: u64,
    pub resamples: usize,
    pub level: f64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions { seed: 0, resamples: DEFAULT_RESAMPLES, level: DEFAULT_CONFIDENCE }
    }
}

/// Groups rows by `factors` and summarizes each group. Each group's
/// bootstrap stream is seeded from the group labels and its values are
/// sorted first, so the result does not depend on row order.
pub fn aggregate(results: &ResultSet, factors: &[Factor], options: &BootstrapOptions) -> Result<SummaryTable> {
    if factors.is_empty() {
        return Err(Error::param("no grouping factors given"));
    }
    let mut groups: BTreeMap<Vec<(u64, String)>, Vec<&ResultRow>> = BTreeMap::new();
    for row in &results.rows {
        let key = factors.iter().map(|f| f.value(row)).collect();
        groups.entry(key).or_default().push(row);
    }
    let mut out = Vec::with_capacity(groups.len());
    for (key, rows) in groups {
        let values: Vec<String> = key.into_iter().map(|(_, label)| label).collect();
        let mut percent: Vec<f64> = rows.iter().map(|r| r.percent_correct).collect();
        let mut brier: Vec<f64> = rows.iter().map(|r| r.brier).collect();
        percent.sort_by(f64::total_cmp);
        brier.sort_by(f64::total_cmp);
        let seed = derive_seed(options.seed, &format!("group:{}", values.join("|")));
        let mut rng = rng_from_seed(seed);
        let (percent_lower, percent_upper) = bootstrap_interval(&percent, options.resamples, options.level, &mut rng)?;
        let (brier_lower, brier_upper) = bootstrap_interval(&brier, options.resamples, options.level, &mut rng)?;
        out.push(GroupSummary {
            values,
            count: rows.len(),
            mean_percent: mean_of(&percent),
            percent_lower,
            percent_upper,
            mean_brier: mean_of(&brier),
            brier_lower,
            brier_upper,
        });
    }
    Ok(SummaryTable {
        factors: factors.to_vec(),
        groups: out,
        bootstrap_seed: options.seed,
        resamples: options.resamples,
        level: options.level,
        excluded: results.excluded,
    })
}

const SUMMARY_COLUMNS: &str =
    "count,mean_percent,percent_lower,percent_upper,mean_brier,brier_lower,brier_upper";

impl SummaryTable {
    /// Writes the summary as CSV:
    ///
    /// ```text
    /// # bootstrap_seed=0 resamples=10000 level=0.95 excluded=0
    /// architecture,level,count,mean_percent,...,brier_upper
    /// GRU,CS,10,97.1,...
    /// ```
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# bootstrap_seed={} resamples={} level={:?} excluded={}",
            self.bootstrap_seed, self.resamples, self.level, self.excluded
        )?;
        let names: Vec<&str> = self.factors.iter().map(|f| f.name()).collect();
        writeln!(out, "{},{SUMMARY_COLUMNS}", names.join(","))?;
        for g in &self.groups {
            writeln!(
                out,
                "{},{},{:?},{:?},{:?},{:?},{:?},{:?}",
                g.values.join(","),
                g.count,
                g.mean_percent,
                g.percent_lower,
                g.percent_upper,
                g.mean_brier,
                g.brier_lower,
                g.brier_upper
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(mut input: R) -> Result<SummaryTable> {
        let perr = |line: usize, message: String| Error::Parse { line, message };

        let mut meta = String::new();
        if input.read_line(&mut meta)? == 0 {
            return Err(perr(1, "empty summary".into()));
        }
        let mut seed = None;
        let mut resamples = None;
        let mut level = None;
        let mut excluded = None;
        for item in meta.trim().trim_start_matches('#').split_whitespace() {
            let (k, v) = item.split_once('=').ok_or_else(|| perr(1, format!("bad metadata {item:?}")))?;
            let bad = || perr(1, format!("bad metadata value {item:?}"));
            match k {
                "bootstrap_seed" => seed = Some(v.parse().map_err(|_| bad())?),
                "resamples" => resamples = Some(v.parse().map_err(|_| bad())?),
                "level" => level = Some(v.parse().map_err(|_| bad())?),
                "excluded" => excluded = Some(v.parse().map_err(|_| bad())?),
                _ => return Err(perr(1, format!("unknown metadata key {k:?}"))),
            }
        }
        let missing = || perr(1, "incomplete metadata line".into());

        let mut reader = csv::ReaderBuilder::new().from_reader(input);
        let header = reader.headers()?.clone();
        let nf = header.len().saturating_sub(SUMMARY_COLUMNS.split(',').count());
        if nf == 0 || header.iter().skip(nf).ne(SUMMARY_COLUMNS.split(',')) {
            return Err(perr(2, "unexpected summary header".into()));
        }
        let factors = header
            .iter()
            .take(nf)
            .map(str::parse)
            .collect::<Result<Vec<Factor>>>()
            .map_err(|e| perr(2, e.to_string()))?;

        let mut groups = Vec::new();
        for record in reader.records() {
            let f = record?;
            // Line numbers restart after the metadata line.
            let line = f.position().map_or(0, |p| p.line() as usize + 1);
            let num = |j: usize| -> Result<f64> {
                f[j].parse().map_err(|_| perr(line, format!("bad number {:?}", &f[j])))
            };
            groups.push(GroupSummary {
                values: f.iter().take(nf).map(str::to_string).collect(),
                count: f[nf].parse().map_err(|_| perr(line, format!("bad count {:?}", &f[nf])))?,
                mean_percent: num(nf + 1)?,
                percent_lower: num(nf + 2)?,
                percent_upper: num(nf + 3)?,
                mean_brier: num(nf + 4)?,
                brier_lower: num(nf + 5)?,
                brier_upper: num(nf + 6)?,
            });
        }
        Ok(SummaryTable {
            factors,
            groups,
            bootstrap_seed: seed.ok_or_else(missing)?,
            resamples: resamples.ok_or_else(missing)?,
            level: level.ok_or_else(missing)?,
            excluded: excluded.ok_or_else(missing)?,
        })
    }

    /// The group whose labels equal `values`, if present.
    pub fn group(&self, values: &[&str]) -> Option<&GroupSummary> {
        self.groups.iter().find(|g| g.values.iter().map(String::as_str).eq(values.iter().copied()))
    }

    /// Distinct labels of factor `i` in natural order.
    pub fn levels_of(&self, i: usize) -> Vec<String> {
        let factor = self.factors[i];
        let mut labels: Vec<(u64, String)> = Vec::new();
        for g in &self.groups {
            let label = &g.values[i];
            if !labels.iter().any(|(_, l)| l == label) {
                labels.push((factor.rank_of(label).unwrap_or(u64::MAX), label.clone()));
            }
        }
        labels.sort();
        labels.into_iter().map(|(_, l)| l).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_interval_is_degenerate() {
        let v = [0.1; 7];
        let (lo, hi) = bootstrap_interval(&v, 500, 0.95, &mut rng_from_seed(1)).unwrap();
        assert_eq!((lo, hi), (0.1, 0.1));
    }

    #[test]
    fn two_point_interval_spans_range() {
        let (lo, hi) = bootstrap_interval(&[0.0, 100.0], 10_000, 0.95, &mut rng_from_seed(2)).unwrap();
        assert_eq!((lo, hi), (0.0, 100.0));
    }

    #[test]
    fn bootstrap_errors() {
        let mut rng = rng_from_seed(0);
        assert!(matches!(bootstrap_interval(&[], 10, 0.95, &mut rng), Err(Error::Input(_))));
        assert!(matches!(bootstrap_interval(&[1.0], 10, 1.0, &mut rng), Err(Error::Parameter(_))));
        assert!(matches!(bootstrap_interval(&[1.0], 0, 0.5, &mut rng), Err(Error::Parameter(_))));
    }

    #[test]
    fn factor_names() {
        assert_eq!("arch".parse::<Factor>().unwrap(), Factor::Architecture);
        assert_eq!(parse_factors("level, window").unwrap(), vec![Factor::Level, Factor::Window]);
        assert!(matches!("colour".parse::<Factor>(), Err(Error::Parameter(_))));
    }
}
