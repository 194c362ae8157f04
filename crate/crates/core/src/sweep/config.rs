//! Flat `key = value` sweep configuration.
//!
//! ```text
//! # comment
//! architectures = FFN, GRU
//! neurons = 32..512/32        # inclusive range with step
//! depths = 1, 2
//! laminations = 1, 2
//! windows = 1..12
//! levels = SL:2, MSO, CS      # a bare level expands to every valid k
//! instance_seeds = 1
//! replicate_seeds = 1..5
//! per_class = 500
//! train_fraction = 0.8
//! eval_stride = 1             # or "none"
//! candidate = tanh
//! ```
//!
//! Keys not given keep their [`SweepGrid::default`] values.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grammar::Level;
use crate::nn::{Architecture, Candidate};

use super::SweepGrid;

/// Parses `"1, 2, 4..8, 32..512/32"` into a list.
pub fn parse_int_list<T>(text: &str) -> Result<Vec<T>>
where
    T: FromStr + Copy + TryFrom<u64>,
{
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, rest)) = item.split_once("..") {
            let (hi, step) = match rest.split_once('/') {
                Some((hi, step)) => (hi, step),
                None => (rest, "1"),
            };
            let lo = parse_u64(lo)?;
            let hi = parse_u64(hi)?;
            let step = parse_u64(step)?;
            if step == 0 || lo > hi {
                return Err(Error::param(format!("bad range {item:?}")));
            }
            let mut v = lo;
            while v <= hi {
                out.push(convert(v)?);
                v += step;
            }
        } else {
            out.push(convert(parse_u64(item)?)?);
        }
    }
    if out.is_empty() {
        return Err(Error::param(format!("empty list {text:?}")));
    }
    Ok(out)
}

fn parse_u64(s: &str) -> Result<u64> {
    s.trim()
        .parse()
        .map_err(|_| Error::param(format!("{s:?} is not a non-negative integer")))
}

fn convert<T: TryFrom<u64>>(v: u64) -> Result<T> {
    T::try_from(v).map_err(|_| Error::param(format!("{v} out of range")))
}

/// Parses `"SL:2, MSO, CS"`; a bare level expands to all valid k, `all`
/// to every level.
pub fn parse_levels(text: &str) -> Result<Vec<(Level, usize)>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if item.eq_ignore_ascii_case("all") {
            for level in Level::ALL {
                out.extend(level.valid_k().iter().map(|&k| (level, k)));
            }
            continue;
        }
        match item.split_once(':') {
            Some((level, k)) => {
                let level: Level = level.parse()?;
                let k = level.normalize_k(parse_u64(k)? as usize)?;
                out.push((level, k));
            }
            None => {
                let level: Level = item.parse()?;
                out.extend(level.valid_k().iter().map(|&k| (level, k)));
            }
        }
    }
    if out.is_empty() {
        return Err(Error::param(format!("empty level list {text:?}")));
    }
    Ok(out)
}

pub fn parse_architectures(text: &str) -> Result<Vec<Architecture>> {
    let archs = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Architecture>>>()?;
    if archs.is_empty() {
        return Err(Error::param("empty architecture list"));
    }
    Ok(archs)
}

/// Applies one `key = value` setting to `grid`.
pub fn apply_setting(grid: &mut SweepGrid, key: &str, value: &str) -> Result<()> {
    match key {
        "architectures" => grid.architectures = parse_architectures(value)?,
        "neurons" => grid.neurons = parse_int_list(value)?,
        "depths" => grid.depths = parse_int_list(value)?,
        "laminations" => grid.laminations = parse_int_list(value)?,
        "windows" => grid.windows = parse_int_list(value)?,
        "levels" => grid.levels = parse_levels(value)?,
        "instance_seeds" => grid.instance_seeds = parse_int_list(value)?,
        "replicate_seeds" => grid.replicate_seeds = parse_int_list(value)?,
        "per_class" => grid.per_class = convert(parse_u64(value)?)?,
        "train_fraction" => {
            grid.train_fraction = value
                .parse()
                .map_err(|_| Error::param(format!("{value:?} is not a number")))?
        }
        "eval_stride" => {
            grid.train.eval_stride = if value.eq_ignore_ascii_case("none") {
                None
            } else {
                Some(convert(parse_u64(value)?)?)
            }
        }
        "candidate" => grid.candidate = value.parse::<Candidate>()?,
        _ => return Err(Error::param(format!("unknown setting {key:?}"))),
    }
    Ok(())
}

pub fn parse_config(text: &str) -> Result<SweepGrid> {
    let mut grid = SweepGrid::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: n + 1, message };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(format!("expected key = value, got {line:?}")))?;
        apply_setting(&mut grid, key.trim(), value.trim()).map_err(|e| match e {
            Error::Parameter(m) => parse_err(m),
            other => other,
        })?;
    }
    Ok(grid)
}
