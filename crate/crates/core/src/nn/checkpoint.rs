//! Plain-text parameter checkpoints.
//!
//! ```text
//! agl-checkpoint 1
//! architecture GRU
//! neurons 64
//! depth 2
//! laminations 2
//! window 5
//! candidate tanh
//! tensors <count>
//! tensor <name> <rows> <cols>
//! <row 0 values, space separated>
//! ...
//! ```
//!
//! Tensors follow [`Parameters::layout`] order. Values are written in the
//! shortest decimal form that parses back to the identical `f64`.

use std::io::{BufRead, Write};

use ndarray::Array2;

use super::params::Parameters;
use super::NetworkConfig;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &str = "agl-checkpoint 1";

pub fn write_checkpoint<W: Write>(mut out: W, params: &Parameters) -> Result<()> {
    let c = &params.config;
    writeln!(out, "{CHECKPOINT_MAGIC}")?;
    writeln!(out, "architecture {}", c.architecture)?;
    writeln!(out, "neurons {}", c.neurons)?;
    writeln!(out, "depth {}", c.depth)?;
    writeln!(out, "laminations {}", c.laminations)?;
    writeln!(out, "window {}", c.window)?;
    writeln!(out, "candidate {}", c.candidate)?;
    let layout = Parameters::layout(c);
    writeln!(out, "tensors {}", layout.len())?;
    for (info, t) in layout.iter().zip(params.tensors()) {
        writeln!(out, "tensor {} {} {}", info.name, info.rows, info.cols)?;
        for row in t.rows() {
            let values: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", values.join(" "))?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_checkpoint<R: BufRead>(input: R) -> Result<Parameters> {
    let mut lines = input.lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, line)) => Ok((i + 1, line?)),
            None => Err(Error::Parse {
                line: 0,
                message: format!("unexpected end of checkpoint, expected {what}"),
            }),
        }
    };
    let bad = |line: usize, message: String| Error::Parse { line, message };

    let (n, magic) = next("header")?;
    if magic.trim() != CHECKPOINT_MAGIC {
        return Err(bad(n, format!("not a checkpoint: {magic:?}")));
    }
    let mut field = |key: &str| -> Result<(usize, String)> {
        let (n, line) = next(key)?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok((n, v.trim().to_string())),
            _ => Err(bad(n, format!("expected `{key} <value>`, found {line:?}"))),
        }
    };
    let number = |(n, v): (usize, String)| -> Result<usize> {
        v.parse().map_err(|_| bad(n, format!("bad integer {v:?}")))
    };
    let architecture = field("architecture")?.1.parse()?;
    let neurons = number(field("neurons")?)?;
    let depth = number(field("depth")?)?;
    let laminations = number(field("laminations")?)?;
    let window = number(field("window")?)?;
    let candidate = field("candidate")?.1.parse()?;
    let count = number(field("tensors")?)?;
    let config = NetworkConfig::toy(architecture, neurons, depth, laminations, window)?.with_candidate(candidate);
    let layout = Parameters::layout(&config);
    if count != layout.len() {
        return Err(Error::Parse {
            line: 0,
            message: format!("{count} tensors listed, configuration needs {}", layout.len()),
        });
    }
    let mut tensors = Vec::with_capacity(count);
    for info in &layout {
        let (n, header) = next("tensor header")?;
        let expected = format!("tensor {} {} {}", info.name, info.rows, info.cols);
        if header.trim() != expected {
            return Err(bad(n, format!("expected {expected:?}, found {header:?}")));
        }
        let mut data = Vec::with_capacity(info.rows * info.cols);
        for _ in 0..info.rows {
            let (n, row) = next("tensor row")?;
            let values: Vec<f64> = row
                .split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|_| bad(n, format!("bad number {v:?}"))))
                .collect::<Result<_>>()?;
            if values.len() != info.cols {
                return Err(bad(n, format!("expected {} values, found {}", info.cols, values.len())));
            }
            data.extend(values);
        }
        tensors.push(Array2::from_shape_vec((info.rows, info.cols), data).expect("shape checked"));
    }
    Ok(Parameters::from_tensors(config, tensors))
}
