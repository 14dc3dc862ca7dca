//! Plain-text matrix files.
//!
//! A matrix is written as a header line `rows cols` followed by one line per
//! row of space-separated values. Values use Rust's shortest round-trip
//! formatting, so reading a file back reproduces every `f64` bit for bit.
//! An aggregate checkpoint is `A` then `B` in that format, followed by a
//! trailer line `t r_scalar kappa1 beta`.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array2, ArrayView2};

use crate::error::{read_text, write_file, Error, Result};
use crate::omf::aggregates::{AggregateStats, WeightSchedule};

pub fn format_matrix(m: ArrayView2<f64>) -> String {
    let mut out = String::new();
    write_matrix(&mut out, m);
    out
}

fn write_matrix(out: &mut String, m: ArrayView2<f64>) {
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for row in m.rows() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{v:?}");
        }
        out.push('\n');
    }
}

struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(path: &'a Path, text: &'a str) -> Self {
        Lines {
            path,
            inner: text.lines().enumerate(),
        }
    }

    /// Next non-blank line with its 1-based number.
    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            if !line.trim().is_empty() {
                return Ok((i + 1, line));
            }
        }
        Err(Error::parse(self.path, 0, "unexpected end of file"))
    }

    fn numbers<T: std::str::FromStr>(&mut self, expect: Option<usize>) -> Result<(usize, Vec<T>)> {
        let (no, line) = self.next_line()?;
        let vals = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<T>()
                    .map_err(|_| Error::parse(self.path, no, format!("cannot parse `{tok}`")))
            })
            .collect::<Result<Vec<T>>>()?;
        if let Some(n) = expect {
            if vals.len() != n {
                return Err(Error::parse(
                    self.path,
                    no,
                    format!("expected {n} values, found {}", vals.len()),
                ));
            }
        }
        Ok((no, vals))
    }

    fn matrix(&mut self) -> Result<Array2<f64>> {
        let (_, dims) = self.numbers::<usize>(Some(2))?;
        let (rows, cols) = (dims[0], dims[1]);
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (no, vals) = self.numbers::<f64>(Some(cols))?;
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::parse(self.path, no, "non-finite value"));
            }
            data.extend(vals);
        }
        Ok(Array2::from_shape_vec((rows, cols), data).expect("shape checked"))
    }
}

pub fn parse_matrix(path: &Path, text: &str) -> Result<Array2<f64>> {
    Lines::new(path, text).matrix()
}

pub fn write_matrix_file(path: &Path, m: ArrayView2<f64>) -> Result<()> {
    write_file(path, format_matrix(m))?;
    Ok(())
}

pub fn read_matrix_file(path: &Path) -> Result<Array2<f64>> {
    let text = read_text(path)?;
    parse_matrix(path, &text)
}

pub fn format_checkpoint(stats: &AggregateStats, schedule: &WeightSchedule) -> String {
    let mut out = String::new();
    write_matrix(&mut out, stats.a.view());
    write_matrix(&mut out, stats.b.view());
    let _ = writeln!(
        out,
        "{} {:?} {:?} {:?}",
        stats.t,
        stats.remainder,
        stats.kappa1,
        schedule.beta()
    );
    out
}

pub fn parse_checkpoint(path: &Path, text: &str) -> Result<(AggregateStats, WeightSchedule)> {
    let mut lines = Lines::new(path, text);
    let a = lines.matrix()?;
    let b = lines.matrix()?;
    if a.nrows() != a.ncols() || b.nrows() != a.nrows() {
        return Err(Error::parse(path, 0, "aggregate shapes are inconsistent"));
    }
    let (no, trailer) = lines.numbers::<String>(Some(4))?;
    let bad = |what: &str| Error::parse(path, no, format!("bad {what} in trailer"));
    let t: u64 = trailer[0].parse().map_err(|_| bad("t"))?;
    let remainder: f64 = trailer[1].parse().map_err(|_| bad("r_scalar"))?;
    let kappa1: f64 = trailer[2].parse().map_err(|_| bad("kappa1"))?;
    let beta: f64 = trailer[3].parse().map_err(|_| bad("beta"))?;
    let schedule = WeightSchedule::new(beta).map_err(|_| bad("beta"))?;
    let mut stats = AggregateStats::new(a.nrows(), b.ncols(), kappa1).map_err(|_| bad("kappa1"))?;
    stats.a = a;
    stats.b = b;
    stats.remainder = remainder;
    stats.t = t;
    Ok((stats, schedule))
}
