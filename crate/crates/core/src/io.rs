//! Plain-text matrix serialization shared by the model-exchange and
//! calibration files. Numbers are written in Rust's shortest round-trip form,
//! so a write/read cycle is lossless.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub(crate) fn write_rows<W: Write>(w: &mut W, m: &DMatrix<f64>) -> Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:e}")).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Write a labeled section: `section,<name>,<rows>,<cols>` followed by the rows.
pub fn write_section<W: Write>(w: &mut W, name: &str, m: &DMatrix<f64>) -> Result<()> {
    writeln!(w, "section,{name},{},{}", m.nrows(), m.ncols())?;
    write_rows(w, m)
}

/// Line-oriented reader with 1-based line numbers for diagnostics.
pub struct LineReader<R> {
    inner: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> LineReader<R> {
    pub fn new(r: R) -> Self {
        Self {
            inner: r.lines(),
            line_no: 0,
        }
    }

    pub fn next_line(&mut self) -> Result<Option<String>> {
        match self.inner.next() {
            None => Ok(None),
            Some(line) => {
                self.line_no += 1;
                Ok(Some(line?))
            }
        }
    }

    pub fn expect_line(&mut self) -> Result<String> {
        self.next_line()?.ok_or_else(|| {
            Error::Parse(format!(
                "unexpected end of file after line {}",
                self.line_no
            ))
        })
    }

    pub fn line_no(&self) -> usize {
        self.line_no
    }

    /// Read a `key,value` line and return the parsed value.
    pub fn keyed<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let line = self.expect_line()?;
        let mut parts = line.splitn(2, ',');
        let k = parts.next().unwrap_or("").trim();
        let v = parts.next().unwrap_or("").trim();
        if k != key {
            return Err(Error::Parse(format!(
                "line {}: expected key `{key}`, found `{k}`",
                self.line_no
            )));
        }
        v.parse().map_err(|_| {
            Error::Parse(format!(
                "line {}: bad value `{v}` for `{key}`",
                self.line_no
            ))
        })
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(rows, cols);
        for i in 0..rows {
            let line = self.expect_line()?;
            let vals = parse_row(&line, self.line_no)?;
            if vals.len() != cols {
                return Err(Error::Parse(format!(
                    "line {}: expected {cols} values, found {}",
                    self.line_no,
                    vals.len()
                )));
            }
            for (j, v) in vals.into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    /// Read a section header written by [`write_section`] and its rows.
    pub fn section(&mut self) -> Result<Option<(String, DMatrix<f64>)>> {
        let line = loop {
            match self.next_line()? {
                None => return Ok(None),
                Some(l) if l.trim().is_empty() => continue,
                Some(l) => break l,
            }
        };
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 4 || parts[0] != "section" {
            return Err(Error::Parse(format!(
                "line {}: expected `section,<name>,<rows>,<cols>`",
                self.line_no
            )));
        }
        let bad = |_| Error::Parse(format!("line {}: bad section size", self.line_no));
        let rows: usize = parts[2].parse().map_err(bad)?;
        let cols: usize = parts[3].parse().map_err(bad)?;
        let name = parts[1].to_string();
        Ok(Some((name, self.matrix(rows, cols)?)))
    }
}

pub(crate) fn parse_row(line: &str, line_no: usize) -> Result<Vec<f64>> {
    if line.trim().is_empty() {
        return Ok(Vec::new());
    }
    line.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {line_no}: bad number `{}`", s.trim())))
        })
        .collect()
}

/// Format with `digits` significant digits in scientific notation.
pub fn sig(v: f64, digits: usize) -> String {
    format!("{:.*e}", digits.saturating_sub(1), v)
}
