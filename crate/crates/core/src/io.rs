//! Plain-text matrix formats.
//!
//! `CMAT v1 <dim>` is followed by `dim * dim` lines of `re im` in row-major
//! order. A `CMAT2 v1` pair file is two such blocks back to back. Floats are written with 17
//! significant digits, which round-trips every `f64`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_cmat(out: &mut String, x: &CMatrix) {
    let d = x.nrows();
    let _ = writeln!(out, "CMAT v1 {d}");
    for i in 0..d {
        for j in 0..d {
            let z = x[(i, j)];
            let _ = writeln!(out, "{} {}", fmt_f64(z.re), fmt_f64(z.im));
        }
    }
}

pub fn cmat_to_string(x: &CMatrix) -> String {
    let mut s = String::new();
    write_cmat(&mut s, x);
    s
}

pub fn cmat2_to_string(a: &CMatrix, b: &CMatrix) -> String {
    let mut s = String::new();
    write_cmat(&mut s, a);
    write_cmat(&mut s, b);
    s
}

/// Line cursor that reports 1-based line numbers in errors.
pub struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    pub fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate(), last: 0 }
    }

    pub fn next_line(&mut self) -> Result<(usize, &'a str)> {
        loop {
            match self.inner.next() {
                Some((i, l)) if l.trim().is_empty() => self.last = i + 1,
                Some((i, l)) => {
                    self.last = i + 1;
                    return Ok((i + 1, l.trim()));
                }
                None => return Err(parse_err(self.last + 1, "unexpected end of input")),
            }
        }
    }

    pub fn expect_end(&mut self) -> Result<()> {
        for (i, l) in self.inner.by_ref() {
            if !l.trim().is_empty() {
                return Err(parse_err(i + 1, "trailing content"));
            }
        }
        Ok(())
    }
}

pub fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub fn parse_header<'a>(lines: &mut Lines<'a>, magic: &str, fields: usize) -> Result<(usize, Vec<usize>)> {
    let (no, line) = lines.next_line()?;
    let mut parts = line.split_whitespace();
    let tag = parts.next().unwrap_or("");
    let version = parts.next().unwrap_or("");
    if tag != magic || version != "v1" {
        return Err(parse_err(no, format!("expected header '{magic} v1', found '{line}'")));
    }
    let nums: Vec<usize> = parts
        .map(|p| p.parse::<usize>().map_err(|_| parse_err(no, format!("bad integer '{p}'"))))
        .collect::<Result<_>>()?;
    if nums.len() != fields {
        return Err(parse_err(no, format!("header expects {fields} integer field(s)")));
    }
    Ok((no, nums))
}

pub fn read_cmat_block(lines: &mut Lines<'_>) -> Result<CMatrix> {
    let (_, nums) = parse_header(lines, "CMAT", 1)?;
    let d = nums[0];
    let mut m = CMatrix::zeros(d, d);
    for k in 0..d * d {
        let (no, line) = lines.next_line()?;
        let mut parts = line.split_whitespace();
        let mut num = |what: &str| -> Result<f64> {
            let p = parts.next().ok_or_else(|| parse_err(no, format!("missing {what} part")))?;
            let v: f64 = p.parse().map_err(|_| parse_err(no, format!("bad number '{p}'")))?;
            if !v.is_finite() {
                return Err(parse_err(no, "non-finite entry"));
            }
            Ok(v)
        };
        let re = num("real")?;
        let im = num("imaginary")?;
        if parts.next().is_some() {
            return Err(parse_err(no, "expected exactly two numbers"));
        }
        m[(k / d, k % d)] = c(re, im);
    }
    Ok(m)
}

pub fn parse_cmat(text: &str) -> Result<CMatrix> {
    let mut lines = Lines::new(text);
    let m = read_cmat_block(&mut lines)?;
    lines.expect_end()?;
    Ok(m)
}

pub fn parse_cmat2(text: &str) -> Result<(CMatrix, CMatrix)> {
    let mut lines = Lines::new(text);
    let a = read_cmat_block(&mut lines)?;
    let b = read_cmat_block(&mut lines)?;
    lines.expect_end()?;
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.nrows() });
    }
    Ok((a, b))
}

pub fn read_cmat(path: &Path) -> Result<CMatrix> {
    parse_cmat(&std::fs::read_to_string(path)?)
}

pub fn read_cmat2(path: &Path) -> Result<(CMatrix, CMatrix)> {
    parse_cmat2(&std::fs::read_to_string(path)?)
}

pub fn write_cmat_file(path: &Path, x: &CMatrix) -> Result<()> {
    Ok(std::fs::write(path, cmat_to_string(x))?)
}

pub fn write_cmat2_file(path: &Path, a: &CMatrix, b: &CMatrix) -> Result<()> {
    Ok(std::fs::write(path, cmat2_to_string(a, b))?)
}
