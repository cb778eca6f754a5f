//! Plain-text density matrices.
//!
//! ```text
//! dims 2 2
//! 0.5,0 0,0 0,0 0.5,0
//! 0,0 0,0 0,0 0,0
//! 0,0 0,0 0,0 0,0
//! 0.5,0 0,0 0,0 0.5,0
//! ```
//!
//! The header gives the two local dimensions; each following line is one
//! matrix row of whitespace-separated `re,im` pairs. Blank lines and lines
//! starting with `#` are skipped.

use std::fmt::Write as _;

use thiserror::Error;

use crate::tensor::{c64, hermitian_deviation, ComplexMatrix, SubsystemShape};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateFile {
    pub shape: SubsystemShape,
    pub matrix: ComplexMatrix,
}

impl StateFile {
    pub const DENSITY_TOL: f64 = 1e-8;

    pub fn new(shape: SubsystemShape, matrix: ComplexMatrix) -> Self {
        Self { shape, matrix }
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (header_line, header) = lines.next().ok_or_else(|| err(1, "empty file"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 || fields[0] != "dims" {
            return Err(err(header_line, "expected header `dims <dA> <dB>`"));
        }
        let mut dims = [0usize; 2];
        for (slot, field) in dims.iter_mut().zip(&fields[1..]) {
            *slot = field
                .parse()
                .map_err(|_| err(header_line, format!("invalid dimension `{field}`")))?;
        }
        let shape = SubsystemShape::bipartite(dims[0], dims[1])
            .map_err(|e| err(header_line, e.to_string()))?;
        let n = shape.total();

        let mut matrix = ComplexMatrix::zeros(n, n);
        let mut row = 0;
        for (line, content) in lines {
            if row == n {
                return Err(err(line, format!("more than {n} matrix rows")));
            }
            let entries: Vec<&str> = content.split_whitespace().collect();
            if entries.len() != n {
                return Err(err(
                    line,
                    format!("expected {n} entries, found {}", entries.len()),
                ));
            }
            for (col, entry) in entries.iter().enumerate() {
                matrix[(row, col)] =
                    parse_entry(entry).map_err(|m| err(line, format!("entry {}: {m}", col + 1)))?;
            }
            row += 1;
        }
        if row != n {
            let last = text.lines().count().max(1);
            return Err(err(last, format!("expected {n} matrix rows, found {row}")));
        }
        Ok(Self { shape, matrix })
    }

    /// Hermitian and unit trace within [`Self::DENSITY_TOL`].
    pub fn check_density(&self) -> Result<(), String> {
        let dev = hermitian_deviation(&self.matrix);
        if dev > Self::DENSITY_TOL {
            return Err(format!("matrix is not Hermitian (deviation {dev:e})"));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > Self::DENSITY_TOL || tr.im.abs() > Self::DENSITY_TOL {
            return Err(format!("trace is {tr}, expected 1"));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let dims = self.shape.dims();
        let mut out = format!("dims {} {}\n", dims[0], dims[1]);
        for r in 0..self.matrix.nrows() {
            let row: Vec<String> = (0..self.matrix.ncols())
                .map(|c| {
                    let z = self.matrix[(r, c)];
                    format!("{},{}", z.re, z.im)
                })
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

fn parse_entry(entry: &str) -> Result<crate::tensor::C64, String> {
    let (re, im) = entry
        .split_once(',')
        .ok_or_else(|| format!("`{entry}` is not a `re,im` pair"))?;
    let parse = |s: &str| -> Result<f64, String> {
        let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
        if !v.is_finite() {
            return Err(format!("`{s}` is not finite"));
        }
        Ok(v)
    };
    Ok(c64(parse(re)?, parse(im)?))
}
