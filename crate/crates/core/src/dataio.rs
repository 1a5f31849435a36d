//! Point and matrix ingestion, base distances, and text output formats.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so every
//! `f64` parses back to the identical bit pattern.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::Partition;

/// Whether matrix entries measure distance or affinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Dissimilarity,
    Similarity,
}

impl Mode {
    /// True when `a` is a strictly better (closer) edge than `b`.
    #[inline]
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Mode::Dissimilarity => a < b,
            Mode::Similarity => a > b,
        }
    }
}

/// Field separator of a point file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delimiter {
    Csv,
    Tsv,
}

impl Delimiter {
    fn as_char(self) -> char {
        match self {
            Delimiter::Csv => ',',
            Delimiter::Tsv => '\t',
        }
    }

    /// `.tsv` / `.tab` files are tab separated, everything else comma separated.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("tsv") || ext.eq_ignore_ascii_case("tab") => {
                Delimiter::Tsv
            }
            _ => Delimiter::Csv,
        }
    }
}

/// A set of `n` points of dimension `dim`, with optional ground-truth classes.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    labels: Option<Vec<i64>>,
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>, labels: Option<Vec<i64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::NoCoordinates);
        }
        if coords.is_empty() {
            return Err(Error::Empty);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::LengthMismatch {
                left: coords.len(),
                right: dim,
            });
        }
        if let Some((i, _)) = coords.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: i / dim + 1,
                col: i % dim + 1,
            });
        }
        let n = coords.len() / dim;
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::LengthMismatch {
                    left: l.len(),
                    right: n,
                });
            }
        }
        Ok(Self {
            dim,
            coords,
            labels,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Option<Vec<i64>>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or(Error::Empty)?;
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    expected: dim,
                    found: r.len(),
                });
            }
        }
        Self::new(dim, rows.concat(), labels)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }
}

/// Dense symmetric `n × n` matrix of pairwise dissimilarities or similarities.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    mode: Mode,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Validates symmetry, finiteness, and (for dissimilarities) a zero
    /// diagonal and non-negative entries.
    pub fn new(n: usize, mode: Mode, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        if values.len() != n * n {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: n * n,
            });
        }
        for i in 0..n {
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        row: i + 1,
                        col: j + 1,
                    });
                }
                if mode == Mode::Dissimilarity && (v < 0.0 || (i == j && v != 0.0)) {
                    return Err(Error::Negative {
                        row: i + 1,
                        col: j + 1,
                        value: v,
                    });
                }
                if j > i && v != values[j * n + i] {
                    return Err(Error::Asymmetric {
                        i,
                        j,
                        a: v,
                        b: values[j * n + i],
                    });
                }
            }
        }
        Ok(Self { n, mode, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest entry, including the diagonal.
    pub fn max_entry(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Pairwise Euclidean distances between all points.
pub fn euclidean_matrix(ps: &PointSet) -> DistanceMatrix {
    let n = ps.len();
    let mut values = vec![0.0; n * n];
    values.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let p = ps.point(i);
        for (j, slot) in row.iter_mut().enumerate() {
            if i != j {
                *slot = euclid(p, ps.point(j));
            }
        }
    });
    DistanceMatrix {
        n,
        mode: Mode::Dissimilarity,
        values,
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_number(cell: &str, row: usize, col: usize) -> Result<f64> {
    let v: f64 = cell.trim().parse().map_err(|_| Error::NonNumeric {
        row,
        col,
        cell: cell.trim().to_string(),
    })?;
    if !v.is_finite() {
        return Err(Error::NonFinite { row, col });
    }
    Ok(v)
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Parses point rows. With `has_labels`, the last column is an integer class.
pub fn parse_points(text: &str, delimiter: Delimiter, has_labels: bool) -> Result<PointSet> {
    let sep = delimiter.as_char();
    let mut coords = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    for (row, line) in content_lines(text) {
        let cells: Vec<&str> = line.split(sep).collect();
        let expected = *width.get_or_insert(cells.len());
        if cells.len() != expected {
            return Err(Error::RaggedRow {
                row,
                expected,
                found: cells.len(),
            });
        }
        let ncoord = if has_labels {
            cells.len() - 1
        } else {
            cells.len()
        };
        if ncoord == 0 {
            return Err(Error::NoCoordinates);
        }
        for (c, cell) in cells[..ncoord].iter().enumerate() {
            coords.push(parse_number(cell, row, c + 1)?);
        }
        if has_labels {
            let cell = cells[ncoord].trim();
            let label = cell.parse::<i64>().map_err(|_| Error::BadLabel {
                row,
                cell: cell.to_string(),
            })?;
            labels.push(label);
        }
    }
    let Some(width) = width else {
        return Err(Error::Empty);
    };
    let dim = if has_labels { width - 1 } else { width };
    PointSet::new(dim, coords, has_labels.then_some(labels))
}

pub fn load_points(path: &Path, delimiter: Delimiter, has_labels: bool) -> Result<PointSet> {
    parse_points(&read(path)?, delimiter, has_labels)
}

/// Writes points as comma separated rows, with the label column when present.
pub fn write_points(path: &Path, ps: &PointSet) -> Result<()> {
    let mut out = String::new();
    for (i, p) in ps.iter().enumerate() {
        for (c, v) in p.iter().enumerate() {
            if c > 0 {
                out.push(',');
            }
            write!(out, "{v}").unwrap();
        }
        if let Some(l) = ps.labels() {
            write!(out, ",{}", l[i]).unwrap();
        }
        out.push('\n');
    }
    write(path, &out)
}

/// Parses a dense matrix; cells may be separated by commas and/or whitespace.
///
/// Asymmetric pairs are averaged unless `strict`, in which case a pair that
/// differs by more than `1e-9` is rejected. In dissimilarity mode the
/// diagonal is forced to zero.
pub fn parse_matrix(text: &str, mode: Mode, strict: bool) -> Result<DistanceMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (row, line) in content_lines(text) {
        let cells = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|c| !c.is_empty())
            .enumerate()
            .map(|(c, cell)| parse_number(cell, row, c + 1))
            .collect::<Result<Vec<_>>>()?;
        rows.push(cells);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Empty);
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::NonSquare {
            rows: n,
            row: i + 1,
            cols: r.len(),
        });
    }

    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (rows[i][j], rows[j][i]);
            if mode == Mode::Dissimilarity && a < 0.0 && i != j {
                return Err(Error::Negative {
                    row: i + 1,
                    col: j + 1,
                    value: a,
                });
            }
            if strict && (a - b).abs() > 1e-9 {
                return Err(Error::Asymmetric { i, j, a, b });
            }
            values[i * n + j] = if i == j {
                match mode {
                    Mode::Dissimilarity => 0.0,
                    Mode::Similarity => a,
                }
            } else if a == b {
                a
            } else {
                // symmetric formula so (i, j) and (j, i) agree bit for bit
                0.5 * a + 0.5 * b
            };
        }
    }
    DistanceMatrix::new(n, mode, values)
}

pub fn load_matrix(path: &Path, mode: Mode, strict: bool) -> Result<DistanceMatrix> {
    parse_matrix(&read(path)?, mode, strict)
}

pub fn format_matrix(dm: &DistanceMatrix) -> String {
    let mut out = String::new();
    for i in 0..dm.n() {
        for (j, v) in dm.row(i).iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_matrix(path: &Path, dm: &DistanceMatrix) -> Result<()> {
    write(path, &format_matrix(dm))
}

/// One line per object: `index,label,noise` with the noise flag as 0/1.
pub fn format_partition(labels: &Partition, noise: &[bool]) -> Result<String> {
    if labels.is_empty() {
        return Err(Error::Empty);
    }
    if labels.len() != noise.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: noise.len(),
        });
    }
    let mut out = String::new();
    for (i, (l, f)) in labels.labels().iter().zip(noise).enumerate() {
        writeln!(out, "{i},{l},{}", u8::from(*f)).unwrap();
    }
    Ok(out)
}

pub fn write_partition(path: &Path, labels: &Partition, noise: &[bool]) -> Result<()> {
    write(path, &format_partition(labels, noise)?)
}

/// Reads labels either from the partition format (`index,label,noise`) or
/// from a file holding one integer label per line.
pub fn parse_partition(text: &str) -> Result<Partition> {
    let mut labels = Vec::new();
    for (row, line) in content_lines(text) {
        let cells: Vec<&str> = line.split([',', '\t']).map(str::trim).collect();
        let cell = match cells.len() {
            1 => cells[0],
            3 => cells[1],
            found => {
                return Err(Error::RaggedRow {
                    row,
                    expected: 3,
                    found,
                })
            }
        };
        labels.push(cell.parse::<i64>().map_err(|_| Error::BadLabel {
            row,
            cell: cell.to_string(),
        })?);
    }
    Partition::new(labels)
}

pub fn load_partition(path: &Path) -> Result<Partition> {
    parse_partition(&read(path)?)
}
