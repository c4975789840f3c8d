//! Matrix Market exchange.
//!
//! Dense blocks are written in `array real general` format, column-major,
//! one entry per line with 17 significant digits. The reader also accepts
//! `coordinate` files and the `symmetric`/`skew-symmetric` qualifiers.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::fmt::sig17;

pub const ARRAY_HEADER: &str = "%%MatrixMarket matrix array real general";

pub fn write_array<W: Write>(mut w: W, m: &DenseMatrix) -> Result<()> {
    writeln!(w, "{ARRAY_HEADER}")?;
    writeln!(w, "{} {}", m.nrows(), m.ncols())?;
    // nalgebra storage is column-major already
    for x in m.iter() {
        writeln!(w, "{}", sig17(*x))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_array_file(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let f = File::create(path)?;
    write_array(BufWriter::new(f), m)
}

pub fn read_file(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let f = File::open(path)?;
    read(BufReader::new(f))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Layout {
    Array,
    Coordinate,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Field {
    Real,
    Pattern,
}

fn parse_header(line: &str) -> Result<(Layout, Field, Symmetry)> {
    let toks: Vec<String> = line.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" {
        return Err(Error::Parse(format!("bad Matrix Market header: {line:?}")));
    }
    if toks[1] != "matrix" {
        return Err(Error::Parse(format!("unsupported object {:?}", toks[1])));
    }
    let layout = match toks[2].as_str() {
        "array" => Layout::Array,
        "coordinate" => Layout::Coordinate,
        other => return Err(Error::Parse(format!("unsupported format {other:?}"))),
    };
    let field = match toks[3].as_str() {
        "real" | "double" | "integer" => Field::Real,
        "pattern" if layout == Layout::Coordinate => Field::Pattern,
        other => return Err(Error::Parse(format!("unsupported field {other:?}"))),
    };
    let sym = match toks[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(Error::Parse(format!("unsupported symmetry {other:?}"))),
    };
    Ok((layout, field, sym))
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    tok.ok_or_else(|| Error::Parse(format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::Parse(format!("cannot parse {what}")))
}

pub fn read<R: BufRead>(r: R) -> Result<DenseMatrix> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))??;
    let (layout, field, sym) = parse_header(&header)?;

    // data lines without comments or blanks
    let mut data = lines.filter_map(|l| match l {
        Ok(s) => {
            let t = s.trim();
            if t.is_empty() || t.starts_with('%') {
                None
            } else {
                Some(Ok(t.to_string()))
            }
        }
        Err(e) => Some(Err(e)),
    });

    let size_line = data
        .next()
        .ok_or_else(|| Error::Parse("missing size line".into()))??;
    let mut toks = size_line.split_whitespace();
    let rows: usize = parse_num(toks.next(), "row count")?;
    let cols: usize = parse_num(toks.next(), "column count")?;
    if sym != Symmetry::General && rows != cols {
        return Err(Error::Parse("symmetric storage requires a square matrix".into()));
    }
    let mut m = DenseMatrix::zeros(rows, cols);

    match layout {
        Layout::Array => {
            // column-major; symmetric variants store the lower triangle only
            let positions: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| {
                    let start = match sym {
                        Symmetry::General => 0,
                        Symmetry::Symmetric => j,
                        Symmetry::SkewSymmetric => j + 1,
                    };
                    (start..rows).map(move |i| (i, j))
                })
                .collect();
            for &(i, j) in &positions {
                let line = data
                    .next()
                    .ok_or_else(|| Error::Parse("too few array entries".into()))??;
                let v: f64 = parse_num(line.split_whitespace().next(), "entry")?;
                place(&mut m, i, j, v, sym);
            }
        }
        Layout::Coordinate => {
            let nnz: usize = parse_num(toks.next(), "entry count")?;
            for _ in 0..nnz {
                let line = data
                    .next()
                    .ok_or_else(|| Error::Parse("too few coordinate entries".into()))??;
                let mut t = line.split_whitespace();
                let i: usize = parse_num(t.next(), "row index")?;
                let j: usize = parse_num(t.next(), "column index")?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(Error::Parse(format!("index ({i},{j}) out of range")));
                }
                let v = match field {
                    Field::Real => parse_num(t.next(), "entry")?,
                    Field::Pattern => 1.0,
                };
                place(&mut m, i - 1, j - 1, v, sym);
            }
        }
    }
    if let Some(extra) = data.next() {
        let extra = extra?;
        return Err(Error::Parse(format!("trailing data: {extra:?}")));
    }
    crate::dense::ensure_finite(&m)?;
    Ok(m)
}

fn place(m: &mut DenseMatrix, i: usize, j: usize, v: f64, sym: Symmetry) {
    m[(i, j)] = v;
    if i != j {
        match sym {
            Symmetry::General => {}
            Symmetry::Symmetric => m[(j, i)] = v,
            Symmetry::SkewSymmetric => m[(j, i)] = -v,
        }
    }
}
