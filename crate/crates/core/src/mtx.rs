//! Matrix Market I/O for real symmetric matrices.
//!
//! The writer always emits the dense symmetric layout:
//!
//! ```text
//! %%MatrixMarket matrix array real symmetric
//! % optional comment lines
//! M M
//! a11
//! a21
//! ...            (lower triangle, column by column)
//! ```
//!
//! with one value per line in 17-significant-digit scientific notation and
//! LF line endings, so that `load(save(A)) == A` bit for bit.
//!
//! The reader accepts `array` and `coordinate` formats with `real`,
//! `double` or `integer` fields and `symmetric` or `general` symmetry.
//! General files must actually be symmetric.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::MtxError;
use crate::linalg::SymMatrix;

/// Largest matrix order the reader will allocate.
pub const MAX_ORDER: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Array,
    Coordinate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    Symmetric,
    General,
}

fn err(line: usize, message: impl Into<String>) -> MtxError {
    MtxError::Parse {
        line,
        message: message.into(),
    }
}

/// Serializes `m`; each entry of `comments` becomes a `% ` line.
pub fn write_matrix_market(m: &SymMatrix, comments: &[String]) -> String {
    let n = m.order();
    let mut out = String::with_capacity(24 * n * (n + 1) / 2 + 128);
    out.push_str("%%MatrixMarket matrix array real symmetric\n");
    for c in comments {
        for line in c.lines() {
            out.push_str("% ");
            out.push_str(line);
            out.push('\n');
        }
    }
    let _ = writeln!(out, "{n} {n}");
    for j in 0..n {
        for i in j..n {
            let _ = writeln!(out, "{:.16e}", m.get(i, j));
        }
    }
    out
}

pub fn save_matrix(m: &SymMatrix, path: impl AsRef<Path>) -> Result<(), MtxError> {
    save_matrix_with_comments(m, &[], path)
}

pub fn save_matrix_with_comments(
    m: &SymMatrix,
    comments: &[String],
    path: impl AsRef<Path>,
) -> Result<(), MtxError> {
    fs::write(path, write_matrix_market(m, comments))?;
    Ok(())
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<SymMatrix, MtxError> {
    let text = fs::read_to_string(path)?;
    parse_matrix_market(&text)
}

fn parse_header(line: &str) -> Result<(Format, Symmetry), MtxError> {
    let tokens: Vec<String> = line.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(err(1, "header must start with %%MatrixMarket"));
    }
    if tokens.len() != 5 {
        return Err(err(1, "header must read: %%MatrixMarket matrix <format> <field> <symmetry>"));
    }
    if tokens[1] != "matrix" {
        return Err(err(1, format!("unsupported object '{}'", tokens[1])));
    }
    let format = match tokens[2].as_str() {
        "array" => Format::Array,
        "coordinate" => Format::Coordinate,
        other => return Err(err(1, format!("unsupported format '{other}'"))),
    };
    match tokens[3].as_str() {
        "real" | "double" | "integer" => {}
        other => return Err(err(1, format!("unsupported field '{other}'"))),
    }
    let symmetry = match tokens[4].as_str() {
        "symmetric" => Symmetry::Symmetric,
        "general" => Symmetry::General,
        other => return Err(err(1, format!("unsupported symmetry '{other}'"))),
    };
    Ok((format, symmetry))
}

fn parse_value(token: &str, line: usize) -> Result<f64, MtxError> {
    let v: f64 = token
        .parse()
        .map_err(|_| err(line, format!("invalid number '{token}'")))?;
    if !v.is_finite() {
        return Err(err(line, format!("non-finite value '{token}'")));
    }
    Ok(v)
}

fn parse_index(token: &str, order: usize, line: usize) -> Result<usize, MtxError> {
    let i: usize = token
        .parse()
        .map_err(|_| err(line, format!("invalid index '{token}'")))?;
    if i == 0 || i > order {
        return Err(err(line, format!("index {i} out of range 1..={order}")));
    }
    Ok(i - 1)
}

/// Parses a Matrix Market document into a symmetric matrix.
pub fn parse_matrix_market(text: &str) -> Result<SymMatrix, MtxError> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file"))?;
    let (format, symmetry) = parse_header(header)?;

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });

    let (size_line, size) = body.next().ok_or_else(|| err(1, "missing size line"))?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    let expected_dims = if format == Format::Array { 2 } else { 3 };
    if dims.len() != expected_dims {
        return Err(err(size_line, format!("size line must have {expected_dims} integers")));
    }
    let parse_dim = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| err(size_line, format!("invalid dimension '{t}'")))
    };
    let rows = parse_dim(dims[0])?;
    let cols = parse_dim(dims[1])?;
    if rows != cols {
        return Err(err(size_line, format!("matrix must be square, got {rows}x{cols}")));
    }
    if rows == 0 || rows > MAX_ORDER {
        return Err(err(size_line, format!("order {rows} outside 1..={MAX_ORDER}")));
    }
    let n = rows;

    match format {
        Format::Array => {
            let expected = match symmetry {
                Symmetry::Symmetric => n * (n + 1) / 2,
                Symmetry::General => n * n,
            };
            let mut values = Vec::new();
            let mut last_line = size_line;
            for (line, l) in body {
                last_line = line;
                for tok in l.split_whitespace() {
                    if values.len() == expected {
                        return Err(err(
                            line,
                            format!("more than the {expected} entries declared by a {n}x{n} {symmetry:?} array"),
                        ));
                    }
                    values.push(parse_value(tok, line)?);
                }
            }
            if values.len() != expected {
                return Err(err(
                    last_line,
                    format!("expected {expected} entries for a {n}x{n} {symmetry:?} array, found {}", values.len()),
                ));
            }
            let mut m = SymMatrix::zeros(n);
            match symmetry {
                Symmetry::Symmetric => {
                    let mut k = 0;
                    for j in 0..n {
                        for i in j..n {
                            m.set_sym(i, j, values[k]);
                            k += 1;
                        }
                    }
                    Ok(m)
                }
                Symmetry::General => {
                    let mut row_major = vec![0.0; n * n];
                    for j in 0..n {
                        for i in 0..n {
                            row_major[i * n + j] = values[j * n + i];
                        }
                    }
                    SymMatrix::from_row_major(n, row_major)
                        .map_err(|e| err(last_line, format!("general matrix rejected: {e}")))
                }
            }
        }
        Format::Coordinate => {
            let nnz = dims[2]
                .parse::<usize>()
                .map_err(|_| err(size_line, format!("invalid entry count '{}'", dims[2])))?;
            let mut row_major = vec![0.0; n * n];
            let mut seen = vec![false; n * n];
            let mut count = 0;
            let mut last_line = size_line;
            for (line, l) in body {
                last_line = line;
                let toks: Vec<&str> = l.split_whitespace().collect();
                if toks.len() != 3 {
                    return Err(err(line, "coordinate entry must read: row col value"));
                }
                if count == nnz {
                    return Err(err(line, format!("more than the {nnz} declared entries")));
                }
                let i = parse_index(toks[0], n, line)?;
                let j = parse_index(toks[1], n, line)?;
                let v = parse_value(toks[2], line)?;
                if symmetry == Symmetry::Symmetric && i < j {
                    return Err(err(line, "upper-triangle entry in a symmetric file"));
                }
                if seen[i * n + j] {
                    return Err(err(line, format!("duplicate entry ({}, {})", i + 1, j + 1)));
                }
                seen[i * n + j] = true;
                row_major[i * n + j] = v;
                if symmetry == Symmetry::Symmetric {
                    row_major[j * n + i] = v;
                }
                count += 1;
            }
            if count != nnz {
                return Err(err(last_line, format!("expected {nnz} entries, found {count}")));
            }
            SymMatrix::from_row_major(n, row_major)
                .map_err(|e| err(last_line, format!("matrix rejected: {e}")))
        }
    }
}
