//! MatrixMarket reader and writer for dense real general matrices.
//!
//! Both the `array` (dense, column-major) and `coordinate` (1-based
//! triplets) layouts are read; matrices are always written as `array`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use qrdm_core::DenseMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MmError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_err(line: usize, msg: impl Into<String>) -> MmError {
    MmError::Parse {
        line,
        msg: msg.into(),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Layout {
    Array,
    Coordinate,
}

fn parse_header(line: &str, lineno: usize) -> Result<Layout, MmError> {
    let words: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(parse_err(lineno, "expected `%%MatrixMarket matrix <layout> real general`"));
    }
    let layout = match words[2].as_str() {
        "array" => Layout::Array,
        "coordinate" => Layout::Coordinate,
        other => return Err(parse_err(lineno, format!("unsupported layout {other:?}"))),
    };
    if words[3] != "real" {
        return Err(parse_err(lineno, format!("field {:?} is not real", words[3])));
    }
    if words[4] != "general" {
        return Err(parse_err(lineno, format!("symmetry {:?} is not general", words[4])));
    }
    Ok(layout)
}

fn parse_usize(tok: &str, lineno: usize, what: &str) -> Result<usize, MmError> {
    tok.parse()
        .map_err(|_| parse_err(lineno, format!("{what} {tok:?} is not a valid count")))
}

fn parse_f64(tok: &str, lineno: usize) -> Result<f64, MmError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(lineno, format!("{tok:?} is not a real number")))?;
    if !v.is_finite() {
        return Err(parse_err(lineno, format!("non-finite value {tok:?}")));
    }
    Ok(v)
}

/// Parses MatrixMarket text from any reader.
pub fn parse_matrix_market(reader: impl Read) -> Result<DenseMatrix, MmError> {
    let mut lines = BufReader::new(reader).lines().enumerate().map(|(i, l)| (i + 1, l));
    let (first_no, first) = match lines.next() {
        Some((no, l)) => (no, l?),
        None => return Err(parse_err(1, "empty file")),
    };
    let layout = parse_header(&first, first_no)?;

    // skip comments and blank lines
    let mut body = lines.filter_map(|(no, l)| match l {
        Ok(s) if s.trim().is_empty() || s.trim_start().starts_with('%') => None,
        other => Some((no, other)),
    });

    let (size_no, size_line) = match body.next() {
        Some((no, l)) => (no, l?),
        None => return Err(parse_err(first_no + 1, "missing size line")),
    };
    let toks: Vec<&str> = size_line.split_whitespace().collect();
    let want = if layout == Layout::Array { 2 } else { 3 };
    if toks.len() != want {
        return Err(parse_err(size_no, format!("size line needs {want} integers")));
    }
    let m = parse_usize(toks[0], size_no, "row count")?;
    let n = parse_usize(toks[1], size_no, "column count")?;
    let total = m
        .checked_mul(n)
        .filter(|&t| t <= isize::MAX as usize / 8)
        .ok_or_else(|| parse_err(size_no, format!("dimensions {m}x{n} overflow")))?;

    let mut data = vec![0.0; total];
    let mut last = size_no;
    match layout {
        Layout::Array => {
            let mut k = 0;
            for (no, line) in body {
                let line = line?;
                last = no;
                for tok in line.split_whitespace() {
                    if k == total {
                        return Err(parse_err(no, format!("more than {total} entries")));
                    }
                    data[k] = parse_f64(tok, no)?;
                    k += 1;
                }
            }
            if k != total {
                return Err(parse_err(last, format!("expected {total} entries, found {k}")));
            }
        }
        Layout::Coordinate => {
            let nnz = parse_usize(toks[2], size_no, "entry count")?;
            let mut seen = 0;
            for (no, line) in body {
                let line = line?;
                last = no;
                let t: Vec<&str> = line.split_whitespace().collect();
                if t.len() != 3 {
                    return Err(parse_err(no, "coordinate entry needs `row col value`"));
                }
                if seen == nnz {
                    return Err(parse_err(no, format!("more than {nnz} entries")));
                }
                let i = parse_usize(t[0], no, "row index")?;
                let j = parse_usize(t[1], no, "column index")?;
                if i == 0 || i > m || j == 0 || j > n {
                    return Err(parse_err(no, format!("index ({i}, {j}) outside {m}x{n}")));
                }
                data[(j - 1) * m + (i - 1)] = parse_f64(t[2], no)?;
                seen += 1;
            }
            if seen != nnz {
                return Err(parse_err(last, format!("expected {nnz} entries, found {seen}")));
            }
        }
    }
    Ok(DenseMatrix::from_col_major(m, n, data).expect("length checked above"))
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<DenseMatrix, MmError> {
    parse_matrix_market(File::open(path)?)
}

/// Writes `a` in array layout. Values use the shortest decimal form that
/// parses back to the same bits.
pub fn format_matrix_market(a: &DenseMatrix, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix array real general")?;
    writeln!(out, "{} {}", a.rows(), a.cols())?;
    for v in a.data() {
        writeln!(out, "{v:e}")?;
    }
    out.flush()
}

pub fn write_matrix_market(a: &DenseMatrix, path: impl AsRef<Path>) -> std::io::Result<()> {
    format_matrix_market(a, BufWriter::new(File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<DenseMatrix, MmError> {
        parse_matrix_market(s.as_bytes())
    }

    fn err_line(s: &str) -> usize {
        match parse(s) {
            Err(MmError::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn array_is_column_major() {
        let a = parse("%%MatrixMarket matrix array real general\n2 2\n1\n3\n2\n4\n").unwrap();
        assert_eq!(a, DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap());
    }

    #[test]
    fn coordinate_scatters_into_zeros() {
        let a = parse(
            "%%MatrixMarket matrix coordinate real general\n% a comment\n3 2 2\n1 1 5.5\n3 2 -1e-3\n",
        )
        .unwrap();
        let mut want = DenseMatrix::zeros(3, 2);
        want[(0, 0)] = 5.5;
        want[(2, 1)] = -1e-3;
        assert_eq!(a, want);
    }

    #[test]
    fn empty_coordinate_is_zero_matrix() {
        let a = parse("%%MatrixMarket matrix coordinate real general\n4 3 0\n").unwrap();
        assert_eq!(a, DenseMatrix::zeros(4, 3));
    }

    #[test]
    fn header_is_case_insensitive() {
        assert!(parse("%%matrixmarket MATRIX Array REAL General\n1 1\n2\n").is_ok());
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(err_line(""), 1);
        assert_eq!(err_line("%%MatrixMarket matrix array complex general\n1 1\n1 0\n"), 1);
        assert_eq!(err_line("%%MatrixMarket matrix array real symmetric\n1 1\n1\n"), 1);
        assert_eq!(err_line("%%MatrixMarket matrix array real general\n%\n2 x\n"), 3);
        assert_eq!(err_line("%%MatrixMarket matrix array real general\n2 1\n1\nfoo\n"), 4);
        assert_eq!(err_line("%%MatrixMarket matrix array real general\n2 1\n1\n"), 3);
        assert_eq!(err_line("%%MatrixMarket matrix array real general\n1 1\n1\n2\n"), 4);
        assert_eq!(err_line("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n"), 3);
        assert_eq!(err_line("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n"), 3);
        assert_eq!(
            err_line("%%MatrixMarket matrix array real general\n99999999999 99999999999\n"),
            2
        );
        assert_eq!(err_line("%%MatrixMarket matrix array real general\n1 1\nnan\n"), 3);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let vals = [1.0 / 3.0, -0.0, 5e-324, f64::MAX, -1.2345678901234567e-200, 0.1 + 0.2];
        let a = DenseMatrix::from_col_major(3, 2, vals.to_vec()).unwrap();
        let mut buf = Vec::new();
        format_matrix_market(&a, &mut buf).unwrap();
        let b = parse_matrix_market(buf.as_slice()).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}
