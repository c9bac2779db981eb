//! Plain-CSV matrix files: one row per line, no header, decimal fields.

use std::fs;
use std::path::Path;

use super::gram::GramMatrix;
use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

/// Formats a number with 17 significant digits; infinities become `inf` /
/// `-inf`.
pub fn format_number(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: format!("bad number `{}`: {e}", f.trim()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        match cols {
            None => cols = Some(fields.len()),
            Some(c) if c != fields.len() => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected {c} fields, found {}", fields.len()),
                })
            }
            _ => {}
        }
        data.extend(fields);
        rows += 1;
    }
    let cols = cols.ok_or(Error::Parse {
        line: 0,
        message: "empty matrix file".into(),
    })?;
    DenseMatrix::new(rows, cols, data)
}

pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|&v| format_number(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text)
}

/// Reads a square matrix file and validates it as a Gram matrix.
pub fn read_gram(path: &Path) -> Result<GramMatrix> {
    let m = read_matrix(path)?;
    if m.rows() != m.cols() {
        return Err(Error::invalid(format!(
            "Gram file {} is {}x{}, not square",
            path.display(),
            m.rows(),
            m.cols()
        )));
    }
    GramMatrix::new(m.rows(), m.as_slice().to_vec())
}

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    fs::write(path, format_matrix(m)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(f64::INFINITY), "inf");
        assert_eq!(format_number(0.5), "5.0000000000000000e-1");
        let x = 0.1 + 0.2;
        assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn roundtrip_and_errors() {
        let m = DenseMatrix::new(2, 2, vec![1.0, 1.0 / 3.0, 1.0 / 3.0, 2.0]).unwrap();
        assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
        assert!(matches!(
            parse_matrix("1,2\n3\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_matrix("1,x\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse_matrix("").is_err());
    }

    #[test]
    fn gram_file_symmetry_checked() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.csv");
        std::fs::write(&p, "1,0.5\n0.4,1\n").unwrap();
        assert!(read_gram(&p).is_err());
        std::fs::write(&p, "1,0.5\n0.5,1\n").unwrap();
        assert_eq!(read_gram(&p).unwrap().get(0, 1), 0.5);
    }
}
