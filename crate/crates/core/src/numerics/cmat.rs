//! The `cmat v1` text format.
//!
//! First line `rows cols`, then `rows × cols` lines `re im` in row-major
//! order. Values are written with 17 significant digits so a write/read
//! cycle reproduces every bit.

use std::fmt::Write as _;
use std::path::Path;

use super::matrix::{ComplexMatrix, C64};
use super::NumericsError;

pub fn write_cmat(m: &ComplexMatrix) -> String {
    let mut out = String::with_capacity(48 * m.rows() * m.cols() + 16);
    writeln!(out, "{} {}", m.rows(), m.cols()).unwrap();
    for z in m.to_row_major() {
        writeln!(out, "{:.16e} {:.16e}", z.re, z.im).unwrap();
    }
    out
}

/// Parses one `cmat v1` block. Blank lines are ignored.
pub fn read_cmat(text: &str) -> Result<ComplexMatrix, NumericsError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (m, _) = parse_cmat_lines(&mut lines)?;
    if let Some((no, _)) = lines.next() {
        return Err(NumericsError::Format {
            line: no + 1,
            msg: "trailing content after matrix entries".into(),
        });
    }
    Ok(m)
}

/// Parses a `cmat v1` block from an iterator of `(line_index, line)`;
/// consumes exactly the header plus `rows × cols` entry lines.
pub fn parse_cmat_lines<'a, I>(lines: &mut I) -> Result<(ComplexMatrix, usize), NumericsError>
where
    I: Iterator<Item = (usize, &'a str)>,
{
    let (hno, header) = lines.next().ok_or(NumericsError::Format {
        line: 0,
        msg: "missing header".into(),
    })?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let bad_header = || NumericsError::Format {
        line: hno + 1,
        msg: format!("expected `rows cols`, found `{header}`"),
    };
    if dims.len() != 2 {
        return Err(bad_header());
    }
    let rows: usize = dims[0].parse().map_err(|_| bad_header())?;
    let cols: usize = dims[1].parse().map_err(|_| bad_header())?;
    let count = rows.checked_mul(cols).ok_or_else(bad_header)?;
    let mut entries = Vec::with_capacity(count);
    let mut last = hno;
    for k in 0..count {
        let (no, line) = lines.next().ok_or(NumericsError::Format {
            line: last + 2,
            msg: format!("expected {count} entries, found {k}"),
        })?;
        last = no;
        let mut parts = line.split_whitespace();
        let parse = |s: Option<&str>| -> Result<f64, NumericsError> {
            s.and_then(|t| t.parse::<f64>().ok()).ok_or(NumericsError::Format {
                line: no + 1,
                msg: format!("expected `re im`, found `{line}`"),
            })
        };
        let re = parse(parts.next())?;
        let im = parse(parts.next())?;
        if parts.next().is_some() {
            return Err(NumericsError::Format {
                line: no + 1,
                msg: "more than two numbers on entry line".into(),
            });
        }
        entries.push(C64::new(re, im));
    }
    Ok((ComplexMatrix::new(rows, cols, entries)?, last))
}

pub fn read_cmat_file(path: &Path) -> Result<ComplexMatrix, NumericsError> {
    let text = std::fs::read_to_string(path).map_err(|e| NumericsError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    read_cmat(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_and_layout() {
        let m = ComplexMatrix::from_rows(&[vec![C64::new(1.0, -2.0), C64::new(0.5, 0.0)]]).unwrap();
        let text = write_cmat(&m);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "1 2");
        assert_eq!(lines[1], "1.0000000000000000e0 -2.0000000000000000e0");
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn malformed_inputs() {
        assert!(read_cmat("2 2\n1 0\n").is_err());
        assert!(read_cmat("1 1\n1 0 3\n").is_err());
        assert!(read_cmat("1 1\nx 0\n").is_err());
        assert!(read_cmat("1 1\n1 0\n2 0\n").is_err());
        assert!(read_cmat("1 1\nNaN 0\n").is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            rows in 1usize..5,
            cols in 1usize..5,
            seed in proptest::collection::vec((-1e300f64..1e300, -1e-300f64..1e-300), 16),
        ) {
            let m = ComplexMatrix::from_fn(rows, cols, |i, j| {
                let (a, b) = seed[(i * cols + j) % seed.len()];
                C64::new(a / (1.0 + i as f64), b * (j as f64 + 0.3))
            });
            let back = read_cmat(&write_cmat(&m)).unwrap();
            for (x, y) in m.to_row_major().iter().zip(back.to_row_major()) {
                prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
                prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }
}
