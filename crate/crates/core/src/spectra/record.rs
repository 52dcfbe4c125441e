//! Text record for a [`Decomposition`], used for golden files.
//!
//! ```text
//! decomposition v1
//! source_dim 2
//! complete true
//! tol_dec <e>
//! tol_nil <e>
//! residual_reconstruction <e>
//! residual_resolution <e>
//! components 1
//! component 0
//! lambda <re> <im>
//! algebraic_multiplicity 2
//! nilpotency_index 2
//! projector
//! <cmat v1 block>
//! nilpotent
//! <cmat v1 block>
//! end
//! ```

use std::fmt::Write as _;

use super::decompose::{Decomposition, SpectralComponent};
use crate::numerics::{parse_cmat_lines, write_cmat, NumericsError, C64};

pub fn write_decomposition(dec: &Decomposition) -> String {
    let mut s = String::new();
    writeln!(s, "decomposition v1").unwrap();
    writeln!(s, "source_dim {}", dec.source_dim).unwrap();
    writeln!(s, "complete {}", dec.complete).unwrap();
    writeln!(s, "tol_dec {:.16e}", dec.tol_dec).unwrap();
    writeln!(s, "tol_nil {:.16e}", dec.tol_nil).unwrap();
    writeln!(s, "residual_reconstruction {:.16e}", dec.residual_reconstruction).unwrap();
    writeln!(s, "residual_resolution {:.16e}", dec.residual_resolution).unwrap();
    writeln!(s, "components {}", dec.components.len()).unwrap();
    for (k, c) in dec.components.iter().enumerate() {
        writeln!(s, "component {k}").unwrap();
        writeln!(s, "lambda {:.16e} {:.16e}", c.lambda.re, c.lambda.im).unwrap();
        writeln!(s, "algebraic_multiplicity {}", c.algebraic_multiplicity).unwrap();
        writeln!(s, "nilpotency_index {}", c.nilpotency_index).unwrap();
        writeln!(s, "projector").unwrap();
        s.push_str(&write_cmat(&c.projector));
        writeln!(s, "nilpotent").unwrap();
        s.push_str(&write_cmat(&c.nilpotent));
    }
    writeln!(s, "end").unwrap();
    s
}

struct Cursor<'a> {
    lines: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
}

fn err(line: usize, msg: impl Into<String>) -> NumericsError {
    NumericsError::Format {
        line,
        msg: msg.into(),
    }
}

impl<'a> Cursor<'a> {
    fn next_line(&mut self) -> Result<(usize, &'a str), NumericsError> {
        self.lines
            .next()
            .map(|(n, l)| (n + 1, l.trim()))
            .ok_or_else(|| err(0, "unexpected end of record"))
    }

    fn keyword(&mut self, key: &str) -> Result<(usize, Vec<&'a str>), NumericsError> {
        let (no, line) = self.next_line()?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(err(no, format!("expected `{key}`, found `{line}`")));
        }
        Ok((no, parts.collect()))
    }

    fn value<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, NumericsError> {
        let (no, vals) = self.keyword(key)?;
        match vals.as_slice() {
            [v] => v.parse().map_err(|_| err(no, format!("bad value for `{key}`"))),
            _ => Err(err(no, format!("`{key}` takes one value"))),
        }
    }
}

pub fn read_decomposition(text: &str) -> Result<Decomposition, NumericsError> {
    let iter: Box<dyn Iterator<Item = (usize, &str)>> =
        Box::new(text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()));
    let mut cur = Cursor {
        lines: iter.peekable(),
    };
    let (no, v) = cur.keyword("decomposition")?;
    if v != ["v1"] {
        return Err(err(no, "unsupported record version"));
    }
    let source_dim: usize = cur.value("source_dim")?;
    let complete: bool = cur.value("complete")?;
    let tol_dec: f64 = cur.value("tol_dec")?;
    let tol_nil: f64 = cur.value("tol_nil")?;
    let residual_reconstruction: f64 = cur.value("residual_reconstruction")?;
    let residual_resolution: f64 = cur.value("residual_resolution")?;
    let count: usize = cur.value("components")?;
    let mut components = Vec::with_capacity(count);
    for k in 0..count {
        let idx: usize = cur.value("component")?;
        if idx != k {
            return Err(err(0, format!("component {idx} out of order")));
        }
        let (no, lam) = cur.keyword("lambda")?;
        let lambda = match lam.as_slice() {
            [re, im] => C64::new(
                re.parse().map_err(|_| err(no, "bad lambda"))?,
                im.parse().map_err(|_| err(no, "bad lambda"))?,
            ),
            _ => return Err(err(no, "lambda takes two values")),
        };
        let algebraic_multiplicity: usize = cur.value("algebraic_multiplicity")?;
        let nilpotency_index: usize = cur.value("nilpotency_index")?;
        cur.keyword("projector")?;
        let (projector, _) = parse_cmat_lines(&mut cur.lines)?;
        cur.keyword("nilpotent")?;
        let (nilpotent, _) = parse_cmat_lines(&mut cur.lines)?;
        for m in [&projector, &nilpotent] {
            if m.rows() != source_dim || m.cols() != source_dim {
                return Err(err(0, "component matrix has wrong dimension"));
            }
        }
        components.push(SpectralComponent {
            lambda,
            projector,
            nilpotent,
            nilpotency_index,
            algebraic_multiplicity,
        });
    }
    cur.keyword("end")?;
    if let Some((no, _)) = cur.lines.next() {
        return Err(err(no + 1, "content after `end`"));
    }
    Ok(Decomposition {
        source_dim,
        components,
        residual_reconstruction,
        residual_resolution,
        tol_dec,
        tol_nil,
        complete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ComplexMatrix;
    use crate::spectra::{decompose_with, DecomposeOptions};

    #[test]
    fn record_round_trip() {
        let x = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let dec = decompose_with(&x, &DecomposeOptions::default()).unwrap();
        let text = write_decomposition(&dec);
        assert!(text.starts_with("decomposition v1\nsource_dim 2\ncomplete true\n"));
        let back = read_decomposition(&text).unwrap();
        assert_eq!(write_decomposition(&back), text);
        assert_eq!(back.components[0].nilpotency_index, 2);
        assert_eq!(back.components[0].projector, dec.components[0].projector);
    }

    #[test]
    fn record_rejects_truncation() {
        let x = ComplexMatrix::identity(2);
        let text = write_decomposition(&decompose_with(&x, &DecomposeOptions::default()).unwrap());
        let cut = &text[..text.len() - 4];
        assert!(read_decomposition(cut).is_err());
    }
}
