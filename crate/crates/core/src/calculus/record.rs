use std::fmt::Write as _;

use super::multivariate::{CalculusResult, LedgerEntry, Split};
use crate::numerics::{parse_cmat_lines, write_cmat, NumericsError};

/// `lambda_tuple,alpha,contribution_norm`, one row per ledger entry. Tuple
/// entries are `re+imi` joined by `;`.
pub fn ledger_csv(entries: &[LedgerEntry]) -> String {
    let mut s = String::from("lambda_tuple,alpha,contribution_norm\n");
    for e in entries {
        let lambdas: Vec<String> = e
            .lambdas
            .iter()
            .map(|l| format!("{:.16e}{:+.16e}i", l.re, l.im))
            .collect();
        writeln!(s, "{},{},{:.16e}", lambdas.join(";"), e.alpha, e.norm).unwrap();
    }
    s
}

/// Three labelled `cmat v1` blocks.
pub fn write_split(result: &CalculusResult) -> String {
    let mut s = String::new();
    for (label, m) in [
        ("s0", &result.split.s0),
        ("s_mixed", &result.split.s_mixed),
        ("s_full", &result.split.s_full),
    ] {
        writeln!(s, "{label}").unwrap();
        s.push_str(&write_cmat(m));
    }
    s
}

pub fn read_split(text: &str) -> Result<Split, NumericsError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();
    let mut blocks = Vec::with_capacity(3);
    for label in ["s0", "s_mixed", "s_full"] {
        match lines.next() {
            Some((_, l)) if l.trim() == label => {}
            Some((no, l)) => {
                return Err(NumericsError::Format {
                    line: no + 1,
                    msg: format!("expected `{label}`, found `{}`", l.trim()),
                })
            }
            None => {
                return Err(NumericsError::Format {
                    line: 0,
                    msg: format!("missing `{label}` block"),
                })
            }
        }
        blocks.push(parse_cmat_lines(&mut lines)?.0);
    }
    if let Some((no, _)) = lines.next() {
        return Err(NumericsError::Format {
            line: no + 1,
            msg: "content after `s_full` block".into(),
        });
    }
    let s_full = blocks.pop().expect("three blocks");
    let s_mixed = blocks.pop().expect("three blocks");
    let s0 = blocks.pop().expect("three blocks");
    Ok(Split { s0, s_mixed, s_full })
}
