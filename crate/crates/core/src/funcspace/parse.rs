//! Function mini-language.
//!
//! ```text
//! f      := poly | exp(affine) | sin(affine) | cos(affine)
//!         | ratio(poly, poly) | prod(f, f) | sum(f, f)
//! poly   := poly{ (e1,…,er):c, … }
//! affine := term (('+'|'-') term)*      term := [c '*'] z<k> | c
//! c      := real | (re,im)
//! ```
//!
//! Variables are 1-based (`z1`, `z2`, …). Printing uses shortest
//! round-trip float formatting, so `parse(format(f)) == f` exactly.

use super::expr::{Affine, Expr, Polynomial};
use super::FuncError;
use crate::numerics::C64;

pub fn parse_expr(text: &str) -> Result<Expr, FuncError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("trailing input"));
    }
    Ok(e)
}

pub fn format_expr(e: &Expr) -> String {
    match e {
        Expr::Poly(p) => format_poly(p),
        Expr::Exp(a) => format!("exp({})", format_affine(a)),
        Expr::Sin(a) => format!("sin({})", format_affine(a)),
        Expr::Cos(a) => format!("cos({})", format_affine(a)),
        Expr::Ratio(n, d) => format!("ratio({},{})", format_poly(n), format_poly(d)),
        Expr::Prod(a, b) => format!("prod({},{})", format_expr(a), format_expr(b)),
        Expr::Sum(a, b) => format!("sum({},{})", format_expr(a), format_expr(b)),
    }
}

fn format_complex(c: C64) -> String {
    format!("({:?},{:?})", c.re, c.im)
}

fn format_poly(p: &Polynomial) -> String {
    let terms: Vec<String> = p
        .terms()
        .iter()
        .map(|(e, &c)| {
            let exps: Vec<String> = e.iter().map(|k| k.to_string()).collect();
            format!("({}):{}", exps.join(","), format_complex(c))
        })
        .collect();
    format!("poly{{{}}}", terms.join(","))
}

fn format_affine(a: &Affine) -> String {
    let mut parts: Vec<String> = a
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, &c)| format!("{}*z{}", format_complex(c), j + 1))
        .collect();
    parts.push(format_complex(a.constant()));
    parts.join("+")
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> FuncError {
        FuncError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, ch: u8) -> bool {
        if self.peek() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, ch: u8) -> Result<(), FuncError> {
        if self.eat(ch) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", ch as char)))
        }
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn expr(&mut self) -> Result<Expr, FuncError> {
        let start = self.pos;
        let name = self.ident();
        match name.as_str() {
            "poly" => Ok(Expr::Poly(self.poly_body()?)),
            "exp" | "sin" | "cos" => {
                self.expect(b'(')?;
                let a = self.affine()?;
                self.expect(b')')?;
                Ok(match name.as_str() {
                    "exp" => Expr::Exp(a),
                    "sin" => Expr::Sin(a),
                    _ => Expr::Cos(a),
                })
            }
            "ratio" => {
                self.expect(b'(')?;
                let num = self.named_poly()?;
                self.expect(b',')?;
                let den = self.named_poly()?;
                self.expect(b')')?;
                let arity = num.arity().max(den.arity());
                Ok(Expr::Ratio(widen(num, arity), widen(den, arity)))
            }
            "prod" | "sum" => {
                self.expect(b'(')?;
                let a = self.expr()?;
                self.expect(b',')?;
                let b = self.expr()?;
                self.expect(b')')?;
                Ok(if name == "prod" {
                    Expr::Prod(Box::new(a), Box::new(b))
                } else {
                    Expr::Sum(Box::new(a), Box::new(b))
                })
            }
            _ => {
                self.pos = start;
                Err(self.error(&format!("unknown function `{name}`")))
            }
        }
    }

    fn named_poly(&mut self) -> Result<Polynomial, FuncError> {
        if self.ident() != "poly" {
            return Err(self.error("expected `poly{...}`"));
        }
        self.poly_body()
    }

    fn poly_body(&mut self) -> Result<Polynomial, FuncError> {
        self.expect(b'{')?;
        let mut terms = Vec::new();
        let mut arity = None;
        if !self.eat(b'}') {
            loop {
                self.expect(b'(')?;
                let mut e = vec![self.unsigned()?];
                while self.eat(b',') {
                    e.push(self.unsigned()?);
                }
                self.expect(b')')?;
                if *arity.get_or_insert(e.len()) != e.len() {
                    return Err(self.error("exponent tuples differ in length"));
                }
                self.expect(b':')?;
                let c = self.complex()?;
                terms.push((e, c));
                if self.eat(b'}') {
                    break;
                }
                self.expect(b',')?;
            }
        }
        let arity = arity.ok_or_else(|| self.error("empty polynomial"))?;
        Ok(Polynomial::new(arity, terms))
    }

    fn unsigned(&mut self) -> Result<usize, FuncError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.error("expected a nonnegative integer"))
    }

    fn real(&mut self) -> Result<f64, FuncError> {
        self.skip_ws();
        let start = self.pos;
        let mut prev = 0u8;
        while let Some(&ch) = self.src.get(self.pos) {
            let sign_ok = (ch == b'+' || ch == b'-')
                && (self.pos == start || prev == b'e' || prev == b'E');
            if ch.is_ascii_alphanumeric() || ch == b'.' || sign_ok {
                // `z` starts a variable, not part of a number
                if ch == b'z' {
                    break;
                }
                prev = ch;
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.pos = start;
                Err(self.error("expected a finite number"))
            }
        }
    }

    fn complex(&mut self) -> Result<C64, FuncError> {
        if self.eat(b'(') {
            let re = self.real()?;
            self.expect(b',')?;
            let im = self.real()?;
            self.expect(b')')?;
            Ok(C64::new(re, im))
        } else {
            Ok(C64::new(self.real()?, 0.0))
        }
    }

    fn variable(&mut self) -> Result<usize, FuncError> {
        self.expect(b'z')?;
        let k = self.unsigned()?;
        if k == 0 {
            return Err(self.error("variables are numbered from z1"));
        }
        Ok(k - 1)
    }

    fn affine(&mut self) -> Result<Affine, FuncError> {
        let mut coeffs: Vec<C64> = Vec::new();
        let mut constant = C64::new(0.0, 0.0);
        let mut sign = if self.eat(b'-') { -1.0 } else { 1.0 };
        loop {
            let (c, var) = if self.peek() == Some(b'z') {
                (C64::new(1.0, 0.0), Some(self.variable()?))
            } else {
                let c = self.complex()?;
                let var = if self.eat(b'*') {
                    Some(self.variable()?)
                } else {
                    None
                };
                (c, var)
            };
            match var {
                Some(j) => {
                    if coeffs.len() <= j {
                        coeffs.resize(j + 1, C64::new(0.0, 0.0));
                    }
                    coeffs[j] += c * sign;
                }
                None => constant += c * sign,
            }
            sign = if self.eat(b'+') {
                1.0
            } else if self.eat(b'-') {
                -1.0
            } else {
                break;
            };
        }
        Ok(Affine::new(coeffs, constant))
    }
}

fn widen(p: Polynomial, arity: usize) -> Polynomial {
    if p.arity() == arity {
        return p;
    }
    let terms: Vec<(Vec<usize>, C64)> = p
        .terms()
        .iter()
        .map(|(e, &c)| {
            let mut e = e.clone();
            e.resize(arity, 0);
            (e, c)
        })
        .collect();
    Polynomial::new(arity, terms)
}
