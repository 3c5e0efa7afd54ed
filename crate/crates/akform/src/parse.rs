//! Parsers for the coefficient/form literal grammar and the line-oriented
//! model file format.
//!
//! Form literals: `2*phi[2,~1,4,~4]`, `(-i)*phi[1,~1]`, `V4(g)*phi[4,~1]`,
//! with `~k` an antiholomorphic index and `W(f)` a derivative symbol whose
//! word `W` juxtaposes derivations (`b` suffix = conjugate derivation, e.g.
//! `V4bV4(g)`). `~f` inside the parentheses names the conjugated function.

use crate::exterior::{BasisForm, Form};
use crate::scalars::{Derivation, DerivSymbol, DiffPoly, FunctionTable, GaussRat, Rat};
use num_bigint::BigInt;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, col {}: {}", self.line, self.col, self.msg)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Tilde,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Eq,
}

#[derive(Debug, Clone)]
struct SpannedTok {
    tok: Tok,
    col: usize,
}

fn tokenize(s: &str, line: usize) -> Result<Vec<SpannedTok>, ParseError> {
    let mut out = Vec::new();
    let bytes: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let col = i + 1;
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '~' => Some(Tok::Tilde),
            ',' => Some(Tok::Comma),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(SpannedTok { tok, col });
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = bytes[start..i].iter().collect();
            let n = BigInt::from_str(&text).map_err(|_| ParseError {
                line,
                col,
                msg: format!("bad integer `{}`", text),
            })?;
            out.push(SpannedTok { tok: Tok::Int(n), col });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                i += 1;
            }
            out.push(SpannedTok { tok: Tok::Ident(bytes[start..i].iter().collect()), col });
        } else {
            return Err(ParseError { line, col, msg: format!("unexpected character `{}`", c) });
        }
    }
    Ok(out)
}

/// Recursive-descent parser over one token stream.
struct Parser<'a> {
    toks: Vec<SpannedTok>,
    pos: usize,
    line: usize,
    n: u8,
    funcs: &'a FunctionTable,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.col).unwrap_or_else(|| {
            self.toks.last().map(|t| t.col + 1).unwrap_or(1)
        })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.line, col: self.col(), msg: msg.into() }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected {}", what)))
        }
    }

    fn expr(&mut self) -> Result<Form, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Form, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = acc.wedge(&self.factor()?);
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let rhs = self.factor()?;
                    let c = scalar_value(&rhs)
                        .ok_or_else(|| self.err("division only by nonzero scalar constants"))?;
                    if c.is_zero() {
                        return Err(self.err("division by zero"));
                    }
                    acc = acc.scale_gauss(&c.inv());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Form, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Minus) => {
                self.bump();
                Ok(self.factor()?.neg())
            }
            Some(Tok::LParen) => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Int(n)) => {
                self.bump();
                Ok(Form::scalar(DiffPoly::constant(GaussRat::from_rat(Rat::from(n)))))
            }
            Some(Tok::Ident(name)) => {
                self.bump();
                if name == "i" {
                    return Ok(Form::scalar(DiffPoly::constant(GaussRat::i())));
                }
                if name == "phi" {
                    return self.phi_literal();
                }
                if self.peek() == Some(&Tok::LParen) {
                    if let Some(word) = parse_deriv_word(&name) {
                        return self.deriv_symbol(word);
                    }
                    return Err(self.err(format!("`{}` is not a derivation word", name)));
                }
                // Bare function name: the function itself as a coefficient.
                self.function_symbol(&name, false)
            }
            Some(Tok::Tilde) => {
                self.bump();
                match self.bump() {
                    Some(Tok::Ident(name)) => self.function_symbol(&name, true),
                    _ => Err(self.err("expected function name after `~`")),
                }
            }
            _ => Err(self.err("expected a factor")),
        }
    }

    fn function_symbol(&mut self, name: &str, conjugated: bool) -> Result<Form, ParseError> {
        if self.funcs.get(name).is_none() {
            return Err(self.err(format!("unknown function `{}`", name)));
        }
        let sym = DerivSymbol::new(name, conjugated, [], self.funcs)
            .expect("declared function with empty word");
        Ok(Form::scalar(DiffPoly::symbol(sym)))
    }

    fn deriv_symbol(&mut self, word: Vec<Derivation>) -> Result<Form, ParseError> {
        for d in &word {
            if d.index == 0 || d.index > self.n {
                return Err(self.err(format!("derivation V{} out of range 1..{}", d.index, self.n)));
            }
        }
        self.expect(Tok::LParen, "`(`")?;
        let conjugated = if self.peek() == Some(&Tok::Tilde) {
            self.bump();
            true
        } else {
            false
        };
        let name = match self.bump() {
            Some(Tok::Ident(name)) => name,
            _ => return Err(self.err("expected function name")),
        };
        self.expect(Tok::RParen, "`)`")?;
        if self.funcs.get(&name).is_none() {
            return Err(self.err(format!("unknown function `{}`", name)));
        }
        let poly = match DerivSymbol::new(&name, conjugated, word, self.funcs) {
            Some(sym) => DiffPoly::symbol(sym),
            None => DiffPoly::zero(), // annihilated by a declared vanishing rule
        };
        Ok(Form::scalar(poly))
    }

    fn phi_literal(&mut self) -> Result<Form, ParseError> {
        self.expect(Tok::LBracket, "`[`")?;
        let mut acc = Form::one();
        let mut first = true;
        loop {
            if !first {
                match self.peek() {
                    Some(Tok::Comma) => {
                        self.bump();
                    }
                    Some(Tok::RBracket) => {
                        self.bump();
                        return Ok(acc);
                    }
                    _ => return Err(self.err("expected `,` or `]`")),
                }
            }
            let anti = if self.peek() == Some(&Tok::Tilde) {
                self.bump();
                true
            } else {
                false
            };
            let idx = match self.bump() {
                Some(Tok::Int(n)) => n,
                _ => return Err(self.err("expected coframe index")),
            };
            let idx: u8 = idx
                .try_into()
                .ok()
                .filter(|&j: &u8| j >= 1 && j <= self.n)
                .ok_or_else(|| self.err(format!("index out of range 1..{}", self.n)))?;
            let factor = if anti {
                BasisForm::from_indices(&[], &[idx])
            } else {
                BasisForm::from_indices(&[idx], &[])
            };
            acc = acc.wedge(&Form::basis(factor));
            first = false;
        }
    }
}

/// Splits a juxtaposed derivation word like `V4bV4` into derivations.
fn parse_deriv_word(s: &str) -> Option<Vec<Derivation>> {
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < chars.len() {
        if chars[i] != 'V' {
            return None;
        }
        i += 1;
        let start = i;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
        if start == i {
            return None;
        }
        let index: u8 = chars[start..i].iter().collect::<String>().parse().ok()?;
        let conj = if i < chars.len() && chars[i] == 'b' {
            i += 1;
            true
        } else {
            false
        };
        out.push(Derivation { index, conj });
    }
    if out.is_empty() {
        None
    } else {
        Some(out)
    }
}

fn scalar_value(f: &Form) -> Option<GaussRat> {
    if f.is_zero() {
        return Some(GaussRat::zero());
    }
    let mut terms = f.terms();
    let (b, c) = terms.next()?;
    if terms.next().is_some() || *b != BasisForm::SCALAR || !c.is_constant() {
        return None;
    }
    Some(c.constant_part())
}

/// Parses one form literal against a model's dimension and function table.
pub fn parse_form(text: &str, n: u8, funcs: &FunctionTable) -> Result<Form, ParseError> {
    parse_form_at_line(text, n, funcs, 1)
}

fn parse_form_at_line(
    text: &str,
    n: u8,
    funcs: &FunctionTable,
    line: usize,
) -> Result<Form, ParseError> {
    let toks = tokenize(text, line)?;
    if toks.is_empty() {
        return Err(ParseError { line, col: 1, msg: "empty expression".into() });
    }
    let mut p = Parser { toks, pos: 0, line, n, funcs };
    let form = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(form)
}

/// Tokenizes an operator expression for the operator-surface parser.
pub(crate) fn op_tokens(text: &str) -> Result<Vec<crate::operators::OpTok>, ParseError> {
    use crate::operators::OpTok;
    let toks = tokenize(text, 1)?;
    toks.into_iter()
        .map(|t| {
            Ok(match t.tok {
                Tok::Int(n) => OpTok::Int(i64::try_from(&n).map_err(|_| ParseError {
                    line: 1,
                    col: t.col,
                    msg: "integer too large".into(),
                })?),
                Tok::Ident(s) => OpTok::Name(s),
                Tok::Plus => OpTok::Plus,
                Tok::Minus => OpTok::Minus,
                Tok::Star => OpTok::Star,
                Tok::Slash => OpTok::Slash,
                Tok::LParen => OpTok::LParen,
                Tok::RParen => OpTok::RParen,
                other => {
                    return Err(ParseError {
                        line: 1,
                        col: t.col,
                        msg: format!("unexpected token {:?} in operator expression", other),
                    })
                }
            })
        })
        .collect()
}

/// The raw content of a model file, before the model derives anything.
#[derive(Debug, Clone)]
pub struct ModelSource {
    pub n: u8,
    pub functions: FunctionTable,
    pub structure: Vec<Form>,
}

/// Parses the line-oriented model grammar:
///
/// ```text
/// dim 4
/// function g real depends V4 V4b
/// dphi 1 = V4(g)*phi[4,~1] + (-1)*V4b(g)*phi[~1,~4]
/// dphi 2 = 0
/// ```
///
/// Comments start with `#`; omitted `dphi i` lines default to 0.
pub fn parse_model_source(text: &str) -> Result<ModelSource, ParseError> {
    let mut n: Option<u8> = None;
    let mut funcs = FunctionTable::new();
    let mut structure: Vec<Option<Form>> = Vec::new();
    // Structure lines are deferred so functions may be declared anywhere.
    let mut dphi_lines: Vec<(usize, u8, String)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let head = words.next().unwrap();
        match head {
            "dim" => {
                if n.is_some() {
                    return Err(ParseError { line: line_no, col: 1, msg: "duplicate `dim`".into() });
                }
                let value = words.next().ok_or(ParseError {
                    line: line_no,
                    col: 4,
                    msg: "expected dimension".into(),
                })?;
                let parsed: u8 = value.parse().map_err(|_| ParseError {
                    line: line_no,
                    col: 5,
                    msg: format!("bad dimension `{}`", value),
                })?;
                if parsed == 0 || parsed > 12 {
                    return Err(ParseError {
                        line: line_no,
                        col: 5,
                        msg: "dimension must be 1..=12".into(),
                    });
                }
                n = Some(parsed);
                structure = vec![None; parsed as usize];
            }
            "function" => {
                let nn = n.ok_or(ParseError {
                    line: line_no,
                    col: 1,
                    msg: "`dim` must come first".into(),
                })?;
                let name = words.next().ok_or(ParseError {
                    line: line_no,
                    col: 9,
                    msg: "expected function name".into(),
                })?;
                let mut rest: Vec<&str> = words.collect();
                let real = rest.first() == Some(&"real");
                if real {
                    rest.remove(0);
                }
                if rest.first() != Some(&"depends") {
                    return Err(ParseError {
                        line: line_no,
                        col: 1,
                        msg: "expected `depends` clause".into(),
                    });
                }
                rest.remove(0);
                let mut depends = Vec::new();
                for w in rest {
                    let ds = parse_deriv_word(w).ok_or_else(|| ParseError {
                        line: line_no,
                        col: 1,
                        msg: format!("bad derivation name `{}`", w),
                    })?;
                    if ds.len() != 1 {
                        return Err(ParseError {
                            line: line_no,
                            col: 1,
                            msg: format!("`{}` is not a single derivation", w),
                        });
                    }
                    let d = ds[0];
                    if d.index == 0 || d.index > nn {
                        return Err(ParseError {
                            line: line_no,
                            col: 1,
                            msg: format!("derivation V{} out of range 1..{}", d.index, nn),
                        });
                    }
                    depends.push(d);
                }
                funcs.declare(name, real, depends).map_err(|e| ParseError {
                    line: line_no,
                    col: 1,
                    msg: e.to_string(),
                })?;
            }
            "dphi" => {
                let nn = n.ok_or(ParseError {
                    line: line_no,
                    col: 1,
                    msg: "`dim` must come first".into(),
                })?;
                let idx_word = words.next().ok_or(ParseError {
                    line: line_no,
                    col: 5,
                    msg: "expected coframe index".into(),
                })?;
                let i: u8 = idx_word.parse().map_err(|_| ParseError {
                    line: line_no,
                    col: 6,
                    msg: format!("bad coframe index `{}`", idx_word),
                })?;
                if i == 0 || i > nn {
                    return Err(ParseError {
                        line: line_no,
                        col: 6,
                        msg: format!("index out of range 1..{}", nn),
                    });
                }
                let eq_pos = line.find('=').ok_or(ParseError {
                    line: line_no,
                    col: 1,
                    msg: "expected `=`".into(),
                })?;
                dphi_lines.push((line_no, i, line[eq_pos + 1..].to_string()));
            }
            other => {
                return Err(ParseError {
                    line: line_no,
                    col: 1,
                    msg: format!("unknown directive `{}`", other),
                });
            }
        }
    }

    let n = n.ok_or(ParseError { line: 1, col: 1, msg: "missing `dim` line".into() })?;
    for (line_no, i, rhs) in dphi_lines {
        if structure[i as usize - 1].is_some() {
            return Err(ParseError {
                line: line_no,
                col: 1,
                msg: format!("duplicate structure equation for index {}", i),
            });
        }
        let rhs = rhs.trim();
        let form = if rhs == "0" {
            Form::zero()
        } else {
            parse_form_at_line(rhs, n, &funcs, line_no)?
        };
        for (b, _) in form.terms() {
            if b.degree() != 2 {
                return Err(ParseError {
                    line: line_no,
                    col: 1,
                    msg: format!("structure form term {} is not of total degree 2", b),
                });
            }
        }
        structure[i as usize - 1] = Some(form);
    }

    Ok(ModelSource {
        n,
        functions: funcs,
        structure: structure.into_iter().map(|f| f.unwrap_or_else(Form::zero)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::GaussRat;

    fn table() -> FunctionTable {
        let mut t = FunctionTable::new();
        t.declare("g", true, [Derivation::holo(4), Derivation::anti(4)]).unwrap();
        t
    }

    #[test]
    fn scalar_literals() {
        let t = FunctionTable::new();
        let f = parse_form("-i/4", 4, &t).unwrap();
        assert_eq!(
            f,
            Form::scalar(DiffPoly::constant(GaussRat { re: Rat::from(BigInt::from(0)), im: Rat::new(BigInt::from(-1), BigInt::from(4)) }))
        );
        let g = parse_form("(1+2*i)/2", 4, &t).unwrap();
        let expected = GaussRat {
            re: Rat::new(BigInt::from(1), BigInt::from(2)),
            im: Rat::from(BigInt::from(1)),
        };
        assert_eq!(g, Form::scalar(DiffPoly::constant(expected)));
    }

    #[test]
    fn phi_literal_normalizes() {
        let t = FunctionTable::new();
        // phi[4,~1,2,~2,~3] reorders evenly to phi[2,4,~1,~2,~3].
        let f = parse_form("phi[4,~1,2,~2,~3]", 4, &t).unwrap();
        assert_eq!(f.to_string(), "phi[2,4,~1,~2,~3]");
        // Repeated index wedges to zero.
        assert!(parse_form("phi[1,1]", 4, &t).unwrap().is_zero());
        // Out-of-range index is rejected.
        assert!(parse_form("phi[5]", 4, &t).is_err());
    }

    #[test]
    fn noncanonical_paper_order_gets_sign() {
        let t = FunctionTable::new();
        let a = parse_form("phi[2,1,~4]", 4, &t).unwrap();
        let b = parse_form("-phi[1,2,~4]", 4, &t).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn deriv_symbols() {
        let t = table();
        let f = parse_form("V4(g)*phi[4,~1]", 4, &t).unwrap();
        assert_eq!(f.to_string(), "V4(g)*phi[4,~1]");
        let z = parse_form("V1(g)", 4, &t).unwrap();
        assert!(z.is_zero());
        assert!(parse_form("V4(h)", 4, &t).is_err());
        assert!(parse_form("V9(g)", 4, &t).is_err());
        let w = parse_form("V4bV4(g)", 4, &t).unwrap();
        assert_eq!(w.to_string(), "V4V4b(g)");
    }

    #[test]
    fn display_reparse_roundtrip() {
        let t = table();
        for text in [
            "2*phi[2,~1,4,~4]",
            "(-i)*phi[1,~1]",
            "V4(g)*phi[4,~1] + (-1)*V4b(g)*phi[~1,~4]",
            "phi[1,2,~1,~2] - phi[3,4,~3,~4]",
            "1/2 + i",
        ] {
            let f = parse_form(text, 4, &t).unwrap();
            let rt = parse_form(&f.to_string(), 4, &t).unwrap();
            assert_eq!(f, rt, "roundtrip of `{}` printed `{}`", text, f);
        }
    }

    #[test]
    fn model_source_errors() {
        assert!(parse_model_source("dim 4\ndphi 1 = phi[5]").is_err());
        assert!(parse_model_source("dphi 1 = 0").is_err());
        assert!(parse_model_source("dim 4\ndphi 1 = 0\ndphi 1 = 0").is_err());
        assert!(parse_model_source("dim 4\ndphi 1 = phi[1]").is_err()); // degree 1
        let err = parse_model_source("dim 4\ndphi 1 = phi[5]").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn model_source_defaults() {
        let src = parse_model_source("dim 3\n# nothing else\n").unwrap();
        assert_eq!(src.n, 3);
        assert!(src.structure.iter().all(|f| f.is_zero()));
    }
}
