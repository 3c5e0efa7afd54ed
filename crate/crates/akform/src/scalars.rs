//! Exact scalar arithmetic: Gaussian rationals extended by formal symbols
//! for iterated frame derivatives of declared functions.
//!
//! A [`DiffPoly`] is a polynomial over [`GaussRat`] in symbols `W(f)`, where
//! `W` is a word of commuting derivations (`V4`, `V4b`, ...) applied to a
//! declared function `f`. Values are canonical after every operation, so
//! equality is structural.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub type Rat = BigRational;

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// A Gaussian rational `re + im*i` with exact rational parts.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct GaussRat {
    pub re: Rat,
    pub im: Rat,
}

impl GaussRat {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn i() -> Self {
        GaussRat { re: Rat::zero(), im: Rat::one() }
    }

    pub fn from_int(n: i64) -> Self {
        GaussRat { re: rat(n, 1), im: Rat::zero() }
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        GaussRat { re: rat(n, d), im: Rat::zero() }
    }

    pub fn from_rat(re: Rat) -> Self {
        GaussRat { re, im: Rat::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn neg(&self) -> Self {
        GaussRat { re: -self.re.clone(), im: -self.im.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        GaussRat { re: &self.re + &other.re, im: &self.im + &other.im }
    }

    pub fn sub(&self, other: &Self) -> Self {
        GaussRat { re: &self.re - &other.re, im: &self.im - &other.im }
    }

    pub fn mul(&self, other: &Self) -> Self {
        GaussRat {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "division by zero");
        let norm = &self.re * &self.re + &self.im * &self.im;
        GaussRat { re: &self.re / &norm, im: -(&self.im / &norm) }
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.inv())
    }

    /// `i^k` for any integer exponent.
    pub fn i_pow(k: i32) -> Self {
        match k.rem_euclid(4) {
            0 => Self::one(),
            1 => Self::i(),
            2 => Self::from_int(-1),
            _ => Self::i().neg(),
        }
    }

    /// Squared modulus `re^2 + im^2`.
    pub fn norm_sq(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }
}

impl fmt::Debug for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Canonical textual form, re-parseable by the coefficient grammar.
impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let im_str = |im: &Rat| -> String {
            if im.is_one() {
                "i".to_string()
            } else if (-im.clone()).is_one() {
                "-i".to_string()
            } else {
                format!("{}*i", im)
            }
        };
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}", im_str(&self.im))
        } else if self.im.is_negative() {
            let mag = -self.im.clone();
            let s = if mag.is_one() { "i".to_string() } else { format!("{}*i", mag) };
            write!(f, "{}-{}", self.re, s)
        } else {
            write!(f, "{}+{}", self.re, im_str(&self.im))
        }
    }
}

/// A frame derivation: `V_j` or its conjugate `Vbar_j`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Derivation {
    pub index: u8,
    pub conj: bool,
}

impl Derivation {
    pub fn holo(index: u8) -> Self {
        Derivation { index, conj: false }
    }

    pub fn anti(index: u8) -> Self {
        Derivation { index, conj: true }
    }

    pub fn conjugate(self) -> Self {
        Derivation { index: self.index, conj: !self.conj }
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V{}{}", self.index, if self.conj { "b" } else { "" })
    }
}

/// Declared function: real-valuedness flag and the derivations that act
/// nontrivially on it. Any derivation outside `depends` annihilates it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuncDecl {
    pub real: bool,
    pub depends: BTreeSet<Derivation>,
}

/// Table of declared functions for a model.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FunctionTable {
    funcs: BTreeMap<String, FuncDecl>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ScalarError {
    #[error("function `{0}` declared twice")]
    DuplicateFunction(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
}

impl FunctionTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(
        &mut self,
        name: &str,
        real: bool,
        depends: impl IntoIterator<Item = Derivation>,
    ) -> Result<(), ScalarError> {
        if self.funcs.contains_key(name) {
            return Err(ScalarError::DuplicateFunction(name.to_string()));
        }
        self.funcs.insert(name.to_string(), FuncDecl { real, depends: depends.into_iter().collect() });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&FuncDecl> {
        self.funcs.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.funcs.keys().map(|s| s.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.funcs.is_empty()
    }

    /// Whether `d` annihilates the (possibly conjugated) function.
    fn annihilates(&self, func: &str, conjugated: bool, d: Derivation) -> bool {
        match self.funcs.get(func) {
            // Undeclared names never appear in normalized values; be strict.
            None => true,
            Some(decl) => {
                let effective = if conjugated { d.conjugate() } else { d };
                !decl.depends.contains(&effective)
            }
        }
    }
}

/// A formal iterated derivative `W(f)`, with `W` a sorted word of commuting
/// derivations applied to the (possibly conjugated) function `f`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct DerivSymbol {
    pub func: String,
    pub conjugated: bool,
    word: Vec<Derivation>,
}

impl DerivSymbol {
    /// Builds a symbol in normal form; `None` when a derivation in the word
    /// annihilates the function.
    pub fn new(
        func: &str,
        conjugated: bool,
        word: impl IntoIterator<Item = Derivation>,
        table: &FunctionTable,
    ) -> Option<Self> {
        let mut w: Vec<Derivation> = word.into_iter().collect();
        table.get(func)?;
        if w.iter().any(|d| table.annihilates(func, conjugated, *d)) {
            return None;
        }
        w.sort();
        Some(DerivSymbol { func: func.to_string(), conjugated, word: w })
    }

    pub fn word(&self) -> &[Derivation] {
        &self.word
    }

    /// Appends one derivation to the word and renormalizes.
    pub fn apply(&self, d: Derivation, table: &FunctionTable) -> Option<Self> {
        let mut w = self.word.clone();
        w.push(d);
        DerivSymbol::new(&self.func, self.conjugated, w, table)
    }

    pub fn conjugate(&self, table: &FunctionTable) -> Self {
        let real = table.get(&self.func).map(|d| d.real).unwrap_or(false);
        let mut w: Vec<Derivation> = self.word.iter().map(|d| d.conjugate()).collect();
        w.sort();
        DerivSymbol {
            func: self.func.clone(),
            conjugated: if real { false } else { !self.conjugated },
            word: w,
        }
    }
}

impl fmt::Display for DerivSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.word {
            write!(f, "{}", d)?;
        }
        write!(f, "({}{})", if self.conjugated { "~" } else { "" }, self.func)
    }
}

/// A commutative monomial: sorted multiset of derivative symbols.
/// The empty monomial is the constant `1`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct PolyMonomial(Vec<DerivSymbol>);

impl PolyMonomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn from_symbols(syms: impl IntoIterator<Item = DerivSymbol>) -> Self {
        let mut v: Vec<DerivSymbol> = syms.into_iter().collect();
        v.sort();
        PolyMonomial(v)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[DerivSymbol] {
        &self.0
    }

    fn mul(&self, other: &Self) -> Self {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        v.sort();
        PolyMonomial(v)
    }
}

impl fmt::Display for PolyMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, s) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            write!(f, "{}", s)?;
        }
        Ok(())
    }
}

/// Polynomial over Gaussian rationals in derivative symbols.
/// No zero coefficients are stored; the empty map is the canonical zero.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct DiffPoly {
    terms: BTreeMap<PolyMonomial, GaussRat>,
}

impl DiffPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(GaussRat::one())
    }

    pub fn constant(c: GaussRat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(PolyMonomial::one(), c);
        }
        DiffPoly { terms }
    }

    pub fn symbol(s: DerivSymbol) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(PolyMonomial::from_symbols([s]), GaussRat::one());
        DiffPoly { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (PolyMonomial, GaussRat)>) -> Self {
        let mut out = DiffPoly::zero();
        for (m, c) in terms {
            out.add_term(m, c);
        }
        out
    }

    fn add_term(&mut self, m: PolyMonomial, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().add(&c);
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when the value is a plain Gaussian rational (no symbols).
    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().is_one())
    }

    /// The coefficient of the empty monomial.
    pub fn constant_part(&self) -> GaussRat {
        self.terms.get(&PolyMonomial::one()).cloned().unwrap_or_else(GaussRat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PolyMonomial, &GaussRat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &PolyMonomial) -> GaussRat {
        self.terms.get(m).cloned().unwrap_or_else(GaussRat::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        DiffPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = DiffPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1.mul(c2));
            }
        }
        out
    }

    pub fn scale(&self, c: &GaussRat) -> Self {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly { terms: self.terms.iter().map(|(m, k)| (m.clone(), k.mul(c))).collect() }
    }

    /// Leibniz derivative along `d`. Constants are annihilated.
    pub fn derive(&self, d: Derivation, table: &FunctionTable) -> Self {
        let mut out = DiffPoly::zero();
        for (mono, c) in &self.terms {
            let syms = mono.symbols();
            for k in 0..syms.len() {
                if let Some(derived) = syms[k].apply(d, table) {
                    let mut rest: Vec<DerivSymbol> = Vec::with_capacity(syms.len());
                    rest.extend(syms[..k].iter().cloned());
                    rest.push(derived);
                    rest.extend(syms[k + 1..].iter().cloned());
                    out.add_term(PolyMonomial::from_symbols(rest), c.clone());
                }
            }
        }
        out
    }

    /// Complex conjugation: conjugates coefficients and every symbol word.
    pub fn conjugate(&self, table: &FunctionTable) -> Self {
        let mut out = DiffPoly::zero();
        for (mono, c) in &self.terms {
            let m = PolyMonomial::from_symbols(mono.symbols().iter().map(|s| s.conjugate(table)));
            out.add_term(m, c.conj());
        }
        out
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let t = poly_term_string(m, c);
            if first {
                write!(f, "{}", t)?;
                first = false;
            } else if let Some(stripped) = t.strip_prefix('-') {
                write!(f, " - {}", stripped)?;
            } else {
                write!(f, " + {}", t)?;
            }
        }
        Ok(())
    }
}

fn poly_term_string(m: &PolyMonomial, c: &GaussRat) -> String {
    if m.is_one() {
        return coeff_factor_string(c);
    }
    if c.is_one() {
        return m.to_string();
    }
    if c.neg().is_one() {
        return format!("-{}", m);
    }
    format!("{}*{}", coeff_factor_string(c), m)
}

/// Coefficient rendered so that `<coeff>*<rest>` re-parses correctly:
/// mixed re/im values get parenthesized.
pub(crate) fn coeff_factor_string(c: &GaussRat) -> String {
    if !c.re.is_zero() && !c.im.is_zero() {
        format!("({})", c)
    } else {
        c.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> FunctionTable {
        let mut t = FunctionTable::new();
        t.declare("g", true, [Derivation::holo(4), Derivation::anti(4)]).unwrap();
        t
    }

    fn sym(t: &FunctionTable, word: &[Derivation]) -> DerivSymbol {
        DerivSymbol::new("g", false, word.iter().copied(), t).unwrap()
    }

    #[test]
    fn unit_arithmetic() {
        let i = GaussRat::i();
        assert!(i.mul(&i.neg()).is_one());
        assert_eq!(GaussRat::i_pow(2), GaussRat::from_int(-1));
        assert_eq!(GaussRat::i_pow(-1), GaussRat::i().neg());
    }

    #[test]
    fn cancellation() {
        let t = table();
        let v4g = DiffPoly::symbol(sym(&t, &[Derivation::holo(4)]));
        assert!(v4g.sub(&v4g).is_zero());
    }

    #[test]
    fn undeclared_derivation_annihilates() {
        let t = table();
        // g depends only on V4, V4b, so V1(g) normalizes to zero.
        assert!(DerivSymbol::new("g", false, [Derivation::holo(1)], &t).is_none());
        let g = DiffPoly::symbol(sym(&t, &[]));
        assert!(g.derive(Derivation::holo(1), &t).is_zero());
    }

    #[test]
    fn derive_constant_and_symbol() {
        let t = table();
        assert!(DiffPoly::one().derive(Derivation::holo(4), &t).is_zero());
        let g = DiffPoly::symbol(sym(&t, &[]));
        let v4g = DiffPoly::symbol(sym(&t, &[Derivation::holo(4)]));
        assert_eq!(g.derive(Derivation::holo(4), &t), v4g);
    }

    #[test]
    fn leibniz_against_bruteforce() {
        // Independent oracle: differentiate a product of symbols term by term
        // over explicit factor positions.
        fn brute_derive(factors: &[DerivSymbol], d: Derivation, t: &FunctionTable) -> DiffPoly {
            let mut out = DiffPoly::zero();
            for k in 0..factors.len() {
                if let Some(df) = factors[k].apply(d, t) {
                    let mut prod = DiffPoly::symbol(df);
                    for (j, s) in factors.iter().enumerate() {
                        if j != k {
                            prod = prod.mul(&DiffPoly::symbol(s.clone()));
                        }
                    }
                    out = out.add(&prod);
                }
            }
            out
        }

        let t = table();
        let v4 = Derivation::holo(4);
        let v4b = Derivation::anti(4);
        let v4g = sym(&t, &[v4]);
        let p = DiffPoly::symbol(v4g.clone()).mul(&DiffPoly::symbol(v4g.clone()));
        let expected = brute_derive(&[v4g.clone(), v4g.clone()], v4b, &t);
        assert_eq!(p.derive(v4b, &t), expected);
        // Explicit value: 2 * V4bV4(g) * V4(g).
        let v4bv4g = sym(&t, &[v4, v4b]);
        let two = DiffPoly::constant(GaussRat::from_int(2));
        let explicit = two.mul(&DiffPoly::symbol(v4bv4g)).mul(&DiffPoly::symbol(v4g));
        assert_eq!(p.derive(v4b, &t), explicit);
    }

    #[test]
    fn conjugation_of_real_function() {
        let t = table();
        let v4g = DiffPoly::symbol(sym(&t, &[Derivation::holo(4)]));
        let v4bg = DiffPoly::symbol(sym(&t, &[Derivation::anti(4)]));
        assert_eq!(v4g.conjugate(&t), v4bg);
        assert_eq!(DiffPoly::constant(GaussRat::i()).conjugate(&t), DiffPoly::constant(GaussRat::i().neg()));
    }

    #[test]
    fn conjugation_of_complex_function() {
        let mut t = FunctionTable::new();
        t.declare("h", false, [Derivation::holo(1), Derivation::anti(2)]).unwrap();
        let h = DerivSymbol::new("h", false, [Derivation::holo(1)], &t).unwrap();
        let hc = h.conjugate(&t);
        assert!(hc.conjugated);
        assert_eq!(hc.word(), &[Derivation::anti(1)]);
        assert_eq!(hc.conjugate(&t), h);
        // The conjugated function depends on the conjugated derivations.
        assert!(DerivSymbol::new("h", true, [Derivation::holo(2)], &t).is_some());
        assert!(DerivSymbol::new("h", true, [Derivation::holo(1)], &t).is_none());
    }

    #[test]
    fn display_roundtrip_shapes() {
        let t = table();
        let v4 = Derivation::holo(4);
        let v4b = Derivation::anti(4);
        assert_eq!(sym(&t, &[v4b, v4]).to_string(), "V4V4b(g)");
        let c = GaussRat { re: rat(1, 2), im: rat(-1, 1) };
        assert_eq!(c.to_string(), "1/2-i");
        assert_eq!(GaussRat::from_ratio(-3, 4).to_string(), "-3/4");
        let p = DiffPoly::constant(GaussRat::from_int(2)).mul(&DiffPoly::symbol(sym(&t, &[v4])));
        assert_eq!(p.to_string(), "2*V4(g)");
    }
}
