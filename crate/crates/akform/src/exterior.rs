//! The bigraded exterior algebra over a fixed unitary coframe.
//!
//! Basis monomials are `phi^I ^ phibar^J` with both index blocks strictly
//! increasing (holomorphic block first). Signs come from the permutation
//! sorting concatenated blocks into this normal form, so form equality is a
//! structural comparison.

use crate::scalars::{coeff_factor_string, DiffPoly, FunctionTable, GaussRat};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Parity of inversions between two disjoint sorted index blocks `a`, `b`
/// when concatenated as `a ++ b`: counts pairs `x in a, y in b, x > y`.
fn merge_sign(a: u16, b: u16) -> i32 {
    let mut count = 0u32;
    let mut rest = b;
    while rest != 0 {
        let y = rest.trailing_zeros();
        count += (a >> (y + 1)).count_ones();
        rest &= rest - 1;
    }
    if count % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Lexicographic comparison of bitmasks viewed as ascending index sequences.
fn lex_cmp(a: u16, b: u16) -> Ordering {
    let (mut x, mut y) = (a, b);
    loop {
        if x == y {
            return Ordering::Equal;
        }
        if x == 0 {
            return Ordering::Less;
        }
        if y == 0 {
            return Ordering::Greater;
        }
        let (ix, iy) = (x.trailing_zeros(), y.trailing_zeros());
        match ix.cmp(&iy) {
            Ordering::Equal => {
                x &= x - 1;
                y &= y - 1;
            }
            other => return other,
        }
    }
}

/// An exterior basis monomial `phi^I ^ phibar^J`, stored as index bitmasks
/// (bit `j-1` set means index `j` is present).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct BasisForm {
    pub holo: u16,
    pub anti: u16,
}

impl BasisForm {
    pub const SCALAR: BasisForm = BasisForm { holo: 0, anti: 0 };

    pub fn from_indices(holo: &[u8], anti: &[u8]) -> Self {
        let mut h = 0u16;
        let mut a = 0u16;
        for &j in holo {
            assert!(j >= 1, "indices are 1-based");
            h |= 1 << (j - 1);
        }
        for &j in anti {
            assert!(j >= 1, "indices are 1-based");
            a |= 1 << (j - 1);
        }
        assert_eq!(h.count_ones() as usize, holo.len(), "repeated holomorphic index");
        assert_eq!(a.count_ones() as usize, anti.len(), "repeated antiholomorphic index");
        BasisForm { holo: h, anti: a }
    }

    pub fn p(&self) -> u8 {
        self.holo.count_ones() as u8
    }

    pub fn q(&self) -> u8 {
        self.anti.count_ones() as u8
    }

    pub fn degree(&self) -> u8 {
        self.p() + self.q()
    }

    pub fn bidegree(&self) -> (u8, u8) {
        (self.p(), self.q())
    }

    pub fn holo_indices(&self) -> Vec<u8> {
        mask_indices(self.holo)
    }

    pub fn anti_indices(&self) -> Vec<u8> {
        mask_indices(self.anti)
    }

    /// The full top monomial `phi^{1..n} ^ phibar^{1..n}`.
    pub fn top(n: u8) -> Self {
        let full = (1u16 << n) - 1;
        BasisForm { holo: full, anti: full }
    }

    /// Wedge of two monomials: `None` when a factor repeats, otherwise the
    /// canonical monomial together with the reordering sign.
    pub fn wedge(&self, other: &BasisForm) -> Option<(BasisForm, i32)> {
        if self.holo & other.holo != 0 || self.anti & other.anti != 0 {
            return None;
        }
        // Move other's holo block left past self's anti block, then merge
        // the matching blocks.
        let block_move = if (self.q() as u32 * other.p() as u32) % 2 == 0 { 1 } else { -1 };
        let sign = block_move * merge_sign(self.holo, other.holo) * merge_sign(self.anti, other.anti);
        Some((BasisForm { holo: self.holo | other.holo, anti: self.anti | other.anti }, sign))
    }

    /// Conjugate monomial (blocks swapped) with its reordering sign.
    pub fn conjugate(&self) -> (BasisForm, i32) {
        let sign = if (self.p() as u32 * self.q() as u32) % 2 == 0 { 1 } else { -1 };
        (BasisForm { holo: self.anti, anti: self.holo }, sign)
    }
}

fn mask_indices(mask: u16) -> Vec<u8> {
    let mut v = Vec::with_capacity(mask.count_ones() as usize);
    let mut rest = mask;
    while rest != 0 {
        v.push(rest.trailing_zeros() as u8 + 1);
        rest &= rest - 1;
    }
    v
}

impl Ord for BasisForm {
    fn cmp(&self, other: &Self) -> Ordering {
        // Degree, then holomorphic degree descending (so within one total
        // degree the (2,0) block precedes (1,1) precedes (0,2)), then lex.
        self.degree()
            .cmp(&other.degree())
            .then(other.p().cmp(&self.p()))
            .then(lex_cmp(self.holo, other.holo))
            .then(lex_cmp(self.anti, other.anti))
    }
}

impl PartialOrd for BasisForm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BasisForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == BasisForm::SCALAR {
            return write!(f, "1");
        }
        write!(f, "phi[")?;
        let mut first = true;
        for j in self.holo_indices() {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{}", j)?;
            first = false;
        }
        for j in self.anti_indices() {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "~{}", j)?;
            first = false;
        }
        write!(f, "]")
    }
}

/// Enumerates the canonical basis of `Lambda^{p,q}` for complex dimension `n`.
pub fn bidegree_basis(n: u8, p: u8, q: u8) -> Vec<BasisForm> {
    if p > n || q > n {
        return Vec::new();
    }
    let mut holos = subsets_of_size(n, p);
    let mut antis = subsets_of_size(n, q);
    holos.sort_by(|a, b| lex_cmp(*a, *b));
    antis.sort_by(|a, b| lex_cmp(*a, *b));
    let mut out = Vec::with_capacity(holos.len() * antis.len());
    for &h in &holos {
        for &a in &antis {
            out.push(BasisForm { holo: h, anti: a });
        }
    }
    out.sort();
    out
}

fn subsets_of_size(n: u8, k: u8) -> Vec<u16> {
    (0u16..(1 << n)).filter(|m| m.count_ones() == k as u32).collect()
}

/// Dimension of `Lambda^{p,q}`: C(n,p) * C(n,q).
pub fn bidegree_dim(n: u8, p: u8, q: u8) -> usize {
    bidegree_basis(n, p, q).len()
}

/// A bigraded form: sparse sum of basis monomials with [`DiffPoly`]
/// coefficients. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Form {
    terms: BTreeMap<BasisForm, DiffPoly>,
}

impl Form {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Form::scalar(DiffPoly::one())
    }

    /// A 0-form with the given coefficient.
    pub fn scalar(c: DiffPoly) -> Self {
        Form::monomial(BasisForm::SCALAR, c)
    }

    pub fn monomial(b: BasisForm, c: DiffPoly) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(b, c);
        }
        Form { terms }
    }

    pub fn basis(b: BasisForm) -> Self {
        Form::monomial(b, DiffPoly::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisForm, &DiffPoly)> {
        self.terms.iter()
    }

    pub fn coeff(&self, b: &BasisForm) -> DiffPoly {
        self.terms.get(b).cloned().unwrap_or_else(DiffPoly::zero)
    }

    fn add_term(&mut self, b: BasisForm, c: DiffPoly) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(b) {
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

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (b, c) in &other.terms {
            out.add_term(*b, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Form { terms: self.terms.iter().map(|(b, c)| (*b, c.neg())).collect() }
    }

    pub fn scale(&self, c: &DiffPoly) -> Self {
        let mut out = Form::zero();
        for (b, k) in &self.terms {
            out.add_term(*b, k.mul(c));
        }
        out
    }

    pub fn scale_gauss(&self, c: &GaussRat) -> Self {
        self.scale(&DiffPoly::constant(c.clone()))
    }

    pub fn wedge(&self, other: &Self) -> Self {
        let mut out = Form::zero();
        for (b1, c1) in &self.terms {
            for (b2, c2) in &other.terms {
                if let Some((b, sign)) = b1.wedge(b2) {
                    let mut c = c1.mul(c2);
                    if sign < 0 {
                        c = c.neg();
                    }
                    out.add_term(b, c);
                }
            }
        }
        out
    }

    /// Wedge power `self^k`.
    pub fn wedge_pow(&self, k: u32) -> Self {
        let mut out = Form::one();
        for _ in 0..k {
            out = out.wedge(self);
        }
        out
    }

    /// The `(p,q)`-component.
    pub fn bidegree_project(&self, p: u8, q: u8) -> Self {
        Form {
            terms: self
                .terms
                .iter()
                .filter(|(b, _)| b.bidegree() == (p, q))
                .map(|(b, c)| (*b, c.clone()))
                .collect(),
        }
    }

    /// The total-degree-`k` part.
    pub fn degree_project(&self, k: u8) -> Self {
        Form {
            terms: self
                .terms
                .iter()
                .filter(|(b, _)| b.degree() == k)
                .map(|(b, c)| (*b, c.clone()))
                .collect(),
        }
    }

    /// The bidegrees present, in canonical order.
    pub fn bidegrees(&self) -> Vec<(u8, u8)> {
        let mut v: Vec<(u8, u8)> = self.terms.keys().map(|b| b.bidegree()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// `Some((p,q))` when all terms share one bidegree; zero counts as
    /// homogeneous of any bidegree and returns `None`.
    pub fn homogeneous_bidegree(&self) -> Option<(u8, u8)> {
        let degs = self.bidegrees();
        if degs.len() == 1 {
            Some(degs[0])
        } else {
            None
        }
    }

    /// `Some(k)` when all terms share one total degree.
    pub fn homogeneous_degree(&self) -> Option<u8> {
        let mut degs: Vec<u8> = self.terms.keys().map(|b| b.degree()).collect();
        degs.sort();
        degs.dedup();
        if degs.len() == 1 {
            Some(degs[0])
        } else {
            None
        }
    }

    /// The action of the almost complex structure on forms: multiplies each
    /// `(p,q)`-component by `i^(p-q)`.
    pub fn j_act(&self) -> Self {
        let mut out = Form::zero();
        for (b, c) in &self.terms {
            let factor = GaussRat::i_pow(b.p() as i32 - b.q() as i32);
            out.add_term(*b, c.scale(&factor));
        }
        out
    }

    /// Complex conjugation: swaps index blocks (with the resorting sign) and
    /// conjugates coefficients. An involution mapping `(p,q)` to `(q,p)`.
    pub fn conjugate(&self, table: &FunctionTable) -> Self {
        let mut out = Form::zero();
        for (b, c) in &self.terms {
            let (bc, sign) = b.conjugate();
            let mut cc = c.conjugate(table);
            if sign < 0 {
                cc = cc.neg();
            }
            out.add_term(bc, cc);
        }
        out
    }

    /// True when every coefficient is a plain Gaussian rational.
    pub fn has_constant_coefficients(&self) -> bool {
        self.terms.values().all(|c| c.is_constant())
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (b, c) in &self.terms {
            let t = form_term_string(b, c);
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

fn form_term_string(b: &BasisForm, c: &DiffPoly) -> String {
    if *b == BasisForm::SCALAR {
        // Scalar summands may print as their own sums; re-parsing still
        // yields the same form.
        return c.to_string();
    }
    if c.is_constant() {
        let g = c.constant_part();
        if g.is_one() {
            return b.to_string();
        }
        if g.neg().is_one() {
            return format!("-{}", b);
        }
        return format!("{}*{}", coeff_factor_string(&g), b);
    }
    let s = c.to_string();
    if c.terms().count() > 1 {
        format!("({})*{}", s, b)
    } else {
        format!("{}*{}", s, b)
    }
}

/// Unicode rendering `phi^{12~3}` style, for the opt-in pretty printer.
pub fn unicode_form(form: &Form) -> String {
    if form.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    let mut first = true;
    for (b, c) in form.terms() {
        let mono = if *b == BasisForm::SCALAR {
            "1".to_string()
        } else {
            let mut s = String::from("\u{03c6}^{");
            for j in b.holo_indices() {
                s.push_str(&j.to_string());
            }
            for j in b.anti_indices() {
                s.push_str(&format!("{}\u{0304}", j));
            }
            s.push('}');
            s
        };
        let term = if c.is_constant() && c.constant_part().is_one() && *b != BasisForm::SCALAR {
            mono
        } else if c.is_constant() && c.constant_part().neg().is_one() && *b != BasisForm::SCALAR {
            format!("-{}", mono)
        } else if *b == BasisForm::SCALAR {
            format!("{}", c)
        } else {
            format!("({})\u{00b7}{}", c, mono)
        };
        if first {
            out.push_str(&term);
            first = false;
        } else if let Some(stripped) = term.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(stripped);
        } else {
            out.push_str(" + ");
            out.push_str(&term);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi(holo: &[u8], anti: &[u8]) -> Form {
        Form::basis(BasisForm::from_indices(holo, anti))
    }

    /// Brute-force sign oracle: sort the concatenated factor word into
    /// canonical order (holo block then anti block, each ascending) by
    /// adjacent transpositions and count swaps.
    fn bruteforce_wedge(a: &BasisForm, b: &BasisForm) -> Option<(BasisForm, i32)> {
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
        struct Factor {
            anti: bool,
            index: u8,
        }
        let mut word: Vec<Factor> = Vec::new();
        for j in a.holo_indices() {
            word.push(Factor { anti: false, index: j });
        }
        for j in a.anti_indices() {
            word.push(Factor { anti: true, index: j });
        }
        for j in b.holo_indices() {
            word.push(Factor { anti: false, index: j });
        }
        for j in b.anti_indices() {
            word.push(Factor { anti: true, index: j });
        }
        let mut seen = std::collections::BTreeSet::new();
        for f in &word {
            if !seen.insert(*f) {
                return None;
            }
        }
        let mut swaps = 0u32;
        for i in 0..word.len() {
            for j in (i + 1..word.len()).rev() {
                if word[j - 1] > word[j] {
                    word.swap(j - 1, j);
                    swaps += 1;
                }
            }
        }
        let holo: Vec<u8> = word.iter().filter(|f| !f.anti).map(|f| f.index).collect();
        let anti: Vec<u8> = word.iter().filter(|f| f.anti).map(|f| f.index).collect();
        let sign = if swaps % 2 == 0 { 1 } else { -1 };
        Some((BasisForm::from_indices(&holo, &anti), sign))
    }

    #[test]
    fn simple_wedges() {
        assert_eq!(phi(&[1], &[]).wedge(&phi(&[2], &[])), phi(&[1, 2], &[]));
        assert!(phi(&[1], &[]).wedge(&phi(&[1], &[])).is_zero());
    }

    #[test]
    fn wedge_sign_matches_bruteforce_everywhere() {
        let n = 4u8;
        let mut all = Vec::new();
        for p in 0..=n {
            for q in 0..=n {
                all.extend(bidegree_basis(n, p, q));
            }
        }
        for a in &all {
            for b in &all {
                let fast = a.wedge(b);
                let slow = bruteforce_wedge(a, b);
                assert_eq!(fast, slow, "wedge {} ^ {}", a, b);
            }
        }
    }

    #[test]
    fn cross_term_from_structure_equation_expansion() {
        // phi^{4 ~1} ^ phi^{2 ~2 ~3} reorders with an even permutation.
        let a = BasisForm::from_indices(&[4], &[1]);
        let b = BasisForm::from_indices(&[2], &[2, 3]);
        let (c, sign) = a.wedge(&b).unwrap();
        assert_eq!(c, BasisForm::from_indices(&[2, 4], &[1, 2, 3]));
        assert_eq!(sign, bruteforce_wedge(&a, &b).unwrap().1);
        assert_eq!(sign, 1);
    }

    #[test]
    fn bidegree_projection() {
        let f = phi(&[1, 2], &[]).add(&phi(&[1], &[2]));
        assert_eq!(f.bidegree_project(2, 0), phi(&[1, 2], &[]));
        assert_eq!(f.bidegree_project(1, 1), phi(&[1], &[2]));
        assert!(f.bidegree_project(0, 2).is_zero());
        let back = f.bidegree_project(2, 0).add(&f.bidegree_project(1, 1));
        assert_eq!(back, f);
    }

    #[test]
    fn j_action() {
        let f = phi(&[1], &[]);
        assert_eq!(f.j_act(), f.scale_gauss(&GaussRat::i()));
        // (2,0) + (0,2) mix picks up i^{+-2} = -1 on each component.
        let g = phi(&[1, 2], &[]).add(&phi(&[], &[1, 2]));
        assert_eq!(g.j_act(), g.neg());
        // J^2 = (-1)^k on k-forms.
        let h = phi(&[1], &[2]).add(&phi(&[3, 4], &[]));
        assert_eq!(h.j_act().j_act(), h);
    }

    #[test]
    fn conjugation_basics() {
        let t = FunctionTable::new();
        assert_eq!(phi(&[1], &[]).conjugate(&t), phi(&[], &[1]));
        let f = phi(&[1, 2], &[3]).scale_gauss(&GaussRat::i());
        assert_eq!(f.conjugate(&t).conjugate(&t), f);
    }

    #[test]
    fn canonical_order_groups_by_degree_then_p() {
        let f = phi(&[], &[2, 3]).add(&phi(&[2], &[3])).add(&phi(&[2, 3], &[]));
        let keys: Vec<(u8, u8)> = f.terms().map(|(b, _)| b.bidegree()).collect();
        assert_eq!(keys, vec![(2, 0), (1, 1), (0, 2)]);
    }

    #[test]
    fn display_literals() {
        let f = phi(&[2, 4], &[1, 2, 3]);
        assert_eq!(f.to_string(), "phi[2,4,~1,~2,~3]");
        let g = phi(&[1], &[1]).scale_gauss(&GaussRat::i().neg());
        assert_eq!(g.to_string(), "-i*phi[1,~1]");
        let h = phi(&[1], &[]).sub(&phi(&[2], &[]));
        assert_eq!(h.to_string(), "phi[1] - phi[2]");
    }
}
