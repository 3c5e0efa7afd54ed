//! The operator calculus on a coframe model: the exterior derivative and its
//! four bigraded components, `d^c`, the Hodge star and the pointwise
//! codifferentials, the Lefschetz pair `L`/`Lam`, the five Laplacians, and
//! exact matrix assembly of operator expressions on bidegree windows.

use crate::exterior::{bidegree_basis, BasisForm, Form};
use crate::linalg::{Mat, Subspace};
use crate::model::Model;
use crate::scalars::{Derivation, DiffPoly, GaussRat, PolyMonomial};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OperatorError {
    #[error("input must be homogeneous of one bidegree")]
    NonHomogeneous,
    #[error("conjugation is not complex-linear; no matrix on this window")]
    ContainsConj,
    #[error("matrix has symbolic entries; exact rank needs constant entries")]
    SymbolicEntries,
    #[error("form does not lie in the domain window ({0},{1})")]
    DomainMismatch(u8, u8),
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("{0}")]
    Parse(String),
}

/// Differential of a coefficient against the frame pairing:
/// `df = sum_j V_j(f) phi^j + Vbar_j(f) phibar^j`.
fn coeff_differential(m: &Model, c: &DiffPoly) -> Form {
    let mut out = Form::zero();
    for j in 1..=m.n {
        let dj = c.derive(Derivation::holo(j), &m.functions);
        if !dj.is_zero() {
            out = out.add(&Form::monomial(BasisForm::from_indices(&[j], &[]), dj));
        }
        let djb = c.derive(Derivation::anti(j), &m.functions);
        if !djb.is_zero() {
            out = out.add(&Form::monomial(BasisForm::from_indices(&[], &[j]), djb));
        }
    }
    out
}

/// Leibniz expansion of `d` on one basis monomial.
fn d_basis(m: &Model, b: &BasisForm) -> Form {
    let mut factors: Vec<(bool, u8)> = Vec::with_capacity(b.degree() as usize);
    factors.extend(b.holo_indices().into_iter().map(|j| (false, j)));
    factors.extend(b.anti_indices().into_iter().map(|j| (true, j)));
    let mut out = Form::zero();
    for t in 0..factors.len() {
        let (anti, j) = factors[t];
        let df = if anti { m.dphi_bar(j) } else { m.dphi(j).clone() };
        if df.is_zero() {
            continue;
        }
        let (mut ph, mut pa, mut sh, mut sa) = (0u16, 0u16, 0u16, 0u16);
        for (k, &(a, idx)) in factors.iter().enumerate() {
            if k < t {
                if a {
                    pa |= 1 << (idx - 1);
                } else {
                    ph |= 1 << (idx - 1);
                }
            } else if k > t {
                if a {
                    sa |= 1 << (idx - 1);
                } else {
                    sh |= 1 << (idx - 1);
                }
            }
        }
        let prefix = Form::basis(BasisForm { holo: ph, anti: pa });
        let suffix = Form::basis(BasisForm { holo: sh, anti: sa });
        let mut term = prefix.wedge(&df).wedge(&suffix);
        if t % 2 == 1 {
            term = term.neg();
        }
        out = out.add(&term);
    }
    out
}

/// The exterior derivative, extended to all forms by the Leibniz rule from
/// the structure equations.
pub fn apply_d(m: &Model, f: &Form) -> Form {
    let mut out = Form::zero();
    for (b, c) in f.terms() {
        out = out.add(&coeff_differential(m, c).wedge(&Form::basis(*b)));
        out = out.add(&d_basis(m, b).scale(c));
    }
    out
}

/// The four bigraded components of `d` on a homogeneous `(p,q)`-form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitD {
    pub mu: Form,
    pub del: Form,
    pub delbar: Form,
    pub mubar: Form,
}

pub fn split_d(m: &Model, f: &Form) -> Result<SplitD, OperatorError> {
    let (p, q) = match f.homogeneous_bidegree() {
        Some(pq) => pq,
        None if f.is_zero() => (0, 0),
        None => return Err(OperatorError::NonHomogeneous),
    };
    let df = apply_d(m, f);
    let project = |dp: i16, dq: i16| -> Form {
        let (tp, tq) = (p as i16 + dp, q as i16 + dq);
        if tp < 0 || tq < 0 {
            Form::zero()
        } else {
            df.bidegree_project(tp as u8, tq as u8)
        }
    };
    Ok(SplitD {
        mu: project(2, -1),
        del: project(1, 0),
        delbar: project(0, 1),
        mubar: project(-1, 2),
    })
}

fn component_of_d(m: &Model, f: &Form, dp: i16, dq: i16) -> Form {
    let mut out = Form::zero();
    for (p, q) in f.bidegrees() {
        let (tp, tq) = (p as i16 + dp, q as i16 + dq);
        if tp < 0 || tq < 0 {
            continue;
        }
        let part = apply_d(m, &f.bidegree_project(p, q)).bidegree_project(tp as u8, tq as u8);
        out = out.add(&part);
    }
    out
}

/// `mu`: the `(p+2, q-1)` component of `d`, extended componentwise.
pub fn mu(m: &Model, f: &Form) -> Form {
    component_of_d(m, f, 2, -1)
}

/// `del`: the `(p+1, q)` component of `d`.
pub fn del(m: &Model, f: &Form) -> Form {
    component_of_d(m, f, 1, 0)
}

/// `delbar`: the `(p, q+1)` component of `d`.
pub fn delbar(m: &Model, f: &Form) -> Form {
    component_of_d(m, f, 0, 1)
}

/// `mubar`: the `(p-1, q+2)` component of `d`.
pub fn mubar(m: &Model, f: &Form) -> Form {
    component_of_d(m, f, -1, 2)
}

/// Hodge star of one monomial: the complementary monomial scaled by the unit
/// solving the defining relation `alpha ^ *conj(beta) = <alpha,beta> vol`
/// against the unitary-coframe inner product. No sign table is used.
fn star_monomial(m: &Model, b: &BasisForm) -> (BasisForm, GaussRat) {
    let full = (1u16 << m.n) - 1;
    let (conj_b, conj_sign) = b.conjugate();
    let complement = BasisForm { holo: full & !conj_b.holo, anti: full & !conj_b.anti };
    let (top, wedge_sign) = conj_b.wedge(&complement).expect("complement blocks are disjoint");
    debug_assert_eq!(top, BasisForm::top(m.n));
    let mut unit = m.vol_unit();
    if conj_sign * wedge_sign < 0 {
        unit = unit.neg();
    }
    (complement, unit)
}

/// The complex-linear Hodge star; maps `(p,q)` to `(n-q,n-p)`.
pub fn star(m: &Model, f: &Form) -> Form {
    let mut out = Form::zero();
    for (b, c) in f.terms() {
        let (sb, unit) = star_monomial(m, b);
        out = out.add(&Form::monomial(sb, c.scale(&unit)));
    }
    out
}

/// Inverse Hodge star: `(-1)^k star` on the degree-`k` part.
pub fn star_inv(m: &Model, f: &Form) -> Form {
    let mut out = Form::zero();
    for (b, c) in f.terms() {
        let (sb, mut unit) = star_monomial(m, b);
        if b.degree() % 2 == 1 {
            unit = unit.neg();
        }
        out = out.add(&Form::monomial(sb, c.scale(&unit)));
    }
    out
}

/// Which pointwise codifferential to take: the formal adjoints
/// `d* = -*d*`, `mu* = -*mubar*`, `del* = -*delbar*`, `delbar* = -*del*`,
/// `mubar* = -*mu*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Codifferential {
    D,
    Mu,
    Del,
    Delbar,
    Mubar,
}

pub fn codifferential(m: &Model, f: &Form, which: Codifferential) -> Form {
    let starred = star(m, f);
    let inner = match which {
        Codifferential::D => apply_d(m, &starred),
        Codifferential::Mu => mubar(m, &starred),
        Codifferential::Del => delbar(m, &starred),
        Codifferential::Delbar => del(m, &starred),
        Codifferential::Mubar => mu(m, &starred),
    };
    star(m, &inner).neg()
}

/// The Lefschetz operator `L^r = omega^r ^ -`.
pub fn lefschetz(m: &Model, f: &Form, r: u32) -> Form {
    m.omega().wedge_pow(r).wedge(f)
}

/// The dual Lefschetz operator `Lam = star^-1 L star`.
pub fn lambda(m: &Model, f: &Form) -> Form {
    star_inv(m, &lefschetz(m, &star(m, f), 1))
}

/// `d^c = J^-1 d J`.
pub fn dc(m: &Model, f: &Form) -> Form {
    let jf = f.j_act();
    let djf = apply_d(m, &jf);
    // J^-1 multiplies each (p,q) component by i^(q-p).
    let mut out = Form::zero();
    for (b, c) in djf.terms() {
        let factor = GaussRat::i_pow(b.q() as i32 - b.p() as i32);
        out = out.add(&Form::monomial(*b, c.scale(&factor)));
    }
    out
}

/// Pointwise Hermitian inner product against the orthonormal monomial basis;
/// conjugate-linear in the second argument. Constant forms give constants.
pub fn inner_product(m: &Model, f: &Form, g: &Form) -> DiffPoly {
    let mut acc = DiffPoly::zero();
    for (b, c) in f.terms() {
        let gc = g.coeff(b);
        if !gc.is_zero() {
            acc = acc.add(&c.mul(&gc.conjugate(&m.functions)));
        }
    }
    acc
}

/// Primitive operator alphabet for expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimOp {
    Id,
    D,
    Mu,
    Del,
    Delbar,
    Mubar,
    Dc,
    Star,
    StarInv,
    DStar,
    MuStar,
    DelStar,
    DelbarStar,
    MubarStar,
    L,
    Lam,
    J,
    Conj,
    LapD,
    LapDel,
    LapDelbar,
    LapBC,
    LapA,
}

impl PrimOp {
    pub fn name(self) -> &'static str {
        match self {
            PrimOp::Id => "id",
            PrimOp::D => "d",
            PrimOp::Mu => "mu",
            PrimOp::Del => "del",
            PrimOp::Delbar => "delbar",
            PrimOp::Mubar => "mubar",
            PrimOp::Dc => "dc",
            PrimOp::Star => "star",
            PrimOp::StarInv => "starinv",
            PrimOp::DStar => "dstar",
            PrimOp::MuStar => "mustar",
            PrimOp::DelStar => "delstar",
            PrimOp::DelbarStar => "delbarstar",
            PrimOp::MubarStar => "mubarstar",
            PrimOp::L => "L",
            PrimOp::Lam => "Lam",
            PrimOp::J => "J",
            PrimOp::Conj => "conj",
            PrimOp::LapD => "lapD",
            PrimOp::LapDel => "lapDel",
            PrimOp::LapDelbar => "lapDelbar",
            PrimOp::LapBC => "lapBC",
            PrimOp::LapA => "lapA",
        }
    }

    fn from_name(s: &str) -> Option<PrimOp> {
        use PrimOp::*;
        Some(match s {
            "id" => Id,
            "d" => D,
            "mu" => Mu,
            "del" => Del,
            "delbar" => Delbar,
            "mubar" => Mubar,
            "dc" => Dc,
            "star" => Star,
            "starinv" => StarInv,
            "dstar" => DStar,
            "mustar" => MuStar,
            "delstar" => DelStar,
            "delbarstar" => DelbarStar,
            "mubarstar" => MubarStar,
            "L" => L,
            "Lam" => Lam,
            "J" => J,
            "conj" => Conj,
            "lapD" => LapD,
            "lapDel" => LapDel,
            "lapDelbar" => LapDelbar,
            "lapBC" => LapBC,
            "lapA" => LapA,
            _ => return None,
        })
    }
}

/// A composition/sum tree over the primitive operator alphabet.
/// `compose([A, B])` is the operator `A B` (apply `B` first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OpExpr {
    Prim(PrimOp),
    Scale(GaussRat, Box<OpExpr>),
    Sum(Vec<OpExpr>),
    Compose(Vec<OpExpr>),
}

impl OpExpr {
    pub fn prim(op: PrimOp) -> OpExpr {
        OpExpr::Prim(op)
    }

    pub fn compose(ops: impl IntoIterator<Item = OpExpr>) -> OpExpr {
        OpExpr::Compose(ops.into_iter().collect())
    }

    pub fn compose_prims(ops: impl IntoIterator<Item = PrimOp>) -> OpExpr {
        OpExpr::Compose(ops.into_iter().map(OpExpr::Prim).collect())
    }

    pub fn sum(ops: impl IntoIterator<Item = OpExpr>) -> OpExpr {
        OpExpr::Sum(ops.into_iter().collect())
    }

    pub fn scale(c: GaussRat, inner: OpExpr) -> OpExpr {
        OpExpr::Scale(c, Box::new(inner))
    }

    /// Iterated composition `self^k`.
    pub fn pow(&self, k: u32) -> OpExpr {
        OpExpr::Compose(std::iter::repeat_n(self.clone(), k as usize).collect())
    }

    pub fn contains_conj(&self) -> bool {
        match self {
            OpExpr::Prim(op) => *op == PrimOp::Conj,
            OpExpr::Scale(_, e) => e.contains_conj(),
            OpExpr::Sum(v) | OpExpr::Compose(v) => v.iter().any(|e| e.contains_conj()),
        }
    }

    pub fn apply(&self, m: &Model, f: &Form) -> Form {
        match self {
            OpExpr::Prim(op) => apply_prim(m, *op, f),
            OpExpr::Scale(c, e) => e.apply(m, f).scale_gauss(c),
            OpExpr::Sum(v) => {
                let mut acc = Form::zero();
                for e in v {
                    acc = acc.add(&e.apply(m, f));
                }
                acc
            }
            OpExpr::Compose(v) => {
                let mut acc = f.clone();
                for e in v.iter().rev() {
                    acc = e.apply(m, &acc);
                }
                acc
            }
        }
    }
}

impl fmt::Display for OpExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpExpr::Prim(op) => write!(f, "{}", op.name()),
            OpExpr::Scale(c, e) => write!(f, "({}) ({})", c, e),
            OpExpr::Sum(v) => {
                for (k, e) in v.iter().enumerate() {
                    if k > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{}", e)?;
                }
                Ok(())
            }
            OpExpr::Compose(v) => {
                for (k, e) in v.iter().enumerate() {
                    if k > 0 {
                        write!(f, " ")?;
                    }
                    if matches!(e, OpExpr::Sum(_)) {
                        write!(f, "({})", e)?;
                    } else {
                        write!(f, "{}", e)?;
                    }
                }
                Ok(())
            }
        }
    }
}

fn apply_prim(m: &Model, op: PrimOp, f: &Form) -> Form {
    match op {
        PrimOp::Id => f.clone(),
        PrimOp::D => apply_d(m, f),
        PrimOp::Mu => mu(m, f),
        PrimOp::Del => del(m, f),
        PrimOp::Delbar => delbar(m, f),
        PrimOp::Mubar => mubar(m, f),
        PrimOp::Dc => dc(m, f),
        PrimOp::Star => star(m, f),
        PrimOp::StarInv => star_inv(m, f),
        PrimOp::DStar => codifferential(m, f, Codifferential::D),
        PrimOp::MuStar => codifferential(m, f, Codifferential::Mu),
        PrimOp::DelStar => codifferential(m, f, Codifferential::Del),
        PrimOp::DelbarStar => codifferential(m, f, Codifferential::Delbar),
        PrimOp::MubarStar => codifferential(m, f, Codifferential::Mubar),
        PrimOp::L => lefschetz(m, f, 1),
        PrimOp::Lam => lambda(m, f),
        PrimOp::J => f.j_act(),
        PrimOp::Conj => f.conjugate(&m.functions),
        lap => laplacian_expansion(lap).apply(m, f),
    }
}

/// The defining composite of each Laplacian.
pub fn laplacian_expansion(op: PrimOp) -> OpExpr {
    use PrimOp::*;
    match op {
        LapD => OpExpr::sum([
            OpExpr::compose_prims([D, DStar]),
            OpExpr::compose_prims([DStar, D]),
        ]),
        LapDel => OpExpr::sum([
            OpExpr::compose_prims([Del, DelStar]),
            OpExpr::compose_prims([DelStar, Del]),
        ]),
        LapDelbar => OpExpr::sum([
            OpExpr::compose_prims([Delbar, DelbarStar]),
            OpExpr::compose_prims([DelbarStar, Delbar]),
        ]),
        LapBC => OpExpr::sum([
            OpExpr::compose_prims([Del, Delbar, DelbarStar, DelStar]),
            OpExpr::compose_prims([DelbarStar, DelStar, Del, Delbar]),
            OpExpr::compose_prims([DelStar, Delbar, DelbarStar, Del]),
            OpExpr::compose_prims([DelbarStar, Del, DelStar, Delbar]),
            OpExpr::compose_prims([DelStar, Del]),
            OpExpr::compose_prims([DelbarStar, Delbar]),
        ]),
        LapA => OpExpr::sum([
            OpExpr::compose_prims([Del, Delbar, DelbarStar, DelStar]),
            OpExpr::compose_prims([DelbarStar, DelStar, Del, Delbar]),
            OpExpr::compose_prims([Del, DelbarStar, Delbar, DelStar]),
            OpExpr::compose_prims([Delbar, DelStar, Del, DelbarStar]),
            OpExpr::compose_prims([Del, DelStar]),
            OpExpr::compose_prims([Delbar, DelbarStar]),
        ]),
        other => OpExpr::Prim(other),
    }
}

/// Parses the operator surface syntax: composition by juxtaposition
/// (`del delbar star`), sums with `+`/`-`, scalar prefixes (`-i del`),
/// parentheses.
pub fn parse_op_expr(text: &str) -> Result<OpExpr, OperatorError> {
    let toks = crate::parse::op_tokens(text).map_err(|e| OperatorError::Parse(e.to_string()))?;
    let mut p = OpParser { toks, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(OperatorError::Parse("trailing input".into()));
    }
    Ok(e)
}

pub(crate) enum OpTok {
    Name(String),
    Int(i64),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
}

struct OpParser {
    toks: Vec<OpTok>,
    pos: usize,
}

impl OpParser {
    fn peek(&self) -> Option<&OpTok> {
        self.toks.get(self.pos)
    }

    fn expr(&mut self) -> Result<OpExpr, OperatorError> {
        let mut terms = vec![self.term(false)?];
        loop {
            match self.peek() {
                Some(OpTok::Plus) => {
                    self.pos += 1;
                    terms.push(self.term(false)?);
                }
                Some(OpTok::Minus) => {
                    self.pos += 1;
                    terms.push(self.term(true)?);
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { OpExpr::Sum(terms) })
    }

    /// One juxtaposition term; scalar atoms multiply into a coefficient.
    fn term(&mut self, negated: bool) -> Result<OpExpr, OperatorError> {
        let mut coeff = if negated { GaussRat::from_int(-1) } else { GaussRat::one() };
        let mut ops: Vec<OpExpr> = Vec::new();
        let mut saw_atom = false;
        loop {
            match self.peek() {
                Some(OpTok::Star) => {
                    self.pos += 1;
                }
                Some(OpTok::Slash) => {
                    self.pos += 1;
                    match self.factor()? {
                        Some(Atom::Scalar(c)) if !c.is_zero() => coeff = coeff.div(&c),
                        _ => return Err(OperatorError::Parse("division needs a nonzero scalar".into())),
                    }
                    saw_atom = true;
                }
                Some(OpTok::Minus) if !saw_atom => {
                    self.pos += 1;
                    coeff = coeff.neg();
                }
                _ => match self.factor()? {
                    Some(Atom::Scalar(c)) => {
                        coeff = coeff.mul(&c);
                        saw_atom = true;
                    }
                    Some(Atom::Op(e)) => {
                        ops.push(e);
                        saw_atom = true;
                    }
                    None => break,
                },
            }
        }
        if !saw_atom {
            return Err(OperatorError::Parse("expected an operator term".into()));
        }
        let body = match ops.len() {
            0 => OpExpr::Prim(PrimOp::Id),
            1 => ops.pop().unwrap(),
            _ => OpExpr::Compose(ops),
        };
        Ok(if coeff.is_one() { body } else { OpExpr::scale(coeff, body) })
    }

    fn factor(&mut self) -> Result<Option<Atom>, OperatorError> {
        match self.peek() {
            Some(OpTok::Name(s)) => {
                let name = s.clone();
                self.pos += 1;
                if name == "i" {
                    return Ok(Some(Atom::Scalar(GaussRat::i())));
                }
                match PrimOp::from_name(&name) {
                    Some(op) => Ok(Some(Atom::Op(OpExpr::Prim(op)))),
                    None => Err(OperatorError::UnknownOperator(name)),
                }
            }
            Some(OpTok::Int(n)) => {
                let v = *n;
                self.pos += 1;
                Ok(Some(Atom::Scalar(GaussRat::from_int(v))))
            }
            Some(OpTok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(OpTok::RParen) => {
                        self.pos += 1;
                        Ok(Some(Atom::Op(inner)))
                    }
                    _ => Err(OperatorError::Parse("expected `)`".into())),
                }
            }
            _ => Ok(None),
        }
    }
}

enum Atom {
    Scalar(GaussRat),
    Op(OpExpr),
}

/// Exact matrix of an operator expression restricted to the coframe-constant
/// span of one bidegree window: the stored columns are the images of the
/// canonical basis monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorMatrix {
    pub domain: (u8, u8),
    pub domain_basis: Vec<BasisForm>,
    pub columns: Vec<Form>,
}

pub fn operator_matrix(
    m: &Model,
    expr: &OpExpr,
    p: u8,
    q: u8,
) -> Result<OperatorMatrix, OperatorError> {
    if expr.contains_conj() {
        return Err(OperatorError::ContainsConj);
    }
    let basis = bidegree_basis(m.n, p, q);
    let columns = basis.iter().map(|b| expr.apply(m, &Form::basis(*b))).collect();
    Ok(OperatorMatrix { domain: (p, q), domain_basis: basis, columns })
}

impl OperatorMatrix {
    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(|c| c.is_zero())
    }

    pub fn codomain_bidegrees(&self) -> Vec<(u8, u8)> {
        let mut v: Vec<(u8, u8)> = self.columns.iter().flat_map(|c| c.bidegrees()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Row keys over which the columns are expanded: one row per pair of a
    /// target monomial and a coefficient monomial. Stacking one rational
    /// matrix per coefficient monomial reduces symbolic kernels to exact
    /// rational ones.
    fn row_keys(&self) -> Vec<(BasisForm, PolyMonomial)> {
        let mut keys: BTreeSet<(BasisForm, PolyMonomial)> = BTreeSet::new();
        for col in &self.columns {
            for (b, c) in col.terms() {
                for (mono, _) in c.terms() {
                    keys.insert((*b, mono.clone()));
                }
            }
        }
        keys.into_iter().collect()
    }

    /// The kernel among constant-coefficient combinations of the domain
    /// basis, as a canonical subspace of coordinate vectors.
    pub fn kernel(&self) -> Subspace {
        let keys = self.row_keys();
        if keys.is_empty() {
            // Zero map: everything is in the kernel.
            return Subspace::from_vectors(
                self.domain_basis.len(),
                (0..self.domain_basis.len()).map(|j| {
                    let mut v = vec![GaussRat::zero(); self.domain_basis.len()];
                    v[j] = GaussRat::one();
                    v
                }),
            );
        }
        let mut mat = Mat::zero(keys.len(), self.columns.len());
        for (j, col) in self.columns.iter().enumerate() {
            for (b, c) in col.terms() {
                for (mono, coeff) in c.terms() {
                    let r = keys.binary_search(&(*b, mono.clone())).expect("key present");
                    *mat.at_mut(r, j) = coeff.clone();
                }
            }
        }
        Subspace::from_vectors(self.columns.len(), mat.kernel_basis())
    }

    /// Exact rank; requires constant entries.
    pub fn rank(&self) -> Result<usize, OperatorError> {
        if !self.columns.iter().all(|c| c.has_constant_coefficients()) {
            return Err(OperatorError::SymbolicEntries);
        }
        let keys = self.row_keys();
        if keys.is_empty() {
            return Ok(0);
        }
        let mut mat = Mat::zero(keys.len(), self.columns.len());
        for (j, col) in self.columns.iter().enumerate() {
            for (b, c) in col.terms() {
                let r = keys.binary_search(&(*b, PolyMonomial::one())).expect("key present");
                *mat.at_mut(r, j) = c.constant_part();
            }
        }
        Ok(mat.rank())
    }

    /// Applies the assembled linear map to a form lying in the domain window.
    pub fn apply_to(&self, f: &Form) -> Result<Form, OperatorError> {
        let mut out = Form::zero();
        for (b, c) in f.terms() {
            let Ok(j) = self.domain_basis.binary_search(b) else {
                return Err(OperatorError::DomainMismatch(self.domain.0, self.domain.1));
            };
            out = out.add(&self.columns[j].scale(c));
        }
        Ok(out)
    }

    /// Coordinates of a constant-coefficient form in the domain basis.
    pub fn coordinates(&self, f: &Form) -> Result<Vec<GaussRat>, OperatorError> {
        coordinates_in(&self.domain_basis, f)
    }
}

/// Coordinates of a constant-coefficient form against a monomial basis.
pub fn coordinates_in(basis: &[BasisForm], f: &Form) -> Result<Vec<GaussRat>, OperatorError> {
    let mut v = vec![GaussRat::zero(); basis.len()];
    for (b, c) in f.terms() {
        if !c.is_constant() {
            return Err(OperatorError::SymbolicEntries);
        }
        let Ok(j) = basis.binary_search(b) else {
            return Err(OperatorError::DomainMismatch(b.p(), b.q()));
        };
        v[j] = c.constant_part();
    }
    Ok(v)
}

/// Rebuilds a form from coordinates against a monomial basis.
pub fn form_from_coordinates(basis: &[BasisForm], coords: &[GaussRat]) -> Form {
    let mut f = Form::zero();
    for (b, c) in basis.iter().zip(coords) {
        if !c.is_zero() {
            f = f.add(&Form::monomial(*b, DiffPoly::constant(c.clone())));
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_form;

    fn torus() -> Model {
        Model::load("torus8").unwrap()
    }

    fn nil() -> Model {
        Model::load("h12xT3").unwrap()
    }

    fn pf(m: &Model, s: &str) -> Form {
        parse_form(s, m.n, &m.functions).unwrap()
    }

    #[test]
    fn d_on_closed_coframe_elements() {
        let m = nil();
        assert!(apply_d(&m, &pf(&m, "phi[3]")).is_zero());
        assert!(apply_d(&m, &pf(&m, "phi[4]")).is_zero());
        assert!(apply_d(&m, m.omega()).is_zero());
        let t = torus();
        assert!(apply_d(&t, t.omega()).is_zero());
    }

    #[test]
    fn d_of_torus_two_two_form() {
        // d phi^{12~2~3} has the (2,3) part V4(g) phi^{4~12~2~3} and the
        // (1,4) part -V4b(g) phi^{2~1~2~3~4}.
        let m = torus();
        let f = pf(&m, "phi[1,2,~2,~3]");
        let df = apply_d(&m, &f);
        let delbar_part = pf(&m, "V4(g)*phi[4,~1,2,~2,~3]");
        assert_eq!(df.bidegree_project(2, 3), delbar_part);
        let mubar_part = pf(&m, "-V4b(g)*phi[2,~1,~2,~3,~4]");
        assert_eq!(df.bidegree_project(1, 4), mubar_part);
        assert_eq!(df, delbar_part.add(&mubar_part));
    }

    #[test]
    fn split_of_torus_coframe() {
        let m = torus();
        let s = split_d(&m, &pf(&m, "phi[1]")).unwrap();
        assert!(s.mu.is_zero());
        assert!(s.del.is_zero());
        assert_eq!(s.delbar, pf(&m, "V4(g)*phi[4,~1]"));
        assert_eq!(s.mubar, pf(&m, "-V4b(g)*phi[~1,~4]"));
    }

    #[test]
    fn split_of_nilmanifold_coframe() {
        // On a (1,0)-form the (2,0) part of d is the del component; the mu
        // window (3,-1) is empty.
        let m = nil();
        let s = split_d(&m, &pf(&m, "phi[1]")).unwrap();
        assert!(s.mu.is_zero());
        assert_eq!(s.del, pf(&m, "(-i/4)*phi[2,3]"));
        assert_eq!(s.delbar, pf(&m, "(-i/4)*phi[2,~3] + (i/4)*phi[3,~2]"));
        assert_eq!(s.mubar, pf(&m, "(-i/4)*phi[~2,~3]"));
        let total = s.mu.add(&s.del).add(&s.delbar).add(&s.mubar);
        assert_eq!(total, apply_d(&m, &pf(&m, "phi[1]")));
    }

    #[test]
    fn split_rejects_mixed_bidegrees() {
        let m = nil();
        let f = pf(&m, "phi[1,2] + phi[1,~2]");
        assert_eq!(split_d(&m, &f), Err(OperatorError::NonHomogeneous));
    }

    #[test]
    fn star_of_paper_monomial() {
        let m = torus();
        let f = pf(&m, "phi[1,2,~2,~3]");
        assert_eq!(star(&m, &f), pf(&m, "phi[1,4,~3,~4]"));
        assert_eq!(star(&m, &Form::one()), *m.vol());
    }

    #[test]
    fn star_defining_relation_on_monomials() {
        // alpha ^ *conj(beta) = <alpha,beta> vol over all (p,q) monomials.
        let m = nil();
        for p in 0..=4u8 {
            for q in 0..=4u8 {
                for a in bidegree_basis(4, p, q) {
                    for b in bidegree_basis(4, p, q) {
                        let alpha = Form::basis(a);
                        let beta = Form::basis(b);
                        let lhs = alpha.wedge(&star(&m, &beta.conjugate(&m.functions)));
                        let rhs = m.vol().scale(&inner_product(&m, &alpha, &beta));
                        assert_eq!(lhs, rhs, "defining relation at {} {}", a, b);
                    }
                }
            }
        }
    }

    #[test]
    fn star_squares_to_sign() {
        let m = torus();
        for p in 0..=4u8 {
            for q in 0..=4u8 {
                for b in bidegree_basis(4, p, q) {
                    let f = Form::basis(b);
                    let ss = star(&m, &star(&m, &f));
                    let expected = if b.degree() % 2 == 0 { f.clone() } else { f.neg() };
                    assert_eq!(ss, expected, "** at {}", b);
                    assert_eq!(star_inv(&m, &star(&m, &f)), f);
                }
            }
        }
    }

    #[test]
    fn codifferentials_lower_bidegree() {
        let m = nil();
        let f = pf(&m, "phi[1,2,~1,~3]");
        let d = codifferential(&m, &f, Codifferential::Del);
        for (b, _) in d.terms() {
            assert_eq!(b.bidegree(), (1, 2));
        }
        assert!(codifferential(&m, m.omega(), Codifferential::Del).is_zero());
        assert!(codifferential(&m, m.vol(), Codifferential::D).is_zero());
        let t = torus();
        assert!(codifferential(&t, t.omega(), Codifferential::Del).is_zero());
    }

    #[test]
    fn delstar_of_omega_via_independent_matrix_assembly() {
        // The direct composition -*(delbar(*omega)) and the assembled
        // matrix of the same expression both annihilate omega.
        for m in [torus(), nil()] {
            let direct = codifferential(&m, m.omega(), Codifferential::Del);
            assert!(direct.is_zero());
            let mat = operator_matrix(&m, &OpExpr::prim(PrimOp::DelStar), 1, 1).unwrap();
            let via_matrix = mat.apply_to(m.omega()).unwrap();
            assert!(via_matrix.is_zero());
        }
    }

    #[test]
    fn dc_expansion_on_middle_window() {
        // On (n-1,n-1)-forms both extreme components of d vanish, so
        // i dc(omega^{n-2} ^ alpha) = omega^{n-2} ^ (del - delbar) alpha
        // for any (1,1)-form alpha.
        for m in [torus(), nil()] {
            for s in ["phi[2,~1]", "phi[1,~1] - phi[3,~3]", "i*phi[4,~2]"] {
                let alpha = pf(&m, s);
                let block = m.omega().wedge_pow((m.n - 2) as u32).wedge(&alpha);
                assert!(mu(&m, &block).is_zero());
                assert!(mubar(&m, &block).is_zero());
                let lhs = dc(&m, &block).scale_gauss(&GaussRat::i());
                let rhs = m
                    .omega()
                    .wedge_pow((m.n - 2) as u32)
                    .wedge(&del(&m, &alpha).sub(&delbar(&m, &alpha)));
                assert_eq!(lhs, rhs, "dc expansion on {}", s);
            }
        }
    }

    #[test]
    fn lambda_of_omega_is_n() {
        let m = nil();
        let lam = lambda(&m, m.omega());
        assert_eq!(lam, Form::scalar(DiffPoly::constant(GaussRat::from_int(4))));
    }

    #[test]
    fn lefschetz_of_paper_example() {
        // phi^{2~14~4} + phi^{2~13~3} = -i omega ^ phi^{2~1}.
        let m = torus();
        let lhs = pf(&m, "phi[2,~1,4,~4] + phi[2,~1,3,~3]");
        let rhs = lefschetz(&m, &pf(&m, "phi[2,~1]"), 1).scale_gauss(&GaussRat::i().neg());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn dc_identity_on_coframe() {
        for m in [torus(), nil()] {
            for s in ["phi[1]", "phi[1,~2]", "phi[1,2,~3]", "phi[2,3,~1,~4]"] {
                let f = pf(&m, s);
                let lhs = dc(&m, &f);
                let expr = parse_op_expr("i mu - i del + i delbar - i mubar").unwrap();
                assert_eq!(lhs, expr.apply(&m, &f), "dc identity on {}", s);
            }
            assert!(dc(&m, &Form::one()).is_zero());
        }
    }

    #[test]
    fn operator_parser_shapes() {
        let e = parse_op_expr("del delbar star").unwrap();
        assert_eq!(
            e,
            OpExpr::compose_prims([PrimOp::Del, PrimOp::Delbar, PrimOp::Star])
        );
        let e = parse_op_expr("-i delstar").unwrap();
        assert_eq!(e, OpExpr::scale(GaussRat::i().neg(), OpExpr::Prim(PrimOp::DelStar)));
        let e = parse_op_expr("Lam delbar - delbar Lam + i delstar").unwrap();
        match e {
            OpExpr::Sum(v) => assert_eq!(v.len(), 3),
            other => panic!("expected sum, got {:?}", other),
        }
        assert!(parse_op_expr("nosuch").is_err());
    }

    #[test]
    fn matrix_assembly_and_kernel() {
        let m = nil();
        let id = operator_matrix(&m, &OpExpr::prim(PrimOp::Id), 2, 2).unwrap();
        assert_eq!(id.domain_basis.len(), 36);
        assert_eq!(id.rank().unwrap(), 36);
        let lap = operator_matrix(&m, &OpExpr::prim(PrimOp::LapDelbar), 2, 2).unwrap();
        assert_eq!(lap.kernel().dim(), 16);
    }

    #[test]
    fn star_intertwines_bc_and_a_laplacians() {
        // star lapBC = lapA star as matrices on every bidegree.
        for m in [torus(), nil()] {
            let lhs_expr = OpExpr::compose_prims([PrimOp::Star, PrimOp::LapBC]);
            let rhs_expr = OpExpr::compose_prims([PrimOp::LapA, PrimOp::Star]);
            for p in 0..=4u8 {
                for q in 0..=4u8 {
                    let lhs = operator_matrix(&m, &lhs_expr, p, q).unwrap();
                    let rhs = operator_matrix(&m, &rhs_expr, p, q).unwrap();
                    assert_eq!(lhs, rhs, "{} at ({},{})", m.name, p, q);
                }
            }
        }
    }

    #[test]
    fn composition_matches_matrix_product() {
        let m = nil();
        let del_m = operator_matrix(&m, &OpExpr::prim(PrimOp::Del), 1, 1).unwrap();
        let delbar_m = operator_matrix(&m, &OpExpr::prim(PrimOp::Delbar), 2, 1).unwrap();
        let composite =
            operator_matrix(&m, &OpExpr::compose_prims([PrimOp::Delbar, PrimOp::Del]), 1, 1)
                .unwrap();
        for (j, col) in del_m.columns.iter().enumerate() {
            assert_eq!(composite.columns[j], delbar_m.apply_to(col).unwrap());
        }
    }

    #[test]
    fn conj_is_rejected_in_matrices() {
        let m = nil();
        let expr = OpExpr::compose_prims([PrimOp::Star, PrimOp::Conj]);
        assert!(matches!(operator_matrix(&m, &expr, 1, 1), Err(OperatorError::ContainsConj)));
    }

    #[test]
    fn laplacian_expansions_are_the_printed_composites() {
        use PrimOp::*;
        assert_eq!(
            laplacian_expansion(LapD),
            OpExpr::sum([OpExpr::compose_prims([D, DStar]), OpExpr::compose_prims([DStar, D])])
        );
        match laplacian_expansion(LapBC) {
            OpExpr::Sum(terms) => {
                assert_eq!(terms.len(), 6);
                assert_eq!(terms[0], OpExpr::compose_prims([Del, Delbar, DelbarStar, DelStar]));
                assert_eq!(terms[4], OpExpr::compose_prims([DelStar, Del]));
            }
            other => panic!("unexpected expansion {:?}", other),
        }
        match laplacian_expansion(LapA) {
            OpExpr::Sum(terms) => {
                assert_eq!(terms.len(), 6);
                assert_eq!(terms[2], OpExpr::compose_prims([Del, DelbarStar, Delbar, DelStar]));
                assert_eq!(terms[4], OpExpr::compose_prims([Del, DelStar]));
            }
            other => panic!("unexpected expansion {:?}", other),
        }
    }
}
