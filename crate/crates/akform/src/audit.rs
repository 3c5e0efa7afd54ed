//! Batch audits: per-element and per-space verification of the structural
//! statements about harmonic (k,k)-forms on almost Kahler coframe models.
//!
//! Each audit recomputes both sides of its claim independently (harmonic
//! spaces as condition kernels, comparison sets as separate parametrized
//! kernels) and reports pass/fail per clause.

use crate::exterior::{bidegree_basis, BasisForm, Form};
use crate::harmonic::{harmonic_space, is_harmonic, HarmonicOp, HarmonicSpace, BIGRADED_OPS};
use crate::linalg::{Mat, Subspace};
use crate::model::Model;
use crate::operators::{
    coordinates_in, del, delbar, form_from_coordinates, lefschetz, operator_matrix, OpExpr,
    PrimOp,
};
use crate::primitive::Decomposer;
use crate::scalars::{GaussRat, PolyMonomial};
use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum AuditError {
    #[error("audit not applicable: {0}")]
    NotApplicable(String),
    #[error("unknown audit `{0}`")]
    UnknownAudit(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AuditId {
    /// Structure of the primitive components of harmonic (k,k)-forms:
    /// constant bottom coefficient, primitivity of the derivatives of the
    /// (1,1) component, second-order conditions for BC/A.
    ThmKkStructure(HarmonicOp, u8),
    /// `H^{k,k} = C omega^k (+) (H^{k,k} \cap ker L^{n-k})`.
    DecompKk(HarmonicOp, u8),
    /// The n = 4, bidegree (2,2) characterization via primitive pairs.
    Dim8Characterization(HarmonicOp),
    /// `H_BC <= H_del` and `H_A <= H_delbar` at (2,2), n = 4.
    Inclusion22,
    /// Exhibits harmonic (2,2)-forms whose primitive components are not
    /// harmonic (the decomposition does not descend).
    PrimitiveNonDescent,
    /// Every harmonic (2,2)-form decomposes with harmonic components.
    PrimitiveDescent22,
    /// An operator expression vanishes on every bidegree window, e.g.
    /// `zero(star lapBC - lapA star)`.
    OperatorZero(String),
}

impl AuditId {
    pub fn parse(s: &str) -> Result<AuditId, AuditError> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("thm-kk-structure(") {
            let (op, k) = parse_op_k(rest).ok_or_else(|| AuditError::UnknownAudit(s.into()))?;
            return Ok(AuditId::ThmKkStructure(op, k));
        }
        if let Some(rest) = s.strip_prefix("decomp-kk(") {
            let (op, k) = parse_op_k(rest).ok_or_else(|| AuditError::UnknownAudit(s.into()))?;
            return Ok(AuditId::DecompKk(op, k));
        }
        if let Some(rest) = s.strip_prefix("dim8-characterization(") {
            let inner = rest.strip_suffix(')').ok_or_else(|| AuditError::UnknownAudit(s.into()))?;
            let op = HarmonicOp::from_name(inner.trim())
                .ok_or_else(|| AuditError::UnknownAudit(s.into()))?;
            return Ok(AuditId::Dim8Characterization(op));
        }
        if let Some(rest) = s.strip_prefix("zero(") {
            let inner = rest.strip_suffix(')').ok_or_else(|| AuditError::UnknownAudit(s.into()))?;
            crate::operators::parse_op_expr(inner)
                .map_err(|e| AuditError::UnknownAudit(format!("{}: {}", s, e)))?;
            return Ok(AuditId::OperatorZero(inner.to_string()));
        }
        match s {
            "inclusion-2-2" => Ok(AuditId::Inclusion22),
            "primitive-non-descent" => Ok(AuditId::PrimitiveNonDescent),
            "primitive-descent-2-2" => Ok(AuditId::PrimitiveDescent22),
            _ => Err(AuditError::UnknownAudit(s.into())),
        }
    }
}

fn parse_op_k(rest: &str) -> Option<(HarmonicOp, u8)> {
    let inner = rest.strip_suffix(')')?;
    let (op_s, k_s) = inner.split_once(',')?;
    let op = HarmonicOp::from_name(op_s.trim())?;
    let k = k_s.trim().parse().ok()?;
    Some((op, k))
}

impl fmt::Display for AuditId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuditId::ThmKkStructure(op, k) => write!(f, "thm-kk-structure({},{})", op, k),
            AuditId::DecompKk(op, k) => write!(f, "decomp-kk({},{})", op, k),
            AuditId::Dim8Characterization(op) => write!(f, "dim8-characterization({})", op),
            AuditId::Inclusion22 => write!(f, "inclusion-2-2"),
            AuditId::PrimitiveNonDescent => write!(f, "primitive-non-descent"),
            AuditId::PrimitiveDescent22 => write!(f, "primitive-descent-2-2"),
            AuditId::OperatorZero(expr) => write!(f, "zero({})", expr),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClauseStatus {
    Pass,
    Fail,
    Info,
}

#[derive(Clone, Debug)]
pub struct AuditClause {
    pub name: String,
    pub status: ClauseStatus,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct AuditReport {
    pub audit: String,
    pub model: String,
    pub clauses: Vec<AuditClause>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.status != ClauseStatus::Fail)
    }

    fn push(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.clauses.push(AuditClause {
            name: name.into(),
            status: if ok { ClauseStatus::Pass } else { ClauseStatus::Fail },
            detail: detail.into(),
        });
    }

    fn info(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.clauses.push(AuditClause {
            name: name.into(),
            status: ClauseStatus::Info,
            detail: detail.into(),
        });
    }

    /// Detail string of a named clause, when present.
    pub fn detail(&self, name: &str) -> Option<&str> {
        self.clauses.iter().find(|c| c.name == name).map(|c| c.detail.as_str())
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "audit {} on {}: {}",
            self.audit,
            self.model,
            if self.passed() { "PASS" } else { "FAIL" }
        )?;
        for c in &self.clauses {
            let tag = match c.status {
                ClauseStatus::Pass => "pass",
                ClauseStatus::Fail => "FAIL",
                ClauseStatus::Info => "info",
            };
            if c.detail.is_empty() {
                writeln!(f, "  {:<40} {}", c.name, tag)?;
            } else {
                writeln!(f, "  {:<40} {}  ({})", c.name, tag, c.detail)?;
            }
        }
        Ok(())
    }
}

/// Shared computation cache for one model, so audit batteries do not
/// recompute harmonic spaces.
pub struct AuditContext<'a> {
    pub model: &'a Model,
    spaces: RefCell<BTreeMap<(HarmonicOp, u8, u8), HarmonicSpace>>,
}

impl<'a> AuditContext<'a> {
    pub fn new(model: &'a Model) -> Self {
        AuditContext { model, spaces: RefCell::new(BTreeMap::new()) }
    }

    pub fn space(&self, op: HarmonicOp, p: u8, q: u8) -> HarmonicSpace {
        if let Some(s) = self.spaces.borrow().get(&(op, p, q)) {
            return s.clone();
        }
        let s = harmonic_space(self.model, op, p, q);
        self.spaces.borrow_mut().insert((op, p, q), s.clone());
        s
    }

    /// Kernel of the dual Lefschetz operator at a window: the primitive
    /// constant forms.
    fn primitive_subspace(&self, p: u8, q: u8) -> Subspace {
        operator_matrix(self.model, &OpExpr::prim(PrimOp::Lam), p, q)
            .expect("Lam contains no conj")
            .kernel()
    }

    fn omega_pow_coords(&self, k: u8) -> Vec<GaussRat> {
        let m = self.model;
        let window = bidegree_basis(m.n, k, k);
        coordinates_in(&window, &m.omega().wedge_pow(k as u32)).expect("omega^k is constant")
    }
}

pub fn run_audit(m: &Model, id: AuditId) -> Result<AuditReport, AuditError> {
    let ctx = AuditContext::new(m);
    run_audit_in(&ctx, id)
}

pub fn run_audit_in(ctx: &AuditContext, id: AuditId) -> Result<AuditReport, AuditError> {
    let m = ctx.model;
    let mut report =
        AuditReport { audit: id.to_string(), model: m.name.clone(), clauses: Vec::new() };
    match id {
        AuditId::ThmKkStructure(op, k) => thm_kk_structure(ctx, op, k, &mut report)?,
        AuditId::DecompKk(op, k) => decomp_kk(ctx, op, k, &mut report)?,
        AuditId::Dim8Characterization(op) => dim8_characterization(ctx, op, &mut report)?,
        AuditId::Inclusion22 => inclusion22(ctx, &mut report)?,
        AuditId::PrimitiveNonDescent => descent(ctx, false, &mut report)?,
        AuditId::PrimitiveDescent22 => descent(ctx, true, &mut report)?,
        AuditId::OperatorZero(expr) => operator_zero(ctx, &expr, &mut report)?,
    }
    Ok(report)
}

fn require_almost_kahler(m: &Model) -> Result<(), AuditError> {
    if !crate::operators::apply_d(m, m.omega()).is_zero() {
        return Err(AuditError::NotApplicable(format!("{} is not almost Kahler", m.name)));
    }
    Ok(())
}

fn require_dim8(m: &Model) -> Result<(), AuditError> {
    if m.n != 4 {
        return Err(AuditError::NotApplicable(format!(
            "needs complex dimension 4, model has n = {}",
            m.n
        )));
    }
    Ok(())
}

fn thm_kk_structure(
    ctx: &AuditContext,
    op: HarmonicOp,
    k: u8,
    report: &mut AuditReport,
) -> Result<(), AuditError> {
    let m = ctx.model;
    require_almost_kahler(m)?;
    if op == HarmonicOp::D {
        return Err(AuditError::NotApplicable(
            "component structure is stated for del, delbar, bc, a".into(),
        ));
    }
    if k > m.n {
        return Err(AuditError::NotApplicable(format!("k = {} exceeds n = {}", k, m.n)));
    }
    let space = ctx.space(op, k, k);
    report.info("basis", format!("dim = {}", space.dim()));
    if space.dim() == 0 {
        report.push("alpha00-constant", true, "empty space");
        return Ok(());
    }
    let decomposer = Decomposer::new(m, k, k);
    let second_order = matches!(op, HarmonicOp::BottChern | HarmonicOp::Aeppli);
    let mut alpha00_ok = true;
    let mut del_a11_ok = true;
    let mut delbar_a11_ok = true;
    let mut deldelbar_a11_ok = true;
    let mut deldelbar_a22_ok = true;
    let mut offender = String::new();
    for (idx, psi) in space.basis.iter().enumerate() {
        let dec = decomposer.decompose(m, psi).expect("basis elements are homogeneous");
        let a00 = dec.component(k);
        let constant = a00.is_zero()
            || (a00.homogeneous_bidegree() == Some((0, 0)) && a00.has_constant_coefficients());
        if !constant {
            alpha00_ok = false;
            offender = format!("basis[{}]", idx);
        }
        if k >= 1 {
            let a11 = dec.component(k - 1);
            let power = |e: i16| -> u32 { e.max(0) as u32 };
            if m.n >= 2 {
                let r = power(m.n as i16 - 2);
                if !lefschetz(m, &del(m, &a11), r).is_zero() {
                    del_a11_ok = false;
                    offender = format!("basis[{}]", idx);
                }
                if !lefschetz(m, &delbar(m, &a11), r).is_zero() {
                    delbar_a11_ok = false;
                    offender = format!("basis[{}]", idx);
                }
            }
            if second_order && m.n >= 3 {
                let dd = del(m, &delbar(m, &a11));
                if !lefschetz(m, &dd, power(m.n as i16 - 3)).is_zero() {
                    deldelbar_a11_ok = false;
                    offender = format!("basis[{}]", idx);
                }
            }
            if second_order && k >= 2 && m.n >= 4 {
                let a22 = dec.component(k - 2);
                let dd = del(m, &delbar(m, &a22));
                if !lefschetz(m, &dd, power(m.n as i16 - 4)).is_zero() {
                    deldelbar_a22_ok = false;
                    offender = format!("basis[{}]", idx);
                }
            }
        }
    }
    report.push("alpha00-constant", alpha00_ok, offender_detail(alpha00_ok, &offender));
    if k >= 1 {
        report.push("del-alpha11-primitive", del_a11_ok, offender_detail(del_a11_ok, &offender));
        report.push(
            "delbar-alpha11-primitive",
            delbar_a11_ok,
            offender_detail(delbar_a11_ok, &offender),
        );
        if second_order {
            report.push(
                "deldelbar-alpha11-primitive",
                deldelbar_a11_ok,
                offender_detail(deldelbar_a11_ok, &offender),
            );
            if k >= 2 {
                report.push(
                    "deldelbar-alpha22-primitive",
                    deldelbar_a22_ok,
                    offender_detail(deldelbar_a22_ok, &offender),
                );
            }
        }
    }
    Ok(())
}

fn offender_detail(ok: bool, offender: &str) -> String {
    if ok {
        String::new()
    } else {
        offender.to_string()
    }
}

fn decomp_kk(
    ctx: &AuditContext,
    op: HarmonicOp,
    k: u8,
    report: &mut AuditReport,
) -> Result<(), AuditError> {
    let m = ctx.model;
    require_almost_kahler(m)?;
    if k > m.n {
        return Err(AuditError::NotApplicable(format!("k = {} exceeds n = {}", k, m.n)));
    }
    let space = ctx.space(op, k, k);
    let omega_k = ctx.omega_pow_coords(k);
    report.push(
        "omega-k-harmonic",
        space.space.contains(&omega_k),
        format!("dim H = {}", space.dim()),
    );
    let l_pow = OpExpr::prim(PrimOp::L).pow((m.n - k) as u32);
    let l_mat = operator_matrix(m, &l_pow, k, k).expect("L contains no conj");
    let l_kernel = l_mat.kernel();
    let omega_span = Subspace::from_vectors(space.window.len(), [omega_k]);
    let inter = space.space.intersect(&l_kernel);
    let rebuilt = omega_span.sum(&inter);
    report.push(
        "splits",
        rebuilt == space.space,
        format!("dim H = {}, dim (H cap ker L^{}) = {}", space.dim(), m.n - k, inter.dim()),
    );
    report.push("direct", omega_span.intersect(&l_kernel).dim() == 0, "");
    // Per-element form of the same statement: stripping the constant
    // omega^k part of each basis element lands in ker L^{n-k}.
    if space.dim() > 0 {
        let decomposer = Decomposer::new(m, k, k);
        let omega_k_form = m.omega().wedge_pow(k as u32);
        let mut ok = true;
        let mut detail = String::new();
        for (idx, psi) in space.basis.iter().enumerate() {
            let dec = decomposer.decompose(m, psi).expect("basis elements are homogeneous");
            let a00 = dec.component(k);
            let stripped = psi.sub(&omega_k_form.scale(&a00.coeff(&BasisForm::SCALAR)));
            if !lefschetz(m, &stripped, (m.n - k) as u32).is_zero() {
                ok = false;
                detail = format!("basis[{}]", idx);
                break;
            }
        }
        report.push("elements-in-ker-l", ok, detail);
    }
    Ok(())
}

/// The defining conditions of the dimension-8 characterizations, as linear
/// maps of a primitive pair `(alpha, beta)` in `P^{1,1} x P^{2,2}`.
fn dim8_conditions(m: &Model, op: HarmonicOp, alpha: &Form, beta: &Form) -> Vec<Form> {
    let omega = m.omega();
    let da = del(m, alpha);
    let dba = delbar(m, alpha);
    let db = del(m, beta);
    let dbb = delbar(m, beta);
    match op {
        HarmonicOp::BottChern => vec![omega.wedge(&da).add(&db), dba, dbb],
        HarmonicOp::Aeppli => vec![omega.wedge(&da).sub(&db), dba, dbb],
        HarmonicOp::Delbar => vec![omega.wedge(&dba).add(&dbb), omega.wedge(&da).sub(&db)],
        HarmonicOp::Del => vec![omega.wedge(&da).add(&db), omega.wedge(&dba).sub(&dbb)],
        HarmonicOp::D => Vec::new(),
    }
}

/// Kernel of a linear family given by the condition values of each
/// parameter basis vector; symbolic coefficients stack one rational matrix
/// per coefficient monomial.
fn kernel_of_family(values: &[Vec<Form>]) -> Vec<Vec<GaussRat>> {
    let mut keys: std::collections::BTreeSet<(usize, BasisForm, PolyMonomial)> =
        std::collections::BTreeSet::new();
    for per_param in values {
        for (ci, form) in per_param.iter().enumerate() {
            for (b, c) in form.terms() {
                for (mono, _) in c.terms() {
                    keys.insert((ci, *b, mono.clone()));
                }
            }
        }
    }
    let keys: Vec<_> = keys.into_iter().collect();
    if keys.is_empty() {
        return (0..values.len())
            .map(|j| {
                let mut v = vec![GaussRat::zero(); values.len()];
                v[j] = GaussRat::one();
                v
            })
            .collect();
    }
    let mut mat = Mat::zero(keys.len(), values.len());
    for (j, per_param) in values.iter().enumerate() {
        for (ci, form) in per_param.iter().enumerate() {
            for (b, c) in form.terms() {
                for (mono, coeff) in c.terms() {
                    let r = keys.binary_search(&(ci, *b, mono.clone())).expect("key present");
                    *mat.at_mut(r, j) = coeff.clone();
                }
            }
        }
    }
    mat.kernel_basis()
}

fn dim8_characterization(
    ctx: &AuditContext,
    op: HarmonicOp,
    report: &mut AuditReport,
) -> Result<(), AuditError> {
    let m = ctx.model;
    require_dim8(m)?;
    require_almost_kahler(m)?;
    if op == HarmonicOp::D {
        return Err(AuditError::NotApplicable(
            "the (2,2) characterization is stated for del, delbar, bc, a".into(),
        ));
    }
    let space = ctx.space(op, 2, 2);
    let window = &space.window;

    let p11 = ctx.primitive_subspace(1, 1);
    let p22 = ctx.primitive_subspace(2, 2);
    let w11 = bidegree_basis(m.n, 1, 1);
    let alphas: Vec<Form> = p11.basis().iter().map(|v| form_from_coordinates(&w11, v)).collect();
    let betas: Vec<Form> = p22.basis().iter().map(|v| form_from_coordinates(window, v)).collect();

    // Parameters: primitive (1,1) basis then primitive (2,2) basis.
    let mut values: Vec<Vec<Form>> = Vec::with_capacity(alphas.len() + betas.len());
    for a in &alphas {
        values.push(dim8_conditions(m, op, a, &Form::zero()));
    }
    for b in &betas {
        values.push(dim8_conditions(m, op, &Form::zero(), b));
    }
    let kernel = kernel_of_family(&values);

    let mut generators: Vec<Vec<GaussRat>> = vec![ctx.omega_pow_coords(2)];
    for sol in kernel {
        let mut alpha = Form::zero();
        for (c, a) in sol[..alphas.len()].iter().zip(&alphas) {
            if !c.is_zero() {
                alpha = alpha.add(&a.scale_gauss(c));
            }
        }
        let mut beta = Form::zero();
        for (c, b) in sol[alphas.len()..].iter().zip(&betas) {
            if !c.is_zero() {
                beta = beta.add(&b.scale_gauss(c));
            }
        }
        let psi = m.omega().wedge(&alpha).add(&beta);
        generators.push(coordinates_in(window, &psi).expect("constant (2,2) form"));
    }
    let rhs = Subspace::from_vectors(window.len(), generators);
    report.push(
        "characterization-matches",
        rhs == space.space,
        format!("dim H = {}, dim characterized set = {}", space.dim(), rhs.dim()),
    );
    Ok(())
}

fn inclusion22(ctx: &AuditContext, report: &mut AuditReport) -> Result<(), AuditError> {
    let m = ctx.model;
    require_dim8(m)?;
    require_almost_kahler(m)?;
    let bc = ctx.space(HarmonicOp::BottChern, 2, 2);
    let a = ctx.space(HarmonicOp::Aeppli, 2, 2);
    let del_s = ctx.space(HarmonicOp::Del, 2, 2);
    let delbar_s = ctx.space(HarmonicOp::Delbar, 2, 2);
    report.push(
        "bc-subset-del",
        bc.space.is_subspace_of(&del_s.space),
        format!("dim H_bc = {}, dim H_del = {}", bc.dim(), del_s.dim()),
    );
    report.push(
        "a-subset-delbar",
        a.space.is_subspace_of(&delbar_s.space),
        format!("dim H_a = {}, dim H_delbar = {}", a.dim(), delbar_s.dim()),
    );
    report.info("bc-strict-in-del", format!("{}", bc.dim() < del_s.dim()));
    report.info("a-strict-in-delbar", format!("{}", a.dim() < delbar_s.dim()));
    let all_equal = bc.space == a.space && bc.space == del_s.space && bc.space == delbar_s.space;
    report.info("all-four-equal", format!("{}", all_equal));
    Ok(())
}

/// `R_D = C omega^2 + L (P^{1,1} cap H^{1,1}_D) + (P^{2,2} cap H^{2,2}_D)`,
/// the span of harmonic-by-components forms.
fn descent_comparison_space(ctx: &AuditContext, op: HarmonicOp) -> (HarmonicSpace, Subspace) {
    let m = ctx.model;
    let h22 = ctx.space(op, 2, 2);
    let h11 = ctx.space(op, 1, 1);
    let p11 = ctx.primitive_subspace(1, 1);
    let p22 = ctx.primitive_subspace(2, 2);
    let w11 = bidegree_basis(m.n, 1, 1);
    let window = h22.window.clone();

    let mut generators: Vec<Vec<GaussRat>> = vec![ctx.omega_pow_coords(2)];
    for v in p11.intersect(&h11.space).basis() {
        let alpha = form_from_coordinates(&w11, v);
        let image = m.omega().wedge(&alpha);
        generators.push(coordinates_in(&window, &image).expect("constant (2,2) form"));
    }
    for v in p22.intersect(&h22.space).basis() {
        generators.push(v.clone());
    }
    let r = Subspace::from_vectors(window.len(), generators);
    (h22, r)
}

fn descent(ctx: &AuditContext, expect_descent: bool, report: &mut AuditReport) -> Result<(), AuditError> {
    let m = ctx.model;
    require_dim8(m)?;
    require_almost_kahler(m)?;
    for op in BIGRADED_OPS {
        let (h22, r) = descent_comparison_space(ctx, op);
        let contained = h22.space.is_subspace_of(&r);
        let name = format!("h-{}-2-2-descends", op);
        if expect_descent {
            report.push(name, contained, format!("dim H = {}, dim R = {}", h22.dim(), r.dim()));
        } else {
            let name = format!("h-{}-2-2-escapes", op);
            if contained {
                report.push(name, false, "every harmonic form has harmonic components");
                continue;
            }
            // Exhibit a witness basis element and the component that fails.
            let decomposer = Decomposer::new(m, 2, 2);
            let mut detail = String::new();
            for psi in &h22.basis {
                let coords = coordinates_in(&h22.window, psi).expect("constant basis");
                if r.contains(&coords) {
                    continue;
                }
                let dec = decomposer.decompose(m, psi).expect("homogeneous");
                for (&rr, comp) in &dec.components {
                    if comp.is_zero() || rr == 2 {
                        continue;
                    }
                    let verdict = is_harmonic(m, comp, op);
                    if let Some((label, value)) = verdict.witness {
                        detail = format!(
                            "psi = {}; component r={} is {}; fails {}-condition = {}",
                            psi, rr, comp, label, value
                        );
                        break;
                    }
                }
                if !detail.is_empty() {
                    break;
                }
            }
            report.push(name, !detail.is_empty(), detail);
        }
    }
    Ok(())
}

fn operator_zero(ctx: &AuditContext, expr: &str, report: &mut AuditReport) -> Result<(), AuditError> {
    let m = ctx.model;
    let parsed = crate::operators::parse_op_expr(expr)
        .map_err(|e| AuditError::UnknownAudit(e.to_string()))?;
    let mut ok = true;
    let mut detail = String::new();
    for p in 0..=m.n {
        for q in 0..=m.n {
            let mat = operator_matrix(m, &parsed, p, q)
                .map_err(|e| AuditError::NotApplicable(e.to_string()))?;
            if !mat.is_zero() {
                ok = false;
                detail = format!("nonzero on window ({},{})", p, q);
            }
        }
    }
    report.push("vanishes-on-all-windows", ok, detail);
    Ok(())
}

/// The standard battery for one model (used by `audit --name all`).
pub fn standard_battery(m: &Model) -> Vec<AuditId> {
    let mut out = Vec::new();
    for op in BIGRADED_OPS {
        for k in 0..=m.n {
            out.push(AuditId::ThmKkStructure(op, k));
        }
    }
    for op in crate::harmonic::ALL_OPS {
        for k in 0..=m.n {
            out.push(AuditId::DecompKk(op, k));
        }
    }
    if m.n == 4 {
        for op in BIGRADED_OPS {
            out.push(AuditId::Dim8Characterization(op));
        }
        out.push(AuditId::Inclusion22);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn audit_id_roundtrip() {
        for s in [
            "thm-kk-structure(bc,2)",
            "decomp-kk(delbar,3)",
            "dim8-characterization(a)",
            "inclusion-2-2",
            "primitive-non-descent",
            "primitive-descent-2-2",
        ] {
            let id = AuditId::parse(s).unwrap();
            assert_eq!(id.to_string(), s);
        }
        assert!(AuditId::parse("decomp-kk(zz,1)").is_err());
    }

    #[test]
    fn inclusion_audit_on_torus() {
        let m = Model::load("torus8").unwrap();
        let report = run_audit(&m, AuditId::Inclusion22).unwrap();
        assert!(report.passed(), "{}", report);
        assert_eq!(report.detail("bc-strict-in-del"), Some("true"));
        assert_eq!(report.detail("a-strict-in-delbar"), Some("true"));
    }

    #[test]
    fn inclusion_audit_on_nilmanifold() {
        let m = Model::load("h12xT3").unwrap();
        let report = run_audit(&m, AuditId::Inclusion22).unwrap();
        assert!(report.passed(), "{}", report);
        assert_eq!(report.detail("all-four-equal"), Some("true"));
    }

    #[test]
    fn descent_audits() {
        let torus = Model::load("torus8").unwrap();
        let report = run_audit(&torus, AuditId::PrimitiveNonDescent).unwrap();
        assert!(report.passed(), "{}", report);
        let nil = Model::load("h12xT3").unwrap();
        let report = run_audit(&nil, AuditId::PrimitiveDescent22).unwrap();
        assert!(report.passed(), "{}", report);
    }

    #[test]
    fn decomp_audit_spot_checks() {
        let m = Model::load("h12xT3").unwrap();
        let ctx = AuditContext::new(&m);
        for op in crate::harmonic::ALL_OPS {
            let report = run_audit_in(&ctx, AuditId::DecompKk(op, 2)).unwrap();
            assert!(report.passed(), "{}", report);
        }
    }

    #[test]
    fn dim8_audit_spot_check() {
        let m = Model::load("torus8").unwrap();
        let report = run_audit(&m, AuditId::Dim8Characterization(HarmonicOp::BottChern)).unwrap();
        assert!(report.passed(), "{}", report);
    }

    #[test]
    fn not_applicable_cases() {
        let m = Model::load("torus8").unwrap();
        assert!(matches!(
            run_audit(&m, AuditId::ThmKkStructure(HarmonicOp::D, 2)),
            Err(AuditError::NotApplicable(_))
        ));
        assert!(matches!(
            run_audit(&m, AuditId::Dim8Characterization(HarmonicOp::D)),
            Err(AuditError::NotApplicable(_))
        ));
    }
}
