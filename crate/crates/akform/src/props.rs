//! Randomized operator-identity suites with fixed seeds, shared by the CLI
//! `selftest` subcommand and the acceptance tests. Every check is exact:
//! a failure carries the offending input and value.

use crate::exterior::{bidegree_basis, bidegree_dim, Form};
use crate::model::Model;
use crate::operators::{
    self, inner_product, lefschetz, operator_matrix, OpExpr, PrimOp,
};
use crate::primitive::{is_primitive, weil_star, Decomposer};
use crate::scalars::{Derivation, DerivSymbol, DiffPoly, GaussRat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Prng = ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x414b_464f_524d; // "AKFORM"

#[derive(Clone, Copy, Debug)]
pub struct PropConfig {
    pub seed: u64,
    pub cases: usize,
}

impl Default for PropConfig {
    fn default() -> Self {
        PropConfig { seed: DEFAULT_SEED, cases: 200 }
    }
}

#[derive(Clone, Debug)]
pub struct PropResult {
    pub model: String,
    pub name: String,
    pub cases: usize,
    pub failure: Option<String>,
}

impl PropResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

fn rng_for(seed: u64, model: &Model, name: &str) -> Prng {
    let mut h: u64 = seed;
    for b in model.name.bytes().chain(name.bytes()) {
        h = h.wrapping_mul(0x100000001b3).wrapping_add(b as u64);
    }
    Prng::seed_from_u64(h)
}

fn random_gauss(rng: &mut Prng) -> GaussRat {
    let re = GaussRat::from_ratio(rng.random_range(-4..=4), rng.random_range(1..=3));
    if rng.random_bool(0.4) {
        let im = GaussRat::from_ratio(rng.random_range(-4..=4), rng.random_range(1..=3));
        re.add(&im.mul(&GaussRat::i()))
    } else {
        re
    }
}

/// Random coefficient: a constant, optionally plus a derivative-symbol term
/// built from the model's declared functions.
fn random_poly(rng: &mut Prng, m: &Model) -> DiffPoly {
    let mut p = DiffPoly::constant(random_gauss(rng));
    let names: Vec<&str> = m.functions.names().collect();
    if !names.is_empty() && rng.random_bool(0.5) {
        let name = names[rng.random_range(0..names.len())];
        let decl = m.functions.get(name).unwrap();
        let depends: Vec<Derivation> = decl.depends.iter().copied().collect();
        if !depends.is_empty() {
            let len = rng.random_range(0..=2);
            let word: Vec<Derivation> =
                (0..len).map(|_| depends[rng.random_range(0..depends.len())]).collect();
            if let Some(sym) = DerivSymbol::new(name, false, word, &m.functions) {
                p = p.add(&DiffPoly::symbol(sym).scale(&random_gauss(rng)));
            }
        }
    }
    p
}

fn random_window_form(rng: &mut Prng, m: &Model, p: u8, q: u8, terms: usize) -> Form {
    let basis = bidegree_basis(m.n, p, q);
    if basis.is_empty() {
        return Form::zero();
    }
    let mut f = Form::zero();
    for _ in 0..terms {
        let b = basis[rng.random_range(0..basis.len())];
        f = f.add(&Form::monomial(b, random_poly(rng, m)));
    }
    f
}

fn random_bidegree(rng: &mut Prng, n: u8) -> (u8, u8) {
    (rng.random_range(0..=n), rng.random_range(0..=n))
}

fn random_form(rng: &mut Prng, m: &Model) -> Form {
    let components = rng.random_range(1..=2);
    let mut f = Form::zero();
    for _ in 0..components {
        let (p, q) = random_bidegree(rng, m.n);
        let terms = rng.random_range(1..=3);
        f = f.add(&random_window_form(rng, m, p, q, terms));
    }
    f
}

fn result(m: &Model, name: &str, cases: usize, failure: Option<String>) -> PropResult {
    PropResult { model: m.name.clone(), name: name.to_string(), cases, failure }
}

/// `d(d f) = 0` on random (possibly symbolic-coefficient) forms.
pub fn check_d_squared(m: &Model, seed: u64, cases: usize) -> PropResult {
    let name = "d-squared-zero";
    let mut rng = rng_for(seed, m, name);
    for _ in 0..cases {
        let f = random_form(&mut rng, m);
        let dd = operators::apply_d(m, &operators::apply_d(m, &f));
        if !dd.is_zero() {
            return result(m, name, cases, Some(format!("d^2({}) = {}", f, dd)));
        }
    }
    result(m, name, cases, None)
}

/// The seven bigraded relations forced by `d^2 = 0`, checked both on random
/// forms and as exact matrices on every bidegree window.
pub fn check_bigraded_relations(m: &Model, seed: u64, cases: usize) -> PropResult {
    use PrimOp::*;
    let name = "bigraded-relations";
    let relations: Vec<(&str, OpExpr)> = vec![
        ("mu mu", OpExpr::compose_prims([Mu, Mu])),
        (
            "mu del + del mu",
            OpExpr::sum([OpExpr::compose_prims([Mu, Del]), OpExpr::compose_prims([Del, Mu])]),
        ),
        (
            "del del + mu delbar + delbar mu",
            OpExpr::sum([
                OpExpr::compose_prims([Del, Del]),
                OpExpr::compose_prims([Mu, Delbar]),
                OpExpr::compose_prims([Delbar, Mu]),
            ]),
        ),
        (
            "del delbar + delbar del + mu mubar + mubar mu",
            OpExpr::sum([
                OpExpr::compose_prims([Del, Delbar]),
                OpExpr::compose_prims([Delbar, Del]),
                OpExpr::compose_prims([Mu, Mubar]),
                OpExpr::compose_prims([Mubar, Mu]),
            ]),
        ),
        (
            "delbar delbar + mubar del + del mubar",
            OpExpr::sum([
                OpExpr::compose_prims([Delbar, Delbar]),
                OpExpr::compose_prims([Mubar, Del]),
                OpExpr::compose_prims([Del, Mubar]),
            ]),
        ),
        (
            "mubar delbar + delbar mubar",
            OpExpr::sum([
                OpExpr::compose_prims([Mubar, Delbar]),
                OpExpr::compose_prims([Delbar, Mubar]),
            ]),
        ),
        ("mubar mubar", OpExpr::compose_prims([Mubar, Mubar])),
    ];
    let mut rng = rng_for(seed, m, name);
    let mut count = 0;
    for (label, expr) in &relations {
        for p in 0..=m.n {
            for q in 0..=m.n {
                let mat = operator_matrix(m, expr, p, q).expect("no conj");
                count += 1;
                if !mat.is_zero() {
                    return result(
                        m,
                        name,
                        count,
                        Some(format!("{} nonzero on window ({},{})", label, p, q)),
                    );
                }
            }
        }
        for _ in 0..cases {
            let f = random_form(&mut rng, m);
            count += 1;
            let v = expr.apply(m, &f);
            if !v.is_zero() {
                return result(m, name, count, Some(format!("({})({}) = {}", label, f, v)));
            }
        }
    }
    result(m, name, count, None)
}

/// `d^c = i(mu - del + delbar - mubar)`.
pub fn check_dc_identity(m: &Model, seed: u64, cases: usize) -> PropResult {
    let name = "dc-identity";
    let mut rng = rng_for(seed, m, name);
    let rhs_expr = crate::operators::parse_op_expr("i mu - i del + i delbar - i mubar")
        .expect("fixed expression parses");
    for _ in 0..cases {
        let f = random_form(&mut rng, m);
        let lhs = operators::dc(m, &f);
        let rhs = rhs_expr.apply(m, &f);
        if lhs != rhs {
            return result(m, name, cases, Some(format!("dc({}) = {} but components give {}", f, lhs, rhs)));
        }
    }
    result(m, name, cases, None)
}

/// `star star = (-1)^k` on homogeneous-degree forms, and `star` maps `(p,q)`
/// to `(n-q,n-p)`.
pub fn check_star_involution(m: &Model, seed: u64, cases: usize) -> PropResult {
    let name = "star-involution";
    let mut rng = rng_for(seed, m, name);
    for _ in 0..cases {
        let k = rng.random_range(0..=(2 * m.n));
        let mut f = Form::zero();
        for _ in 0..rng.random_range(1..=2) {
            let p = rng.random_range(0..=k.min(m.n));
            let q = k - p;
            if q > m.n {
                continue;
            }
            f = f.add(&random_window_form(&mut rng, m, p, q, 2));
        }
        let sf = operators::star(m, &f);
        for (b, _) in sf.terms() {
            // Placement check against the original bidegrees.
            let (sp, sq) = b.bidegree();
            if !f.bidegrees().contains(&(m.n - sq, m.n - sp)) {
                return result(m, name, cases, Some(format!("star misplaced {} -> {}", f, b)));
            }
        }
        let ss = operators::star(m, &sf);
        let expected = if k % 2 == 0 { f.clone() } else { f.neg() };
        if ss != expected {
            return result(m, name, cases, Some(format!("star(star({})) = {}", f, ss)));
        }
    }
    result(m, name, cases, None)
}

/// Pointwise adjointness `<L a, b> = <a, Lam b>` on coframe-constant forms.
pub fn check_lefschetz_adjoint(m: &Model, seed: u64, cases: usize) -> PropResult {
    let name = "lefschetz-adjoint";
    let mut rng = rng_for(seed, m, name);
    for _ in 0..cases {
        let (p, q) = (rng.random_range(0..m.n), rng.random_range(0..m.n));
        let mut alpha = random_window_form(&mut rng, m, p, q, 2);
        let mut beta = random_window_form(&mut rng, m, p + 1, q + 1, 2);
        // Constant coefficients: the pointwise pairing is scalar there.
        alpha = constant_part_only(&alpha);
        beta = constant_part_only(&beta);
        let lhs = inner_product(m, &lefschetz(m, &alpha, 1), &beta);
        let rhs = inner_product(m, &alpha, &operators::lambda(m, &beta));
        if lhs != rhs {
            return result(
                m,
                name,
                cases,
                Some(format!("<L {}, {}> = {} vs {}", alpha, beta, lhs, rhs)),
            );
        }
    }
    result(m, name, cases, None)
}

fn constant_part_only(f: &Form) -> Form {
    let mut out = Form::zero();
    for (b, c) in f.terms() {
        let g = c.constant_part();
        if !g.is_zero() {
            out = out.add(&Form::monomial(*b, DiffPoly::constant(g)));
        }
    }
    out
}

/// The almost Kahler identity `[Lam, delbar] = -i del*` as an exact matrix
/// identity on every bidegree, plus random symbolic applications.
pub fn check_kahler_identity(m: &Model, seed: u64, cases: usize) -> PropResult {
    use PrimOp::*;
    let name = "kahler-identity";
    assert!(
        operators::apply_d(m, m.omega()).is_zero(),
        "the commutator identity needs an almost Kahler model"
    );
    let lhs = OpExpr::sum([
        OpExpr::compose_prims([Lam, Delbar]),
        OpExpr::scale(GaussRat::from_int(-1), OpExpr::compose_prims([Delbar, Lam])),
    ]);
    let rhs = OpExpr::scale(GaussRat::i().neg(), OpExpr::prim(DelStar));
    let mut count = 0;
    for p in 0..=m.n {
        for q in 0..=m.n {
            let a = operator_matrix(m, &lhs, p, q).expect("no conj");
            let b = operator_matrix(m, &rhs, p, q).expect("no conj");
            count += 1;
            if a != b {
                return result(
                    m,
                    name,
                    count,
                    Some(format!("[Lam, delbar] != -i delstar on window ({},{})", p, q)),
                );
            }
        }
    }
    let mut rng = rng_for(seed, m, name);
    for _ in 0..cases {
        let f = random_form(&mut rng, m);
        count += 1;
        if lhs.apply(m, &f) != rhs.apply(m, &f) {
            return result(m, name, count, Some(format!("identity fails on {}", f)));
        }
    }
    result(m, name, count, None)
}

/// `star lapBC = lapA star` and `lapBC star = star lapA` on every bidegree,
/// plus random symbolic applications.
pub fn check_bc_a_star_duality(m: &Model, seed: u64, cases: usize) -> PropResult {
    use PrimOp::*;
    let name = "bc-a-star-duality";
    let pairs = [
        (OpExpr::compose_prims([Star, LapBC]), OpExpr::compose_prims([LapA, Star])),
        (OpExpr::compose_prims([LapBC, Star]), OpExpr::compose_prims([Star, LapA])),
    ];
    let mut count = 0;
    for (lhs, rhs) in &pairs {
        for p in 0..=m.n {
            for q in 0..=m.n {
                let a = operator_matrix(m, lhs, p, q).expect("no conj");
                let b = operator_matrix(m, rhs, p, q).expect("no conj");
                count += 1;
                if a != b {
                    return result(
                        m,
                        name,
                        count,
                        Some(format!("{} != {} on window ({},{})", lhs, rhs, p, q)),
                    );
                }
            }
        }
    }
    let mut rng = rng_for(seed, m, name);
    for _ in 0..cases {
        let f = random_form(&mut rng, m);
        count += 1;
        for (lhs, rhs) in &pairs {
            if lhs.apply(m, &f) != rhs.apply(m, &f) {
                return result(m, name, count, Some(format!("duality fails on {}", f)));
            }
        }
    }
    result(m, name, count, None)
}

/// The closed-form star of `L^r beta` for primitive `beta` equals the Hodge
/// star computed from the defining relation, for every admissible `r`.
pub fn check_weil_formula(m: &Model, seed: u64, cases: usize) -> PropResult {
    let name = "weil-formula";
    let mut rng = rng_for(seed, m, name);
    let mut decomposers: std::collections::BTreeMap<(u8, u8), Decomposer> = Default::default();
    let mut count = 0;
    while count < cases {
        // Random primitive forms of every degree k <= n: primitive
        // components of random homogeneous forms.
        let p = rng.random_range(0..=m.n);
        let q = rng.random_range(0..=(m.n - p));
        let f = random_window_form(&mut rng, m, p, q, 2);
        if f.is_zero() {
            continue;
        }
        let dec = decomposers
            .entry((p, q))
            .or_insert_with(|| Decomposer::new(m, p, q))
            .decompose(m, &f)
            .expect("homogeneous by construction");
        for (r, beta) in &dec.components {
            if beta.is_zero() {
                continue;
            }
            let k = p + q - 2 * r;
            for rr in 0..=(m.n - k) as u32 {
                let closed = match weil_star(m, beta, rr) {
                    Ok(v) => v,
                    Err(e) => {
                        return result(m, name, count, Some(format!("weil_star error: {}", e)))
                    }
                };
                let direct = operators::star(m, &lefschetz(m, beta, rr));
                count += 1;
                if closed != direct {
                    return result(
                        m,
                        name,
                        count,
                        Some(format!(
                            "beta = {} (degree {}), r = {}: formula {} vs star {}",
                            beta, k, rr, closed, direct
                        )),
                    );
                }
            }
        }
    }
    result(m, name, count, None)
}

/// The star expansion of a (2,2)-form at n = 4 in terms of its primitive
/// components, reproduced termwise and in total:
/// `*psi = sum_m (-1)^m (k-m)!/(n-k-m)! omega^{n-k-m} ^ alpha^{m,m}`.
pub fn check_weil_psi_expansion(m: &Model, seed: u64, cases: usize) -> PropResult {
    let name = "weil-psi-expansion";
    assert_eq!(m.n, 4, "the expansion check is pinned to n = 4, k = 2");
    let k = 2u8;
    let mut rng = rng_for(seed, m, name);
    let decomposer = Decomposer::new(m, k, k);
    for _ in 0..cases {
        let psi = random_window_form(&mut rng, m, k, k, 3);
        let dec = decomposer.decompose(m, &psi).expect("homogeneous");
        let mut total = Form::zero();
        for mm in 0..=k {
            let alpha = dec.component(k - mm); // the (m,m) primitive part
            let num: i64 = (1..=(k - mm) as i64).product::<i64>().max(1);
            let den: i64 = (1..=(m.n - k - mm) as i64).product::<i64>().max(1);
            let sign = if mm % 2 == 0 { 1 } else { -1 };
            let coeff = GaussRat::from_ratio(sign * num, den);
            let term = lefschetz(m, &alpha, (m.n - k - mm) as u32).scale_gauss(&coeff);
            // Termwise: the star of this component's Lefschetz block.
            let direct = operators::star(m, &lefschetz(m, &alpha, (k - mm) as u32));
            if direct != term {
                return result(
                    m,
                    name,
                    cases,
                    Some(format!("term m = {} of *({}) differs: {} vs {}", mm, psi, direct, term)),
                );
            }
            total = total.add(&term);
        }
        if total != operators::star(m, &psi) {
            return result(m, name, cases, Some(format!("expansion of *({}) differs", psi)));
        }
    }
    result(m, name, cases, None)
}

/// `L^h` is injective for `h + k <= n` and surjective for `h + k >= n`,
/// checked by exact rank on every bidegree window.
pub fn check_lefschetz_ranks(m: &Model) -> PropResult {
    let name = "lefschetz-rank";
    let mut count = 0;
    for p in 0..=m.n {
        for q in 0..=m.n {
            let k = (p + q) as u32;
            for h in 0..=(m.n as u32) {
                let expr = OpExpr::prim(PrimOp::L).pow(h);
                let mat = operator_matrix(m, &expr, p, q).expect("no conj");
                let rank = mat.rank().expect("L has constant entries");
                let dom = bidegree_dim(m.n, p, q);
                let cod = if p as u32 + h <= m.n as u32 && q as u32 + h <= m.n as u32 {
                    bidegree_dim(m.n, p + h as u8, q + h as u8)
                } else {
                    0
                };
                count += 1;
                if h + k <= m.n as u32 && rank != dom {
                    return result(
                        m,
                        name,
                        count,
                        Some(format!("L^{} not injective on ({},{}): rank {} < {}", h, p, q, rank, dom)),
                    );
                }
                if h + k >= m.n as u32 && rank != cod {
                    return result(
                        m,
                        name,
                        count,
                        Some(format!("L^{} not surjective on ({},{}): rank {} < {}", h, p, q, rank, cod)),
                    );
                }
            }
        }
    }
    result(m, name, count, None)
}

/// Decompose-then-reassemble is the identity; components are primitive and
/// sit at the right bidegrees.
pub fn check_decompose_roundtrip(m: &Model, seed: u64, cases_per_window: usize) -> PropResult {
    let name = "decompose-roundtrip";
    let mut rng = rng_for(seed, m, name);
    let mut count = 0;
    for p in 0..=m.n {
        for q in 0..=m.n {
            let decomposer = Decomposer::new(m, p, q);
            for _ in 0..cases_per_window {
                let f = random_window_form(&mut rng, m, p, q, 3);
                let dec = match decomposer.decompose(m, &f) {
                    Ok(d) => d,
                    Err(e) => return result(m, name, count, Some(format!("decompose: {}", e))),
                };
                count += 1;
                if dec.reassemble(m) != f {
                    return result(m, name, count, Some(format!("roundtrip fails on {}", f)));
                }
                for (r, comp) in &dec.components {
                    if comp.is_zero() {
                        continue;
                    }
                    if comp.homogeneous_bidegree() != Some((p - r, q - r)) {
                        return result(
                            m,
                            name,
                            count,
                            Some(format!("component r={} of {} has wrong bidegree", r, f)),
                        );
                    }
                    if !is_primitive(m, comp).unwrap_or(false) {
                        return result(
                            m,
                            name,
                            count,
                            Some(format!("component r={} of {} not primitive", r, f)),
                        );
                    }
                }
            }
        }
    }
    result(m, name, count, None)
}

/// The full suite for one model.
pub fn run_all(m: &Model, cfg: &PropConfig) -> Vec<PropResult> {
    let mut out = vec![
        check_d_squared(m, cfg.seed, cfg.cases),
        check_bigraded_relations(m, cfg.seed, cfg.cases),
        check_dc_identity(m, cfg.seed, cfg.cases),
        check_star_involution(m, cfg.seed, cfg.cases),
        check_lefschetz_adjoint(m, cfg.seed, cfg.cases),
        check_kahler_identity(m, cfg.seed, cfg.cases),
        check_bc_a_star_duality(m, cfg.seed, cfg.cases),
        check_weil_formula(m, cfg.seed, cfg.cases.max(100)),
        check_lefschetz_ranks(m),
        check_decompose_roundtrip(m, cfg.seed, (cfg.cases / 4).max(25)),
    ];
    if m.n == 4 {
        out.push(check_weil_psi_expansion(m, cfg.seed, cfg.cases.min(50)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_on_both_models() {
        for id in ["torus8", "h12xT3"] {
            let m = Model::load(id).unwrap();
            let cfg = PropConfig { seed: DEFAULT_SEED, cases: 10 };
            for r in run_all(&m, &cfg) {
                assert!(r.passed(), "{} / {}: {:?}", r.model, r.name, r.failure);
            }
        }
    }

    #[test]
    fn determinism() {
        let m = Model::load("torus8").unwrap();
        let a = check_d_squared(&m, 7, 5);
        let b = check_d_squared(&m, 7, 5);
        assert_eq!(a.cases, b.cases);
        assert_eq!(a.failure, b.failure);
    }
}
