//! Coframe-constant harmonic spaces and symbolic harmonicity tests.
//!
//! Each Laplacian kernel is characterized by first/second order conditions
//! (`d`-harmonic: `d psi = 0`, `d(*psi) = 0`; Bott-Chern: `del psi =
//! delbar psi = 0`, `del delbar (*psi) = 0`; Aeppli: `del(*psi) =
//! delbar(*psi) = 0`, `del delbar psi = 0`; and the Dolbeault pair
//! accordingly). Spaces are computed as exact kernel intersections over
//! constant-coefficient combinations of basis monomials; on non-invariant
//! models one rational matrix is stacked per coefficient monomial.

use crate::exterior::{bidegree_basis, BasisForm, Form};
use crate::linalg::Subspace;
use crate::model::Model;
use crate::operators::{
    coordinates_in, form_from_coordinates, operator_matrix, OpExpr, OperatorError, PrimOp,
};
use std::fmt;

/// Which harmonic space: the kernel of which Laplacian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum HarmonicOp {
    D,
    Del,
    Delbar,
    BottChern,
    Aeppli,
}

pub const ALL_OPS: [HarmonicOp; 5] = [
    HarmonicOp::D,
    HarmonicOp::Del,
    HarmonicOp::Delbar,
    HarmonicOp::BottChern,
    HarmonicOp::Aeppli,
];

/// The four operators covered by the bidegree-(k,k) decomposition and
/// dimension-8 characterization statements.
pub const BIGRADED_OPS: [HarmonicOp; 4] =
    [HarmonicOp::Del, HarmonicOp::Delbar, HarmonicOp::BottChern, HarmonicOp::Aeppli];

impl HarmonicOp {
    pub fn name(self) -> &'static str {
        match self {
            HarmonicOp::D => "d",
            HarmonicOp::Del => "del",
            HarmonicOp::Delbar => "delbar",
            HarmonicOp::BottChern => "bc",
            HarmonicOp::Aeppli => "a",
        }
    }

    pub fn from_name(s: &str) -> Option<HarmonicOp> {
        Some(match s {
            "d" => HarmonicOp::D,
            "del" => HarmonicOp::Del,
            "delbar" => HarmonicOp::Delbar,
            "bc" => HarmonicOp::BottChern,
            "a" => HarmonicOp::Aeppli,
            _ => return None,
        })
    }

    pub fn laplacian(self) -> PrimOp {
        match self {
            HarmonicOp::D => PrimOp::LapD,
            HarmonicOp::Del => PrimOp::LapDel,
            HarmonicOp::Delbar => PrimOp::LapDelbar,
            HarmonicOp::BottChern => PrimOp::LapBC,
            HarmonicOp::Aeppli => PrimOp::LapA,
        }
    }
}

impl fmt::Display for HarmonicOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// The vanishing conditions defining one harmonic space, star applied to
/// the argument (`dstar` here is the composite `d` after `star`).
pub struct ConditionSet {
    pub op: HarmonicOp,
    pub conditions: Vec<(&'static str, OpExpr)>,
}

pub fn condition_set(op: HarmonicOp) -> ConditionSet {
    use PrimOp::*;
    let conditions = match op {
        HarmonicOp::D => vec![
            ("d", OpExpr::prim(D)),
            ("dstar", OpExpr::compose_prims([D, Star])),
        ],
        HarmonicOp::Del => vec![
            ("del", OpExpr::prim(Del)),
            ("delbarstar", OpExpr::compose_prims([Delbar, Star])),
        ],
        HarmonicOp::Delbar => vec![
            ("delbar", OpExpr::prim(Delbar)),
            ("delstar", OpExpr::compose_prims([Del, Star])),
        ],
        HarmonicOp::BottChern => vec![
            ("del", OpExpr::prim(Del)),
            ("delbar", OpExpr::prim(Delbar)),
            ("deldelbarstar", OpExpr::compose_prims([Del, Delbar, Star])),
        ],
        HarmonicOp::Aeppli => vec![
            ("delstar", OpExpr::compose_prims([Del, Star])),
            ("delbarstar", OpExpr::compose_prims([Delbar, Star])),
            ("deldelbar", OpExpr::compose_prims([Del, Delbar])),
        ],
    };
    ConditionSet { op, conditions }
}

/// Equivalent formulation through the pointwise adjoints (`-*d*` and
/// friends); kernels must agree with [`condition_set`] since the star is
/// invertible.
pub fn condition_set_adjoint(op: HarmonicOp) -> ConditionSet {
    use PrimOp::*;
    let conditions = match op {
        HarmonicOp::D => vec![
            ("d", OpExpr::prim(D)),
            ("dstar-adj", OpExpr::prim(DStar)),
        ],
        HarmonicOp::Del => vec![
            ("del", OpExpr::prim(Del)),
            ("delstar-adj", OpExpr::prim(DelStar)),
        ],
        HarmonicOp::Delbar => vec![
            ("delbar", OpExpr::prim(Delbar)),
            ("delbarstar-adj", OpExpr::prim(DelbarStar)),
        ],
        HarmonicOp::BottChern => vec![
            ("del", OpExpr::prim(Del)),
            ("delbar", OpExpr::prim(Delbar)),
            ("delbarstar-delstar-adj", OpExpr::compose_prims([DelbarStar, DelStar])),
        ],
        HarmonicOp::Aeppli => vec![
            ("delstar-adj", OpExpr::prim(DelStar)),
            ("delbarstar-adj", OpExpr::prim(DelbarStar)),
            ("deldelbar", OpExpr::compose_prims([Del, Delbar])),
        ],
    };
    ConditionSet { op, conditions }
}

/// An exact reduced basis of the coframe-constant solutions of one
/// Laplacian's kernel conditions at a bidegree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarmonicSpace {
    pub model: String,
    pub op: HarmonicOp,
    pub bidegree: (u8, u8),
    /// Canonical monomial basis of the ambient window.
    pub window: Vec<BasisForm>,
    /// Solution span in window coordinates, reduced echelon form.
    pub space: Subspace,
    /// The echelon basis rendered as forms.
    pub basis: Vec<Form>,
}

impl HarmonicSpace {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Membership for constant-coefficient forms in the same window.
    pub fn contains(&self, f: &Form) -> bool {
        if f.is_zero() {
            return true;
        }
        match coordinates_in(&self.window, f) {
            Ok(v) => self.space.contains(&v),
            Err(_) => false,
        }
    }
}

fn kernel_of_conditions(
    m: &Model,
    set: &ConditionSet,
    p: u8,
    q: u8,
) -> Result<Subspace, OperatorError> {
    let window = bidegree_basis(m.n, p, q);
    let mut kernel: Option<Subspace> = None;
    for (_, expr) in &set.conditions {
        let mat = operator_matrix(m, expr, p, q)?;
        let k = mat.kernel();
        kernel = Some(match kernel {
            None => k,
            Some(acc) => acc.intersect(&k),
        });
    }
    Ok(kernel.unwrap_or_else(|| Subspace::zero(window.len())))
}

/// Computes the coframe-constant harmonic space at `(p,q)`.
///
/// The star-side and adjoint-side condition sets are both solved and must
/// agree; on invariant models the kernel of the Laplacian matrix is solved
/// as well and must agree too.
pub fn harmonic_space(m: &Model, op: HarmonicOp, p: u8, q: u8) -> HarmonicSpace {
    let window = bidegree_basis(m.n, p, q);
    if window.is_empty() {
        return HarmonicSpace {
            model: m.name.clone(),
            op,
            bidegree: (p, q),
            window,
            space: Subspace::zero(0),
            basis: Vec::new(),
        };
    }
    let space = kernel_of_conditions(m, &condition_set(op), p, q)
        .expect("condition sets never contain conj");
    let adjoint_side = kernel_of_conditions(m, &condition_set_adjoint(op), p, q)
        .expect("condition sets never contain conj");
    assert_eq!(
        space, adjoint_side,
        "star-side and adjoint-side conditions disagree for {} at ({},{}) on {}",
        op, p, q, m.name
    );
    if m.invariant() {
        let lap = operator_matrix(m, &OpExpr::prim(op.laplacian()), p, q)
            .expect("laplacians never contain conj")
            .kernel();
        assert_eq!(
            space, lap,
            "condition kernel and Laplacian kernel disagree for {} at ({},{}) on {}",
            op, p, q, m.name
        );
    }
    let basis = space.basis().iter().map(|v| form_from_coordinates(&window, v)).collect();
    HarmonicSpace { model: m.name.clone(), op, bidegree: (p, q), window, space, basis }
}

/// Outcome of a symbolic harmonicity test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarmonicVerdict {
    pub harmonic: bool,
    /// On failure: the first nonvanishing condition and its value.
    pub witness: Option<(String, Form)>,
}

/// Evaluates every condition of `op` on `f` symbolically.
pub fn is_harmonic(m: &Model, f: &Form, op: HarmonicOp) -> HarmonicVerdict {
    let set = condition_set(op);
    for (label, expr) in &set.conditions {
        let value = expr.apply(m, f);
        if !value.is_zero() {
            return HarmonicVerdict { harmonic: false, witness: Some((label.to_string(), value)) };
        }
    }
    HarmonicVerdict { harmonic: true, witness: None }
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
    fn constants_are_d_harmonic() {
        for m in [torus(), nil()] {
            let h = harmonic_space(&m, HarmonicOp::D, 0, 0);
            assert_eq!(h.dim(), 1);
            assert!(h.contains(&Form::one()));
        }
    }

    #[test]
    fn degenerate_bidegrees_give_zero_space() {
        let m = nil();
        let h = harmonic_space(&m, HarmonicOp::BottChern, 5, 2);
        assert_eq!(h.dim(), 0);
    }

    #[test]
    fn omega_powers_are_harmonic_for_every_op() {
        for m in [torus(), nil()] {
            for k in 0..=4u8 {
                let f = m.omega().wedge_pow(k as u32);
                for op in ALL_OPS {
                    let v = is_harmonic(&m, &f, op);
                    assert!(v.harmonic, "omega^{} not {}-harmonic on {}", k, op, m.name);
                }
            }
        }
    }

    #[test]
    fn paper_membership_on_torus() {
        let m = torus();
        let f = pf(&m, "phi[1,2,~2,~3]");
        let h_del = harmonic_space(&m, HarmonicOp::Del, 2, 2);
        let h_bc = harmonic_space(&m, HarmonicOp::BottChern, 2, 2);
        assert!(h_del.contains(&f));
        assert!(!h_bc.contains(&f));
        let v = is_harmonic(&m, &f, HarmonicOp::BottChern);
        assert!(!v.harmonic);
        let (label, value) = v.witness.unwrap();
        assert_eq!(label, "delbar");
        assert_eq!(value, pf(&m, "V4(g)*phi[4,~1,2,~2,~3]"));
    }

    #[test]
    fn bc_membership_of_decomposable_form() {
        let m = torus();
        let psi = pf(&m, "2*phi[2,~1,4,~4]");
        assert!(is_harmonic(&m, &psi, HarmonicOp::BottChern).harmonic);
        assert!(is_harmonic(&m, &psi, HarmonicOp::Del).harmonic);
        let alpha = pf(&m, "-i*phi[2,~1]");
        let beta = pf(&m, "phi[2,~1,4,~4] - phi[2,~1,3,~3]");
        for f in [&alpha, &beta] {
            for op in [HarmonicOp::BottChern, HarmonicOp::Del] {
                assert!(!is_harmonic(&m, f, op).harmonic);
            }
        }
        // The paper's witness: del alpha = -i V4b(g) phi^{21~4}, which is
        // +i V4b(g) phi^{12~4} in canonical order.
        let v = is_harmonic(&m, &alpha, HarmonicOp::Del);
        let (label, value) = v.witness.unwrap();
        assert_eq!(label, "del");
        assert_eq!(value, pf(&m, "i*V4b(g)*phi[1,2,~4]"));
        assert_eq!(value, pf(&m, "(-i)*V4b(g)*phi[2,1,~4]"));
    }

    #[test]
    fn invariant_spaces_at_two_two() {
        let m = nil();
        let spaces: Vec<HarmonicSpace> =
            ALL_OPS.iter().map(|&op| harmonic_space(&m, op, 2, 2)).collect();
        for s in &spaces[1..] {
            assert_eq!(s.space, spaces[0].space, "{} differs from d-space", s.op);
        }
        assert_eq!(spaces[0].dim(), 16);
    }

    #[test]
    fn serre_type_dualities_of_spaces() {
        // star . conj maps delbar-harmonic (p,q) onto delbar-harmonic
        // (n-p,n-q); star alone maps BC onto Aeppli at (n-q,n-p).
        let m = nil();
        for (p, q) in [(1u8, 1u8), (2, 1), (2, 2)] {
            let src = harmonic_space(&m, HarmonicOp::Delbar, p, q);
            let dst = harmonic_space(&m, HarmonicOp::Delbar, 4 - p, 4 - q);
            let mapped = Subspace::from_vectors(
                dst.window.len(),
                src.basis.iter().map(|f| {
                    let g = crate::operators::star(&m, &f.conjugate(&m.functions));
                    coordinates_in(&dst.window, &g).unwrap()
                }),
            );
            assert_eq!(mapped, dst.space, "Serre duality at ({},{})", p, q);

            let bc = harmonic_space(&m, HarmonicOp::BottChern, p, q);
            let a = harmonic_space(&m, HarmonicOp::Aeppli, 4 - q, 4 - p);
            let mapped = Subspace::from_vectors(
                a.window.len(),
                bc.basis.iter().map(|f| {
                    coordinates_in(&a.window, &crate::operators::star(&m, f)).unwrap()
                }),
            );
            assert_eq!(mapped, a.space, "BC/A duality at ({},{})", p, q);
        }
    }
}
