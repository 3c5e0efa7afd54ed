//! Primitivity tests, the exact Lefschetz (primitive) decomposition of
//! homogeneous forms, and the closed-form star formula on primitive forms
//! used as an independent oracle for the Hodge star.

use crate::exterior::{bidegree_basis, BasisForm, Form};
use crate::linalg::{Mat, UniqueSolver};
use crate::model::Model;
use crate::operators::{coordinates_in, form_from_coordinates, lambda, lefschetz};
use crate::scalars::{DiffPoly, GaussRat, PolyMonomial};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PrimitiveError {
    #[error("form must be homogeneous of one bidegree")]
    NonHomogeneous,
    #[error("primitivity is defined for total degree <= n = {0}")]
    DegreeTooHigh(u8),
    #[error("form is not primitive")]
    NotPrimitive,
    #[error("power r = {0} out of range 0..={1}")]
    PowerOutOfRange(u32, u32),
}

/// `true` iff `Lam f = 0`; cross-checked against the `L^{n-k+1} f = 0`
/// criterion, which must agree.
pub fn is_primitive(m: &Model, f: &Form) -> Result<bool, PrimitiveError> {
    if f.is_zero() {
        return Ok(true);
    }
    let k = f.homogeneous_degree().ok_or(PrimitiveError::NonHomogeneous)?;
    if k > m.n {
        return Err(PrimitiveError::DegreeTooHigh(m.n));
    }
    let by_lambda = lambda(m, f).is_zero();
    let by_power = lefschetz(m, f, (m.n - k + 1) as u32).is_zero();
    assert_eq!(
        by_lambda, by_power,
        "primitivity criteria disagree; this is a bug in the operator engine"
    );
    Ok(by_lambda)
}

/// The family of primitive components of a homogeneous `(p,q)`-form:
/// `f = sum_r L^r comp[r]` with `comp[r]` primitive of bidegree `(p-r,q-r)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimitiveComponents {
    pub source_bidegree: (u8, u8),
    pub components: BTreeMap<u8, Form>,
}

impl PrimitiveComponents {
    /// Reassembles `sum_r L^r comp[r]`.
    pub fn reassemble(&self, m: &Model) -> Form {
        let mut acc = Form::zero();
        for (r, comp) in &self.components {
            acc = acc.add(&lefschetz(m, comp, *r as u32));
        }
        acc
    }

    pub fn component(&self, r: u8) -> Form {
        self.components.get(&r).cloned().unwrap_or_else(Form::zero)
    }
}

impl fmt::Display for PrimitiveComponents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (r, comp) in &self.components {
            writeln!(f, "r={}: {}", r, comp)?;
        }
        Ok(())
    }
}

/// Admissible Lefschetz powers at bidegree `(p,q)`: `max(p+q-n,0) <= r <=
/// min(p,q)`.
fn power_range(n: u8, p: u8, q: u8) -> std::ops::RangeInclusive<u8> {
    let lo = (p as i16 + q as i16 - n as i16).max(0) as u8;
    lo..=p.min(q)
}

/// Precomputed exact solver for the decomposition system
/// `{f = sum_r L^r x_r, Lam x_r = 0}` at one bidegree window.
pub struct Decomposer {
    p: u8,
    q: u8,
    powers: Vec<u8>,
    blocks: Vec<Vec<BasisForm>>,
    target_basis: Vec<BasisForm>,
    solver: UniqueSolver,
}

impl Decomposer {
    pub fn new(m: &Model, p: u8, q: u8) -> Decomposer {
        let powers: Vec<u8> = power_range(m.n, p, q).collect();
        let blocks: Vec<Vec<BasisForm>> =
            powers.iter().map(|&r| bidegree_basis(m.n, p - r, q - r)).collect();
        let target_basis = bidegree_basis(m.n, p, q);
        // Row layout: reconstruction rows over the (p,q) basis, then one
        // primitivity block per power r over the (p-r-1, q-r-1) basis.
        let mut prim_bases: Vec<Vec<BasisForm>> = Vec::new();
        for &r in &powers {
            let (bp, bq) = (p - r, q - r);
            if bp == 0 || bq == 0 {
                prim_bases.push(Vec::new());
            } else {
                prim_bases.push(bidegree_basis(m.n, bp - 1, bq - 1));
            }
        }
        let unknowns: usize = blocks.iter().map(|b| b.len()).sum();
        let rows: usize = target_basis.len() + prim_bases.iter().map(|b| b.len()).sum::<usize>();
        let mut mat = Mat::zero(rows, unknowns);
        let mut col = 0;
        for (bi, (&r, block)) in powers.iter().zip(&blocks).enumerate() {
            let prim_row_offset: usize =
                target_basis.len() + prim_bases[..bi].iter().map(|b| b.len()).sum::<usize>();
            for b in block {
                let image = lefschetz(m, &Form::basis(*b), r as u32);
                for (tb, c) in image.terms() {
                    let row = target_basis.binary_search(tb).expect("target basis");
                    *mat.at_mut(row, col) = c.constant_part();
                }
                let lam = lambda(m, &Form::basis(*b));
                for (tb, c) in lam.terms() {
                    let row = prim_row_offset + prim_bases[bi].binary_search(tb).expect("prim basis");
                    *mat.at_mut(row, col) = c.constant_part();
                }
                col += 1;
            }
        }
        let solver = UniqueSolver::new(&mat)
            .expect("the Lefschetz decomposition system must have full column rank");
        Decomposer { p, q, powers, blocks, target_basis, solver }
    }

    /// Decomposes one constant-coefficient slice given by coordinates on the
    /// `(p,q)` basis.
    fn decompose_slice(&self, coords: &[(usize, GaussRat)]) -> Vec<Form> {
        let x = self
            .solver
            .solve_sparse(coords)
            .expect("the Lefschetz decomposition system must be consistent");
        let mut out = Vec::with_capacity(self.powers.len());
        let mut offset = 0;
        for block in &self.blocks {
            let coords = &x[offset..offset + block.len()];
            out.push(form_from_coordinates(block, coords));
            offset += block.len();
        }
        out
    }

    pub fn decompose(&self, m: &Model, f: &Form) -> Result<PrimitiveComponents, PrimitiveError> {
        let bidegree = f.homogeneous_bidegree().unwrap_or((self.p, self.q));
        if !f.is_zero() && bidegree != (self.p, self.q) {
            return Err(PrimitiveError::NonHomogeneous);
        }
        // Solve one constant slice per coefficient monomial; the operators
        // involved never touch coefficients, so slices recombine linearly.
        let mut slices: BTreeMap<PolyMonomial, Vec<(usize, GaussRat)>> = BTreeMap::new();
        for (b, c) in f.terms() {
            let idx = self.target_basis.binary_search(b).expect("basis monomial");
            for (mono, coeff) in c.terms() {
                slices.entry(mono.clone()).or_default().push((idx, coeff.clone()));
            }
        }
        let mut components: BTreeMap<u8, Form> =
            self.powers.iter().map(|&r| (r, Form::zero())).collect();
        for (mono, coords) in slices {
            let solved = self.decompose_slice(&coords);
            let scale = DiffPoly::from_terms([(mono, GaussRat::one())]);
            for (&r, part) in self.powers.iter().zip(&solved) {
                let entry = components.get_mut(&r).unwrap();
                *entry = entry.add(&part.scale(&scale));
            }
        }
        let result = PrimitiveComponents { source_bidegree: (self.p, self.q), components };
        debug_assert_eq!(result.reassemble(m), *f);
        Ok(result)
    }
}

/// Primitive decomposition of a homogeneous `(p,q)`-form by one exact
/// linear solve. The system is uniquely solvable; failure aborts.
pub fn primitive_decompose(m: &Model, f: &Form) -> Result<PrimitiveComponents, PrimitiveError> {
    let (p, q) = match f.homogeneous_bidegree() {
        Some(pq) => pq,
        None if f.is_zero() => {
            return Ok(PrimitiveComponents { source_bidegree: (0, 0), components: BTreeMap::new() })
        }
        None => return Err(PrimitiveError::NonHomogeneous),
    };
    Decomposer::new(m, p, q).decompose(m, f)
}

/// Closed-form star of `L^r beta` for primitive `beta` of degree `k`:
/// `star(L^r beta) = (-1)^{k(k+1)/2} * r!/(n-k-r)! * L^{n-k-r} (J beta)`.
/// Must equal `star(lefschetz(beta, r))` computed from the defining
/// relation; that cross-check is this formula's acceptance test.
pub fn weil_star(m: &Model, beta: &Form, r: u32) -> Result<Form, PrimitiveError> {
    if beta.is_zero() {
        return Ok(Form::zero());
    }
    let k = beta.homogeneous_degree().ok_or(PrimitiveError::NonHomogeneous)?;
    if !is_primitive(m, beta)? {
        return Err(PrimitiveError::NotPrimitive);
    }
    let max_r = (m.n - k) as u32;
    if r > max_r {
        return Err(PrimitiveError::PowerOutOfRange(r, max_r));
    }
    let sign = if (k as u32 * (k as u32 + 1) / 2) % 2 == 0 { 1 } else { -1 };
    let num: i64 = factorial(r as u64) as i64;
    let den: i64 = factorial((max_r - r) as u64) as i64;
    let scalar = GaussRat::from_ratio(sign * num, den);
    Ok(lefschetz(m, &beta.j_act(), max_r - r).scale_gauss(&scalar))
}

fn factorial(n: u64) -> u64 {
    (1..=n).product::<u64>().max(1)
}

/// Convenience: coordinates of a constant form on its bidegree basis.
pub fn window_coordinates(m: &Model, f: &Form) -> Option<(Vec<BasisForm>, Vec<GaussRat>)> {
    let (p, q) = f.homogeneous_bidegree()?;
    let basis = bidegree_basis(m.n, p, q);
    let coords = coordinates_in(&basis, f).ok()?;
    Some((basis, coords))
}
