//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. All comparisons are exact; every stated runtime bound is asserted.

use akform::audit::{run_audit_in, AuditContext, AuditId};
use akform::harmonic::{harmonic_space, HarmonicOp, ALL_OPS, BIGRADED_OPS};
use akform::linalg::Subspace;
use akform::model::Model;
use akform::operators::coordinates_in;
use akform::props;
use akform::reproduce;
use std::time::{Duration, Instant};

const SEED: u64 = props::DEFAULT_SEED;

fn finish(criterion: &str, start: Instant, bound: Duration) {
    let elapsed = start.elapsed();
    assert!(
        elapsed <= bound,
        "{} exceeded its time budget: {:?} > {:?}",
        criterion,
        elapsed,
        bound
    );
    println!("{}: PASS ({:?})", criterion, elapsed);
}

#[test]
fn criterion_1_nilmanifold_invariant_space() {
    let start = Instant::now();
    let m = Model::load("h12xT3").unwrap();
    let h_delbar = harmonic_space(&m, HarmonicOp::Delbar, 2, 2);
    println!("computed dim H_delbar^(2,2) = {}", h_delbar.dim());
    assert_eq!(
        h_delbar.dim(),
        16,
        "invariant harmonic space dimension discrepancy: computed {} instead of 16; basis:\n{}",
        h_delbar.dim(),
        h_delbar.basis.iter().map(|f| format!("  {}", f)).collect::<Vec<_>>().join("\n")
    );
    let listed = reproduce::nil_sixteen_forms(&m);
    let listed_span = Subspace::from_vectors(
        h_delbar.window.len(),
        listed.iter().map(|f| coordinates_in(&h_delbar.window, f).unwrap()),
    );
    assert_eq!(listed_span, h_delbar.space, "listed sixteen forms span a different space");
    for op in [HarmonicOp::Del, HarmonicOp::BottChern, HarmonicOp::Aeppli] {
        let h = harmonic_space(&m, op, 2, 2);
        assert_eq!(h.space, h_delbar.space, "H_{} differs from H_delbar at (2,2)", op);
    }
    finish("criterion 1 (invariant (2,2) space, four-way equality)", start, Duration::from_secs(5));
}

#[test]
fn criterion_2_torus_memberships_and_witnesses() {
    let start = Instant::now();
    let m = Model::load("torus8").unwrap();
    for row in reproduce::torus_example_checks(&m) {
        assert!(row.passed, "{}: {}", row.name, row.detail);
    }
    finish("criterion 2 (torus memberships, decomposition, witnesses)", start, Duration::from_secs(1));
}

#[test]
fn criterion_3_theorem_audits() {
    let start = Instant::now();
    for id in ["torus8", "h12xT3"] {
        let m = Model::load(id).unwrap();
        let ctx = AuditContext::new(&m);
        for op in ALL_OPS {
            for k in 0..=m.n {
                let report = run_audit_in(&ctx, AuditId::DecompKk(op, k)).unwrap();
                assert!(report.passed(), "{}", report);
            }
        }
        for op in BIGRADED_OPS {
            for k in 0..=m.n {
                let report = run_audit_in(&ctx, AuditId::ThmKkStructure(op, k)).unwrap();
                assert!(report.passed(), "{}", report);
            }
            let report = run_audit_in(&ctx, AuditId::Dim8Characterization(op)).unwrap();
            assert!(report.passed(), "{}", report);
        }
        let incl = run_audit_in(&ctx, AuditId::Inclusion22).unwrap();
        assert!(incl.passed(), "{}", incl);
        match id {
            "torus8" => {
                assert_eq!(incl.detail("bc-strict-in-del"), Some("true"), "{}", incl);
                assert_eq!(incl.detail("a-strict-in-delbar"), Some("true"), "{}", incl);
                let nd = run_audit_in(&ctx, AuditId::PrimitiveNonDescent).unwrap();
                assert!(nd.passed(), "{}", nd);
            }
            _ => {
                assert_eq!(incl.detail("all-four-equal"), Some("true"), "{}", incl);
                let d = run_audit_in(&ctx, AuditId::PrimitiveDescent22).unwrap();
                assert!(d.passed(), "{}", d);
            }
        }
    }
    finish("criterion 3 (decomp-kk, dim8 characterizations, inclusions)", start, Duration::from_secs(30));
}

#[test]
fn criterion_4_operator_identity_suite() {
    let start = Instant::now();
    let cases = 200;
    for id in ["torus8", "h12xT3"] {
        let m = Model::load(id).unwrap();
        let results = [
            props::check_d_squared(&m, SEED, cases),
            props::check_bigraded_relations(&m, SEED, cases),
            props::check_dc_identity(&m, SEED, cases),
            props::check_star_involution(&m, SEED, cases),
            props::check_lefschetz_adjoint(&m, SEED, cases),
            props::check_kahler_identity(&m, SEED, cases),
            props::check_bc_a_star_duality(&m, SEED, cases),
        ];
        for r in results {
            assert!(r.passed(), "{} / {}: {:?}", r.model, r.name, r.failure);
            assert!(r.cases >= cases, "{} ran only {} cases", r.name, r.cases);
        }
    }
    finish("criterion 4 (randomized operator identities, 200+ cases each)", start, Duration::from_secs(60));
}

#[test]
fn criterion_5_weil_formula_oracle() {
    let start = Instant::now();
    for id in ["torus8", "h12xT3"] {
        let m = Model::load(id).unwrap();
        let weil = props::check_weil_formula(&m, SEED, 100);
        assert!(weil.passed(), "{:?}", weil.failure);
        assert!(weil.cases >= 100);
        let expansion = props::check_weil_psi_expansion(&m, SEED, 50);
        assert!(expansion.passed(), "{:?}", expansion.failure);
    }
    finish("criterion 5 (closed-form star vs Hodge star on primitives)", start, Duration::from_secs(30));
}

#[test]
fn criterion_6_lefschetz_rank_checks() {
    let start = Instant::now();
    for id in ["torus8", "h12xT3"] {
        let m = Model::load(id).unwrap();
        let r = props::check_lefschetz_ranks(&m);
        assert!(r.passed(), "{:?}", r.failure);
    }
    finish("criterion 6 (L^h injectivity/surjectivity ranks)", start, Duration::from_secs(10));
}

#[test]
fn criterion_7_primitive_decomposition_roundtrip() {
    let start = Instant::now();
    for id in ["torus8", "h12xT3"] {
        let m = Model::load(id).unwrap();
        let r = props::check_decompose_roundtrip(&m, SEED, 500);
        assert!(r.passed(), "{:?}", r.failure);
        assert!(r.cases >= 500 * 25, "{} ran only {} cases", r.name, r.cases);
    }
    finish("criterion 7 (decompose-reassemble identity, 500 per window)", start, Duration::from_secs(30));
}
