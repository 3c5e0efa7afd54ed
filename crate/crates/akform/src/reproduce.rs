//! Reproduction batteries for the two bundled models: membership and
//! witness checks for the torus example, the sixteen-dimensional invariant
//! harmonic space for the nilmanifold example, and the audit battery on
//! top of both.

use crate::audit::{run_audit_in, AuditContext, AuditId, ClauseStatus};
use crate::harmonic::{harmonic_space, is_harmonic, HarmonicOp};
use crate::linalg::Subspace;
use crate::model::Model;
use crate::operators::{coordinates_in, star};
use crate::parse::parse_form;
use crate::primitive::primitive_decompose;
use crate::Form;

#[derive(Clone, Debug)]
pub struct CheckRow {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckRow {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> CheckRow {
        CheckRow { name: name.to_string(), passed, detail: detail.into() }
    }
}

fn pf(m: &Model, s: &str) -> Form {
    parse_form(s, m.n, &m.functions).expect("bundled literals parse")
}

/// The sixteen invariant (2,2)-forms spanning the nilmanifold's Dolbeault
/// harmonic space, as listed for the example.
pub fn nil_sixteen_forms(m: &Model) -> Vec<Form> {
    [
        "phi[1,2,~1,~2]",
        "phi[1,2,~1,~3] + phi[1,3,~1,~2]",
        "phi[1,2,~3,~4] + phi[1,3,~2,~4]",
        "phi[1,2,~2,~3] + phi[2,3,~1,~2]",
        "phi[1,3,~2,~3] + phi[2,3,~1,~3]",
        "phi[1,3,~2,~4] + phi[2,3,~1,~4]",
        "phi[1,3,~1,~3] + phi[2,3,~2,~3]",
        "phi[1,3,~1,~4] + phi[2,3,~2,~4]",
        "phi[1,4,~2,~3] + phi[2,4,~1,~3]",
        "phi[1,4,~2,~4] + phi[2,4,~1,~4]",
        "phi[1,4,~1,~3] + phi[2,4,~2,~3]",
        "phi[1,4,~1,~4] + phi[2,4,~2,~4]",
        "phi[2,4,~1,~3] + phi[3,4,~1,~2]",
        "phi[1,4,~3,~4] + phi[3,4,~1,~4]",
        "phi[2,4,~3,~4] + phi[3,4,~2,~4]",
        "phi[3,4,~3,~4]",
    ]
    .iter()
    .map(|s| pf(m, s))
    .collect()
}

fn validation_rows(m: &Model) -> Vec<CheckRow> {
    let report = m.validate();
    vec![
        CheckRow::new("structure-d-squared-zero", report.all_valid(), ""),
        CheckRow::new("almost-kahler", report.almost_kahler, ""),
        CheckRow::new("non-integrable", !report.integrable, ""),
    ]
}

/// Membership and witness checks for the torus example: strictness of the
/// (2,2) inclusions and failure of primitive descent on a concrete form.
pub fn torus_example_checks(m: &Model) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    let h_del = harmonic_space(m, HarmonicOp::Del, 2, 2);
    let h_bc = harmonic_space(m, HarmonicOp::BottChern, 2, 2);
    let h_delbar = harmonic_space(m, HarmonicOp::Delbar, 2, 2);
    let h_a = harmonic_space(m, HarmonicOp::Aeppli, 2, 2);

    for lit in ["phi[1,2,~2,~3]", "phi[1,3,~2,~3]"] {
        let f = pf(m, lit);
        rows.push(CheckRow::new(
            &format!("{} in H_del not in H_bc", lit),
            h_del.contains(&f) && !h_bc.contains(&f),
            is_harmonic(m, &f, HarmonicOp::BottChern)
                .witness
                .map(|(label, v)| format!("witness {}-condition = {}", label, v))
                .unwrap_or_default(),
        ));
        let sf = star(m, &f);
        rows.push(CheckRow::new(
            &format!("star {} in H_delbar not in H_a", lit),
            h_delbar.contains(&sf) && !h_a.contains(&sf),
            format!("star = {}", sf),
        ));
    }

    let starred = star(m, &pf(m, "phi[1,2,~2,~3]"));
    rows.push(CheckRow::new(
        "star phi[1,2,~2,~3] = phi[1,4,~3,~4]",
        starred == pf(m, "phi[1,4,~3,~4]"),
        "",
    ));

    let psi = pf(m, "2*phi[2,~1,4,~4]");
    let alpha = pf(m, "-i*phi[2,~1]");
    let beta = pf(m, "phi[2,~1,4,~4] - phi[2,~1,3,~3]");
    rows.push(CheckRow::new(
        "psi = 2 phi[2,~1,4,~4] in H_bc and H_del",
        is_harmonic(m, &psi, HarmonicOp::BottChern).harmonic
            && is_harmonic(m, &psi, HarmonicOp::Del).harmonic,
        "",
    ));
    let dec = primitive_decompose(m, &psi).expect("homogeneous");
    rows.push(CheckRow::new(
        "primitive components of psi",
        dec.component(1) == alpha && dec.component(0) == beta,
        format!("r=1: {}; r=0: {}", dec.component(1), dec.component(0)),
    ));
    let expected_witness = pf(m, "i*V4b(g)*phi[1,2,~4]");
    let alpha_del = is_harmonic(m, &alpha, HarmonicOp::Del);
    rows.push(CheckRow::new(
        "alpha fails del with the listed witness",
        alpha_del.witness.as_ref().map(|(label, v)| label == "del" && *v == expected_witness)
            == Some(true),
        alpha_del
            .witness
            .map(|(label, v)| format!("{}-condition = {}", label, v))
            .unwrap_or_default(),
    ));
    for (label, f) in [("alpha", &alpha), ("beta", &beta)] {
        rows.push(CheckRow::new(
            &format!("{} not harmonic for bc nor del", label),
            !is_harmonic(m, f, HarmonicOp::BottChern).harmonic
                && !is_harmonic(m, f, HarmonicOp::Del).harmonic,
            "",
        ));
    }
    let del_beta = crate::operators::del(m, &beta);
    rows.push(CheckRow::new(
        "del beta matches the listed value",
        del_beta == pf(m, "(-1)*V4b(g)*phi[2,1,~4,3,~3]") && !del_beta.is_zero(),
        format!("del beta = {}", del_beta),
    ));
    rows
}

/// The nilmanifold example: the invariant harmonic space at (2,2) has
/// dimension sixteen, is spanned by the listed forms, and is the same for
/// all four Laplacians.
pub fn nil_example_checks(m: &Model) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    let h_delbar = harmonic_space(m, HarmonicOp::Delbar, 2, 2);
    let dim = h_delbar.dim();
    rows.push(CheckRow::new(
        "invariant H_delbar (2,2) has dimension 16",
        dim == 16,
        if dim == 16 { String::new() } else { format!("computed dimension = {}", dim) },
    ));

    let listed = nil_sixteen_forms(m);
    let listed_span = Subspace::from_vectors(
        h_delbar.window.len(),
        listed.iter().map(|f| coordinates_in(&h_delbar.window, f).expect("constant form")),
    );
    rows.push(CheckRow::new(
        "listed sixteen forms span the space",
        listed_span == h_delbar.space,
        format!("listed span dim = {}", listed_span.dim()),
    ));

    for op in [HarmonicOp::Del, HarmonicOp::BottChern, HarmonicOp::Aeppli] {
        let h = harmonic_space(m, op, 2, 2);
        rows.push(CheckRow::new(
            &format!("H_{} (2,2) equals H_delbar (2,2)", op),
            h.space == h_delbar.space,
            format!("dim = {}", h.dim()),
        ));
    }
    rows
}

fn audit_rows(m: &Model, ids: &[AuditId]) -> Vec<CheckRow> {
    let ctx = AuditContext::new(m);
    ids.iter()
        .map(|id| match run_audit_in(&ctx, id.clone()) {
            Ok(report) => {
                let failed: Vec<&str> = report
                    .clauses
                    .iter()
                    .filter(|c| c.status == ClauseStatus::Fail)
                    .map(|c| c.name.as_str())
                    .collect();
                CheckRow::new(
                    &format!("audit {}", report.audit),
                    report.passed(),
                    if failed.is_empty() { String::new() } else { failed.join(", ") },
                )
            }
            Err(e) => CheckRow::new(&format!("audit {}", id), false, e.to_string()),
        })
        .collect()
}

/// The full battery for one bundled model.
pub fn run(m: &Model) -> Vec<CheckRow> {
    let mut rows = validation_rows(m);
    match m.name.as_str() {
        "torus8" => {
            rows.extend(torus_example_checks(m));
            let mut ids = vec![AuditId::Inclusion22, AuditId::PrimitiveNonDescent];
            for op in crate::harmonic::ALL_OPS {
                ids.push(AuditId::DecompKk(op, 2));
            }
            rows.extend(audit_rows(m, &ids));
            // Strictness of both inclusions is the point of this model.
            let ctx = AuditContext::new(m);
            let incl = run_audit_in(&ctx, AuditId::Inclusion22).expect("applicable");
            rows.push(CheckRow::new(
                "inclusions are strict",
                incl.detail("bc-strict-in-del") == Some("true")
                    && incl.detail("a-strict-in-delbar") == Some("true"),
                "",
            ));
        }
        "h12xT3" => {
            rows.extend(nil_example_checks(m));
            let mut ids = vec![AuditId::Inclusion22, AuditId::PrimitiveDescent22];
            for op in crate::harmonic::ALL_OPS {
                ids.push(AuditId::DecompKk(op, 2));
            }
            for op in crate::harmonic::BIGRADED_OPS {
                ids.push(AuditId::Dim8Characterization(op));
            }
            rows.extend(audit_rows(m, &ids));
        }
        _ => {
            rows.push(CheckRow::new("bundled battery", false, "unknown model id"));
        }
    }
    rows
}
