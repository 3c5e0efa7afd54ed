//! Almost Hermitian coframe models: complex dimension, structure equations
//! `dphi^i`, declared functions, and the derived fundamental and volume
//! forms. The metric always makes the declared coframe unitary.

use crate::exterior::{BasisForm, Form};
use crate::parse::{parse_model_source, ParseError};
use crate::scalars::{DiffPoly, FunctionTable, GaussRat};
use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("could not read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown bundled model `{0}` (expected torus8 or h12xT3)")]
    UnknownBundled(String),
}

/// An almost Hermitian model presented by a unitary coframe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    pub name: String,
    pub n: u8,
    pub coframe: Vec<String>,
    structure: Vec<Form>,
    pub functions: FunctionTable,
    omega: Form,
    vol: Form,
}

pub const TORUS8_SRC: &str = include_str!("../models/torus8.ak");
pub const H12XT3_SRC: &str = include_str!("../models/h12xT3.ak");

impl Model {
    pub fn from_source_text(name: &str, text: &str) -> Result<Model, ModelError> {
        let src = parse_model_source(text)?;
        Ok(Model::assemble(name, src.n, src.structure, src.functions))
    }

    /// Loads a bundled model by id, or any model file by path.
    pub fn load(spec: &str) -> Result<Model, ModelError> {
        match spec {
            "torus8" => Model::from_source_text("torus8", TORUS8_SRC),
            "h12xT3" => Model::from_source_text("h12xT3", H12XT3_SRC),
            path => {
                let text = std::fs::read_to_string(path)
                    .map_err(|source| ModelError::Io { path: path.to_string(), source })?;
                let stem = std::path::Path::new(path)
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("model");
                Model::from_source_text(stem, &text)
            }
        }
    }

    fn assemble(name: &str, n: u8, structure: Vec<Form>, functions: FunctionTable) -> Model {
        let omega = fundamental_form(n);
        let factorial: u64 = (1..=n as u64).product();
        let vol = omega.wedge_pow(n as u32).scale_gauss(&GaussRat::from_ratio(1, factorial as i64));
        Model {
            name: name.to_string(),
            n,
            coframe: (1..=n).map(|j| format!("phi{}", j)).collect(),
            structure,
            functions,
            omega,
            vol,
        }
    }

    /// The structure form `dphi^i` (1-based index).
    pub fn dphi(&self, i: u8) -> &Form {
        &self.structure[i as usize - 1]
    }

    /// `dphibar^i`, derived by conjugating the structure equation.
    pub fn dphi_bar(&self, i: u8) -> Form {
        self.structure[i as usize - 1].conjugate(&self.functions)
    }

    /// The fundamental form `omega = i * sum_j phi^{j ~j}`.
    pub fn omega(&self) -> &Form {
        &self.omega
    }

    /// The volume form `omega^n / n!`.
    pub fn vol(&self) -> &Form {
        &self.vol
    }

    /// Unit coefficient of the top monomial in the volume form.
    pub fn vol_unit(&self) -> GaussRat {
        self.vol.coeff(&BasisForm::top(self.n)).constant_part()
    }

    /// True when every structure coefficient is constant (left invariant).
    pub fn invariant(&self) -> bool {
        self.structure.iter().all(|f| f.has_constant_coefficients())
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        for i in 1..=self.n {
            let dd = crate::operators::apply_d(self, self.dphi(i));
            report.d_squared_ok.push(dd.is_zero());
            if !dd.is_zero() {
                report.messages.push(format!("d^2 phi{} = {}", i, dd));
            }
        }
        for name in self.functions.names() {
            let sym = crate::scalars::DerivSymbol::new(name, false, [], &self.functions)
                .expect("declared function");
            let f = Form::scalar(DiffPoly::symbol(sym));
            let ddf = crate::operators::apply_d(self, &crate::operators::apply_d(self, &f));
            report.functions_ok.push((name.to_string(), ddf.is_zero()));
            if !ddf.is_zero() {
                report.messages.push(format!("d^2 {} = {}", name, ddf));
            }
        }
        let domega = crate::operators::apply_d(self, &self.omega);
        report.almost_kahler = domega.is_zero();
        if !domega.is_zero() {
            report.messages.push(format!("d omega = {}", domega));
        }
        // Integrable iff mubar vanishes on the coframe, i.e. no (0,2) part
        // in any structure equation (the mu side follows by conjugation).
        report.integrable = (1..=self.n).all(|i| self.dphi(i).bidegree_project(0, 2).is_zero());
        let vol_terms: Vec<_> = self.vol.terms().collect();
        let unit_norm = vol_terms.len() == 1
            && vol_terms[0].1.is_constant()
            && num_traits::One::is_one(&vol_terms[0].1.constant_part().norm_sq());
        report.vol_ok = unit_norm && *vol_terms[0].0 == BasisForm::top(self.n);
        report
    }
}

fn fundamental_form(n: u8) -> Form {
    let mut omega = Form::zero();
    for j in 1..=n {
        let b = BasisForm::from_indices(&[j], &[j]);
        omega = omega.add(&Form::monomial(b, DiffPoly::constant(GaussRat::i())));
    }
    omega
}

/// Pretty-prints a model back into the file grammar (round-trip safe).
impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dim {}", self.n)?;
        for name in self.functions.names() {
            let decl = self.functions.get(name).unwrap();
            write!(f, "function {}{} depends", name, if decl.real { " real" } else { "" })?;
            for d in &decl.depends {
                write!(f, " {}", d)?;
            }
            writeln!(f)?;
        }
        for i in 1..=self.n {
            writeln!(f, "dphi {} = {}", i, self.dphi(i))?;
        }
        Ok(())
    }
}

/// Outcome of the structural model checks.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    /// `d^2 phi^i = 0` per coframe index.
    pub d_squared_ok: Vec<bool>,
    /// `d^2 f = 0` per declared function (requires the structure equations
    /// of every coframe direction the function depends on to be closed).
    pub functions_ok: Vec<(String, bool)>,
    /// `d omega = 0`.
    pub almost_kahler: bool,
    /// No `(0,2)` component in any structure equation.
    pub integrable: bool,
    /// The derived volume form is the top monomial with a unit coefficient.
    pub vol_ok: bool,
    pub messages: Vec<String>,
}

impl ValidationReport {
    pub fn all_valid(&self) -> bool {
        self.d_squared_ok.iter().all(|&b| b)
            && self.functions_ok.iter().all(|(_, b)| *b)
            && self.vol_ok
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, ok) in self.d_squared_ok.iter().enumerate() {
            writeln!(f, "d^2 phi{} = 0: {}", i + 1, if *ok { "ok" } else { "FAIL" })?;
        }
        for (name, ok) in &self.functions_ok {
            writeln!(f, "d^2 {} = 0: {}", name, if *ok { "ok" } else { "FAIL" })?;
        }
        writeln!(f, "volume form canonical: {}", if self.vol_ok { "ok" } else { "FAIL" })?;
        writeln!(f, "almost Kahler (d omega = 0): {}", if self.almost_kahler { "yes" } else { "no" })?;
        writeln!(f, "integrable: {}", if self.integrable { "yes" } else { "no" })?;
        for m in &self.messages {
            writeln!(f, "  {}", m)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_form;

    #[test]
    fn bundled_models_load() {
        let torus = Model::load("torus8").unwrap();
        assert_eq!(torus.n, 4);
        let expected =
            parse_form("V4(g)*phi[4,~1] + (-1)*V4b(g)*phi[~1,~4]", 4, &torus.functions).unwrap();
        assert_eq!(torus.dphi(1), &expected);
        for i in 2..=4 {
            assert!(torus.dphi(i).is_zero());
        }
        assert!(!torus.invariant());

        let nil = Model::load("h12xT3").unwrap();
        assert_eq!(nil.n, 4);
        let expected = parse_form(
            "(-i/4)*(phi[2,3] + phi[2,~3] - phi[3,~2] + phi[~2,~3])",
            4,
            &nil.functions,
        )
        .unwrap();
        assert_eq!(nil.dphi(1), &expected);
        assert!(nil.dphi(3).is_zero());
        assert!(nil.dphi(4).is_zero());
        assert!(nil.invariant());
    }

    #[test]
    fn derived_forms() {
        let m = Model::load("h12xT3").unwrap();
        let omega = parse_form(
            "i*phi[1,~1] + i*phi[2,~2] + i*phi[3,~3] + i*phi[4,~4]",
            4,
            &m.functions,
        )
        .unwrap();
        assert_eq!(m.omega(), &omega);
        // omega^4/4! is the canonical top monomial with coefficient 1,
        // matching the paper ordering phi^{1~12~23~34~4} = phi^{1234~1~2~3~4}.
        let top = parse_form("phi[1,~1,2,~2,3,~3,4,~4]", 4, &m.functions).unwrap();
        assert_eq!(m.vol(), &top);
        assert!(m.vol_unit().is_one());
    }

    #[test]
    fn validation_of_bundled_models() {
        for id in ["torus8", "h12xT3"] {
            let m = Model::load(id).unwrap();
            let report = m.validate();
            assert!(report.all_valid(), "{} validation: {}", id, report);
            assert!(report.almost_kahler, "{} should be almost Kahler", id);
            assert!(!report.integrable, "{} should not be integrable", id);
        }
    }

    #[test]
    fn d_squared_violation_is_flagged() {
        // d(dphi^1) = d(phi^{23}) = dphi^2 ^ phi^3 = phi^{14} ^ phi^3 =
        // -phi^{134} != 0; brute-force expansion pins the expected value.
        let text = "dim 4\ndphi 1 = phi[2,3]\ndphi 2 = phi[1,4]\n";
        let m = Model::from_source_text("broken", text).unwrap();
        let report = m.validate();
        assert!(!report.d_squared_ok[0]);
        assert!(report.d_squared_ok[2]);
        assert!(report.d_squared_ok[3]);
        let dd = crate::operators::apply_d(&m, m.dphi(1));
        let expected = parse_form("-phi[1,3,4]", 4, &m.functions).unwrap();
        assert_eq!(dd, expected);
    }

    #[test]
    fn display_reparse_identity() {
        for id in ["torus8", "h12xT3"] {
            let m = Model::load(id).unwrap();
            let reparsed = Model::from_source_text(&m.name, &m.to_string()).unwrap();
            assert_eq!(m, reparsed);
        }
    }

    #[test]
    fn omega_powers_stay_closed() {
        let m = Model::load("torus8").unwrap();
        for k in 0..=4 {
            let p = m.omega().wedge_pow(k);
            assert!(crate::operators::apply_d(&m, &p).is_zero(), "d(omega^{}) != 0", k);
        }
    }
}
