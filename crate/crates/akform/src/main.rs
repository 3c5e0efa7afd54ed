//! Command-line front end: model validation, harmonic-space computation,
//! primitive decomposition, per-form harmonicity checks, theorem audits,
//! bundled-example reproduction, and the randomized self-test suites.

use akform::audit::{run_audit_in, standard_battery, AuditContext, AuditId, ClauseStatus};
use akform::exterior::unicode_form;
use akform::harmonic::{harmonic_space, is_harmonic, HarmonicOp};
use akform::model::Model;
use akform::parse::parse_form;
use akform::primitive::primitive_decompose;
use akform::props::{run_all, PropConfig, DEFAULT_SEED};
use akform::Form;
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "akform", version, about = "Exact operator calculus on almost Kahler coframe models")]
struct Cli {
    /// Pretty unicode form output (default is the stable literal grammar).
    #[arg(long, global = true)]
    unicode: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check structure equations: d^2 = 0, d omega = 0, integrability.
    Validate(ModelArg),
    /// Compute a coframe-constant harmonic space at one bidegree.
    Harmonic {
        #[command(flatten)]
        model: ModelArg,
        /// Laplacian kernel: d, del, delbar, bc or a.
        #[arg(long)]
        op: String,
        /// Bidegree as `p,q`.
        #[arg(long)]
        bidegree: String,
        #[arg(long)]
        json: bool,
    },
    /// Primitive (Lefschetz) decomposition of a homogeneous form.
    Decompose {
        #[command(flatten)]
        model: ModelArg,
        /// Form literal, e.g. "2*phi[2,~1,4,~4]".
        #[arg(long)]
        form: String,
        #[arg(long)]
        json: bool,
    },
    /// Decide harmonicity of a single (possibly symbolic) form, or apply
    /// an operator expression to it.
    Check {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        form: String,
        /// Laplacian kernel to test against: d, del, delbar, bc or a.
        #[arg(long, conflicts_with = "expr")]
        op: Option<String>,
        /// Operator expression to apply instead, e.g. "del delbar star".
        #[arg(long)]
        expr: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Run one named audit, or `all` for the standard battery.
    Audit {
        #[command(flatten)]
        model: ModelArg,
        /// Audit id, e.g. "decomp-kk(bc,2)", "inclusion-2-2", "all".
        #[arg(long)]
        name: String,
        #[arg(long)]
        json: bool,
    },
    /// Reproduce the bundled example batteries and print a pass/fail table.
    Reproduce {
        /// Bundled model id: torus8 or h12xT3.
        model: String,
        #[arg(long)]
        json: bool,
    },
    /// Run the randomized operator-identity suites on the bundled models.
    Selftest {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 60)]
        cases: usize,
        /// Model id or path (default: both bundled models).
        #[arg(long)]
        model: Option<String>,
    },
}

#[derive(Args)]
struct ModelArg {
    /// Bundled model id (torus8, h12xT3) or a model file path.
    model: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(all_passed) => {
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
    }
}

fn load(spec: &str) -> Result<Model, String> {
    Model::load(spec).map_err(|e| e.to_string())
}

fn render(unicode: bool, f: &Form) -> String {
    if unicode {
        unicode_form(f)
    } else {
        f.to_string()
    }
}

fn parse_bidegree(s: &str) -> Result<(u8, u8), String> {
    let (p, q) = s.split_once(',').ok_or_else(|| format!("bad bidegree `{}`", s))?;
    let p = p.trim().parse().map_err(|_| format!("bad bidegree `{}`", s))?;
    let q = q.trim().parse().map_err(|_| format!("bad bidegree `{}`", s))?;
    Ok((p, q))
}

fn parse_op(s: &str) -> Result<HarmonicOp, String> {
    HarmonicOp::from_name(s).ok_or_else(|| format!("unknown operator `{}` (want d, del, delbar, bc, a)", s))
}

fn run(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Validate(arg) => {
            let m = load(&arg.model)?;
            let report = m.validate();
            print!("{}", report);
            Ok(report.all_valid())
        }
        Command::Harmonic { model, op, bidegree, json } => {
            let m = load(&model.model)?;
            let op = parse_op(&op)?;
            let (p, q) = parse_bidegree(&bidegree)?;
            let space = harmonic_space(&m, op, p, q);
            if json {
                let value = json!({
                    "model": space.model,
                    "op": op.name(),
                    "bidegree": [p, q],
                    "dim": space.dim(),
                    "basis": space.basis.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                });
                println!("{}", serde_json::to_string_pretty(&value).unwrap());
            } else {
                println!("harmonic space {} at ({},{}) on {}: dim {}", op, p, q, m.name, space.dim());
                for f in &space.basis {
                    println!("  {}", render(cli.unicode, f));
                }
            }
            Ok(true)
        }
        Command::Decompose { model, form, json } => {
            let m = load(&model.model)?;
            let f = parse_form(&form, m.n, &m.functions).map_err(|e| e.to_string())?;
            let dec = primitive_decompose(&m, &f).map_err(|e| e.to_string())?;
            if json {
                let value = json!({
                    "model": m.name,
                    "form": f.to_string(),
                    "bidegree": [dec.source_bidegree.0, dec.source_bidegree.1],
                    "components": dec.components.iter()
                        .map(|(r, c)| json!({"r": r, "form": c.to_string()}))
                        .collect::<Vec<_>>(),
                });
                println!("{}", serde_json::to_string_pretty(&value).unwrap());
            } else {
                for (r, c) in &dec.components {
                    println!("r={}: {}", r, render(cli.unicode, c));
                }
            }
            Ok(true)
        }
        Command::Check { model, form, op, expr, json } => {
            let m = load(&model.model)?;
            let f = parse_form(&form, m.n, &m.functions).map_err(|e| e.to_string())?;
            if let Some(expr) = expr {
                let parsed = akform::operators::parse_op_expr(&expr).map_err(|e| e.to_string())?;
                let image = parsed.apply(&m, &f);
                if json {
                    let value = json!({
                        "model": m.name,
                        "expr": expr,
                        "form": f.to_string(),
                        "value": image.to_string(),
                        "zero": image.is_zero(),
                    });
                    println!("{}", serde_json::to_string_pretty(&value).unwrap());
                } else {
                    println!("{}", render(cli.unicode, &image));
                }
                return Ok(true);
            }
            let op = parse_op(op.as_deref().ok_or("one of --op or --expr is required")?)?;
            let verdict = is_harmonic(&m, &f, op);
            if json {
                let value = json!({
                    "model": m.name,
                    "op": op.name(),
                    "form": f.to_string(),
                    "harmonic": verdict.harmonic,
                    "witness": verdict.witness.as_ref().map(|(label, value)| json!({
                        "condition": label,
                        "value": value.to_string(),
                    })),
                });
                println!("{}", serde_json::to_string_pretty(&value).unwrap());
            } else {
                match &verdict.witness {
                    None => println!("harmonic"),
                    Some((label, value)) => println!(
                        "not harmonic; witness: {}-condition = {}",
                        label,
                        render(cli.unicode, value)
                    ),
                }
            }
            Ok(true)
        }
        Command::Audit { model, name, json } => {
            let m = load(&model.model)?;
            let ctx = AuditContext::new(&m);
            let ids = if name == "all" {
                standard_battery(&m)
            } else {
                vec![AuditId::parse(&name).map_err(|e| e.to_string())?]
            };
            let mut all = true;
            let mut values = Vec::new();
            for id in ids {
                let report = run_audit_in(&ctx, id).map_err(|e| e.to_string())?;
                all &= report.passed();
                if json {
                    values.push(json!({
                        "audit": report.audit,
                        "model": report.model,
                        "passed": report.passed(),
                        "clauses": report.clauses.iter().map(|c| json!({
                            "name": c.name,
                            "status": match c.status {
                                ClauseStatus::Pass => "pass",
                                ClauseStatus::Fail => "fail",
                                ClauseStatus::Info => "info",
                            },
                            "detail": c.detail,
                        })).collect::<Vec<_>>(),
                    }));
                } else {
                    print!("{}", report);
                }
            }
            if json {
                println!("{}", serde_json::to_string_pretty(&values).unwrap());
            }
            Ok(all)
        }
        Command::Reproduce { model, json } => {
            if model != "torus8" && model != "h12xT3" {
                return Err(format!("unknown bundled model `{}` (expected torus8 or h12xT3)", model));
            }
            let m = load(&model)?;
            let rows = akform::reproduce::run(&m);
            let all = rows.iter().all(|r| r.passed);
            if json {
                let value = json!({
                    "model": m.name,
                    "passed": all,
                    "checks": rows.iter().map(|r| json!({
                        "check": r.name,
                        "passed": r.passed,
                        "detail": r.detail,
                    })).collect::<Vec<_>>(),
                });
                println!("{}", serde_json::to_string_pretty(&value).unwrap());
            } else {
                println!("reproduction battery: {}", m.name);
                for r in &rows {
                    println!(
                        "  {:<52} {}{}",
                        r.name,
                        if r.passed { "pass" } else { "FAIL" },
                        if r.detail.is_empty() { String::new() } else { format!("  ({})", r.detail) }
                    );
                }
                println!("result: {}", if all { "PASS" } else { "FAIL" });
            }
            Ok(all)
        }
        Command::Selftest { seed, cases, model } => {
            let models = match model {
                Some(spec) => vec![load(&spec)?],
                None => vec![load("torus8")?, load("h12xT3")?],
            };
            let cfg = PropConfig { seed, cases };
            let mut all = true;
            for m in &models {
                for r in run_all(m, &cfg) {
                    let ok = r.passed();
                    all &= ok;
                    println!(
                        "  {:<24} {:<24} {:>6} cases  {}{}",
                        r.model,
                        r.name,
                        r.cases,
                        if ok { "pass" } else { "FAIL" },
                        r.failure.as_deref().map(|f| format!("  ({})", f)).unwrap_or_default()
                    );
                }
            }
            println!("result: {}", if all { "PASS" } else { "FAIL" });
            Ok(all)
        }
    }
}
