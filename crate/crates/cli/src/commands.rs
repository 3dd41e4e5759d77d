use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde_json::Value;
use symortho::cases::{self, verify_case, CaseId, CaseReport};
use symortho::deflation::deflate;
use symortho::io::{from_json, real_to_json};
use symortho::norms::{chain_check, Certification};
use symortho::orthogonality::decomposition_check;
use symortho::solvers::{self, grid_oracle, solve_cross, ApproxProblem, ApproxResult, OracleConfig, SolverConfig};
use symortho::{Decomposition, DenseTensor, Notion};

use crate::args::*;
use crate::output::{emit, num, write_text, Table};
use crate::Failure;

/// Largest mode dimension the command line accepts.
const MAX_DIM: usize = 16;
/// Largest order the command line accepts.
const MAX_ORDER: usize = 6;

pub fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Gen(a) => gen(a),
        Command::Approx(a) => approx(a),
        Command::Oracle(a) => oracle(a),
        Command::Norms(a) => norms(a),
        Command::Deflate(a) => deflate_cmd(a),
        Command::Check(a) => check(a),
        Command::Paper {
            command: PaperCommand::Verify(a),
        } => verify(a),
    }
}

fn guard(dims: &[usize]) -> Result<(), Failure> {
    if dims.len() > MAX_ORDER {
        return Err(Failure::usage(format!(
            "order {} exceeds the command-line limit of {MAX_ORDER}",
            dims.len()
        )));
    }
    if let Some(&n) = dims.iter().find(|&&n| n > MAX_DIM) {
        return Err(Failure::usage(format!(
            "dimension {n} exceeds the command-line limit of {MAX_DIM} (dims {dims:?})"
        )));
    }
    Ok(())
}

fn read_input(path: Option<&Path>) -> Result<String, Failure> {
    match path {
        Some(p) => fs::read_to_string(p).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(Failure::io)?;
            Ok(s)
        }
    }
}

fn read_tensor(path: Option<&PathBuf>) -> Result<DenseTensor<f64>, Failure> {
    let text = read_input(path.map(PathBuf::as_path))?;
    let where_ = path.map_or("stdin".to_string(), |p| p.display().to_string());
    let t = from_json(&text).map_err(|e| Failure::usage(format!("{where_}: {e}")))?;
    guard(t.dims())?;
    Ok(t.into_real()?)
}

/// Converts 1-based command-line modes.
fn notion(arg: NotionArg, modes: &[usize]) -> Result<Notion, Failure> {
    if arg != NotionArg::Pcon {
        if !modes.is_empty() {
            return Err(Failure::usage("--modes applies to --notion pcon only"));
        }
        return Ok(match arg {
            NotionArg::On => Notion::On,
            NotionArg::Son => Notion::Son,
            _ => Notion::Con,
        });
    }
    if modes.is_empty() {
        return Err(Failure::usage("--notion pcon needs --modes, e.g. --modes 1,3"));
    }
    if modes.contains(&0) {
        return Err(Failure::usage("modes are 1-based"));
    }
    Ok(Notion::pcon(modes.iter().map(|m| m - 1))?)
}

fn solver_config(s: &Search) -> SolverConfig {
    SolverConfig::default().with_starts(s.starts.max(1)).with_seed(s.seed)
}

fn problem(p: &ProblemArgs, config: SolverConfig) -> Result<ApproxProblem, Failure> {
    let t = read_tensor(p.input.as_ref())?;
    let problem = ApproxProblem::new(t, notion(p.notion, &p.modes)?, p.rank)
        .symmetric(p.symmetric)
        .structured(p.structured)
        .with_config(config);
    problem.validate()?;
    Ok(problem)
}

fn label<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn result_fields(r: &ApproxResult) -> Vec<(&'static str, String)> {
    vec![
        ("notion", r.notion.to_string()),
        ("rank", r.rank.to_string()),
        ("symmetric", r.symmetric.to_string()),
        ("structured", r.structured.to_string()),
        ("objective", num(r.objective)),
        ("residual", num(r.residual)),
        ("relative_residual", num(r.relative_residual)),
        ("feasible", r.certificate.valid.to_string()),
        ("phase", label(&r.phase)),
        ("pattern", r.pattern.clone()),
        ("best_start", r.best_start.to_string()),
        ("heuristic", r.heuristic.to_string()),
        ("starts", r.config.starts.to_string()),
        ("seed", r.seed.to_string()),
    ]
}

fn gen(a: GenArgs) -> Result<(), Failure> {
    let t = match &a.case {
        Some(name) => cases::build_case(name.parse::<CaseId>()?).tensor().clone(),
        None => {
            guard(&a.dims)?;
            if a.dims.is_empty() || a.dims.contains(&0) {
                return Err(Failure::usage("--dims needs positive entries"));
            }
            if a.symmetric {
                if a.dims.windows(2).any(|w| w[0] != w[1]) {
                    return Err(Failure::usage("--symmetric needs equal dims"));
                }
                cases::random_symmetric(a.dims[0], a.dims.len(), a.seed)
            } else {
                cases::random_tensor(a.dims.clone(), a.seed)
            }
        }
    };
    write_text(&(real_to_json(&t) + "\n"), a.out.as_deref())
}

fn approx(a: ApproxArgs) -> Result<(), Failure> {
    let p = problem(&a.problem, solver_config(&a.search))?;
    let out = a.output.out.as_deref();
    if a.cross {
        let c = solve_cross(&p)?;
        return emit(
            &c,
            || {
                let mut f = result_fields(&c.general);
                if let Some(s) = &c.symmetric {
                    f.push(("symmetric_objective", num(s.objective)));
                    f.push(("symmetric_residual", num(s.residual)));
                }
                f.push(("values_agree", c.values_agree.map_or("n/a".into(), |b| b.to_string())));
                Table::fields(f)
            },
            a.output.format,
            out,
        );
    }
    let r = solvers::solve(&p)?;
    emit(&r, || Table::fields(result_fields(&r)), a.output.format, out)
}

fn oracle(a: OracleArgs) -> Result<(), Failure> {
    let p = problem(&a.problem, SolverConfig::default())?;
    let cfg = OracleConfig {
        tol: a.tol,
        ..OracleConfig::default()
    };
    let r = grid_oracle(&p, &cfg)?;
    let norm = p.tensor.inner(&p.tensor)?;
    emit(
        &r,
        || {
            Table::fields(vec![
                ("notion", r.notion.to_string()),
                ("rank", r.rank.to_string()),
                ("symmetric", r.symmetric.to_string()),
                ("structured", r.structured.to_string()),
                ("angles", r.angles.to_string()),
                ("models", r.models.to_string()),
                ("cells", r.cells.to_string()),
                ("depth", r.depth.to_string()),
                ("objective_lo", num(r.lo)),
                ("objective_hi", num(r.hi)),
                ("residual_lo", num((norm - r.hi).max(0.0).sqrt())),
                ("residual_hi", num((norm - r.lo).max(0.0).sqrt())),
                ("best_model", r.best_model.clone()),
            ])
        },
        a.output.format,
        a.output.out.as_deref(),
    )
}

fn norms(a: NormsArgs) -> Result<(), Failure> {
    let t = read_tensor(a.input.as_ref())?;
    if a.max_rank == 0 {
        return Err(Failure::usage("--max-rank must be at least 1"));
    }
    let cfg = OracleConfig {
        tol: a.tol,
        ..OracleConfig::default()
    };
    let rep = chain_check(&t, a.max_rank, &solver_config(&a.search), a.certify.then_some(&cfg))?;
    emit(
        &rep,
        || {
            let mut tab = Table::new(vec!["norm", "rank", "value", "lo", "hi"]);
            tab.row(vec!["frobenius".into(), String::new(), num(rep.frobenius), String::new(), String::new()]);
            tab.row(vec!["spectral".into(), "1".into(), num(rep.spectral), String::new(), String::new()]);
            for e in &rep.entries {
                let (lo, hi) = match e.certification {
                    Certification::Certified { lo, hi } => (num(lo), num(hi)),
                    Certification::LowerBound => (num(e.value), String::new()),
                };
                tab.row(vec![e.notion.to_string(), e.rank.to_string(), num(e.value), lo, hi]);
            }
            tab
        },
        a.output.format,
        a.output.out.as_deref(),
    )?;
    if rep.holds {
        Ok(())
    } else {
        Err(Failure::verification(format!("norm chain violated: {}", rep.violations.join("; "))))
    }
}

fn deflate_cmd(a: DeflateArgs) -> Result<(), Failure> {
    let t = read_tensor(a.input.as_ref())?;
    let d = deflate(&t, a.rank, a.constrained, &solver_config(&a.search))?;
    emit(
        &d,
        || {
            let mut tab = Table::new(vec!["step", "sigma", "residual", "zero"]);
            for (i, s) in d.trace.steps.iter().enumerate() {
                tab.row(vec![(i + 1).to_string(), num(s.sigma), num(s.residual), s.zero.to_string()]);
            }
            tab
        },
        a.output.format,
        a.output.out.as_deref(),
    )
}

/// A bare decomposition, or one nested in an `approx` report.
fn ingest_decomposition(text: &str) -> Result<Decomposition<f64>, Failure> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| Failure::usage(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    let inner = v
        .get("decomposition")
        .or_else(|| v.get("general").and_then(|g| g.get("decomposition")))
        .unwrap_or(&v);
    let d: Decomposition<f64> =
        serde_json::from_value(inner.clone()).map_err(|e| Failure::usage(format!("not a decomposition: {e}")))?;
    // Deserialization skips the shape checks; rebuild through the constructor.
    let d = Decomposition::new(d.dims().to_vec(), d.into_terms())?;
    guard(d.dims())?;
    Ok(d)
}

fn check(a: CheckArgs) -> Result<(), Failure> {
    let d = ingest_decomposition(&read_input(a.input.as_deref())?)?;
    let n = notion(a.notion, &a.modes)?;
    let cert = decomposition_check(&d, &n, a.tol)?;
    emit(
        &cert,
        || {
            let mut tab = Table::new(vec!["term_a", "term_b", "orthogonal", "strongly", "completely", "notion_holds"]);
            for p in &cert.pairs {
                tab.row(vec![
                    (p.terms.0 + 1).to_string(),
                    (p.terms.1 + 1).to_string(),
                    p.orthogonal.to_string(),
                    p.strongly_orthogonal.to_string(),
                    p.completely_orthogonal.to_string(),
                    p.holds(&n).to_string(),
                ]);
            }
            tab
        },
        a.output.format,
        a.output.out.as_deref(),
    )?;
    if cert.valid {
        Ok(())
    } else {
        Err(Failure::verification(format!("decomposition is not {n}-orthogonal")))
    }
}

fn verify(a: VerifyArgs) -> Result<(), Failure> {
    let ids: Vec<CaseId> = match &a.case {
        Some(name) => vec![name.parse()?],
        None => CaseId::ALL.to_vec(),
    };
    let solver = solver_config(&a.search);
    let oracle = OracleConfig {
        tol: a.tol,
        ..OracleConfig::default()
    };
    let reports: Vec<CaseReport> = ids
        .iter()
        .map(|&id| verify_case(id, &solver, &oracle))
        .collect::<Result<_, _>>()?;
    let table = || {
        let mut tab = Table::new(vec!["case", "check", "relation", "expected", "tol", "measured", "origin", "result"]);
        for r in &reports {
            for c in &r.checks {
                tab.row(vec![
                    r.id.to_string(),
                    c.name.clone(),
                    c.relation.symbol().to_string(),
                    format!("{:.4}", c.expected),
                    num(c.tol),
                    format!("{:.6}", c.measured),
                    label(&c.origin),
                    if c.passed { "pass" } else { "FAIL" }.to_string(),
                ]);
            }
        }
        tab
    };
    let out = a.out.as_deref();
    match reports.as_slice() {
        [one] => emit(one, table, a.format, out)?,
        many => emit(&many, table, a.format, out)?,
    }
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::verification(format!("failing cases: {}", failed.join(", "))))
    }
}
