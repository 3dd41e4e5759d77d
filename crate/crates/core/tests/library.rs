use symortho::cases::{self, check_symmetric_structure, CaseId, StructureKind};
use symortho::deflation::deflate;
use symortho::io::{from_json, real_to_json, AnyTensor};
use symortho::solvers::{self, grid_oracle, ApproxProblem, OracleConfig, SolverConfig};
use symortho::{Error, Notion};

#[test]
fn case_ids_round_trip_through_strings() {
    for id in CaseId::ALL {
        assert_eq!(id.as_str().parse::<CaseId>().unwrap(), id);
        assert!(!cases::build_case(id).tensors.is_empty());
    }
    assert!(matches!("no-such-case".parse::<CaseId>(), Err(Error::UnknownCase(_))));
}

#[test]
fn library_tensors_are_symmetric_with_known_norms() {
    for t in [cases::t_main(), cases::t_no_son(), cases::t_no_on(), cases::t_coincide()] {
        assert!(t.is_symmetric(1e-15).unwrap());
    }
    // Six permutations of e1⊗e2⊗e3, each weighted 1/6.
    assert!((cases::t_main().inner(&cases::t_main()).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    assert!((cases::t_no_on().frobenius_norm() - 2.0).abs() < 1e-15);
}

#[test]
fn json_round_trip_is_exact() {
    let t = cases::random_tensor(vec![2, 3, 4], 5);
    let back = from_json(&real_to_json(&t)).unwrap();
    assert_eq!(back, AnyTensor::Real(t));
    let err = from_json(r#"{"dims": [2, 2], "data": [1, 2, 3]}"#).unwrap_err();
    assert!(err.to_string().contains("data"), "{err}");
    let err = from_json(r#"{"dims": [2], "data": [1, "x"]}"#).unwrap_err();
    assert!(err.to_string().contains("data[1]"), "{err}");
    assert!(matches!(from_json("{\"dims\": [2,"), Err(Error::Parse(_))));
}

#[test]
fn invalid_problems_are_rejected() {
    let t = cases::t_no_son();
    let cfg = SolverConfig::default().with_starts(2);
    let solve = |notion: Notion, r: usize| solvers::solve(&ApproxProblem::new(t.clone(), notion, r).with_config(cfg.clone()));
    assert!(matches!(solve(Notion::Con, 3), Err(Error::Infeasible(_))));
    assert!(matches!(solve(Notion::Pcon(vec![3]), 2), Err(Error::Mode { mode: 3, order: 3 })));
    assert!(solve(Notion::Con, 0).is_err());
    let nonsym = cases::random_tensor(vec![2, 2, 2], 1);
    let p = ApproxProblem::new(nonsym, Notion::Con, 2).symmetric(true);
    assert!(p.validate().is_err());
}

#[test]
fn oracle_brackets_the_solver_on_a_small_case() {
    let t = cases::t_no_son();
    let p = ApproxProblem::new(t, Notion::Con, 2).with_config(SolverConfig::default().with_starts(16));
    let res = solvers::solve(&p).unwrap();
    let rep = grid_oracle(&p, &OracleConfig::default()).unwrap();
    assert!(rep.hi - rep.lo <= 1e-7);
    assert!(rep.contains(res.objective, 1e-9), "{} not in [{}, {}]", res.objective, rep.lo, rep.hi);
}

#[test]
fn oracle_declines_large_shapes() {
    let t = cases::random_tensor(vec![4, 4, 4], 3);
    let p = ApproxProblem::new(t, Notion::Con, 2);
    assert!(matches!(grid_oracle(&p, &OracleConfig::default()), Err(Error::Unsupported(_))));
}

#[test]
fn unconstrained_deflation_recovers_an_orthogonal_sum() {
    let d = cases::odeco_example();
    let t = d.assemble().unwrap();
    let out = deflate(&t, 3, false, &SolverConfig::default().with_starts(16)).unwrap();
    assert!(out.residual < 1e-8, "residual {}", out.residual);
    let mut sigmas: Vec<f64> = out.trace.steps.iter().map(|s| s.sigma.abs()).collect();
    sigmas.sort_by(|a, b| b.total_cmp(a));
    for (s, want) in sigmas.iter().zip([2.0, 1.0, 0.5]) {
        assert!((s - want).abs() < 1e-8);
    }
}

#[test]
fn structure_checks_on_library_decompositions() {
    let v = check_symmetric_structure(&cases::cyclic_family(), StructureKind::Symrank3).unwrap();
    assert!(v.holds);
    let v = check_symmetric_structure(&cases::main_cyclic_candidate(), StructureKind::Symrank3);
    // Either a verdict or a rejected hypothesis; never a panic.
    assert!(v.is_ok() || matches!(v, Err(Error::Structure(_))));
}
