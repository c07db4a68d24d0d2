use clearpack::bnb::BnbStatus;
use clearpack::model::{export_lp_text, parse_lp_text};
use clearpack::oracle::DEFAULT_CAP;
use clearpack::rational::qi;
use clearpack::{
    build_strip_packing, disjunction_oracle, generate_instance, solve_milp, solve_strip, validate_layout,
    FormulationKind, FormulationOptions, GenConfig, OracleResult, SolveOptions,
};

#[test]
fn options_keep_the_optimum() {
    let cfg = GenConfig { strip_width: qi(40), ..GenConfig::default() };
    for seed in 0..3 {
        let inst = generate_instance(seed, 3, &cfg).unwrap();
        let OracleResult::Optimal(h) = disjunction_oracle(&inst, DEFAULT_CAP).unwrap() else { panic!("feasible") };
        for kind in FormulationKind::ALL {
            for (static_bounds, sequence_pair, branch_priorities) in [(false, false, false), (true, false, false), (false, true, true)] {
                let form = FormulationOptions { static_bounds, sequence_pair, branch_priorities };
                let opts = SolveOptions { use_priorities: branch_priorities, ..Default::default() };
                let (_, out) = solve_strip(&inst, kind, form, opts, true).unwrap();
                assert_eq!(out.result.status, BnbStatus::Optimal);
                assert_eq!(out.height.as_ref(), Some(&h), "{kind} {form:?}");
                assert!(validate_layout(&inst, out.layout.as_ref().unwrap()).is_valid());
            }
        }
    }
}

#[test]
fn exported_model_solves_to_the_same_height() {
    let inst = generate_instance(5, 3, &GenConfig { strip_width: qi(30), ..GenConfig::default() }).unwrap();
    for kind in FormulationKind::ALL {
        let sp = build_strip_packing(&inst, kind, FormulationOptions::default()).unwrap();
        let back = parse_lp_text(&export_lp_text(&sp.model)).unwrap();
        let a = solve_milp(&sp.model, &SolveOptions::default());
        let b = solve_milp(&back, &SolveOptions::default());
        assert_eq!(a.objective(), b.objective(), "{kind}");
    }
}

#[test]
fn warm_start_never_worsens_the_greedy_height() {
    let inst = generate_instance(21, 8, &GenConfig::default()).unwrap();
    let opts = SolveOptions { node_limit: Some(3), ..Default::default() };
    let (sp, out) = solve_strip(&inst, FormulationKind::SBL, FormulationOptions::default(), opts, true).unwrap();
    assert!(out.result.warm_start_used);
    assert!(out.height.unwrap() <= sp.greedy.h);
}
