//! End-to-end strip packing: build, warm start from the greedy layout, solve.

use serde::Serialize;

use crate::bnb::{solve_milp, BnbResult, NodeOrder, SolveOptions};
use crate::formulations::{build_strip_packing, indicator_assignment, FormulationError, StripPacking};
use crate::model::{FormulationKind, FormulationOptions, LinExpr, MblpModel, ObjSense, Var};
use crate::packing::{Dir, Instance, PackingSolution};
use crate::rational::Rational;

#[derive(Debug, Clone, Serialize)]
pub struct StripOutcome {
    pub formulation: FormulationKind,
    pub greedy_height: Rational,
    pub height: Option<Rational>,
    pub layout: Option<PackingSolution>,
    pub result: BnbResult,
}

/// Complete a layout-induced assignment so it also meets rows the layout
/// alone does not settle (sequence-pair rows): centers and height stay
/// fixed and only the indicators are searched.
pub fn repair_assignment(model: &MblpModel, x0: &[Rational]) -> Option<Vec<Rational>> {
    if model.is_feasible(x0) {
        return Some(x0.to_vec());
    }
    let mut fixed = model.clone();
    for j in 0..fixed.num_vars() {
        if matches!(fixed.vars()[j].var, Var::C { .. } | Var::Height) {
            let v = fixed.var_mut(j);
            v.lower = Some(x0[j].clone());
            v.upper = Some(x0[j].clone());
        }
    }
    fixed.set_objective(ObjSense::Minimize, LinExpr::zero());
    let r = solve_milp(&fixed, &SolveOptions { node_order: NodeOrder::DepthFirst, ..Default::default() });
    r.incumbent.map(|i| i.point)
}

pub fn layout_from_point(sp: &StripPacking, x: &[Rational]) -> PackingSolution {
    let m = &sp.model;
    let centers = (1..=sp.instance.len())
        .map(|i| [x[m.idx(&Var::C { i, s: Dir::X })].clone(), x[m.idx(&Var::C { i, s: Dir::Y })].clone()])
        .collect();
    PackingSolution { centers, h: x[m.idx(&Var::Height)].clone() }
}

/// Solve strip packing for `inst` with formulation `kind`. When
/// `warm_start` is set the greedy layout seeds the incumbent.
pub fn solve_strip(
    inst: &Instance,
    kind: FormulationKind,
    form: FormulationOptions,
    mut opts: SolveOptions,
    warm_start: bool,
) -> Result<(StripPacking, StripOutcome), FormulationError> {
    let sp = build_strip_packing(inst, kind, form)?;
    if warm_start {
        let x0 = indicator_assignment(&sp.model, &sp.params, &sp.greedy);
        opts.warm_start = repair_assignment(&sp.model, &x0);
    }
    let result = solve_milp(&sp.model, &opts);
    let layout = result.incumbent.as_ref().map(|inc| layout_from_point(&sp, &inc.point));
    let out = StripOutcome {
        formulation: kind,
        greedy_height: sp.greedy.h.clone(),
        height: result.objective().cloned(),
        layout,
        result,
    };
    Ok((sp, out))
}
