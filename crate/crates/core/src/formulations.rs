//! MBLP embeddings of the pairwise disjunction: SU, RU, SB-L and SB-M.
//!
//! Every formulation shares the same skeleton per pair `(i, j)` and disjunct
//! `(k, l, s)`: a dynamic lower bound, a dynamic upper bound and a precedence
//! row, each driven by an affine "indicator" form `g`. For the unary models
//! `g = δ_kls`; for the binary ones `g = 1 - bcf(code(k,l,s), δ)`.

use std::collections::BTreeMap;

use crate::model::{
    FormulationKind, FormulationOptions, LinExpr, MblpModel, ModelMeta, ObjSense, RowTag, Sense, Side, Var,
    VariableDescriptor,
};
use crate::packing::{
    derive_parameters, disjunct_order, greedy_initial_layout, DerivedParams, Dir, Instance, PackingError,
    PackingSolution,
};
use crate::rational::{qi, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormulationError {
    #[error("sequence-pair inequalities need at least three objects (model has {0})")]
    NotApplicable(usize),
    #[error(transparent)]
    Packing(#[from] PackingError),
}

/// Which object pairs a model covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    All,
    Pair(usize, usize),
}

impl Selection {
    fn objects(self, n: usize) -> Vec<usize> {
        match self {
            Selection::All => (1..=n).collect(),
            Selection::Pair(i, j) => vec![i.min(j), i.max(j)],
        }
    }

    fn pairs(self, n: usize) -> Vec<(usize, usize)> {
        match self {
            Selection::All => (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect(),
            Selection::Pair(i, j) => vec![(i.min(j), i.max(j))],
        }
    }
}

/// Gray-code label of disjunct `(k, l, s)` within pair `(i, j)`, `i < j`.
pub fn gray_code(i: usize, k: usize, s: Dir) -> [u8; 2] {
    match (k == i, s) {
        (true, Dir::X) => [0, 0],
        (true, Dir::Y) => [1, 0],
        (false, Dir::X) => [1, 1],
        (false, Dir::Y) => [0, 1],
    }
}

/// `‖a - b‖₁` at a numeric point.
pub fn bcf_bar_value(a: [u8; 2], b: [&Rational; 2]) -> Rational {
    a.iter().zip(b).map(|(&ak, bk)| if ak == 1 { Rational::one() - bk } else { bk.clone() }).sum()
}

/// `‖a - b‖₁` as an affine form in `(δ_ij, δ_ji)`.
pub fn bcf_bar_form(a: [u8; 2], dij: usize, dji: usize) -> LinExpr {
    [dij, dji].iter().zip(a).fold(LinExpr::zero(), |acc, (&v, ak)| {
        if ak == 1 {
            acc + (LinExpr::constant(Rational::one()) - LinExpr::var(v))
        } else {
            acc + LinExpr::var(v)
        }
    })
}

/// `bcf_bar - |a1-b1||a2-b2|` with `Δ` standing in for `b1 b2`.
pub fn bcf_tilde_form(a: [u8; 2], dij: usize, dji: usize, aux: usize) -> LinExpr {
    let one = || LinExpr::constant(Rational::one());
    let (x, y, d) = (LinExpr::var(dij), LinExpr::var(dji), LinExpr::var(aux));
    match a {
        [0, 0] => x + y - d,
        [1, 0] => one() - x + d,
        [1, 1] => one() - d,
        [0, 1] => one() - y + d,
        _ => panic!("codes are binary"),
    }
}

/// The multilinear closed form of `bcf_tilde` with `Δ` given explicitly.
pub fn bcf_tilde_value(a: [u8; 2], b: [&Rational; 2], delta: &Rational) -> Rational {
    let (b1, b2) = (b[0], b[1]);
    let one = Rational::one();
    let two = qi(2);
    let a1 = Rational::from(a[0] as i64);
    let a2 = Rational::from(a[1] as i64);
    b1 + b2 - delta
        + &a1 * (&one - &a2) * (&one - &two * b1 - b2 + &two * delta)
        + (&one - &a1) * &a2 * (&one - b1 - &two * b2 + &two * delta)
        + &a1 * &a2 * (&one - b1 - b2)
}

fn meta(kind: FormulationKind, opts: FormulationOptions, name: String) -> ModelMeta {
    ModelMeta {
        name,
        formulation: Some(kind),
        options: opts,
        binary_upper_implied: kind.is_unary(),
    }
}

/// Builds the formulation `kind` over `sel`. Sequence-pair rows are added
/// when requested and the selection has at least three objects; branching
/// priorities need object data and are applied by [`build_strip_packing`].
pub fn build(kind: FormulationKind, params: &DerivedParams, sel: Selection, opts: FormulationOptions) -> MblpModel {
    let n = params.len();
    let objects = sel.objects(n);
    let pairs = sel.pairs(n);
    let mut m = MblpModel::new(meta(kind, opts, format!("{}", kind).to_lowercase().replace('-', "")));

    let static_c = opts.static_bounds || kind == FormulationKind::SBL;
    for s in Dir::BOTH {
        for &i in &objects {
            let var = Var::C { i, s };
            if static_c {
                m.add_var(VariableDescriptor::continuous(var, Some(params.lb(i, s).clone()), Some(params.ub(i, s).clone())));
            } else {
                m.add_var(VariableDescriptor::free(var));
            }
        }
    }
    for &(i, j) in &pairs {
        if kind.is_unary() {
            for (k, l, s) in disjunct_order(i, j) {
                m.add_var(VariableDescriptor::binary(Var::Unary { k, l, s }));
            }
        } else {
            m.add_var(VariableDescriptor::binary(Var::Binary { k: i, l: j }));
            m.add_var(VariableDescriptor::binary(Var::Binary { k: j, l: i }));
        }
    }
    if kind == FormulationKind::SBM {
        for &(i, j) in &pairs {
            m.add_var(VariableDescriptor::continuous(Var::Aux { i, j }, Some(Rational::zero()), None));
        }
    }

    for &(i, j) in &pairs {
        add_pair_rows(&mut m, kind, params, i, j, opts.static_bounds);
    }
    if opts.sequence_pair && objects.len() >= 3 {
        add_sequence_pair(&mut m, kind).expect("three or more objects");
    }
    m
}

pub fn build_su(params: &DerivedParams, sel: Selection, opts: FormulationOptions) -> MblpModel {
    build(FormulationKind::SU, params, sel, opts)
}

pub fn build_ru(params: &DerivedParams, sel: Selection, opts: FormulationOptions) -> MblpModel {
    build(FormulationKind::RU, params, sel, opts)
}

pub fn build_sbl(params: &DerivedParams, sel: Selection, opts: FormulationOptions) -> MblpModel {
    build(FormulationKind::SBL, params, sel, opts)
}

pub fn build_sbm(params: &DerivedParams, sel: Selection, opts: FormulationOptions) -> MblpModel {
    build(FormulationKind::SBM, params, sel, opts)
}

/// The affine indicator form of disjunct `(k, l, s)` of pair `(i, j)`.
fn indicator(m: &MblpModel, kind: FormulationKind, i: usize, j: usize, k: usize, l: usize, s: Dir) -> LinExpr {
    match kind {
        FormulationKind::SU | FormulationKind::RU => m.x(&Var::Unary { k, l, s }),
        FormulationKind::SBL | FormulationKind::SBM => {
            let code = gray_code(i, k, s);
            let dij = m.idx(&Var::Binary { k: i, l: j });
            let dji = m.idx(&Var::Binary { k: j, l: i });
            let bcf = if kind == FormulationKind::SBL {
                bcf_bar_form(code, dij, dji)
            } else {
                bcf_tilde_form(code, dij, dji, m.idx(&Var::Aux { i, j }))
            };
            LinExpr::constant(Rational::one()) - bcf
        }
    }
}

fn add_pair_rows(m: &mut MblpModel, kind: FormulationKind, p: &DerivedParams, i: usize, j: usize, static_bounds: bool) {
    let terms = disjunct_order(i, j);
    let c = |m: &MblpModel, o: usize, s: Dir| m.x(&Var::C { i: o, s });
    if !static_bounds {
        for (k, l, s) in terms {
            let g = indicator(m, kind, i, j, k, l, s);
            let coef = p.lb(k, s) + p.pm(k, l, s) - p.lb(l, s);
            let rhs = LinExpr::constant(p.lb(l, s).clone()) + g * &coef;
            m.add_constraint(c(m, l, s), Sense::Ge, rhs, RowTag::Lb { k, l, s });
        }
        for (k, l, s) in terms {
            let g = indicator(m, kind, i, j, k, l, s);
            let coef = p.ub(l, s) - p.pm(k, l, s) - p.ub(k, s);
            let rhs = LinExpr::constant(p.ub(k, s).clone()) + g * &coef;
            m.add_constraint(c(m, k, s), Sense::Le, rhs, RowTag::Ub { k, l, s });
        }
    }
    for (k, l, s) in terms {
        let tag = RowTag::Prec { k, l, s };
        let diff = c(m, k, s) - c(m, l, s);
        match kind {
            FormulationKind::SU => {
                let g = indicator(m, kind, i, j, k, l, s);
                let coef = p.lb(l, s) - p.pm(k, l, s) - p.ub(k, s);
                let rhs = LinExpr::constant(p.ub(k, s) - p.lb(l, s)) + g * &coef;
                m.add_constraint(diff, Sense::Le, rhs, tag);
            }
            FormulationKind::RU => {
                let (pm_kl, pm_lk) = (p.pm(k, l, s), p.pm(l, k, s));
                let rhs = LinExpr::constant(pm_lk.clone())
                    + m.x(&Var::Unary { k, l, s }) * &-(pm_lk + pm_kl)
                    + m.x(&Var::Unary { k: l, l: k, s }) * &(p.ub(k, s) - pm_lk - p.lb(l, s));
                m.add_constraint(diff, Sense::Le, rhs, tag);
            }
            FormulationKind::SBL | FormulationKind::SBM => {
                // c_ls - c_ks >= PM + (LB_ls - PM - UB_ks) bcf, with bcf = 1 - g
                let g = indicator(m, kind, i, j, k, l, s);
                let bcf = LinExpr::constant(Rational::one()) - g;
                let coef = p.lb(l, s) - p.pm(k, l, s) - p.ub(k, s);
                let rhs = LinExpr::constant(p.pm(k, l, s).clone()) + bcf * &coef;
                m.add_constraint(-diff, Sense::Ge, rhs, tag);
            }
        }
    }
    let one = || LinExpr::constant(Rational::one());
    match kind {
        FormulationKind::SU => {
            let sum = terms.iter().fold(LinExpr::zero(), |acc, &(k, l, s)| acc + m.x(&Var::Unary { k, l, s }));
            m.add_constraint(sum, Sense::Eq, one(), RowTag::Disj { i, j });
        }
        FormulationKind::RU => {
            for s in Dir::BOTH {
                let lhs = m.x(&Var::Unary { k: i, l: j, s }) + m.x(&Var::Unary { k: j, l: i, s });
                m.add_constraint(lhs, Sense::Le, one(), RowTag::Tight { i, j, s });
            }
            let sum = terms.iter().fold(LinExpr::zero(), |acc, &(k, l, s)| acc + m.x(&Var::Unary { k, l, s }));
            m.add_constraint(sum, Sense::Ge, one(), RowTag::Disj { i, j });
        }
        FormulationKind::SBL => {}
        FormulationKind::SBM => {
            let dij = m.x(&Var::Binary { k: i, l: j });
            let dji = m.x(&Var::Binary { k: j, l: i });
            let aux = m.x(&Var::Aux { i, j });
            m.add_constraint(dij.clone() + dji.clone() - aux.clone(), Sense::Le, one(), RowTag::McCorSum { i, j });
            m.add_constraint(dij - aux.clone(), Sense::Ge, LinExpr::zero(), RowTag::McCorLink { k: i, l: j });
            m.add_constraint(dji - aux, Sense::Ge, LinExpr::zero(), RowTag::McCorLink { k: j, l: i });
        }
    }
}

fn model_objects(m: &MblpModel) -> Vec<usize> {
    m.vars()
        .iter()
        .filter_map(|v| match v.var {
            Var::C { i, s: Dir::X } => Some(i),
            _ => None,
        })
        .collect()
}

/// Append the transitivity inequalities matching the model's indicator
/// type: unary rows for every ordered permutation of each triple and both
/// directions, or the two binary chains per triple `i < j < k`.
pub fn add_sequence_pair(m: &mut MblpModel, kind: FormulationKind) -> Result<usize, FormulationError> {
    let mut objs = model_objects(m);
    objs.sort_unstable();
    if objs.len() < 3 {
        return Err(FormulationError::NotApplicable(objs.len()));
    }
    let before = m.rows().len();
    let one = || LinExpr::constant(Rational::one());
    for (a, &i) in objs.iter().enumerate() {
        for (b, &j) in objs.iter().enumerate().skip(a + 1) {
            for &k in objs.iter().skip(b + 1) {
                if kind.is_unary() {
                    let perms = [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)];
                    for s in Dir::BOTH {
                        for &(p, q, r) in &perms {
                            let lhs = m.x(&Var::Unary { k: p, l: q, s }) + m.x(&Var::Unary { k: q, l: r, s })
                                - m.x(&Var::Unary { k: p, l: r, s });
                            m.add_constraint(lhs, Sense::Le, one(), RowTag::SeqUnary { i: p, j: q, k: r, s });
                        }
                    }
                } else {
                    let chains = [
                        (Var::Binary { k: i, l: j }, Var::Binary { k: j, l: k }, Var::Binary { k: i, l: k }),
                        (Var::Binary { k: j, l: i }, Var::Binary { k, l: j }, Var::Binary { k, l: i }),
                    ];
                    for (chain, (x, y, z)) in chains.iter().enumerate() {
                        let expr = m.x(x) + m.x(y) - m.x(z);
                        let chain = chain as u8;
                        m.add_constraint(
                            expr.clone(),
                            Sense::Ge,
                            LinExpr::zero(),
                            RowTag::SeqBinary { i, j, k, chain, side: Side::Lower },
                        );
                        m.add_constraint(expr, Sense::Le, one(), RowTag::SeqBinary { i, j, k, chain, side: Side::Upper });
                    }
                }
            }
        }
    }
    Ok(m.rows().len() - before)
}

/// Branching priorities favouring indicators between large objects.
///
/// Unary: `min σ_s + (max σ_s + 1)(min d_s + (max d_s + 1) min a)` per
/// direction with `σ_is = σ_is⁺ + σ_is⁻`. Binary: `min σ + (max σ + 1) min a`
/// with `σ_i = σ_ix + σ_iy`.
pub fn branching_priorities(inst: &Instance, kind: FormulationKind) -> BTreeMap<Var, Rational> {
    let n = inst.len();
    let one = Rational::one();
    let sig = |i: usize, s: Dir| {
        let o = inst.object(i);
        o.clear.plus(s) + o.clear.minus(s)
    };
    let area = |i: usize| inst.object(i).area();
    let mut out = BTreeMap::new();
    if kind.is_unary() {
        for s in Dir::BOTH {
            let max_sig = (1..=n).map(|i| sig(i, s)).max().unwrap_or_default();
            let max_d = (1..=n).map(|i| inst.object(i).dim(s).clone()).max().unwrap_or_default();
            for i in 1..=n {
                for j in 1..=n {
                    if i == j {
                        continue;
                    }
                    let min_d = inst.object(i).dim(s).clone().min(inst.object(j).dim(s).clone());
                    let p = sig(i, s).min(sig(j, s))
                        + (&max_sig + &one) * (min_d + (&max_d + &one) * area(i).min(area(j)));
                    out.insert(Var::Unary { k: i, l: j, s }, p);
                }
            }
        }
    } else {
        let tot = |i: usize| sig(i, Dir::X) + sig(i, Dir::Y);
        let max_sig = (1..=n).map(tot).max().unwrap_or_default();
        for i in 1..=n {
            for j in 1..=n {
                if i != j {
                    let p = tot(i).min(tot(j)) + (&max_sig + &one) * area(i).min(area(j));
                    out.insert(Var::Binary { k: i, l: j }, p);
                }
            }
        }
    }
    out
}

pub fn apply_priorities(m: &mut MblpModel, prio: &BTreeMap<Var, Rational>) {
    for j in 0..m.num_vars() {
        if let Some(p) = prio.get(&m.vars()[j].var) {
            m.var_mut(j).branch_priority = Some(p.clone());
        }
    }
}

/// A strip-packing model together with the data it was built from.
#[derive(Debug, Clone)]
pub struct StripPacking {
    pub model: MblpModel,
    /// The instance with its height cap lowered to the greedy height.
    pub instance: Instance,
    pub params: DerivedParams,
    pub greedy: PackingSolution,
}

/// Minimise the strip height `h >= c_iy + d_iy/2 + σ_iy⁺` over the chosen
/// embedding. The height cap is the greedy layout's height.
pub fn build_strip_packing(
    inst: &Instance,
    kind: FormulationKind,
    opts: FormulationOptions,
) -> Result<StripPacking, FormulationError> {
    let greedy = greedy_initial_layout(inst)?;
    let capped = if greedy.h.is_positive() { inst.with_height(greedy.h.clone())? } else { inst.clone() };
    let params = derive_parameters(&capped);
    let mut model = build(kind, &params, Selection::All, opts);
    model.meta.name = format!("strip_{}", model.meta.name);
    if capped.len() == 1 {
        // no pair rows hold the lone object inside its window
        for s in Dir::BOTH {
            let j = model.idx(&Var::C { i: 1, s });
            model.var_mut(j).lower = Some(params.lb(1, s).clone());
            model.var_mut(j).upper = Some(params.ub(1, s).clone());
        }
    }
    let h = model.add_var(VariableDescriptor::continuous(Var::Height, Some(Rational::zero()), None));
    for o in capped.objects() {
        let top = model.x(&Var::C { i: o.id, s: Dir::Y }) + (o.dim(Dir::Y) / qi(2) + o.clear.plus(Dir::Y));
        model.add_constraint(LinExpr::var(h), Sense::Ge, top, RowTag::Height { i: o.id });
    }
    model.set_objective(ObjSense::Minimize, LinExpr::var(h));
    if opts.branch_priorities {
        apply_priorities(&mut model, &branching_priorities(&capped, kind));
    }
    Ok(StripPacking { model, instance: capped, params, greedy })
}

/// A full variable assignment for `m` induced by a layout: centers and
/// height from `sol`, indicators from the precedence terms the layout
/// satisfies. Sequence-pair rows are not taken into account, so the result
/// may violate them; callers should check feasibility.
pub fn indicator_assignment(m: &MblpModel, params: &DerivedParams, sol: &PackingSolution) -> Vec<Rational> {
    let kind = m.meta.formulation.expect("formulation model");
    let mut x = vec![Rational::zero(); m.num_vars()];
    let mut pairs = Vec::new();
    for (j, v) in m.vars().iter().enumerate() {
        match &v.var {
            Var::C { i, s } => x[j] = sol.center(*i, *s).clone(),
            Var::Height => x[j] = sol.h.clone(),
            Var::Binary { k, l } if k < l => pairs.push((*k, *l)),
            Var::Unary { k, l, s: Dir::X } if k < l => pairs.push((*k, *l)),
            _ => {}
        }
    }
    let mut set = |v: Var, val: Rational| {
        if let Some(j) = m.var_index(&v) {
            x[j] = val;
        }
    };
    for (i, j) in pairs {
        let holds = crate::packing::satisfied_terms(params, sol, i, j);
        let Some(&(k, _, s)) = holds.first() else { continue };
        match kind {
            FormulationKind::SU => {
                let (k, l, s) = holds[0];
                set(Var::Unary { k, l, s }, Rational::one());
            }
            FormulationKind::RU => {
                for &(k, l, s) in &holds {
                    set(Var::Unary { k, l, s }, Rational::one());
                }
            }
            FormulationKind::SBL | FormulationKind::SBM => {
                let code = gray_code(i, k, s);
                set(Var::Binary { k: i, l: j }, Rational::from(code[0] as i64));
                set(Var::Binary { k: j, l: i }, Rational::from(code[1] as i64));
                set(Var::Aux { i, j }, Rational::from((code[0] * code[1]) as i64));
            }
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FamilyCounts;
    use crate::packing::{Clearance, ObjectSpec, Region};
    use crate::rational::q;

    pub(crate) fn counterexample() -> DerivedParams {
        let o = |id| ObjectSpec::new(id, qi(2), qi(2), Clearance::zero());
        derive_parameters(&Instance::new(Region { w: qi(10), h: qi(10) }, vec![o(1), o(2)]).unwrap())
    }

    fn counts(kind: FormulationKind) -> FamilyCounts {
        build(kind, &counterexample(), Selection::All, FormulationOptions::default()).family_counts()
    }

    #[test]
    fn size_table() {
        let t = |p, b, l, c, bin| FamilyCounts { precedence: p, bounds: b, logic: l, continuous_aux: c, binaries: bin };
        assert_eq!(counts(FormulationKind::SU), t(4, 8, 1, 0, 4));
        assert_eq!(counts(FormulationKind::RU), t(4, 8, 3, 0, 4));
        assert_eq!(counts(FormulationKind::SBL), t(4, 8, 0, 0, 2));
        assert_eq!(counts(FormulationKind::SBM), t(4, 8, 3, 1, 2));
    }

    #[test]
    fn gray_code_table() {
        assert_eq!(gray_code(1, 1, Dir::X), [0, 0]);
        assert_eq!(gray_code(1, 1, Dir::Y), [1, 0]);
        assert_eq!(gray_code(1, 2, Dir::X), [1, 1]);
        assert_eq!(gray_code(1, 2, Dir::Y), [0, 1]);
    }

    #[test]
    fn bcf_values() {
        let (z, o) = (qi(0), qi(1));
        assert_eq!(bcf_bar_value([1, 0], [&o, &z]), qi(0));
        assert_eq!(bcf_bar_value([0, 0], [&o, &o]), qi(2));
        assert_eq!(bcf_tilde_value([1, 1], [&o, &o], &o), qi(0));
        assert_eq!(bcf_tilde_value([0, 0], [&o, &o], &o), qi(1));
        // (1,0) symbolic: 1 - δij + δji
        let f = bcf_bar_form([1, 0], 0, 1);
        assert_eq!(f.constant, qi(1));
        assert_eq!(f.coef(0), qi(-1));
        assert_eq!(f.coef(1), qi(1));
    }

    #[test]
    fn bcf_tilde_forms_match_closed_form() {
        let grid = [qi(0), q(1, 3), q(1, 2), qi(1)];
        for a in [[0, 0], [1, 0], [1, 1], [0, 1]] {
            for b1 in &grid {
                for b2 in &grid {
                    for d in &grid {
                        let form = bcf_tilde_form(a, 0, 1, 2);
                        let x = [b1.clone(), b2.clone(), d.clone()];
                        assert_eq!(form.eval(&x), bcf_tilde_value(a, [b1, b2], d), "code {a:?}");
                    }
                }
            }
            // at binaries tilde agrees with the inverse comparison function
            for (b1, b2) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let (b1, b2) = (qi(b1), qi(b2));
                let want = if [b1.clone(), b2.clone()] == [qi(a[0] as i64), qi(a[1] as i64)] { qi(0) } else { qi(1) };
                assert_eq!(bcf_tilde_value(a, [&b1, &b2], &(&b1 * &b2)), want);
            }
        }
    }

    #[test]
    fn su_lb_coefficient_on_counterexample() {
        let m = build_su(&counterexample(), Selection::All, FormulationOptions::default());
        let r = &m.rows()[m.row_by_tag(&RowTag::Lb { k: 1, l: 2, s: Dir::X }).unwrap()];
        let d = m.idx(&Var::Unary { k: 1, l: 2, s: Dir::X });
        assert_eq!(r.coef(d), qi(-2));
        assert_eq!(r.rhs, qi(1));
    }

    #[test]
    fn counterexample_sbl_rows_in_ge_form() {
        let m = build_sbl(&counterexample(), Selection::All, FormulationOptions::default());
        let tags = [
            RowTag::Lb { k: 1, l: 2, s: Dir::X },
            RowTag::Lb { k: 1, l: 2, s: Dir::Y },
            RowTag::Ub { k: 1, l: 2, s: Dir::X },
            RowTag::Ub { k: 1, l: 2, s: Dir::Y },
            RowTag::Prec { k: 1, l: 2, s: Dir::X },
            RowTag::Prec { k: 1, l: 2, s: Dir::Y },
        ];
        let want: [[i64; 7]; 6] = [
            [0, 1, 0, 0, 2, 2, 3],
            [0, 0, 0, 1, -2, 2, 1],
            [-1, 0, 0, 0, 2, 2, -7],
            [0, 0, -1, 0, -2, 2, -9],
            [-1, 1, 0, 0, 10, 10, 2],
            [0, 0, -1, 1, -10, 10, -8],
        ];
        for (tag, w) in tags.iter().zip(want) {
            let r = m.rows()[m.row_by_tag(tag).unwrap()].to_ge();
            let mut got: Vec<Rational> = r.dense(6);
            got.push(r.rhs.clone());
            assert_eq!(got, w.iter().map(|&v| qi(v)).collect::<Vec<_>>(), "{tag}");
        }
    }

    #[test]
    fn sequence_pair_counts_and_errors() {
        let o = |id| ObjectSpec::new(id, qi(2), qi(2), Clearance::zero());
        let inst = Instance::new(Region { w: qi(20), h: qi(20) }, vec![o(1), o(2), o(3)]).unwrap();
        let p = derive_parameters(&inst);
        let mut sb = build_sbl(&p, Selection::All, FormulationOptions::default());
        assert_eq!(add_sequence_pair(&mut sb, FormulationKind::SBL).unwrap(), 4);
        let mut su = build_su(&p, Selection::All, FormulationOptions::default());
        assert_eq!(add_sequence_pair(&mut su, FormulationKind::SU).unwrap(), 12);
        let mut pair = build_sbl(&counterexample(), Selection::All, FormulationOptions::default());
        assert_eq!(add_sequence_pair(&mut pair, FormulationKind::SBL), Err(FormulationError::NotApplicable(2)));
    }

    #[test]
    fn cyclic_triple_violates_first_chain() {
        let o = |id| ObjectSpec::new(id, qi(2), qi(2), Clearance::zero());
        let inst = Instance::new(Region { w: qi(20), h: qi(20) }, vec![o(1), o(2), o(3)]).unwrap();
        let opts = FormulationOptions { sequence_pair: true, ..Default::default() };
        let m = build_sbl(&derive_parameters(&inst), Selection::All, opts);
        // objects i=1, j=2, k=3
        let mut x = vec![Rational::zero(); m.num_vars()];
        let set = |x: &mut Vec<Rational>, k, l, v| x[m.idx(&Var::Binary { k, l })] = qi(v);
        set(&mut x, 1, 2, 0);
        set(&mut x, 2, 1, 0);
        set(&mut x, 2, 3, 0);
        set(&mut x, 3, 2, 1);
        set(&mut x, 1, 3, 1);
        set(&mut x, 3, 1, 1);
        let violated: Vec<String> =
            m.rows().iter().filter(|r| matches!(r.tag, RowTag::SeqBinary { .. }) && !r.is_satisfied(&x)).map(|r| r.tag.to_string()).collect();
        assert_eq!(violated, vec!["spb_1_2_3_0_lo".to_string()]);
        // the alternative k before j along x fixes it
        set(&mut x, 2, 3, 1);
        assert!(m.rows().iter().filter(|r| matches!(r.tag, RowTag::SeqBinary { .. })).all(|r| r.is_satisfied(&x)));
    }

    #[test]
    fn priorities_symmetry_and_area_dominance() {
        let o = |id, d| ObjectSpec::new(id, qi(d), qi(d), Clearance::zero());
        let inst = Instance::new(Region { w: qi(40), h: qi(40) }, vec![o(1, 2), o(2, 2), o(3, 5), o(4, 5)]).unwrap();
        for kind in [FormulationKind::SU, FormulationKind::SBL] {
            let p = branching_priorities(&inst, kind);
            let vals: Vec<&Rational> = p
                .iter()
                .filter(|(v, _)| matches!(v, Var::Unary { k: 1, l: 2, .. } | Var::Binary { k: 1, l: 2 } | Var::Unary { k: 2, l: 1, .. } | Var::Binary { k: 2, l: 1 }))
                .map(|(_, v)| v)
                .collect();
            assert!(vals.windows(2).all(|w| w[0] == w[1]));
            let small = kind_key(kind, 1, 2);
            let large = kind_key(kind, 3, 4);
            assert!(p[&large] > p[&small]);
        }
    }

    fn kind_key(kind: FormulationKind, k: usize, l: usize) -> Var {
        if kind.is_unary() {
            Var::Unary { k, l, s: Dir::X }
        } else {
            Var::Binary { k, l }
        }
    }

    #[test]
    fn static_bounds_replace_dynamic_rows() {
        let opts = FormulationOptions { static_bounds: true, ..Default::default() };
        for kind in FormulationKind::ALL {
            let m = build(kind, &counterexample(), Selection::All, opts);
            assert_eq!(m.family_counts().bounds, 0);
            let c = &m.vars()[m.idx(&Var::C { i: 2, s: Dir::Y })];
            assert_eq!((c.lower.clone(), c.upper.clone()), (Some(qi(1)), Some(qi(9))));
        }
    }
}
