//! Dependence covers: row sets of a relaxation that can never be part of
//! a vertex basis, with exact certificates and a circuit separator.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{IdealError, RelaxationPolytope};
use crate::bnb::{solve_milp, BnbStatus, SolveOptions};
use crate::matrix::RatMatrix;
use crate::model::{
    FormulationKind, LinExpr, MblpModel, ModelMeta, ObjSense, RowTag, Sense, Side, Var, VariableDescriptor,
};
use crate::packing::{DerivedParams, Dir};
use crate::rational::Rational;

/// A parameter expression that must not vanish for a cover to be minimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SideQuantity {
    /// `LB_ks + PM_kls - UB_ls`.
    Margin { k: usize, l: usize, s: Dir },
    /// `PM_kls + LB_ks - LB_ls`.
    LowerShift { k: usize, l: usize, s: Dir },
    /// `PM_kls + UB_ks - UB_ls`.
    UpperShift { k: usize, l: usize, s: Dir },
}

impl SideQuantity {
    pub fn eval(&self, p: &DerivedParams) -> Rational {
        match *self {
            SideQuantity::Margin { k, l, s } => p.margin_gap(k, l, s),
            SideQuantity::LowerShift { k, l, s } => p.pm(k, l, s) + p.lb(k, s) - p.lb(l, s),
            SideQuantity::UpperShift { k, l, s } => p.pm(k, l, s) + p.ub(k, s) - p.ub(l, s),
        }
    }
}

impl fmt::Display for SideQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SideQuantity::Margin { k, l, s } => write!(f, "LB_{k}{s}+PM_{k}{l}{s}-UB_{l}{s}"),
            SideQuantity::LowerShift { k, l, s } => write!(f, "PM_{k}{l}{s}+LB_{k}{s}-LB_{l}{s}"),
            SideQuantity::UpperShift { k, l, s } => write!(f, "PM_{k}{l}{s}+UB_{k}{s}-UB_{l}{s}"),
        }
    }
}

/// When a cover is expected to be minimally dependent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimalWhen {
    Always,
    /// Every listed quantity is nonzero.
    Nonzero(Vec<SideQuantity>),
}

impl MinimalWhen {
    pub fn holds(&self, params: &DerivedParams) -> bool {
        match self {
            MinimalWhen::Always => true,
            MinimalWhen::Nonzero(q) => q.iter().all(|q| !q.eval(params).is_zero()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cover {
    pub family: &'static str,
    pub rows: Vec<RowTag>,
    pub minimal_when: MinimalWhen,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverFamily {
    pub kind: FormulationKind,
    pub id: &'static str,
    pub description: &'static str,
    pub covers: Vec<Cover>,
}

fn lb(k: usize, l: usize, s: Dir) -> RowTag {
    RowTag::Lb { k, l, s }
}

fn ub(k: usize, l: usize, s: Dir) -> RowTag {
    RowTag::Ub { k, l, s }
}

fn prec(k: usize, l: usize, s: Dir) -> RowTag {
    RowTag::Prec { k, l, s }
}

fn triple(k: usize, l: usize, s: Dir) -> Vec<RowTag> {
    vec![lb(k, l, s), ub(k, l, s), prec(k, l, s)]
}

fn unary_nonneg(k: usize, l: usize, s: Dir) -> RowTag {
    RowTag::Bound { var: Var::Unary { k, l, s }, side: Side::Lower }
}

fn digit(k: usize, l: usize, side: Side) -> RowTag {
    RowTag::Bound { var: Var::Binary { k, l }, side }
}

fn family(kind: FormulationKind, id: &'static str, description: &'static str, covers: Vec<Cover>) -> CoverFamily {
    CoverFamily { kind, id, description, covers }
}

fn cover(family: &'static str, rows: Vec<RowTag>, minimal_when: MinimalWhen) -> Cover {
    Cover { family, rows, minimal_when }
}

fn gaps(g: &[(usize, usize, Dir)]) -> MinimalWhen {
    MinimalWhen::Nonzero(g.iter().map(|&(k, l, s)| SideQuantity::Margin { k, l, s }).collect())
}

fn margin_and(k: usize, l: usize, s: Dir, shift: SideQuantity) -> MinimalWhen {
    MinimalWhen::Nonzero(vec![SideQuantity::Margin { k, l, s }, shift])
}

/// The known cover families of `kind` for the pair `(i, j)`. `with_optional`
/// adds families that only cut integral points and are not needed by IOM.
pub fn known_covers(kind: FormulationKind, i: usize, j: usize, with_optional: bool) -> Result<Vec<CoverFamily>, IdealError> {
    let terms = crate::packing::disjunct_order(i, j);
    let (x, y) = (Dir::X, Dir::Y);
    let out = match kind {
        FormulationKind::SU => {
            let id = "su-inactive-term";
            vec![family(
                kind,
                id,
                "window, precedence and indicator rows of one term",
                terms
                    .iter()
                    .map(|&(k, l, s)| {
                        let mut rows = triple(k, l, s);
                        rows.push(unary_nonneg(k, l, s));
                        cover(id, rows, gaps(&[(k, l, s)]))
                    })
                    .collect(),
            )]
        }
        FormulationKind::RU => {
            let mut fams = Vec::new();
            let id = "ru-disjunction";
            fams.push(family(
                kind,
                id,
                "disjunction, one tightness row and both indicators of the other axis",
                Dir::BOTH
                    .iter()
                    .map(|&s| {
                        let t = s.other();
                        cover(
                            id,
                            vec![
                                RowTag::Disj { i, j },
                                RowTag::Tight { i, j, s },
                                unary_nonneg(i, j, t),
                                unary_nonneg(j, i, t),
                            ],
                            MinimalWhen::Always,
                        )
                    })
                    .collect(),
            ));
            let per_term = |id: &'static str, f: &dyn Fn(usize, usize, Dir) -> (Vec<RowTag>, MinimalWhen)| {
                terms
                    .iter()
                    .map(|&(k, l, s)| {
                        let (rows, when) = f(k, l, s);
                        cover(id, rows, when)
                    })
                    .collect::<Vec<_>>()
            };
            fams.push(family(
                kind,
                "ru-lower-pair",
                "both lower window rows, precedence, tightness and the reverse indicator",
                per_term("ru-lower-pair", &|k, l, s| {
                    (
                        vec![lb(k, l, s), lb(l, k, s), prec(k, l, s), RowTag::Tight { i, j, s }, unary_nonneg(l, k, s)],
                        margin_and(l, k, s, SideQuantity::LowerShift { k: l, l: k, s }),
                    )
                }),
            ));
            fams.push(family(
                kind,
                "ru-window",
                "window and precedence rows of one term, tightness and its indicator",
                per_term("ru-window", &|k, l, s| {
                    let mut rows = triple(k, l, s);
                    rows.extend([RowTag::Tight { i, j, s }, unary_nonneg(k, l, s)]);
                    (rows, gaps(&[(k, l, s), (l, k, s)]))
                }),
            ));
            fams.push(family(
                kind,
                "ru-upper-pair",
                "both upper window rows, precedence, tightness and the reverse indicator",
                per_term("ru-upper-pair", &|k, l, s| {
                    (
                        vec![ub(k, l, s), ub(l, k, s), prec(k, l, s), RowTag::Tight { i, j, s }, unary_nonneg(l, k, s)],
                        margin_and(l, k, s, SideQuantity::UpperShift { k: l, l: k, s }),
                    )
                }),
            ));
            if with_optional {
                fams.push(family(
                    kind,
                    "ru-integral-window",
                    "one term with the disjunction and three indicators; only cuts integral points",
                    per_term("ru-integral-window", &|k, l, s| {
                        let t = s.other();
                        let mut rows = triple(k, l, s);
                        rows.extend([
                            RowTag::Disj { i, j },
                            unary_nonneg(k, l, t),
                            unary_nonneg(l, k, t),
                            unary_nonneg(k, l, s),
                        ]);
                        (rows, gaps(&[(k, l, s), (l, k, s)]))
                    }),
                ));
            }
            fams
        }
        FormulationKind::SBM => {
            let sum = RowTag::McCorSum { i, j };
            let link = |k, l| RowTag::McCorLink { k, l };
            let with = |k, l, s, extra: Vec<RowTag>| {
                let mut rows = triple(k, l, s);
                rows.extend(extra);
                rows
            };
            let mut fams = vec![family(
                kind,
                "sbm-mccormick",
                "McCormick sum, one link row and the opposite digit's upper bound",
                [(i, j), (j, i)]
                    .iter()
                    .map(|&(k, l)| cover("sbm-mccormick", vec![sum.clone(), link(k, l), digit(l, k, Side::Upper)], MinimalWhen::Always))
                    .collect(),
            )];
            let term_family = |id: &'static str, k, l, s, extras: Vec<Vec<RowTag>>| {
                family(
                    kind,
                    id,
                    "one term's window and precedence rows with rows forcing its code",
                    extras.into_iter().map(|e| cover(id, with(k, l, s, e), gaps(&[(k, l, s)]))).collect(),
                )
            };
            fams.push(term_family(
                "sbm-code-ijx",
                i,
                j,
                x,
                vec![
                    vec![sum.clone()],
                    vec![link(i, j), digit(j, i, Side::Upper)],
                    vec![link(j, i), digit(i, j, Side::Upper)],
                ],
            ));
            fams.push(term_family("sbm-code-ijy", i, j, y, vec![vec![link(i, j)], vec![sum.clone(), digit(j, i, Side::Upper)]]));
            fams.push(term_family(
                "sbm-code-jix",
                j,
                i,
                x,
                vec![vec![link(i, j), digit(i, j, Side::Lower)], vec![link(j, i), digit(j, i, Side::Lower)]],
            ));
            fams.push(term_family("sbm-code-jiy", j, i, y, vec![vec![link(j, i)], vec![sum.clone(), digit(i, j, Side::Upper)]]));
            let id = "sbm-two-terms";
            let two = |a: (usize, usize, Dir), b: (usize, usize, Dir), d: RowTag| {
                let mut rows = triple(a.0, a.1, a.2);
                rows.extend(triple(b.0, b.1, b.2));
                rows.push(d);
                cover(id, rows, gaps(&[a, b]))
            };
            fams.push(family(
                kind,
                id,
                "an x term and a y term whose codes sum to one digit bound",
                vec![
                    two((i, j, x), (i, j, y), digit(j, i, Side::Upper)),
                    two((i, j, x), (j, i, y), digit(i, j, Side::Upper)),
                    two((j, i, x), (i, j, y), digit(i, j, Side::Lower)),
                    two((j, i, x), (j, i, y), digit(j, i, Side::Lower)),
                ],
            ));
            fams
        }
        FormulationKind::SBL => return Err(IdealError::Unsupported(kind)),
    };
    Ok(out)
}

/// Every cover of `families`, deduplicated by row set.
pub fn flatten(families: &[CoverFamily]) -> Vec<Cover> {
    let mut out: Vec<Cover> = Vec::new();
    for c in families.iter().flat_map(|f| &f.covers) {
        let mut key = c.rows.clone();
        key.sort();
        if !out.iter().any(|o| {
            let mut k = o.rows.clone();
            k.sort();
            k == key
        }) {
            out.push(c.clone());
        }
    }
    out
}

/// A dependence among rows `(a | b)` in their native orientation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Circuit {
    pub rows: Vec<RowTag>,
    /// `Σ λ_i (a_i | b_i) = 0`, first nonzero entry normalised to 1.
    pub multipliers: Vec<Rational>,
    /// Rank `|rows| - 1` with a full-support multiplier vector.
    pub minimal: bool,
}

fn augmented(poly: &RelaxationPolytope, tag: &RowTag) -> Result<Vec<Rational>, IdealError> {
    let r = poly
        .rows
        .iter()
        .chain(&poly.equalities)
        .find(|r| &r.tag == tag)
        .ok_or_else(|| IdealError::UnknownRow(tag.to_string()))?;
    let mut v = r.dense(poly.dim());
    v.push(r.rhs.clone());
    Ok(v)
}

/// Check that `rows` are linearly dependent once tight and certify it with
/// exact multipliers.
pub fn verify_cover(poly: &RelaxationPolytope, rows: &[RowTag]) -> Result<Circuit, IdealError> {
    let dense = rows.iter().map(|t| augmented(poly, t)).collect::<Result<Vec<_>, _>>()?;
    let m = RatMatrix::from_rows(dense).expect("rectangular");
    let basis = m.left_nullspace();
    let multipliers = basis.first().cloned().ok_or(IdealError::NotDependent)?;
    let minimal = basis.len() == 1 && multipliers.iter().all(|v| !v.is_zero());
    Ok(Circuit { rows: rows.to_vec(), multipliers, minimal })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationMode {
    /// Exact search over subsets of increasing size.
    #[default]
    SubsetSearch,
    /// Smallest support dependence from a big-M MILP, re-verified exactly.
    Milp { big_m: i64 },
}

/// Subset search is exhaustive up to this many rows; larger sets are
/// shrunk by deletion first.
pub const SUBSET_SEARCH_CAP: usize = 12;

fn dependent(rows: &[&Vec<Rational>]) -> bool {
    !rows.is_empty() && RatMatrix::from_rows(rows.iter().map(|r| (*r).clone()).collect()).expect("rectangular").rank() < rows.len()
}

fn pick<'a>(rows: &'a [Vec<Rational>], idx: &[usize]) -> Vec<&'a Vec<Rational>> {
    idx.iter().map(|&k| &rows[k]).collect()
}

/// Drop rows while the rest stays dependent; the result is a circuit.
fn shrink(rows: &[Vec<Rational>], mut keep: Vec<usize>) -> Vec<usize> {
    let mut p = 0;
    while p < keep.len() {
        let trial: Vec<usize> = keep.iter().copied().filter(|&k| k != keep[p]).collect();
        if dependent(&pick(rows, &trial)) {
            keep = trial;
        } else {
            p += 1;
        }
    }
    keep
}

/// First dependent subset of smallest size, in lexicographic order.
fn smallest_dependent(rows: &[Vec<Rational>], within: &[usize]) -> Option<Vec<usize>> {
    fn go(rows: &[Vec<Rational>], within: &[usize], start: usize, size: usize, cur: &mut Vec<usize>) -> bool {
        if cur.len() == size {
            return dependent(&pick(rows, cur));
        }
        for p in start..within.len() {
            if within.len() - p < size - cur.len() {
                break;
            }
            cur.push(within[p]);
            // independent prefixes only: a dependent prefix would have been found earlier
            if dependent(&pick(rows, cur)) && cur.len() < size {
                cur.pop();
                continue;
            }
            if go(rows, within, p + 1, size, cur) {
                return true;
            }
            cur.pop();
        }
        false
    }
    (1..=within.len()).find_map(|size| {
        let mut cur = Vec::new();
        go(rows, within, 0, size, &mut cur).then_some(cur)
    })
}

/// Indices of a minimal dependent subset of the augmented rows `(a | b)`.
pub fn find_circuit(rows: &[Vec<Rational>], mode: SeparationMode) -> Result<Vec<usize>, IdealError> {
    let all: Vec<usize> = (0..rows.len()).collect();
    if !dependent(&pick(rows, &all)) {
        return Err(IdealError::NotDeficient);
    }
    let exact = |within: Vec<usize>| {
        let within = if within.len() > SUBSET_SEARCH_CAP { shrink(rows, within) } else { within };
        smallest_dependent(rows, &within).expect("dependent input has a circuit")
    };
    Ok(match mode {
        SeparationMode::SubsetSearch => exact(all),
        SeparationMode::Milp { big_m } => match separation_milp(rows, big_m) {
            Some(support) if dependent(&pick(rows, &support)) => shrink(rows, support),
            _ => exact(all),
        },
    })
}

/// A circuit among the rows `rows` of `poly` (inequalities or equalities).
pub fn separate_circuit(poly: &RelaxationPolytope, rows: &[RowTag], mode: SeparationMode) -> Result<Circuit, IdealError> {
    let dense = rows.iter().map(|t| augmented(poly, t)).collect::<Result<Vec<_>, _>>()?;
    let keep = find_circuit(&dense, mode)?;
    let tags: Vec<RowTag> = keep.iter().map(|&k| rows[k].clone()).collect();
    verify_cover(poly, &tags)
}

/// Solve `min Σ (μ + ν)` over `(A|b)ᵀ p = 0` with every `p_i` either zero
/// or in `[1, M]` (`μ_i = 1`) or `[-M, -1]` (`ν_i = 1`), and at least one
/// nonzero. Returns the support of `p`.
fn separation_milp(rows: &[Vec<Rational>], big_m: i64) -> Option<Vec<usize>> {
    let t = rows.len();
    let cols = rows[0].len();
    let mut m = MblpModel::new(ModelMeta { name: "separation".into(), ..Default::default() });
    let bm = Rational::from(big_m);
    let p: Vec<usize> = (0..t)
        .map(|k| m.add_var(VariableDescriptor::continuous(Var::P(k), Some(-&bm), Some(bm.clone()))))
        .collect();
    let mu: Vec<usize> = (0..t).map(|k| m.add_var(VariableDescriptor::binary(Var::Mu(k)))).collect();
    let nu: Vec<usize> = (0..t).map(|k| m.add_var(VariableDescriptor::binary(Var::Nu(k)))).collect();
    let one = Rational::one();
    let m1 = &bm + &one;
    for c in 0..cols {
        let mut e = LinExpr::zero();
        for k in 0..t {
            if !rows[k][c].is_zero() {
                e.add_term(p[k], rows[k][c].clone());
            }
        }
        m.add_constraint(e, Sense::Eq, LinExpr::zero(), RowTag::Named(format!("null_{c}")));
    }
    for k in 0..t {
        // p >= 1 - (M+1)(1 - μ)  and  p <= M μ
        m.add_constraint(
            LinExpr::var(p[k]) - LinExpr::term(mu[k], m1.clone()),
            Sense::Ge,
            LinExpr::constant(-&bm),
            RowTag::Named(format!("pos_lo_{k}")),
        );
        m.add_constraint(LinExpr::var(p[k]) - LinExpr::term(mu[k], bm.clone()), Sense::Le, LinExpr::zero(), RowTag::Named(format!("pos_hi_{k}")));
        // p >= -M ν  and  p <= (M+1)(1 - ν) - 1
        m.add_constraint(LinExpr::var(p[k]) + LinExpr::term(nu[k], bm.clone()), Sense::Ge, LinExpr::zero(), RowTag::Named(format!("neg_lo_{k}")));
        m.add_constraint(
            LinExpr::var(p[k]) + LinExpr::term(nu[k], m1.clone()),
            Sense::Le,
            LinExpr::constant(bm.clone()),
            RowTag::Named(format!("neg_hi_{k}")),
        );
    }
    let mut total = LinExpr::zero();
    for k in 0..t {
        total.add_term(mu[k], one.clone());
        total.add_term(nu[k], one.clone());
    }
    m.add_constraint(total.clone(), Sense::Ge, LinExpr::constant(one), RowTag::Named("nonzero".into()));
    m.set_objective(ObjSense::Minimize, total);
    let res = solve_milp(&m, &SolveOptions::default());
    if res.status != BnbStatus::Optimal {
        return None;
    }
    let x = res.incumbent?.point;
    Some((0..t).filter(|&k| !x[p[k]].is_zero()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulations::{build, Selection};
    use crate::ideal::relax;
    use crate::ideal::tests::counterexample;
    use crate::model::FormulationOptions;
    use crate::rational::{q, qi};

    fn poly(kind: FormulationKind) -> RelaxationPolytope {
        relax(&build(kind, &counterexample(), Selection::All, FormulationOptions::default()))
    }

    #[test]
    fn family_sizes() {
        let n = |k, opt| flatten(&known_covers(k, 1, 2, opt).unwrap()).len();
        assert_eq!(n(FormulationKind::SU, false), 4);
        assert_eq!(n(FormulationKind::RU, false), 2 + 12);
        assert_eq!(n(FormulationKind::RU, true), 2 + 16);
        assert_eq!(n(FormulationKind::SBM, false), 2 + 3 + 2 + 2 + 2 + 4);
        assert_eq!(known_covers(FormulationKind::SBL, 1, 2, false), Err(IdealError::Unsupported(FormulationKind::SBL)));
    }

    #[test]
    fn su_multipliers_at_counterexample() {
        let p = poly(FormulationKind::SU);
        let c = verify_cover(&p, &known_covers(FormulationKind::SU, 1, 2, false).unwrap()[0].covers[0].rows).unwrap();
        assert_eq!(c.multipliers, vec![qi(1), qi(-1), qi(1), qi(-6)]);
        assert!(c.minimal);
    }

    #[test]
    fn every_cover_is_dependent_at_counterexample() {
        for kind in [FormulationKind::SU, FormulationKind::RU, FormulationKind::SBM] {
            let p = poly(kind);
            for c in flatten(&known_covers(kind, 1, 2, true).unwrap()) {
                let cert = verify_cover(&p, &c.rows).unwrap_or_else(|e| panic!("{kind} {:?}: {e}", c.rows));
                assert_eq!(cert.minimal, c.minimal_when.holds(&counterexample()), "{kind} {:?}", c.rows);
            }
        }
    }

    #[test]
    fn separation_modes_find_a_circuit() {
        let p = poly(FormulationKind::SU);
        let mut rows = known_covers(FormulationKind::SU, 1, 2, false).unwrap()[0].covers[0].rows.clone();
        rows.push(RowTag::Lb { k: 2, l: 1, s: Dir::Y });
        for mode in [SeparationMode::SubsetSearch, SeparationMode::Milp { big_m: 1000 }] {
            let c = separate_circuit(&p, &rows, mode).unwrap();
            assert!(c.minimal);
            assert_eq!(c.rows.len(), 4);
        }
        let single = vec![RowTag::Lb { k: 1, l: 2, s: Dir::X }];
        assert_eq!(separate_circuit(&p, &single, SeparationMode::SubsetSearch), Err(IdealError::NotDeficient));
    }

    #[test]
    fn small_circuit_by_hand() {
        let rows = vec![vec![qi(1), qi(0), qi(1)], vec![qi(2), qi(0), qi(2)], vec![qi(0), qi(1), qi(0)]];
        for mode in [SeparationMode::SubsetSearch, SeparationMode::Milp { big_m: 1000 }] {
            assert_eq!(find_circuit(&rows, mode), Ok(vec![0, 1]));
        }
        let p = RatMatrix::from_rows(rows[..2].to_vec()).unwrap().nullspace_vector().unwrap();
        assert_eq!(p, vec![qi(1), q(-1, 2)]);
        assert_eq!(find_circuit(&rows[1..], SeparationMode::SubsetSearch), Err(IdealError::NotDeficient));
    }
}
