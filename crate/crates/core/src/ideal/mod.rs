//! Idealness checks for pairwise relaxations: vertex enumeration, the
//! penalty function, dependence covers, the IOM program and campaigns.

pub mod campaign;
pub mod covers;
mod dd;
pub mod iom;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::formulations::{build, Selection};
use crate::matrix::RatMatrix;
use crate::model::{FormulationKind, FormulationOptions, LinExpr, LinearRow, MblpModel, RowTag, Sense, Side, Var};
use crate::packing::{DerivedParams, Dir};
use crate::rational::Rational;

pub use campaign::{parametric_campaign, sample_params, window_consistent, CampaignConfig, CampaignReport, CampaignWitness, SampledParams};
pub use covers::{find_circuit, flatten, known_covers, separate_circuit, verify_cover, Circuit, Cover, CoverFamily, MinimalWhen, SeparationMode, SideQuantity};
pub use iom::{build_iom, row_slacks, solve_iom, BigM, IomOptions, IomOutcome};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IdealError {
    #[error("{dim} variables exceed the enumeration cap of {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("value {0} of a relaxed binary lies outside [0, 1]")]
    OutOfRange(Rational),
    #[error("no dependence covers are defined for {0}")]
    Unsupported(FormulationKind),
    #[error("row set has full rank; nothing to separate")]
    NotDeficient,
    #[error("rows are linearly independent")]
    NotDependent,
    #[error("unknown row {0}")]
    UnknownRow(String),
    #[error("IOM program is infeasible; a big-M value is too small")]
    IomInfeasible,
}

/// The continuous relaxation of a model: inequality rows (model rows, then
/// variable bounds as explicit rows) and equality rows kept apart.
#[derive(Debug, Clone, Serialize)]
pub struct RelaxationPolytope {
    pub kind: Option<FormulationKind>,
    pub vars: Vec<Var>,
    /// Indices of the relaxed binaries.
    pub binaries: Vec<usize>,
    pub rows: Vec<LinearRow>,
    pub equalities: Vec<LinearRow>,
}

/// Continuous relaxation of `model`. Binary upper bounds are omitted when
/// the model's logic rows already imply them.
pub fn relax(model: &MblpModel) -> RelaxationPolytope {
    let mut rows = Vec::new();
    let mut equalities = Vec::new();
    for r in model.rows() {
        if r.sense == Sense::Eq {
            equalities.push(r.clone());
        } else {
            rows.push(r.clone());
        }
    }
    for (j, v) in model.vars().iter().enumerate() {
        let (lo, hi) = if v.is_binary() {
            let up = (!model.meta.binary_upper_implied).then(Rational::one);
            (Some(Rational::zero()), up)
        } else {
            (v.lower.clone(), v.upper.clone())
        };
        if let Some(l) = lo {
            rows.push(bound_row(j, &v.var, Side::Lower, l));
        }
        if let Some(u) = hi {
            rows.push(bound_row(j, &v.var, Side::Upper, u));
        }
    }
    RelaxationPolytope {
        kind: model.meta.formulation,
        vars: model.vars().iter().map(|v| v.var.clone()).collect(),
        binaries: model.binary_indices(),
        rows,
        equalities,
    }
}

fn bound_row(j: usize, var: &Var, side: Side, value: Rational) -> LinearRow {
    let sense = if side == Side::Lower { Sense::Ge } else { Sense::Le };
    LinearRow::from_exprs(LinExpr::var(j), sense, LinExpr::constant(value), RowTag::Bound { var: var.clone(), side })
}

impl RelaxationPolytope {
    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn row_index(&self, tag: &RowTag) -> Option<usize> {
        self.rows.iter().position(|r| &r.tag == tag)
    }

    /// Row `i` as `(a, b)` with `a·x >= b`.
    pub fn ge_row(&self, i: usize) -> (Vec<Rational>, Rational) {
        let r = self.rows[i].to_ge();
        (r.dense(self.dim()), r.rhs)
    }

    /// Rows of `(A'|b')` in `>=` orientation.
    pub fn ge_matrix(&self) -> Vec<(Vec<Rational>, Rational)> {
        (0..self.rows.len()).map(|i| self.ge_row(i)).collect()
    }

    pub fn eq_matrix(&self) -> Vec<(Vec<Rational>, Rational)> {
        self.equalities.iter().map(|r| (r.dense(self.dim()), r.rhs.clone())).collect()
    }

    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        self.rows.iter().chain(&self.equalities).all(|r| r.is_satisfied(x))
    }

    pub fn tight_set(&self, x: &[Rational]) -> Vec<usize> {
        (0..self.rows.len()).filter(|&i| self.rows[i].is_tight(x)).collect()
    }

    /// Rank of the tight rows (with equalities) at `x`.
    pub fn tight_rank(&self, tight: &[usize]) -> usize {
        let mut m: Vec<Vec<Rational>> = tight.iter().map(|&i| self.rows[i].dense(self.dim())).collect();
        m.extend(self.equalities.iter().map(|r| r.dense(self.dim())));
        if m.is_empty() {
            return 0;
        }
        RatMatrix::from_rows(m).expect("rectangular").rank()
    }

    pub fn equality_rank(&self) -> usize {
        if self.equalities.is_empty() {
            return 0;
        }
        RatMatrix::from_rows(self.equalities.iter().map(|r| r.dense(self.dim())).collect()).expect("rectangular").rank()
    }

    pub fn tags(&self, idx: &[usize]) -> Vec<String> {
        idx.iter().map(|&i| self.rows[i].tag.to_string()).collect()
    }
}

/// `Σ (1 - |2y - 1|)` over the given entries.
pub fn penalty(point: &[Rational], binaries: &[usize]) -> Result<Rational, IdealError> {
    let one = Rational::one();
    let two = Rational::from(2i64);
    binaries.iter().try_fold(Rational::zero(), |acc, &j| {
        let y = &point[j];
        if y.is_negative() || y > &one {
            return Err(IdealError::OutOfRange(y.clone()));
        }
        Ok(acc + &one - (&two * y - &one).abs())
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtremePoint {
    pub point: Vec<Rational>,
    /// Tight inequality rows; equalities are always tight.
    pub tight: Vec<usize>,
    pub penalty: Rational,
    /// More rows are tight than the dimension requires.
    pub degenerate: bool,
}

impl ExtremePoint {
    pub fn is_fractional(&self) -> bool {
        self.penalty.is_positive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnumMethod {
    /// Double description on the homogenised cone.
    #[default]
    DoubleDescription,
    /// Every full-rank row subset of the right size, solved and filtered.
    SubsetSearch,
}

pub const DEFAULT_ENUM_CAP: usize = 12;

/// Every vertex of `poly`, sorted by point.
pub fn enumerate_extreme_points(
    poly: &RelaxationPolytope,
    method: EnumMethod,
    cap: usize,
) -> Result<Vec<ExtremePoint>, IdealError> {
    let n = poly.dim();
    if n > cap {
        return Err(IdealError::TooLarge { dim: n, cap });
    }
    let points = match method {
        EnumMethod::DoubleDescription => dd::vertices(poly).unwrap_or_else(|| subset_points(poly)),
        EnumMethod::SubsetSearch => subset_points(poly),
    };
    let need = n - poly.equality_rank();
    let mut out: Vec<ExtremePoint> = points
        .into_iter()
        .map(|point| {
            let tight = poly.tight_set(&point);
            debug_assert_eq!(poly.tight_rank(&tight), n);
            let penalty = penalty(&point, &poly.binaries).expect("relaxed binaries stay in [0, 1]");
            ExtremePoint { degenerate: tight.len() > need, point, tight, penalty }
        })
        .collect();
    out.sort_by(|a, b| a.point.cmp(&b.point));
    Ok(out)
}

/// Reference enumeration: depth-first over row subsets in index order,
/// pruning rows that are dependent on those already chosen.
fn subset_points(poly: &RelaxationPolytope) -> Vec<Vec<Rational>> {
    let n = poly.dim();
    let rows = poly.ge_matrix();
    let mut echelon: Vec<(usize, Vec<Rational>)> = Vec::new();
    for (a, b) in poly.eq_matrix() {
        let mut r = a;
        r.push(b);
        if let Some(e) = reduce(&echelon, r, n) {
            echelon.push(e);
        }
    }
    let need = n - echelon.len();
    let mut found = BTreeMap::new();
    dfs(poly, &rows, 0, need, echelon, &mut found);
    found.into_keys().collect()
}

/// Reduce augmented row `r` against `echelon`; `None` if its `A` part vanishes.
fn reduce(echelon: &[(usize, Vec<Rational>)], mut r: Vec<Rational>, n: usize) -> Option<(usize, Vec<Rational>)> {
    for (p, e) in echelon {
        if r[*p].is_zero() {
            continue;
        }
        let f = &r[*p] / &e[*p];
        for (x, y) in r.iter_mut().zip(e) {
            *x -= &f * y;
        }
    }
    let p = (0..n).find(|&j| !r[j].is_zero())?;
    Some((p, r))
}

fn dfs(
    poly: &RelaxationPolytope,
    rows: &[(Vec<Rational>, Rational)],
    start: usize,
    need: usize,
    echelon: Vec<(usize, Vec<Rational>)>,
    found: &mut BTreeMap<Vec<Rational>, ()>,
) {
    let n = poly.dim();
    if need == 0 {
        let x = back_substitute(&echelon, n);
        if poly.is_feasible(&x) {
            found.insert(x, ());
        }
        return;
    }
    for i in start..rows.len() {
        if rows.len() - i < need {
            break;
        }
        let mut r = rows[i].0.clone();
        r.push(rows[i].1.clone());
        if let Some(e) = reduce(&echelon, r, n) {
            let mut next = echelon.clone();
            next.push(e);
            dfs(poly, rows, i + 1, need - 1, next, found);
        }
    }
}

fn back_substitute(echelon: &[(usize, Vec<Rational>)], n: usize) -> Vec<Rational> {
    // rows were reduced only against earlier rows: solve from the last
    let mut x = vec![Rational::zero(); n];
    let mut order: Vec<&(usize, Vec<Rational>)> = echelon.iter().collect();
    order.reverse();
    let mut known = vec![false; n];
    for (p, e) in order {
        let mut rhs = e[n].clone();
        for j in 0..n {
            if j != *p && !e[j].is_zero() {
                debug_assert!(known[j]);
                rhs -= &e[j] * &x[j];
            }
        }
        x[*p] = rhs / &e[*p];
        known[*p] = true;
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Ideal,
    FractionalVertexFound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Enumeration,
    Iom,
}

/// Window and margin values of a two-object parameter set, as strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairParams {
    pub lb: BTreeMap<String, Rational>,
    pub ub: BTreeMap<String, Rational>,
    pub pm: BTreeMap<String, Rational>,
}

impl PairParams {
    pub fn from_params(p: &DerivedParams) -> PairParams {
        let mut out = PairParams { lb: BTreeMap::new(), ub: BTreeMap::new(), pm: BTreeMap::new() };
        for i in 1..=p.len() {
            for s in Dir::BOTH {
                out.lb.insert(format!("{i}{s}"), p.lb(i, s).clone());
                out.ub.insert(format!("{i}{s}"), p.ub(i, s).clone());
                for l in 1..=p.len() {
                    if l != i {
                        out.pm.insert(format!("{i}{l}{s}"), p.pm(i, l, s).clone());
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdealnessReport {
    pub formulation: FormulationKind,
    pub verdict: Verdict,
    pub method: Method,
    pub witness: Option<ExtremePoint>,
    pub witness_tight_rows: Vec<String>,
    pub variables: Vec<String>,
    pub vertex_count: usize,
    pub degenerate_vertices: usize,
    pub max_penalty: Rational,
    pub params: PairParams,
}

/// Enumerate the pairwise relaxation of `kind` at `params` and look for a
/// fractional vertex. The witness is the fractional vertex of largest
/// penalty, ties broken towards more tight rows, then the lexicographically
/// largest point.
pub fn check_pairwise_ideal(
    kind: FormulationKind,
    params: &DerivedParams,
    opts: FormulationOptions,
    method: EnumMethod,
) -> Result<IdealnessReport, IdealError> {
    let model = build(kind, params, Selection::All, opts);
    let poly = relax(&model);
    let verts = enumerate_extreme_points(&poly, method, DEFAULT_ENUM_CAP)?;
    let witness = verts
        .iter()
        .filter(|v| v.is_fractional())
        .max_by(|a, b| a.penalty.cmp(&b.penalty).then(a.tight.len().cmp(&b.tight.len())).then(a.point.cmp(&b.point)))
        .cloned();
    let max_penalty = verts.iter().map(|v| v.penalty.clone()).max().unwrap_or_default();
    Ok(IdealnessReport {
        formulation: kind,
        verdict: if witness.is_some() { Verdict::FractionalVertexFound } else { Verdict::Ideal },
        method: Method::Enumeration,
        witness_tight_rows: witness.as_ref().map(|w| poly.tags(&w.tight)).unwrap_or_default(),
        witness,
        variables: poly.vars.iter().map(|v| v.to_string()).collect(),
        vertex_count: verts.len(),
        degenerate_vertices: verts.iter().filter(|v| v.degenerate).count(),
        max_penalty,
        params: PairParams::from_params(params),
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::model::{ModelMeta, VariableDescriptor};
    use crate::packing::{derive_parameters, Clearance, Instance, ObjectSpec, Region};
    use crate::rational::{q, qi};

    pub(crate) fn counterexample() -> DerivedParams {
        let o = |id| ObjectSpec::new(id, qi(2), qi(2), Clearance::zero());
        derive_parameters(&Instance::new(Region { w: qi(10), h: qi(10) }, vec![o(1), o(2)]).unwrap())
    }

    fn poly(kind: FormulationKind) -> RelaxationPolytope {
        relax(&build(kind, &counterexample(), Selection::All, FormulationOptions::default()))
    }

    #[test]
    fn relaxation_row_counts() {
        let su = poly(FormulationKind::SU);
        assert_eq!((su.rows.len(), su.equalities.len(), su.dim()), (16, 1, 8));
        let ru = poly(FormulationKind::RU);
        assert_eq!((ru.rows.len(), ru.equalities.len(), ru.dim()), (19, 0, 8));
        let sbm = poly(FormulationKind::SBM);
        assert_eq!((sbm.rows.len(), sbm.equalities.len(), sbm.dim()), (20, 0, 7));
        let sbl = poly(FormulationKind::SBL);
        assert_eq!((sbl.rows.len(), sbl.dim()), (24, 6));
    }

    #[test]
    fn penalty_examples() {
        let v = |xs: &[Rational]| xs.to_vec();
        assert_eq!(penalty(&v(&[qi(0), qi(1), qi(0), qi(1)]), &[0, 1, 2, 3]), Ok(qi(0)));
        assert_eq!(penalty(&v(&[q(1, 2), q(1, 2)]), &[0, 1]), Ok(qi(2)));
        assert_eq!(penalty(&v(&[q(1, 4)]), &[0]), Ok(q(1, 2)));
        assert!(penalty(&v(&[q(3, 2)]), &[0]).is_err());
    }

    #[test]
    fn unit_box_has_four_vertices() {
        let mut m = MblpModel::new(ModelMeta {
            name: "box".into(),
            formulation: None,
            options: Default::default(),
            binary_upper_implied: false,
        });
        for name in ["a", "b"] {
            m.add_var(VariableDescriptor::continuous(Var::Named(name.into()), Some(qi(0)), Some(qi(1))));
        }
        let p = relax(&m);
        for method in [EnumMethod::DoubleDescription, EnumMethod::SubsetSearch] {
            let v = enumerate_extreme_points(&p, method, DEFAULT_ENUM_CAP).unwrap();
            assert_eq!(v.len(), 4);
        }
    }

    #[test]
    fn counterexample_vertex_is_found() {
        let p = poly(FormulationKind::SBL);
        let want: Vec<Rational> = vec![qi(9), qi(1), qi(9), qi(1), q(1, 2), q(1, 2)];
        for method in [EnumMethod::DoubleDescription, EnumMethod::SubsetSearch] {
            let v = enumerate_extreme_points(&p, method, DEFAULT_ENUM_CAP).unwrap();
            let hit = v.iter().find(|e| e.point == want).expect("witness vertex");
            assert_eq!(hit.penalty, qi(2));
            assert_eq!(p.tight_rank(&hit.tight), 6);
        }
    }

    #[test]
    fn methods_agree_on_counterexample() {
        for kind in FormulationKind::ALL {
            let p = poly(kind);
            let a = enumerate_extreme_points(&p, EnumMethod::DoubleDescription, DEFAULT_ENUM_CAP).unwrap();
            let b = enumerate_extreme_points(&p, EnumMethod::SubsetSearch, DEFAULT_ENUM_CAP).unwrap();
            assert_eq!(a, b, "{kind}");
        }
    }

    #[test]
    fn verdicts_on_counterexample() {
        let p = counterexample();
        let check = |k| check_pairwise_ideal(k, &p, FormulationOptions::default(), EnumMethod::default()).unwrap();
        assert_eq!(check(FormulationKind::SU).verdict, Verdict::Ideal);
        assert_eq!(check(FormulationKind::RU).verdict, Verdict::Ideal);
        assert_eq!(check(FormulationKind::SBM).verdict, Verdict::Ideal);
        let sbl = check(FormulationKind::SBL);
        assert_eq!(sbl.verdict, Verdict::FractionalVertexFound);
        assert_eq!(sbl.max_penalty, qi(2));
    }

    #[test]
    fn cap_is_enforced() {
        let p = poly(FormulationKind::SU);
        assert_eq!(
            enumerate_extreme_points(&p, EnumMethod::default(), 4),
            Err(IdealError::TooLarge { dim: 8, cap: 4 })
        );
    }
}
