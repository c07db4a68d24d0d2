//! The IOM program: pick a point of the relaxation together with a set of
//! tight rows that could form a vertex basis, and maximise the penalty.
//! A zero optimum proves the relaxation has no fractional vertex.

use serde::{Deserialize, Serialize};

use super::covers::{separate_circuit, Circuit, Cover, SeparationMode};
use super::{penalty, IdealError, RelaxationPolytope};
use crate::bnb::{solve_milp, BnbStatus, SolveOptions};
use crate::lp::{solve_lp, LpStatus};
use crate::model::{LinExpr, LinearRow, MblpModel, ModelMeta, ObjSense, RowTag, Sense, Var, VariableDescriptor};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BigM {
    /// Largest slack of each row over the relaxation, from an exact LP.
    PerRowLp,
    /// One value for every row. Invalid when a row's slack exceeds it.
    Uniform(Rational),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IomOptions {
    pub big_m: BigM,
    pub separation: SeparationMode,
    /// Cap on separation rounds.
    pub max_rounds: usize,
}

impl Default for IomOptions {
    fn default() -> Self {
        IomOptions { big_m: BigM::PerRowLp, separation: SeparationMode::default(), max_rounds: 200 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IomOutcome {
    /// Largest penalty of a vertex of the relaxation.
    pub value: Rational,
    pub point: Vec<Rational>,
    pub tight_rows: Vec<String>,
    pub rounds: usize,
    /// The chosen rows have full rank, so `point` is a vertex and `value`
    /// is exact. False only when the round cap was hit.
    pub basis: bool,
    pub cover_rows: usize,
    pub separated: Vec<Circuit>,
    pub big_m: Vec<Rational>,
    /// Rows whose largest slack exceeds the big-M in use.
    pub invalid_big_m: Vec<String>,
    /// Worst-case big-M for an integral system of this size.
    pub theoretical_big_m: String,
    pub nodes: usize,
}

/// Largest slack `|a·z - b|` of each inequality row over `poly`.
pub fn row_slacks(poly: &RelaxationPolytope) -> Vec<Rational> {
    let mut base = MblpModel::new(ModelMeta { name: "slack".into(), ..Default::default() });
    for v in &poly.vars {
        base.add_var(VariableDescriptor::free(v.clone()));
    }
    for r in poly.rows.iter().chain(&poly.equalities) {
        base.push_row(r.clone());
    }
    poly.rows
        .iter()
        .map(|r| {
            let mut m = base.clone();
            let mut e = LinExpr::zero();
            for (j, a) in &r.coeffs {
                e.add_term(*j, a.clone());
            }
            let sense = if r.sense == Sense::Le { ObjSense::Minimize } else { ObjSense::Maximize };
            m.set_objective(sense, e);
            let sol = solve_lp(&m);
            assert_eq!(sol.status, LpStatus::Optimal, "relaxation rows are bounded");
            (&sol.objective - &r.rhs).abs()
        })
        .collect()
}

fn theoretical_bound(poly: &RelaxationPolytope) -> String {
    let n = poly.binaries.len();
    let m = poly.dim() - n;
    let amax = poly
        .rows
        .iter()
        .chain(&poly.equalities)
        .flat_map(|r| r.coeffs.iter().map(|(_, a)| a.abs()).chain(std::iter::once(r.rhs.abs())))
        .max()
        .unwrap_or_default();
    format!("2^(4*{n}^3*({m}+{n})*log({amax}+2))")
}

/// The IOM model for `poly` with dependence covers `covers`.
pub fn build_iom(poly: &RelaxationPolytope, covers: &[Cover], big_m: &BigM) -> Result<(MblpModel, Vec<Rational>), IdealError> {
    let ms: Vec<Rational> = match big_m {
        BigM::PerRowLp => row_slacks(poly),
        BigM::Uniform(v) => vec![v.clone(); poly.rows.len()],
    };
    let mut m = MblpModel::new(ModelMeta { name: "iom".into(), ..Default::default() });
    for v in &poly.vars {
        m.add_var(VariableDescriptor::free(v.clone()));
    }
    let mut objective = LinExpr::zero();
    for (k, &j) in poly.binaries.iter().enumerate() {
        let phi = m.add_var(VariableDescriptor::continuous(Var::Phi(k), Some(Rational::zero()), None));
        let two = Rational::from(2i64);
        m.add_constraint(LinExpr::var(phi), Sense::Le, LinExpr::term(j, two.clone()), RowTag::Named(format!("phi_lo_{k}")));
        m.add_constraint(
            LinExpr::var(phi),
            Sense::Le,
            LinExpr::constant(two.clone()) - LinExpr::term(j, two),
            RowTag::Named(format!("phi_hi_{k}")),
        );
        objective.add_term(phi, Rational::one());
    }
    let eta: Vec<usize> = (0..poly.rows.len()).map(|i| m.add_var(VariableDescriptor::binary(Var::Eta(i)))).collect();
    for r in &poly.equalities {
        m.push_row(r.clone());
    }
    for (i, r) in poly.rows.iter().enumerate() {
        m.push_row(r.clone());
        // tight when η_i = 1: a·z <= b + M(1 - η) for `>=` rows, mirrored for `<=`
        let g = r.to_ge();
        let mut lhs = LinExpr::zero();
        for (j, a) in &g.coeffs {
            lhs.add_term(*j, a.clone());
        }
        lhs.add_term(eta[i], ms[i].clone());
        m.push_row(LinearRow::from_exprs(
            lhs,
            Sense::Le,
            LinExpr::constant(&g.rhs + &ms[i]),
            RowTag::Named(format!("tight[{}]", r.tag)),
        ));
    }
    let need = poly.dim() - poly.equality_rank();
    let mut sum = LinExpr::zero();
    for &e in &eta {
        sum.add_term(e, Rational::one());
    }
    m.add_constraint(sum, Sense::Eq, LinExpr::constant(Rational::from(need)), RowTag::Named("basis_size".into()));
    for (c, cover) in covers.iter().enumerate() {
        add_cover_row(&mut m, poly, &eta, &cover.rows, format!("cover_{c}_{}", cover.family))?;
    }
    m.set_objective(ObjSense::Maximize, objective);
    Ok((m, ms))
}

fn add_cover_row(m: &mut MblpModel, poly: &RelaxationPolytope, eta: &[usize], rows: &[RowTag], name: String) -> Result<(), IdealError> {
    let mut e = LinExpr::zero();
    for t in rows {
        let i = poly.row_index(t).ok_or_else(|| IdealError::UnknownRow(t.to_string()))?;
        e.add_term(eta[i], Rational::one());
    }
    m.add_constraint(e, Sense::Le, LinExpr::constant(Rational::from(rows.len() - 1)), RowTag::Named(name));
    Ok(())
}

/// Solve IOM, separating circuits from rank deficient tight sets until the
/// chosen rows form a basis. The result is then an actual vertex.
pub fn solve_iom(poly: &RelaxationPolytope, covers: &[Cover], opts: &IomOptions) -> Result<IomOutcome, IdealError> {
    let (mut model, ms) = build_iom(poly, covers, &opts.big_m)?;
    let slacks = match opts.big_m {
        BigM::PerRowLp => ms.clone(),
        BigM::Uniform(_) => row_slacks(poly),
    };
    let invalid_big_m: Vec<String> =
        poly.rows.iter().zip(slacks.iter().zip(&ms)).filter(|(_, (s, m))| s > m).map(|(r, _)| r.tag.to_string()).collect();
    let eta: Vec<usize> = (0..poly.rows.len()).map(|i| model.idx(&Var::Eta(i))).collect();
    let n = poly.dim();
    let mut separated = Vec::new();
    let mut nodes = 0;
    for round in 0..=opts.max_rounds {
        let res = solve_milp(&model, &SolveOptions::default());
        nodes += res.node_count;
        if res.status != BnbStatus::Optimal {
            return Err(IdealError::IomInfeasible);
        }
        let x = res.incumbent.expect("optimal has an incumbent").point;
        let chosen: Vec<usize> = (0..poly.rows.len()).filter(|&i| x[eta[i]].is_one()).collect();
        let z = x[..n].to_vec();
        let basis = poly.tight_rank(&chosen) == n;
        if basis || round == opts.max_rounds {
            let value = penalty(&z, &poly.binaries)?;
            return Ok(IomOutcome {
                value,
                tight_rows: poly.tags(&chosen),
                point: z,
                rounds: round,
                basis,
                cover_rows: covers.len() + separated.len(),
                separated,
                big_m: ms,
                invalid_big_m,
                theoretical_big_m: theoretical_bound(poly),
                nodes,
            });
        }
        // equalities are always tight, so they may close a circuit but never enter the cut
        let mut tags: Vec<RowTag> = chosen.iter().map(|&i| poly.rows[i].tag.clone()).collect();
        tags.extend(poly.equalities.iter().map(|r| r.tag.clone()));
        let circuit = separate_circuit(poly, &tags, opts.separation)?;
        let cut: Vec<RowTag> = circuit.rows.iter().filter(|t| poly.row_index(t).is_some()).cloned().collect();
        if cut.is_empty() {
            return Err(IdealError::NotDeficient);
        }
        add_cover_row(&mut model, poly, &eta, &cut, format!("separated_{round}"))?;
        separated.push(circuit);
    }
    unreachable!("the last round returns")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulations::{build, Selection};
    use crate::ideal::covers::{flatten, known_covers};
    use crate::ideal::relax;
    use crate::ideal::tests::counterexample;
    use crate::model::{FormulationKind, FormulationOptions};
    use crate::rational::qi;

    fn run(kind: FormulationKind) -> IomOutcome {
        let poly = relax(&build(kind, &counterexample(), Selection::All, FormulationOptions::default()));
        let covers = known_covers(kind, 1, 2, false).map(|f| flatten(&f)).unwrap_or_default();
        solve_iom(&poly, &covers, &IomOptions::default()).unwrap()
    }

    #[test]
    fn iom_values_on_counterexample() {
        assert_eq!(run(FormulationKind::SU).value, qi(0));
        assert_eq!(run(FormulationKind::RU).value, qi(0));
        assert_eq!(run(FormulationKind::SBM).value, qi(0));
        assert_eq!(run(FormulationKind::SBL).value, qi(2));
    }

    #[test]
    fn uniform_region_size_is_not_always_valid() {
        let poly = relax(&build(FormulationKind::SU, &counterexample(), Selection::All, FormulationOptions::default()));
        let slacks = row_slacks(&poly);
        assert!(slacks.iter().any(|s| s > &qi(10)));
    }
}
