//! Reference optimum by direct enumeration of one disjunct per pair.

use crate::lp::{solve_problem, LpProblem, LpStatus};
use crate::model::{LinExpr, LinearRow, RowTag, Sense};
use crate::packing::{derive_parameters, disjunct_order, Dir, Instance};
use crate::rational::{qi, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{pairs} pairs give 4^{pairs} disjunct LPs, above the cap of {cap} objects")]
    TooLarge { pairs: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleResult {
    Optimal(Rational),
    Infeasible,
}

pub const DEFAULT_CAP: usize = 4;

/// Minimum strip height over every choice of one precedence term per pair.
pub fn disjunction_oracle(inst: &Instance, cap: usize) -> Result<OracleResult, OracleError> {
    let n = inst.len();
    let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect();
    if n > cap {
        return Err(OracleError::TooLarge { pairs: pairs.len(), cap });
    }
    let p = derive_parameters(inst);
    // variables: c_ix, c_iy for i = 1..n (index 2(i-1) + s), then h
    let cv = |i: usize, s: Dir| 2 * (i - 1) + s.index();
    let h = 2 * n;
    let mut base = LpProblem {
        n: 2 * n + 1,
        rows: Vec::new(),
        row_lo: Vec::new(),
        row_hi: Vec::new(),
        col_lo: Vec::new(),
        col_hi: Vec::new(),
        cost: vec![Rational::zero(); 2 * n + 1],
    };
    for i in 1..=n {
        for s in Dir::BOTH {
            base.col_lo.push(Some(p.lb(i, s).clone()));
            base.col_hi.push(Some(p.ub(i, s).clone()));
        }
    }
    base.col_lo.push(Some(Rational::zero()));
    base.col_hi.push(None);
    base.cost[h] = Rational::one();
    for o in inst.objects() {
        let top = LinExpr::var(cv(o.id, Dir::Y)) + (o.dim(Dir::Y) / qi(2) + o.clear.plus(Dir::Y));
        base.push_row(&LinearRow::from_exprs(LinExpr::var(h), Sense::Ge, top, RowTag::Height { i: o.id }));
    }
    let mut best: Option<Rational> = None;
    let total = 4usize.pow(pairs.len() as u32);
    for code in 0..total {
        let mut lp = base.clone();
        let mut c = code;
        for &(i, j) in &pairs {
            let (k, l, s) = disjunct_order(i, j)[c % 4];
            c /= 4;
            let lhs = LinExpr::var(cv(l, s)) - LinExpr::var(cv(k, s));
            lp.push_row(&LinearRow::from_exprs(
                lhs,
                Sense::Ge,
                LinExpr::constant(p.pm(k, l, s).clone()),
                RowTag::Prec { k, l, s },
            ));
        }
        let sol = solve_problem(&lp);
        if sol.status == LpStatus::Optimal && best.as_ref().map_or(true, |b| sol.objective < *b) {
            best = Some(sol.objective);
        }
    }
    Ok(best.map_or(OracleResult::Infeasible, OracleResult::Optimal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing::{Clearance, ObjectSpec, Region};

    fn inst(w: i64, h: i64, dims: &[(i64, i64)]) -> Instance {
        let objs = dims
            .iter()
            .enumerate()
            .map(|(k, &(dx, dy))| ObjectSpec::new(k + 1, qi(dx), qi(dy), Clearance::zero()))
            .collect();
        Instance::new(Region { w: qi(w), h: qi(h) }, objs).unwrap()
    }

    #[test]
    fn side_by_side() {
        assert_eq!(disjunction_oracle(&inst(10, 10, &[(2, 2), (2, 2)]), 4), Ok(OracleResult::Optimal(qi(2))));
    }

    #[test]
    fn forced_stacking() {
        let r = disjunction_oracle(&inst(10, 20, &[(6, 3), (6, 5)]), 4);
        assert_eq!(r, Ok(OracleResult::Optimal(qi(8))));
    }

    #[test]
    fn cap_is_enforced() {
        let dims = [(1, 1); 5];
        assert!(matches!(disjunction_oracle(&inst(10, 10, &dims), 4), Err(OracleError::TooLarge { .. })));
    }

    #[test]
    fn infeasible_region() {
        assert_eq!(disjunction_oracle(&inst(10, 5, &[(6, 3), (6, 3)]), 4), Ok(OracleResult::Infeasible));
    }
}
