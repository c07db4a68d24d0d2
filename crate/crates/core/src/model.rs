//! Mixed-binary linear models with structured variable and row labels.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};

use crate::packing::Dir;
use crate::rational::Rational;

/// A model variable. Object indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    /// Center coordinate `c_is`.
    C { i: usize, s: Dir },
    /// Unary indicator `δ_kls`.
    Unary { k: usize, l: usize, s: Dir },
    /// Binary code digit `δ_kl`.
    Binary { k: usize, l: usize },
    /// McCormick product `Δ_ij = δ_ij δ_ji`.
    Aux { i: usize, j: usize },
    /// Strip height.
    Height,
    Phi(usize),
    Eta(usize),
    P(usize),
    Mu(usize),
    Nu(usize),
    Named(String),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::C { i, s } => write!(f, "c_{i}_{s}"),
            Var::Unary { k, l, s } => write!(f, "d_{k}_{l}_{s}"),
            Var::Binary { k, l } => write!(f, "d_{k}_{l}"),
            Var::Aux { i, j } => write!(f, "D_{i}_{j}"),
            Var::Height => f.write_str("h"),
            Var::Phi(i) => write!(f, "phi_{i}"),
            Var::Eta(i) => write!(f, "eta_{i}"),
            Var::P(i) => write!(f, "p_{i}"),
            Var::Mu(i) => write!(f, "mu_{i}"),
            Var::Nu(i) => write!(f, "nu_{i}"),
            Var::Named(s) => f.write_str(s),
        }
    }
}

fn parse_dir(s: &str) -> Option<Dir> {
    match s {
        "x" => Some(Dir::X),
        "y" => Some(Dir::Y),
        _ => None,
    }
}

impl Var {
    /// Inverse of `Display`; unknown shapes become `Named`.
    pub fn parse(name: &str) -> Var {
        let parts: Vec<&str> = name.split('_').collect();
        let num = |k: usize| parts.get(k).and_then(|p| p.parse::<usize>().ok());
        let parsed = match (parts[0], parts.len()) {
            ("c", 3) => num(1).zip(parse_dir(parts[2])).map(|(i, s)| Var::C { i, s }),
            ("d", 4) => {
                num(1).zip(num(2)).zip(parse_dir(parts[3])).map(|((k, l), s)| Var::Unary { k, l, s })
            }
            ("d", 3) => num(1).zip(num(2)).map(|(k, l)| Var::Binary { k, l }),
            ("D", 3) => num(1).zip(num(2)).map(|(i, j)| Var::Aux { i, j }),
            ("h", 1) => Some(Var::Height),
            ("phi", 2) => num(1).map(Var::Phi),
            ("eta", 2) => num(1).map(Var::Eta),
            ("p", 2) => num(1).map(Var::P),
            ("mu", 2) => num(1).map(Var::Mu),
            ("nu", 2) => num(1).map(Var::Nu),
            _ => None,
        };
        parsed.unwrap_or_else(|| Var::Named(name.to_string()))
    }
}

impl Serialize for Var {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Var {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        Ok(Var::parse(&s))
    }
}

/// Which side of a variable bound a row encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

/// Structured row label. `(k, l, s)` always names the disjunct the row
/// belongs to; `(i, j)` with `i < j` names a pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowTag {
    Lb { k: usize, l: usize, s: Dir },
    Ub { k: usize, l: usize, s: Dir },
    Prec { k: usize, l: usize, s: Dir },
    Disj { i: usize, j: usize },
    Tight { i: usize, j: usize, s: Dir },
    /// `δ_ij + δ_ji - Δ_ij <= 1`.
    McCorSum { i: usize, j: usize },
    /// `δ_kl - Δ_ij >= 0`.
    McCorLink { k: usize, l: usize },
    /// `δ_ijs + δ_jks - δ_iks <= 1` for an ordered triple.
    SeqUnary { i: usize, j: usize, k: usize, s: Dir },
    /// One side of a binary sequence-pair chain; `chain` 0 is
    /// `δ_ij + δ_jk - δ_ik`, chain 1 is `δ_ji + δ_kj - δ_ki`.
    SeqBinary { i: usize, j: usize, k: usize, chain: u8, side: Side },
    Height { i: usize },
    /// A variable bound materialised as a row.
    Bound { var: Var, side: Side },
    Named(String),
}

impl fmt::Display for RowTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |s: &Side| match s {
            Side::Lower => "lo",
            Side::Upper => "up",
        };
        match self {
            RowTag::Lb { k, l, s } => write!(f, "lb_{k}_{l}_{s}"),
            RowTag::Ub { k, l, s } => write!(f, "ub_{k}_{l}_{s}"),
            RowTag::Prec { k, l, s } => write!(f, "prec_{k}_{l}_{s}"),
            RowTag::Disj { i, j } => write!(f, "disj_{i}_{j}"),
            RowTag::Tight { i, j, s } => write!(f, "tight_{i}_{j}_{s}"),
            RowTag::McCorSum { i, j } => write!(f, "mccor3_{i}_{j}"),
            RowTag::McCorLink { k, l } => write!(f, "mccor12_{k}_{l}"),
            RowTag::SeqUnary { i, j, k, s } => write!(f, "spu_{i}_{j}_{k}_{s}"),
            RowTag::SeqBinary { i, j, k, chain, side: sd } => write!(f, "spb_{i}_{j}_{k}_{chain}_{}", side(sd)),
            RowTag::Height { i } => write!(f, "height_{i}"),
            RowTag::Bound { var, side: sd } => write!(f, "bnd_{}_{var}", side(sd)),
            RowTag::Named(s) => f.write_str(s),
        }
    }
}

impl RowTag {
    /// Inverse of `Display`; unknown shapes become `Named`.
    pub fn parse(name: &str) -> RowTag {
        if let Some(rest) = name.strip_prefix("bnd_") {
            let side = match rest.get(..3) {
                Some("lo_") => Some(Side::Lower),
                Some("up_") => Some(Side::Upper),
                _ => None,
            };
            if let Some(side) = side {
                return RowTag::Bound { var: Var::parse(&rest[3..]), side };
            }
        }
        let p: Vec<&str> = name.split('_').collect();
        let n = |k: usize| p.get(k).and_then(|v| v.parse::<usize>().ok());
        let d = |k: usize| p.get(k).and_then(|v| parse_dir(v));
        let parsed = match (p[0], p.len()) {
            ("lb", 4) => n(1).zip(n(2)).zip(d(3)).map(|((k, l), s)| RowTag::Lb { k, l, s }),
            ("ub", 4) => n(1).zip(n(2)).zip(d(3)).map(|((k, l), s)| RowTag::Ub { k, l, s }),
            ("prec", 4) => n(1).zip(n(2)).zip(d(3)).map(|((k, l), s)| RowTag::Prec { k, l, s }),
            ("disj", 3) => n(1).zip(n(2)).map(|(i, j)| RowTag::Disj { i, j }),
            ("tight", 4) => n(1).zip(n(2)).zip(d(3)).map(|((i, j), s)| RowTag::Tight { i, j, s }),
            ("mccor3", 3) => n(1).zip(n(2)).map(|(i, j)| RowTag::McCorSum { i, j }),
            ("mccor12", 3) => n(1).zip(n(2)).map(|(k, l)| RowTag::McCorLink { k, l }),
            ("spu", 5) => {
                n(1).zip(n(2)).zip(n(3)).zip(d(4)).map(|(((i, j), k), s)| RowTag::SeqUnary { i, j, k, s })
            }
            ("spb", 6) => {
                let side = match p[5] {
                    "lo" => Some(Side::Lower),
                    "up" => Some(Side::Upper),
                    _ => None,
                };
                let chain = p[4].parse::<u8>().ok().filter(|c| *c < 2);
                n(1).zip(n(2)).zip(n(3)).zip(chain).zip(side).map(|((((i, j), k), chain), side)| {
                    RowTag::SeqBinary { i, j, k, chain, side }
                })
            }
            ("height", 2) => n(1).map(|i| RowTag::Height { i }),
            _ => None,
        };
        parsed.unwrap_or_else(|| RowTag::Named(name.to_string()))
    }

    pub fn family(&self) -> RowFamily {
        match self {
            RowTag::Prec { .. } => RowFamily::Precedence,
            RowTag::Lb { .. } | RowTag::Ub { .. } => RowFamily::Bounds,
            RowTag::Disj { .. } | RowTag::Tight { .. } | RowTag::McCorSum { .. } | RowTag::McCorLink { .. } => {
                RowFamily::Logic
            }
            RowTag::SeqUnary { .. } | RowTag::SeqBinary { .. } => RowFamily::SequencePair,
            RowTag::Height { .. } => RowFamily::Objective,
            RowTag::Bound { .. } => RowFamily::VariableBound,
            RowTag::Named(_) => RowFamily::Other,
        }
    }
}

impl Serialize for RowTag {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RowTag {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        Ok(RowTag::parse(&s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RowFamily {
    Precedence,
    Bounds,
    Logic,
    SequencePair,
    Objective,
    VariableBound,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableDescriptor {
    pub var: Var,
    pub kind: VarKind,
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
    pub branch_priority: Option<Rational>,
}

impl VariableDescriptor {
    pub fn continuous(var: Var, lower: Option<Rational>, upper: Option<Rational>) -> Self {
        VariableDescriptor { var, kind: VarKind::Continuous, lower, upper, branch_priority: None }
    }

    pub fn binary(var: Var) -> Self {
        VariableDescriptor {
            var,
            kind: VarKind::Binary,
            lower: Some(Rational::zero()),
            upper: Some(Rational::one()),
            branch_priority: None,
        }
    }

    pub fn free(var: Var) -> Self {
        Self::continuous(var, None, None)
    }

    pub fn is_binary(&self) -> bool {
        self.kind == VarKind::Binary
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }

    pub fn flipped(self) -> Sense {
        match self {
            Sense::Le => Sense::Ge,
            Sense::Ge => Sense::Le,
            Sense::Eq => Sense::Eq,
        }
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Sense::Le => lhs <= rhs,
            Sense::Ge => lhs >= rhs,
            Sense::Eq => lhs == rhs,
        }
    }
}

/// Affine form `Σ a_j x_j + constant` over model variable indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinExpr {
    pub terms: BTreeMap<usize, Rational>,
    pub constant: Rational,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn var(idx: usize) -> Self {
        Self::term(idx, Rational::one())
    }

    pub fn term(idx: usize, coef: Rational) -> Self {
        let mut e = Self::zero();
        e.add_term(idx, coef);
        e
    }

    pub fn constant(c: Rational) -> Self {
        LinExpr { terms: BTreeMap::new(), constant: c }
    }

    pub fn add_term(&mut self, idx: usize, coef: Rational) {
        if coef.is_zero() {
            return;
        }
        let slot = self.terms.entry(idx).or_insert_with(Rational::zero);
        *slot += coef;
        if slot.is_zero() {
            self.terms.remove(&idx);
        }
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        LinExpr {
            terms: self.terms.iter().map(|(&i, v)| (i, v * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.terms.iter().fold(self.constant.clone(), |acc, (&j, a)| acc + a * &x[j])
    }

    pub fn coef(&self, idx: usize) -> Rational {
        self.terms.get(&idx).cloned().unwrap_or_default()
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        for (i, v) in rhs.terms {
            self.add_term(i, v);
        }
        self.constant += rhs.constant;
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: LinExpr) -> LinExpr {
        self + (-rhs)
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scale(&Rational::from_int(-1))
    }
}

impl Mul<&Rational> for LinExpr {
    type Output = LinExpr;
    fn mul(self, k: &Rational) -> LinExpr {
        self.scale(k)
    }
}

impl Add<Rational> for LinExpr {
    type Output = LinExpr;
    fn add(mut self, c: Rational) -> LinExpr {
        self.constant += c;
        self
    }
}

impl Sub<Rational> for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, c: Rational) -> LinExpr {
        self.constant -= c;
        self
    }
}

/// `Σ coeffs · x  sense  rhs`, with zero coefficients never stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearRow {
    pub coeffs: Vec<(usize, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
    pub tag: RowTag,
}

impl LinearRow {
    /// Row for `lhs sense rhs` with every variable moved to the left.
    pub fn from_exprs(lhs: LinExpr, sense: Sense, rhs: LinExpr, tag: RowTag) -> Self {
        let diff = lhs - rhs;
        LinearRow { coeffs: diff.terms.into_iter().collect(), sense, rhs: -diff.constant, tag }
    }

    pub fn activity(&self, x: &[Rational]) -> Rational {
        self.coeffs.iter().fold(Rational::zero(), |acc, (j, a)| acc + a * &x[*j])
    }

    pub fn is_satisfied(&self, x: &[Rational]) -> bool {
        self.sense.holds(&self.activity(x), &self.rhs)
    }

    pub fn is_tight(&self, x: &[Rational]) -> bool {
        self.activity(x) == self.rhs
    }

    pub fn coef(&self, idx: usize) -> Rational {
        self.coeffs
            .binary_search_by_key(&idx, |(j, _)| *j)
            .map(|p| self.coeffs[p].1.clone())
            .unwrap_or_default()
    }

    /// The same constraint as `a·x >= b` (equalities are returned as-is).
    pub fn to_ge(&self) -> LinearRow {
        match self.sense {
            Sense::Le => LinearRow {
                coeffs: self.coeffs.iter().map(|(j, a)| (*j, -a)).collect(),
                sense: Sense::Ge,
                rhs: -&self.rhs,
                tag: self.tag.clone(),
            },
            _ => self.clone(),
        }
    }

    /// Dense coefficient vector of length `n`.
    pub fn dense(&self, n: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); n];
        for (j, a) in &self.coeffs {
            v[*j] = a.clone();
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Objective {
    pub sense: ObjSense,
    pub coeffs: Vec<(usize, Rational)>,
}

impl Objective {
    pub fn none() -> Self {
        Objective { sense: ObjSense::Minimize, coeffs: Vec::new() }
    }

    pub fn value(&self, x: &[Rational]) -> Rational {
        self.coeffs.iter().fold(Rational::zero(), |acc, (j, a)| acc + a * &x[*j])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormulationKind {
    #[serde(rename = "su")]
    SU,
    #[serde(rename = "ru")]
    RU,
    #[serde(rename = "sbl")]
    SBL,
    #[serde(rename = "sbm")]
    SBM,
}

impl FormulationKind {
    pub const ALL: [FormulationKind; 4] =
        [FormulationKind::SU, FormulationKind::RU, FormulationKind::SBL, FormulationKind::SBM];

    pub fn is_unary(self) -> bool {
        matches!(self, FormulationKind::SU | FormulationKind::RU)
    }
}

impl fmt::Display for FormulationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormulationKind::SU => "SU",
            FormulationKind::RU => "RU",
            FormulationKind::SBL => "SB-L",
            FormulationKind::SBM => "SB-M",
        })
    }
}

impl FromStr for FormulationKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "su" => Ok(FormulationKind::SU),
            "ru" => Ok(FormulationKind::RU),
            "sbl" => Ok(FormulationKind::SBL),
            "sbm" => Ok(FormulationKind::SBM),
            other => Err(format!("unknown formulation '{other}' (expected su, ru, sbl or sbm)")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulationOptions {
    pub static_bounds: bool,
    pub sequence_pair: bool,
    pub branch_priorities: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub name: String,
    pub formulation: Option<FormulationKind>,
    pub options: FormulationOptions,
    /// Upper bounds of the binaries follow from the other rows and are left
    /// out when the relaxation is materialised.
    pub binary_upper_implied: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("duplicate variable {0}")]
    DuplicateVar(String),
    #[error("unknown variable {0}")]
    UnknownVar(String),
    #[error("LP parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MblpModel {
    pub meta: ModelMeta,
    vars: Vec<VariableDescriptor>,
    #[serde(skip)]
    index: HashMap<Var, usize>,
    rows: Vec<LinearRow>,
    objective: Objective,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FamilyCounts {
    pub precedence: usize,
    pub bounds: usize,
    pub logic: usize,
    pub continuous_aux: usize,
    pub binaries: usize,
}

impl MblpModel {
    pub fn new(meta: ModelMeta) -> Self {
        MblpModel { meta, vars: Vec::new(), index: HashMap::new(), rows: Vec::new(), objective: Objective::none() }
    }

    pub fn add_var(&mut self, desc: VariableDescriptor) -> usize {
        self.try_add_var(desc).expect("variable names are unique")
    }

    pub fn try_add_var(&mut self, desc: VariableDescriptor) -> Result<usize, ModelError> {
        if self.index.contains_key(&desc.var) {
            return Err(ModelError::DuplicateVar(desc.var.to_string()));
        }
        let idx = self.vars.len();
        self.index.insert(desc.var.clone(), idx);
        self.vars.push(desc);
        Ok(idx)
    }

    pub fn var_index(&self, v: &Var) -> Option<usize> {
        self.index.get(v).copied()
    }

    /// Index of a variable known to exist.
    pub fn idx(&self, v: &Var) -> usize {
        self.index[v]
    }

    pub fn x(&self, v: &Var) -> LinExpr {
        LinExpr::var(self.idx(v))
    }

    pub fn vars(&self) -> &[VariableDescriptor] {
        &self.vars
    }

    pub fn var_mut(&mut self, idx: usize) -> &mut VariableDescriptor {
        &mut self.vars[idx]
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn rows(&self) -> &[LinearRow] {
        &self.rows
    }

    pub fn push_row(&mut self, row: LinearRow) -> usize {
        self.rows.push(row);
        self.rows.len() - 1
    }

    pub fn add_constraint(&mut self, lhs: LinExpr, sense: Sense, rhs: LinExpr, tag: RowTag) -> usize {
        self.push_row(LinearRow::from_exprs(lhs, sense, rhs, tag))
    }

    pub fn retain_rows(&mut self, keep: impl FnMut(&LinearRow) -> bool) {
        self.rows.retain(keep);
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn set_objective(&mut self, sense: ObjSense, expr: LinExpr) {
        self.objective = Objective { sense, coeffs: expr.terms.into_iter().collect() };
    }

    pub fn binary_indices(&self) -> Vec<usize> {
        (0..self.vars.len()).filter(|&j| self.vars[j].is_binary()).collect()
    }

    pub fn row_by_tag(&self, tag: &RowTag) -> Option<usize> {
        self.rows.iter().position(|r| &r.tag == tag)
    }

    pub fn family_counts(&self) -> FamilyCounts {
        let mut c = FamilyCounts::default();
        for r in &self.rows {
            match r.tag.family() {
                RowFamily::Precedence => c.precedence += 1,
                RowFamily::Bounds => c.bounds += 1,
                RowFamily::Logic => c.logic += 1,
                _ => {}
            }
        }
        for v in &self.vars {
            match (&v.var, v.kind) {
                (_, VarKind::Binary) => c.binaries += 1,
                (Var::C { .. } | Var::Height, _) => {}
                _ => c.continuous_aux += 1,
            }
        }
        c
    }

    /// Whether `x` satisfies every row, bound and integrality requirement.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.vars.len()
            && self.rows.iter().all(|r| r.is_satisfied(x))
            && self.vars.iter().zip(x).all(|(v, val)| {
                v.lower.as_ref().map_or(true, |lo| val >= lo)
                    && v.upper.as_ref().map_or(true, |up| val <= up)
                    && (!v.is_binary() || val.is_integer())
            })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialises")
    }
}

// ---------------------------------------------------------------------------
// LP text

fn fmt_num(v: &Rational) -> String {
    v.to_terminating_decimal().expect("caller scales non-terminating values")
}

fn scale_for<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    let vals: Vec<&Rational> = values.into_iter().collect();
    if vals.iter().all(|v| v.to_terminating_decimal().is_some()) {
        Rational::one()
    } else {
        Rational::from(num_rational::BigRational::from_integer(crate::rational::lcm_denominators(vals)))
    }
}

fn write_terms(out: &mut String, model: &MblpModel, coeffs: &[(usize, Rational)]) {
    for (pos, (j, a)) in coeffs.iter().enumerate() {
        let name = model.vars[*j].var.to_string();
        let mag = fmt_num(&a.abs());
        match (pos, a.is_negative()) {
            (0, false) => out.push_str(&format!(" {mag} {name}")),
            (0, true) => out.push_str(&format!(" -{mag} {name}")),
            (_, false) => out.push_str(&format!(" + {mag} {name}")),
            (_, true) => out.push_str(&format!(" - {mag} {name}")),
        }
    }
}

/// Export in the CPLEX LP dialect. Rows with non-terminating coefficients are
/// multiplied by the lcm of their denominators; the factor is recorded in a
/// `\ scale` comment so a parse can undo it. Variable order, kinds and
/// priorities are recorded in comments as well.
pub fn export_lp_text(model: &MblpModel) -> String {
    let mut out = String::new();
    out.push_str(&format!("\\ clearpack model {}\n", if model.meta.name.is_empty() { "-" } else { &model.meta.name }));
    if model.vars.is_empty() && model.rows.is_empty() {
        out.push_str("End\n");
        return out;
    }
    let names: Vec<String> = model.vars.iter().map(|v| v.var.to_string()).collect();
    out.push_str(&format!("\\ vars {}\n", names.join(" ")));
    for v in &model.vars {
        if let Some(p) = &v.branch_priority {
            out.push_str(&format!("\\ priority {} {}\n", v.var, p));
        }
    }

    let obj_scale = scale_for(model.objective.coeffs.iter().map(|(_, a)| a));
    let mut bound_rows: Vec<(String, Rational, String, Rational)> = Vec::new();
    let mut row_scales: Vec<Rational> = Vec::new();
    for r in &model.rows {
        row_scales.push(scale_for(r.coeffs.iter().map(|(_, a)| a).chain(std::iter::once(&r.rhs))));
    }
    if !obj_scale.is_one() {
        out.push_str(&format!("\\ scale obj {obj_scale}\n"));
    }
    for (r, s) in model.rows.iter().zip(&row_scales) {
        if !s.is_one() {
            out.push_str(&format!("\\ scale {} {s}\n", r.tag));
        }
    }
    // bounds that cannot be written exactly go to the constraint section
    for v in &model.vars {
        if v.is_binary() {
            continue;
        }
        for (side, val) in [("lo", &v.lower), ("up", &v.upper)] {
            if let Some(val) = val {
                if val.to_terminating_decimal().is_none() {
                    let den = Rational::from(num_rational::BigRational::from_integer(val.denom()));
                    bound_rows.push((format!("bnd_{side}_{}", v.var), den.clone(), v.var.to_string(), val * &den));
                    out.push_str(&format!("\\ scale bnd_{side}_{} {den}\n", v.var));
                }
            }
        }
    }

    out.push_str(match model.objective.sense {
        ObjSense::Minimize => "Minimize\n",
        ObjSense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    if model.objective.coeffs.is_empty() {
        out.push_str(&format!(" 0 {}", names[0]));
    } else {
        let scaled: Vec<(usize, Rational)> =
            model.objective.coeffs.iter().map(|(j, a)| (*j, a * &obj_scale)).collect();
        write_terms(&mut out, model, &scaled);
    }
    out.push('\n');

    out.push_str("Subject To\n");
    for (r, s) in model.rows.iter().zip(&row_scales) {
        out.push_str(&format!(" {}:", r.tag));
        if r.coeffs.is_empty() {
            out.push_str(&format!(" 0 {}", names[0]));
        } else {
            let scaled: Vec<(usize, Rational)> = r.coeffs.iter().map(|(j, a)| (*j, a * s)).collect();
            write_terms(&mut out, model, &scaled);
        }
        out.push_str(&format!(" {} {}\n", r.sense.symbol(), fmt_num(&(&r.rhs * s))));
    }
    for (name, den, var, rhs) in &bound_rows {
        let sense = if name.starts_with("bnd_lo") { ">=" } else { "<=" };
        out.push_str(&format!(" {name}: {den} {var} {sense} {}\n", fmt_num(rhs)));
    }

    out.push_str("Bounds\n");
    for v in &model.vars {
        if v.is_binary() {
            continue;
        }
        let exact = |b: &Option<Rational>| b.as_ref().map(|x| x.to_terminating_decimal().is_some()).unwrap_or(true);
        let lo = if exact(&v.lower) { v.lower.clone() } else { None };
        let up = if exact(&v.upper) { v.upper.clone() } else { None };
        let lo_free = v.lower.is_none() || !exact(&v.lower);
        match (lo_free, &lo, &up) {
            (true, _, None) => out.push_str(&format!(" {} free\n", v.var)),
            (true, _, Some(u)) => out.push_str(&format!(" -inf <= {} <= {}\n", v.var, fmt_num(u))),
            (false, Some(l), None) => out.push_str(&format!(" {} >= {}\n", v.var, fmt_num(l))),
            (false, Some(l), Some(u)) => out.push_str(&format!(" {} <= {} <= {}\n", fmt_num(l), v.var, fmt_num(u))),
            (false, None, _) => unreachable!(),
        }
    }
    let bins: Vec<&str> = model
        .vars
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.is_binary())
        .map(|(_, n)| n.as_str())
        .collect();
    if !bins.is_empty() {
        out.push_str("Binaries\n");
        for b in bins {
            out.push_str(&format!(" {b}\n"));
        }
    }
    out.push_str("End\n");
    out
}

fn parse_expr(
    text: &str,
    index: &HashMap<String, usize>,
    line: usize,
) -> Result<Vec<(usize, Rational)>, ModelError> {
    let err = |msg: String| ModelError::Parse { line, msg };
    let toks: Vec<&str> = text.split_whitespace().collect();
    let mut out: BTreeMap<usize, Rational> = BTreeMap::new();
    let mut k = 0;
    while k < toks.len() {
        let mut sign = Rational::one();
        if toks[k] == "+" || toks[k] == "-" {
            if toks[k] == "-" {
                sign = -sign;
            }
            k += 1;
        }
        let coef_tok = toks.get(k).ok_or_else(|| err("dangling sign".into()))?;
        let (coef, name) = if let Some(stripped) = coef_tok.strip_prefix('-') {
            let v: Rational = stripped.parse().map_err(|_| err(format!("bad number {coef_tok}")))?;
            (-v, toks.get(k + 1).ok_or_else(|| err("missing variable".into()))?)
        } else {
            let v: Rational = coef_tok.parse().map_err(|_| err(format!("bad number {coef_tok}")))?;
            (v, toks.get(k + 1).ok_or_else(|| err("missing variable".into()))?)
        };
        k += 2;
        let j = *index.get(*name).ok_or_else(|| err(format!("unknown variable {name}")))?;
        let slot = out.entry(j).or_insert_with(Rational::zero);
        *slot += coef * sign;
    }
    Ok(out.into_iter().filter(|(_, v)| !v.is_zero()).collect())
}

/// Parse text produced by [`export_lp_text`]. Scaled rows are unscaled, so
/// exporting the result reproduces the input exactly.
pub fn parse_lp_text(text: &str) -> Result<MblpModel, ModelError> {
    let mut name = String::new();
    let mut var_names: Vec<String> = Vec::new();
    let mut priorities: HashMap<String, Rational> = HashMap::new();
    let mut scales: HashMap<String, Rational> = HashMap::new();
    let mut section = "";
    let mut obj_sense = ObjSense::Minimize;
    let mut obj_line: Option<(usize, String)> = None;
    let mut row_lines: Vec<(usize, String)> = Vec::new();
    let mut bound_lines: Vec<(usize, String)> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let t = raw.trim();
        if let Some(c) = t.strip_prefix('\\') {
            let c = c.trim();
            let parts: Vec<&str> = c.split_whitespace().collect();
            match parts.first().copied() {
                Some("clearpack") if parts.len() == 3 => {
                    name = if parts[2] == "-" { String::new() } else { parts[2].to_string() }
                }
                Some("vars") => var_names = parts[1..].iter().map(|s| s.to_string()).collect(),
                Some("priority") if parts.len() == 3 => {
                    let p = parts[2].parse().map_err(|_| ModelError::Parse { line, msg: "bad priority".into() })?;
                    priorities.insert(parts[1].to_string(), p);
                }
                Some("scale") if parts.len() == 3 => {
                    let s = parts[2].parse().map_err(|_| ModelError::Parse { line, msg: "bad scale".into() })?;
                    scales.insert(parts[1].to_string(), s);
                }
                _ => {}
            }
            continue;
        }
        match t {
            "" => continue,
            "Minimize" => {
                section = "obj";
                obj_sense = ObjSense::Minimize;
                continue;
            }
            "Maximize" => {
                section = "obj";
                obj_sense = ObjSense::Maximize;
                continue;
            }
            "Subject To" => {
                section = "rows";
                continue;
            }
            "Bounds" => {
                section = "bounds";
                continue;
            }
            "Binaries" => {
                section = "bin";
                continue;
            }
            "End" => break,
            _ => {}
        }
        match section {
            "obj" => obj_line = Some((line, t.to_string())),
            "rows" => row_lines.push((line, t.to_string())),
            "bounds" => bound_lines.push((line, t.to_string())),
            "bin" => binaries.push(t.to_string()),
            _ => return Err(ModelError::Parse { line, msg: format!("unexpected content '{t}'") }),
        }
    }

    let mut model = MblpModel::new(ModelMeta { name, ..ModelMeta::default() });
    let mut index = HashMap::new();
    for n in &var_names {
        let var = Var::parse(n);
        let desc = if binaries.contains(n) {
            VariableDescriptor::binary(var)
        } else {
            VariableDescriptor::continuous(var, Some(Rational::zero()), None)
        };
        let j = model.try_add_var(desc)?;
        model.vars[j].branch_priority = priorities.get(n).cloned();
        index.insert(n.clone(), j);
    }

    if let Some((line, t)) = obj_line {
        let body = t.strip_prefix("obj:").ok_or(ModelError::Parse { line, msg: "objective needs 'obj:'".into() })?;
        let mut coeffs = parse_expr(body, &index, line)?;
        if let Some(s) = scales.get("obj") {
            coeffs = coeffs.into_iter().map(|(j, a)| (j, a / s)).collect();
        }
        model.objective = Objective { sense: obj_sense, coeffs };
    }

    let mut pending_bounds: Vec<(usize, Side, Rational)> = Vec::new();
    for (line, t) in row_lines {
        let (rname, body) = t.split_once(':').ok_or(ModelError::Parse { line, msg: "row needs a name".into() })?;
        let (sense, pos) = ["<=", ">=", "="]
            .iter()
            .find_map(|op| body.find(op).map(|p| (*op, p)))
            .ok_or(ModelError::Parse { line, msg: "row has no sense".into() })?;
        let sense = match sense {
            "<=" => Sense::Le,
            ">=" => Sense::Ge,
            _ => Sense::Eq,
        };
        let width = if sense == Sense::Eq { 1 } else { 2 };
        let mut coeffs = parse_expr(&body[..pos], &index, line)?;
        let mut rhs: Rational = body[pos + width..]
            .trim()
            .parse()
            .map_err(|_| ModelError::Parse { line, msg: "bad right-hand side".into() })?;
        if let Some(s) = scales.get(rname.trim()) {
            coeffs = coeffs.into_iter().map(|(j, a)| (j, a / s)).collect();
            rhs = rhs / s;
        }
        let tag = RowTag::parse(rname.trim());
        if let RowTag::Bound { var, side } = &tag {
            if scales.contains_key(rname.trim()) && coeffs.len() == 1 {
                let j = model.idx(var);
                pending_bounds.push((j, *side, rhs / &coeffs[0].1));
                continue;
            }
        }
        model.rows.push(LinearRow { coeffs, sense, rhs, tag });
    }

    for (line, t) in bound_lines {
        let toks: Vec<&str> = t.split_whitespace().collect();
        let perr = || ModelError::Parse { line, msg: format!("bad bound '{t}'") };
        let lookup = |n: &str| index.get(n).copied().ok_or_else(perr);
        let num = |s: &str| s.parse::<Rational>().map_err(|_| perr());
        match toks.as_slice() {
            [v, "free"] => {
                let j = lookup(v)?;
                model.vars[j].lower = None;
                model.vars[j].upper = None;
            }
            ["-inf", "<=", v, "<=", u] => {
                let j = lookup(v)?;
                model.vars[j].lower = None;
                model.vars[j].upper = Some(num(u)?);
            }
            [v, ">=", l] => {
                let j = lookup(v)?;
                model.vars[j].lower = Some(num(l)?);
            }
            [l, "<=", v, "<=", u] => {
                let j = lookup(v)?;
                model.vars[j].lower = Some(num(l)?);
                model.vars[j].upper = Some(num(u)?);
            }
            _ => return Err(perr()),
        }
    }
    for (j, side, val) in pending_bounds {
        match side {
            Side::Lower => model.vars[j].lower = Some(val),
            Side::Upper => model.vars[j].upper = Some(val),
        }
    }
    Ok(model)
}
