//! Strip-packing instances with clearances.
//!
//! Objects are axis-aligned rectangles with a clearance on each face. An
//! object `k` precedes `l` along direction `s` when
//! `c_ks + PM_kls <= c_ls`; a layout is valid when every center lies in its
//! `[LB, UB]` window and every pair satisfies at least one of the four
//! precedence terms.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::rational::{qi, Rational};

/// Axis of the packing region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dir {
    X,
    Y,
}

impl Dir {
    pub const BOTH: [Dir; 2] = [Dir::X, Dir::Y];

    pub fn index(self) -> usize {
        match self {
            Dir::X => 0,
            Dir::Y => 1,
        }
    }

    pub fn other(self) -> Dir {
        match self {
            Dir::X => Dir::Y,
            Dir::Y => Dir::X,
        }
    }
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dir::X => "x",
            Dir::Y => "y",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PackingError {
    #[error("region dimensions must be positive")]
    BadRegion,
    #[error("object {id}: {reason}")]
    BadObject { id: usize, reason: String },
    #[error("object ids must be 1..=N in order (found {found} at position {pos})")]
    BadIds { pos: usize, found: usize },
    #[error("object {id} has an empty {dir} window: LB {lb} > UB {ub}")]
    EmptyWindow { id: usize, dir: Dir, lb: Rational, ub: Rational },
    #[error("object {id} is wider than the strip including clearances")]
    ObjectTooWide { id: usize },
    #[error("instance JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    /// Strip width `r_x`.
    pub w: Rational,
    /// Height cap `r_y`.
    pub h: Rational,
}

impl Region {
    pub fn extent(&self, s: Dir) -> &Rational {
        match s {
            Dir::X => &self.w,
            Dir::Y => &self.h,
        }
    }
}

/// Clearance vector in the order `(x-, y-, x+, y+)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Clearance {
    pub minus: [Rational; 2],
    pub plus: [Rational; 2],
}

impl Clearance {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(xm: Rational, ym: Rational, xp: Rational, yp: Rational) -> Self {
        Clearance { minus: [xm, ym], plus: [xp, yp] }
    }

    pub fn minus(&self, s: Dir) -> &Rational {
        &self.minus[s.index()]
    }

    pub fn plus(&self, s: Dir) -> &Rational {
        &self.plus[s.index()]
    }

    fn as_array(&self) -> [Rational; 4] {
        [self.minus[0].clone(), self.minus[1].clone(), self.plus[0].clone(), self.plus[1].clone()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectSpec {
    pub id: usize,
    pub d: [Rational; 2],
    pub clear: Clearance,
}

impl ObjectSpec {
    pub fn new(id: usize, dx: Rational, dy: Rational, clear: Clearance) -> Self {
        ObjectSpec { id, d: [dx, dy], clear }
    }

    pub fn dim(&self, s: Dir) -> &Rational {
        &self.d[s.index()]
    }

    /// Physical extent plus both clearances along `s`.
    pub fn total(&self, s: Dir) -> Rational {
        self.clear.minus(s) + self.dim(s) + self.clear.plus(s)
    }

    pub fn area(&self) -> Rational {
        &self.d[0] * &self.d[1]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    region: Region,
    objects: Vec<ObjectSpec>,
}

impl Instance {
    pub fn new(region: Region, objects: Vec<ObjectSpec>) -> Result<Self, PackingError> {
        if !region.w.is_positive() || !region.h.is_positive() {
            return Err(PackingError::BadRegion);
        }
        for (pos, o) in objects.iter().enumerate() {
            if o.id != pos + 1 {
                return Err(PackingError::BadIds { pos, found: o.id });
            }
            if o.d.iter().any(|v| !v.is_positive()) {
                return Err(PackingError::BadObject { id: o.id, reason: "dimensions must be positive".into() });
            }
            if o.clear.as_array().iter().any(Rational::is_negative) {
                return Err(PackingError::BadObject { id: o.id, reason: "clearances must be non-negative".into() });
            }
        }
        let inst = Instance { region, objects };
        for o in &inst.objects {
            for s in Dir::BOTH {
                let (lb, ub) = (inst.lb(o.id, s), inst.ub(o.id, s));
                if lb > ub {
                    return Err(PackingError::EmptyWindow { id: o.id, dir: s, lb, ub });
                }
            }
        }
        Ok(inst)
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn objects(&self) -> &[ObjectSpec] {
        &self.objects
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// Object by 1-based id.
    pub fn object(&self, id: usize) -> &ObjectSpec {
        &self.objects[id - 1]
    }

    /// Same objects in a region with a different height cap. Fails if some
    /// window becomes empty.
    pub fn with_height(&self, h: Rational) -> Result<Self, PackingError> {
        Instance::new(Region { w: self.region.w.clone(), h }, self.objects.clone())
    }

    /// Restriction to two objects, renumbered 1 and 2.
    pub fn pair(&self, i: usize, j: usize) -> Result<Self, PackingError> {
        let mut a = self.object(i).clone();
        let mut b = self.object(j).clone();
        a.id = 1;
        b.id = 2;
        Instance::new(self.region.clone(), vec![a, b])
    }

    fn lb(&self, i: usize, s: Dir) -> Rational {
        let o = self.object(i);
        o.dim(s) / qi(2) + o.clear.minus(s)
    }

    fn ub(&self, i: usize, s: Dir) -> Rational {
        let o = self.object(i);
        self.region.extent(s) - o.dim(s) / qi(2) - o.clear.plus(s)
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            region: RegionFile { w: self.region.w.clone(), h: self.region.h.clone() },
            objects: self
                .objects
                .iter()
                .map(|o| ObjectFile { id: o.id, d: o.d.clone(), clear: o.clear.as_array() })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("instance serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, PackingError> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| PackingError::Json(e.to_string()))?;
        let objects = file
            .objects
            .into_iter()
            .map(|o| {
                let [xm, ym, xp, yp] = o.clear;
                ObjectSpec { id: o.id, d: o.d, clear: Clearance::new(xm, ym, xp, yp) }
            })
            .collect();
        Instance::new(Region { w: file.region.w, h: file.region.h }, objects)
    }

    /// Multiply every length by `factor > 0`.
    pub fn scaled(&self, factor: &Rational) -> Self {
        let sc = |v: &Rational| v * factor;
        Instance {
            region: Region { w: sc(&self.region.w), h: sc(&self.region.h) },
            objects: self
                .objects
                .iter()
                .map(|o| ObjectSpec {
                    id: o.id,
                    d: [sc(&o.d[0]), sc(&o.d[1])],
                    clear: Clearance {
                        minus: [sc(&o.clear.minus[0]), sc(&o.clear.minus[1])],
                        plus: [sc(&o.clear.plus[0]), sc(&o.clear.plus[1])],
                    },
                })
                .collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RegionFile {
    w: Rational,
    h: Rational,
}

#[derive(Serialize, Deserialize)]
struct ObjectFile {
    id: usize,
    d: [Rational; 2],
    clear: [Rational; 4],
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    region: RegionFile,
    objects: Vec<ObjectFile>,
}

/// Per-object windows and per ordered pair precedence margins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedParams {
    n: usize,
    /// `lb[i][s]`, 0-based object index.
    lb: Vec<[Rational; 2]>,
    ub: Vec<[Rational; 2]>,
    /// `pm[k][l][s]`; the diagonal is unused and zero.
    pm: Vec<Vec<[Rational; 2]>>,
}

impl DerivedParams {
    /// Parameters straight from `LB`, `UB` and `PM` values. `lb`/`ub` are
    /// indexed by 0-based object, `pm[k][l]` by 0-based ordered pair.
    pub fn from_raw(
        lb: Vec<[Rational; 2]>,
        ub: Vec<[Rational; 2]>,
        pm: Vec<Vec<[Rational; 2]>>,
    ) -> Result<Self, PackingError> {
        let n = lb.len();
        if ub.len() != n || pm.len() != n || pm.iter().any(|r| r.len() != n) {
            return Err(PackingError::Json("parameter arrays have inconsistent sizes".into()));
        }
        for i in 0..n {
            for s in Dir::BOTH {
                if lb[i][s.index()] > ub[i][s.index()] {
                    return Err(PackingError::EmptyWindow {
                        id: i + 1,
                        dir: s,
                        lb: lb[i][s.index()].clone(),
                        ub: ub[i][s.index()].clone(),
                    });
                }
            }
        }
        Ok(DerivedParams { n, lb, ub, pm })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Lower window bound of 1-based object `i`.
    pub fn lb(&self, i: usize, s: Dir) -> &Rational {
        &self.lb[i - 1][s.index()]
    }

    pub fn ub(&self, i: usize, s: Dir) -> &Rational {
        &self.ub[i - 1][s.index()]
    }

    /// Precedence margin for `k` before `l` along `s` (1-based).
    pub fn pm(&self, k: usize, l: usize, s: Dir) -> &Rational {
        &self.pm[k - 1][l - 1][s.index()]
    }

    /// The natural big-M of the precedence row: `UB_ks + PM_kls - LB_ls`.
    pub fn bm(&self, k: usize, l: usize, s: Dir) -> Rational {
        self.ub(k, s) + self.pm(k, l, s) - self.lb(l, s)
    }

    /// `PM_kls - (UB_ls - LB_ks)`; negative under the strict margin condition.
    pub fn margin_gap(&self, k: usize, l: usize, s: Dir) -> Rational {
        self.pm(k, l, s) - self.ub(l, s) + self.lb(k, s)
    }

    pub fn restricted_to_pair(&self, i: usize, j: usize) -> DerivedParams {
        let ids = [i, j];
        DerivedParams {
            n: 2,
            lb: ids.iter().map(|&a| self.lb[a - 1].clone()).collect(),
            ub: ids.iter().map(|&a| self.ub[a - 1].clone()).collect(),
            pm: ids.iter().map(|&a| ids.iter().map(|&b| self.pm[a - 1][b - 1].clone()).collect()).collect(),
        }
    }
}

pub fn derive_parameters(inst: &Instance) -> DerivedParams {
    let n = inst.len();
    let half = qi(2);
    let mut lb = Vec::with_capacity(n);
    let mut ub = Vec::with_capacity(n);
    for o in inst.objects() {
        lb.push(Dir::BOTH.map(|s| o.dim(s) / &half + o.clear.minus(s)));
        ub.push(Dir::BOTH.map(|s| inst.region().extent(s) - o.dim(s) / &half - o.clear.plus(s)));
    }
    let pm = inst
        .objects()
        .iter()
        .map(|k| {
            inst.objects()
                .iter()
                .map(|l| {
                    if k.id == l.id {
                        [Rational::zero(), Rational::zero()]
                    } else {
                        Dir::BOTH.map(|s| {
                            k.dim(s) / &half + l.dim(s) / &half + k.clear.plus(s).clone().max(l.clear.minus(s).clone())
                        })
                    }
                })
                .collect()
        })
        .collect();
    DerivedParams { n, lb, ub, pm }
}

/// Object centers and the strip height they use.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingSolution {
    /// `centers[i] = [c_ix, c_iy]`, 0-based object index.
    pub centers: Vec<[Rational; 2]>,
    pub h: Rational,
}

impl PackingSolution {
    pub fn center(&self, i: usize, s: Dir) -> &Rational {
        &self.centers[i - 1][s.index()]
    }

    /// Top of the highest object including its upper clearance.
    pub fn height_used(inst: &Instance, centers: &[[Rational; 2]]) -> Rational {
        inst.objects()
            .iter()
            .zip(centers)
            .map(|(o, c)| &c[1] + o.dim(Dir::Y) / qi(2) + o.clear.plus(Dir::Y))
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenConfig {
    pub strip_width: Rational,
    pub min_side: Rational,
    pub max_side: Rational,
    /// Values are rounded to multiples of `1/grid`.
    pub grid: i64,
    pub clearance_prob: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            strip_width: qi(100),
            min_side: qi(5),
            max_side: qi(30),
            grid: 1,
            clearance_prob: 0.5,
        }
    }
}

/// Inverse CDF of Beta(2,5) tabulated on a uniform grid of probabilities.
/// The CDF is the polynomial `1 - (1-x)^6 - 6x(1-x)^5`, inverted by
/// bisection, so the table is identical on every platform.
struct BetaTable {
    quantiles: Vec<f64>,
}

impl BetaTable {
    const SIZE: usize = 1024;

    fn new() -> Self {
        let cdf = |x: f64| {
            let y = 1.0 - x;
            1.0 - y.powi(6) - 6.0 * x * y.powi(5)
        };
        let quantiles = (0..=Self::SIZE)
            .map(|k| {
                let p = k as f64 / Self::SIZE as f64;
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if cdf(mid) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect();
        BetaTable { quantiles }
    }

    fn sample(&self, u: f64) -> f64 {
        let pos = u * Self::SIZE as f64;
        let k = (pos.floor() as usize).min(Self::SIZE - 1);
        let t = pos - k as f64;
        self.quantiles[k] * (1.0 - t) + self.quantiles[k + 1] * t
    }
}

fn round_to_grid(v: f64, grid: i64) -> Rational {
    Rational::new((v * grid as f64).round() as i64, grid)
}

/// Random instance in the "small and square" style: sides in
/// `[min_side, max_side]` from a Beta(2,5) sample, each face receiving a
/// clearance with probability `clearance_prob`, uniform up to the object's
/// extent in that direction. The height cap is the stacked total height, so
/// every object always fits.
pub fn generate_instance(seed: u64, n_objects: usize, cfg: &GenConfig) -> Result<Instance, PackingError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = BetaTable::new();
    let span = (&cfg.max_side - &cfg.min_side).to_f64();
    let lo = cfg.min_side.to_f64();
    let mut objects = Vec::with_capacity(n_objects);
    for id in 1..=n_objects {
        let d = [0, 1].map(|_| {
            let v = round_to_grid(lo + span * table.sample(rng.gen::<f64>()), cfg.grid);
            v.max(cfg.min_side.clone()).min(cfg.max_side.clone())
        });
        let mut side = |s: Dir| {
            if rng.gen_bool(cfg.clearance_prob) {
                let v = round_to_grid(rng.gen::<f64>() * d[s.index()].to_f64(), cfg.grid);
                v.min(d[s.index()].clone())
            } else {
                Rational::zero()
            }
        };
        let clear = Clearance::new(side(Dir::X), side(Dir::Y), side(Dir::X), side(Dir::Y));
        objects.push(ObjectSpec { id, d, clear });
    }
    let cap: Rational = objects.iter().map(|o| o.total(Dir::Y)).sum();
    let cap = if cap.is_positive() { cap } else { qi(1) };
    Instance::new(Region { w: cfg.strip_width.clone(), h: cap }, objects)
}

/// Shelf heuristic: objects sorted by total height, packed left to right in
/// rows; each row's physical base clears the previous row's objects and
/// every relevant clearance.
pub fn greedy_initial_layout(inst: &Instance) -> Result<PackingSolution, PackingError> {
    let two = qi(2);
    for o in inst.objects() {
        if o.total(Dir::X) > inst.region().w {
            return Err(PackingError::ObjectTooWide { id: o.id });
        }
    }
    let mut order: Vec<&ObjectSpec> = inst.objects().iter().collect();
    order.sort_by(|a, b| a.total(Dir::Y).cmp(&b.total(Dir::Y)).then(a.id.cmp(&b.id)));

    // split into rows by x-overflow
    let mut rows: Vec<Vec<(&ObjectSpec, Rational)>> = Vec::new();
    let mut current: Vec<(&ObjectSpec, Rational)> = Vec::new();
    for o in order {
        let lb = o.dim(Dir::X) / &two + o.clear.minus(Dir::X);
        let ub = &inst.region().w - o.dim(Dir::X) / &two - o.clear.plus(Dir::X);
        let cx = match current.last() {
            None => lb.clone(),
            Some((p, pcx)) => {
                let pm = p.dim(Dir::X) / &two
                    + o.dim(Dir::X) / &two
                    + p.clear.plus(Dir::X).clone().max(o.clear.minus(Dir::X).clone());
                (pcx + pm).max(lb.clone())
            }
        };
        if cx <= ub {
            current.push((o, cx));
        } else {
            rows.push(std::mem::take(&mut current));
            current.push((o, lb));
        }
    }
    if !current.is_empty() {
        rows.push(current);
    }

    let mut centers = vec![[Rational::zero(), Rational::zero()]; inst.len()];
    let mut prev: Option<(Rational, Vec<&ObjectSpec>)> = None;
    for row in &rows {
        let max_minus = row.iter().map(|(o, _)| o.clear.minus(Dir::Y).clone()).max().unwrap();
        let base = match &prev {
            None => max_minus,
            Some((pbase, members)) => {
                let top_plus = members
                    .iter()
                    .map(|o| pbase + o.dim(Dir::Y) + o.clear.plus(Dir::Y))
                    .max()
                    .unwrap();
                let top = members.iter().map(|o| pbase + o.dim(Dir::Y)).max().unwrap();
                top_plus.max(top + max_minus)
            }
        };
        for (o, cx) in row {
            centers[o.id - 1] = [cx.clone(), &base + o.dim(Dir::Y) / &two];
        }
        prev = Some((base, row.iter().map(|(o, _)| *o).collect()));
    }
    let h = PackingSolution::height_used(inst, &centers);
    Ok(PackingSolution { centers, h })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    Window { id: usize, dir: Dir, value: Rational, lb: Rational, ub: Rational },
    Overlap { i: usize, j: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn overlapping_pairs(&self) -> Vec<(usize, usize)> {
        self.violations
            .iter()
            .filter_map(|v| match v {
                Violation::Overlap { i, j } => Some((*i, *j)),
                _ => None,
            })
            .collect()
    }
}

/// The four disjuncts of pair `(i, j)` in the order
/// `(i,j,x), (j,i,x), (i,j,y), (j,i,y)`.
pub fn disjunct_order(i: usize, j: usize) -> [(usize, usize, Dir); 4] {
    [(i, j, Dir::X), (j, i, Dir::X), (i, j, Dir::Y), (j, i, Dir::Y)]
}

/// Every `(k, l, s)` precedence term that holds between `i` and `j`.
pub fn satisfied_terms(params: &DerivedParams, sol: &PackingSolution, i: usize, j: usize) -> Vec<(usize, usize, Dir)> {
    let mut out = Vec::new();
    for (k, l, s) in disjunct_order(i, j) {
        if sol.center(k, s) + params.pm(k, l, s) <= *sol.center(l, s) {
            out.push((k, l, s));
        }
    }
    out
}

pub fn validate_layout(inst: &Instance, sol: &PackingSolution) -> ValidationReport {
    let params = derive_parameters(inst);
    let mut violations = Vec::new();
    for o in inst.objects() {
        for s in Dir::BOTH {
            let c = sol.center(o.id, s);
            let (lb, ub) = (params.lb(o.id, s), params.ub(o.id, s));
            if c < lb || c > ub {
                violations.push(Violation::Window { id: o.id, dir: s, value: c.clone(), lb: lb.clone(), ub: ub.clone() });
            }
        }
    }
    for i in 1..=inst.len() {
        for j in i + 1..=inst.len() {
            if satisfied_terms(&params, sol, i, j).is_empty() {
                violations.push(Violation::Overlap { i, j });
            }
        }
    }
    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    pub(crate) fn square_pair() -> Instance {
        let o = |id| ObjectSpec::new(id, qi(2), qi(2), Clearance::zero());
        Instance::new(Region { w: qi(10), h: qi(10) }, vec![o(1), o(2)]).unwrap()
    }

    #[test]
    fn counterexample_parameters() {
        let p = derive_parameters(&square_pair());
        for i in 1..=2 {
            for s in Dir::BOTH {
                assert_eq!(*p.lb(i, s), qi(1));
                assert_eq!(*p.ub(i, s), qi(9));
            }
        }
        for s in Dir::BOTH {
            assert_eq!(*p.pm(1, 2, s), qi(2));
            assert_eq!(*p.pm(2, 1, s), qi(2));
        }
        assert_eq!(p.bm(1, 2, Dir::X), qi(10));
    }

    #[test]
    fn margin_uses_max_of_facing_clearances() {
        let a = ObjectSpec::new(1, qi(2), qi(2), Clearance::new(qi(0), qi(0), qi(1), qi(0)));
        let b = ObjectSpec::new(2, qi(2), qi(2), Clearance::new(qi(3), qi(0), qi(0), qi(0)));
        let inst = Instance::new(Region { w: qi(20), h: qi(20) }, vec![a, b]).unwrap();
        assert_eq!(*derive_parameters(&inst).pm(1, 2, Dir::X), qi(5));
    }

    #[test]
    fn empty_window_rejected() {
        let o = ObjectSpec::new(1, qi(8), qi(2), Clearance::new(qi(2), qi(0), qi(1), qi(0)));
        let err = Instance::new(Region { w: qi(10), h: qi(10) }, vec![o]).unwrap_err();
        assert!(matches!(err, PackingError::EmptyWindow { id: 1, dir: Dir::X, .. }));
    }

    #[test]
    fn greedy_single_and_pair() {
        let one = Instance::new(
            Region { w: qi(10), h: qi(10) },
            vec![ObjectSpec::new(1, qi(4), qi(2), Clearance::zero())],
        )
        .unwrap();
        let s = greedy_initial_layout(&one).unwrap();
        assert_eq!(s.centers[0], [qi(2), qi(1)]);
        assert_eq!(s.h, qi(2));

        let s = greedy_initial_layout(&square_pair()).unwrap();
        assert_eq!(s.h, qi(2));
        assert!(validate_layout(&square_pair(), &s).is_valid());
    }

    #[test]
    fn occluded_clearance_is_reported() {
        // object 2 sits inside object 1's right clearance
        let a = ObjectSpec::new(1, qi(2), qi(2), Clearance::new(qi(0), qi(0), qi(3), qi(0)));
        let b = ObjectSpec::new(2, qi(2), qi(2), Clearance::zero());
        let inst = Instance::new(Region { w: qi(20), h: qi(20) }, vec![a, b]).unwrap();
        let sol = PackingSolution { centers: vec![[qi(1), qi(1)], [qi(4), qi(1)]], h: qi(2) };
        let report = validate_layout(&inst, &sol);
        assert_eq!(report.overlapping_pairs(), vec![(1, 2)]);
        let ok = PackingSolution { centers: vec![[qi(1), qi(1)], [qi(6), qi(1)]], h: qi(2) };
        assert!(validate_layout(&inst, &ok).is_valid());
    }

    #[test]
    fn empty_instance_is_valid() {
        let inst = Instance::new(Region { w: qi(10), h: qi(10) }, vec![]).unwrap();
        let sol = greedy_initial_layout(&inst).unwrap();
        assert!(validate_layout(&inst, &sol).is_valid());
        assert_eq!(sol.h, qi(0));
    }

    #[test]
    fn generator_contract() {
        let cfg = GenConfig::default();
        let a = generate_instance(7, 10, &cfg).unwrap();
        assert_eq!(a, generate_instance(7, 10, &cfg).unwrap());
        assert_eq!(a.len(), 10);
        assert_eq!(a.region().w, qi(100));
        for o in a.objects() {
            for s in Dir::BOTH {
                assert!(*o.dim(s) >= qi(5) && *o.dim(s) <= qi(30));
                for c in [o.clear.minus(s), o.clear.plus(s)] {
                    assert!(!c.is_negative() && c <= o.dim(s));
                }
            }
        }
        let one = generate_instance(3, 1, &cfg).unwrap();
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn json_roundtrip_is_exact() {
        let o = ObjectSpec::new(1, q(5, 2), qi(3), Clearance::new(q(1, 3), qi(0), qi(0), q(7, 4)));
        let inst = Instance::new(Region { w: qi(10), h: q(21, 2) }, vec![o]).unwrap();
        let text = inst.to_json();
        assert!(text.contains("\"5/2\""));
        assert_eq!(Instance::from_json(&text).unwrap(), inst);
    }

    #[test]
    fn zero_clearance_margin_is_half_sum() {
        let inst = generate_instance(11, 6, &GenConfig { clearance_prob: 0.0, ..GenConfig::default() }).unwrap();
        let p = derive_parameters(&inst);
        for k in 1..=6 {
            for l in 1..=6 {
                if k != l {
                    for s in Dir::BOTH {
                        let want = (inst.object(k).dim(s) + inst.object(l).dim(s)) / qi(2);
                        assert_eq!(*p.pm(k, l, s), want);
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn parameters_scale_linearly(seed in 0u64..1000, num in 1i64..7, den in 1i64..5) {
            let inst = generate_instance(seed, 4, &GenConfig::default()).unwrap();
            let lam = q(num, den);
            let a = derive_parameters(&inst);
            let b = derive_parameters(&inst.scaled(&lam));
            for k in 1..=4 {
                for s in Dir::BOTH {
                    prop_assert_eq!(b.lb(k, s).clone(), a.lb(k, s) * &lam);
                    prop_assert_eq!(b.ub(k, s).clone(), a.ub(k, s) * &lam);
                    for l in 1..=4 {
                        if k != l {
                            prop_assert_eq!(b.pm(k, l, s).clone(), a.pm(k, l, s) * &lam);
                            prop_assert_eq!(b.bm(k, l, s), a.bm(k, l, s) * &lam);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn greedy_layouts_validate_over_seeds() {
        let cfg = GenConfig::default();
        for seed in 0..100u64 {
            let n = [10, 15, 20, 25][(seed % 4) as usize];
            let inst = generate_instance(seed, n, &cfg).unwrap();
            let sol = greedy_initial_layout(&inst).unwrap();
            let report = validate_layout(&inst, &sol);
            assert!(report.is_valid(), "seed {seed}: {:?}", report.violations);
            assert_eq!(sol.h, PackingSolution::height_used(&inst, &sol.centers));
            let stacked: Rational = inst.objects().iter().map(|o| o.total(Dir::Y)).sum();
            assert!(sol.h <= stacked);
        }
    }
}
