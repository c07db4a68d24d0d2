//! Exact LP-based branch and bound over the model's binaries.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::lp::{LpProblem, Outcome, Simplex};
use crate::model::{MblpModel, ObjSense};
use crate::rational::{q, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchRule {
    #[default]
    MostFractional,
    PriorityThenMostFractional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeOrder {
    #[default]
    BestBound,
    DepthFirst,
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub node_limit: Option<usize>,
    pub time_limit: Option<Duration>,
    pub use_priorities: bool,
    pub branching: BranchRule,
    pub node_order: NodeOrder,
    /// A full assignment installed as the first incumbent when feasible.
    pub warm_start: Option<Vec<Rational>>,
    pub keep_log: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BnbStatus {
    Optimal,
    /// Stopped at the node or time limit; bounds are still valid.
    NodeLimitReached,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Serialize)]
pub struct Incumbent {
    pub point: Vec<Rational>,
    pub objective: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeLog {
    pub node: usize,
    pub depth: usize,
    pub bound: Option<Rational>,
    pub incumbent: Option<Rational>,
    pub branch_var: Option<String>,
    pub outcome: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct BnbResult {
    pub status: BnbStatus,
    pub incumbent: Option<Incumbent>,
    /// In the model's objective sense; `None` when nothing was bounded.
    pub best_bound: Option<Rational>,
    pub node_count: usize,
    pub warm_start_used: bool,
    #[serde(skip)]
    pub log: Vec<NodeLog>,
}

impl BnbResult {
    pub fn objective(&self) -> Option<&Rational> {
        self.incumbent.as_ref().map(|i| &i.objective)
    }

    /// The solve log as JSON lines.
    pub fn write_log(&self, mut w: impl Write) -> std::io::Result<()> {
        for entry in &self.log {
            serde_json::to_writer(&mut w, entry)?;
            writeln!(w)?;
        }
        Ok(())
    }
}

enum NodeResult {
    Branch(Rational, usize, Rational),
    Integral,
    Pruned,
    Infeasible,
    Unbounded,
}

impl NodeResult {
    fn label(&self) -> &'static str {
        match self {
            NodeResult::Branch(..) => "branched",
            NodeResult::Integral => "integral",
            NodeResult::Pruned => "pruned",
            NodeResult::Infeasible => "infeasible",
            NodeResult::Unbounded => "unbounded",
        }
    }
}

struct Node {
    id: usize,
    depth: usize,
    /// Parent LP value in minimisation form.
    bound: Rational,
    parent: Arc<Simplex>,
    var: usize,
    value: Rational,
}

struct Keyed(Node);

impl PartialEq for Keyed {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Keyed {}

impl PartialOrd for Keyed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Keyed {
    // max-heap: smaller bound first, then smaller id (FIFO)
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.bound.cmp(&self.0.bound).then(other.0.id.cmp(&self.0.id))
    }
}

enum Frontier {
    Best(BinaryHeap<Keyed>),
    Depth(VecDeque<Node>),
}

impl Frontier {
    fn pop(&mut self) -> Option<Node> {
        match self {
            Frontier::Best(h) => h.pop().map(|k| k.0),
            Frontier::Depth(s) => s.pop_back(),
        }
    }

    fn push(&mut self, n: Node) {
        match self {
            Frontier::Best(h) => h.push(Keyed(n)),
            Frontier::Depth(s) => s.push_back(n),
        }
    }

    fn min_bound(&self) -> Option<Rational> {
        match self {
            Frontier::Best(h) => h.peek().map(|k| k.0.bound.clone()),
            Frontier::Depth(s) => s.iter().map(|n| n.bound.clone()).min(),
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            Frontier::Best(h) => h.is_empty(),
            Frontier::Depth(s) => s.is_empty(),
        }
    }
}

fn choose_branch(model: &MblpModel, x: &[Rational], opts: &SolveOptions) -> Option<usize> {
    let half = q(1, 2);
    let mut best: Option<(Option<&Rational>, Rational, usize)> = None;
    for j in model.binary_indices() {
        let v = &x[j];
        if v.is_integer() {
            continue;
        }
        let frac = v - v.floor();
        let closeness = &half - (&frac - &half).abs();
        let prio = match (opts.use_priorities, opts.branching) {
            (true, BranchRule::PriorityThenMostFractional) => model.vars()[j].branch_priority.as_ref(),
            _ => None,
        };
        let better = match &best {
            None => true,
            Some((bp, bc, _)) => match prio.cmp(bp) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => closeness > *bc,
            },
        };
        if better {
            best = Some((prio, closeness, j));
        }
    }
    best.map(|b| b.2)
}

/// Branch and bound over `model`. All arithmetic is exact.
pub fn solve_milp(model: &MblpModel, opts: &SolveOptions) -> BnbResult {
    let started = Instant::now();
    let p = LpProblem::from_model(model);
    let flip = model.objective().sense == ObjSense::Maximize;
    let to_model = |v: &Rational| if flip { -v } else { v.clone() };
    let binaries = model.binary_indices();

    let mut incumbent: Option<(Vec<Rational>, Rational)> = None;
    let mut warm_start_used = false;
    let mut root = match &opts.warm_start {
        Some(x0) if model.is_feasible(x0) => {
            let val = model.objective().value(x0);
            incumbent = Some((x0.clone(), if flip { -val } else { val }));
            warm_start_used = true;
            Simplex::with_start(&p, x0)
        }
        _ => Simplex::new(&p),
    };
    let mut log = Vec::new();
    let mut nodes = 0usize;
    let mut next_id = 1usize;
    let mut frontier = match opts.node_order {
        NodeOrder::BestBound => Frontier::Best(BinaryHeap::new()),
        NodeOrder::DepthFirst => Frontier::Depth(VecDeque::new()),
    };
    let finish = |status, incumbent: Option<(Vec<Rational>, Rational)>, bound: Option<Rational>, nodes, log| BnbResult {
        status,
        best_bound: bound.map(|b| to_model(&b)),
        incumbent: incumbent.map(|(point, obj)| Incumbent { point, objective: to_model(&obj) }),
        node_count: nodes,
        warm_start_used,
        log,
    };

    let process = |s: &mut Simplex,
                       depth: usize,
                       id: usize,
                       incumbent: &mut Option<(Vec<Rational>, Rational)>,
                       log: &mut Vec<NodeLog>|
     -> NodeResult {
        let out = s.optimize();
        let mut entry = NodeLog { node: id, depth, bound: None, incumbent: None, branch_var: None, outcome: "" };
        let result = match out {
            Outcome::Optimal => {
                let val = s.objective_value();
                entry.bound = Some(to_model(&val));
                let x = s.values();
                if incumbent.as_ref().is_some_and(|(_, inc)| &val >= inc) {
                    NodeResult::Pruned
                } else if binaries.iter().all(|&j| x[j].is_integer()) {
                    *incumbent = Some((x.to_vec(), val));
                    NodeResult::Integral
                } else {
                    let j = choose_branch(model, x, opts).expect("fractional binary");
                    entry.branch_var = Some(model.vars()[j].var.to_string());
                    NodeResult::Branch(val, j, x[j].clone())
                }
            }
            Outcome::Infeasible => NodeResult::Infeasible,
            Outcome::Unbounded => NodeResult::Unbounded,
            Outcome::IterationLimit => unreachable!(),
        };
        entry.outcome = result.label();
        entry.incumbent = incumbent.as_ref().map(|(_, v)| to_model(v));
        if opts.keep_log {
            log.push(entry);
        }
        result
    };

    let root_out = process(&mut root, 0, 0, &mut incumbent, &mut log);
    nodes += 1;
    match root_out {
        NodeResult::Unbounded => return finish(BnbStatus::Unbounded, incumbent, None, nodes, log),
        NodeResult::Infeasible if incumbent.is_none() => {
            return finish(BnbStatus::Infeasible, None, None, nodes, log)
        }
        NodeResult::Branch(val, j, v) => {
            push_children(&mut frontier, &mut next_id, 1, val, Arc::new(root), j, v, opts.node_order)
        }
        _ => {}
    }

    while !frontier.is_empty() {
        let limit_hit = opts.node_limit.is_some_and(|l| nodes >= l)
            || opts.time_limit.is_some_and(|t| started.elapsed() >= t);
        if limit_hit {
            let open = frontier.min_bound();
            let bound = match (&open, &incumbent) {
                (Some(o), Some((_, inc))) => Some(o.clone().min(inc.clone())),
                (Some(o), None) => Some(o.clone()),
                (None, Some((_, inc))) => Some(inc.clone()),
                (None, None) => None,
            };
            return finish(BnbStatus::NodeLimitReached, incumbent, bound, nodes, log);
        }
        let node = frontier.pop().unwrap();
        if incumbent.as_ref().is_some_and(|(_, inc)| node.bound >= *inc) {
            continue;
        }
        let mut s = (*node.parent).clone();
        drop(node.parent);
        s.set_bounds(node.var, Some(node.value.clone()), Some(node.value.clone()));
        let out = process(&mut s, node.depth, node.id, &mut incumbent, &mut log);
        nodes += 1;
        if let NodeResult::Branch(val, j, v) = out {
            push_children(&mut frontier, &mut next_id, node.depth + 1, val, Arc::new(s), j, v, opts.node_order);
        }
    }
    match incumbent {
        Some((x, v)) => finish(BnbStatus::Optimal, Some((x, v.clone())), Some(v), nodes, log),
        None => finish(BnbStatus::Infeasible, None, None, nodes, log),
    }
}

#[allow(clippy::too_many_arguments)]
fn push_children(
    frontier: &mut Frontier,
    next_id: &mut usize,
    depth: usize,
    bound: Rational,
    parent: Arc<Simplex>,
    var: usize,
    value: Rational,
    order: NodeOrder,
) {
    let down = value.floor();
    let up = value.ceil();
    // depth-first pops the last pushed child: explore the nearer rounding first
    let near_up = (&value - &down) >= q(1, 2);
    let pair = match (order, near_up) {
        (NodeOrder::DepthFirst, true) => [down, up],
        (NodeOrder::DepthFirst, false) => [up, down],
        (NodeOrder::BestBound, _) => [down, up],
    };
    for v in pair {
        frontier.push(Node { id: *next_id, depth, bound: bound.clone(), parent: parent.clone(), var, value: v });
        *next_id += 1;
    }
}
