use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clearpack::bnb::BnbStatus;
use clearpack::formulations::Selection;
use clearpack::ideal::{
    known_covers, parametric_campaign, relax, sample_params, solve_iom, verify_cover, CampaignConfig, Circuit,
    IomOptions, PairParams,
};
use clearpack::model::export_lp_text;
use clearpack::oracle::DEFAULT_CAP;
use clearpack::rational::qi;
use clearpack::{
    build, check_pairwise_ideal, derive_parameters, disjunction_oracle, generate_instance, solve_strip,
    validate_layout, BranchRule, Clearance, DerivedParams, Dir, EnumMethod, FormulationKind, FormulationOptions,
    GenConfig, IdealError, Instance, ObjectSpec, OracleResult, PackingSolution, Rational, Region, SolveOptions,
    Verdict,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{pick, switch, RunConfig};
use crate::output::{emit, write_atomic};
use crate::svg;
use crate::{CheckIdealArgs, EnumChoice, GenerateArgs, Mode, OracleCompareArgs, RenderArgs, SolveArgs, VerifyLemmasArgs};

const FRACTIONAL: u8 = 2;

fn load_instance(flag: Option<PathBuf>, cfg: &RunConfig) -> Result<Instance> {
    let path = flag.or_else(|| cfg.instance.clone()).context("an instance is required (--instance)")?;
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Instance::from_json(&text).with_context(|| format!("loading {}", path.display()))
}

fn out_path(flag: Option<PathBuf>, cfg: &RunConfig) -> Option<PathBuf> {
    flag.or_else(|| cfg.out.clone())
}

fn ideal_err(e: IdealError) -> anyhow::Error {
    match e {
        IdealError::TooLarge { .. } => anyhow!("{e}; idealness is checked for two objects, choose them with --pair"),
        e => anyhow!(e),
    }
}

pub fn generate(a: GenerateArgs, cfg: &RunConfig) -> Result<ExitCode> {
    if a.n == 0 {
        bail!("invalid argument: -n must be at least 1");
    }
    let seed = pick(a.seed, cfg.seed, 0);
    let gen = GenConfig { strip_width: a.width, ..GenConfig::default() };
    let inst = generate_instance(seed, a.n, &gen)?;
    let out = out_path(a.out, cfg).context("an output path is required (--out)")?;
    let mut text = inst.to_json();
    text.push('\n');
    write_atomic(&out, text.as_bytes())?;
    let range = |s: Dir| {
        let v: Vec<&Rational> = inst.objects().iter().map(|o| o.dim(s)).collect();
        (v.iter().min().map(|r| r.to_string()), v.iter().max().map(|r| r.to_string()))
    };
    let clearances = inst
        .objects()
        .iter()
        .flat_map(|o| Dir::BOTH.into_iter().flat_map(move |s| [o.clear.minus(s), o.clear.plus(s)]))
        .filter(|c| !c.is_zero())
        .count();
    let ((wx0, wx1), (hy0, hy1)) = (range(Dir::X), range(Dir::Y));
    println!(
        "{} objects, widths {}..{}, heights {}..{}, {clearances} nonzero clearance sides, strip width {} -> {}",
        inst.len(),
        wx0.unwrap_or_default(),
        wx1.unwrap_or_default(),
        hy0.unwrap_or_default(),
        hy1.unwrap_or_default(),
        inst.region().w,
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SolveReport {
    formulation: FormulationKind,
    options: FormulationOptions,
    status: BnbStatus,
    height: Option<Rational>,
    best_bound: Option<Rational>,
    /// `(height - bound) / height`.
    gap: Option<Rational>,
    nodes: usize,
    greedy_height: Rational,
    warm_start_used: bool,
    variables: usize,
    rows: usize,
    layout: Option<PackingSolution>,
    layout_valid: Option<bool>,
}

pub fn solve(a: SolveArgs, cfg: &RunConfig) -> Result<ExitCode> {
    let inst = load_instance(a.instance, cfg)?;
    let kind = pick(a.formulation, cfg.formulation, FormulationKind::SU);
    let form = FormulationOptions {
        static_bounds: switch(a.static_bounds, cfg.static_bounds),
        sequence_pair: switch(a.seq, cfg.sequence_pair),
        branch_priorities: switch(a.branch, cfg.branch_priorities),
    };
    let opts = SolveOptions {
        node_limit: a.node_limit.or(cfg.node_limit),
        time_limit: a.time_limit.or(cfg.time_limit).map(Duration::from_secs_f64),
        use_priorities: form.branch_priorities,
        branching: if form.branch_priorities { BranchRule::PriorityThenMostFractional } else { BranchRule::MostFractional },
        keep_log: a.log.is_some(),
        ..SolveOptions::default()
    };
    let warm = !a.no_warm_start && cfg.warm_start.unwrap_or(true);
    let (sp, outcome) = solve_strip(&inst, kind, form, opts, warm)?;
    if let Some(p) = &a.write_lp {
        write_atomic(p, export_lp_text(&sp.model).as_bytes())?;
    }
    if let Some(p) = &a.log {
        let mut buf = Vec::new();
        outcome.result.write_log(&mut buf)?;
        write_atomic(p, &buf)?;
    }
    let gap = match (&outcome.height, &outcome.result.best_bound) {
        (Some(h), Some(b)) if h.is_positive() => Some((h - b) / h),
        _ => None,
    };
    let report = SolveReport {
        formulation: kind,
        options: form,
        status: outcome.result.status,
        height: outcome.height.clone(),
        best_bound: outcome.result.best_bound.clone(),
        gap,
        nodes: outcome.result.node_count,
        greedy_height: outcome.greedy_height.clone(),
        warm_start_used: outcome.result.warm_start_used,
        variables: sp.model.num_vars(),
        rows: sp.model.rows().len(),
        layout_valid: outcome.layout.as_ref().map(|l| validate_layout(&inst, l).is_valid()),
        layout: outcome.layout.clone(),
    };
    emit(&report, out_path(a.out, cfg).as_deref())?;
    if let (Some(p), Some(layout)) = (&a.render, &outcome.layout) {
        write_atomic(p, svg::render(&inst, layout, svg::DEFAULT_SCALE).as_bytes())?;
    }
    eprintln!(
        "{kind}: status {:?}, h = {}, greedy h = {}, {} nodes",
        report.status,
        report.height.as_ref().map(|h| h.to_string()).unwrap_or_else(|| "-".into()),
        report.greedy_height,
        report.nodes
    );
    Ok(match report.status {
        BnbStatus::Optimal | BnbStatus::NodeLimitReached => ExitCode::SUCCESS,
        BnbStatus::Infeasible | BnbStatus::Unbounded => ExitCode::from(1),
    })
}

/// Window and margin values for `--params`, per object `[x, y]`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    lb: Vec<[Rational; 2]>,
    ub: Vec<[Rational; 2]>,
    pm: Vec<Vec<[Rational; 2]>>,
}

pub fn theorem3_instance() -> Instance {
    let o = |id| ObjectSpec::new(id, qi(2), qi(2), Clearance::zero());
    Instance::new(Region { w: qi(10), h: qi(10) }, vec![o(1), o(2)]).expect("valid instance")
}

fn pair_params(a: &CheckIdealArgs, cfg: &RunConfig) -> Result<DerivedParams> {
    if a.theorem3 {
        return Ok(derive_parameters(&theorem3_instance()));
    }
    if let Some(p) = &a.params {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let f: ParamsFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
        if f.lb.len() != 2 {
            bail!("--params must describe exactly two objects");
        }
        return Ok(DerivedParams::from_raw(f.lb, f.ub, f.pm)?);
    }
    if a.instance.is_some() || cfg.instance.is_some() {
        let inst = load_instance(a.instance.clone(), cfg)?;
        let &[i, j] = a.pair.as_slice() else {
            bail!("--pair takes two object ids, e.g. --pair 1,2");
        };
        if i == j || i == 0 || j == 0 || i.max(j) > inst.len() {
            bail!("--pair {i},{j} does not name two objects of a {}-object instance", inst.len());
        }
        return Ok(derive_parameters(&inst.pair(i, j)?));
    }
    bail!("give parameters with --theorem3, --instance (and --pair) or --params, or sample them with --campaign N")
}

#[derive(Serialize)]
struct IomReport {
    formulation: FormulationKind,
    method: &'static str,
    verdict: Verdict,
    value: Rational,
    variables: Vec<String>,
    point: Vec<Rational>,
    tight_rows: Vec<String>,
    known_covers: usize,
    rounds: usize,
    separated: Vec<Circuit>,
    big_m: Vec<Rational>,
    invalid_big_m: Vec<String>,
    theoretical_big_m: String,
    nodes: usize,
    params: PairParams,
}

pub fn check_ideal(a: CheckIdealArgs, cfg: &RunConfig) -> Result<ExitCode> {
    let kind = pick(a.kind, cfg.formulation, FormulationKind::SU);
    let samples = a.campaign.or(cfg.samples);
    let mode = a.mode.unwrap_or(if a.campaign.is_some() { Mode::Campaign } else { Mode::Enumeration });
    let method = match a.method {
        EnumChoice::Dd => EnumMethod::DoubleDescription,
        EnumChoice::Subsets => EnumMethod::SubsetSearch,
    };
    let out = out_path(a.out.clone(), cfg);
    let fractional = match mode {
        Mode::Campaign => {
            let samples = samples.context("campaign mode needs --campaign N")?;
            let cc = CampaignConfig {
                epsilon: pick(a.eps.clone(), cfg.epsilon.clone(), qi(1)),
                den: pick(a.den, cfg.den, 4),
                r: a.radius,
                seed: pick(a.seed, cfg.seed, 0),
                method,
                window_consistent: pick(a.window_consistent, cfg.window_consistent, true),
                ..CampaignConfig::new(kind, samples)
            };
            if cc.den < 1 || cc.r < 1 || cc.epsilon.is_negative() {
                bail!("invalid argument: need --den >= 1, --radius >= 1 and --eps >= 0");
            }
            let rep = parametric_campaign(&cc).map_err(ideal_err)?;
            emit(&rep, out.as_deref())?;
            eprintln!(
                "{kind}: {} samples, {} fractional ({} on strict window-consistent draws), {} boundary, {} window-inconsistent, {:.1}s",
                rep.samples, rep.fractional, rep.in_scope_fractional, rep.boundary_cases, rep.inconsistent_cases, rep.seconds
            );
            rep.fractional > 0
        }
        Mode::Enumeration => {
            let params = pair_params(&a, cfg)?;
            let rep = check_pairwise_ideal(kind, &params, FormulationOptions::default(), method).map_err(ideal_err)?;
            emit(&rep, out.as_deref())?;
            match &rep.witness {
                Some(w) => eprintln!(
                    "{kind}: fractional vertex ({}) with penalty {} among {} vertices",
                    w.point.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "),
                    w.penalty,
                    rep.vertex_count
                ),
                None => eprintln!("{kind}: ideal, {} vertices, all integral", rep.vertex_count),
            }
            let from_instance = !a.theorem3 && a.params.is_none() && a.pair.len() == 2;
            let ids = if from_instance { [a.pair[0], a.pair[1]] } else { [1, 2] };
            let wide: Vec<String> = clearpack::packing::disjunct_order(1, 2)
                .iter()
                .filter(|&&(k, l, s)| params.margin_gap(k, l, s).is_positive())
                .map(|&(k, l, s)| format!("{}{}{s}", ids[k - 1], ids[l - 1]))
                .collect();
            if !wide.is_empty() {
                eprintln!("note: PM > UB - LB for disjunct(s) {}, which cannot be separated in their windows", wide.join(", "));
            }
            rep.verdict == Verdict::FractionalVertexFound
        }
        Mode::Iom => {
            let params = pair_params(&a, cfg)?;
            let poly = relax(&build(kind, &params, Selection::All, FormulationOptions::default()));
            let covers = match known_covers(kind, 1, 2, false) {
                Ok(f) => clearpack::ideal::flatten(&f),
                Err(IdealError::Unsupported(_)) => Vec::new(),
                Err(e) => return Err(ideal_err(e)),
            };
            let o = solve_iom(&poly, &covers, &IomOptions::default()).map_err(ideal_err)?;
            let verdict = if o.value.is_positive() { Verdict::FractionalVertexFound } else { Verdict::Ideal };
            let rep = IomReport {
                formulation: kind,
                method: "iom",
                verdict,
                value: o.value.clone(),
                variables: poly.vars.iter().map(|v| v.to_string()).collect(),
                point: o.point,
                tight_rows: o.tight_rows,
                known_covers: covers.len(),
                rounds: o.rounds,
                separated: o.separated,
                big_m: o.big_m,
                invalid_big_m: o.invalid_big_m,
                theoretical_big_m: o.theoretical_big_m,
                nodes: o.nodes,
                params: PairParams::from_params(&params),
            };
            emit(&rep, out.as_deref())?;
            eprintln!("{kind}: IOM optimum Phi = {} after {} separation rounds", rep.value, rep.rounds);
            verdict == Verdict::FractionalVertexFound
        }
    };
    Ok(if fractional { ExitCode::from(FRACTIONAL) } else { ExitCode::SUCCESS })
}

#[derive(Serialize, Default)]
struct FamilyTally {
    description: &'static str,
    covers: usize,
    certified: usize,
    not_dependent: usize,
    minimal: usize,
    /// Not minimal, and the side condition predicted it.
    flagged: usize,
    /// Minimality disagrees with the side condition.
    mismatches: usize,
    /// Certificates at the first draw.
    example: Vec<Circuit>,
}

#[derive(Serialize)]
struct LemmaReport {
    formulation: FormulationKind,
    draws: usize,
    seed: u64,
    families: BTreeMap<&'static str, FamilyTally>,
    ok: bool,
}

pub fn verify_lemmas(a: VerifyLemmasArgs, cfg: &RunConfig) -> Result<ExitCode> {
    let kind = pick(a.kind, cfg.formulation, FormulationKind::SU);
    let seed = pick(a.seed, cfg.seed, 0);
    let families = known_covers(kind, 1, 2, a.with_optional).map_err(ideal_err)?;
    // integer windows with margins allowed to reach UB - LB, so side conditions fail often
    let cc = CampaignConfig { epsilon: qi(0), den: 1, r: 6, window_consistent: false, ..CampaignConfig::new(kind, a.draws) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tallies: BTreeMap<&'static str, FamilyTally> = families
        .iter()
        .map(|f| (f.id, FamilyTally { description: f.description, covers: f.covers.len(), ..Default::default() }))
        .collect();
    for draw in 0..a.draws {
        let p = sample_params(&mut rng, &cc).params;
        let poly = relax(&build(kind, &p, Selection::All, FormulationOptions::default()));
        for f in &families {
            let t = tallies.get_mut(f.id).expect("tally per family");
            for c in &f.covers {
                match verify_cover(&poly, &c.rows) {
                    Ok(circ) => {
                        t.certified += 1;
                        let expected = c.minimal_when.holds(&p);
                        t.minimal += circ.minimal as usize;
                        t.flagged += (!circ.minimal && !expected) as usize;
                        t.mismatches += (circ.minimal != expected) as usize;
                        if draw == 0 {
                            t.example.push(circ);
                        }
                    }
                    Err(_) => t.not_dependent += 1,
                }
            }
        }
    }
    let ok = tallies.values().all(|t| t.not_dependent == 0 && t.mismatches == 0);
    for (id, t) in &tallies {
        eprintln!(
            "{id}: {}/{} certified dependent, {} minimal, {} non-minimal where a side quantity vanishes, {} mismatches",
            t.certified,
            t.covers * a.draws,
            t.minimal,
            t.flagged,
            t.mismatches
        );
    }
    let rep = LemmaReport { formulation: kind, draws: a.draws, seed, families: tallies, ok };
    emit(&rep, out_path(a.out, cfg).as_deref())?;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[derive(Serialize)]
struct OracleRow {
    source: String,
    objects: usize,
    oracle: Option<Rational>,
    solved: BTreeMap<String, Option<Rational>>,
    agree: bool,
}

pub fn oracle_compare(a: OracleCompareArgs, cfg: &RunConfig) -> Result<ExitCode> {
    let mut instances: Vec<(String, Instance)> = Vec::new();
    if a.instance.is_some() || cfg.instance.is_some() {
        instances.push(("file".into(), load_instance(a.instance.clone(), cfg)?));
    } else {
        if a.n == 0 || a.count == 0 {
            bail!("invalid argument: -n and --count must be at least 1");
        }
        let seed = pick(a.seed, cfg.seed, 0);
        let gen = GenConfig { strip_width: a.width.clone(), ..GenConfig::default() };
        for k in 0..a.count as u64 {
            instances.push((format!("seed {}", seed + k), generate_instance(seed + k, a.n, &gen)?));
        }
    }
    let mut rows = Vec::new();
    for (source, inst) in instances {
        let oracle = match disjunction_oracle(&inst, DEFAULT_CAP)? {
            OracleResult::Optimal(h) => Some(h),
            OracleResult::Infeasible => None,
        };
        let mut solved = BTreeMap::new();
        for kind in FormulationKind::ALL {
            let (_, out) = solve_strip(&inst, kind, FormulationOptions::default(), SolveOptions::default(), true)?;
            solved.insert(kind.to_string(), out.height);
        }
        let agree = solved.values().all(|h| h == &oracle);
        eprintln!(
            "{source}: oracle {}, formulations {}",
            oracle.as_ref().map(|h| h.to_string()).unwrap_or_else(|| "infeasible".into()),
            if agree { "agree" } else { "DISAGREE" }
        );
        rows.push(OracleRow { source, objects: inst.len(), oracle, solved, agree });
    }
    let ok = rows.iter().all(|r| r.agree);
    emit(&rows, out_path(a.out, cfg).as_deref())?;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn load_layout(path: &Path) -> Result<PackingSolution> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let layout = match v.get("layout") {
        Some(l) if l.is_null() => bail!("{} holds no layout", path.display()),
        Some(l) => l.clone(),
        None => v,
    };
    serde_json::from_value(layout).with_context(|| format!("{} is not a layout", path.display()))
}

pub fn render(a: RenderArgs, cfg: &RunConfig) -> Result<ExitCode> {
    if !(a.scale > 0.0) {
        bail!("invalid argument: --scale must be positive");
    }
    let inst = load_instance(a.instance, cfg)?;
    let sol = load_layout(&a.solution)?;
    if sol.centers.len() != inst.len() {
        bail!("layout has {} centers for {} objects", sol.centers.len(), inst.len());
    }
    let text = svg::render(&inst, &sol, a.scale);
    match out_path(a.out, cfg) {
        Some(p) => write_atomic(&p, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}
