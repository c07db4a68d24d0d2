//! Randomised parameter campaigns: sample pairwise windows and margins on
//! a rational grid and check each relaxation exactly.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_pairwise_ideal, EnumMethod, ExtremePoint, IdealError, PairParams, Verdict};
use crate::model::{FormulationKind, FormulationOptions};
use crate::packing::{disjunct_order, DerivedParams, Dir};
use crate::rational::{qi, Rational};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub kind: FormulationKind,
    pub samples: usize,
    /// Required slack in `PM_kls <= UB_ls - LB_ks - epsilon`.
    pub epsilon: Rational,
    /// Grid denominator of every sampled value.
    pub den: i64,
    /// Region size; windows lie in `[0, r]`.
    pub r: i64,
    pub seed: u64,
    pub method: EnumMethod,
    /// Also require `PM_kls >= LB_ls - LB_ks` and `PM_kls >= UB_ls - UB_ks`,
    /// which every clearance-derived parameter set satisfies. Without it the
    /// window rows loosen when their indicator is set.
    pub window_consistent: bool,
}

impl CampaignConfig {
    pub fn new(kind: FormulationKind, samples: usize) -> Self {
        CampaignConfig {
            kind,
            samples,
            epsilon: qi(1),
            den: 4,
            r: 10,
            seed: 0,
            method: EnumMethod::default(),
            window_consistent: true,
        }
    }
}

/// One draw: `lb`, `ub` per object and direction, `pm` per ordered pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampledParams {
    pub params: DerivedParams,
    /// Some margin sits exactly at `UB_ls - LB_ks`.
    pub boundary: bool,
    pub window_consistent: bool,
}

/// `PM_kls >= max(LB_ls - LB_ks, UB_ls - UB_ks)` for every term.
pub fn window_consistent(p: &DerivedParams) -> bool {
    disjunct_order(1, 2)
        .iter()
        .all(|&(k, l, s)| p.pm(k, l, s) >= &(p.lb(l, s) - p.lb(k, s)) && p.pm(k, l, s) >= &(p.ub(l, s) - p.ub(k, s)))
}

/// Draw a two-object parameter set. `LB` and `UB` are uniform on the grid
/// with `LB <= UB <= r`; each `PM_kls` is uniform on the grid points of
/// `[1/den, UB_ls - LB_ks - epsilon]` (raised to the window-consistent
/// minimum when asked), redrawing when that range is empty.
pub fn sample_params(rng: &mut ChaCha8Rng, cfg: &CampaignConfig) -> SampledParams {
    let top = cfg.r * cfg.den;
    loop {
        let mut lb = vec![[Rational::zero(), Rational::zero()], [Rational::zero(), Rational::zero()]];
        let mut ub = lb.clone();
        for o in 0..2 {
            for s in Dir::BOTH {
                let l = rng.gen_range(0..=top);
                let u = rng.gen_range(l..=top);
                lb[o][s.index()] = Rational::new(l, cfg.den);
                ub[o][s.index()] = Rational::new(u, cfg.den);
            }
        }
        let mut pm = vec![vec![[Rational::zero(), Rational::zero()]; 2]; 2];
        let mut ok = true;
        for (k, l, s) in disjunct_order(1, 2) {
            let (lbk, lbl) = (&lb[k - 1][s.index()], &lb[l - 1][s.index()]);
            let (ubk, ubl) = (&ub[k - 1][s.index()], &ub[l - 1][s.index()]);
            let mut lo = Rational::new(1, cfg.den);
            if cfg.window_consistent {
                lo = lo.max(lbl - lbk).max(ubl - ubk);
            }
            let hi = ubl - lbk - &cfg.epsilon;
            // grid units
            let d = Rational::from(cfg.den);
            let (lo, hi) = ((&lo * &d).ceil().numer(), (&hi * &d).floor().numer());
            match (i64::try_from(lo), i64::try_from(hi)) {
                (Ok(lo), Ok(hi)) if lo <= hi => pm[k - 1][l - 1][s.index()] = Rational::new(rng.gen_range(lo..=hi), cfg.den),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let params = DerivedParams::from_raw(lb, ub, pm).expect("lb <= ub by construction");
        let boundary = disjunct_order(1, 2).iter().any(|&(k, l, s)| params.margin_gap(k, l, s).is_zero());
        let window_consistent = window_consistent(&params);
        return SampledParams { params, boundary, window_consistent };
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignWitness {
    pub sample: usize,
    /// Strict margins and window-consistent parameters.
    pub in_scope: bool,
    pub params: PairParams,
    pub vertex: ExtremePoint,
    pub tight_rows: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignReport {
    pub config: CampaignConfig,
    pub samples: usize,
    pub ideal: usize,
    pub fractional: usize,
    /// Draws with some `PM_kls = UB_ls - LB_ks`; idealness is not claimed there.
    pub boundary_cases: usize,
    /// Draws whose window rows loosen under their indicator.
    pub inconsistent_cases: usize,
    /// Fractional verdicts on strict, window-consistent draws.
    pub in_scope_fractional: usize,
    pub max_vertices: usize,
    pub degenerate_vertices: usize,
    pub witnesses: Vec<CampaignWitness>,
    pub seconds: f64,
}

impl CampaignReport {
    /// No fractional vertex on a strict, window-consistent draw.
    pub fn all_ideal(&self) -> bool {
        self.in_scope_fractional == 0
    }
}

/// Sample `cfg.samples` parameter sets and enumerate each relaxation.
pub fn parametric_campaign(cfg: &CampaignConfig) -> Result<CampaignReport, IdealError> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rep = CampaignReport {
        config: cfg.clone(),
        samples: cfg.samples,
        ideal: 0,
        fractional: 0,
        boundary_cases: 0,
        inconsistent_cases: 0,
        in_scope_fractional: 0,
        max_vertices: 0,
        degenerate_vertices: 0,
        witnesses: Vec::new(),
        seconds: 0.0,
    };
    for sample in 0..cfg.samples {
        let draw = sample_params(&mut rng, cfg);
        let r = check_pairwise_ideal(cfg.kind, &draw.params, FormulationOptions::default(), cfg.method)?;
        let in_scope = !draw.boundary && draw.window_consistent;
        rep.boundary_cases += draw.boundary as usize;
        rep.inconsistent_cases += !draw.window_consistent as usize;
        rep.max_vertices = rep.max_vertices.max(r.vertex_count);
        rep.degenerate_vertices += r.degenerate_vertices;
        match r.verdict {
            Verdict::Ideal => rep.ideal += 1,
            Verdict::FractionalVertexFound => {
                rep.fractional += 1;
                rep.in_scope_fractional += in_scope as usize;
                rep.witnesses.push(CampaignWitness {
                    sample,
                    in_scope,
                    params: r.params,
                    vertex: r.witness.expect("fractional verdict has a witness"),
                    tight_rows: r.witness_tight_rows,
                });
            }
        }
    }
    rep.seconds = start.elapsed().as_secs_f64();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_respect_the_margin_condition() {
        let cfg = CampaignConfig::new(FormulationKind::SU, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let d = sample_params(&mut rng, &cfg);
            assert!(!d.boundary);
            assert!(d.window_consistent);
            for (k, l, s) in disjunct_order(1, 2) {
                let p = &d.params;
                assert!(p.lb(k, s) <= p.ub(k, s));
                assert!(p.ub(k, s) <= &qi(10));
                assert!(p.pm(k, l, s) <= &(p.ub(l, s) - p.lb(k, s) - qi(1)));
                assert!(p.pm(k, l, s).is_positive());
                assert!((p.pm(k, l, s) * &qi(4)).is_integer());
            }
        }
    }

    #[test]
    fn zero_epsilon_reaches_the_boundary() {
        let cfg = CampaignConfig { epsilon: qi(0), den: 1, r: 3, ..CampaignConfig::new(FormulationKind::SU, 0) };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..200).any(|_| sample_params(&mut rng, &cfg).boundary));
    }

    #[test]
    fn small_campaigns() {
        for kind in [FormulationKind::SU, FormulationKind::RU, FormulationKind::SBM] {
            let rep = parametric_campaign(&CampaignConfig { seed: 5, ..CampaignConfig::new(kind, 10) }).unwrap();
            assert_eq!(rep.ideal, 10, "{kind}");
        }
        let rep = parametric_campaign(&CampaignConfig { seed: 5, ..CampaignConfig::new(FormulationKind::SBL, 10) }).unwrap();
        assert!(rep.in_scope_fractional > 0);
    }

    #[test]
    fn inconsistent_windows_break_refined_unary() {
        let cfg = CampaignConfig { seed: 5, window_consistent: false, ..CampaignConfig::new(FormulationKind::RU, 20) };
        let rep = parametric_campaign(&cfg).unwrap();
        assert!(rep.fractional > 0);
        assert!(rep.all_ideal());
        assert!(rep.witnesses.iter().all(|w| !w.in_scope));
    }
}
