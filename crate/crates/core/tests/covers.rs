use clearpack::formulations::Selection;
use clearpack::ideal::{
    enumerate_extreme_points, find_circuit, flatten, known_covers, relax, sample_params, separate_circuit, verify_cover,
    CampaignConfig, SeparationMode, DEFAULT_ENUM_CAP,
};
use clearpack::matrix::RatMatrix;
use clearpack::rational::qi;
use clearpack::{build, EnumMethod, FormulationKind, FormulationOptions, IdealError, Rational, RowTag};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const COVERED: [FormulationKind; 3] = [FormulationKind::SU, FormulationKind::RU, FormulationKind::SBM];

fn augmented(poly: &clearpack::ideal::RelaxationPolytope, tags: &[RowTag]) -> Vec<Vec<Rational>> {
    tags.iter()
        .map(|t| {
            let r = poly.rows.iter().chain(&poly.equalities).find(|r| &r.tag == t).unwrap();
            let mut v = r.dense(poly.dim());
            v.push(r.rhs.clone());
            v
        })
        .collect()
}

fn rank(rows: Vec<Vec<Rational>>) -> usize {
    RatMatrix::from_rows(rows).unwrap().rank()
}

#[test]
fn covers_never_sit_in_a_vertex_basis() {
    for kind in COVERED {
        let covers = flatten(&known_covers(kind, 1, 2, true).unwrap());
        let cfg = CampaignConfig { window_consistent: false, ..CampaignConfig::new(kind, 0) };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..40 {
            let p = sample_params(&mut rng, &cfg).params;
            let poly = relax(&build(kind, &p, Selection::All, FormulationOptions::default()));
            for c in &covers {
                let aug = augmented(&poly, &c.rows);
                // dependent as (A | b): all rows of the cover can be tight only on a lower-dimensional face
                assert!(rank(aug) < c.rows.len(), "{kind} {}", c.family);
                assert!(verify_cover(&poly, &c.rows).is_ok());
            }
            // and no vertex has a cover inside a basis of its tight set
            for v in enumerate_extreme_points(&poly, EnumMethod::default(), DEFAULT_ENUM_CAP).unwrap() {
                let tight: Vec<RowTag> = v.tight.iter().map(|&i| poly.rows[i].tag.clone()).collect();
                for c in &covers {
                    if c.rows.iter().all(|t| tight.contains(t) || poly.equalities.iter().any(|e| &e.tag == t)) {
                        assert!(v.degenerate, "{kind}: nondegenerate vertex contains {}", c.family);
                    }
                }
            }
        }
    }
}

#[test]
fn sb_l_has_no_cover_families() {
    assert_eq!(known_covers(FormulationKind::SBL, 1, 2, true), Err(IdealError::Unsupported(FormulationKind::SBL)));
}

#[test]
fn separated_circuits_are_minimal() {
    for kind in FormulationKind::ALL {
        let cfg = CampaignConfig { epsilon: qi(0), den: 1, r: 6, ..CampaignConfig::new(kind, 0) };
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..6 {
            let p = sample_params(&mut rng, &cfg).params;
            let poly = relax(&build(kind, &p, Selection::All, FormulationOptions::default()));
            let verts = enumerate_extreme_points(&poly, EnumMethod::default(), DEFAULT_ENUM_CAP).unwrap();
            for v in verts.iter().filter(|v| v.degenerate).take(4) {
                let mut tags: Vec<RowTag> = v.tight.iter().map(|&i| poly.rows[i].tag.clone()).collect();
                tags.extend(poly.equalities.iter().map(|r| r.tag.clone()));
                for mode in [SeparationMode::SubsetSearch, SeparationMode::Milp { big_m: 100 }] {
                    let c = separate_circuit(&poly, &tags, mode).unwrap();
                    let aug = augmented(&poly, &c.rows);
                    assert_eq!(rank(aug.clone()), c.rows.len() - 1);
                    for skip in 0..aug.len() {
                        let rest: Vec<Vec<Rational>> =
                            aug.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, r)| r.clone()).collect();
                        assert_eq!(rank(rest), c.rows.len() - 1, "{kind}: proper subset dependent");
                    }
                    assert!(c.minimal);
                }
            }
        }
    }
}

#[test]
fn subset_search_finds_a_smallest_circuit() {
    // rows 0, 1, 2 are dependent, rows 3 and 4 repeat each other
    let r = |v: &[i64]| v.iter().map(|&x| qi(x)).collect::<Vec<_>>();
    let rows = vec![r(&[1, 0, 0, 1]), r(&[0, 1, 0, 1]), r(&[1, 1, 0, 2]), r(&[0, 0, 1, 3]), r(&[0, 0, 2, 6])];
    assert_eq!(find_circuit(&rows, SeparationMode::SubsetSearch).unwrap(), vec![3, 4]);
    let independent = vec![r(&[1, 0]), r(&[0, 1])];
    assert_eq!(find_circuit(&independent, SeparationMode::SubsetSearch), Err(IdealError::NotDeficient));
}
