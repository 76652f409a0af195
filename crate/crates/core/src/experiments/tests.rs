use super::*;
use crate::bases::{disjoint_indicators, rademacher_basis};
use crate::stepfn::{DyadicInterval, DyadicSet};

fn halves_basis(p: f64) -> Basis {
    let sets = DisjointDyadicSets::new(vec![
        DyadicSet::from(DyadicInterval::new(1, 0).unwrap()),
        DyadicSet::from(DyadicInterval::new(1, 1).unwrap()),
    ])
    .unwrap();
    disjoint_indicators(&sets, p).unwrap()
}

fn small(trials: usize) -> Config {
    Config::new(trials, 11)
}

#[test]
fn theorem1_rademacher_passes() {
    let r = certify_theorem1(&rademacher_basis(4, 4.0).unwrap(), &small(30)).unwrap();
    assert!(r.pass, "{r:#?}");
    assert!(r.meta_f64("max_relative_discrepancy").unwrap() <= 1e-9);
    assert_eq!(r.trials.len(), 30);
}

#[test]
fn theorem1_on_halves_adds_isometry_check() {
    let r = certify_theorem1(&halves_basis(4.0), &small(20)).unwrap();
    assert!(r.pass);
    assert!(r.check("ell_p_isometry").is_some());
    assert!(r.check("unit_vector").unwrap().pass);
}

#[test]
fn example_lp_requires_disjoint_tag() {
    let err = certify_example_lp(&rademacher_basis(2, 4.0).unwrap(), &small(5)).unwrap_err();
    assert_eq!(err, crate::Error::MissingTag("disjoint_supports"));
}

#[test]
fn example_lp_passes_on_generated_bases() {
    for nb in standard_bases(3.0).unwrap() {
        if nb.basis.tags().disjoint_supports {
            let r = certify_example_lp(&nb.basis, &small(20)).unwrap();
            assert!(r.pass, "{}: {r:#?}", nb.label);
        }
    }
}

#[test]
fn square_level_sets_make_squares_measurable() {
    let basis = standard_bases(4.0).unwrap().swap_remove(2).basis;
    let sets = square_level_sets(&basis).unwrap();
    for x in basis.functions() {
        let sq = x.mul(x).unwrap();
        assert_eq!(sq.cond_expect(&sets).unwrap(), sq);
    }
}

#[test]
fn example3_and_example4_pass() {
    let sets = suite::mixed_sets().unwrap();
    assert!(certify_example3(&sets, 4, &small(20), 2.5).unwrap().pass);
    let r = certify_example4(&rademacher_basis(3, 6.0).unwrap(), &small(20)).unwrap();
    assert!(r.pass, "{r:#?}");
    assert!(r.meta_f64("k_hat_max").unwrap() >= 1.0);
}

#[test]
fn example4_rejects_untagged_basis() {
    assert!(matches!(certify_example4(&halves_basis(4.0), &small(2)), Err(crate::Error::MissingTag(_))));
}

#[test]
fn discrete_partition_with_brute_force() {
    let mut cfg = small(10);
    cfg.brute_force_trials = 2;
    let r = certify_discrete_partition(&rademacher_basis(3, 4.0).unwrap(), &cfg).unwrap();
    assert!(r.pass, "{r:#?}");
    assert_eq!(r.check("brute_force_dual").unwrap().observations, 2);
}

#[test]
fn haar_experiment_reports_constants() {
    let family = suite::default_haar_family(3, 4.0, 1).unwrap();
    let r = certify_example5(3, 4.0, &family, &small(20), true).unwrap();
    assert!(r.pass, "{r:#?}");
    for key in ["C", "c1", "c2", "C_below_top_level"] {
        assert!(r.meta_f64(key).unwrap().is_finite(), "{key}");
    }
    assert!(r.meta_f64("C").unwrap() >= 1.0);
}

#[test]
fn khintchine_rademacher_checks() {
    let r = khintchine_ratio(&rademacher_basis(4, 4.0).unwrap(), &small(20)).unwrap();
    assert!(r.pass);
    assert!(r.check("square_equals_ell2").unwrap().pass);
    let r = khintchine_ratio(&halves_basis(4.0), &small(20)).unwrap();
    assert!(r.check("disjoint_ratio_one").unwrap().pass);
}

#[test]
fn reports_are_reproducible() {
    let basis = rademacher_basis(3, 3.0).unwrap();
    let a = certify_theorem1(&basis, &small(10)).unwrap();
    let b = certify_theorem1(&basis, &small(10)).unwrap();
    assert_eq!(reports_to_json(std::slice::from_ref(&a)).unwrap(), reports_to_json(&[b]).unwrap());
    let c = certify_theorem1(&basis, &Config::new(10, 12)).unwrap();
    assert_ne!(a.lhs, c.lhs);
}

#[test]
fn experiment_names_round_trip() {
    for name in ExperimentName::ALL {
        assert_eq!(name.as_str().parse::<ExperimentName>().unwrap(), name);
    }
    assert!("nope".parse::<ExperimentName>().is_err());
}

#[test]
fn suite_rejects_basis_for_haar() {
    let mut opts = SuiteOptions::new(small(2));
    opts.basis = Some(rademacher_basis(2, 4.0).unwrap());
    assert!(matches!(run_experiment(ExperimentName::Haar, 4.0, &opts), Err(crate::Error::Unsupported(_))));
}
