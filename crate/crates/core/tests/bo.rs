mod common;

use common::reductions::plain_ei_points;
use mlei::acquisition::InnerOptimizer;
use mlei::bo::{initial_design, run_bo, run_bo_detailed, BoRunConfig, SelectorPolicy};
use mlei::domain::Domain;
use mlei::gp::KernelParams;
use mlei::priors::PriorMean;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bump(x: &[f64]) -> f64 {
    -x.iter().map(|v| (v - 0.3).powi(2)).sum::<f64>()
}

fn small_config(priors: Vec<PriorMean>, selector: SelectorPolicy, seed: u64) -> BoRunConfig {
    let mut c = BoRunConfig::new(
        Domain::continuous(vec![-1.0; 2], vec![1.0; 2]).unwrap(),
        priors,
        selector,
    );
    c.max_iterations = 8;
    c.hyperopt_iters = 60;
    c.inner = InnerOptimizer {
        samples: 200,
        refine_top: 3,
        refine_steps: 20,
        ..InnerOptimizer::default()
    };
    c.seed = seed;
    c
}

#[test]
fn runs_are_deterministic_per_seed() {
    let cfg = small_config(
        vec![PriorMean::Zero, PriorMean::Constant(-1.0)],
        SelectorPolicy::Mlei,
        4,
    );
    let a = run_bo(&cfg, bump).unwrap();
    let b = run_bo(&cfg, bump).unwrap();
    assert_eq!(a, b);
    let other = run_bo(
        &small_config(
            vec![PriorMean::Zero, PriorMean::Constant(-1.0)],
            SelectorPolicy::Mlei,
            5,
        ),
        bump,
    )
    .unwrap();
    assert_ne!(a[0].point, other[0].point);
}

#[test]
fn single_prior_mlei_reduces_to_plain_ei() {
    for seed in 0..4 {
        let mlei = small_config(vec![PriorMean::Constant(-0.2)], SelectorPolicy::Mlei, seed);
        let fixed = small_config(
            vec![PriorMean::Constant(-0.2)],
            SelectorPolicy::FixedPrior(0),
            seed,
        );
        let a: Vec<_> = run_bo(&mlei, bump)
            .unwrap()
            .into_iter()
            .map(|r| r.point)
            .collect();
        let b: Vec<_> = run_bo(&fixed, bump)
            .unwrap()
            .into_iter()
            .map(|r| r.point)
            .collect();
        assert_eq!(a, b);
        assert_eq!(a, plain_ei_points(&mlei, bump));
    }
}

#[test]
fn episode_records_are_consistent() {
    let priors = vec![
        PriorMean::Zero,
        PriorMean::Constant(-0.5),
        PriorMean::Constant(0.5),
    ];
    for selector in [
        SelectorPolicy::Mlei,
        SelectorPolicy::RandomPrior,
        SelectorPolicy::FixedPrior(2),
    ] {
        let cfg = small_config(priors.clone(), selector, 1);
        let out = run_bo_detailed(&cfg, bump).unwrap();
        let recs = &out.records;
        assert_eq!(recs.len(), cfg.max_iterations);
        let mut best = f64::NEG_INFINITY;
        for (i, r) in recs.iter().enumerate() {
            assert_eq!(r.episode, i + 1);
            best = best.max(r.reward);
            assert_eq!(r.best_so_far, best);
            assert_eq!(r.per_prior_log_likelihood.len(), priors.len());
            assert!(cfg.domain.contains(&r.point));
            if i < cfg.init_trials {
                assert_eq!(r.selected_prior, None);
                assert!(r.per_prior_log_eip.is_empty());
            } else {
                assert!(r.selected_prior.unwrap() < priors.len());
                assert_eq!(r.per_prior_log_eip.len(), priors.len());
            }
        }
        if let SelectorPolicy::FixedPrior(i) = selector {
            assert!(recs[cfg.init_trials..]
                .iter()
                .all(|r| r.selected_prior == Some(i)));
        }
        assert!(out
            .models
            .iter()
            .all(|m| m.data().len() == cfg.max_iterations));
        assert_eq!(out.best().unwrap().reward, best);
    }
}

#[test]
fn initial_trials_share_the_stream_across_selectors() {
    let priors = vec![PriorMean::Zero, PriorMean::Constant(-0.5)];
    let a = run_bo(&small_config(priors.clone(), SelectorPolicy::Mlei, 9), bump).unwrap();
    let b = run_bo(&small_config(priors, SelectorPolicy::RandomPrior, 9), bump).unwrap();
    for i in 0..3 {
        assert_eq!(a[i].point, b[i].point);
    }
}

#[test]
fn non_finite_objective_is_reported() {
    let cfg = small_config(vec![PriorMean::Zero], SelectorPolicy::Mlei, 0);
    let err = run_bo(&cfg, |_| f64::NAN).unwrap_err();
    assert!(matches!(
        err,
        mlei::Error::NonFiniteObjective { episode: 1, .. }
    ));
}

#[test]
fn invalid_configurations_are_usage_errors() {
    let mut cfg = small_config(vec![PriorMean::Zero], SelectorPolicy::FixedPrior(3), 0);
    assert!(run_bo(&cfg, bump).unwrap_err().is_usage());
    cfg.selector = SelectorPolicy::Mlei;
    cfg.kernel_init = KernelParams::unit(3);
    assert!(run_bo(&cfg, bump).unwrap_err().is_usage());
    let empty = small_config(vec![], SelectorPolicy::Mlei, 0);
    assert!(run_bo(&empty, bump).unwrap_err().is_usage());
}

#[test]
fn random_design_covers_the_box_uniformly() {
    let pi = std::f64::consts::PI;
    let d = Domain::continuous(vec![-pi; 5], vec![pi; 5]).unwrap();
    let pts = initial_design(&d, 10_000, &mut ChaCha8Rng::seed_from_u64(12)).unwrap();
    for k in 0..5 {
        let mean = pts.iter().map(|p| p[k]).sum::<f64>() / pts.len() as f64;
        assert!(mean.abs() < 0.05, "coordinate {k} mean {mean}");
    }
    assert!(pts.iter().all(|p| d.contains(p)));
}

#[test]
fn finite_domain_runs_pick_candidates() {
    let cands: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64 / 29.0]).collect();
    let mut cfg = BoRunConfig::new(
        Domain::finite(cands.clone()).unwrap(),
        vec![PriorMean::Zero],
        SelectorPolicy::Mlei,
    );
    cfg.max_iterations = 10;
    cfg.kernel_init = KernelParams::new(1.0, vec![0.2], 1e-3).unwrap();
    let recs = run_bo(&cfg, |x| -(x[0] - 0.7).powi(2)).unwrap();
    assert!(recs.iter().all(|r| cands.contains(&r.point)));
}
