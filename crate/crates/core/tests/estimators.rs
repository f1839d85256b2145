//! Estimator identities and recovery on simulated patterns.

use gibbsbox::estimate::{
    germ_grain_estimate, mc_mle_estimate, minimize, mple_estimate, takacs_fiksel_estimate, variational_beta,
    ContrastTerms, McmcBudget, OptimizerConfig, TestFunction,
};
use gibbsbox::germ_grain::germ_grain_summary;
use gibbsbox::oracle::{oracle_expectation, OracleConfig, Statistic};
use gibbsbox::sampler::{rejection_samples, sample_poisson, Chain, SamplerConfig, Schedule};
use gibbsbox::stats::mean_se;
use gibbsbox::{BoundaryCondition, EnergyModel, Error, Point, PointConfiguration, Window};

fn square(side: f64) -> Window {
    Window::square(side).unwrap()
}

fn draw(model: &EnergyModel, side: f64, z: f64, beta: f64, seed: u64) -> PointConfiguration {
    let sc = SamplerConfig::new(z, beta, seed).with_schedule(Schedule::new(200, 1, 1));
    let bc = BoundaryCondition::Free;
    Chain::new(model, &square(side), &sc, &bc, 0).unwrap().sample(&sc.schedule).pop().unwrap()
}

fn coarse() -> OptimizerConfig {
    OptimizerConfig {
        grid: 16,
        ..Default::default()
    }
}

#[test]
fn mple_is_takacs_fiksel_with_one_and_h() {
    let model = EnergyModel::strauss(0.5).unwrap();
    let pattern = draw(&model, 15.0, 1.5, 0.8, 1);
    let oc = coarse();
    let mple = mple_estimate(&model, &pattern, &oc, true).unwrap();
    let tf = takacs_fiksel_estimate(&[TestFunction::ConstantOne, TestFunction::LocalEnergy], &model, &pattern, &oc, true).unwrap();
    assert_eq!(mple.z_hat.to_bits(), tf.z_hat.to_bits());
    assert_eq!(mple.beta_hat.to_bits(), tf.beta_hat.to_bits());
    assert!(matches!(
        mple_estimate(&EnergyModel::hard_core(0.5).unwrap(), &pattern, &oc, true),
        Err(Error::UnsupportedModel(_))
    ));
}

#[test]
fn contrast_is_smallest_near_the_truth() {
    let model = EnergyModel::strauss(0.5).unwrap();
    let pattern = draw(&model, 30.0, 1.0, 1.0, 2);
    let fs = [TestFunction::ConstantOne, TestFunction::LocalEnergy];
    let terms = ContrastTerms::build(&model, &fs, &pattern, true, None).unwrap();
    let at_truth = terms.contrast(1.0, 1.0);
    for (z, beta) in [(1.0, 1.5), (1.0, 0.5), (1.5, 1.0), (0.6, 1.0)] {
        assert!(terms.contrast(z, beta) > at_truth, "({z}, {beta})");
    }
}

#[test]
fn poisson_data_give_no_interaction() {
    let window = square(30.0);
    let pattern = sample_poisson(&window, 1.0, 3).unwrap().reindexed(0.5);
    let model = EnergyModel::strauss(0.5).unwrap();
    let r = mple_estimate(&model, &pattern, &coarse(), true).unwrap();
    assert!(r.beta_hat < 0.25, "{r:?}");
    assert!((r.z_hat - 1.0).abs() < 0.15, "{r:?}");
}

#[test]
fn germ_grain_matches_takacs_fiksel_on_the_same_pattern() {
    let model = EnergyModel::area(1.0).unwrap();
    let pattern = draw(&model, 12.0, 1.0, 1.0, 4);
    let window = pattern.window().erode(2.0).unwrap();
    let oc = coarse();
    let summary = germ_grain_summary(&pattern, 1.0, &window);
    let gg = germ_grain_estimate(&summary, &pattern, 1.0, &window, &oc).unwrap();
    let fs = [
        TestFunction::ExposedSurface { radius: 1.0 },
        TestFunction::IsolatedIndicator { radius: 1.0 },
    ];
    let tf = takacs_fiksel_estimate(&fs, &model, &pattern, &oc, true).unwrap();
    assert!((gg.z_hat - tf.z_hat).abs() < 1e-9 && (gg.beta_hat - tf.beta_hat).abs() < 1e-9, "{gg:?} {tf:?}");
    assert_eq!(gg.method, "germ_grain");
}

#[test]
fn variational_two_point_ratio() {
    // φ = (1 − r)², so each point has Δh = 2 − 2(1 − r)/r and |∇h|² = 4(1 − r)²
    let window = Window::new([-2.0, -2.0], [3.0, 2.0]).unwrap();
    let model = EnergyModel::smooth_core(1.0).unwrap();
    for r in [0.2, 0.3, 0.5, 0.7, 0.9] {
        let pair = PointConfiguration::from_points(window, 1.0, [Point::new(0.0, 0.0), Point::new(r, 0.0)]).unwrap();
        let expect = (2.0 - 2.0 * (1.0 - r) / r) / (4.0 * (1.0 - r) * (1.0 - r));
        let got = variational_beta(&model, &pair, false).unwrap();
        assert!((got - expect).abs() < 1e-9, "r = {r}: {got} vs {expect}");
    }
    let apart = PointConfiguration::from_points(window, 1.0, [Point::new(0.0, 0.0), Point::new(2.0, 0.0)]).unwrap();
    assert!(matches!(variational_beta(&model, &apart, false), Err(Error::DegenerateData(_))));
    assert!(variational_beta(&EnergyModel::strauss(1.0).unwrap(), &apart, false).is_err());
}

#[test]
fn mc_mle_recovers_strauss_parameters() {
    let model = EnergyModel::strauss(0.5).unwrap();
    let pattern = draw(&model, 20.0, 2.0, 0.8, 5);
    let oc = coarse();
    let budget = McmcBudget {
        samples: 200,
        seed: 6,
        ..Default::default()
    };
    let r = mc_mle_estimate(&model, &pattern, (1.6, 1.0), &budget, &oc).unwrap();
    assert!((r.z_hat - 2.0).abs() < 0.5 && (r.beta_hat - 0.8).abs() < 0.4, "{r:?}");
    assert!(r.diagnostics.contains_key("effective_sample_size"), "{:?}", r.diagnostics);

    let outside = mc_mle_estimate(&model, &pattern, (50.0, 1.0), &budget, &oc);
    assert!(matches!(outside, Err(Error::InvalidParameter(_))));
}

#[test]
fn optimizer_finds_interior_and_boundary_minima() {
    let oc = OptimizerConfig::default();
    let inner = minimize(|z, b| (z - 2.3).powi(2) + 3.0 * (b - 0.7).powi(2) + 0.5 * (z - 2.3) * (b - 0.7), &oc).unwrap();
    assert!((inner.point[0] - 2.3).abs() < 1e-3 && (inner.point[1] - 0.7).abs() < 1e-3);
    assert!(!inner.on_boundary);
    let edge = minimize(|z, b| (z - 2.0).powi(2) + (b + 1.0).powi(2), &oc).unwrap();
    assert!(edge.on_boundary && edge.point[1] == 0.0);
}

#[test]
fn oracle_conditional_mean_matches_exact_draws_under_frozen_boundary() {
    let window = square(1.5);
    let model = EnergyModel::strauss(0.5).unwrap();
    let outside = vec![Point::new(-0.2, 0.7), Point::new(0.7, 1.7), Point::new(1.6, 0.2)];
    let bc = BoundaryCondition::frozen(&window, outside, 0.5).unwrap();
    let oc = OracleConfig {
        mc_samples: 20_000,
        seed: 7,
        ..Default::default()
    };
    let o = oracle_expectation(Statistic::Count, &model, &window, 1.5, 1.5, &bc, &oc).unwrap();
    let sc = SamplerConfig::new(1.5, 1.5, 8);
    let counts: Vec<f64> = rejection_samples(&model, &window, &sc, &bc, 4000)
        .unwrap()
        .iter()
        .map(|c| c.len() as f64)
        .collect();
    let (m, se) = mean_se(&counts);
    let tol = 4.0 * (se * se + o.std_error * o.std_error).sqrt() + o.truncation_bound;
    assert!((o.estimate - m).abs() < tol, "{} vs {m} ± {tol}", o.estimate);
}
