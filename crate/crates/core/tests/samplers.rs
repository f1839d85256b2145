//! Distributional checks of the exact and Metropolis-Hastings samplers.

use gibbsbox::energy::total_energy;
use gibbsbox::oracle::{count_pmf, OracleConfig};
use gibbsbox::sampler::{
    map_replicates, rejection_draw_capped, rejection_samples, rng_for, sample_two_type_wr, sweep_length, Chain,
    SamplerConfig, Schedule, WrVariant,
};
use gibbsbox::stats::{chi_square_gof, chi_square_two_sample};
use gibbsbox::{BoundaryCondition, EnergyModel, Error, Point, Window};

fn square(side: f64) -> Window {
    Window::square(side).unwrap()
}

fn poisson(mean: f64, k: usize) -> f64 {
    let mut p = (-mean).exp();
    for j in 1..=k {
        p *= mean / j as f64;
    }
    p
}

fn chain_counts(model: &EnergyModel, window: &Window, z: f64, beta: f64, bc: &BoundaryCondition, seed: u64, n: usize) -> Vec<usize> {
    let sc = SamplerConfig::new(z, beta, seed).with_schedule(Schedule::new(150, 1, 1));
    map_replicates(n, |i| {
        let mut chain = Chain::new(model, window, &sc, bc, i as u64).unwrap();
        chain.sample(&sc.schedule)[0].len()
    })
}

#[test]
fn beta_zero_counts_are_poisson() {
    let window = square(2.0);
    let bc = BoundaryCondition::Free;
    for model in [EnergyModel::strauss(0.5).unwrap(), EnergyModel::area(0.4).unwrap()] {
        let sc = SamplerConfig::new(1.5, 0.0, 1);
        let exact: Vec<usize> = rejection_samples(&model, &window, &sc, &bc, 2000)
            .unwrap()
            .iter()
            .map(|c| c.len())
            .collect();
        let t = chi_square_gof(&exact, |k| poisson(6.0, k));
        assert!(t.p_value > 1e-3, "{}: rejection {t:?}", model.family_name());
        let mcmc = chain_counts(&model, &window, 1.5, 0.0, &bc, 2, 2000);
        let t = chi_square_gof(&mcmc, |k| poisson(6.0, k));
        assert!(t.p_value > 1e-3, "{}: chain {t:?}", model.family_name());
    }
}

#[test]
fn chain_count_distribution_matches_oracle() {
    let window = Window::new([0.0, 0.0], [2.0, 1.5]).unwrap();
    let model = EnergyModel::strauss(0.6).unwrap();
    let bc = BoundaryCondition::Free;
    let oc = OracleConfig {
        mc_samples: 20_000,
        seed: 3,
        ..Default::default()
    };
    let pmf: Vec<f64> = count_pmf(&model, &window, 1.0, 1.5, &bc, &oc)
        .unwrap()
        .iter()
        .map(|v| v.estimate)
        .collect();
    let counts = chain_counts(&model, &window, 1.0, 1.5, &bc, 4, 2000);
    let t = chi_square_gof(&counts, |k| pmf.get(k).copied().unwrap_or(0.0));
    assert!(t.p_value > 1e-3, "{t:?} pmf {pmf:?}");
}

#[test]
fn frozen_boundary_chain_agrees_with_rejection() {
    // conditional sampling inside a box with a fixed outside configuration
    let window = square(2.0);
    let model = EnergyModel::strauss(0.5).unwrap();
    let outside: Vec<Point> = (0..8)
        .flat_map(|i| {
            let t = 0.25 * i as f64;
            [Point::new(t, -0.2), Point::new(-0.2, t), Point::new(2.1, t)]
        })
        .collect();
    let bc = BoundaryCondition::frozen(&window, outside, 0.5).unwrap();
    let sc = SamplerConfig::new(1.5, 1.0, 5);
    let exact: Vec<usize> = rejection_samples(&model, &window, &sc, &bc, 2000)
        .unwrap()
        .iter()
        .map(|c| c.len())
        .collect();
    let mcmc = chain_counts(&model, &window, 1.5, 1.0, &bc, 6, 2000);
    let t = chi_square_two_sample(&exact, &mcmc);
    assert!(t.p_value > 1e-3, "{t:?}");

    let free = chain_counts(&model, &window, 1.5, 1.0, &BoundaryCondition::Free, 7, 2000);
    let mean = |v: &[usize]| v.iter().sum::<usize>() as f64 / v.len() as f64;
    assert!(mean(&mcmc) < mean(&free), "repulsive boundary should thin the box");
}

#[test]
fn hard_core_and_exclusion_band_are_respected() {
    let window = square(6.0);
    let model = EnergyModel::hard_core(0.4).unwrap();
    let band = BoundaryCondition::exclusion_band(0.5).unwrap();
    let sc = SamplerConfig::new(3.0, 1.0, 8).with_schedule(Schedule::new(50, 50, 10));
    let mut chain = Chain::new(&model, &window, &sc, &band, 0).unwrap();
    for state in chain.sample(&sc.schedule) {
        assert!(!state.is_empty());
        let pts = state.points();
        for (i, p) in pts.iter().enumerate() {
            assert!(window.depth(p) >= 0.5);
            for q in &pts[i + 1..] {
                assert!(p.dist(q) >= 0.4);
            }
        }
        assert!(total_energy(&model, &state, &band).is_finite());
    }
}

#[test]
fn chain_energy_cache_matches_recomputation() {
    let window = square(5.0);
    for model in [
        EnergyModel::strauss(0.7).unwrap(),
        EnergyModel::area(0.5).unwrap(),
        EnergyModel::random_cluster(0.6).unwrap(),
        EnergyModel::smooth_core(0.8).unwrap(),
    ] {
        let sc = SamplerConfig::new(1.5, 0.7, 9);
        let bc = BoundaryCondition::Free;
        let mut chain = Chain::new(&model, &window, &sc, &bc, 0).unwrap();
        chain.run_sweeps(100);
        let direct = total_energy(&model, chain.config(), &bc);
        assert!((chain.state().energy - direct).abs() <= 1e-8 * direct.abs().max(1.0), "{}", model.family_name());
    }
}

#[test]
fn streams_are_independent_and_reproducible() {
    let window = square(4.0);
    let model = EnergyModel::strauss(0.5).unwrap();
    let sc = SamplerConfig::new(1.0, 1.0, 10).with_schedule(Schedule::new(20, 1, 1));
    let bc = BoundaryCondition::Free;
    let draw = |stream| Chain::new(&model, &window, &sc, &bc, stream).unwrap().sample(&sc.schedule)[0].clone();
    assert_eq!(draw(3).points(), draw(3).points());
    assert_ne!(draw(3).points(), draw(4).points());
    let ordered = map_replicates(64, |i| i * i);
    assert!(ordered.iter().enumerate().all(|(i, v)| *v == i * i));
}

#[test]
fn sweep_length_and_rejection_cap() {
    assert_eq!(sweep_length(2.0, &square(10.0)), 200);
    assert_eq!(sweep_length(0.3, &square(1.5)), 1);
    assert_eq!(sweep_length(0.0, &square(3.0)), 1);

    // a dense hard-core system essentially never accepts a Poisson proposal
    let model = EnergyModel::hard_core(1.0).unwrap();
    let mut rng = rng_for(11, 0);
    let r = rejection_draw_capped(&model, &square(10.0), 5.0, 1.0, &BoundaryCondition::Free, 100, &mut rng);
    assert!(matches!(r, Err(Error::RejectionInefficient(_))));
}

#[test]
fn two_type_configurations_keep_types_apart() {
    let window = square(4.0);
    let schedule = Schedule::new(100, 40, 10);
    for variant in [WrVariant::Direct, WrVariant::ViaRandomCluster] {
        let draws = sample_two_type_wr(&window, 0.8, 1.0, 12, variant, &schedule).unwrap();
        assert_eq!(draws.len(), 4);
        for d in &draws {
            assert!(d.min_cross_distance() > 1.0, "{variant:?}");
            for p in d.first.points() {
                assert!(window.depth(p) >= 0.5, "{variant:?}: type-1 disk leaves the window");
            }
        }
    }
}

#[test]
fn two_type_variants_agree_on_type_two_counts() {
    let window = square(3.0);
    let schedule = Schedule::new(150, 1, 1);
    let counts = |variant, base: u64| -> Vec<usize> {
        map_replicates(1000, |i| {
            sample_two_type_wr(&window, 0.6, 1.0, base + i as u64, variant, &schedule).unwrap()[0]
                .second
                .len()
        })
    };
    let t = chi_square_two_sample(&counts(WrVariant::Direct, 13_000), &counts(WrVariant::ViaRandomCluster, 14_000));
    assert!(t.p_value > 1e-3, "{t:?}");
}
