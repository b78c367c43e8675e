//! Cross-module consistency: the closed forms, the exact sampler, the
//! simulated dynamics and the mean-field limit must tell the same story.

use rankdiff_core::dynamics::simulate_stationary;
use rankdiff_core::finite::monte_carlo_laplace_pair;
use rankdiff_core::rng::stream;
use rankdiff_core::transport::{wq_1d_pair, wq_1d_vs_quantile};
use rankdiff_core::{DriftModel, FiniteLaw, NonlinearLaw, SimulationPlan};

fn asymmetric() -> DriftModel {
    let nodes = [(0.0, 2.0), (0.25, 0.5), (0.5, -0.25), (1.0, -1.125)];
    DriftModel::piecewise_linear_with_sigma2(&nodes, 1.5).unwrap()
}

#[test]
fn exact_sampler_reproduces_closed_form_laplace() {
    let law = FiniteLaw::new(asymmetric(), 6).unwrap();
    for (s, t) in [(0.3, -0.2), (-0.25, 0.1), (0.0, 0.35)] {
        let exact = law.laplace_l2n(s, t).unwrap();
        let mc = monte_carlo_laplace_pair(&law, s, t, 400_000, 17, 8);
        let z = (mc.mean() - exact) / mc.standard_error();
        assert!(z.abs() < 4.0, "(s,t)=({s},{t}): exact {exact}, mc {} ± {}", mc.mean(), mc.standard_error());
    }
}

#[test]
fn one_particle_laplace_approaches_limit() {
    let model = asymmetric();
    let limit = NonlinearLaw::new(model.clone()).unwrap();
    for t in [-0.3, 0.2, 0.4] {
        let target = limit.laplace(t).unwrap();
        let errs: Vec<f64> = [10usize, 100, 1000]
            .iter()
            .map(|&n| (FiniteLaw::new(model.clone(), n).unwrap().laplace_l1n(t).unwrap() - target).abs())
            .collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "t={t}: {errs:?}");
        assert!(errs[2] < 5e-3, "t={t}: {errs:?}");
    }
}

#[test]
fn simulated_dynamics_match_exact_sampler() {
    let model = asymmetric();
    let n = 4;
    let plan = SimulationPlan::with_defaults(0.005, 4000.0, 99).unwrap();
    let sim = simulate_stationary(&model, n, &plan).unwrap();
    let pooled = sim.sample.pooled_coordinates();

    let law = FiniteLaw::new(model, n).unwrap();
    let exact = law.sample(&mut stream(99, 1), sim.sample.len(), 99).unwrap().pooled_coordinates();
    let d = wq_1d_pair(pooled.values(), exact.values(), 1.0).unwrap().distance;
    assert!(d < 0.08, "W1(simulated, exact) = {d}");
}

#[test]
fn finite_marginal_is_closer_to_limit_as_n_grows() {
    let model = DriftModel::linear_with_sigma2(1.0, 2.0).unwrap();
    let limit = NonlinearLaw::new(model.clone()).unwrap();
    let mut prev = f64::INFINITY;
    for (i, n) in [3usize, 30, 300].into_iter().enumerate() {
        let law = FiniteLaw::new(model.clone(), n).unwrap();
        let draws = law.sample_leading(&mut stream(5, i as u64), 60_000, 1, 5).unwrap();
        let d = wq_1d_vs_quantile(draws.values(), |u| limit.phi_split(u, 1.0 - u), 1.0).unwrap().distance;
        assert!(d < prev, "n={n}: W1 = {d} did not drop below {prev}");
        prev = d;
    }
}
