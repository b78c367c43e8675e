//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p rankdiff-core --test acceptance`.

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use rankdiff_core::dynamics::{simulate_stationary, simulate_stationary_refined};
use rankdiff_core::finite::{feasibility, monte_carlo_laplace_pair, plan_epsilon_delta};
use rankdiff_core::quadrature::{gauss_kronrod_real_line, Tolerance};
use rankdiff_core::rng::stream;
use rankdiff_core::sample::{EmpiricalSample, Provenance};
use rankdiff_core::stats::{batch_means, bootstrap_band};
use rankdiff_core::transport::{brute_force_assignment, wq_1d_pair, wq_1d_vs_quantile, wq_kd_assignment};
use rankdiff_core::{DriftModel, FiniteLaw, NonlinearLaw, SimulationPlan};

type Outcome = Result<String, String>;

fn logistic() -> DriftModel {
    DriftModel::linear_with_sigma2(2.0, 2.0).expect("logistic model")
}

fn logistic_laplace(r: f64) -> f64 {
    if r == 0.0 {
        1.0
    } else {
        PI * r / (PI * r).sin()
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: rankdiff_core::Error) -> String {
    e.to_string()
}

fn c1_logistic_closed_forms() -> Outcome {
    let law = NonlinearLaw::new(logistic()).map_err(err)?;
    let mut worst_l = 0.0_f64;
    for r in [-0.9, -0.5, -0.1, 0.1, 0.5, 0.9] {
        let got = law.laplace(r).map_err(err)?;
        let rel = (got / logistic_laplace(r) - 1.0).abs();
        worst_l = worst_l.max(rel);
        ensure(rel <= 1e-8, || format!("L_inf({r}) = {got}, relative error {rel:.2e}"))?;
    }
    let mut rng = stream(101, 0);
    let mut worst_phi = 0.0_f64;
    for _ in 0..1000 {
        let u: f64 = rng.random_range(1e-9..1.0 - 1e-9);
        let got = law.phi(u).map_err(err)?;
        let want = (u / (1.0 - u)).ln();
        worst_phi = worst_phi.max((got - want).abs());
    }
    ensure(worst_phi <= 1e-9, || format!("Phi error {worst_phi:.2e}"))?;
    let centre = law.check_centering().map_err(err)?.abs();
    ensure(centre <= 1e-10, || format!("centering {centre:.2e}"))?;
    Ok(format!("L_inf rel err {worst_l:.1e}, Phi err {worst_phi:.1e}, centering {centre:.1e}"))
}

/// `E[exp(s z_1 + t z_2)]` at n = 2 by integrating along `z = (a, -a)`.
fn n2_line_oracle(law: &FiniteLaw, s: f64, t: f64) -> f64 {
    let integral = |s: f64, t: f64| {
        gauss_kronrod_real_line(
            |a| ((s - t) * a + law.log_density_unnormalized(&[a, -a]).expect("on M_2")).exp(),
            0.0,
            Tolerance::default(),
        )
        .expect("line quadrature")
        .value
    };
    integral(s, t) / integral(0.0, 0.0)
}

fn c2_n2_identities() -> Outcome {
    let law = FiniteLaw::new(logistic(), 2).map_err(err)?;
    let l1 = law.laplace_l1n(0.5).map_err(err)?;
    let l2 = law.laplace_l2n(0.3, -0.2).map_err(err)?;
    ensure((l1 - 4.0 / 3.0).abs() <= 1e-12, || format!("L1n(0.5) = {l1}"))?;
    ensure((l2 - 4.0 / 3.0).abs() <= 1e-12, || format!("L2n(0.3,-0.2) = {l2}"))?;
    let q1 = n2_line_oracle(&law, 0.5, 0.0);
    let q2 = n2_line_oracle(&law, 0.3, -0.2);
    let (r1, r2) = ((l1 / q1 - 1.0).abs(), (l2 / q2 - 1.0).abs());
    ensure(r1 <= 1e-8 && r2 <= 1e-8, || format!("quadrature mismatch {r1:.2e}, {r2:.2e}"))?;
    Ok(format!("closed forms exact to {:.1e}, quadrature rel {:.1e}", (l1 - 4.0 / 3.0).abs().max((l2 - 4.0 / 3.0).abs()), r1.max(r2)))
}

fn c3_n3_oracle() -> Outcome {
    let law = FiniteLaw::new(logistic(), 3).map_err(err)?;
    let tol = Tolerance { abs: 1e-13, rel: 1e-11, max_intervals: 4000 };
    let integral = |s: f64, t: f64| -> Result<f64, String> {
        let outer = gauss_kronrod_real_line(
            |x| {
                gauss_kronrod_real_line(
                    |y| (s * x + t * y + law.log_density_unnormalized(&[x, y, -x - y]).expect("on M_3")).exp(),
                    -0.5 * x,
                    tol,
                )
                .map(|r| r.value)
                .unwrap_or(f64::NAN)
            },
            0.0,
            tol,
        )
        .map_err(err)?;
        Ok(outer.value)
    };
    let z = integral(0.0, 0.0)?;
    let mut worst = 0.0_f64;
    for (s, t) in [(0.3, -0.2), (0.5, 0.3), (-0.6, 0.2), (0.6, -0.5), (-0.4, -0.4)] {
        let got = law.laplace_l2n(s, t).map_err(err)?;
        let want = integral(s, t)? / z;
        let rel = (got / want - 1.0).abs();
        worst = worst.max(rel);
        ensure(rel <= 1e-6, || format!("({s},{t}): closed form {got}, quadrature {want}"))?;
    }
    Ok(format!("5 grid points, worst rel {worst:.1e}"))
}

fn c4_convergence() -> Outcome {
    let model = logistic();
    let limit_law = NonlinearLaw::new(model.clone()).map_err(err)?;
    let limit = limit_law.laplace(0.3).map_err(err)? * limit_law.laplace(-0.2).map_err(err)?;
    let closed = logistic_laplace(0.3) * logistic_laplace(-0.2);
    ensure((limit / closed - 1.0).abs() < 1e-10, || format!("limit {limit} vs closed form {closed}"))?;
    let mut errors = Vec::new();
    for n in [10, 100, 1000, 10_000] {
        let l2 = FiniteLaw::new(model.clone(), n).map_err(err)?.laplace_l2n(0.3, -0.2).map_err(err)?;
        errors.push((l2 - limit).abs());
    }
    ensure(errors.windows(2).all(|w| w[1] < w[0]), || format!("errors not decreasing: {errors:?}"))?;
    ensure(errors[3] < 0.01, || format!("error at n=1e4 is {}", errors[3]))?;
    Ok(format!(
        "limit {limit:.6}, |error| at n=10..1e4: {}",
        errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(", ")
    ))
}

fn c5_sampler_gate() -> Outcome {
    let grid = [(0.2, -0.1), (0.1, 0.2), (-0.2, 0.1), (0.15, 0.0), (0.05, -0.2)];
    let mut worst = 0.0_f64;
    for n in [2, 10, 100] {
        let law = FiniteLaw::new(logistic(), n).map_err(err)?;
        for (g, &(s, t)) in grid.iter().enumerate() {
            let acc = monte_carlo_laplace_pair(&law, s, t, 1_000_000, 500 + 10 * n as u64 + g as u64, 16);
            let exact = law.laplace_l2n(s, t).map_err(err)?;
            let z = (acc.mean() - exact).abs() / acc.standard_error();
            ensure(acc.standard_error() > 0.0, || format!("n={n} ({s},{t}): degenerate estimator"))?;
            worst = worst.max(z);
            ensure(z <= 3.0, || format!("n={n} ({s},{t}): MC {} ± {} vs {exact}", acc.mean(), acc.standard_error()))?;
        }
    }
    Ok(format!("15 checks at 1e6 draws, worst |z| = {worst:.2}"))
}

fn c6_ergodicity() -> Outcome {
    let model = logistic();
    let n = 50;
    let plan = SimulationPlan::with_defaults(1e-3, 2000.0, 2024).map_err(err)?;
    let coarse = simulate_stationary(&model, n, &plan).map_err(err)?;
    let fine = simulate_stationary_refined(&model, n, &plan).map_err(err)?;
    let law = FiniteLaw::new(model, n).map_err(err)?;
    let mut summary = Vec::new();
    for t in [-0.5, -0.25, 0.25, 0.5] {
        // Per retained time, average e^{t z_i} over the exchangeable coordinates.
        let series = |out: &rankdiff_core::SimulationOutput| -> Vec<f64> {
            out.sample.draws().map(|d| d.iter().map(|z| (t * z).exp()).sum::<f64>() / n as f64).collect()
        };
        let bc = batch_means(&series(&coarse), 50);
        let bf = batch_means(&series(&fine), 50);
        let exact = law.laplace_l1n(t).map_err(err)?;
        let z = (bc.mean - exact).abs() / bc.standard_error;
        ensure(z <= 4.0, || format!("t={t}: simulated {} ± {} vs {exact}", bc.mean, bc.standard_error))?;
        let moved = (bf.mean - bc.mean).abs();
        ensure(moved < bc.standard_error, || format!("t={t}: h/2 run moved {moved:.3e} > SE {:.3e}", bc.standard_error))?;
        summary.push(format!("t={t}: z={z:.2}, shift/SE={:.2}", moved / bc.standard_error));
    }
    Ok(format!("ESS {:.0}; {}", coarse.effective_sample_size, summary.join("; ")))
}

fn c7_wasserstein_ladder() -> Outcome {
    let model = logistic();
    let limit = NonlinearLaw::new(model.clone()).map_err(err)?;
    let count = 100_000;
    let quantiles: Vec<f64> = (0..count)
        .map(|i| {
            let u = (i as f64 + 0.5) / count as f64;
            limit.phi_split(u, (count - i) as f64 / count as f64 - 0.5 / count as f64)
        })
        .collect();
    let mut lines = Vec::new();
    for q in [1.0, 2.0] {
        let mut rows = Vec::new();
        for (idx, n) in [2usize, 10, 100, 1000].into_iter().enumerate() {
            let law = FiniteLaw::new(model.clone(), n).map_err(err)?;
            let mut rng = stream(700 + idx as u64, 0);
            let draws = law.sample_leading(&mut rng, count, 1, 700 + idx as u64).map_err(err)?;
            let d = wq_1d_vs_quantile(draws.values(), |u| limit.phi_split(u, 1.0 - u), q).map_err(err)?.distance;
            let (lo, hi) = bootstrap_band(draws.values(), 200, 0.95, &mut stream(700 + idx as u64, 1), |xs| {
                wq_1d_pair(xs, &quantiles, q).map(|r| r.distance).unwrap_or(f64::NAN)
            });
            rows.push((n, d, lo, hi));
        }
        for w in rows.windows(2) {
            let ((n0, d0, _, hi0), (n1, d1, lo1, _)) = (w[0], w[1]);
            ensure(d1 < d0 || lo1 <= hi0, || format!("q={q}: W(n={n1}) = {d1} exceeds W(n={n0}) = {d0} beyond the bands"))?;
        }
        if q == 1.0 {
            ensure(rows[3].1 < 0.05, || format!("W1 at n=1000 is {}", rows[3].1))?;
        }
        lines.push(format!(
            "q={q}: {}",
            rows.iter().map(|r| format!("{:.4}", r.1)).collect::<Vec<_>>().join(" > ")
        ));
    }
    Ok(lines.join("; "))
}

fn c8_transport_solver() -> Outcome {
    let prov = || Provenance { sampler: "acceptance".into(), seed: 0, n: 0 };
    let mut rng = stream(808, 0);
    let mut gauss = |len: usize| -> Vec<f64> { (0..len).map(|_| rng.sample(rand_distr::StandardNormal)).collect() };
    let mut worst = 0.0_f64;
    for trial in 0..100 {
        let n = 1 + trial % 7;
        let k = 1 + trial % 3;
        let q = if trial % 2 == 0 { 1.0 } else { 2.0 };
        let x = EmpiricalSample::new(k, gauss(n * k), prov()).map_err(err)?;
        let y = EmpiricalSample::new(k, gauss(n * k), prov()).map_err(err)?;
        let a = wq_kd_assignment(&x, &y, q).map_err(err)?.distance;
        let b = brute_force_assignment(&x, &y, q).map_err(err)?.distance;
        worst = worst.max((a - b).abs());
        ensure((a - b).abs() <= 1e-10, || format!("trial {trial}: {a} vs {b}"))?;
    }
    let mut worst_1d = 0.0_f64;
    for q in [1.0, 2.0] {
        let x = gauss(500);
        let y = gauss(500);
        let a = wq_kd_assignment(
            &EmpiricalSample::scalar(x.clone(), prov()).map_err(err)?,
            &EmpiricalSample::scalar(y.clone(), prov()).map_err(err)?,
            q,
        )
        .map_err(err)?
        .distance;
        let b = wq_1d_pair(&x, &y, q).map_err(err)?.distance;
        worst_1d = worst_1d.max((a - b).abs());
        ensure((a - b).abs() <= 1e-12, || format!("1-D reduction q={q}: {a} vs {b}"))?;
    }
    Ok(format!("100 instances max diff {worst:.1e}; 1-D reduction diff {worst_1d:.1e}"))
}

fn c9_moment_bound() -> Outcome {
    let model = logistic();
    let rho = 0.5;
    let limit = NonlinearLaw::new(model.clone()).map_err(err)?;
    let bound = 1.05 * (limit.laplace(-rho).map_err(err)? + limit.laplace(rho).map_err(err)?);
    let mut worst = (0usize, 0.0_f64);
    for n in 10..=10_000 {
        let law = FiniteLaw::new(model.clone(), n).map_err(err)?;
        let v = law.laplace_l2n(-rho, 0.0).map_err(err)? + law.laplace_l2n(rho, 0.0).map_err(err)?;
        if v > worst.1 {
            worst = (n, v);
        }
    }
    ensure(worst.1 <= bound, || format!("sup at n={} is {:.6} > bound {bound:.6}", worst.0, worst.1))?;
    Ok(format!("sup over n=10..1e4 is {:.6} (n={}) <= {bound:.6}", worst.1, worst.0))
}

fn c10_feasibility_plan() -> Outcome {
    let model = logistic();
    let mut rng = stream(1010, 0);
    let mut largest = 0usize;
    let mut checked = 0;
    while checked < 100 {
        let (s, t): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if !(s + t).abs().lt(&1.0) {
            continue;
        }
        checked += 1;
        let plan = plan_epsilon_delta(&model, s, t).map_err(err)?;
        largest = largest.max(plan.n0);
        for n in [plan.n0, 2 * plan.n0, 10 * plan.n0] {
            let cert = feasibility(&model, n, s, t);
            ensure(cert.feasible && cert.min_denominator >= 1.0 - plan.alpha_bar - 1e-12, || {
                format!("({s},{t}) n={n}: min denominator {} vs 1 - alpha_bar = {}", cert.min_denominator, 1.0 - plan.alpha_bar)
            })?;
        }
    }
    Ok(format!("100 random points, largest n0 = {largest}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("logistic closed forms", c1_logistic_closed_forms),
        ("n=2 exact identities", c2_n2_identities),
        ("n=3 quadrature oracle", c3_n3_oracle),
        ("L2n -> L_inf x L_inf at (0.3,-0.2)", c4_convergence),
        ("exact sampler gate", c5_sampler_gate),
        ("ergodicity cross-check", c6_ergodicity),
        ("W_q ladder vs Phi", c7_wasserstein_ladder),
        ("assignment solver", c8_transport_solver),
        ("uniform moment bound", c9_moment_bound),
        ("epsilon-delta feasibility plan", c10_feasibility_plan),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("acceptance {:>2} PASS  {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("acceptance {:>2} FAIL  {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} acceptance criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} acceptance criteria passed", criteria.len());
}
