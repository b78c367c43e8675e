//! The seven subcommands. Each writes its reports into the output
//! directory and a `<command>.meta` file holding the wall time, so that the
//! CSV files themselves are byte-identical across runs with the same
//! configuration and seed.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use rankdiff_core::dynamics::{simulate_stationary, SimulationPlan};
use rankdiff_core::finite::{feasibility, FiniteLaw};
use rankdiff_core::quadrature::{gauss_kronrod_real_line, Tolerance};
use rankdiff_core::rng::stream;
use rankdiff_core::stats::{batch_means, bias_corrected_band, bootstrap_band, bootstrap_interval, MeanAccumulator};
use rankdiff_core::transport::{brute_force_assignment, wq_1d_pair, wq_kd_assignment, TransportMethod};
use rankdiff_core::{DriftModel, EmpiricalSample, LaplaceDomainV, NonlinearLaw, Provenance};

use crate::config::{Config, SampleLaw};
use crate::error::{CliError, CliResult};
use crate::output::{csv_with_metadata, num, opt, write_text};
use crate::svg::{Plot, Series};
use crate::{Cli, Command};

/// Everything a command needs besides its own configuration block.
pub struct Context {
    pub cfg: Config,
    pub hash: String,
    pub model: DriftModel,
    pub out: std::path::PathBuf,
    pub strict: bool,
}

impl Context {
    fn metadata(&self, command: &str) -> Vec<String> {
        vec![
            format!("command={command}"),
            format!("seed={}", self.cfg.seed),
            format!("config_hash={}", self.hash),
            format!("model_hash={}", self.cfg.model_hash()),
        ]
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let model = cfg.model.build()?;
    let report = model.validation();
    if cli.command == Command::Validate {
        println!("{report}");
    }
    if !report.passed {
        if cli.command != Command::Validate {
            eprintln!("{report}");
        }
        return Err(CliError::Config(format!("model fails validation: {}", report.message)));
    }
    if cli.command == Command::Validate {
        return Ok(());
    }

    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", cli.out.display())))?;
    let ctx = Context { hash: cfg.hash(), cfg, model, out: cli.out.clone(), strict: cli.strict };
    let start = Instant::now();
    match cli.command {
        Command::Validate => unreachable!(),
        Command::LaplaceTable => laplace_table(&ctx),
        Command::ChaoticityScan => chaoticity_scan(&ctx),
        Command::Sample => sample(&ctx),
        Command::Simulate => simulate(&ctx),
        Command::WassersteinReport => wasserstein_report(&ctx),
        Command::Selfcheck => selfcheck(&ctx),
    }?;
    let meta = format!(
        "command = \"{}\"\nconfig_hash = \"{}\"\nseed = {}\nwall_seconds = {:.3}\n",
        cli.command.name(),
        ctx.hash,
        ctx.cfg.seed,
        start.elapsed().as_secs_f64()
    );
    write_text(&ctx.out, &format!("{}.meta", cli.command.name()), &meta)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Laplace transforms

/// One `(n, s, t)` evaluation. `None` marks an infeasible value.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceRow {
    pub n: usize,
    pub s: f64,
    pub t: f64,
    pub l2n: Option<f64>,
    pub l1n_s: Option<f64>,
    pub l1n_t: Option<f64>,
    pub linf_s: Option<f64>,
    pub linf_t: Option<f64>,
    pub abs_error: Option<f64>,
    pub status: &'static str,
}

/// Checks the grid against `V₂`; strict mode turns any violation into
/// exit 3, otherwise the point is evaluated and flagged.
fn check_grid(ctx: &Context, points: &[[f64; 2]]) -> CliResult<()> {
    let v = LaplaceDomainV::of(&ctx.model);
    for &[s, t] in points {
        if !v.contains_pair(s, t) {
            let msg = format!("(s, t) = ({s}, {t}) is outside V2 = {{s, t, s+t in ({}, {})}}", v.lower, v.upper);
            if ctx.strict {
                return Err(CliError::Domain(msg));
            }
            eprintln!("warning: {msg}; rows are flagged");
        }
    }
    Ok(())
}

pub fn laplace_rows(model: &DriftModel, ns: &[usize], points: &[[f64; 2]]) -> CliResult<Vec<LaplaceRow>> {
    let limit = NonlinearLaw::new(model.clone())?;
    let v = limit.domain();
    let linf = |r: f64| if v.contains(r) { limit.laplace(r).ok() } else { None };
    let cells: Vec<(usize, [f64; 2])> = ns.iter().flat_map(|&n| points.iter().map(move |&p| (n, p))).collect();
    cells
        .par_iter()
        .map(|&(n, [s, t])| {
            let law = FiniteLaw::new(model.clone(), n)?;
            let l2n = law.laplace_l2n(s, t).ok();
            let l1n_s = law.laplace_l1n(s).ok();
            let l1n_t = law.laplace_l1n(t).ok();
            let (linf_s, linf_t) = (linf(s), linf(t));
            let in_v2 = v.contains_pair(s, t);
            let abs_error = match (l2n, linf_s, linf_t) {
                (Some(a), Some(b), Some(c)) if in_v2 => Some((a - b * c).abs()),
                _ => None,
            };
            let status = if l2n.is_none() || l1n_s.is_none() || l1n_t.is_none() {
                "infeasible"
            } else if !in_v2 {
                "outside-V2"
            } else {
                "ok"
            };
            Ok(LaplaceRow { n, s, t, l2n, l1n_s, l1n_t, linf_s, linf_t, abs_error, status })
        })
        .collect()
}

fn check_rows(ctx: &Context, rows: &[LaplaceRow]) -> CliResult<()> {
    for r in rows {
        for v in [r.l2n, r.l1n_s, r.l1n_t, r.linf_s, r.linf_t].into_iter().flatten() {
            if !v.is_finite() {
                return Err(CliError::Numerical(format!("non-finite transform at n={}, ({}, {})", r.n, r.s, r.t)));
            }
        }
        if ctx.strict && r.status != "ok" {
            let cert = feasibility(&ctx.model, r.n, r.s, r.t);
            return Err(CliError::Domain(format!(
                "n={}, (s, t) = ({}, {}): {} (smallest denominator {:.3e})",
                r.n, r.s, r.t, r.status, cert.min_denominator
            )));
        }
    }
    Ok(())
}

fn laplace_table(ctx: &Context) -> CliResult<()> {
    let c = &ctx.cfg.laplace;
    check_grid(ctx, &c.points)?;
    let rows = laplace_rows(&ctx.model, &c.n, &c.points)?;
    check_rows(ctx, &rows)?;
    let (mut w, path) = csv_with_metadata(&ctx.out, "laplace_table.csv", &ctx.metadata("laplace-table"))?;
    w.write_record(["n", "s", "t", "L2n", "L1n_s", "L1n_t", "Linf_s", "Linf_t", "abs_error", "status", "config_hash"])?;
    for r in &rows {
        w.write_record([
            r.n.to_string(),
            num(r.s),
            num(r.t),
            opt(r.l2n),
            opt(r.l1n_s),
            opt(r.l1n_t),
            opt(r.linf_s),
            opt(r.linf_t),
            opt(r.abs_error),
            r.status.to_string(),
            ctx.hash.clone(),
        ])?;
    }
    w.flush()?;
    println!("{:>8} {:>8} {:>8} {:>14} {:>12}  status", "n", "s", "t", "L2n", "abs_error");
    for r in &rows {
        println!(
            "{:>8} {:>8} {:>8} {:>14} {:>12}  {}",
            r.n,
            r.s,
            r.t,
            r.l2n.map(|v| format!("{v:.10}")).unwrap_or("-".into()),
            r.abs_error.map(|v| format!("{v:.3e}")).unwrap_or("-".into()),
            r.status
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

/// Least-squares slope of `log err` against `log n` over positive errors.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn chaoticity_scan(ctx: &Context) -> CliResult<()> {
    let c = &ctx.cfg.laplace;
    check_grid(ctx, &c.points)?;
    let rows = laplace_rows(&ctx.model, &c.n, &c.points)?;
    check_rows(ctx, &rows)?;
    let meta = ctx.metadata("chaoticity-scan");
    let (mut w, path) = csv_with_metadata(&ctx.out, "chaoticity_scan.csv", &meta)?;
    w.write_record(["n", "s", "t", "L2n", "Linf_product", "abs_error", "status", "config_hash"])?;
    for r in &rows {
        let product = r.linf_s.zip(r.linf_t).map(|(a, b)| a * b);
        w.write_record([
            r.n.to_string(),
            num(r.s),
            num(r.t),
            opt(r.l2n),
            opt(product),
            opt(r.abs_error),
            r.status.to_string(),
            ctx.hash.clone(),
        ])?;
    }
    w.flush()?;

    let (mut fit, fit_path) = csv_with_metadata(&ctx.out, "chaoticity_fit.csv", &meta)?;
    fit.write_record(["s", "t", "first_error", "last_error", "slope", "config_hash"])?;
    let mut series = Vec::new();
    for &[s, t] in &c.points {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.s == s && r.t == t)
            .filter_map(|r| r.abs_error.map(|e| (r.n as f64, e)))
            .collect();
        let slope = log_log_slope(&pts);
        fit.write_record([
            num(s),
            num(t),
            opt(pts.first().map(|p| p.1)),
            opt(pts.last().map(|p| p.1)),
            opt(slope),
            ctx.hash.clone(),
        ])?;
        println!(
            "(s, t) = ({s}, {t}): error {} -> {}, fitted log-log slope {}",
            pts.first().map(|p| format!("{:.3e}", p.1)).unwrap_or("-".into()),
            pts.last().map(|p| format!("{:.3e}", p.1)).unwrap_or("-".into()),
            slope.map(|v| format!("{v:.3}")).unwrap_or("-".into())
        );
        series.push(Series { label: format!("(s,t)=({s},{t})"), points: pts });
    }
    fit.flush()?;
    let plot = Plot {
        title: "|L2n(s,t) - Linf(s) Linf(t)|".into(),
        x_label: "n".into(),
        y_label: "absolute error".into(),
        log_x: true,
        log_y: true,
        series,
    };
    let svg = write_text(&ctx.out, "chaoticity_scan.svg", &plot.render())?;
    println!("wrote {}, {}, {}", path.display(), fit_path.display(), svg.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// Sampling

/// Mean of `exp(t x)` over the first coordinate, with its standard error.
fn mgf_estimate(sample: &EmpiricalSample, t: f64) -> MeanAccumulator {
    let mut acc = MeanAccumulator::default();
    sample.draws().for_each(|d| acc.push((t * d[0]).exp()));
    acc
}

fn gate(label: &str, acc: &MeanAccumulator, exact: f64) -> CliResult<()> {
    let z = (acc.mean() - exact).abs() / acc.standard_error();
    println!(
        "{label}: E[exp(t z_1)] = {:.6} ± {:.2e} vs closed form {exact:.6} ({z:.2} SE)",
        acc.mean(),
        acc.standard_error()
    );
    if z.is_nan() || z > 3.0 {
        return Err(CliError::Numerical(format!("{label} sampler gate failed: {z:.2} standard errors")));
    }
    Ok(())
}

fn write_draws(ctx: &Context, name: &str, sample: &EmpiricalSample, extra: &[String]) -> CliResult<()> {
    let mut meta = ctx.metadata("sample");
    meta.extend_from_slice(extra);
    meta.push(format!("sampler={}", sample.provenance.sampler));
    let (mut w, path) = csv_with_metadata(&ctx.out, name, &meta)?;
    let mut header: Vec<String> = (1..=sample.dim()).map(|i| format!("z_{i}")).collect();
    header.push("config_hash".into());
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(sample.dim() + 1);
    for d in sample.draws() {
        record.clear();
        record.extend(d.iter().map(|&x| num(x)));
        record.push(ctx.hash.clone());
        w.write_record(&record)?;
    }
    w.flush()?;
    println!("wrote {} ({} draws)", path.display(), sample.len());
    Ok(())
}

fn sample(ctx: &Context) -> CliResult<()> {
    let c = &ctx.cfg.sample;
    let seed = ctx.cfg.seed;
    let v = LaplaceDomainV::of(&ctx.model);
    if matches!(c.law, SampleLaw::Finite | SampleLaw::Both) {
        let law = FiniteLaw::new(ctx.model.clone(), c.n)?;
        let draws = law.sample(&mut stream(seed, 0), c.count, seed)?;
        let exact = law.laplace_l1n(c.gate_t).map_err(|e| CliError::Domain(format!("gate_t: {e}")))?;
        if law.laplace_l1n(2.0 * c.gate_t).is_err() {
            eprintln!("warning: exp(t z_1) has infinite variance at t = {}; the gate is unreliable", c.gate_t);
        }
        gate("finite law", &mgf_estimate(&draws, c.gate_t), exact)?;
        if c.write_draws {
            write_draws(ctx, "samples_finite.csv", &draws, &[format!("n={}", c.n), format!("gate_t={}", c.gate_t)])?;
        }
    }
    if matches!(c.law, SampleLaw::Nonlinear | SampleLaw::Both) {
        let limit = NonlinearLaw::new(ctx.model.clone())?;
        let draws = limit.sample(&mut stream(seed, 1), c.count, seed)?;
        v.check(c.gate_t).map_err(|e| CliError::Domain(format!("gate_t: {e}")))?;
        if !v.contains(2.0 * c.gate_t) {
            eprintln!("warning: exp(t x) has infinite variance at t = {}; the gate is unreliable", c.gate_t);
        }
        gate("limit law", &mgf_estimate(&draws, c.gate_t), limit.laplace(c.gate_t)?)?;
        if c.write_draws {
            write_draws(ctx, "samples_nonlinear.csv", &draws, &[format!("gate_t={}", c.gate_t)])?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Simulation

fn simulate(ctx: &Context) -> CliResult<()> {
    let c = &ctx.cfg.simulate;
    let mut plan = SimulationPlan::with_defaults(c.h, c.horizon, ctx.cfg.seed)?;
    if let Some(b) = c.burn_in {
        plan.burn_in = b;
    }
    if let Some(th) = c.thinning {
        plan.thinning = th;
    }
    plan.validate()?;
    let out = simulate_stationary(&ctx.model, c.n, &plan)?;
    let n = c.n;

    if c.write_states {
        let mut meta = ctx.metadata("simulate");
        meta.extend([
            format!("h={}", plan.h),
            format!("horizon={}", plan.horizon),
            format!("burn_in={}", plan.burn_in),
            format!("thinning={}", plan.thinning),
            format!("n={n}"),
        ]);
        let (mut w, path) = csv_with_metadata(&ctx.out, "simulate_states.csv", &meta)?;
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("z_{i}")));
        header.push("config_hash".into());
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(n + 2);
        for (time, d) in out.times.iter().zip(out.sample.draws()) {
            record.clear();
            record.push(num(*time));
            record.extend(d.iter().map(|&x| num(x)));
            record.push(ctx.hash.clone());
            w.write_record(&record)?;
        }
        w.flush()?;
        println!("wrote {} ({} states)", path.display(), out.sample.len());
    }

    let law = FiniteLaw::new(ctx.model.clone(), n)?;
    let (mut w, path) = csv_with_metadata(&ctx.out, "simulate_summary.csv", &ctx.metadata("simulate"))?;
    w.write_record(["n", "t", "estimate", "batch_se", "L1n", "z_score", "ess", "config_hash"])?;
    for &t in &c.t {
        // Exchangeable coordinates: average exp(t z_i) over i at each retained time.
        let series: Vec<f64> = out.sample.draws().map(|d| d.iter().map(|z| (t * z).exp()).sum::<f64>() / n as f64).collect();
        let bm = batch_means(&series, c.batches);
        let exact = law.laplace_l1n(t).ok();
        let z = exact.map(|e| (bm.mean - e).abs() / bm.standard_error);
        if !bm.mean.is_finite() {
            return Err(CliError::Numerical(format!("non-finite estimate at t = {t}")));
        }
        w.write_record([
            n.to_string(),
            num(t),
            num(bm.mean),
            num(bm.standard_error),
            opt(exact),
            opt(z),
            num(out.effective_sample_size),
            ctx.hash.clone(),
        ])?;
        println!(
            "t = {t:>6}: simulated {:.6} ± {:.2e}, closed form {}, {} SE",
            bm.mean,
            bm.standard_error,
            exact.map(|e| format!("{e:.6}")).unwrap_or("infeasible".into()),
            z.map(|z| format!("{z:.2}")).unwrap_or("-".into())
        );
    }
    w.flush()?;
    println!("effective sample size of z_1: {:.0}; wrote {}", out.effective_sample_size, path.display());
    if out.effective_sample_size < c.min_ess {
        return Err(CliError::Numerical(format!(
            "effective sample size {:.1} below the floor {}",
            out.effective_sample_size, c.min_ess
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Wasserstein distances

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceRow {
    /// `None` for the limit-versus-limit smoke row.
    pub n: Option<usize>,
    pub k: usize,
    pub q: f64,
    pub count: usize,
    pub distance: f64,
    pub method: TransportMethod,
    pub lower: f64,
    pub upper: f64,
}

fn quantile_grid(limit: &NonlinearLaw, count: usize) -> Vec<f64> {
    let m = count as f64;
    (0..count)
        .map(|i| limit.phi_split((i as f64 + 0.5) / m, (count - i) as f64 / m - 0.5 / m))
        .collect()
}

/// Bias-corrected bootstrap band of the assignment distance `estimate`,
/// resampling both point clouds.
fn assignment_band(x: &EmpiricalSample, y: &EmpiricalSample, q: f64, estimate: f64, resamples: usize, seed: u64) -> CliResult<(f64, f64)> {
    let k = x.dim();
    let count = x.len();
    let stats: CliResult<Vec<f64>> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, 10_000 + b as u64);
            let mut pick = |s: &EmpiricalSample| -> Vec<f64> {
                (0..count).flat_map(|_| s.draw(rng.random_range(0..count)).to_vec()).collect()
            };
            let (xb, yb) = (pick(x), pick(y));
            let prov = || x.provenance.clone();
            let d = wq_kd_assignment(&EmpiricalSample::new(k, xb, prov())?, &EmpiricalSample::new(k, yb, prov())?, q)?;
            Ok(d.distance)
        })
        .collect();
    Ok(bias_corrected_band(stats?, estimate, 0.95))
}

pub fn wasserstein_rows(ctx: &Context) -> CliResult<Vec<DistanceRow>> {
    let c = &ctx.cfg.wasserstein;
    let seed = ctx.cfg.seed;
    let limit = NonlinearLaw::new(ctx.model.clone())?;
    let quantiles = quantile_grid(&limit, c.count);
    let mut rows = Vec::new();
    for (idx, &n) in c.n.iter().enumerate() {
        let law = FiniteLaw::new(ctx.model.clone(), n)?;
        let draws = law.sample_leading(&mut stream(seed, 100 + idx as u64), c.count, 1, seed)?;
        for &q in &c.q {
            let distance = wq_1d_pair(draws.values(), &quantiles, q)?.distance;
            let (lower, upper) = bootstrap_band(draws.values(), c.bootstrap.max(1), 0.95, &mut stream(seed, 200 + idx as u64), |xs| {
                wq_1d_pair(xs, &quantiles, q).map(|r| r.distance).unwrap_or(f64::NAN)
            });
            rows.push(DistanceRow { n: Some(n), k: 1, q, count: c.count, distance, method: TransportMethod::Quantile1d, lower, upper });
        }
        if c.pair_count > 0 {
            let pairs = law.sample_leading(&mut stream(seed, 300 + idx as u64), c.pair_count, 2, seed)?;
            let a = limit.sample(&mut stream(seed, 400 + 2 * idx as u64), c.pair_count, seed)?;
            let b = limit.sample(&mut stream(seed, 401 + 2 * idx as u64), c.pair_count, seed)?;
            let product: Vec<f64> = a.values().iter().zip(b.values()).flat_map(|(&u, &v)| [u, v]).collect();
            let product = EmpiricalSample::new(2, product, a.provenance.clone())?;
            for &q in &c.q {
                let d = wq_kd_assignment(&pairs, &product, q)?;
                let (lower, upper) = assignment_band(&pairs, &product, q, d.distance, c.bootstrap.clamp(1, 100), seed + idx as u64)?;
                rows.push(DistanceRow {
                    n: Some(n),
                    k: 2,
                    q,
                    count: c.pair_count,
                    distance: d.distance,
                    method: d.method,
                    lower,
                    upper,
                });
            }
        }
    }
    if c.smoke {
        // Two independent samples of the limit law; the band is the null
        // distribution obtained by splitting resamples of the pooled draws.
        let x = limit.sample(&mut stream(seed, 500), c.count, seed)?;
        let y = limit.sample(&mut stream(seed, 501), c.count, seed)?;
        let pooled: Vec<f64> = x.values().iter().chain(y.values()).copied().collect();
        for &q in &c.q {
            let distance = wq_1d_pair(x.values(), y.values(), q)?.distance;
            let half = c.count;
            let (lower, upper) = bootstrap_interval(&pooled, c.bootstrap.max(1), 0.95, &mut stream(seed, 502), |xs| {
                wq_1d_pair(&xs[..half], &xs[half..], q).map(|r| r.distance).unwrap_or(f64::NAN)
            });
            rows.push(DistanceRow { n: None, k: 1, q, count: c.count, distance, method: TransportMethod::Quantile1d, lower, upper });
        }
    }
    // the bias shift can push a band below zero; distances cannot go there
    for r in &mut rows {
        r.lower = r.lower.max(0.0);
    }
    if let Some(bad) = rows.iter().find(|r| !(r.distance.is_finite() && r.lower.is_finite() && r.upper.is_finite())) {
        return Err(CliError::Numerical(format!("non-finite distance in row {bad:?}")));
    }
    Ok(rows)
}

fn wasserstein_report(ctx: &Context) -> CliResult<()> {
    let rows = wasserstein_rows(ctx)?;
    let (mut w, path) = csv_with_metadata(&ctx.out, "wasserstein.csv", &ctx.metadata("wasserstein-report"))?;
    w.write_record(["n", "k", "q", "N", "distance", "method", "seed", "lower", "upper", "config_hash"])?;
    for r in &rows {
        w.write_record([
            r.n.map(|n| n.to_string()).unwrap_or("inf".into()),
            r.k.to_string(),
            num(r.q),
            r.count.to_string(),
            num(r.distance),
            r.method.to_string(),
            ctx.cfg.seed.to_string(),
            num(r.lower),
            num(r.upper),
            ctx.hash.clone(),
        ])?;
    }
    w.flush()?;
    let mut series: Vec<Series> = Vec::new();
    for r in rows.iter() {
        let Some(n) = r.n else {
            println!(
                "limit vs limit, q = {}: W = {:.4e}, null band [{:.4e}, {:.4e}] {}",
                r.q,
                r.distance,
                r.lower,
                r.upper,
                if r.distance <= r.upper { "(consistent with 0)" } else { "(outside band)" }
            );
            continue;
        };
        println!("n = {n:>6}, k = {}, q = {}: W = {:.4e}  [{:.4e}, {:.4e}]", r.k, r.q, r.distance, r.lower, r.upper);
        let label = format!("k={}, q={}", r.k, r.q);
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push((n as f64, r.distance)),
            None => series.push(Series { label, points: vec![(n as f64, r.distance)] }),
        }
    }
    let plot = Plot {
        title: "W_q(finite-n marginal, limit)".into(),
        x_label: "n".into(),
        y_label: "distance".into(),
        log_x: true,
        log_y: true,
        series,
    };
    let svg = write_text(&ctx.out, "wasserstein.svg", &plot.render())?;
    println!("wrote {}, {}", path.display(), svg.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// Oracle suite

#[derive(Debug, Clone)]
pub struct CheckRow {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
}

impl CheckRow {
    pub fn passed(&self) -> bool {
        self.measured <= self.tolerance
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

/// Oracle checks on the logistic demo model plus consistency checks on the
/// configured model.
pub fn selfcheck_rows(model: &DriftModel, seed: u64) -> CliResult<Vec<CheckRow>> {
    use std::f64::consts::PI;
    let mut rows = Vec::new();
    let mut push = |name: &str, measured: f64, tolerance: f64| {
        rows.push(CheckRow { name: name.into(), measured: if measured.is_nan() { f64::INFINITY } else { measured }, tolerance })
    };

    let logistic = DriftModel::linear_with_sigma2(2.0, 2.0)?;
    let limit = NonlinearLaw::new(logistic.clone())?;
    let worst_l = [-0.9, -0.5, -0.1, 0.1, 0.5, 0.9]
        .iter()
        .map(|&r| limit.laplace(r).map(|v| rel(v, PI * r / (PI * r).sin())))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    push("logistic L_inf(r) vs pi r / sin(pi r)", worst_l, 1e-8);
    let worst_phi = (1..1000)
        .map(|i| {
            let u = i as f64 / 1000.0;
            (limit.phi_split(u, 1.0 - u) - (u / (1.0 - u)).ln()).abs()
        })
        .fold(0.0, f64::max);
    push("logistic Phi vs log(u/(1-u))", worst_phi, 1e-9);
    push("logistic centering", limit.check_centering()?.abs(), 1e-10);

    let n2 = FiniteLaw::new(logistic.clone(), 2)?;
    push("n=2 L1n(0.5) = 4/3", (n2.laplace_l1n(0.5)? - 4.0 / 3.0).abs(), 1e-12);
    push("n=2 L2n(0.3,-0.2) = 4/3", (n2.laplace_l2n(0.3, -0.2)? - 4.0 / 3.0).abs(), 1e-12);
    let tol = Tolerance { abs: 1e-13, rel: 1e-11, max_intervals: 4000 };
    let line = |s: f64, t: f64| -> CliResult<f64> {
        let f = |a: f64| ((s - t) * a + n2.log_density_unnormalized(&[a, -a]).unwrap_or(f64::NEG_INFINITY)).exp();
        Ok(gauss_kronrod_real_line(f, 0.0, tol)?.value)
    };
    push("n=2 L2n vs line quadrature", rel(n2.laplace_l2n(0.3, -0.2)?, line(0.3, -0.2)? / line(0.0, 0.0)?), 1e-8);

    let n3 = FiniteLaw::new(logistic.clone(), 3)?;
    let plane = |s: f64, t: f64| -> CliResult<f64> {
        let inner = |x: f64| {
            gauss_kronrod_real_line(
                |y| (s * x + t * y + n3.log_density_unnormalized(&[x, y, -x - y]).unwrap_or(f64::NEG_INFINITY)).exp(),
                -0.5 * x,
                tol,
            )
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
        };
        Ok(gauss_kronrod_real_line(inner, 0.0, tol)?.value)
    };
    push("n=3 L2n vs plane quadrature", rel(n3.laplace_l2n(0.3, -0.2)?, plane(0.3, -0.2)? / plane(0.0, 0.0)?), 1e-6);

    let mut rng = stream(seed, 77);
    let mut worst_assign = 0.0_f64;
    for trial in 0..30 {
        let (count, k) = (1 + trial % 7, 1 + trial % 3);
        let q = if trial % 2 == 0 { 1.0 } else { 2.0 };
        let mut pts = || -> CliResult<EmpiricalSample> {
            let v: Vec<f64> = (0..count * k).map(|_| rng.random_range(-2.0..2.0)).collect();
            Ok(EmpiricalSample::new(k, v, Provenance { sampler: "selfcheck".into(), seed, n: 0 })?)
        };
        let (x, y) = (pts()?, pts()?);
        worst_assign = worst_assign.max((wq_kd_assignment(&x, &y, q)?.distance - brute_force_assignment(&x, &y, q)?.distance).abs());
    }
    push("assignment vs brute force (30 instances)", worst_assign, 1e-10);

    // The configured model.
    let limit = NonlinearLaw::new(model.clone())?;
    let worst_route = [1e-6, 0.01, 0.2, 0.5, 0.8, 0.99, 1.0 - 1e-6]
        .iter()
        .map(|&u| Ok((limit.phi(u)? - limit.phi_by_quadrature(u)?).abs()))
        .collect::<CliResult<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    push("model: Phi closed form vs quadrature", worst_route, 1e-8);
    push("model: centering", limit.check_centering()?.abs(), 1e-8);
    let law = FiniteLaw::new(model.clone(), 200)?;
    let v = limit.domain();
    let (s, t) = (0.3 * v.upper, 0.3 * v.lower);
    push("model: L2n(t,0) vs L1n(t), n=200", rel(law.laplace_l2n(t, 0.0)?, law.laplace_l1n(t)?), 1e-12);
    push("model: O(n) vs pairwise L2n, n=200", rel(law.laplace_l2n(s, t)?, law.laplace_l2n_pairwise(s, t)?), 1e-12);
    Ok(rows)
}

fn selfcheck(ctx: &Context) -> CliResult<()> {
    let rows = selfcheck_rows(&ctx.model, ctx.cfg.seed)?;
    let (mut w, path) = csv_with_metadata(&ctx.out, "selfcheck.csv", &ctx.metadata("selfcheck"))?;
    w.write_record(["check", "measured", "tolerance", "passed", "config_hash"])?;
    println!("{:<44} {:>10} {:>10}  result", "check", "measured", "tolerance");
    for r in &rows {
        println!("{:<44} {:>10.2e} {:>10.0e}  {}", r.name, r.measured, r.tolerance, if r.passed() { "PASS" } else { "FAIL" });
        w.write_record([r.name.clone(), num(r.measured), num(r.tolerance), r.passed().to_string(), ctx.hash.clone()])?;
    }
    w.flush()?;
    println!("wrote {}", path.display());
    let failed = rows.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} self-checks failed")));
    }
    Ok(())
}

