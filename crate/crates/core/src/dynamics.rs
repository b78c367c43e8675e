//! Euler–Maruyama simulation of the rank-based particle system
//!
//! `dX_i = b_n(rank of X_i) dt + σ dW_i`
//!
//! and of its projection onto the zero-sum hyperplane `M_n`. The drift only
//! sees ranks, which are translation invariant, so projecting after every
//! step gives the projected system exactly in law.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::drift::DriftModel;
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::sample::{EmpiricalSample, Provenance};
use crate::stats::effective_sample_size;

/// Default cap on the number of retained states.
pub const MAX_RETAINED: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    pub positions: Vec<f64>,
    pub time: f64,
}

impl ParticleState {
    pub fn new(positions: Vec<f64>) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::InvalidParameter("need at least 2 particles".into()));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("positions must be finite".into()));
        }
        Ok(ParticleState { positions, time: 0.0 })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n])
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }
}

/// Subtracts the coordinate mean in place.
pub fn project_to_m(state: &mut ParticleState) {
    let n = state.positions.len() as f64;
    let mean = state.positions.iter().sum::<f64>() / n;
    state.positions.iter_mut().for_each(|x| *x -= mean);
}

/// Supplies the standard normal vectors `G` of an Euler step.
pub trait NoiseSource {
    fn fill(&mut self, out: &mut [f64]);
}

/// Independent standard normals from an RNG.
pub struct GaussianNoise<R>(pub R);

impl<R: Rng> NoiseSource for GaussianNoise<R> {
    fn fill(&mut self, out: &mut [f64]) {
        out.iter_mut().for_each(|g| *g = self.0.sample(StandardNormal));
    }
}

/// `G ≡ 0`: the deterministic part of the scheme.
pub struct ZeroNoise;

impl NoiseSource for ZeroNoise {
    fn fill(&mut self, out: &mut [f64]) {
        out.fill(0.0);
    }
}

impl<F: FnMut(&mut [f64])> NoiseSource for F {
    fn fill(&mut self, out: &mut [f64]) {
        self(out)
    }
}

/// The particle system for one drift and one `n`, with the scratch space
/// needed to step it.
#[derive(Debug, Clone)]
pub struct ParticleSystem {
    weights: Vec<f64>,
    sigma: f64,
    /// Particle indices in rank order, kept between steps: the order
    /// changes little per step, so insertion sort is close to linear.
    order: Vec<usize>,
    drift: Vec<f64>,
    noise: Vec<f64>,
}

impl ParticleSystem {
    pub fn new(model: &DriftModel, n: usize) -> Result<Self> {
        model.require_valid()?;
        if n < 2 {
            return Err(Error::InvalidParameter(format!("need n >= 2 particles, got {n}")));
        }
        Ok(ParticleSystem {
            weights: model.rank_weights(n),
            sigma: model.sigma2().sqrt(),
            order: (0..n).collect(),
            drift: vec![0.0; n],
            noise: vec![0.0; n],
        })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    /// Entry `i` is `b_n(#{j : X_j <= X_i})`, ties broken by index.
    pub fn drift_vector(&mut self, positions: &[f64]) -> &[f64] {
        debug_assert_eq!(positions.len(), self.n());
        let key = |i: usize| (positions[i], i);
        let less = |a: usize, b: usize| {
            let (ka, kb) = (key(a), key(b));
            ka.0 < kb.0 || (ka.0 == kb.0 && ka.1 < kb.1)
        };
        let order = &mut self.order;
        for r in 1..order.len() {
            let cur = order[r];
            let mut j = r;
            while j > 0 && less(cur, order[j - 1]) {
                order[j] = order[j - 1];
                j -= 1;
            }
            order[j] = cur;
        }
        for (rank, &i) in order.iter().enumerate() {
            self.drift[i] = self.weights[rank];
        }
        &self.drift
    }

    /// `X ← X + h b_n(ranks) + σ √h G`, `time += h`.
    pub fn step_euler<N: NoiseSource + ?Sized>(&mut self, state: &mut ParticleState, h: f64, noise: &mut N) {
        self.drift_vector(&state.positions);
        let mut g = std::mem::take(&mut self.noise);
        noise.fill(&mut g);
        let amp = self.sigma * h.sqrt();
        for ((x, d), z) in state.positions.iter_mut().zip(&self.drift).zip(&g) {
            *x += h * d + amp * z;
        }
        self.noise = g;
        state.time += h;
    }
}

/// Free-function form of [`ParticleSystem::drift_vector`].
pub fn drift_vector(model: &DriftModel, positions: &[f64]) -> Result<Vec<f64>> {
    let mut sys = ParticleSystem::new(model, positions.len())?;
    Ok(sys.drift_vector(positions).to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationPlan {
    pub h: f64,
    pub horizon: f64,
    pub burn_in: f64,
    /// Steps between retained states.
    pub thinning: usize,
    pub seed: u64,
}

impl SimulationPlan {
    /// Burn-in of 10% of the horizon and a thinning that keeps at most
    /// [`MAX_RETAINED`] states.
    pub fn with_defaults(h: f64, horizon: f64, seed: u64) -> Result<Self> {
        let burn_in = 0.1 * horizon;
        let kept = ((horizon - burn_in) / h).ceil();
        let thinning = (kept / MAX_RETAINED as f64).ceil().max(1.0) as usize;
        let plan = SimulationPlan { h, horizon, burn_in, thinning, seed };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidParameter(format!("step h must be positive, got {}", self.h)));
        }
        if !(self.horizon >= self.h && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!("horizon {} must be at least h", self.horizon)));
        }
        if !(self.burn_in >= 0.0 && self.burn_in < self.horizon) {
            return Err(Error::InvalidParameter(format!(
                "burn-in {} must lie in [0, horizon)",
                self.burn_in
            )));
        }
        if self.thinning == 0 {
            return Err(Error::InvalidParameter("thinning must be at least 1".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.h).round() as usize
    }

    fn burn_in_steps(&self) -> usize {
        (self.burn_in / self.h).round() as usize
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    /// Retained states, one `n`-vector per row, all on `M_n`.
    pub sample: EmpiricalSample,
    pub times: Vec<f64>,
    /// Autocorrelation-based effective size of the retained `z_1` series.
    pub effective_sample_size: f64,
    pub plan: SimulationPlan,
    /// `1` for the plan's own step, `2` for the coupled run at `h/2`.
    pub refinement: usize,
}

/// Runs the projected system from the zero vector and keeps every
/// `thinning`-th state after burn-in.
///
/// Every step of size `h` draws two normal vectors `G₁, G₂` from stream
/// `(seed, 0)` and uses `(G₁ + G₂)/√2`; this leaves the law unchanged and
/// lets [`simulate_stationary_refined`] reuse the same Brownian path.
pub fn simulate_stationary(model: &DriftModel, n: usize, plan: &SimulationPlan) -> Result<SimulationOutput> {
    run(model, n, plan, 1)
}

/// The same Brownian path as [`simulate_stationary`] with the step halved:
/// each `h`-step increment is the sum of two `h/2` increments. Retained
/// states are at the same times as the coarse run.
pub fn simulate_stationary_refined(model: &DriftModel, n: usize, plan: &SimulationPlan) -> Result<SimulationOutput> {
    run(model, n, plan, 2)
}

fn run(model: &DriftModel, n: usize, plan: &SimulationPlan, refinement: usize) -> Result<SimulationOutput> {
    plan.validate()?;
    let mut sys = ParticleSystem::new(model, n)?;
    let mut state = ParticleState::zeros(n)?;
    let mut rng = stream(plan.seed, 0);
    let mut g1 = vec![0.0; n];
    let mut g2 = vec![0.0; n];
    let steps = plan.steps();
    let burn = plan.burn_in_steps();
    let mut data = Vec::with_capacity(n * (steps.saturating_sub(burn) / plan.thinning + 1));
    let mut times = Vec::new();
    let fine_h = plan.h / refinement as f64;
    let fine_steps = steps * refinement;

    for fine in 1..=fine_steps {
        if refinement == 2 {
            if fine % 2 == 1 {
                GaussianNoise(&mut rng).fill(&mut g1);
                GaussianNoise(&mut rng).fill(&mut g2);
                sys.step_euler(&mut state, fine_h, &mut |out: &mut [f64]| out.copy_from_slice(&g1));
            } else {
                sys.step_euler(&mut state, fine_h, &mut |out: &mut [f64]| out.copy_from_slice(&g2));
            }
        } else {
            GaussianNoise(&mut rng).fill(&mut g1);
            GaussianNoise(&mut rng).fill(&mut g2);
            sys.step_euler(&mut state, fine_h, &mut |out: &mut [f64]| {
                for ((o, a), b) in out.iter_mut().zip(&g1).zip(&g2) {
                    *o = (a + b) * std::f64::consts::FRAC_1_SQRT_2;
                }
            });
        }
        project_to_m(&mut state);
        if fine % refinement != 0 {
            continue;
        }
        let step = fine / refinement;
        if step > burn && (step - burn).is_multiple_of(plan.thinning) {
            data.extend_from_slice(&state.positions);
            times.push(step as f64 * plan.h);
        }
    }
    if times.is_empty() {
        return Err(Error::InvalidParameter("plan retains no states".into()));
    }
    let first: Vec<f64> = data.iter().step_by(n).copied().collect();
    let ess = effective_sample_size(&first);
    let sample = EmpiricalSample::new(
        n,
        data,
        Provenance {
            sampler: format!("euler-maruyama(h={})", fine_h),
            seed: plan.seed,
            n,
        },
    )?;
    Ok(SimulationOutput {
        sample,
        times,
        effective_sample_size: ess,
        plan: *plan,
        refinement,
    })
}
