//! The stationary law `P^n_∞` of the projected `n`-particle system.
//!
//! Its density on the hyperplane `M_n = {z : Σ z_i = 0}` is proportional to
//! `exp((2/σ²) Σ_k b_n(k) z_(k))`. Writing the ordered vector through its
//! spacings `Y_k = z_(k+1) - z_(k)` turns the exponent into
//! `-Σ_k λ_k Y_k` with `λ_k = 2n B(k/n)/σ²`, so the spacings are independent
//! exponentials. This gives both the exact sampler and the closed product
//! forms of the Laplace transforms: each product factor is
//! `λ_k / (λ_k - θ_k)` for the coefficient `θ_k` of `Y_k` in `s z_1 + t z_2`.
//!
//! In terms of `f⁺_{k,n}(r) = r (k/n)/λ_k` and `f⁻_{k,n}(r) = -r (1-k/n)/λ_k`
//! the factors are `1/(1 - f⁺(s+t))`, `1/(1 - f⁺(t) - f⁻(s))`,
//! `1/(1 - f⁺(s) - f⁻(t))` and `1/(1 - f⁻(s+t))`. The transform is finite
//! exactly when every factor that occurs has a positive denominator.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::drift::DriftModel;
use crate::error::{Error, Result};
use crate::nonlinear::LaplaceDomainV;
use crate::rng::stream;
use crate::sample::{EmpiricalSample, Provenance};
use crate::stats::{compensated_sum, log_add_exp, CompensatedSum, MeanAccumulator};

/// Denominator family names, as carried by [`Error::Infeasible`] and
/// [`FeasibilityCertificate`].
pub const FAMILY_PLUS: &str = "1 - f+(s+t)";
pub const FAMILY_MIXED_TS: &str = "1 - f+(t) - f-(s)";
pub const FAMILY_MIXED_ST: &str = "1 - f+(s) - f-(t)";
pub const FAMILY_MINUS: &str = "1 - f-(s+t)";

/// Minimum of one denominator family and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyMinimum {
    pub family: &'static str,
    pub min: f64,
    pub argmin_k: usize,
}

/// Exact finiteness test of the two-coordinate Laplace transform at `(s, t)`.
///
/// Only the denominators that occur in some `J^n_{i,j}` are checked:
/// `1 - f⁺(s+t)` for `k <= n-2`, `1 - f⁻(s+t)` for `k >= 2`, and both mixed
/// families for every `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityCertificate {
    pub n: usize,
    pub s: f64,
    pub t: f64,
    pub families: [FamilyMinimum; 4],
    pub min_denominator: f64,
    pub feasible: bool,
}

impl FeasibilityCertificate {
    fn worst(&self) -> &FamilyMinimum {
        self.families
            .iter()
            .min_by(|a, b| a.min.total_cmp(&b.min))
            .expect("four families")
    }

    fn into_result(self) -> Result<()> {
        if self.feasible {
            return Ok(());
        }
        let w = *self.worst();
        Err(Error::Infeasible {
            n: self.n,
            k: w.argmin_k,
            family: w.family,
            value: w.min,
        })
    }
}

/// Per-rank coefficients `(k/n)/λ_k` and `(1-k/n)/λ_k`.
fn coefficients(model: &DriftModel, n: usize, k: usize) -> (f64, f64) {
    let nf = n as f64;
    let u = k as f64 / nf;
    let uc = (n - k) as f64 / nf;
    let lambda = 2.0 * nf * model.antiderivative_split(u, uc) / model.sigma2();
    (u / lambda, uc / lambda)
}

/// `f⁺_{k,n}(r) = r (σ²/2n) (k/n) / B(k/n)` for `1 <= k <= n-1`.
pub fn f_plus(model: &DriftModel, n: usize, k: usize, r: f64) -> Result<f64> {
    check_rank(n, k)?;
    Ok(r * coefficients(model, n, k).0)
}

/// `f⁻_{k,n}(r) = -r (σ²/2n) (1-k/n) / B(k/n)` for `1 <= k <= n-1`.
pub fn f_minus(model: &DriftModel, n: usize, k: usize, r: f64) -> Result<f64> {
    check_rank(n, k)?;
    Ok(-r * coefficients(model, n, k).1)
}

fn check_rank(n: usize, k: usize) -> Result<()> {
    if n < 2 || k == 0 || k >= n {
        return Err(Error::OutOfRange {
            arg: "k",
            value: k as f64,
            range: format!("1..={}", n.saturating_sub(1)),
        });
    }
    Ok(())
}

fn family_minima<I: Iterator<Item = (usize, f64, f64)>>(n: usize, s: f64, t: f64, coefs: I) -> [FamilyMinimum; 4] {
    let mut fams = [
        FamilyMinimum { family: FAMILY_PLUS, min: f64::INFINITY, argmin_k: 0 },
        FamilyMinimum { family: FAMILY_MIXED_TS, min: f64::INFINITY, argmin_k: 0 },
        FamilyMinimum { family: FAMILY_MIXED_ST, min: f64::INFINITY, argmin_k: 0 },
        FamilyMinimum { family: FAMILY_MINUS, min: f64::INFINITY, argmin_k: 0 },
    ];
    let mut update = |idx: usize, k: usize, v: f64| {
        if v < fams[idx].min {
            fams[idx].min = v;
            fams[idx].argmin_k = k;
        }
    };
    for (k, cp, cm) in coefs {
        if k <= n - 2 {
            update(0, k, 1.0 - (s + t) * cp);
        }
        update(1, k, 1.0 - t * cp + s * cm);
        update(2, k, 1.0 - s * cp + t * cm);
        if k >= 2 {
            update(3, k, 1.0 + (s + t) * cm);
        }
    }
    fams
}

fn merge_minima(a: [FamilyMinimum; 4], b: [FamilyMinimum; 4]) -> [FamilyMinimum; 4] {
    let mut out = a;
    for i in 0..4 {
        if b[i].min < out[i].min {
            out[i] = b[i];
        }
    }
    out
}

fn certificate(n: usize, s: f64, t: f64, families: [FamilyMinimum; 4]) -> FeasibilityCertificate {
    let min_denominator = families.iter().map(|f| f.min).fold(f64::INFINITY, f64::min);
    FeasibilityCertificate {
        n,
        s,
        t,
        families,
        min_denominator,
        feasible: min_denominator > 0.0,
    }
}

/// Streams over `k` without allocating, so `n` may be very large.
pub fn feasibility(model: &DriftModel, n: usize, s: f64, t: f64) -> FeasibilityCertificate {
    assert!(n >= 2, "feasibility needs n >= 2");
    const CHUNK: usize = 1 << 16;
    let chunks = (n - 1).div_ceil(CHUNK);
    let chunk_minima = |c: usize| {
        let lo = 1 + c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        family_minima(
            n,
            s,
            t,
            (lo..hi).map(|k| {
                let (cp, cm) = coefficients(model, n, k);
                (k, cp, cm)
            }),
        )
    };
    let empty = family_minima(n, s, t, std::iter::empty());
    #[cfg(feature = "parallel")]
    let fams = {
        use rayon::prelude::*;
        (0..chunks)
            .into_par_iter()
            .map(chunk_minima)
            .reduce(|| empty, merge_minima)
    };
    #[cfg(not(feature = "parallel"))]
    let fams = (0..chunks).map(chunk_minima).fold(empty, merge_minima);
    certificate(n, s, t, fams)
}

/// Constants of the a-priori feasibility bound: an `ε` with `(s, t) ∈ V^ε₂`,
/// a `δ` for which `B` dominates its endpoint linearisations on `[0, δ]` and
/// `[1-δ, 1]`, the resulting `ᾱ`, and the smallest `n₀` from which every
/// denominator is at least `1 - ᾱ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonDeltaPlan {
    pub s: f64,
    pub t: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub m_minus: f64,
    pub m_plus: f64,
    pub alpha_bar: f64,
    pub n0: usize,
}

/// Ratio of successive `δ` candidates, scanned from `1/2` downwards.
const DELTA_GRID_RATIO: f64 = 0.9;
const DELTA_GRID_STEPS: usize = 2000;

pub fn plan_epsilon_delta(model: &DriftModel, s: f64, t: f64) -> Result<EpsilonDeltaPlan> {
    model.require_valid()?;
    let v = LaplaceDomainV::of(model);
    for r in [s, t, s + t] {
        v.check(r)?;
    }
    let sigma2 = model.sigma2();
    let (b0, b1) = (model.b0(), model.b1());

    // Largest ε keeping r inside V^ε, halved.
    let slack = |r: f64| {
        if r > 0.0 {
            -b1 - 0.5 * r * sigma2
        } else {
            b0 + 0.5 * r * sigma2
        }
    };
    let epsilon = 0.5 * [slack(s), slack(t), slack(s + t), b0, -b1].into_iter().fold(f64::INFINITY, f64::min);

    // B(u) >= u (b(0) - ε) on [0, δ] and B(u) >= (1-u)(-b(1) - ε) on [1-δ, 1].
    let lin_tol = 1e-13 * (b0 - b1);
    let endpoint_bounds_hold = |delta: f64| {
        model.min_excess_over_line(0.0, delta, 0.0, b0 - epsilon) >= -lin_tol
            && model.min_excess_over_line(1.0 - delta, 1.0, -b1 - epsilon, b1 + epsilon) >= -lin_tol
    };
    let delta = (1..=DELTA_GRID_STEPS)
        .map(|j| 0.5 * DELTA_GRID_RATIO.powi(j as i32))
        .find(|&d| endpoint_bounds_hold(d))
        .ok_or_else(|| Error::InvalidParameter("no admissible δ on the scan grid".into()))?;
    let ratios = model.infimum_ratios(delta)?;
    let (m_minus, m_plus) = (ratios.m_minus, ratios.m_plus);

    let pos = |r: f64| r.max(0.0);
    let neg = |r: f64| (-r).max(0.0);
    let alpha_plus = |r: f64| pos(r) * sigma2 / (2.0 * (-b1 - epsilon));
    let alpha_minus = |r: f64| neg(r) * sigma2 / (2.0 * (b0 - epsilon));
    let alpha_bar = [
        0.5,
        alpha_plus(s + t),
        alpha_minus(s + t),
        0.5 * (alpha_plus(s) + 1.0),
        0.5 * (alpha_minus(s) + 1.0),
        0.5 * (alpha_plus(t) + 1.0),
        0.5 * (alpha_minus(t) + 1.0),
    ]
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max);

    // Every condition reads  a / n <= c  with a = Σ (per-term numerators).
    // f⁺ terms are bounded by [r]⁺σ²/(2n m₋), f⁻ terms by [r]⁻σ²/(2n m₊).
    let fp = |r: f64| pos(r) * sigma2 / (2.0 * m_minus);
    let fm = |r: f64| neg(r) * sigma2 / (2.0 * m_plus);
    let mut conditions = vec![(fp(s + t), 0.5), (fm(s + t), 0.5)];
    for (a, b) in [(t, s), (s, t)] {
        // family 1 - f⁺(a) - f⁻(b)
        conditions.push((fp(a), 0.5 * (1.0 - alpha_minus(b))));
        conditions.push((fp(a) + fm(b), 0.5));
        conditions.push((fm(b), 0.5 * (1.0 - alpha_plus(a))));
    }
    let holds = |n: usize| conditions.iter().all(|&(a, c)| a / n as f64 <= c);
    let mut n0 = conditions
        .iter()
        .map(|&(a, c)| (a / c).ceil())
        .fold(2.0, f64::max) as usize;
    while n0 > 2 && holds(n0 - 1) {
        n0 -= 1;
    }
    while !holds(n0) {
        n0 += 1;
    }

    Ok(EpsilonDeltaPlan {
        s,
        t,
        epsilon,
        delta,
        m_minus,
        m_plus,
        alpha_bar,
        n0,
    })
}

/// The stationary law of the projected `n`-particle system.
#[derive(Debug, Clone)]
pub struct FiniteLaw {
    model: DriftModel,
    n: usize,
    rank_weights: Vec<f64>,
    gap_rates: Vec<f64>,
    /// `(k/n)/λ_k`, so `f⁺_k(r) = r cp[k-1]`.
    cp: Vec<f64>,
    /// `(1-k/n)/λ_k`, so `f⁻_k(r) = -r cm[k-1]`.
    cm: Vec<f64>,
}

impl FiniteLaw {
    pub fn new(model: DriftModel, n: usize) -> Result<Self> {
        model.require_valid()?;
        if n < 2 {
            return Err(Error::InvalidParameter(format!("need n >= 2 particles, got {n}")));
        }
        let nf = n as f64;
        let rank_weights = model.rank_weights(n);
        let gap_rates: Vec<f64> = (1..n)
            .map(|k| 2.0 * nf * model.antiderivative_split(k as f64 / nf, (n - k) as f64 / nf) / model.sigma2())
            .collect();
        let cp = gap_rates.iter().enumerate().map(|(i, l)| ((i + 1) as f64 / nf) / l).collect();
        let cm = gap_rates.iter().enumerate().map(|(i, l)| ((n - i - 1) as f64 / nf) / l).collect();
        Ok(FiniteLaw {
            model,
            n,
            rank_weights,
            gap_rates,
            cp,
            cm,
        })
    }

    pub fn model(&self) -> &DriftModel {
        &self.model
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `b_n(1), ..., b_n(n)`.
    pub fn rank_weights(&self) -> &[f64] {
        &self.rank_weights
    }

    /// `λ_k = 2n B(k/n)/σ²` for `k = 1, ..., n-1`.
    pub fn gap_rates(&self) -> &[f64] {
        &self.gap_rates
    }

    pub fn f_plus(&self, k: usize, r: f64) -> Result<f64> {
        check_rank(self.n, k)?;
        Ok(r * self.cp[k - 1])
    }

    pub fn f_minus(&self, k: usize, r: f64) -> Result<f64> {
        check_rank(self.n, k)?;
        Ok(-r * self.cm[k - 1])
    }

    pub fn feasibility(&self, s: f64, t: f64) -> FeasibilityCertificate {
        let fams = family_minima(
            self.n,
            s,
            t,
            self.cp.iter().zip(&self.cm).enumerate().map(|(i, (&cp, &cm))| (i + 1, cp, cm)),
        );
        certificate(self.n, s, t, fams)
    }

    /// `(2/σ²) Σ_k b_n(k) z_(k)` for `z ∈ M_n`; the normalising constant is
    /// never formed.
    pub fn log_density_unnormalized(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.n {
            return Err(Error::Dimension(format!("expected {} coordinates, got {}", self.n, z.len())));
        }
        let scale = z.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        let sum: f64 = z.iter().sum();
        if !sum.is_finite() || sum.abs() > 1e-9 * self.n as f64 * scale {
            return Err(Error::InvalidParameter(format!(
                "point is not on the zero-sum hyperplane: coordinate sum {sum}"
            )));
        }
        let mut sorted = z.to_vec();
        sorted.sort_by(f64::total_cmp);
        let dot = compensated_sum(self.rank_weights.iter().zip(&sorted).map(|(b, x)| b * x));
        Ok(2.0 / self.model.sigma2() * dot)
    }

    /// Fills `out` (length `n`) with the ordered, centered vector
    /// `z_(1) <= ... <= z_(n)` built from independent exponential spacings.
    pub fn draw_ordered_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n);
        out[0] = 0.0;
        let mut total = 0.0;
        for k in 1..self.n {
            let y: f64 = Exp1.sample(rng);
            out[k] = out[k - 1] + y / self.gap_rates[k - 1];
            total += out[k];
        }
        let mean = total / self.n as f64;
        out.iter_mut().for_each(|x| *x -= mean);
    }

    /// One exact draw from the law, coordinates in uniformly random order.
    pub fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        self.draw_ordered_into(rng, out);
        out.shuffle(rng);
    }

    /// The first `k` coordinates of one exact draw. `scratch` must have
    /// length `n`.
    pub fn draw_leading_into<R: Rng + ?Sized>(&self, rng: &mut R, scratch: &mut [f64], out: &mut [f64]) {
        self.draw_ordered_into(rng, scratch);
        let k = out.len();
        // Partial Fisher–Yates: a uniformly random ordered k-subset of ranks.
        for i in 0..k {
            let j = rng.random_range(i..self.n);
            scratch.swap(i, j);
            out[i] = scratch[i];
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize, seed: u64) -> Result<EmpiricalSample> {
        self.sample_leading(rng, count, self.n, seed)
    }

    /// `count` exact draws of the first `k` coordinates.
    pub fn sample_leading<R: Rng + ?Sized>(&self, rng: &mut R, count: usize, k: usize, seed: u64) -> Result<EmpiricalSample> {
        if count == 0 {
            return Err(Error::InvalidParameter("sample count must be at least 1".into()));
        }
        if k == 0 || k > self.n {
            return Err(Error::Dimension(format!("cannot take {k} of {} coordinates", self.n)));
        }
        let mut data = vec![0.0; count * k];
        let mut scratch = vec![0.0; self.n];
        for row in data.chunks_exact_mut(k) {
            if k == self.n {
                self.draw_into(rng, row);
            } else {
                self.draw_leading_into(rng, &mut scratch, row);
            }
        }
        EmpiricalSample::new(
            k,
            data,
            Provenance {
                sampler: "finite-exponential-spacings".into(),
                seed,
                n: self.n,
            },
        )
    }

    /// `ln(1 + x)` for the product factor with denominator `1 + x`.
    fn ln_factor(x: f64, n: usize, k: usize, family: &'static str) -> Result<f64> {
        if x > -1.0 {
            Ok(x.ln_1p())
        } else {
            Err(Error::Infeasible { n, k, family, value: 1.0 + x })
        }
    }

    /// `I^n_i(t) = Π_{k<i} 1/(1 - f⁺_k(t)) Π_{k>=i} 1/(1 - f⁻_k(t))`: the
    /// Laplace transform of `z_1` conditioned on having rank `i`.
    pub fn laplace_i(&self, i: usize, t: f64) -> Result<f64> {
        if i == 0 || i > self.n {
            return Err(Error::OutOfRange { arg: "i", value: i as f64, range: format!("1..={}", self.n) });
        }
        let mut log = CompensatedSum::default();
        for k in 1..self.n {
            let (x, family) = if k < i {
                (-t * self.cp[k - 1], "1 - f+(t)")
            } else {
                (t * self.cm[k - 1], "1 - f-(t)")
            };
            log.add(-Self::ln_factor(x, self.n, k, family)?);
        }
        Ok(log.value().exp())
    }

    /// `L^{1,n}_∞(t) = (1/n) Σ_i I^n_i(t)`.
    pub fn laplace_l1n(&self, t: f64) -> Result<f64> {
        let n = self.n;
        // forward[i] = Σ_{k<i} ln(1 - f⁺_k(t)), backward[i] = Σ_{k>=i} ln(1 - f⁻_k(t))
        let mut forward = vec![0.0; n + 1];
        for k in 1..n {
            forward[k + 1] = forward[k] + Self::ln_factor(-t * self.cp[k - 1], n, k, "1 - f+(t)")?;
        }
        let mut backward = vec![0.0; n + 2];
        for k in (1..n).rev() {
            backward[k] = backward[k + 1] + Self::ln_factor(t * self.cm[k - 1], n, k, "1 - f-(t)")?;
        }
        let total = compensated_sum((1..=n).map(|i| (-(forward[i] + backward[i])).exp()));
        Ok(total / n as f64)
    }

    /// `J^n_{i,j}(s, t)`, the Laplace transform of `(z_1, z_2)` given that
    /// they hold ranks `i` and `j`, evaluated factor by factor.
    pub fn laplace_j(&self, i: usize, j: usize, s: f64, t: f64) -> Result<f64> {
        let n = self.n;
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::OutOfRange { arg: "i, j", value: i.max(j) as f64, range: format!("1..={n}") });
        }
        if i == j {
            return Err(Error::InvalidParameter("J is defined for distinct ranks only".into()));
        }
        // For i > j the formula is the i < j one with (i, s) and (j, t) swapped.
        let (lo, hi, a, b) = if i < j { (i, j, s, t) } else { (j, i, t, s) };
        let mut log = CompensatedSum::default();
        for k in 1..n {
            let (x, family) = if k < lo {
                (-(a + b) * self.cp[k - 1], FAMILY_PLUS)
            } else if k < hi {
                (a * self.cm[k - 1] - b * self.cp[k - 1], if i < j { FAMILY_MIXED_TS } else { FAMILY_MIXED_ST })
            } else {
                ((a + b) * self.cm[k - 1], FAMILY_MINUS)
            };
            log.add(-Self::ln_factor(x, n, k, family)?);
        }
        Ok(log.value().exp())
    }

    /// Log-space prefix sums for `Σ_{i<j} J_{i,j}(s, t)`:
    /// `ln J_{i,j} = (C_i - A_i) - (C_j + D_j)`.
    fn upper_logs(&self, s: f64, t: f64, mixed: &'static str) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.n;
        let mut a = vec![0.0; n + 1];
        let mut c = vec![0.0; n + 1];
        for k in 1..n {
            a[k + 1] = if k <= n - 2 {
                a[k] + Self::ln_factor(-(s + t) * self.cp[k - 1], n, k, FAMILY_PLUS)?
            } else {
                a[k]
            };
            c[k + 1] = c[k] + Self::ln_factor(s * self.cm[k - 1] - t * self.cp[k - 1], n, k, mixed)?;
        }
        let mut d = vec![0.0; n + 2];
        for k in (2..n).rev() {
            d[k] = d[k + 1] + Self::ln_factor((s + t) * self.cm[k - 1], n, k, FAMILY_MINUS)?;
        }
        let row: Vec<f64> = (0..=n).map(|i| if i == 0 { f64::NAN } else { c[i] - a[i] }).collect();
        let col: Vec<f64> = (0..=n).map(|j| if j == 0 { f64::NAN } else { -(c[j] + d[j]) }).collect();
        Ok((row, col))
    }

    fn upper_sum(&self, s: f64, t: f64, mixed: &'static str) -> Result<f64> {
        let (row, col) = self.upper_logs(s, t, mixed)?;
        let mut running = f64::NEG_INFINITY;
        let mut total = CompensatedSum::default();
        for j in 2..=self.n {
            running = log_add_exp(running, row[j - 1]);
            total.add((running + col[j]).exp());
        }
        Ok(total.value())
    }

    /// `L^{2,n}_∞(s, t) = (1/(n(n-1))) Σ_{i != j} J^n_{i,j}(s, t)`, in `O(n)`
    /// through the prefix factorisation of the double sum.
    pub fn laplace_l2n(&self, s: f64, t: f64) -> Result<f64> {
        self.feasibility(s, t).into_result()?;
        if s == 0.0 && t == 0.0 {
            return Ok(1.0);
        }
        let upper = self.upper_sum(s, t, FAMILY_MIXED_TS)?;
        let lower = self.upper_sum(t, s, FAMILY_MIXED_ST)?;
        let nf = self.n as f64;
        Ok((upper + lower) / (nf * (nf - 1.0)))
    }

    /// The same double average summed pair by pair, `O(n²)`; rows are
    /// independent and reduced in index order.
    pub fn laplace_l2n_pairwise(&self, s: f64, t: f64) -> Result<f64> {
        self.feasibility(s, t).into_result()?;
        if s == 0.0 && t == 0.0 {
            return Ok(1.0);
        }
        let (row_u, col_u) = self.upper_logs(s, t, FAMILY_MIXED_TS)?;
        let (row_l, col_l) = self.upper_logs(t, s, FAMILY_MIXED_ST)?;
        let n = self.n;
        let row_sum = |i: usize| {
            compensated_sum((i + 1..=n).map(|j| (row_u[i] + col_u[j]).exp() + (row_l[i] + col_l[j]).exp()))
        };
        #[cfg(feature = "parallel")]
        let rows: Vec<f64> = {
            use rayon::prelude::*;
            (1..n).into_par_iter().map(row_sum).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let rows: Vec<f64> = (1..n).map(row_sum).collect();
        let nf = n as f64;
        Ok(compensated_sum(rows) / (nf * (nf - 1.0)))
    }
}

/// Monte Carlo estimate of `E[exp(s z_1 + t z_2)]` from the exact sampler.
///
/// The draws are split into `chunks` blocks, block `c` using stream `c` of
/// `seed`; blocks are merged in index order, so the result does not depend
/// on thread scheduling.
pub fn monte_carlo_laplace_pair(law: &FiniteLaw, s: f64, t: f64, draws: usize, seed: u64, chunks: usize) -> MeanAccumulator {
    let chunks = chunks.max(1);
    let per = draws.div_ceil(chunks);
    let block = |c: usize| {
        let mut rng = stream(seed, c as u64);
        let mut scratch = vec![0.0; law.n()];
        let mut pair = [0.0; 2];
        let mut acc = MeanAccumulator::default();
        let count = per.min(draws.saturating_sub(c * per));
        for _ in 0..count {
            law.draw_leading_into(&mut rng, &mut scratch, &mut pair);
            acc.push((s * pair[0] + t * pair[1]).exp());
        }
        acc
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<MeanAccumulator> = {
        use rayon::prelude::*;
        (0..chunks).into_par_iter().map(block).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<MeanAccumulator> = (0..chunks).map(block).collect();
    let mut total = MeanAccumulator::default();
    parts.iter().for_each(|p| total.merge(p));
    total
}
