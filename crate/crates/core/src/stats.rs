//! Summation, Monte Carlo error bars and time-series diagnostics.

use rand::Rng;

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    xs.into_iter().collect::<CompensatedSum>().value()
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Running first and second moments (Welford). Mergeable, so that partial
/// results computed on independent streams can be combined in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl MeanAccumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &MeanAccumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            f64::NAN
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean for independent draws.
    pub fn standard_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

/// Mean and standard error from non-overlapping batch means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchMeans {
    pub mean: f64,
    pub standard_error: f64,
    pub batches: usize,
}

pub fn batch_means(series: &[f64], batches: usize) -> BatchMeans {
    let batches = batches.clamp(2, series.len().max(2));
    let len = series.len() / batches;
    let mut acc = MeanAccumulator::default();
    for b in 0..batches {
        let chunk = &series[b * len..(b + 1) * len];
        acc.push(compensated_sum(chunk.iter().copied()) / len as f64);
    }
    BatchMeans {
        mean: acc.mean(),
        standard_error: acc.standard_error(),
        batches,
    }
}

/// Effective sample size from the autocorrelation function, truncated by
/// Geyer's initial positive sequence rule.
pub fn effective_sample_size(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return n as f64;
    }
    let mean = compensated_sum(series.iter().copied()) / n as f64;
    let centred: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let autocov = |lag: usize| -> f64 {
        centred[..n - lag]
            .iter()
            .zip(&centred[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
    };
    let c0 = autocov(0);
    if c0 <= 0.0 {
        return n as f64;
    }
    let mut tau = -1.0;
    let mut lag = 0;
    while lag + 1 < n / 2 {
        let pair = (autocov(lag) + autocov(lag + 1)) / c0;
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    (n as f64 / tau.max(1.0 / n as f64)).min(n as f64)
}

/// `statistic` over `resamples` resamples of `data` with replacement.
pub fn bootstrap_replicates<R, F>(data: &[f64], resamples: usize, rng: &mut R, statistic: F) -> Vec<f64>
where
    R: Rng + ?Sized,
    F: Fn(&[f64]) -> f64,
{
    let mut buf = vec![0.0; data.len()];
    (0..resamples)
        .map(|_| {
            for slot in buf.iter_mut() {
                *slot = data[rng.random_range(0..data.len())];
            }
            statistic(&buf)
        })
        .collect()
}

/// Central `level` quantiles of the replicates.
pub fn percentile_band(mut replicates: Vec<f64>, level: f64) -> (f64, f64) {
    assert!(!replicates.is_empty(), "no bootstrap replicates");
    replicates.sort_by(f64::total_cmp);
    let last = replicates.len() - 1;
    let q = |p: f64| replicates[((p * last as f64).round() as usize).min(last)];
    let alpha = 0.5 * (1.0 - level);
    (q(alpha), q(1.0 - alpha))
}

/// Percentile band shifted by the estimated bias `mean(replicates) - estimate`.
///
/// Plug-in transport distances are biased upwards, and resampling with
/// replacement adds duplicate atoms that inflate them further; for small
/// clouds the plain percentile band can miss the estimate entirely.
pub fn bias_corrected_band(replicates: Vec<f64>, estimate: f64, level: f64) -> (f64, f64) {
    let bias = replicates.iter().sum::<f64>() / replicates.len() as f64 - estimate;
    let (lo, hi) = percentile_band(replicates, level);
    (lo - bias, hi - bias)
}

/// Percentile bootstrap: `(lower, upper)` quantiles of `statistic` over
/// `resamples` resamples with replacement.
pub fn bootstrap_interval<R, F>(data: &[f64], resamples: usize, level: f64, rng: &mut R, statistic: F) -> (f64, f64)
where
    R: Rng + ?Sized,
    F: Fn(&[f64]) -> f64,
{
    percentile_band(bootstrap_replicates(data, resamples, rng, statistic), level)
}

/// Bootstrap band for a biased estimator; see [`bias_corrected_band`].
pub fn bootstrap_band<R, F>(data: &[f64], resamples: usize, level: f64, rng: &mut R, statistic: F) -> (f64, f64)
where
    R: Rng + ?Sized,
    F: Fn(&[f64]) -> f64,
{
    let estimate = statistic(data);
    bias_corrected_band(bootstrap_replicates(data, resamples, rng, statistic), estimate, level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = std::iter::once(1e16).chain(std::iter::repeat_n(1.0, 1000)).chain(std::iter::once(-1e16));
        assert_eq!(compensated_sum(xs), 1000.0);
    }

    #[test]
    fn log_add_exp_basic() {
        assert!((log_add_exp(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 3.0), 3.0);
        assert!((log_add_exp(1000.0, 1000.0) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn welford_merge_matches_single_pass() {
        let mut rng = stream(3, 0);
        let xs: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        let mut all = MeanAccumulator::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = MeanAccumulator::default();
        let mut b = MeanAccumulator::default();
        xs[..300].iter().for_each(|&x| a.push(x));
        xs[300..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.mean() - all.mean()).abs() < 1e-14);
        assert!((a.variance() - all.variance()).abs() < 1e-14);
    }

    #[test]
    fn ess_of_white_noise_and_ar1() {
        let mut rng = stream(5, 0);
        let white: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>() - 0.5).collect();
        let ess = effective_sample_size(&white);
        assert!(ess > 15_000.0, "{ess}");
        // AR(1) with φ = 0.9: ESS ≈ N (1-φ)/(1+φ)
        let mut x = 0.0;
        let ar: Vec<f64> = (0..50_000)
            .map(|_| {
                x = 0.9 * x + rng.random::<f64>() - 0.5;
                x
            })
            .collect();
        let ess = effective_sample_size(&ar);
        let expected = 50_000.0 * 0.1 / 1.9;
        assert!((ess / expected - 1.0).abs() < 0.3, "{ess} vs {expected}");
    }

    #[test]
    fn batch_means_of_constant() {
        let bm = batch_means(&[2.0; 100], 10);
        assert_eq!(bm.mean, 2.0);
        assert_eq!(bm.standard_error, 0.0);
    }

    #[test]
    fn percentile_band_picks_order_statistics() {
        let reps: Vec<f64> = (0..=100).rev().map(f64::from).collect();
        assert_eq!(percentile_band(reps.clone(), 0.9), (5.0, 95.0));
        // shifting by the bias moves both ends and keeps the width
        let (lo, hi) = bias_corrected_band(reps, 40.0, 0.9);
        assert_eq!((lo, hi), (-5.0, 85.0));
    }

    #[test]
    fn bootstrap_band_of_mean_matches_normal_theory() {
        let mut rng = stream(9, 0);
        let data: Vec<f64> = (0..4000).map(|_| rng.random::<f64>()).collect();
        let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
        let (lo, hi) = bootstrap_band(&data, 400, 0.95, &mut stream(9, 1), mean);
        let se = (1.0f64 / 12.0).sqrt() / (data.len() as f64).sqrt();
        let m = mean(&data);
        assert!(lo < m && m < hi);
        assert!(((hi - lo) / (2.0 * 1.96 * se) - 1.0).abs() < 0.2, "width {} vs {}", hi - lo, 2.0 * 1.96 * se);
    }
}
