//! Wasserstein distances `W_q` between empirical measures, with the `ℓ^q`
//! ground norm on `R^k` so that the cost of a pair is `Σ_m |x_m - y_m|^q`.

use std::fmt;

use crate::error::{Error, Result};
use crate::sample::EmpiricalSample;
use crate::stats::compensated_sum;

pub const MAX_ASSIGNMENT_SIZE: usize = 4096;
pub const MAX_ASSIGNMENT_DIM: usize = 8;
pub const MAX_BRUTE_FORCE_SIZE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportMethod {
    Quantile1d,
    AssignmentExact,
    AssignmentBruteForce,
}

impl TransportMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            TransportMethod::Quantile1d => "quantile-1d",
            TransportMethod::AssignmentExact => "assignment-exact",
            TransportMethod::AssignmentBruteForce => "assignment-bruteforce",
        }
    }
}

impl fmt::Display for TransportMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportResult {
    pub q: f64,
    pub distance: f64,
    pub method: TransportMethod,
    /// For assignments: `certificate[i]` is the index of the `Y` point
    /// matched to `X` point `i`.
    pub certificate: Option<Vec<usize>>,
}

fn check_q(q: f64) -> Result<()> {
    if q >= 1.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange { arg: "q", value: q, range: "[1, ∞)".into() })
    }
}

#[inline]
fn pow_q(d: f64, q: f64) -> f64 {
    let d = d.abs();
    if q == 1.0 {
        d
    } else if q == 2.0 {
        d * d
    } else {
        d.powf(q)
    }
}

fn root_q(mean_cost: f64, q: f64) -> f64 {
    let m = mean_cost.max(0.0);
    if q == 1.0 {
        m
    } else if q == 2.0 {
        m.sqrt()
    } else {
        m.powf(1.0 / q)
    }
}

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidParameter("sample contains NaN".into()));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Exact `W_q` between two scalar empirical measures with equal counts: the
/// sorted coupling is optimal in one dimension.
pub fn wq_1d_pair(xs: &[f64], ys: &[f64], q: f64) -> Result<TransportResult> {
    check_q(q)?;
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::Dimension(format!("need equal, nonzero counts, got {} and {}", xs.len(), ys.len())));
    }
    let (a, b) = (sorted(xs)?, sorted(ys)?);
    let cost = compensated_sum(a.iter().zip(&b).map(|(x, y)| pow_q(x - y, q))) / a.len() as f64;
    Ok(TransportResult { q, distance: root_q(cost, q), method: TransportMethod::Quantile1d, certificate: None })
}

/// `W_q` between a scalar empirical measure and a law given by its quantile
/// function, coupling the `i`-th order statistic with `quantile((i - ½)/N)`.
pub fn wq_1d_vs_quantile<F: Fn(f64) -> f64>(xs: &[f64], quantile: F, q: f64) -> Result<TransportResult> {
    check_q(q)?;
    if xs.is_empty() {
        return Err(Error::Dimension("empty sample".into()));
    }
    let a = sorted(xs)?;
    let nf = a.len() as f64;
    let cost = compensated_sum(
        a.iter()
            .enumerate()
            .map(|(i, x)| pow_q(x - quantile((i as f64 + 0.5) / nf), q)),
    ) / nf;
    Ok(TransportResult { q, distance: root_q(cost, q), method: TransportMethod::Quantile1d, certificate: None })
}

fn check_pair(x: &EmpiricalSample, y: &EmpiricalSample) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::Dimension(format!("dimensions differ: {} vs {}", x.dim(), y.dim())));
    }
    if x.len() != y.len() {
        return Err(Error::Dimension(format!("counts differ: {} vs {}", x.len(), y.len())));
    }
    Ok(())
}

fn pair_cost(a: &[f64], b: &[f64], q: f64) -> f64 {
    a.iter().zip(b).map(|(u, v)| pow_q(u - v, q)).sum()
}

fn assignment_result(x: &EmpiricalSample, y: &EmpiricalSample, q: f64, perm: Vec<usize>, method: TransportMethod) -> TransportResult {
    let cost = compensated_sum(perm.iter().enumerate().map(|(i, &j)| pair_cost(x.draw(i), y.draw(j), q))) / x.len() as f64;
    TransportResult { q, distance: root_q(cost, q), method, certificate: Some(perm) }
}

/// Mean `ℓ^q` cost of matching `X_i` with `Y_{perm[i]}`.
pub fn matching_cost(x: &EmpiricalSample, y: &EmpiricalSample, perm: &[usize], q: f64) -> f64 {
    compensated_sum(perm.iter().enumerate().map(|(i, &j)| pair_cost(x.draw(i), y.draw(j), q))) / x.len() as f64
}

/// Exact optimal assignment by shortest augmenting paths with dual
/// potentials (Hungarian method, `O(N³)`).
pub fn wq_kd_assignment(x: &EmpiricalSample, y: &EmpiricalSample, q: f64) -> Result<TransportResult> {
    check_q(q)?;
    check_pair(x, y)?;
    let n = x.len();
    if n > MAX_ASSIGNMENT_SIZE || x.dim() > MAX_ASSIGNMENT_DIM {
        return Err(Error::SizeCap(format!(
            "exact assignment is limited to N <= {MAX_ASSIGNMENT_SIZE}, k <= {MAX_ASSIGNMENT_DIM}; got N = {n}, k = {}",
            x.dim()
        )));
    }
    let cost = |i: usize, j: usize| pair_cost(x.draw(i), y.draw(j), q);

    // 1-based rows/columns; column 0 is the virtual start.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut min_v = vec![0.0; n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        min_v.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < min_v[j] {
                    min_v[j] = reduced;
                    way[j] = j0;
                }
                if min_v[j] < delta {
                    delta = min_v[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_v[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for j in 1..=n {
        perm[row_of[j] - 1] = j - 1;
    }
    Ok(assignment_result(x, y, q, perm, TransportMethod::AssignmentExact))
}

/// Enumerates all `N!` matchings (Heap's algorithm). Testing oracle.
pub fn brute_force_assignment(x: &EmpiricalSample, y: &EmpiricalSample, q: f64) -> Result<TransportResult> {
    check_q(q)?;
    check_pair(x, y)?;
    let n = x.len();
    if n > MAX_BRUTE_FORCE_SIZE {
        return Err(Error::SizeCap(format!("brute force is limited to N <= {MAX_BRUTE_FORCE_SIZE}, got {n}")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_cost = matching_cost(x, y, &perm, q);
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let cost = matching_cost(x, y, &perm, q);
            if cost < best_cost {
                best_cost = cost;
                best.copy_from_slice(&perm);
            }
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(assignment_result(x, y, q, best, TransportMethod::AssignmentBruteForce))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::sample::Provenance;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn prov() -> Provenance {
        Provenance { sampler: "test".into(), seed: 0, n: 0 }
    }

    fn pts(dim: usize, data: Vec<f64>) -> EmpiricalSample {
        EmpiricalSample::new(dim, data, prov()).unwrap()
    }

    fn gaussian(dim: usize, count: usize, seed: u64) -> EmpiricalSample {
        let mut rng = stream(seed, 0);
        pts(dim, (0..dim * count).map(|_| rng.sample(StandardNormal)).collect())
    }

    #[test]
    fn one_d_examples() {
        let x = [0.0, 1.0];
        assert_eq!(wq_1d_pair(&x, &x, 1.0).unwrap().distance, 0.0);
        assert_eq!(wq_1d_pair(&x, &[2.0, 3.0], 1.0).unwrap().distance, 2.0);
        assert_eq!(wq_1d_pair(&x, &[3.0, 2.0], 2.0).unwrap().distance, 2.0);
        assert!(wq_1d_pair(&x, &[1.0], 1.0).is_err());
        assert!(wq_1d_pair(&x, &x, 0.5).is_err());
        let q = |u: f64| (u / (1.0 - u)).ln();
        let xs: Vec<f64> = (0..100).map(|i| q((i as f64 + 0.5) / 100.0)).rev().collect();
        assert_eq!(wq_1d_vs_quantile(&xs, q, 1.0).unwrap().distance, 0.0);
        assert!(wq_1d_vs_quantile(&xs, q, 0.0).is_err());
    }

    #[test]
    fn brute_force_examples() {
        let x = pts(2, vec![0.0, 0.0, 1.0, 1.0]);
        let y = pts(2, vec![1.0, 1.0, 0.0, 0.0]);
        let r = brute_force_assignment(&x, &y, 2.0).unwrap();
        assert_eq!(r.distance, 0.0);
        assert_eq!(r.certificate.unwrap(), vec![1, 0]);
        let a = pts(2, vec![0.0, 0.0]);
        let b = pts(2, vec![3.0, -4.0]);
        assert!((brute_force_assignment(&a, &b, 2.0).unwrap().distance - 5.0).abs() < 1e-15);
        assert_eq!(brute_force_assignment(&a, &b, 1.0).unwrap().distance, 7.0);
        assert!(brute_force_assignment(&gaussian(1, 9, 1), &gaussian(1, 9, 2), 1.0).is_err());
    }

    #[test]
    fn size_caps() {
        let big = gaussian(9, 2, 1);
        assert!(matches!(wq_kd_assignment(&big, &big, 1.0), Err(Error::SizeCap(_))));
        assert!(matches!(wq_kd_assignment(&gaussian(1, 3, 1), &gaussian(2, 3, 1), 1.0), Err(Error::Dimension(_))));
    }

    #[test]
    fn assignment_agrees_with_enumeration() {
        let mut rng = stream(21, 0);
        for trial in 0..100 {
            let n = rng.random_range(1..=7);
            let k = rng.random_range(1..=3);
            let q = if trial % 2 == 0 { 1.0 } else { 2.0 };
            let x = gaussian(k, n, 1000 + trial);
            let y = gaussian(k, n, 5000 + trial);
            let a = wq_kd_assignment(&x, &y, q).unwrap();
            let b = brute_force_assignment(&x, &y, q).unwrap();
            assert!((a.distance - b.distance).abs() <= 1e-10, "trial {trial}");
        }
    }

    #[test]
    fn assignment_reduces_to_sorted_coupling() {
        for q in [1.0, 2.0, 3.5] {
            let x = gaussian(1, 300, 7);
            let y = gaussian(1, 300, 8);
            let a = wq_kd_assignment(&x, &y, q).unwrap().distance;
            let b = wq_1d_pair(x.values(), y.values(), q).unwrap().distance;
            assert!((a - b).abs() <= 1e-12 * (1.0 + b), "{a} {b}");
        }
    }

    #[test]
    fn assignment_beats_random_matchings() {
        let x = gaussian(3, 40, 1);
        let y = gaussian(3, 40, 2);
        let r = wq_kd_assignment(&x, &y, 2.0).unwrap();
        let best = matching_cost(&x, &y, r.certificate.as_ref().unwrap(), 2.0);
        let mut rng = stream(3, 0);
        let mut perm: Vec<usize> = (0..40).collect();
        for _ in 0..1000 {
            perm.shuffle(&mut rng);
            assert!(best < matching_cost(&x, &y, &perm, 2.0));
        }
    }

    #[test]
    fn permuted_copy_is_at_distance_zero() {
        let x = gaussian(4, 50, 5);
        let mut idx: Vec<usize> = (0..50).collect();
        idx.shuffle(&mut stream(6, 0));
        let y = pts(4, idx.iter().flat_map(|&i| x.draw(i).to_vec()).collect());
        assert_eq!(wq_kd_assignment(&x, &y, 1.0).unwrap().distance, 0.0);
    }

    proptest! {
        #[test]
        fn metric_axioms(seed in 0u64..10_000, n in 1usize..12, k in 1usize..4) {
            let (x, y, z) = (gaussian(k, n, seed), gaussian(k, n, seed + 1), gaussian(k, n, seed + 2));
            for q in [1.0, 2.0] {
                let d = |a: &EmpiricalSample, b: &EmpiricalSample| wq_kd_assignment(a, b, q).unwrap().distance;
                prop_assert!((d(&x, &y) - d(&y, &x)).abs() <= 1e-12 * (1.0 + d(&x, &y)));
                prop_assert_eq!(d(&x, &x), 0.0);
                prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-10);
            }
        }

        #[test]
        fn order_monotone_and_scale_equivariant(seed in 0u64..10_000, n in 1usize..40, c in -5.0f64..5.0) {
            let (x, y) = (gaussian(1, n, seed), gaussian(1, n, seed + 9));
            let w: Vec<f64> = [1.0, 2.0, 4.0].iter().map(|&q| wq_1d_pair(x.values(), y.values(), q).unwrap().distance).collect();
            prop_assert!(w[0] <= w[1] * (1.0 + 1e-12) && w[1] <= w[2] * (1.0 + 1e-12));
            let cx: Vec<f64> = x.values().iter().map(|v| c * v).collect();
            let cy: Vec<f64> = y.values().iter().map(|v| c * v).collect();
            for q in [1.0, 2.0] {
                let a = wq_1d_pair(&cx, &cy, q).unwrap().distance;
                let b = c.abs() * wq_1d_pair(x.values(), y.values(), q).unwrap().distance;
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
            }
        }
    }
}
