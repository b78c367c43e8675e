use rankdiff_core::finite::FiniteLaw;
use rankdiff_core::rng::stream;
use rankdiff_core::transport::wq_1d_vs_quantile;
use rankdiff_core::{DriftModel, LaplaceDomainV, NonlinearLaw};

/// Largest particle number the page may ask for.
pub const MAX_N: usize = 100_000;
/// Largest number of draws per sample.
pub const MAX_DRAWS: usize = 400_000;

pub fn model(nodes: &[f64], sigma2: f64) -> Result<DriftModel, String> {
    if nodes.len() < 4 || !nodes.len().is_multiple_of(2) {
        return Err("nodes must be a flat list u0, b0, u1, b1, ... with at least two nodes".into());
    }
    let pairs: Vec<(f64, f64)> = nodes.chunks_exact(2).map(|p| (p[0], p[1])).collect();
    let m = DriftModel::piecewise_linear_with_sigma2(&pairs, sigma2).map_err(|e| e.to_string())?;
    if !m.is_valid() {
        return Err(m.validation().message.clone());
    }
    Ok(m)
}

pub fn domain(nodes: &[f64], sigma2: f64) -> Result<LaplaceDomainV, String> {
    model(nodes, sigma2).map(|m| LaplaceDomainV::of(&m))
}

fn check_n(n: usize) -> Result<(), String> {
    if (2..=MAX_N).contains(&n) {
        Ok(())
    } else {
        Err(format!("n must lie in 2..={MAX_N}"))
    }
}

pub struct Densities {
    pub x: Vec<f64>,
    pub limit: Vec<f64>,
    pub histogram: Vec<f64>,
}

impl Densities {
    pub fn flatten(self) -> Vec<f64> {
        let mut out = self.x;
        out.extend(self.limit);
        out.extend(self.histogram);
        out
    }
}

/// Grid over the central 99.8% of the limit law; the histogram is
/// normalised as a density over the same bins (mass outside is dropped).
pub fn densities(nodes: &[f64], sigma2: f64, n: usize, draws: usize, bins: usize, seed: u64) -> Result<Densities, String> {
    check_n(n)?;
    if !(10..=400).contains(&bins) || draws == 0 || draws > MAX_DRAWS {
        return Err(format!("need 10..=400 bins and 1..={MAX_DRAWS} draws"));
    }
    let m = model(nodes, sigma2)?;
    let limit = NonlinearLaw::new(m.clone()).map_err(|e| e.to_string())?;
    let lo = limit.phi(0.001).map_err(|e| e.to_string())?;
    let hi = limit.phi(0.999).map_err(|e| e.to_string())?;
    let width = (hi - lo) / bins as f64;
    let x: Vec<f64> = (0..bins).map(|i| lo + (i as f64 + 0.5) * width).collect();
    let limit_density = x.iter().map(|&v| limit.density(v)).collect();

    let law = FiniteLaw::new(m, n).map_err(|e| e.to_string())?;
    let sample = law.sample_leading(&mut stream(seed, 0), draws, 1, seed).map_err(|e| e.to_string())?;
    let mut counts = vec![0.0; bins];
    for &v in sample.values() {
        let b = ((v - lo) / width).floor();
        if b >= 0.0 && (b as usize) < bins {
            counts[b as usize] += 1.0;
        }
    }
    let scale = 1.0 / (draws as f64 * width);
    Ok(Densities { x, limit: limit_density, histogram: counts.into_iter().map(|c| c * scale).collect() })
}

/// `n = 2, 3, 5, 10, 20, 50, ...` up to `n_max`.
pub fn ladder(n_max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut decade = 1;
    'outer: loop {
        for m in [1, 2, 3, 5] {
            let n = m * decade;
            if n > n_max {
                break 'outer;
            }
            if n >= 2 {
                out.push(n);
            }
        }
        decade *= 10;
        if decade > n_max {
            break;
        }
    }
    out
}

pub fn laplace_convergence(nodes: &[f64], sigma2: f64, s: f64, t: f64, n_max: usize) -> Result<Vec<(f64, f64)>, String> {
    check_n(n_max)?;
    let m = model(nodes, sigma2)?;
    let limit = NonlinearLaw::new(m.clone()).map_err(|e| e.to_string())?;
    let v = limit.domain();
    if !v.contains_pair(s, t) {
        return Err(format!("(s, t) must satisfy s, t, s+t in ({:.4}, {:.4})", v.lower, v.upper));
    }
    let product = limit.laplace(s).map_err(|e| e.to_string())? * limit.laplace(t).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for n in ladder(n_max) {
        let law = FiniteLaw::new(m.clone(), n).map_err(|e| e.to_string())?;
        if let Ok(l2n) = law.laplace_l2n(s, t) {
            out.push((n as f64, (l2n - product).abs()));
        }
    }
    Ok(out)
}

pub fn wasserstein_ladder(nodes: &[f64], sigma2: f64, count: usize, n_max: usize, seed: u64) -> Result<Vec<(f64, f64)>, String> {
    check_n(n_max)?;
    if count == 0 || count > MAX_DRAWS {
        return Err(format!("count must lie in 1..={MAX_DRAWS}"));
    }
    let m = model(nodes, sigma2)?;
    let limit = NonlinearLaw::new(m.clone()).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for (i, n) in ladder(n_max).into_iter().enumerate() {
        let law = FiniteLaw::new(m.clone(), n).map_err(|e| e.to_string())?;
        let draws = law.sample_leading(&mut stream(seed, i as u64), count, 1, seed).map_err(|e| e.to_string())?;
        let w = wq_1d_vs_quantile(draws.values(), |u| limit.phi_split(u, 1.0 - u), 1.0).map_err(|e| e.to_string())?;
        out.push((n as f64, w.distance));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOGISTIC: [f64; 4] = [0.0, 1.0, 1.0, -1.0];

    #[test]
    fn ladder_values() {
        assert_eq!(ladder(100), vec![2, 3, 5, 10, 20, 30, 50, 100]);
        assert_eq!(ladder(2), vec![2]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(model(&[0.0, 1.0], 2.0).is_err());
        assert!(model(&[0.0, -1.0, 1.0, 1.0], 2.0).unwrap_err().contains("not decreasing"));
        assert!(laplace_convergence(&LOGISTIC, 2.0, 0.9, 0.5, 100).is_err());
        assert!(densities(&LOGISTIC, 2.0, 1, 100, 50, 1).is_err());
    }

    #[test]
    fn logistic_density_and_histogram() {
        let d = densities(&LOGISTIC, 2.0, 200, 200_000, 60, 3).unwrap();
        for (x, p) in d.x.iter().zip(&d.limit) {
            let want = (-x).exp() / (1.0 + (-x).exp()).powi(2);
            assert!((p - want).abs() < 1e-10);
        }
        let l1: f64 = d.limit.iter().zip(&d.histogram).map(|(a, b)| (a - b).abs()).sum::<f64>() * (d.x[1] - d.x[0]);
        assert!(l1 < 0.05, "{l1}");
        assert_eq!(d.flatten().len(), 180);
    }

    #[test]
    fn convergence_and_ladder_trend() {
        let c = laplace_convergence(&LOGISTIC, 2.0, 0.3, -0.2, 10_000).unwrap();
        assert!(c.last().unwrap().1 < c[0].1);
        let w = wasserstein_ladder(&LOGISTIC, 2.0, 20_000, 100, 1).unwrap();
        assert!(w.last().unwrap().1 < w[0].1);
    }
}
