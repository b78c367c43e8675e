//! Quadrature rules used throughout the crate.
//!
//! Two rules cover every integral we need: an adaptive Gauss–Kronrod (7/15)
//! rule for bounded, piecewise-smooth integrands, and a tanh-sinh rule on the
//! unit interval for integrands with algebraic endpoint singularities. The
//! tanh-sinh rule hands the integrand both `u` and `1 - u`, each computed
//! without cancellation, so the integrand can resolve points within
//! `1e-300` of either endpoint.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-14,
            rel: 1e-12,
            max_intervals: 4000,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> QuadResult {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    QuadResult {
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// `breakpoints` lists interior points where the integrand has a kink or a
/// change of formula; the initial partition is split there.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut edges = vec![lo];
    let mut interior: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > lo && x < hi)
        .collect();
    interior.sort_by(f64::total_cmp);
    interior.dedup();
    edges.extend(interior);
    edges.push(hi);

    let mut panels: Vec<(f64, f64, QuadResult)> = edges
        .windows(2)
        .map(|w| (w[0], w[1], kronrod15(&f, w[0], w[1])))
        .collect();

    loop {
        let value: f64 = panels.iter().map(|p| p.2.value).sum();
        let error: f64 = panels.iter().map(|p| p.2.error).sum();
        if !value.is_finite() {
            return Err(Error::Quadrature { estimate: value, error });
        }
        if error <= tol.abs.max(tol.rel * value.abs()) {
            return Ok(QuadResult {
                value: sign * value,
                error,
            });
        }
        if panels.len() >= tol.max_intervals {
            return Err(Error::Quadrature { estimate: value, error });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.error.total_cmp(&y.1 .2.error))
            .expect("at least one panel");
        let (l, r, _) = panels.swap_remove(worst);
        let mid = 0.5 * (l + r);
        if mid <= l || mid >= r {
            // Panel cannot be split further in floating point.
            return Ok(QuadResult {
                value: sign * value,
                error,
            });
        }
        panels.push((l, mid, kronrod15(&f, l, mid)));
        panels.push((mid, r, kronrod15(&f, mid, r)));
    }
}

/// Integrates `f` over `[a, +inf)` through `x = a + s / (1 - s)`.
pub fn gauss_kronrod_upper_tail<F: Fn(f64) -> f64>(f: F, a: f64, tol: Tolerance) -> Result<QuadResult> {
    gauss_kronrod(
        |s| {
            let w = 1.0 - s;
            let v = f(a + s / w) / (w * w);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        &[],
        tol,
    )
}

/// Integrates `f` over `(-inf, a]`.
pub fn gauss_kronrod_lower_tail<F: Fn(f64) -> f64>(f: F, a: f64, tol: Tolerance) -> Result<QuadResult> {
    gauss_kronrod_upper_tail(|x| f(2.0 * a - x), a, tol)
}

/// Integrates `f` over the whole real line, splitting at `split`.
pub fn gauss_kronrod_real_line<F: Fn(f64) -> f64>(f: F, split: f64, tol: Tolerance) -> Result<QuadResult> {
    let lower = gauss_kronrod_lower_tail(&f, split, tol)?;
    let upper = gauss_kronrod_upper_tail(&f, split, tol)?;
    Ok(QuadResult {
        value: lower.value + upper.value,
        error: lower.error + upper.error,
    })
}

/// Largest `|t|` used by [`tanh_sinh_unit`]; the abscissae then lie at least
/// `exp(-700)` away from either endpoint.
const TANH_SINH_T_MAX: f64 = 6.1;

/// Tanh-sinh quadrature of `f(u, 1 - u)` over `(0, 1)`.
///
/// The substitution `u = 1 / (1 + exp(-π sinh t))` clusters nodes double
/// exponentially at both ends, so integrands that blow up like `u^a` with
/// `a > -1` are handled at full accuracy as long as `a + 1` is not tiny.
pub fn tanh_sinh_unit<F: Fn(f64, f64) -> f64>(
    f: F,
    rel_tol: f64,
    abs_tol: f64,
    max_level: u32,
) -> Result<QuadResult> {
    let term = |t: f64| -> f64 {
        let z = std::f64::consts::PI * t.sinh();
        let (u, uc) = if z >= 0.0 {
            let e = (-z).exp();
            (1.0 / (1.0 + e), e / (1.0 + e))
        } else {
            let e = z.exp();
            (e / (1.0 + e), 1.0 / (1.0 + e))
        };
        if u == 0.0 || uc == 0.0 {
            return 0.0;
        }
        let weight = std::f64::consts::PI * t.cosh() * u * uc;
        f(u, uc) * weight
    };

    let mut h = 1.0_f64;
    let mut sum = term(0.0);
    let mut k = 1;
    while (k as f64) * h <= TANH_SINH_T_MAX {
        let t = k as f64 * h;
        sum += term(t) + term(-t);
        k += 1;
    }
    let mut estimate = sum * h;
    let mut last_diff = f64::INFINITY;

    for _level in 1..=max_level {
        h *= 0.5;
        let mut fresh = 0.0;
        let mut k = 1;
        while (k as f64) * h <= TANH_SINH_T_MAX {
            let t = k as f64 * h;
            fresh += term(t) + term(-t);
            k += 2;
        }
        sum += fresh;
        let next = sum * h;
        if !next.is_finite() {
            return Err(Error::Quadrature {
                estimate: next,
                error: f64::INFINITY,
            });
        }
        let diff = (next - estimate).abs();
        estimate = next;
        if diff <= (rel_tol * estimate.abs()).max(abs_tol) {
            // Double-exponential convergence roughly squares the relative
            // error per level, so the latest difference overestimates it.
            return Ok(QuadResult {
                value: estimate,
                error: diff,
            });
        }
        last_diff = diff;
    }
    Err(Error::Quadrature {
        estimate,
        error: last_diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_integrates_polynomials_exactly() {
        let r = gauss_kronrod(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, &[], Tolerance::default()).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn kronrod_handles_kinks_at_breakpoints() {
        let r = gauss_kronrod(|x: f64| x.abs(), -1.0, 3.0, &[0.0], Tolerance::default()).unwrap();
        assert!((r.value - 5.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let r = gauss_kronrod(|x: f64| x.exp(), 1.0, 0.0, &[], Tolerance::default()).unwrap();
        assert!((r.value + (std::f64::consts::E - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn real_line_gaussian() {
        let r = gauss_kronrod_real_line(|x: f64| (-0.5 * x * x).exp(), 0.0, Tolerance::default()).unwrap();
        assert!((r.value - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-11);
    }

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        // ∫ u^{-0.9} (1-u)^{-0.5} du = B(0.1, 0.5)
        let r = tanh_sinh_unit(|u, uc| u.powf(-0.9) * uc.powf(-0.5), 1e-12, 0.0, 12).unwrap();
        // Beta(0.1, 0.5) = Γ(0.1)Γ(0.5)/Γ(0.6)
        let exact = 9.513_507_698_668_732 * std::f64::consts::PI.sqrt() / 1.489_192_248_812_817;
        assert!((r.value / exact - 1.0).abs() < 1e-10, "{} vs {}", r.value, exact);
    }

    #[test]
    fn tanh_sinh_log_endpoint() {
        let r = tanh_sinh_unit(|u, _| u.ln(), 1e-13, 0.0, 12).unwrap();
        assert!((r.value + 1.0).abs() < 1e-12);
    }
}
