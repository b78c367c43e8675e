//! The centered stationary law of the mean-field rank-based diffusion.
//!
//! The law is described by its quantile function
//!
//! ```text
//! Φ(u) = ∫_0^u v σ² / (2B(v)) dv - ∫_u^1 (1-v) σ² / (2B(v)) dv,   0 < u < 1,
//! ```
//!
//! with `Φ' = σ² / (2B)`. On each segment of a piecewise-linear drift `B` is
//! a quadratic `c (u - x1)(u - x2)`, so `∫ 1/B` has an exact logarithmic
//! antiderivative. `Φ` is evaluated from that antiderivative anchored at a
//! handful of reference values, and the reference `Φ(1/2)` comes from the
//! integral definition above by Gauss–Kronrod quadrature.
//! [`NonlinearLaw::phi_by_quadrature`] evaluates the definition directly at
//! any point and serves as an independent check.

use rand::Rng;

use crate::drift::DriftModel;
use crate::error::{Error, Result};
use crate::quadrature::{self, QuadResult, Tolerance};
use crate::rng::open_unit_pair;
use crate::sample::{EmpiricalSample, Provenance};

/// The open interval `V = (-2b(0)/σ², -2b(1)/σ²)` of arguments at which the
/// Laplace transform of the mean-field law is finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceDomainV {
    pub lower: f64,
    pub upper: f64,
}

impl LaplaceDomainV {
    pub fn of(model: &DriftModel) -> Self {
        LaplaceDomainV {
            lower: -2.0 * model.b0() / model.sigma2(),
            upper: -2.0 * model.b1() / model.sigma2(),
        }
    }

    pub fn contains(&self, r: f64) -> bool {
        r > self.lower && r < self.upper
    }

    /// `(s, t) ∈ V₂`: `s`, `t` and `s + t` all in `V`.
    pub fn contains_pair(&self, s: f64, t: f64) -> bool {
        self.contains(s) && self.contains(t) && self.contains(s + t)
    }

    pub fn check(&self, r: f64) -> Result<()> {
        if r > self.lower && r < self.upper {
            return Ok(());
        }
        Err(Error::LaplaceDomain {
            r,
            lower: self.lower,
            upper: self.upper,
            violated: if r <= self.lower { "lower" } else { "upper" },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Root {
    Zero,
    One,
    At(f64),
}

impl Root {
    fn position(self) -> f64 {
        match self {
            Root::Zero => 0.0,
            Root::One => 1.0,
            Root::At(x) => x,
        }
    }

    /// `u - root`, computed from whichever of `u`, `1 - u` is exact.
    fn offset(self, u: f64, uc: f64) -> f64 {
        match self {
            Root::Zero => u,
            Root::One => -uc,
            Root::At(x) => u - x,
        }
    }
}

/// `B(u) = c (u - x1)(u - x2)` on `[lo, hi]`, plus a reference point where
/// `Φ` is known.
#[derive(Debug, Clone)]
struct PhiSegment {
    hi: f64,
    c: f64,
    x1: Root,
    x2: Root,
    ref_u: f64,
    ref_phi: f64,
}

impl PhiSegment {
    /// Antiderivative of `1/B`: `(ln|u-x1| - ln|u-x2|) / (c (x1 - x2))`.
    fn g(&self, u: f64, uc: f64) -> f64 {
        let d1 = self.x1.offset(u, uc).abs().ln();
        let d2 = self.x2.offset(u, uc).abs().ln();
        (d1 - d2) / (self.c * (self.x1.position() - self.x2.position()))
    }

    fn big_b(&self, u: f64, uc: f64) -> f64 {
        self.c * self.x1.offset(u, uc) * self.x2.offset(u, uc)
    }
}

#[derive(Debug, Clone)]
pub struct NonlinearLaw {
    model: DriftModel,
    translation: f64,
    segments: Vec<PhiSegment>,
    phi_half: f64,
    tolerance: Tolerance,
}

impl NonlinearLaw {
    /// The centered stationary law of `model`.
    pub fn new(model: DriftModel) -> Result<Self> {
        Self::with_tolerance(model, Tolerance::default())
    }

    pub fn with_tolerance(model: DriftModel, tolerance: Tolerance) -> Result<Self> {
        model.require_valid()?;
        let mut law = NonlinearLaw {
            segments: factorise(&model),
            model,
            translation: 0.0,
            phi_half: 0.0,
            tolerance,
        };
        law.phi_half = law.phi_half_by_quadrature()?;
        law.anchor_segments();
        Ok(law)
    }

    /// The stationary law shifted by `translation` (its mean).
    pub fn translated(mut self, translation: f64) -> Self {
        self.translation = translation;
        self
    }

    pub fn model(&self) -> &DriftModel {
        &self.model
    }

    pub fn translation(&self) -> f64 {
        self.translation
    }

    pub fn domain(&self) -> LaplaceDomainV {
        LaplaceDomainV::of(&self.model)
    }

    /// `σ²/(2b(0))`: `Φ(u) ~ tail_exponent_0 · ln u` as `u ↓ 0`.
    pub fn tail_exponent_0(&self) -> f64 {
        self.model.sigma2() / (2.0 * self.model.b0())
    }

    /// `σ²/(2b(1))` (negative): `Φ(u) ~ tail_exponent_1 · ln(1-u)` as `u ↑ 1`.
    pub fn tail_exponent_1(&self) -> f64 {
        self.model.sigma2() / (2.0 * self.model.b1())
    }

    fn phi_half_by_quadrature(&self) -> Result<f64> {
        let half_s2 = 0.5 * self.model.sigma2();
        let left = quadrature::gauss_kronrod(
            |v| {
                let seg = self.segment(v);
                v / seg.big_b(v, 1.0 - v)
            },
            0.0,
            0.5,
            &self.breakpoints(),
            self.tolerance,
        )?;
        let right = quadrature::gauss_kronrod(
            |v| {
                let seg = self.segment(v);
                (1.0 - v) / seg.big_b(v, 1.0 - v)
            },
            0.5,
            1.0,
            &self.breakpoints(),
            self.tolerance,
        )?;
        Ok(half_s2 * (left.value - right.value))
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.model.nodes().iter().map(|p| p.0).collect()
    }

    /// Chains `Φ` from `1/2` to every interior node and stores one finite
    /// reference value per segment.
    fn anchor_segments(&mut self) {
        let half_s2 = 0.5 * self.model.sigma2();
        let nodes: Vec<f64> = self.breakpoints();
        let last = nodes.len() - 1;
        // Φ at interior nodes, by integrating Φ' = σ²/(2B) from 1/2.
        let mut phi_at = vec![f64::NAN; nodes.len()];
        let start = self.segment_index(0.5);
        let mut from = (0.5, self.phi_half);
        for j in start + 1..last {
            let seg = &self.segments[j - 1];
            let v = from.1 + half_s2 * (seg.g(nodes[j], 1.0 - nodes[j]) - seg.g(from.0, 1.0 - from.0));
            phi_at[j] = v;
            from = (nodes[j], v);
        }
        let mut from = (0.5, self.phi_half);
        for j in (1..=start).rev() {
            let seg = &self.segments[j];
            let v = from.1 + half_s2 * (seg.g(nodes[j], 1.0 - nodes[j]) - seg.g(from.0, 1.0 - from.0));
            phi_at[j] = v;
            from = (nodes[j], v);
        }
        for (i, seg) in self.segments.iter_mut().enumerate() {
            if last == 1 {
                seg.ref_u = 0.5;
                seg.ref_phi = self.phi_half;
            } else if i == 0 {
                seg.ref_u = nodes[1];
                seg.ref_phi = phi_at[1];
            } else {
                seg.ref_u = nodes[i];
                seg.ref_phi = phi_at[i];
            }
        }
    }

    fn segment_index(&self, u: f64) -> usize {
        self.segments
            .iter()
            .position(|s| u <= s.hi)
            .unwrap_or(self.segments.len() - 1)
    }

    fn segment(&self, u: f64) -> &PhiSegment {
        &self.segments[self.segment_index(u)]
    }

    /// `Φ(u) + translation` for `u ∈ (0, 1)`.
    pub fn phi(&self, u: f64) -> Result<f64> {
        check_open_unit(u)?;
        Ok(self.phi_split(u, 1.0 - u))
    }

    /// `Φ` at the point given as `(u, 1 - u)`.
    pub fn phi_split(&self, u: f64, uc: f64) -> f64 {
        let seg = self.segment(u);
        let half_s2 = 0.5 * self.model.sigma2();
        let g_ref = seg.g(seg.ref_u, 1.0 - seg.ref_u);
        self.translation + seg.ref_phi + half_s2 * (seg.g(u, uc) - g_ref)
    }

    /// `Φ(u) + translation` evaluated directly from the two-integral
    /// definition by adaptive quadrature; slow, used for verification.
    pub fn phi_by_quadrature(&self, u: f64) -> Result<f64> {
        check_open_unit(u)?;
        let model = &self.model;
        let mut bps = self.breakpoints();
        bps.push(u);
        let left = quadrature::gauss_kronrod(
            |v| v / model.antiderivative_split(v, 1.0 - v),
            0.0,
            u,
            &bps,
            self.tolerance,
        )?;
        let right = quadrature::gauss_kronrod(
            |v| (1.0 - v) / model.antiderivative_split(v, 1.0 - v),
            u,
            1.0,
            &bps,
            self.tolerance,
        )?;
        Ok(self.translation + 0.5 * model.sigma2() * (left.value - right.value))
    }

    /// `Φ'(u) = σ² / (2B(u))`.
    pub fn phi_derivative(&self, u: f64) -> Result<f64> {
        check_open_unit(u)?;
        Ok(self.phi_derivative_split(u, 1.0 - u))
    }

    fn phi_derivative_split(&self, u: f64, uc: f64) -> f64 {
        0.5 * self.model.sigma2() / self.segment(u).big_b(u, uc)
    }

    /// `B` on the factorised representation, accurate near both endpoints.
    fn big_b_split(&self, u: f64, uc: f64) -> f64 {
        self.segment(u).big_b(u, uc)
    }

    /// The cumulative distribution function `F_∞(x)`, inverse of `Φ`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.cdf_split(x).0
    }

    /// `(F_∞(x), 1 - F_∞(x))`, each to full relative precision.
    pub fn cdf_split(&self, x: f64) -> (f64, f64) {
        let y = x - self.translation;
        let half_s2 = 0.5 * self.model.sigma2();
        if y <= self.phi_half {
            let p = solve_branch(
                y,
                self.phi_half,
                self.tail_exponent_0(),
                |p| (self.phi_split(p, 1.0 - p) - self.translation, half_s2 / self.big_b_split(p, 1.0 - p)),
            );
            (p, 1.0 - p)
        } else {
            let p = solve_branch(
                -y,
                -self.phi_half,
                -self.tail_exponent_1(),
                |p| (-(self.phi_split(1.0 - p, p) - self.translation), half_s2 / self.big_b_split(1.0 - p, p)),
            );
            (1.0 - p, p)
        }
    }

    /// The density `p_∞(x) = (2/σ²) B(F_∞(x))`.
    pub fn density(&self, x: f64) -> f64 {
        let (u, uc) = self.cdf_split(x);
        (2.0 / self.model.sigma2()) * self.big_b_split(u, uc).max(0.0)
    }

    /// `L_∞(r) = ∫_0^1 exp(r Φ(u)) du` for `r ∈ V`, by tanh-sinh quadrature.
    pub fn laplace(&self, r: f64) -> Result<f64> {
        self.laplace_with_error(r).map(|q| q.value)
    }

    pub fn laplace_with_error(&self, r: f64) -> Result<QuadResult> {
        self.domain().check(r)?;
        if r == 0.0 {
            return Ok(QuadResult { value: 1.0, error: 0.0 });
        }
        quadrature::tanh_sinh_unit(|u, uc| (r * self.phi_split(u, uc)).exp(), 1e-12, 0.0, 12)
    }

    /// `∫_0^1 (Φ(u) + translation) du`; zero for the centered law.
    pub fn check_centering(&self) -> Result<f64> {
        quadrature::tanh_sinh_unit(|u, uc| self.phi_split(u, uc), 1e-13, 1e-13, 12).map(|q| q.value)
    }

    /// Inverse-CDF draws `Φ(U) + translation`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize, seed: u64) -> Result<EmpiricalSample> {
        if count == 0 {
            return Err(Error::InvalidParameter("sample count must be at least 1".into()));
        }
        let values = (0..count)
            .map(|_| {
                let (u, uc) = open_unit_pair(rng);
                self.phi_split(u, uc)
            })
            .collect();
        EmpiricalSample::scalar(
            values,
            Provenance {
                sampler: "nonlinear-inverse-cdf".into(),
                seed,
                n: 0,
            },
        )
    }
}

fn check_open_unit(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            arg: "u",
            value: u,
            range: "(0, 1)".into(),
        })
    }
}

/// Roots of `B` on every segment. The first segment has the root `0`, the
/// last the root `1`; both are represented symbolically so that the log
/// singularities are evaluated from exact offsets.
fn factorise(model: &DriftModel) -> Vec<PhiSegment> {
    let nodes = model.nodes();
    let last = nodes.len() - 1;
    let mut out = Vec::with_capacity(last);
    for i in 0..last {
        let (u0, b0) = nodes[i];
        let (u1, b1) = nodes[i + 1];
        let m = (b1 - b0) / (u1 - u0);
        let (c, x1, x2) = if last == 1 {
            // B(u) = κ u (1-u) with κ = (b(0) - b(1))/2 for a balanced drift.
            (-(b0 - b1) / 2.0, Root::Zero, Root::One)
        } else if i == 0 {
            (0.5 * m, Root::Zero, Root::At(-2.0 * b0 / m))
        } else if i == last - 1 {
            (0.5 * m, Root::One, Root::At(1.0 - 2.0 * b1 / m))
        } else {
            // B(u0 + y) = B(u0) + b0 y + (m/2) y², roots by the stable formula.
            let a = model.antiderivative_unchecked(u0);
            let c = 0.5 * m;
            let disc = (b0 * b0 - 4.0 * c * a).sqrt();
            let sign = if b0 >= 0.0 { 1.0 } else { -1.0 };
            let q = -0.5 * (b0 + sign * disc);
            (c, Root::At(u0 + q / c), Root::At(u0 + a / q))
        };
        out.push(PhiSegment {
            hi: u1,
            c,
            x1,
            x2,
            ref_u: f64::NAN,
            ref_phi: f64::NAN,
        });
    }
    out
}

/// Solves `h(p) = target` for `p ∈ (0, 1/2]` where `h` is increasing,
/// `h(1/2) = h_half >= target`, and `h(p) ~ slope · ln p` as `p ↓ 0`.
/// `eval` returns `(h(p), h'(p))`. Safeguarded Newton on a bracket that is
/// bisected geometrically while it spans several decades.
fn solve_branch<F: Fn(f64) -> (f64, f64)>(target: f64, h_half: f64, slope: f64, eval: F) -> f64 {
    const FLOOR: f64 = 1e-300;
    let tol = 1e-13 * (1.0 + target.abs());
    if h_half - target <= tol {
        return 0.5;
    }
    let mut hi = 0.5;
    let mut lo = ((target - h_half) / slope).exp().clamp(FLOOR, 0.25) * 0.5;
    loop {
        let (h, _) = eval(lo);
        if h <= target {
            break;
        }
        hi = lo;
        if lo == FLOOR {
            return FLOOR;
        }
        lo = (lo * lo).max(FLOOR);
    }
    let mut p = lo.max(((target - h_half) / slope).exp() * 0.5).min(hi);
    for _ in 0..200 {
        let (h, dh) = eval(p);
        let resid = h - target;
        if resid.abs() <= tol {
            return p;
        }
        if resid < 0.0 {
            lo = p;
        } else {
            hi = p;
        }
        let newton = p - resid / dh;
        p = if newton > lo && newton < hi && newton.is_finite() {
            newton
        } else if hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return p;
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{asymmetric, logistic};
    use crate::rng::stream;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn logistic_law() -> NonlinearLaw {
        NonlinearLaw::new(logistic()).unwrap()
    }

    #[test]
    fn logistic_phi_closed_form() {
        let law = logistic_law();
        assert!(law.phi(0.5).unwrap().abs() < 1e-15);
        assert!((law.phi(0.75).unwrap() - 3f64.ln()).abs() < 1e-14);
        for &u in &[1e-12f64, 1e-3, 0.2, 0.9, 1.0 - 1e-9] {
            let exact = (u / (1.0 - u)).ln();
            assert!((law.phi(u).unwrap() - exact).abs() < 1e-12 * (1.0 + exact.abs()));
        }
        assert!(law.phi(0.0).is_err());
        assert!(law.phi(1.0).is_err());
    }

    #[test]
    fn phi_fast_route_matches_direct_quadrature() {
        for law in [logistic_law(), NonlinearLaw::new(asymmetric()).unwrap()] {
            for &u in &[0.01, 0.1, 0.24, 0.25, 0.3, 0.5, 0.51, 0.77, 0.99] {
                let fast = law.phi(u).unwrap();
                let slow = law.phi_by_quadrature(u).unwrap();
                assert!((fast - slow).abs() < 1e-10 * (1.0 + fast.abs()), "u={u}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn derivative_closed_form_and_blowup() {
        let law = logistic_law();
        assert!((law.phi_derivative(0.5).unwrap() - 4.0).abs() < 1e-14);
        assert!(law.phi_derivative(1e-7).unwrap() > 1e6);
        assert!(law.phi_derivative(1.0 - 1e-7).unwrap() > 1e6);
    }

    #[test]
    fn derivative_matches_central_differences() {
        for law in [logistic_law(), NonlinearLaw::new(asymmetric()).unwrap()] {
            for j in 1..=90 {
                let u = 0.05 + 0.01 * j as f64 - 0.005;
                let h = 1e-5;
                let fd = (law.phi(u + h).unwrap() - law.phi(u - h).unwrap()) / (2.0 * h);
                let exact = law.phi_derivative(u).unwrap();
                assert!(((fd - exact) / exact).abs() < 1e-6, "u={u}");
            }
        }
    }

    #[test]
    fn cdf_inverts_phi() {
        let law = logistic_law();
        assert!((law.cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((law.cdf(3f64.ln()) - 0.75).abs() < 1e-14);
        // logistic CDF in the far tails
        for &x in &[-600.0, -40.0, -1.0, 2.0, 35.0, 600.0] {
            let (u, uc) = law.cdf_split(x);
            let exact_u = 1.0 / (1.0 + (-x).exp());
            let exact_uc = 1.0 / (1.0 + x.exp());
            if x < 0.0 {
                assert!((u / exact_u - 1.0).abs() < 1e-11, "x={x}");
            } else {
                assert!((uc / exact_uc - 1.0).abs() < 1e-11, "x={x}");
            }
        }
    }

    #[test]
    fn logistic_density() {
        let law = logistic_law();
        assert!((law.density(0.0) - 0.25).abs() < 1e-15);
        let total = quadrature::gauss_kronrod(|x| law.density(x), -40.0, 40.0, &[0.0], Tolerance::default()).unwrap();
        assert!((total.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn density_normalised_asymmetric() {
        let law = NonlinearLaw::new(asymmetric()).unwrap();
        let total = quadrature::gauss_kronrod_real_line(|x| law.density(x), 0.0, Tolerance::default()).unwrap();
        assert!((total.value - 1.0).abs() < 1e-8, "{}", total.value);
        for j in 1..100 {
            let u = j as f64 / 100.0;
            let x = law.phi(u).unwrap();
            assert!((law.density(x) * law.phi_derivative(u).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn logistic_laplace() {
        let law = logistic_law();
        assert!((law.laplace(0.0).unwrap() - 1.0).abs() < 1e-13);
        assert!((law.laplace(0.5).unwrap() - PI / 2.0).abs() < 1e-10);
        for r in [-0.9, -0.5, -0.1, 0.1, 0.5, 0.9] {
            let exact = PI * r / (PI * r).sin();
            assert!((law.laplace(r).unwrap() / exact - 1.0).abs() < 1e-9, "r={r}");
        }
        match law.laplace(1.0) {
            Err(Error::LaplaceDomain { violated, .. }) => assert_eq!(violated, "upper"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(law.laplace(-1.0), Err(Error::LaplaceDomain { violated: "lower", .. })));
        let v = law.domain();
        assert_eq!((v.lower, v.upper), (-1.0, 1.0));
    }

    #[test]
    fn laplace_log_convex() {
        for law in [logistic_law(), NonlinearLaw::new(asymmetric()).unwrap()] {
            let v = law.domain();
            let rs: Vec<f64> = (1..40).map(|j| v.lower + (v.upper - v.lower) * j as f64 / 40.0).collect();
            let logs: Vec<f64> = rs.iter().map(|&r| law.laplace(r).unwrap().ln()).collect();
            for w in logs.windows(3) {
                assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-9);
            }
        }
    }

    #[test]
    fn centering() {
        assert!(logistic_law().check_centering().unwrap().abs() < 1e-10);
        let asym = NonlinearLaw::new(asymmetric()).unwrap();
        assert!(asym.check_centering().unwrap().abs() < 1e-8);
        let shifted = logistic_law().translated(1.0);
        assert!((shifted.check_centering().unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tail_exponents() {
        let law = NonlinearLaw::new(asymmetric()).unwrap();
        assert!(law.tail_exponent_0() > 0.0 && law.tail_exponent_1() < 0.0);
        let lg = logistic_law();
        let u = 1e-6;
        let ratio = lg.phi(u).unwrap() / (lg.tail_exponent_0() * u.ln());
        assert!((0.9..=1.1).contains(&ratio));
        let ratio = lg.phi(1.0 - u).unwrap() / (lg.tail_exponent_1() * u.ln());
        assert!((0.9..=1.1).contains(&ratio));
    }

    #[test]
    fn invalid_model_rejected() {
        let bad = DriftModel::piecewise_linear(&[(0.0, 1.0), (1.0, -3.0)], 1.0).unwrap();
        assert!(matches!(NonlinearLaw::new(bad), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn sampling_mean_and_mgf() {
        let law = logistic_law();
        let mut rng = stream(11, 0);
        let s = law.sample(&mut rng, 1_000_000, 11).unwrap();
        let n = s.len() as f64;
        let mean = s.values().iter().sum::<f64>() / n;
        let var = s.values().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 4.0 * (var / n).sqrt());
        let e: Vec<f64> = s.values().iter().map(|x| (0.5 * x).exp()).collect();
        let m = e.iter().sum::<f64>() / n;
        let v = e.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((m - PI / 2.0).abs() < 3.0 * (v / n).sqrt());
        assert!(law.sample(&mut rng, 0, 0).is_err());

        let shifted = logistic_law().translated(5.0);
        let s = shifted.sample(&mut rng, 100_000, 0).unwrap();
        let mean = s.values().iter().sum::<f64>() / s.len() as f64;
        assert!((mean - 5.0).abs() < 0.05);
    }

    proptest! {
        #[test]
        fn phi_increasing(a in 1e-12f64..1.0, b in 1e-12f64..1.0) {
            prop_assume!(a != b && a < 1.0 && b < 1.0);
            let law = NonlinearLaw::new(asymmetric()).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(law.phi(lo).unwrap() < law.phi(hi).unwrap());
        }

        #[test]
        fn inverse_pair(u in 1e-9f64..(1.0 - 1e-9), x in -60.0f64..60.0) {
            for law in [logistic_law(), NonlinearLaw::new(asymmetric()).unwrap()] {
                let back = law.cdf(law.phi(u).unwrap());
                prop_assert!((back - u).abs() <= 1e-10);
                let (v, vc) = law.cdf_split(x);
                prop_assert!((law.phi_split(v, vc) - x).abs() <= 1e-10 * (1.0 + x.abs()));
            }
        }
    }
}
