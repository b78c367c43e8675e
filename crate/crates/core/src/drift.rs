//! The rank drift `b` on `[0, 1]`, its antiderivative `B`, and the rank
//! weights `b_n(k) = n (B(k/n) - B((k-1)/n))`.
//!
//! Only continuous piecewise-linear drifts are representable. For those, `B`
//! is piecewise quadratic, so every quantity derived from it here (rank
//! weights, infima of `B(u)/u`, endpoint linearisation bounds) is evaluated
//! in closed form.

use std::fmt;

use crate::error::{Error, Result};

/// Default tolerance on `|B(1)|` used by [`DriftModel::validation`].
pub const DEFAULT_VALIDATION_TOL: f64 = 1e-10;

/// Number of sub-intervals of the dense grid used by the validation checks.
const VALIDATION_GRID: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftKind {
    /// `b(u) = c (1/2 - u)`.
    Linear { c: f64 },
    PiecewiseLinear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationCheck {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<ValidationCheck>,
    pub message: String,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<28} {:>24} {:>12}  status", "check", "measured", "tolerance")?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<28} {:>24.16e} {:>12.3e}  {}",
                c.name,
                c.measured,
                c.tolerance,
                if c.passed { "ok" } else { "FAIL" }
            )?;
        }
        write!(f, "{}", self.message)
    }
}

/// Infima of `B(u)/u` over `[0, 1-δ]` and of `B(u)/(1-u)` over `[δ, 1]`,
/// together with the points where they are attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfimumRatios {
    pub m_minus: f64,
    pub argmin_minus: f64,
    pub m_plus: f64,
    pub argmin_plus: f64,
}

#[derive(Debug, Clone)]
pub struct DriftModel {
    kind: DriftKind,
    /// Nodes `(u_i, b(u_i))`, `u_0 = 0`, `u_last = 1`.
    nodes: Vec<(f64, f64)>,
    /// `B(u_i)`, accumulated from the left.
    head: Vec<f64>,
    /// `∫_{u_i}^1 b`, accumulated from the right.
    tail: Vec<f64>,
    sigma2: f64,
    validation: ValidationReport,
}

impl DriftModel {
    /// The linear drift `b(u) = c (1/2 - u)` with diffusion coefficient `sigma`.
    pub fn linear(c: f64, sigma: f64) -> Result<Self> {
        Self::linear_with_sigma2(c, check_sigma(sigma)?)
    }

    /// Convenience constructor taking `σ²` instead of `σ`.
    pub fn linear_with_sigma2(c: f64, sigma2: f64) -> Result<Self> {
        let sigma2 = check_sigma2(sigma2)?;
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "slope magnitude c must be positive, got {c}"
            )));
        }
        Ok(Self::build(
            DriftKind::Linear { c },
            vec![(0.0, 0.5 * c), (1.0, -0.5 * c)],
            sigma2,
        ))
    }

    /// Continuous piecewise-linear drift through `nodes`.
    pub fn piecewise_linear(nodes: &[(f64, f64)], sigma: f64) -> Result<Self> {
        Self::piecewise_linear_with_sigma2(nodes, check_sigma(sigma)?)
    }

    pub fn piecewise_linear_with_sigma2(nodes: &[(f64, f64)], sigma2: f64) -> Result<Self> {
        let sigma2 = check_sigma2(sigma2)?;
        if nodes.len() < 2 {
            return Err(Error::InvalidParameter(
                "a piecewise-linear drift needs at least two nodes".into(),
            ));
        }
        if nodes.iter().any(|&(u, b)| !u.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidParameter("non-finite drift node".into()));
        }
        if nodes[0].0 != 0.0 || nodes[nodes.len() - 1].0 != 1.0 {
            return Err(Error::InvalidParameter(format!(
                "nodes must span [0, 1], got [{}, {}]",
                nodes[0].0,
                nodes[nodes.len() - 1].0
            )));
        }
        if let Some(w) = nodes.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidParameter(format!(
                "node abscissae must be strictly increasing: {} then {}",
                w[0].0, w[1].0
            )));
        }
        Ok(Self::build(DriftKind::PiecewiseLinear, nodes.to_vec(), sigma2))
    }

    fn build(kind: DriftKind, nodes: Vec<(f64, f64)>, sigma2: f64) -> Self {
        let mut head = Vec::with_capacity(nodes.len());
        head.push(0.0);
        for w in nodes.windows(2) {
            let last = *head.last().unwrap();
            head.push(last + 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1));
        }
        let mut tail = vec![0.0; nodes.len()];
        for i in (0..nodes.len() - 1).rev() {
            tail[i] = tail[i + 1] + 0.5 * (nodes[i + 1].0 - nodes[i].0) * (nodes[i].1 + nodes[i + 1].1);
        }
        let mut model = DriftModel {
            kind,
            nodes,
            head,
            tail,
            sigma2,
            validation: ValidationReport {
                passed: false,
                checks: Vec::new(),
                message: String::new(),
            },
        };
        model.validation = model.validate(DEFAULT_VALIDATION_TOL);
        model
    }

    pub fn kind(&self) -> DriftKind {
        self.kind
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    /// `σ²`.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Validation report computed at construction with the default tolerance.
    pub fn validation(&self) -> &ValidationReport {
        &self.validation
    }

    pub fn is_valid(&self) -> bool {
        self.validation.passed
    }

    pub(crate) fn require_valid(&self) -> Result<()> {
        if self.validation.passed {
            Ok(())
        } else {
            Err(Error::InvalidModel(self.validation.message.clone()))
        }
    }

    fn segment_of(&self, u: f64) -> usize {
        let last = self.nodes.len() - 2;
        match self.nodes.binary_search_by(|p| p.0.total_cmp(&u)) {
            Ok(i) => i.min(last),
            Err(i) => (i.max(1) - 1).min(last),
        }
    }

    /// `b(u)`, linearly interpolated; `u` is clamped to `[0, 1]`.
    pub fn drift(&self, u: f64) -> f64 {
        if let DriftKind::Linear { c } = self.kind {
            return c * (0.5 - u.clamp(0.0, 1.0));
        }
        let u = u.clamp(0.0, 1.0);
        let i = self.segment_of(u);
        let (u0, b0) = self.nodes[i];
        let (u1, b1) = self.nodes[i + 1];
        let theta = (u - u0) / (u1 - u0);
        b0 + theta * (b1 - b0)
    }

    pub fn b0(&self) -> f64 {
        self.nodes[0].1
    }

    pub fn b1(&self) -> f64 {
        self.nodes[self.nodes.len() - 1].1
    }

    /// `B(1)`, the mean drift `b̄`.
    pub fn mean_drift(&self) -> f64 {
        self.head[self.head.len() - 1]
    }

    /// `B(u) = ∫_0^u b`.
    pub fn antiderivative(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::OutOfRange {
                arg: "u",
                value: u,
                range: "[0, 1]".into(),
            });
        }
        Ok(self.antiderivative_unchecked(u))
    }

    pub(crate) fn antiderivative_unchecked(&self, u: f64) -> f64 {
        if let DriftKind::Linear { c } = self.kind {
            return 0.5 * c * u * (1.0 - u);
        }
        let i = self.segment_of(u);
        let (u0, b0) = self.nodes[i];
        let (u1, b1) = self.nodes[i + 1];
        let bu = self.drift(u);
        if u <= 0.5 {
            self.head[i] + 0.5 * (u - u0) * (b0 + bu)
        } else {
            self.mean_drift() - (self.tail[i + 1] + 0.5 * (u1 - u) * (bu + b1))
        }
    }

    /// `B` evaluated at a point given both as `u` and as its complement
    /// `1 - u`; the complement is used for `u > 1/2` so that values near the
    /// right endpoint keep full relative precision.
    pub(crate) fn antiderivative_split(&self, u: f64, uc: f64) -> f64 {
        if u <= 0.5 {
            return self.antiderivative_unchecked(u);
        }
        if let DriftKind::Linear { c } = self.kind {
            return 0.5 * c * u * uc;
        }
        let i = self.segment_of(u);
        let (u1, b1) = self.nodes[i + 1];
        let bu = self.drift(u);
        let to_right = if i + 1 == self.nodes.len() - 1 { uc } else { u1 - u };
        self.mean_drift() - (self.tail[i + 1] + 0.5 * to_right * (bu + b1))
    }

    /// The rank weight `b_n(k) = n (B(k/n) - B((k-1)/n))` for `1 <= k <= n`.
    pub fn rank_weight(&self, n: usize, k: usize) -> Result<f64> {
        if n == 0 || k == 0 || k > n {
            return Err(Error::OutOfRange {
                arg: "k",
                value: k as f64,
                range: format!("1..={n}"),
            });
        }
        Ok(self.rank_weight_unchecked(n, k))
    }

    fn rank_weight_unchecked(&self, n: usize, k: usize) -> f64 {
        let nf = n as f64;
        nf * (self.antiderivative_unchecked(k as f64 / nf)
            - self.antiderivative_unchecked((k - 1) as f64 / nf))
    }

    /// All rank weights `b_n(1), ..., b_n(n)`.
    pub fn rank_weights(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|k| self.rank_weight_unchecked(n, k)).collect()
    }

    /// Checks the equilibrium assumption: `|B(1)| <= tol`, `b` strictly
    /// decreasing, `b(0) > 0 > b(1)` and `B > 0` on `(0, 1)`.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let mut checks = Vec::new();
        let mean = self.mean_drift();
        checks.push(ValidationCheck {
            name: "|B(1)|",
            measured: mean.abs(),
            tolerance: tol,
            passed: mean.abs() <= tol,
        });

        let node_drop = self
            .nodes
            .windows(2)
            .map(|w| w[0].1 - w[1].1)
            .fold(f64::INFINITY, f64::min);
        let grid_drop = (0..VALIDATION_GRID)
            .map(|j| {
                let a = j as f64 / VALIDATION_GRID as f64;
                let m = (j as f64 + 0.5) / VALIDATION_GRID as f64;
                let e = (j + 1) as f64 / VALIDATION_GRID as f64;
                (self.drift(a) - self.drift(m)).min(self.drift(m) - self.drift(e))
            })
            .fold(f64::INFINITY, f64::min);
        let drop = node_drop.min(grid_drop);
        checks.push(ValidationCheck {
            name: "min decrement of b",
            measured: drop,
            tolerance: 0.0,
            passed: drop > 0.0,
        });
        checks.push(ValidationCheck {
            name: "b(0)",
            measured: self.b0(),
            tolerance: 0.0,
            passed: self.b0() > 0.0,
        });
        checks.push(ValidationCheck {
            name: "-b(1)",
            measured: -self.b1(),
            tolerance: 0.0,
            passed: self.b1() < 0.0,
        });
        let min_b = (1..VALIDATION_GRID)
            .map(|j| self.antiderivative_unchecked(j as f64 / VALIDATION_GRID as f64))
            .chain(
                self.nodes[1..self.nodes.len() - 1]
                    .iter()
                    .map(|&(u, _)| self.antiderivative_unchecked(u)),
            )
            .fold(f64::INFINITY, f64::min);
        checks.push(ValidationCheck {
            name: "min B on (0,1)",
            measured: min_b,
            tolerance: 0.0,
            passed: min_b > 0.0,
        });

        let failures: Vec<String> = checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| match c.name {
                "|B(1)|" => format!("B(1) = {mean} is not zero within {tol}"),
                "min decrement of b" => "b not decreasing".to_string(),
                "b(0)" => format!("b(0) = {} is not positive", self.b0()),
                "-b(1)" => format!("b(1) = {} is not negative", self.b1()),
                _ => format!("B is not positive on (0,1): min {min_b}"),
            })
            .collect();
        let passed = failures.is_empty();
        ValidationReport {
            passed,
            checks,
            message: if passed {
                "equilibrium assumption satisfied".into()
            } else {
                failures.join("; ")
            },
        }
    }

    /// Candidate points in `[a, e]`: the interval ends and every node inside.
    fn breakpoints_in(&self, a: f64, e: f64) -> impl Iterator<Item = f64> + '_ {
        [a, e]
            .into_iter()
            .chain(self.nodes.iter().map(|p| p.0).filter(move |&u| u > a && u < e))
    }

    /// `inf_{[a,e]} (B(u) - p - q u)`. Exact: on each segment the excess is
    /// quadratic with a stationary point where `b(u) = q`.
    pub(crate) fn min_excess_over_line(&self, a: f64, e: f64, p: f64, q: f64) -> f64 {
        let excess = |u: f64| self.antiderivative_unchecked(u) - p - q * u;
        let mut best = self.breakpoints_in(a, e).map(excess).fold(f64::INFINITY, f64::min);
        for w in self.nodes.windows(2) {
            let (u0, b0) = w[0];
            let (u1, b1) = w[1];
            if b1 == b0 {
                continue;
            }
            let u = u0 + (q - b0) * (u1 - u0) / (b1 - b0);
            if u > a.max(u0) && u < e.min(u1) {
                best = best.min(excess(u));
            }
        }
        best
    }

    /// Exact infima of `B(u)/u` on `[0, 1-δ]` and `B(u)/(1-u)` on `[δ, 1]`.
    ///
    /// Writing `B(u) = κ + β u + (m/2) u²` on a segment, `(B/u)' = 0` reduces
    /// to `u² = 2κ/m` and `(B/(1-u))' = 0` to `(1-u)² = 2(κ + β + m/2)/m`.
    pub fn infimum_ratios(&self, delta: f64) -> Result<InfimumRatios> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::OutOfRange {
                arg: "delta",
                value: delta,
                range: "(0, 1/2)".into(),
            });
        }
        let hi = 1.0 - delta;
        let ratio_minus = |u: f64| {
            if u == 0.0 {
                self.b0()
            } else {
                self.antiderivative_unchecked(u) / u
            }
        };
        let ratio_plus = |u: f64| {
            if u == 1.0 {
                -self.b1()
            } else {
                self.antiderivative_unchecked(u) / (1.0 - u)
            }
        };
        let mut minus: Vec<f64> = self.breakpoints_in(0.0, hi).collect();
        let mut plus: Vec<f64> = self.breakpoints_in(delta, 1.0).collect();
        for (i, w) in self.nodes.windows(2).enumerate() {
            let (u0, b0) = w[0];
            let (u1, b1) = w[1];
            let m = (b1 - b0) / (u1 - u0);
            if m == 0.0 {
                continue;
            }
            let beta = b0 - m * u0;
            let kappa = self.head[i] - beta * u0 - 0.5 * m * u0 * u0;
            let s = 2.0 * kappa / m;
            if s > 0.0 {
                let u = s.sqrt();
                if u > u0 && u < u1 && u < hi {
                    minus.push(u);
                }
            }
            let s = 2.0 * (kappa + beta + 0.5 * m) / m;
            if s > 0.0 {
                let u = 1.0 - s.sqrt();
                if u > u0 && u < u1 && u > delta {
                    plus.push(u);
                }
            }
        }
        let argmin = |pts: &[f64], f: &dyn Fn(f64) -> f64| {
            pts.iter()
                .map(|&u| (u, f(u)))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .expect("non-empty candidate list")
        };
        let (argmin_minus, m_minus) = argmin(&minus, &ratio_minus);
        let (argmin_plus, m_plus) = argmin(&plus, &ratio_plus);
        Ok(InfimumRatios {
            m_minus,
            argmin_minus,
            m_plus,
            argmin_plus,
        })
    }
}

fn check_sigma(sigma: f64) -> Result<f64> {
    if !sigma.is_finite() || sigma == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "diffusion coefficient sigma must be finite and nonzero, got {sigma}"
        )));
    }
    Ok(sigma * sigma)
}

fn check_sigma2(sigma2: f64) -> Result<f64> {
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma2 must be positive and finite, got {sigma2}"
        )));
    }
    Ok(sigma2)
}
