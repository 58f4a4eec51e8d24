//! Closed-form constants and finite-sample bounds for empirical and iterated
//! barycenters: strong-convexity and Lipschitz constants, expectation
//! bounds, high-probability bounds, sub-Gaussian / sub-Gamma parameter
//! rules and PAC sample sizes.
//!
//! Curvature `kappa = 0` follows the nonpositive branch everywhere.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

fn check_epsilon(kappa: f64, epsilon: f64) -> Result<f64> {
    let u = epsilon * kappa.sqrt();
    if !(epsilon > 0.0 && u < FRAC_PI_2) {
        return Err(Error::param(
            "epsilon",
            format!("need 0 < epsilon*sqrt(kappa) < pi/2, got epsilon = {epsilon}, kappa = {kappa}"),
        ));
    }
    Ok(u)
}

/// Strong-convexity modulus of the squared distance on balls of radius
/// `(D_kappa/2 - epsilon)/2`: 2 when `kappa <= 0`, otherwise
/// `(pi - 2 sqrt(kappa) epsilon) tan(epsilon sqrt(kappa))`.
pub fn alpha_constant(kappa: f64, epsilon: f64) -> Result<f64> {
    if kappa <= 0.0 {
        return Ok(2.0);
    }
    let u = check_epsilon(kappa, epsilon)?;
    Ok((PI - 2.0 * u) * u.tan())
}

/// Lipschitz constant `L` of the empirical barycenter map (as `L/n`).
pub fn lipschitz_constant(kappa: f64, epsilon: f64) -> Result<f64> {
    if kappa <= 0.0 {
        return Ok(1.0);
    }
    check_epsilon(kappa, epsilon)?;
    Ok(2.0 / (epsilon.powf(0.25) * kappa.powf(0.125)))
}

/// `A` (homoskedastic) or `Ã` (heteroskedastic) in `E d(b_n, b*)^2 <= A sigma^2 / n`.
pub fn expectation_constant(kappa: f64, epsilon: f64, heteroskedastic: bool) -> Result<f64> {
    if kappa <= 0.0 {
        return Ok(2.0);
    }
    let alpha = alpha_constant(kappa, epsilon)?;
    let a = 32.0 / (epsilon.powf(0.25) * kappa.powf(0.125) * alpha);
    Ok(if heteroskedastic { a * 2f64.sqrt() } else { a })
}

/// Inputs of the bound evaluators. Each evaluator names the fields it needs
/// and reports the first missing one.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundQuery {
    pub n: usize,
    pub kappa: f64,
    pub epsilon: Option<f64>,
    /// Total variance, or the mean of per-sample variances.
    pub sigma2: Option<f64>,
    /// Sub-Gaussian parameter `K^2` (or its mean over samples).
    pub k2: Option<f64>,
    /// Radius of a ball containing the support.
    pub r: Option<f64>,
    pub delta: Option<f64>,
    /// Use `Ã` instead of `A` in the expectation bound. The tail bounds
    /// always use `Ã`.
    pub heteroskedastic: bool,
}

impl BoundQuery {
    pub fn new(n: usize, kappa: f64) -> Self {
        Self {
            n,
            kappa,
            ..Self::default()
        }
    }

    pub fn epsilon(mut self, v: f64) -> Self {
        self.epsilon = Some(v);
        self
    }

    pub fn sigma2(mut self, v: f64) -> Self {
        self.sigma2 = Some(v);
        self
    }

    pub fn k2(mut self, v: f64) -> Self {
        self.k2 = Some(v);
        self
    }

    pub fn radius(mut self, v: f64) -> Self {
        self.r = Some(v);
        self
    }

    pub fn delta(mut self, v: f64) -> Self {
        self.delta = Some(v);
        self
    }

    pub fn heteroskedastic(mut self, v: bool) -> Self {
        self.heteroskedastic = v;
        self
    }

    fn n(&self) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::param("n", "must be at least 1"));
        }
        Ok(self.n as f64)
    }

    /// Epsilon, required only for positive curvature.
    fn eps(&self) -> Result<f64> {
        if self.kappa > 0.0 {
            self.epsilon.ok_or(Error::MissingField("epsilon"))
        } else {
            Ok(self.epsilon.unwrap_or(f64::NAN))
        }
    }

    fn nonneg(v: Option<f64>, name: &'static str) -> Result<f64> {
        let v = v.ok_or(Error::MissingField(name))?;
        if !(v >= 0.0) {
            return Err(Error::param(name, format!("must be nonnegative, got {v}")));
        }
        Ok(v)
    }

    fn sigma2_value(&self) -> Result<f64> {
        Self::nonneg(self.sigma2, "sigma2")
    }

    fn k2_value(&self) -> Result<f64> {
        Self::nonneg(self.k2, "K2")
    }

    fn r_value(&self) -> Result<f64> {
        Self::nonneg(self.r, "R")
    }

    /// `log(1/delta)`.
    fn log_inv_delta(&self) -> Result<f64> {
        log_inv_delta(self.delta.ok_or(Error::MissingField("delta"))?)
    }
}

fn log_inv_delta(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    Ok(-delta.ln())
}

/// `A sigma^2 / n` for the empirical barycenter.
pub fn empirical_expectation_bound(q: &BoundQuery) -> Result<f64> {
    let a = expectation_constant(q.kappa, q.eps()?, q.heteroskedastic)?;
    Ok(a * q.sigma2_value()? / q.n()?)
}

/// Expectation bound for the iterated barycenter: `sigma^2/n` with harmonic
/// steps when `kappa <= 0`; `32 sigma^2 / (alpha^2 (n+1))` with steps
/// `t_k = 2/(alpha k + 2)` when `kappa > 0`.
pub fn iterated_expectation_bound(q: &BoundQuery) -> Result<f64> {
    let n = q.n()?;
    let s2 = q.sigma2_value()?;
    if q.kappa <= 0.0 {
        return Ok(s2 / n);
    }
    let alpha = alpha_constant(q.kappa, q.eps()?)?;
    Ok(32.0 * s2 / (alpha * alpha * (n + 1.0)))
}

/// A variable a.s. within distance `C` of a point is `4C^2`-sub-Gaussian.
pub fn subgaussian_of_bounded(c: f64) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(Error::param("C", "must be nonnegative"));
    }
    Ok(4.0 * c * c)
}

/// Independent sub-Gaussian coordinates tensorize: the parameters add.
pub fn subgaussian_tensorize(k2s: &[f64]) -> Result<f64> {
    if k2s.is_empty() {
        return Err(Error::Empty("sub-Gaussian parameter list"));
    }
    if k2s.iter().any(|k| !(*k >= 0.0)) {
        return Err(Error::param("K2", "parameters must be nonnegative"));
    }
    Ok(k2s.iter().sum())
}

/// An `L`-Lipschitz image of a `K^2`-sub-Gaussian variable is `L^2 K^2`-sub-Gaussian.
pub fn subgaussian_compose(k2: f64, l: f64) -> Result<f64> {
    if !(k2 >= 0.0) || !(l >= 0.0) {
        return Err(Error::param("K2/L", "must be nonnegative"));
    }
    Ok(l * l * k2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubGammaParams {
    pub sigma2: f64,
    pub c: f64,
}

impl SubGammaParams {
    pub fn new(sigma2: f64, c: f64) -> Result<Self> {
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(Error::param("sigma2", "must be finite and nonnegative"));
        }
        // c = 0 is the sub-Gaussian limit.
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::param("c", "must be finite and nonnegative"));
        }
        Ok(Self { sigma2, c })
    }
}

/// A variable a.s. in a ball of radius `R` is `(sigma_tilde^2, R)`-sub-Gamma,
/// with `sigma_tilde^2 = E d(X, X')^2 / 2`.
pub fn subgamma_of_bounded(sigma_tilde2: f64, r: f64) -> Result<SubGammaParams> {
    SubGammaParams::new(sigma_tilde2, r)
}

/// Weaker parameters `(2 sigma^2, R)` from the total variance alone,
/// using `sigma_tilde^2 <= 2 sigma^2`.
pub fn subgamma_from_total_variance(sigma2: f64, r: f64) -> Result<SubGammaParams> {
    SubGammaParams::new(2.0 * sigma2, r)
}

/// Deviation `sigma sqrt(2 log(1/delta)) + c log(1/delta)` exceeded with
/// probability at most `delta`.
pub fn subgamma_tail(p: &SubGammaParams, delta: f64) -> Result<f64> {
    let l = log_inv_delta(delta)?;
    Ok(p.sigma2.sqrt() * (2.0 * l).sqrt() + p.c * l)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailFlavor {
    SubGaussian,
    Hoeffding,
    Bernstein,
}

/// How the bias term of the empirical tail bounds is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FirstTerm {
    /// `sqrt(A) sigma / sqrt(n)` for every flavor.
    #[default]
    Radical,
    /// `A sigma / sqrt(n)` for the Hoeffding and Bernstein flavors, as
    /// printed in their statements; the sub-Gaussian flavor keeps the radical.
    StrictPaper,
}

/// High-probability bound on `d(b_n, b*)` for the empirical barycenter.
pub fn empirical_tail_bound(q: &BoundQuery, flavor: TailFlavor, first: FirstTerm) -> Result<f64> {
    let n = q.n()?;
    let eps = q.eps()?;
    // The tail theorems are stated for independent, not necessarily identically
    // distributed samples, hence the larger constant.
    let a = expectation_constant(q.kappa, eps, true)?;
    let l = lipschitz_constant(q.kappa, eps)?;
    let sigma = q.sigma2_value()?.sqrt();
    let log = q.log_inv_delta()?;
    let coef = match (first, flavor) {
        (FirstTerm::StrictPaper, TailFlavor::Hoeffding | TailFlavor::Bernstein) => a,
        _ => a.sqrt(),
    };
    let bias = coef * sigma / n.sqrt();
    Ok(match flavor {
        TailFlavor::SubGaussian => bias + l * q.k2_value()?.sqrt() * (log / n).sqrt(),
        TailFlavor::Hoeffding => bias + 2.0 * l * q.r_value()? * (log / n).sqrt(),
        TailFlavor::Bernstein => {
            let r = q.r_value()?;
            bias + 2.0 * l * sigma * (log / n).sqrt() + l * r * log / n
        }
    })
}

/// High-probability bound on `d(b~_n, b*)` for the iterated barycenter with
/// harmonic steps in a CAT(0) space.
pub fn iterated_tail_bound_cat0(q: &BoundQuery, flavor: TailFlavor) -> Result<f64> {
    if q.kappa > 0.0 {
        return Err(Error::param(
            "kappa",
            "the iterated-barycenter tail bounds hold for kappa <= 0 only",
        ));
    }
    let n = q.n()?;
    let sigma = q.sigma2_value()?.sqrt();
    let log = q.log_inv_delta()?;
    let bias = sigma / n.sqrt();
    Ok(match flavor {
        TailFlavor::SubGaussian => bias + q.k2_value()?.sqrt() * (log / n).sqrt(),
        TailFlavor::Hoeffding => bias + 2.0 * q.r_value()? * (log / n).sqrt(),
        TailFlavor::Bernstein => bias + 2.0 * sigma * (log / n).sqrt() + q.r_value()? * log / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiemannianCase {
    /// Sub-Gaussian log-vectors with parameter `K` (from `k2`).
    Unbounded,
    /// Support in a ball of radius `r` (from `r`).
    Bounded,
}

/// Tail bounds obtained from the gradient of the Fréchet function on
/// Riemannian manifolds.
pub fn riemannian_tail_bound(q: &BoundQuery, case: RiemannianCase) -> Result<f64> {
    let n = q.n()?;
    let sigma = q.sigma2_value()?.sqrt();
    let log = q.log_inv_delta()?;
    Ok(match case {
        RiemannianCase::Unbounded => {
            let k = q.k2_value()?.sqrt();
            k * sigma / n.sqrt() + k * (log / n).sqrt()
        }
        RiemannianCase::Bounded => {
            let alpha = alpha_constant(q.kappa, q.eps()?)?;
            let r = q.r_value()?;
            sigma / (alpha * n.sqrt()) + 2.0 * r / alpha * (log / n).sqrt()
        }
    })
}

/// Ceiling that ignores round-off just above an integer.
fn ceil_robust(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

fn check_pac(eps: f64, delta: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::param("eps", "must be positive"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", "must lie in (0, 1)"));
    }
    Ok(log_inv_delta(delta)?.max(1.0))
}

/// Raw (real-valued) Hoeffding budget `4 D^2/eps^2 max(1, log(1/delta))`.
pub fn sample_size_hoeffding_raw(d: f64, eps: f64, delta: f64) -> Result<f64> {
    let factor = check_pac(eps, delta)?;
    if !(d >= 0.0) {
        return Err(Error::param("D", "must be nonnegative"));
    }
    Ok(4.0 * d * d / (eps * eps) * factor)
}

/// Raw Bernstein budget `16/3 max(sigma~^2/eps^2, D/eps) max(1, log(1/delta))`.
pub fn sample_size_bernstein_raw(sigma_tilde2: f64, d: f64, eps: f64, delta: f64) -> Result<f64> {
    let factor = check_pac(eps, delta)?;
    if !(d >= 0.0) || !(sigma_tilde2 >= 0.0) {
        return Err(Error::param("D/sigma_tilde2", "must be nonnegative"));
    }
    Ok(16.0 / 3.0 * (sigma_tilde2 / (eps * eps)).max(d / eps) * factor)
}

/// Number of resamples guaranteeing `d(b~_m, b_n) <= eps` with probability
/// at least `1 - delta` (Hoeffding budget). At least 1.
pub fn sample_size_hoeffding(d: f64, eps: f64, delta: f64) -> Result<u64> {
    Ok(ceil_robust(sample_size_hoeffding_raw(d, eps, delta)?).max(1.0) as u64)
}

/// Bernstein budget; smaller than the Hoeffding one when the pairwise
/// spread `sigma~^2` is small compared with `D^2`. At least 1.
pub fn sample_size_bernstein(sigma_tilde2: f64, d: f64, eps: f64, delta: f64) -> Result<u64> {
    Ok(ceil_robust(sample_size_bernstein_raw(sigma_tilde2, d, eps, delta)?).max(1.0) as u64)
}
