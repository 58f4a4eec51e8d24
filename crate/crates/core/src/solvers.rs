//! Iterated (inductive) barycenters and empirical barycenter solvers.

use std::fmt;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{tangent_norm, GeodesicSpace, TangentVector};

/// Rule producing the step `t_k` used at the `k`-th point (`k >= 2`).
#[derive(Debug, Clone, PartialEq)]
pub enum StepSchedule {
    /// `t_k = 1/k`.
    Harmonic,
    /// `t_k = 2 / (alpha k + 2)`, for positively curved domains.
    PositiveCurvature { alpha: f64 },
    /// Stored steps `t_2, ..., t_n`.
    Explicit(Vec<f64>),
}

impl StepSchedule {
    pub fn positive_curvature(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param("alpha", "must be positive"));
        }
        Ok(StepSchedule::PositiveCurvature { alpha })
    }

    pub fn explicit(steps: Vec<f64>) -> Result<Self> {
        if let Some(t) = steps.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(Error::param("steps", format!("step {t} outside (0, 1)")));
        }
        Ok(StepSchedule::Explicit(steps))
    }

    pub fn step_size(&self, k: usize) -> Result<f64> {
        if k < 2 {
            return Err(Error::param("k", "steps are indexed from k = 2"));
        }
        match self {
            StepSchedule::Harmonic => Ok(1.0 / k as f64),
            StepSchedule::PositiveCurvature { alpha } => Ok(2.0 / (alpha * k as f64 + 2.0)),
            StepSchedule::Explicit(steps) => steps.get(k - 2).copied().ok_or_else(|| {
                Error::param(
                    "k",
                    format!("explicit schedule has no step for k = {k} (holds {})", steps.len()),
                )
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Closed form (Euclidean mean, per-edge minimization on trees).
    Exact,
    /// Repeated passes of the inductive mean with a global harmonic counter.
    /// On metric trees the passes can repeat exactly without reaching the
    /// minimizer; prefer `Exact` there.
    Cyclic,
    /// Riemannian gradient descent on the Fréchet function.
    Gradient,
    /// Exact where available, otherwise gradient on smooth spaces and cyclic
    /// passes elsewhere.
    Auto,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Cyclic => "cyclic",
            Method::Gradient => "gradient",
            Method::Auto => "auto",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    Iterated,
    Exact,
    Cyclic,
    Gradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_rounds: usize,
    /// Gradient step size.
    pub step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_rounds: 10_000,
            step: 0.5,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport<P> {
    pub result: P,
    /// Points processed (iterated), passes (cyclic) or steps (gradient).
    pub iterations: usize,
    /// Distance moved by the last step or pass.
    pub movement: f64,
    pub method: SolverMethod,
    pub converged: bool,
}

/// Sequential geodesic averaging: `b_1 = x_1`, `b_k = gamma(b_{k-1}, x_k; t_k)`.
pub fn iterated_barycenter<S: GeodesicSpace + ?Sized>(
    space: &S,
    points: &[S::Point],
    schedule: &StepSchedule,
) -> Result<SolverReport<S::Point>> {
    let (first, rest) = points.split_first().ok_or(Error::Empty("point list"))?;
    let mut b = first.clone();
    let mut movement = 0.0;
    for (i, x) in rest.iter().enumerate() {
        let t = schedule.step_size(i + 2)?;
        let next = space.interpolate(&b, x, t)?;
        if i + 1 == rest.len() {
            movement = space.distance(&b, &next)?;
        }
        b = next;
    }
    Ok(SolverReport {
        result: b,
        iterations: points.len(),
        movement,
        method: SolverMethod::Iterated,
        converged: true,
    })
}

/// Mean squared distance from `x` to the points.
pub fn frechet_value<S: GeodesicSpace + ?Sized>(
    space: &S,
    points: &[S::Point],
    x: &S::Point,
) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Empty("point list"));
    }
    let mut sum = 0.0;
    for p in points {
        let d = space.distance(p, x)?;
        sum += d * d;
    }
    Ok(sum / points.len() as f64)
}

/// Riemannian gradient of the empirical Fréchet function at `x`:
/// `-(2/n) sum_i log_x(x_i)`.
pub fn frechet_gradient<S: GeodesicSpace + ?Sized>(
    space: &S,
    points: &[S::Point],
    x: &S::Point,
) -> Result<TangentVector<S::Point>> {
    if !space.is_smooth() {
        return Err(space.unsupported("frechet_gradient"));
    }
    let mut acc: Option<DVector<f64>> = None;
    for p in points {
        let v = space.log(x, p)?;
        match acc.as_mut() {
            None => acc = Some(v.components),
            Some(a) => *a += v.components,
        }
    }
    let acc = acc.ok_or(Error::Empty("point list"))?;
    Ok(TangentVector::new(
        x.clone(),
        acc * (-2.0 / points.len() as f64),
    ))
}

/// Largest pairwise distance of the point set.
pub fn diameter<S: GeodesicSpace + ?Sized>(space: &S, points: &[S::Point]) -> Result<f64> {
    let mut d = 0.0_f64;
    for (i, x) in points.iter().enumerate() {
        for y in &points[i + 1..] {
            d = d.max(space.distance(x, y)?);
        }
    }
    Ok(d)
}

/// Minimizer of the empirical Fréchet function.
pub fn empirical_barycenter<S: GeodesicSpace + ?Sized>(
    space: &S,
    points: &[S::Point],
    method: Method,
    opts: &SolverOptions,
) -> Result<SolverReport<S::Point>> {
    if points.is_empty() {
        return Err(Error::Empty("point list"));
    }
    match method {
        Method::Exact => exact(space, points),
        Method::Cyclic => cyclic(space, points, opts),
        Method::Gradient => gradient(space, points, opts),
        Method::Auto => match exact(space, points) {
            Err(Error::Unsupported { .. }) if space.is_smooth() => gradient(space, points, opts),
            Err(Error::Unsupported { .. }) => cyclic(space, points, opts),
            other => other,
        },
    }
}

fn exact<S: GeodesicSpace + ?Sized>(
    space: &S,
    points: &[S::Point],
) -> Result<SolverReport<S::Point>> {
    let weights = vec![1.0; points.len()];
    Ok(SolverReport {
        result: space.exact_barycenter(points, &weights)?,
        iterations: 1,
        movement: 0.0,
        method: SolverMethod::Exact,
        converged: true,
    })
}

fn cyclic<S: GeodesicSpace + ?Sized>(
    space: &S,
    points: &[S::Point],
    opts: &SolverOptions,
) -> Result<SolverReport<S::Point>> {
    let n = points.len();
    let mut report = SolverReport {
        result: points[0].clone(),
        iterations: 1,
        movement: 0.0,
        method: SolverMethod::Cyclic,
        converged: true,
    };
    if n == 1 {
        return Ok(report);
    }
    let threshold = opts.tol * (1.0 + diameter(space, points)?);
    let mut b = points[0].clone();
    let mut k = 1usize;
    // First pass starts from x_1; later passes continue the global counter.
    for x in &points[1..] {
        k += 1;
        b = space.interpolate(&b, x, 1.0 / k as f64)?;
    }
    report.converged = false;
    for pass in 2..=opts.max_rounds.max(1) {
        let start = b.clone();
        for x in points {
            k += 1;
            b = space.interpolate(&b, x, 1.0 / k as f64)?;
        }
        report.iterations = pass;
        report.movement = space.distance(&start, &b)?;
        if report.movement < threshold {
            report.converged = true;
            break;
        }
    }
    report.result = b;
    Ok(report)
}

fn gradient<S: GeodesicSpace + ?Sized>(
    space: &S,
    points: &[S::Point],
    opts: &SolverOptions,
) -> Result<SolverReport<S::Point>> {
    if !space.is_smooth() {
        return Err(space.unsupported("gradient descent"));
    }
    if points.len() == 1 {
        return Ok(SolverReport {
            result: points[0].clone(),
            iterations: 0,
            movement: 0.0,
            method: SolverMethod::Gradient,
            converged: true,
        });
    }
    // One harmonic pass is a cheap, already accurate starting point.
    let mut x = iterated_barycenter(space, points, &StepSchedule::Harmonic)?.result;
    let mut movement = 0.0;
    for it in 0..opts.max_rounds {
        let g = frechet_gradient(space, points, &x)?;
        let norm = tangent_norm(space, &g)?;
        if norm < opts.tol {
            return Ok(SolverReport {
                result: x,
                iterations: it,
                movement,
                method: SolverMethod::Gradient,
                converged: true,
            });
        }
        movement = opts.step * norm;
        x = space.exp(&g.scaled(-opts.step))?;
    }
    Ok(SolverReport {
        result: x,
        iterations: opts.max_rounds,
        movement,
        method: SolverMethod::Gradient,
        converged: false,
    })
}
