//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints one PASS or FAIL line; exits nonzero if any fails.

use std::f64::consts::{E, FRAC_PI_2, FRAC_PI_4, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::json;

use frechet::bounds::*;
use frechet::estimators::{parallel_barycenter, stochastic_barycenter_approx, BatchPlan, BoundKind};
use frechet::mclab::samplers::UniformCap;
use frechet::mclab::{figure1_regression, run_error_experiment, ExperimentConfig, ExperimentOutcome, Sampler};
use frechet::rng::{stream, StreamRng};
use frechet::solvers::diameter;
use frechet::spaces::{build_figure1_tree, Euclidean, Hyperbolic, Spd, Sphere};
use frechet::{
    empirical_barycenter, frechet_gradient, frechet_value, iterated_barycenter, tangent_norm,
    Execution, GeodesicSpace, Method, SolverOptions, StepSchedule, TangentVector,
};

type Check = Result<(bool, String), frechet::Error>;

const SEED: u64 = 0x5eed_2024;

/// Cap radius and domain parameter of the sphere experiments.
const CAP: f64 = 0.3;
const SPHERE_EPS: f64 = FRAC_PI_2 - 0.6;

fn experiment(v: serde_json::Value) -> Result<ExperimentOutcome, frechet::Error> {
    let cfg: ExperimentConfig = serde_json::from_value(v).expect("valid config");
    run_error_experiment(&cfg, Some(SEED), Execution::Parallel)
}

fn checks_detail(out: &ExperimentOutcome) -> (bool, String) {
    let detail = out
        .checks
        .iter()
        .map(|c| format!("{}: {}", c.kind, c.detail))
        .collect::<Vec<_>>()
        .join("; ");
    (out.all_passed(), detail)
}

fn uniform(g: &mut StreamRng, d: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(d, |_, _| g.random_range(lo..hi))
}

fn random_spd(g: &mut StreamRng, d: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(d, d, |_, _| g.sample::<f64, _>(StandardNormal));
    &m * m.transpose() + DMatrix::identity(d, d) * 0.5
}

/// Unit tangent vector in a random direction.
fn random_direction<S: GeodesicSpace>(space: &S, x: &S::Point, g: &mut StreamRng) -> Result<TangentVector<S::Point>, frechet::Error> {
    let basis = space.tangent_basis(x)?;
    let mut v = basis[0].scaled(0.0);
    for b in &basis {
        v.components += &b.components * g.sample::<f64, _>(StandardNormal);
    }
    let norm = tangent_norm(space, &v)?;
    Ok(v.scaled(1.0 / norm))
}

fn c01_euclidean_exactness() -> Check {
    let mut g = stream(SEED, 1);
    let opts = SolverOptions::with_tol(1e-13);
    let (mut exact, mut cyclic, mut iterated) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let d = g.random_range(1..=20);
        let n = g.random_range(1..=200);
        let space = Euclidean::new(d)?;
        let pts: Vec<_> = (0..n).map(|_| uniform(&mut g, d, -1.0, 1.0)).collect();
        let mean = pts.iter().fold(DVector::zeros(d), |a, p| a + p) / n as f64;
        let diam = diameter(&space, &pts)?.max(f64::MIN_POSITIVE);
        let err = |b: &DVector<f64>| (b - &mean).norm();
        exact = exact.max(err(&empirical_barycenter(&space, &pts, Method::Exact, &opts)?.result) / diam);
        cyclic = cyclic.max(err(&empirical_barycenter(&space, &pts, Method::Cyclic, &opts)?.result) / diam);
        iterated = iterated.max(err(&iterated_barycenter(&space, &pts, &StepSchedule::Harmonic)?.result));
    }
    Ok((
        exact <= 1e-9 && cyclic <= 1e-9 && iterated <= 1e-12,
        format!("exact {exact:.2e}/diam, cyclic {cyclic:.2e}/diam, iterated {iterated:.2e}"),
    ))
}

fn gaussian_config(estimator: &str, checks: &[&str]) -> serde_json::Value {
    json!({
        "experiment_id": format!("gaussian_{estimator}"),
        "space": { "kind": "euclidean", "dim": 5 },
        "sampler": { "kind": "gaussian", "scale": 1.0 },
        "estimator": { "kind": estimator },
        "n_grid": [10, 40, 160, 640],
        "replicates": 2000,
        "checks": checks,
    })
}

fn c02_hilbert_equality() -> Check {
    Ok(checks_detail(&experiment(gaussian_config("empirical", &["variance_equality", "rate"]))?))
}

fn c03_sturm_bound() -> Check {
    Ok(checks_detail(&experiment(gaussian_config("iterated", &["expectation", "rate"]))?))
}

fn sphere_config(estimator: serde_json::Value, schedule: &str, checks: &[&str], n_grid: &[usize], replicates: usize) -> serde_json::Value {
    json!({
        "experiment_id": "sphere_cap",
        "space": { "kind": "sphere", "dim": 2, "kappa": 1.0 },
        "sampler": { "kind": "uniform_cap", "radius": CAP },
        "estimator": estimator,
        "schedule": schedule,
        "method": "gradient",
        "n_grid": n_grid,
        "replicates": replicates,
        "domain": { "radius": CAP, "epsilon": SPHERE_EPS },
        "checks": checks,
    })
}

fn c04_sphere_expectation() -> Check {
    let out = experiment(sphere_config(json!({"kind": "empirical"}), "harmonic", &["expectation", "rate"], &[10, 100, 1000], 1000))?;
    // The row bound must be A (sigma^2 + 3 se) / n with the homoskedastic A.
    let a = 32.0 / (SPHERE_EPS.powf(0.25) * alpha_constant(1.0, SPHERE_EPS)?);
    let s2 = out.sigma2_hat + 3.0 * out.sigma2_stderr;
    let consistent = out
        .rows
        .iter()
        .all(|r| (r.exp_bound - a * s2 / r.n as f64).abs() <= 1e-12 * r.exp_bound);
    let (ok, detail) = checks_detail(&out);
    Ok((ok && consistent, format!("A = {a:.4}, sigma2_hat = {:.5}; {detail}", out.sigma2_hat)))
}

fn c05_positive_curvature_iterated() -> Check {
    let out = experiment(sphere_config(json!({"kind": "iterated"}), "positive_curvature", &["expectation"], &[10, 100, 1000], 1000))?;
    Ok(checks_detail(&out))
}

fn c06_tail_coverage() -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    let cases = [
        ("empirical", "hoeffding"),
        ("empirical", "bernstein"),
        ("iterated", "sub_gaussian"),
        ("iterated", "hoeffding"),
        ("iterated", "bernstein"),
    ];
    for delta in [0.05, 0.1] {
        for (estimator, tail) in cases {
            let out = experiment(json!({
                "experiment_id": "two_point",
                "space": { "kind": "euclidean", "dim": 2 },
                "sampler": { "kind": "two_point", "radius": 1.0 },
                "estimator": { "kind": estimator },
                "n_grid": [100],
                "replicates": 2000,
                "delta": delta,
                "tail": tail,
                "checks": ["tail"],
            }))?;
            ok &= out.all_passed();
            parts.push(format!("{estimator}/{tail}@{delta}: {:.4}", out.rows[0].exceedance));
        }
    }
    Ok((ok, parts.join(", ")))
}

/// Worst ratio `d(B(x), B(y)) / ((L/n) sum d(x_i, y_i) + 10 tol)`.
fn lipschitz_ratio<S: GeodesicSpace>(
    space: &S,
    l: f64,
    pairs: usize,
    mut draw: impl FnMut(&mut StreamRng) -> Result<S::Point, frechet::Error>,
    g: &mut StreamRng,
) -> Result<f64, frechet::Error> {
    let tol = 1e-12;
    let opts = SolverOptions::with_tol(tol);
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let x: Vec<_> = (0..20).map(|_| draw(g)).collect::<Result<_, _>>()?;
        let y: Vec<_> = (0..20).map(|_| draw(g)).collect::<Result<_, _>>()?;
        let bx = empirical_barycenter(space, &x, Method::Gradient, &opts)?.result;
        let by = empirical_barycenter(space, &y, Method::Gradient, &opts)?.result;
        let mut sum = 0.0;
        for (a, b) in x.iter().zip(&y) {
            sum += space.distance(a, b)?;
        }
        worst = worst.max(space.distance(&bx, &by)? / (l / 20.0 * sum + 10.0 * tol));
    }
    Ok(worst)
}

fn c07_lipschitz() -> Check {
    let mut g = stream(SEED, 7);
    let sphere = Sphere::unit(2);
    let cap = UniformCap::new(&sphere, sphere.base_point(), CAP)?;
    let l_pos = lipschitz_constant(1.0, SPHERE_EPS)?;
    let pos = lipschitz_ratio(&sphere, l_pos, 50, |g| cap.sample(&sphere, 0, g), &mut g)?;

    let hyp = Hyperbolic::new(2, -1.0)?;
    let neg = lipschitz_ratio(
        &hyp,
        lipschitz_constant(-1.0, 1.0)?,
        50,
        |g| hyp.lift(uniform(g, 2, -1.5, 1.5).as_slice()),
        &mut g,
    )?;
    Ok((pos <= 1.0 && neg <= 1.0, format!("worst ratio {pos:.3} (kappa = 1, L = {l_pos:.4}), {neg:.3} (kappa = -1, L = 1)")))
}

fn c08_figure1() -> Check {
    let report = figure1_regression(&[10, 100], SEED, Execution::Parallel)?;
    let (r10, r100) = (&report.rows[0], &report.rows[1]);
    let within = (r100.adversarial - r10.adversarial).abs() <= 0.1 * r10.adversarial;
    let away = r100.adversarial >= 0.1;
    let root = r10.empirical <= 1e-12 && r100.empirical <= 1e-12;
    Ok((
        within && away && root && report.non_vanishing == Some(true),
        format!(
            "adversarial {:.6} (p = 10), {:.6} (p = 100); permutation median {:.4}; empirical to root {:.1e}",
            r10.adversarial, r100.adversarial, r100.perm_q50, r100.empirical.max(r10.empirical)
        ),
    ))
}

fn c09_pac() -> Check {
    let (tree, list) = build_figure1_tree(10, [1.0; 3])?;
    let root = tree.node(0)?;
    let (eps, delta) = (0.2, 0.1);
    let mut parts = Vec::new();
    let mut ok = true;
    let mut budgets = Vec::new();
    for kind in [BoundKind::Hoeffding, BoundKind::Bernstein] {
        let mut hits = 0;
        let mut m = 0;
        for seed in 0..200u64 {
            let (b, budget) = stochastic_barycenter_approx(&tree, &list, eps, delta, kind, SEED + seed)?;
            m = budget.m;
            hits += usize::from(tree.distance(&b, &root)? <= eps);
        }
        let rate = hits as f64 / 200.0;
        ok &= rate >= 0.9 - 0.064;
        budgets.push(m);
        parts.push(format!("{kind}: m = {m}, success {rate:.3}"));
    }
    ok &= budgets[1] < budgets[0];
    Ok((ok, parts.join(", ")))
}

fn c10_spd_identities() -> Check {
    let mut g = stream(SEED, 10);
    let (mut geo, mut diag, mut cong) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let d = g.random_range(1..=6);
        let space = Spd::new(d)?;
        let a = random_spd(&mut g, d);
        let b = random_spd(&mut g, d);
        let dab = space.distance(&a, &b)?;
        geo = geo.max((space.interpolate(&a, &b, 0.0)? - &a).amax());
        geo = geo.max((space.interpolate(&a, &b, 1.0)? - &b).amax());
        for s in [0.25, 0.5, 0.8] {
            let m = space.interpolate(&a, &b, s)?;
            geo = geo.max((space.distance(&a, &m)? - s * dab).abs());
        }

        let da = DVector::from_fn(d, |_, _| g.random_range(0.1..10.0));
        let db = DVector::from_fn(d, |_, _| g.random_range(0.1..10.0));
        let mid = space.interpolate(&DMatrix::from_diagonal(&da), &DMatrix::from_diagonal(&db), 0.5)?;
        let gm = DMatrix::from_diagonal(&da.zip_map(&db, |x, y| (x * y).sqrt()));
        diag = diag.max((mid - gm).amax());

        let c = DMatrix::from_fn(d, d, |_, _| g.sample::<f64, _>(StandardNormal)) + DMatrix::identity(d, d) * 3.0;
        let ca = &c * &a * c.transpose();
        let cb = &c * &b * c.transpose();
        cong = cong.max((space.distance(&ca, &cb)? - dab).abs());
    }
    Ok((
        geo <= 1e-8 && diag <= 1e-10 && cong <= 1e-8,
        format!("geodesic {geo:.1e}, diagonal {diag:.1e}, congruence {cong:.1e}"),
    ))
}

fn gradient_error<S: GeodesicSpace>(
    space: &S,
    mut draw: impl FnMut(&mut StreamRng) -> Result<S::Point, frechet::Error>,
    g: &mut StreamRng,
) -> Result<f64, frechet::Error> {
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let pts: Vec<_> = (0..5).map(|_| draw(g)).collect::<Result<_, _>>()?;
        let x = draw(g)?;
        let grad = frechet_gradient(space, &pts, &x)?;
        let scale = tangent_norm(space, &grad)?;
        for _ in 0..3 {
            let v = random_direction(space, &x, g)?;
            let fp = frechet_value(space, &pts, &space.exp(&v.scaled(h))?)?;
            let fm = frechet_value(space, &pts, &space.exp(&v.scaled(-h))?)?;
            let fd = (fp - fm) / (2.0 * h);
            let an = space.inner(&grad, &v)?;
            worst = worst.max((fd - an).abs() / scale);
        }
    }
    Ok(worst)
}

fn c11_gradient() -> Check {
    let mut g = stream(SEED, 11);
    let sphere = Sphere::unit(3);
    let cap = UniformCap::new(&sphere, sphere.base_point(), 0.7)?;
    let s = gradient_error(&sphere, |g| cap.sample(&sphere, 0, g), &mut g)?;
    let spd = Spd::new(3)?;
    let p = gradient_error(&spd, |g| Ok(random_spd(g, 3)), &mut g)?;
    Ok((s <= 1e-5 && p <= 1e-5, format!("relative error {s:.1e} (sphere), {p:.1e} (SPD)")))
}

fn c12_parallel() -> Check {
    let mut g = stream(SEED, 12);
    let n = 120;
    let space = Euclidean::new(4)?;
    let pts: Vec<_> = (0..n).map(|_| uniform(&mut g, 4, -3.0, 3.0)).collect();
    let mean = pts.iter().fold(DVector::zeros(4), |a, p| a + p) / n as f64;
    let opts = SolverOptions::default();
    let mut flat = 0.0f64;
    for p in (1..=n).filter(|p| n % p == 0) {
        let r = parallel_barycenter(&space, &pts, BatchPlan::for_samples(n, p)?, Method::Exact, &opts, Execution::Parallel)?;
        flat = flat.max((r.result - &mean).norm());
    }

    let plain = experiment(sphere_config(json!({"kind": "empirical"}), "harmonic", &[], &[400], 500))?;
    let par = experiment(sphere_config(json!({"kind": "parallel", "batches": 20}), "harmonic", &[], &[400], 500))?;
    let (a, b) = (&plain.rows[0], &par.rows[0]);
    let ratio = b.mse / a.mse;
    let rel_se = ratio * ((a.mse_stderr / a.mse).powi(2) + (b.mse_stderr / b.mse).powi(2)).sqrt();
    let l = lipschitz_constant(1.0, SPHERE_EPS)?;
    Ok((
        flat <= 1e-12 && ratio <= l * l + 3.0 * rel_se,
        format!("Euclidean max deviation {flat:.1e}; sphere ratio {ratio:.3} (limit L^2 = {:.3} + 3 se {:.3})", l * l, rel_se),
    ))
}

/// Agreement to 12 significant digits.
fn same(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 5e-12 * a.abs().max(b.abs())
}

fn c13_bound_calculator() -> Check {
    let mut failed: Vec<String> = Vec::new();
    let mut expect = |name: &str, got: f64, want: f64| {
        if !same(got, want) {
            failed.push(format!("{name}: {got} vs {want}"));
        }
    };
    let a_pi4 = 32.0 / (FRAC_PI_4.powf(0.25) * FRAC_PI_2);
    let q = |n, kappa| BoundQuery::new(n, kappa);

    expect("alpha kappa=-3", alpha_constant(-3.0, 7.0)?, 2.0);
    expect("alpha pi/4", alpha_constant(1.0, FRAC_PI_4)?, FRAC_PI_2);
    expect("L kappa=0", lipschitz_constant(0.0, 1.0)?, 1.0);
    expect("L eps=1", lipschitz_constant(1.0, 1.0)?, 2.0);
    expect("L eps=1e-4", lipschitz_constant(1.0, 1e-4)?, 20.0);
    expect("A kappa<=0", expectation_constant(-1.0, 1.0, false)?, 2.0);
    expect("A~ kappa<=0", expectation_constant(0.0, 1.0, true)?, 2.0);
    expect("A pi/4", expectation_constant(1.0, FRAC_PI_4, false)?, a_pi4);
    expect("A~ pi/4", expectation_constant(1.0, FRAC_PI_4, true)?, 2f64.sqrt() * a_pi4);
    expect("emp sigma=0", empirical_expectation_bound(&q(10, 0.0).sigma2(0.0))?, 0.0);
    expect("emp kappa=0", empirical_expectation_bound(&q(100, 0.0).sigma2(5.0))?, 0.1);
    expect("emp pi/4", empirical_expectation_bound(&q(10, 1.0).epsilon(FRAC_PI_4).sigma2(1.0))?, a_pi4 / 10.0);
    expect("iter kappa=0", iterated_expectation_bound(&q(4, 0.0).sigma2(1.0))?, 0.25);
    expect("iter pi/4", iterated_expectation_bound(&q(7, 1.0).epsilon(FRAC_PI_4).sigma2(1.0))?, 32.0 / (FRAC_PI_2.powi(2) * 8.0));
    expect("iter sigma=0", iterated_expectation_bound(&q(7, 1.0).epsilon(FRAC_PI_4).sigma2(0.0))?, 0.0);
    expect("subG C=0", subgaussian_of_bounded(0.0)?, 0.0);
    expect("subG C=1", subgaussian_of_bounded(1.0)?, 4.0);
    expect("subG C=3", subgaussian_of_bounded(3.0)?, 36.0);
    expect("tensorize {1}", subgaussian_tensorize(&[1.0])?, 1.0);
    expect("tensorize {1,2,3}", subgaussian_tensorize(&[1.0, 2.0, 3.0])?, 6.0);
    expect("compose L=1", subgaussian_compose(2.5, 1.0)?, 2.5);
    expect("compose 4, 0.5", subgaussian_compose(4.0, 0.5)?, 1.0);
    expect("compose 2, 3", subgaussian_compose(2.0, 3.0)?, 18.0);
    let sg = subgamma_of_bounded(2.0, 0.5)?;
    expect("subgamma (2, 0.5)", sg.sigma2 + 10.0 * sg.c, 7.0);
    expect("subgamma tail delta=1", subgamma_tail(&SubGammaParams::new(1.0, 1.0)?, 1.0)?, 0.0);
    expect("subgamma tail e^-2", subgamma_tail(&SubGammaParams::new(1.0, 0.0)?, E.powi(-2))?, 2.0);
    expect("subgamma tail e^-1", subgamma_tail(&SubGammaParams::new(0.0, 1.0)?, E.recip())?, 1.0);
    let base = q(100, 0.0).sigma2(1.0).k2(4.0).radius(1.0);
    expect(
        "tail delta=1",
        empirical_tail_bound(&base.delta(1.0), TailFlavor::Hoeffding, FirstTerm::Radical)?,
        2f64.sqrt() / 10.0,
    );
    expect(
        "tail subgaussian",
        empirical_tail_bound(&base.delta(E.recip()), TailFlavor::SubGaussian, FirstTerm::Radical)?,
        2f64.sqrt() / 10.0 + 0.2,
    );
    expect("iter tail delta=1", iterated_tail_bound_cat0(&q(16, 0.0).sigma2(1.0).radius(1.0).delta(1.0), TailFlavor::Hoeffding)?, 0.25);
    expect("iter tail (ii)", iterated_tail_bound_cat0(&q(4, 0.0).sigma2(0.0).radius(1.0).delta(E.recip()), TailFlavor::Hoeffding)?, 1.0);
    expect(
        "riem unbounded delta=1",
        riemannian_tail_bound(&q(16, 0.0).sigma2(1.0).k2(9.0).delta(1.0), RiemannianCase::Unbounded)?,
        0.75,
    );
    expect(
        "riem bounded",
        riemannian_tail_bound(&q(4, 0.0).sigma2(1.0).radius(1.0).delta(E.recip()), RiemannianCase::Bounded)?,
        0.75,
    );
    expect("riem sigma=0", riemannian_tail_bound(&q(4, 0.0).sigma2(0.0).radius(1.0).delta(1.0), RiemannianCase::Bounded)?, 0.0);
    expect("m hoeffding e^-1", sample_size_hoeffding(1.0, 0.1, E.recip())? as f64, 400.0);
    expect("m hoeffding 0.5", sample_size_hoeffding(1.0, 0.1, 0.5)? as f64, 400.0);
    expect("m hoeffding e^-4", sample_size_hoeffding(1.0, 0.1, E.powi(-4))? as f64, 1600.0);
    expect("m bernstein 0.01", sample_size_bernstein(0.01, 1.0, 0.1, E.recip())? as f64, 54.0);
    expect("m bernstein 1", sample_size_bernstein(1.0, 1.0, 0.1, E.recip())? as f64, 534.0);

    let mut sandwich = 0;
    for i in 0..1000 {
        let kappa = 0.1 + 9.9 * (i % 40) as f64 / 39.0;
        let u = (FRAC_PI_2 - 1e-9) * ((i / 40) as f64 + 0.5) / 25.0;
        let a = alpha_constant(kappa, u / kappa.sqrt())?;
        if !(4.0 / PI * u <= a * (1.0 + 1e-12) && a <= PI * u * (1.0 + 1e-12)) {
            sandwich += 1;
        }
    }
    if sandwich > 0 {
        failed.push(format!("sandwich violated at {sandwich} grid points"));
    }
    let ok = failed.is_empty();
    Ok((ok, if ok { "41 example values, 1000-point sandwich grid".into() } else { failed.join("; ") }))
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Check); 13] = [
        ("Euclidean exactness", 5, c01_euclidean_exactness),
        ("Hilbert rate equality", 120, c02_hilbert_equality),
        ("CAT(0) iterated bound", 120, c03_sturm_bound),
        ("sphere expectation bound and rate", 600, c04_sphere_expectation),
        ("positive-curvature iterated bound", 600, c05_positive_curvature_iterated),
        ("tail coverage", 180, c06_tail_coverage),
        ("Lipschitz property", 60, c07_lipschitz),
        ("three-arm star regression", 10, c08_figure1),
        ("PAC stochastic approximation", 120, c09_pac),
        ("SPD identities", 30, c10_spd_identities),
        ("gradient correctness", 30, c11_gradient),
        ("parallelized estimator", 300, c12_parallel),
        ("bound calculator", 1, c13_bound_calculator),
    ];
    let mut failures = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*limit);
        let (passed, detail) = match result {
            Ok((ok, detail)) => (ok && in_time, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!(
            "{} [{:02}] {name}: {detail} ({:.2} s, limit {limit} s)",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
