use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> String {
    root().join("fixtures").join(name).to_string_lossy().into_owned()
}

fn config(name: &str) -> String {
    root().join("configs").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frechet"))
        .args(args)
        .env("FRECHET_THREADS", "2")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn last_line(out: &Output) -> String {
    stdout(out).lines().last().unwrap_or_default().to_string()
}

fn read_row(path: &Path) -> Vec<f64> {
    std::fs::read_to_string(path)
        .unwrap()
        .trim()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect()
}

#[test]
fn solve_two_points_gives_the_midpoint() {
    let out = run(&["solve", "--space", "euclidean", "--points", &fixture("euclidean_2d.csv"), "--method", "exact"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(last_line(&out), "1,0");
}

#[test]
fn single_point_is_its_own_barycenter() {
    for method in ["exact", "cyclic", "gradient", "iterated", "auto"] {
        let out = run(&["solve", "--space", "euclidean", "--points", &fixture("euclidean_single.csv"), "--method", method]);
        assert_eq!(code(&out), 0, "{method}: {}", stderr(&out));
        assert_eq!(last_line(&out), "1.5,-2,0.25", "{method}");
    }
}

#[test]
fn bad_sphere_row_is_reported_by_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "1,0,0\n0,1.1,0\n").unwrap();
    let out = run(&["solve", "--space", "sphere", "--points", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn non_convergence_exits_with_two() {
    let out = run(&[
        "solve", "--space", "sphere", "--points", &fixture("sphere_cap.csv"),
        "--method", "gradient", "--max-rounds", "1", "--tol", "1e-14",
    ]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(code(&run(&["solve", "--bogus"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn tree_files_solve_exactly() {
    let out = run(&[
        "solve", "--space", "tree", "--edges", &fixture("tree_edges.csv"), "--points", &fixture("tree_points.csv"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    // Arms 0 and 2 carry weight 1.5 and 1.0 away from the root against 0.25
    // and 0.5 on the others; the folded mean on edge 0 is 0.25.
    assert_eq!(last_line(&out), "0,0.25");
}

#[test]
fn cyclic_tracks_gradient_on_smooth_fixtures() {
    // Cyclic stops on per-pass movement, and its distance to the minimizer
    // shrinks like sqrt(tol), not tol. Euclidean passes are exact.
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("euclidean", "euclidean_2d.csv"),
        ("sphere", "sphere_cap.csv"),
        ("hyperbolic", "hyperbolic.csv"),
        ("spd", "spd_3x3.csv"),
    ];
    for (space, file) in cases {
        for tol in [1e-7f64, 1e-9] {
            let t = tol.to_string();
            let paths: Vec<PathBuf> = ["cyclic", "gradient"]
                .iter()
                .map(|m| {
                    let p = dir.path().join(format!("{space}_{m}.csv"));
                    let out = run(&[
                        "solve", "--space", space, "--points", &fixture(file), "--method", m,
                        "--tol", &t, "--max-rounds", "100000", "--out", p.to_str().unwrap(),
                    ]);
                    assert_eq!(code(&out), 0, "{space} {m}: {}", stderr(&out));
                    p
                })
                .collect();
            let (c, g) = (read_row(&paths[0]), read_row(&paths[1]));
            let gap = c.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let allowed = if space == "euclidean" { 10.0 * tol } else { 10.0 * tol.sqrt() };
            assert!(gap <= allowed, "{space} tol {tol}: gap {gap}");
        }
    }
}

#[test]
fn approx_is_reproducible_from_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let once = |name: &str, seed: &str| {
        let p = dir.path().join(name);
        let out = run(&[
            "approx", "--space", "sphere", "--points", &fixture("sphere_cap.csv"),
            "--eps", "0.2", "--delta", "0.1", "--seed", seed, "--out", p.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        (std::fs::read(&p).unwrap(), stdout(&out))
    };
    let (a, report) = once("a.csv", "7");
    let (b, _) = once("b.csv", "7");
    assert_eq!(a, b);
    assert!(report.contains("m = "), "{report}");
    let (c, _) = once("c.csv", "8");
    assert_ne!(a, c);
}

#[test]
fn seeds_are_required() {
    let out = run(&["approx", "--space", "euclidean", "--points", &fixture("euclidean_2d.csv"), "--eps", "0.5", "--delta", "0.1"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--seed"));
    let out = run(&["experiment", "--config", &config("two_point_tail.json")]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--seed"));
}

#[test]
fn bound_examples() {
    let value = |args: &[&str]| -> f64 {
        let mut all = vec!["bound"];
        all.extend_from_slice(args);
        let out = run(&all);
        assert_eq!(code(&out), 0, "{args:?}: {}", stderr(&out));
        last_line(&out).trim().parse().unwrap()
    };
    assert_eq!(value(&["--which", "alpha", "--kappa", "-1"]), 2.0);
    let a = value(&["--which", "alpha", "--kappa", "1", "--epsilon", "0.785398163"]);
    assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-8, "{a}");
    assert_eq!(value(&["--which", "m-hoeffding", "--D", "1", "--eps", "0.1", "--delta", "0.367879441"]), 400.0);

    let out = run(&["bound", "--which", "m-hoeffding", "--D", "1", "--eps", "0.1"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--delta"), "{}", stderr(&out));
    let out = run(&["bound", "--which", "empirical-exp", "--kappa", "1", "--n", "10", "--sigma2", "1"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--epsilon"), "{}", stderr(&out));
}

#[test]
fn experiment_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let once = |name: &str| {
        let p = dir.path().join(name);
        let out = run(&["experiment", "--config", &config("two_point_tail.json"), "--seed", "11", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", stdout(&out));
        std::fs::read_to_string(&p).unwrap()
    };
    let a = once("a.csv");
    assert_eq!(a, once("b.csv"));
    let header = a.lines().next().unwrap();
    assert_eq!(
        header,
        "experiment_id,space,kappa,epsilon,estimator,n,replicates,mse,mse_stderr,q50,q90,q99,exp_bound,tail_bound,delta,exceedance,flags,seed"
    );
    assert_eq!(a.lines().count(), 2);
}

#[test]
fn shipped_configs_pass() {
    for name in ["euclidean_gaussian.json", "sphere_cap.json"] {
        let out = run(&["experiment", "--config", &config(name), "--seed", "1"]);
        assert_eq!(code(&out), 0, "{name}: {}{}", stdout(&out), stderr(&out));
        assert!(!(stdout(&out) + &stderr(&out)).contains("FAIL"), "{name}");
    }
}

#[test]
fn schema_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p.to_string_lossy().into_owned()
    };
    let empty = write(
        "empty.json",
        r#"{"experiment_id": "x", "space": {"kind": "euclidean", "dim": 2},
            "sampler": {"kind": "two_point", "radius": 1.0},
            "estimator": {"kind": "empirical"}, "n_grid": [], "replicates": 10}"#,
    );
    let out = run(&["experiment", "--config", &empty, "--seed", "1"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("n_grid"), "{}", stderr(&out));

    let typo = write(
        "typo.json",
        r#"{"experiment_id": "x", "space": {"kind": "euclidean", "dim": "two"}}"#,
    );
    let out = run(&["experiment", "--config", &typo, "--seed", "1"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("space"), "{}", stderr(&out));
}

#[test]
fn failing_checks_exit_with_two() {
    // With t_k = 1 / (k + 1) in flat space the first draw counts twice, so at
    // n = 2 the error is 5 sigma^2 / 9 rather than sigma^2 / 2.
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("fail.json");
    std::fs::write(
        &p,
        r#"{"experiment_id": "fail", "space": {"kind": "euclidean", "dim": 1},
            "sampler": {"kind": "two_point", "radius": 1.0},
            "estimator": {"kind": "iterated"}, "schedule": "positive_curvature",
            "domain": {"radius": 10.0, "epsilon": 1.0},
            "n_grid": [2, 4], "replicates": 4000, "checks": ["variance_equality"]}"#,
    )
    .unwrap();
    let out = run(&["experiment", "--config", p.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(code(&out), 2, "{}{}", stdout(&out), stderr(&out));
    assert!((stdout(&out) + &stderr(&out)).contains("FAIL variance_equality"));
}
