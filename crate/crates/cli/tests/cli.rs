use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn pdext(args: &[&str]) -> Output {
    pdext_env(args, &[])
}

fn pdext_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pdext"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

fn cfg(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn check_passes_for_the_exponential_kernel() {
    let o = pdext(&["check", "--config", &cfg("ou.json")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert_eq!(r["command"], "check");
    assert!(r["min_eig"].as_f64().unwrap() >= -1e-10);
    // the resolved config carries defaults that were not in the file
    assert_eq!(r["resolved"]["config"]["points"]["grid"], 32);
    assert_eq!(r["resolved"]["config"]["kernel"]["type"], "exponential");
}

#[test]
fn check_reports_definiteness_failures_with_exit_one() {
    let dir = TempDir::new().unwrap();
    let c = write(
        &dir,
        "neg.json",
        r#"{"kernel": {"type": "power", "params": {"exponent": 1.0}},
            "domain": {"intervals": [[0, 1]]}}"#,
    );
    let o = pdext(&["check", "--config", &c]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["pass"], false);
    let o = pdext(&["check", "--property", "cnd", "--config", &c]);
    assert_eq!(code(&o), 0);
}

#[test]
fn zero_padding_the_exponential_finds_a_witness() {
    let o = pdext(&["extend", "--method", "zero-pad", "--config", &cfg("expneg.json")]);
    assert_eq!(code(&o), 1);
    let r = json(&o);
    assert_eq!(r["verdict"], "witness-found");
    assert!(r["min_eig"].as_f64().unwrap() < -1e-10);
    assert!(r["witness_points"].as_array().unwrap().len() >= 2);
}

#[test]
fn polya_candidate_csv_follows_the_tangent() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("candidate.csv");
    let o = pdext(&[
        "extend",
        "--method",
        "polya",
        "--config",
        &cfg("expneg.json"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert_eq!(r["tangent"]["zero_at"], 2.0);
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,re,im"));
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let a = v[0].abs();
        let want = if a < 1.0 {
            (-a).exp()
        } else {
            ((-1.0f64).exp() * (2.0 - a)).max(0.0)
        };
        assert!((v[1] - want).abs() < 1e-12 && v[2] == 0.0, "{line}");
    }
}

#[test]
fn measure_extension_and_bochner_accept_the_cauchy_density() {
    let o = pdext(&["extend", "--method", "measure", "--config", &cfg("expneg.json")]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["restriction"]["valid"], true);
    let o = pdext(&["bochner", "--config", &cfg("expneg.json")]);
    assert_eq!(code(&o), 0);
}

#[test]
fn bochner_rejects_a_measure_of_another_kernel() {
    let dir = TempDir::new().unwrap();
    let mu = write(&dir, "atoms.csv", "position,weight\n-1,0.5\n1,0.5\n");
    let o = pdext(&["bochner", "--config", &cfg("expneg.json"), "--measure", &mu]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["restriction"]["valid"], false);
}

#[test]
fn uniqueness_verdicts() {
    let r = json(&pdext(&["unique", "--config", &cfg("expneg.json")]));
    assert_eq!(r["verdict"], "non-unique");
    assert_eq!(r["def_dim"], 2);
    let r = json(&pdext(&["unique", "--config", &cfg("sinc.json")]));
    assert_eq!(r["verdict"], "unique");
    assert_eq!(r["resolved"]["args"]["precision"], "quad");
}

#[test]
fn gp_paths_csv_and_report_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = pdext_env(
            &[
                "gp", "--config", &cfg("ou.json"), "--paths", "300", "--seed", "9", "--out",
                out.to_str().unwrap(),
            ],
            &[("RAYON_NUM_THREADS", threads)],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let report = String::from_utf8(o.stdout).unwrap().replace(name, "paths.csv");
        (fs::read(out).unwrap(), report)
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "1");
    let c = run("c.csv", "4");
    assert_eq!(a, b);
    assert_eq!(a, c);
    let text = String::from_utf8(a.0).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 301);
    assert_eq!(lines[0].split(',').count(), 16);
    assert!(lines[0].starts_with("0,0.1,"));
}

#[test]
fn increment_process_from_a_variogram() {
    let o = pdext(&["gp", "--config", &cfg("fbm.json"), "--paths", "4000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert_eq!(r["process"], "increment");
    assert!(r["covariance"]["max_abs_error"].as_f64().unwrap() < 0.1);
}

#[test]
fn scatter_reports_defects_and_multiplier_samples() {
    let dir = TempDir::new().unwrap();
    let mu = dir.path().join("mu.csv");
    let nu = dir.path().join("nu.csv");
    for (method, path) in [("measure", &mu), ("polya", &nu)] {
        let o = pdext(&[
            "extend",
            "--method",
            method,
            "--config",
            &cfg("expneg.json"),
            "--measure-out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
    }
    let c = write(
        &dir,
        "scatter.json",
        r#"{"kernel": {"type": "exponential", "params": {"rate": 1.0}},
            "domain": {"intervals": [[0, 1]]},
            "scatter": {"mu_budget": 2e-3, "nu_budget": 2e-3, "multiplier_stride": 512}}"#,
    );
    let o = pdext(&[
        "scatter",
        "--f",
        &c,
        "--mu",
        mu.to_str().unwrap(),
        "--nu",
        nu.to_str().unwrap(),
        "--anchors",
        "4",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert_eq!(r["anchors"], 4);
    assert_eq!(r["defects"].as_array().unwrap().len(), 9);
    assert!(!r["multiplier_samples"].as_array().unwrap().is_empty());

    // a measure that does not represent F is a mathematical failure
    let atoms = write(&dir, "atoms.csv", "position,weight\n-1,0.5\n1,0.5\n");
    let o = pdext(&[
        "scatter", "--f", &c, "--mu", &atoms, "--nu", nu.to_str().unwrap(), "--anchors", "4",
    ]);
    assert_eq!(code(&o), 1);
    assert!(json(&o)["error"].as_str().unwrap().contains("not an extension"));
}

#[test]
fn spectral_pairs_and_non_pairs() {
    let o = pdext(&["spectral", "--omega", "0,1;2,3", "--lambda-pattern", "quarter", "--range", "5"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert!(r["max_offdiag"].as_f64().unwrap() <= 1e-12);
    assert_eq!(r["lambdas"], 21);
    let indicator = &r["parseval_defects"][0];
    assert_eq!(indicator["function"], "indicator");
    assert!(indicator["defect"].as_f64().unwrap().abs() < 1e-10);

    let o = pdext(&["spectral", "--omega", "0,1;3,5", "--lambda-pattern", "half", "--range", "5"]);
    assert_eq!(code(&o), 1);
    assert!(json(&o)["max_offdiag"].as_f64().unwrap() >= 0.1);
}

#[test]
fn sampled_kernels_load_from_shuffled_tables() {
    let dir = TempDir::new().unwrap();
    let mut rows: Vec<String> = (-20..=20)
        .map(|k| {
            let z = k as f64 / 20.0;
            format!("{z},{},0", (-f64::abs(z)).exp())
        })
        .collect();
    rows.reverse();
    rows.swap(3, 17);
    write(&dir, "k.csv", &format!("z,re,im\n{}\n", rows.join("\n")));
    let c = write(
        &dir,
        "sampled.json",
        r#"{"kernel": {"type": "sampled", "params": {"path": "k.csv"}},
            "domain": {"intervals": [[0, 1]]}}"#,
    );
    let o = pdext(&["check", "--config", &c]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    write(&dir, "k.csv", "z,re,im\n0,1,0\n0.1,0.9,0\n0.25,0.8,0\n");
    let o = pdext(&["check", "--config", &c]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("uniformly spaced"));
}

#[test]
fn usage_errors_exit_two() {
    let o = pdext(&["check", "--config", "/nonexistent/config.json"]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());

    let dir = TempDir::new().unwrap();
    let c = write(
        &dir,
        "typo.json",
        "{\n  \"kernel\": {\"type\": \"exponential\", \"params\": {\"rate\": 1}},\n  \"domian\": {}\n}",
    );
    let o = pdext(&["check", "--config", &c]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("domian") && err.contains("line 3"), "{err}");

    assert_eq!(code(&pdext(&["frobnicate"])), 2);
    assert_eq!(code(&pdext(&["extend", "--method", "guess"])), 2);
    assert_eq!(code(&pdext(&["gram"])), 2);
    assert_eq!(code(&pdext(&["--help"])), 0);
}

#[test]
fn out_redirects_json_reports() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let o = pdext(&["gram", "--config", &cfg("example20.json"), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let r: Value = serde_json::from_slice(&fs::read(out).unwrap()).unwrap();
    let n = r["points"].as_array().unwrap().len();
    assert_eq!(n, 20);
    assert_eq!(r["matrix"].as_array().unwrap().len(), n);
    assert!(r["eigenvalues"][0].as_f64().unwrap() >= -1e-10);
}
