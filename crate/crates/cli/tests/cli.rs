use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn treemap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treemap"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

#[test]
fn dp_on_the_random_instance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("l.json");
    let o = treemap(&["layout", data("random.csv").to_str().unwrap(), "-a", "dp", "--container", "1", "1", "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    let p: f64 = column(&stdout(&o), "perimeter")[0].parse().unwrap();
    assert!((p - 10.4649).abs() < 1e-3, "{p}");

    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(doc["cells"].as_array().unwrap().len(), 7);
    for key in ["x", "y", "w", "h"] {
        assert!(doc["container"][key].is_number());
    }
    assert!(doc["bundles"].as_array().unwrap().is_empty());
}

#[test]
fn squarified_on_equal_quarters() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("q.csv");
    std::fs::write(&inst, "a,1\nb,1\nc,1\nd,1\n").unwrap();
    let o = treemap(&["layout", inst.to_str().unwrap(), "-a", "squarified", "--container", "1", "1", "--format", "csv"]);
    assert!(o.status.success());
    let max_ar: f64 = column(&stdout(&o), "maxAR")[0].parse().unwrap();
    assert!((max_ar - 1.0).abs() < 1e-9);
}

#[test]
fn usage_errors_exit_with_two() {
    let inst = data("random.csv");
    let inst = inst.to_str().unwrap();
    for args in [
        vec!["layout", inst, "-a", "sspiral", "--container", "1", "1"],
        vec!["layout", inst, "-a", "dp"],
        vec!["layout", inst, "-a", "bogus", "--container", "1", "1"],
        vec!["layout", inst, "-a", "dp", "--container", "2", "1", "--strict"],
        vec!["layout", "/no/such/file.csv", "-a", "dp", "--container", "1", "1"],
        vec!["compare", inst, "-a", "", "--container", "1", "1"],
        vec!["layout", inst, "-a", "dp", "--alpha", "3", "--container", "1", "1"],
        vec!["frobnicate"],
    ] {
        let o = treemap(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {o:?}");
    }
}

#[test]
fn computation_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("big.csv");
    let body: String = (0..12).map(|i| format!("c{i},{}\n", i + 1)).collect();
    std::fs::write(&inst, body).unwrap();
    let o = treemap(&["layout", inst.to_str().unwrap(), "-a", "opt", "--container", "1", "1"]);
    assert_eq!(o.status.code(), Some(1), "{o:?}");
}

#[test]
fn compare_rows_and_means() {
    let (r, e) = (data("random.csv"), data("random_extreme.csv"));
    let o = treemap(&["compare", r.to_str().unwrap(), e.to_str().unwrap(), "-a", "dp,dc", "--container", "1", "1"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert_eq!(s.lines().next().unwrap(), "instance,algorithm,n,Perimeter,maxAR,avgAR,AWAR");
    let algs = column(&s, "algorithm");
    assert_eq!(algs, ["dc", "dp", "dc", "dp", "dc", "dp"]);
    let inst = column(&s, "instance");
    assert_eq!(&inst[4..], ["mean", "mean"]);

    let one = treemap(&["compare", r.to_str().unwrap(), "-a", "dc", "--container", "1", "1"]);
    assert_eq!(stdout(&one).lines().count(), 3);

    // Spirals ignore the container that the other algorithms need.
    let mixed = treemap(&["compare", r.to_str().unwrap(), "-a", "sspiral,dp", "--container", "1", "1"]);
    assert!(mixed.status.success(), "{mixed:?}");
    assert_eq!(column(&stdout(&mixed), "algorithm"), ["dp", "sspiral", "dp", "sspiral"]);
}

#[test]
fn compare_does_not_depend_on_worker_count() {
    let (r, e) = (data("random.csv"), data("random_extreme.csv"));
    let args = ["compare", r.to_str().unwrap(), e.to_str().unwrap(), "-a", "mdc,squarified,dp,dc", "--container", "2", "1", "--format", "md"];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_treemap"))
            .args(args)
            .env("TREEMAP_THREADS", threads)
            .env("RUST_LOG", "off")
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn study_levels_and_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let r = data("random.csv");
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = treemap(&[
            "study", r.to_str().unwrap(), "-a", "mdc", "--container", "1", "1", "--levels", "0,0.05", "--seed", seed, "-o",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{o:?}");
        std::fs::read_to_string(out).unwrap()
    };
    let a = run("a.csv", "7");
    assert_eq!(a, run("b.csv", "7"));
    assert_ne!(a, run("c.csv", "8"));
    let max_hd = column(&a, "maxHD");
    let avg_hd = column(&a, "avgHD");
    assert_eq!(max_hd[0].parse::<f64>().unwrap(), 0.0);
    assert_eq!(avg_hd[0].parse::<f64>().unwrap(), 0.0);
    assert!(max_hd[1].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn spirals_render_with_bundles() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("s.json");
    let o = treemap(&["layout", data("random.csv").to_str().unwrap(), "-a", "stbundle", "-o", json.to_str().unwrap()]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    let bundles = doc["bundles"].as_array().unwrap().len();

    let svg = treemap(&["render", json.to_str().unwrap()]);
    let s = stdout(&svg);
    assert_eq!(s.matches("<rect").count(), 7);
    assert_eq!(s.matches("class=\"bundle\"").count(), bundles);
    let none = treemap(&["render", json.to_str().unwrap(), "--no-bundles"]);
    assert_eq!(stdout(&none).matches("class=\"bundle\"").count(), 0);
}

#[test]
fn one_cell_renders_one_rect() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("one.csv");
    std::fs::write(&inst, "only,3\n").unwrap();
    let o = treemap(&["layout", inst.to_str().unwrap(), "-a", "dc", "--container", "3", "1", "--format", "svg"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert_eq!(s.matches("<rect").count(), 1);
    assert!(s.contains("viewBox=\"0 0 3 1\""));
}

#[test]
fn hierarchical_json_instances() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("t.json");
    std::fs::write(
        &inst,
        r#"{"name":"root","children":[{"name":"a","children":[{"name":"x","weight":1},{"name":"y","weight":2}]},{"name":"z","weight":3}]}"#,
    )
    .unwrap();
    for (alg, container) in [("dp", true), ("sqbundle", false)] {
        let mut args = vec!["layout", inst.to_str().unwrap(), "-a", alg, "--format", "csv"];
        if container {
            args.extend(["--container", "1", "1"]);
        }
        let o = treemap(&args);
        assert!(o.status.success(), "{alg}: {o:?}");
        assert_eq!(column(&stdout(&o), "n")[0], "3");
    }
}
