use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qlt(args: &[&str], cfg: Option<&Path>, out: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qlt"));
    cmd.args(args).arg("--out").arg(out);
    if let Some(c) = cfg {
        cmd.arg("--config").arg(c);
    }
    cmd.output().unwrap()
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

const SMALL_VQE: &str = r#"
[model]
n = 6
layers = 2

[sweep]
max_sweeps = 1
shots_per_gate = 5440

[gd]
max_iters = 5

[spsa]
method = "spsa"
max_iters = 50
spsa_shots = 1000
"#;

#[test]
fn vqe_is_deterministic_and_reproducible_from_its_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("vqe.toml");
    fs::write(&cfg, SMALL_VQE).unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for out in [&a, &b] {
        let r = qlt(&["vqe", "--seed", "7"], Some(&cfg), out);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    for f in ["trace_sweep.csv", "trace_gd.csv", "trace_spsa.csv", "vqe_summary.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    // re-run from the config embedded in an output file
    let r = qlt(&["vqe"], Some(&a.join("trace_gd.csv")), &c);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(fs::read(a.join("trace_sweep.csv")).unwrap(), fs::read(c.join("trace_sweep.csv")).unwrap());
    let text = fs::read_to_string(a.join("trace_sweep.csv")).unwrap();
    assert!(text.starts_with("# qlt "));
    assert!(text.contains("# seed: 7\n"));
    assert!(text.contains("\nevent,gate_index,cum_shots,cum_circuits,energy\ninit,,0,0,"));
}

#[test]
fn different_seeds_give_different_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("vqe.toml");
    fs::write(&cfg, SMALL_VQE.replace("n = 6", "n = 4")).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(qlt(&["vqe", "--seed", "1"], Some(&cfg), &a).status.success());
    assert!(qlt(&["vqe", "--seed", "2"], Some(&cfg), &b).status.success());
    assert_ne!(data_rows(&a.join("trace_gd.csv")), data_rows(&b.join("trace_gd.csv")));
}

#[test]
fn builtin_cover_overhead_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("g.json");
    fs::write(&cfg, r#"{"sets": ["builtin_cover", "clifford_group"]}"#).unwrap();
    let r = qlt(&["gateset-overhead"], Some(&cfg), dir.path());
    assert!(r.status.success());
    let rows = data_rows(&dir.path().join("gateset_overhead.csv"));
    assert_eq!(rows[0][0], "builtin_cover");
    assert_eq!(rows[0][2], "272");
    let ratio: f64 = rows[0][6].parse().unwrap();
    assert!((ratio - 1.058).abs() < 0.003, "{ratio}");
    assert_eq!(rows[1][6], "1.0");
}

#[test]
fn tableaux_error_falls_over_the_shot_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t.toml");
    fs::write(&cfg, "shots = [10000, 1000000]\nestimators = [\"tableaux\"]\nrepetitions = 2\n").unwrap();
    assert!(qlt(&["tomo-bench"], Some(&cfg), dir.path()).status.success());
    let rows = data_rows(&dir.path().join("tomo_bench.csv"));
    let mean = |shots: &str| {
        let v: Vec<f64> = rows.iter().filter(|r| r[1] == shots).map(|r| r[5].parse().unwrap()).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    assert!(mean("1000000") < mean("10000"));
}

#[test]
fn cover_search_writes_a_loadable_cover() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "k = 1\npool_size = 50\nrestarts = 4\n").unwrap();
    assert!(qlt(&["cover-search"], Some(&cfg), dir.path()).status.success());
    let text = fs::read_to_string(dir.path().join("cover.json")).unwrap();
    assert!(text.contains("config_sha256"));
    // feed it back through gateset-overhead
    let g = dir.path().join("g.toml");
    fs::write(&g, format!("k = 1\nsets = [\"builtin_cover\"]\ncover = {:?}\n", dir.path().join("cover.json"))).unwrap();
    let r = qlt(&["gateset-overhead"], Some(&g), &dir.path().join("g"));
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[model]\nn = \"six\"\n").unwrap();
    let r = qlt(&["tomo-bench"], Some(&bad), dir.path());
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("model.n"));

    fs::write(&bad, "unknown_field = 1\n").unwrap();
    assert_eq!(qlt(&["env-check"], Some(&bad), dir.path()).status.code(), Some(2));

    let strict = dir.path().join("strict.toml");
    fs::write(&strict, "tol = 0.0\n").unwrap();
    assert_eq!(qlt(&["env-check"], Some(&strict), dir.path()).status.code(), Some(3));

    let cover = dir.path().join("cover.json");
    let builtin = include_str!("../../core/data/cover_2q.json");
    fs::write(&cover, builtin.replacen("\"cnots\": 2", "\"cnots\": 1", 1)).unwrap();
    let g = dir.path().join("g.toml");
    fs::write(&g, format!("sets = [\"builtin_cover\"]\ncover = {cover:?}\n")).unwrap();
    assert_eq!(qlt(&["gateset-overhead"], Some(&g), dir.path()).status.code(), Some(3));

    assert_eq!(qlt(&["env-check"], None, dir.path()).status.code(), Some(0));
}
