use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rqa_core::cnf;
use tempfile::TempDir;

fn forge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rqa-forge"))
        .args(args)
        .current_dir(dir)
        .env_remove("RQA_FORGE_SEED")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn workspace() -> TempDir {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("x1.cnf"), "p cnf 1 1\n1 0\n").unwrap();
    fs::write(d.path().join("contra.cnf"), "p cnf 1 2\n1 0\n-1 0\n").unwrap();
    fs::write(d.path().join("small.cnf"), "c three clauses\np cnf 3 3\n1 -2 0\n2 3 0\n-1 -3 0\n").unwrap();
    d
}

#[test]
fn encode_unit_clause() {
    let d = workspace();
    let o = forge(d.path(), &["encode", "x1.cnf", "--out", "m.json"]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("D min 2.000000"));
    let enc: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("m.json")).unwrap()).unwrap();
    assert_eq!(enc["margins"][0], 2.0);
    assert_eq!(enc["h"][0], -2.0);
}

#[test]
fn encode_errors_leave_no_output() {
    let d = workspace();
    let o = forge(d.path(), &["encode", "absent.cnf", "--out", "m.json"]);
    assert_eq!(code(&o), 2);
    assert!(!d.path().join("m.json").exists());

    fs::write(d.path().join("rho.txt"), "[0.5, -0.5]").unwrap();
    let o = forge(d.path(), &["encode", "x1.cnf", "--rho", "rho.txt", "--out", "m.json"]);
    assert_eq!(code(&o), 2);
    assert!(text(&o.stderr).contains("2 influence factors given for 1 clauses"));
    assert!(!d.path().join("m.json").exists());

    fs::write(d.path().join("rho.txt"), "0.1\n-0.1\n0\n").unwrap();
    let o = forge(d.path(), &["encode", "small.cnf", "--rho", "rho.txt"]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
}

#[test]
fn solve_exit_codes() {
    let d = workspace();
    let o = forge(d.path(), &["solve", "x1.cnf", "--budget", "20"]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));

    let o = forge(d.path(), &["solve", "contra.cnf", "--budget", "20", "--out", "r.json"]);
    assert_eq!(code(&o), 1, "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("unsatisfied 1/2"));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["unsat_count"], 1);
    assert_eq!(r["runtime_ms"], 0.0);

    let o = forge(d.path(), &["solve", "absent.cnf"]);
    assert_eq!(code(&o), 2);
    let o = forge(d.path(), &["solve", "x1.cnf", "--method", "qa,rqa"]);
    assert_eq!(code(&o), 2);
    let o = forge(d.path(), &["solve", "x1.cnf", "--budget", "5"]);
    assert_eq!(code(&o), 2, "budget below the episode count");
}

#[test]
fn solve_is_reproducible_and_never_overwrites_silently() {
    let d = workspace();
    let args = ["solve", "small.cnf", "--method", "rqa", "--budget", "200", "--seed", "3", "--out"];
    assert_eq!(code(&forge(d.path(), &[&args[..], &["a.json"]].concat())), 0);
    assert_eq!(code(&forge(d.path(), &[&args[..], &["b.json"]].concat())), 0);
    let a = fs::read(d.path().join("a.json")).unwrap();
    assert_eq!(a, fs::read(d.path().join("b.json")).unwrap());

    let o = forge(d.path(), &[&args[..], &["a.json"]].concat());
    assert_eq!(code(&o), 2);
    assert!(text(&o.stderr).contains("--force"));
    assert_eq!(code(&forge(d.path(), &[&args[..], &["a.json", "--force"]].concat())), 0);
}

#[test]
fn seed_falls_back_to_environment() {
    let d = workspace();
    let run = |extra: &[&str], env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_rqa-forge"));
        c.args(["solve", "small.cnf", "--method", "qa", "--budget", "30", "--env", "metropolis", "--sweeps", "2"])
            .args(extra)
            .current_dir(d.path())
            .env_remove("RQA_FORGE_SEED");
        if let Some(v) = env {
            c.env("RQA_FORGE_SEED", v);
        }
        c.output().unwrap().stdout
    };
    assert_eq!(run(&[], Some("41")), run(&["--seed", "41"], None));
    assert_eq!(run(&["--seed", "41"], Some("7")), run(&["--seed", "41"], None));
}

#[test]
fn manifest_supplies_parameters() {
    let d = workspace();
    fs::write(
        d.path().join("run.toml"),
        "instances = [\"contra.cnf\"]\nmethods = [\"smqc\"]\nbudgets = [16]\nseed = 9\nout = \"res.json\"\n\n[env]\nsampler = \"exact\"\nbeta_eff = 2.0\n",
    )
    .unwrap();
    let o = forge(d.path(), &["solve", "--manifest", "run.toml"]);
    assert_eq!(code(&o), 1, "{}", text(&o.stderr));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("res.json")).unwrap()).unwrap();
    assert_eq!(r["pipeline"], "smqc");
    assert_eq!(r["reads_used"], 16);

    fs::write(d.path().join("bad.toml"), "budget = 3\n").unwrap();
    assert_eq!(code(&forge(d.path(), &["solve", "x1.cnf", "--manifest", "bad.toml"])), 2);
}

#[test]
fn gen_factoring_writes_a_satisfiable_instance() {
    let d = workspace();
    let o = forge(d.path(), &["gen", "factoring", "15", "--out", "fac"]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let files: Vec<_> = fs::read_dir(d.path().join("fac"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".cnf"))
        .collect();
    assert_eq!(files.len(), 1);
    let f = cnf::parse_dimacs(&fs::read_to_string(d.path().join("fac").join(&files[0])).unwrap()).unwrap();
    assert!(cnf::find_model(&f).is_some());
    let manifest = fs::read_to_string(d.path().join("fac/manifest.toml")).unwrap();
    assert!(manifest.contains(&files[0]));

    let o = forge(d.path(), &["gen", "factoring", "7", "--out", "prime"]);
    assert_eq!(code(&o), 0);
    let f = cnf::parse_dimacs(&fs::read_to_string(d.path().join("prime/factor-7-2x2.cnf")).unwrap()).unwrap();
    assert!(cnf::find_model(&f).is_none());
}

#[test]
fn gen_random_3sat_shape() {
    let d = workspace();
    let o = forge(d.path(), &["gen", "random3sat", "--n", "50", "--ratio", "4.36", "--seed", "7", "--out", "r"]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let f = cnf::parse_dimacs(&fs::read_to_string(d.path().join("r/r3sat-n50-s7-000.cnf")).unwrap()).unwrap();
    assert_eq!((f.num_vars(), f.num_clauses()), (50, 218));

    // a regular file where the directory should be
    fs::write(d.path().join("blocker"), "").unwrap();
    let o = forge(d.path(), &["gen", "random3sat", "--n", "10", "--out", "blocker/sub"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bench_reruns_are_byte_identical() {
    let d = workspace();
    let gen = forge(d.path(), &["gen", "random3sat", "--n", "8", "--count", "3", "--satisfiable", "--seed", "1", "--out", "c"]);
    assert_eq!(code(&gen), 0, "{}", text(&gen.stderr));
    let bench = |out: &str, workers: &str| {
        let o = forge(
            d.path(),
            &["bench", "--manifest", "c/manifest.toml", "--budget", "20,40", "--repeats", "2", "--workers", workers, "--out", out],
        );
        assert_eq!(code(&o), 0, "{}", text(&o.stderr));
        (fs::read(d.path().join(out).join("results.csv")).unwrap(), fs::read(d.path().join(out).join("summary.json")).unwrap())
    };
    let a = bench("a", "1");
    assert_eq!(a, bench("b", "0"));
    assert_eq!(a, bench("c2", "3"));
    let csv = text(&a.0);
    assert!(csv.starts_with("instance,method,budget,unsat_min,unsat_max,unsat_mean,unsat_var,runtime_ms\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 3 * 2);

    let o = forge(d.path(), &["bench", "--manifest", "c/manifest.toml", "--out", "a"]);
    assert_eq!(code(&o), 2, "existing report must not be overwritten");
}

#[test]
fn desk_preset_report() {
    let d = workspace();
    let o = forge(d.path(), &["bench", "--preset", "desk", "--out", "desk"]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let stdout = text(&o.stdout);
    for m in ["qa", "smqc", "rqa"] {
        assert!(stdout.lines().any(|l| l.starts_with(m)), "{stdout}");
    }
    let mut reader = csv_rows(&fs::read_to_string(d.path().join("desk/results.csv")).unwrap());
    assert_eq!(reader.len(), 20 * 3 * 2);
    for row in reader.drain(..) {
        let (min, max, mean): (f64, f64, f64) = (row[3].parse().unwrap(), row[4].parse().unwrap(), row[5].parse().unwrap());
        assert!(min <= mean && mean <= max, "{row:?}");
        assert!(row[6].parse::<f64>().unwrap() >= 0.0);
    }
}

fn csv_rows(s: &str) -> Vec<Vec<String>> {
    s.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn paper_shape_preset_has_five_budgets_for_three_methods() {
    let d = workspace();
    let o = forge(d.path(), &["bench", "--preset", "paper-shape", "--print-manifest"]);
    assert_eq!(code(&o), 0);
    let m: toml::Value = toml::from_str(&text(&o.stdout)).unwrap();
    let budgets: Vec<i64> = m["budgets"].as_array().unwrap().iter().map(|v| v.as_integer().unwrap()).collect();
    assert_eq!(budgets, vec![100, 500, 1000, 5000, 10000]);
    assert_eq!(m["methods"].as_array().unwrap().len(), 3);

    assert_eq!(code(&forge(d.path(), &["bench", "--preset", "huge"])), 2);
    assert_eq!(code(&forge(d.path(), &["bench"])), 2);
}
