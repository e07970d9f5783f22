use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn capra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capra"))
        .args(args)
        .env_remove("CAPRA_SEED")
        .output()
        .expect("run capra")
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn norm_examples() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.json", "[3, 0, -4]");
    let x2 = write(&dir, "x2.txt", "3 -4\n");

    let v = json(&capra(&["norm", "--kind", "topk", "--k", "2", "--vec", &x]));
    assert_eq!(v["value"], 5.0);
    assert_eq!(v["kind"], "topk");
    assert_eq!(v["k"], 2);

    let v = json(&capra(&["norm", "--kind", "l0", "--vec", &x]));
    assert_eq!(v["value"], 2.0);

    let v = json(&capra(&["norm", "--kind", "ksup", "--k", "1", "--vec", &x2]));
    assert_eq!(v["value"], 7.0);

    let v = json(&capra(&["norm", "--kind", "euclid", "--vec", &x]));
    assert_eq!(v["value"], 5.0);
}

#[test]
fn zero_tol_flag() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.json", "[1e-9, 1, 0]");
    assert_eq!(json(&capra(&["norm", "--kind", "l0", "--vec", &x]))["value"], 2.0);
    let v = json(&capra(&["norm", "--kind", "l0", "--vec", &x, "--zero-tol", "1e-6"]));
    assert_eq!(v["value"], 1.0);
}

#[test]
fn conjugate_examples() {
    let dir = TempDir::new().unwrap();
    let y = write(&dir, "y.json", "[2, 0]");

    let v = json(&capra(&["conjugate", "--fn", "l0", "--at", &y]));
    assert_eq!(v["closed_form"], 1.0);

    let v = json(&capra(&["conjugate", "--fn", "levelset", "--k", "0", "--at", &y]));
    assert_eq!(v["closed_form"], 0.0);

    let args = ["conjugate", "--fn", "l0", "--at", &y, "--engine", "grid", "--samples", "4096", "--seed", "7"];
    let v = json(&capra(&args));
    let closed = v["closed_form"].as_f64().unwrap();
    let grid = v["oracle"].as_f64().unwrap();
    assert!(grid <= closed);
    assert_eq!(v["gap"].as_f64().unwrap(), closed - grid);
}

#[test]
fn grid_engine_is_seeded() {
    let dir = TempDir::new().unwrap();
    let y = write(&dir, "y.json", "[0.3, -1.2, 0.7]");
    let run = |seed: &str| {
        let args = ["conjugate", "--fn", "levelset", "--k", "2", "--at", &y, "--engine", "grid", "--samples", "256", "--seed", seed];
        json(&capra(&args))
    };
    assert_eq!(run("5"), run("5"));
    let v = run("5");
    assert!(v["oracle"].as_f64().unwrap() <= v["closed_form"].as_f64().unwrap());
}

#[test]
fn biconjugate_command() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.json", "[3, 0, -4]");
    let v = json(&capra(&["biconjugate", "--at", &x, "--restarts", "4"]));
    assert!((v["oracle"].as_f64().unwrap() - 2.0).abs() <= 1e-4);
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.json", "[3, 0, -4]");
    assert_eq!(capra(&["norm", "--kind", "topk", "--vec", &x]).status.code(), Some(2));
    assert_eq!(capra(&["norm", "--kind", "topk", "--k", "9", "--vec", &x]).status.code(), Some(2));
    assert_eq!(capra(&["norm", "--kind", "bogus", "--vec", &x]).status.code(), Some(2));
    assert_eq!(capra(&["verify", "--suite", "bogus"]).status.code(), Some(2));
    let out = capra(&["conjugate", "--fn", "levelset", "--at", &x]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn io_errors_exit_3() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    let out = capra(&["norm", "--kind", "l0", "--vec", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());

    let bad = write(&dir, "bad.json", "[1, \"a\"]");
    assert_eq!(capra(&["norm", "--kind", "l0", "--vec", &bad]).status.code(), Some(3));
    let nan = write(&dir, "nan.txt", "1 NaN");
    assert_eq!(capra(&["norm", "--kind", "l0", "--vec", &nan]).status.code(), Some(3));

    let out = capra(&["verify", "--suite", "moreau", "--out", dir.path().join("no/such/dir/r.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_moreau_writes_report() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("r.json");
    let out = capra(&["verify", "--suite", "moreau", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(r["schema"], "capra-report/1");
    assert_eq!(r["suite"], "moreau");
    assert_eq!(r["summary"]["failed"], 0);
    assert_eq!(r["checks"][0]["id"], "moreau.laws");
    assert_eq!(r["checks"][0]["worst_gap"], 0.0);
    assert!(r["generated_at"].as_str().unwrap().ends_with('Z'));
}

#[test]
fn verify_theorem_on_chosen_dims() {
    let out = capra(&["verify", "--suite", "theorem", "--seed", "42", "--dims", "2,3,4"]);
    let r = json(&out);
    assert_eq!(r["dims"], serde_json::json!([2, 3, 4]));
    assert_eq!(r["summary"]["failed"], 0);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["id"].as_str().unwrap().starts_with("theorem.")));
}

fn seed_of(out: &Output) -> u64 {
    json(out)["seed"].as_u64().unwrap()
}

#[test]
fn seed_precedence() {
    let dir = TempDir::new().unwrap();
    let toml = write(&dir, "c.toml", "seed = 11\ndims = [2]\nsamples = 10\n");
    let json_cfg = write(&dir, "c.json", r#"{"seed": 12, "dims": [2], "samples": 10}"#);
    let base = ["verify", "--suite", "moreau"];

    assert_eq!(seed_of(&capra(&base)), 0);
    assert_eq!(seed_of(&capra(&[&base[..], &["--config", &toml]].concat())), 11);
    assert_eq!(seed_of(&capra(&[&base[..], &["--config", &json_cfg]].concat())), 12);
    assert_eq!(seed_of(&capra(&[&base[..], &["--config", &toml, "--seed", "13"]].concat())), 13);

    let env = |cfg: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_capra"));
        c.args(base).env("CAPRA_SEED", "99");
        if let Some(p) = cfg {
            c.args(["--config", p]);
        }
        c.output().unwrap()
    };
    assert_eq!(seed_of(&env(None)), 99);
    assert_eq!(seed_of(&env(Some(&toml))), 11);
}

#[test]
fn bad_config_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", "sead = 1\n");
    assert_eq!(capra(&["verify", "--suite", "moreau", "--config", &cfg]).status.code(), Some(3));
    assert!(!Path::new(&dir.path().join("r.json")).exists());
}
