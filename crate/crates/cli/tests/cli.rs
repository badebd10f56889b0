use std::fs;
use std::process::{Command, Output};

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sim"))
        .args(args)
        .env_remove("VCSIM_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn scenario_json_echoes_effective_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# short run\nn_users = 3\nduration_s = 4\nstrategy = ecfirst\nseed = 9\n").unwrap();
    let out = dir.path().join("s.json");
    let o = sim(&[
        "scenario",
        "--config",
        cfg.to_str().unwrap(),
        "--users",
        "5",
        "--set",
        "task_workload_mi=800",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["config"]["n_users"], 5, "flag beats file");
    assert_eq!(doc["config"]["seed"], 9);
    assert_eq!(doc["config"]["task_workload_mi"], 800.0);
    assert_eq!(doc["summary"]["strategy"], "ecfirst");
    assert_eq!(doc["summary"]["issued"], 5 * 20);
}

#[test]
fn scenario_is_byte_reproducible() {
    let a = sim(&["scenario", "--duration", "5", "--seed", "4"]);
    let b = sim(&["scenario", "--duration", "5", "--seed", "4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = sim(&["scenario", "--duration", "5", "--seed", "5"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn records_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("records.csv");
    let o = sim(&["scenario", "--duration", "2", "--out", "-", "--records", rec.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(&rec).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("task_id,strategy,destination,t_request"));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let finalized = doc["summary"]["completed"].as_u64().unwrap() + doc["summary"]["failed"].as_u64().unwrap();
    assert_eq!(lines.count() as u64, finalized);
    let side = fs::read_to_string(dir.path().join("records.csv.config")).unwrap();
    assert!(side.contains("duration_s = 2.0"));
}

#[test]
fn sweep_uses_out_dir_env() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_sim"))
        .args(["sweep", "--axis", "vehicles", "--values", "1:3", "--strategy", "vccfirst", "--duration", "2"])
        .env("VCSIM_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep-vehicles.csv")).unwrap();
    assert!(csv.starts_with("axis,value,repeat,strategy,"));
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().skip(1).all(|l| l.starts_with("vehicles,") && l.contains(",vccfirst,")));
    let side = fs::read_to_string(dir.path().join("sweep-vehicles.csv.config")).unwrap();
    assert!(side.starts_with("# sweep axis = vehicles"));
}

#[test]
fn sweep_to_stdout_with_both_strategies() {
    let o = sim(&["sweep", "--axis", "users", "--values", "1,2", "--repeats", "2", "--duration", "1", "--out", "-"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1 + 2 * 2 * 2);
}

#[test]
fn cost_reports_breakeven() {
    let o = sim(&["cost", "--format", "json"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["breakeven_requests"], 50_000_000u64);
    assert_eq!(doc["breakeven_s"], 1_250_000.0);
    let text = stdout(&sim(&["cost", "--rate", "0"]));
    assert!(text.contains("never"));
}

#[test]
fn trace_lists_every_vehicle_each_step() {
    let o = sim(&["trace", "--vehicles", "3", "--duration", "2", "--dt", "0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "time_s,vehicle_id,x_m,y_m");
    assert_eq!(text.lines().count(), 1 + 3 * 5);
}

#[test]
fn exit_codes() {
    assert_eq!(sim(&[]).status.code(), Some(1));
    assert_eq!(sim(&["scenario", "--set", "bogus=1"]).status.code(), Some(1));
    assert_eq!(sim(&["scenario", "--set", "n_users"]).status.code(), Some(1));
    assert_eq!(sim(&["scenario", "--users", "0"]).status.code(), Some(1));
    assert_eq!(sim(&["scenario", "--config", "/nonexistent/x.cfg"]).status.code(), Some(1));
    assert_eq!(sim(&["sweep", "--axis", "colour", "--values", "1"]).status.code(), Some(1));
    assert_eq!(sim(&["sweep", "--axis", "users", "--values", "2.5", "--duration", "1"]).status.code(), Some(1));
    assert_eq!(sim(&["cost", "--capex", "0"]).status.code(), Some(1));
    assert_eq!(sim(&["trace", "--dt", "0"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let target = blocker.join("out.json");
    let o = sim(&["scenario", "--duration", "1", "--out", target.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(sim(&["--help"]).status.code(), Some(0));
}
