use std::fs;
use std::path::Path;
use std::process::Command;

fn hrs(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_hrs")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("small.toml");
    fs::write(&path, "num_users = 4\nnum_antennas = 8\nsamples = 120\ncalibration_draws = 100\nmin_class = 2\nnum_shuffles = 2\n")
        .unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn full_cli_flow() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let data = dir.path().join("d.hrsdat");
    let model = dir.path().join("m.hrsmlp");
    let out = dir.path().join("report");
    let (data_s, model_s, out_s) = (data.to_str().unwrap(), model.to_str().unwrap(), out.to_str().unwrap());

    assert!(hrs(&["--threads", "2", "gen-dataset", "--config", &cfg, "--out", data_s]).status.success());
    assert!(hrs(&["train", "--data", data_s, "--out", model_s, "--epochs", "2"]).status.success());
    let eval = hrs(&["eval", "--data", data_s, "--model", model_s, "--out", out_s]);
    assert!(eval.status.success(), "{}", String::from_utf8_lossy(&eval.stderr));
    let csv = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(csv.starts_with("scenario,val_top1,test_top1,test_top3,test_top5,relative_rate\nN4_M8,"));
    let svg = fs::read_to_string(out.join("boxplot.svg")).unwrap();
    assert_eq!(svg.matches("<g class=\"box\"").count(), 4);
    let lines = fs::read_to_string(out.join("records.jsonl")).unwrap();
    for line in lines.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["rate"]["r_total"].as_f64().unwrap() >= 0.0);
    }

    let cmp = hrs(&["--power", "50", "compare", "--data", data_s, "--model", model_s]);
    assert!(cmp.status.success());
    let text = String::from_utf8(cmp.stdout).unwrap();
    for m in ["HC", "NN", "UNI", "SING"] {
        assert!(text.lines().any(|l| l.starts_with(m)), "{text}");
    }
}

#[test]
fn sweep_writes_one_row_per_config() {
    let dir = tempfile::tempdir().unwrap();
    let configs = dir.path().join("configs");
    fs::create_dir(&configs).unwrap();
    write_config(&configs);
    fs::write(configs.join("other.toml"), "num_users = 3\nnum_antennas = 6\nsamples = 90\ncalibration_draws = 50\nmin_class = 2\nnum_shuffles = 2\n").unwrap();
    let out = dir.path().join("out");
    let run = hrs(&["sweep", "--configs", configs.to_str().unwrap(), "--out", out.to_str().unwrap(), "--epochs", "1"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(out.join("N3_M6.boxplot.svg").exists() && out.join("N4_M8.boxplot.svg").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad_cfg = dir.path().join("bad.toml");
    fs::write(&bad_cfg, "tau_sq = 3.0\n").unwrap();
    let out = dir.path().join("x");
    let r = hrs(&["gen-dataset", "--config", bad_cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));

    let junk = dir.path().join("junk.hrsdat");
    fs::write(&junk, b"HRSDAT01 but not really a dataset file").unwrap();
    let r = hrs(&["train", "--data", junk.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(3));

    let r = hrs(&["--threads", "0", "compare", "--data", "a", "--model", "b"]);
    assert_eq!(r.status.code(), Some(2));
}
