use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn dfvqm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfvqm"))
        .args(args)
        .env_remove("VQ_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn synth(dir: &Path, name: &str, frames: usize, seed: u64) -> PathBuf {
    let path = dir.join(name);
    let out = dfvqm(&[
        "synth",
        "--out",
        path.to_str().unwrap(),
        "--width",
        "32",
        "--height",
        "32",
        "--frames",
        &frames.to_string(),
        "--seed",
        &seed.to_string(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn analyze_identical_files_scores_one() {
    let dir = TempDir::new().unwrap();
    let a = synth(dir.path(), "a.y4m", 20, 1);
    let b = dir.path().join("b.y4m");
    std::fs::copy(&a, &b).unwrap();
    let out = dfvqm(&["analyze", "--ref", a.to_str().unwrap(), "--dist", b.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["dfvqmi"], 1.0);
    assert_eq!(report["sd"], 1.0);
    assert_eq!(report["td"], 0.0);
}

#[test]
fn longer_distorted_video_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let short = synth(dir.path(), "short.y4m", 10, 1);
    let long = synth(dir.path(), "long.y4m", 12, 1);
    let report = dir.path().join("report.json");
    let out = dfvqm(&[
        "analyze",
        "--ref",
        short.to_str().unwrap(),
        "--dist",
        long.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("m >= n"));
    assert!(!report.exists());
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(code(&dfvqm(&["analyze", "--bogus"])), 1);
    assert_eq!(code(&dfvqm(&["frobnicate"])), 1);
    assert_eq!(code(&dfvqm(&[])), 1);
    assert_eq!(code(&dfvqm(&["--help"])), 0);
    assert_eq!(code(&dfvqm(&["analyze", "--ref", "a.yuv", "--dist", "b.yuv"])), 1);
    assert_eq!(
        code(&dfvqm(&[
            "distort", "--ref", "a.y4m", "--out", "b.y4m", "--case", "2.9"
        ])),
        1
    );
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let out = dfvqm(&["align", "--ref", "/nonexistent/a.y4m", "--dist", "/nonexistent/b.y4m"]);
    assert_eq!(code(&out), 2);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn distort_then_align_recovers_the_plan() {
    let dir = TempDir::new().unwrap();
    let reference = synth(dir.path(), "ref.y4m", 100, 4);
    let dist = dir.path().join("dist.y4m");
    let out = dfvqm(&[
        "distort",
        "--ref",
        reference.to_str().unwrap(),
        "--out",
        dist.to_str().unwrap(),
        "--case",
        "2.3",
        "--possibility",
        "3",
        "--seed",
        "8",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let plan: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("dist.plan.json")).unwrap()).unwrap();
    assert_eq!(plan["case"], "2.3");
    assert_eq!(plan["possibility"], 3);
    let expected: Vec<u64> = plan["chunks"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|c| {
            let (s, l) = (c[0].as_u64().unwrap(), c[1].as_u64().unwrap());
            s..s + l
        })
        .collect();

    let out = dfvqm(&[
        "align",
        "--ref",
        reference.to_str().unwrap(),
        "--dist",
        dist.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let missing: Vec<u64> = json(&out)["missing"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert_eq!(missing, expected);
}

#[test]
fn distort_with_bitplane_and_corrected_output() {
    let dir = TempDir::new().unwrap();
    let reference = synth(dir.path(), "ref.y4m", 100, 2);
    let dist = dir.path().join("noisy.y4m");
    let out = dfvqm(&[
        "distort",
        "--ref",
        reference.to_str().unwrap(),
        "--out",
        dist.to_str().unwrap(),
        "--case",
        "2.1",
        "--bitplane",
        "3",
        "--plan-out",
        dir.path().join("p.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let corrected = dir.path().join("corrected.y4m");
    let out = dfvqm(&[
        "analyze",
        "--ref",
        reference.to_str().unwrap(),
        "--dist",
        dist.to_str().unwrap(),
        "--emit-corrected",
        corrected.to_str().unwrap(),
        "--strategy",
        "adjacent-average",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert!(report["sd"].as_f64().unwrap() < 1.0);
    assert_eq!(
        std::fs::read(&reference).unwrap().len(),
        std::fs::read(&corrected).unwrap().len()
    );
}

#[test]
fn metrics_table_has_one_line_per_pair() {
    let dir = TempDir::new().unwrap();
    let a = synth(dir.path(), "a.y4m", 15, 1);
    let b = synth(dir.path(), "b.y4m", 12, 1);
    let out = dfvqm(&["metrics", "--ref", a.to_str().unwrap(), "--dist", b.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("frame,psnr,ssim"));
    assert_eq!(lines.count(), 12);

    let out = dfvqm(&["metrics", "--ref", a.to_str().unwrap(), "--dist", a.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 16);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",100,1")));
}

#[test]
fn experiment_and_correlate() {
    let dir = TempDir::new().unwrap();
    let clip = synth(dir.path(), "clip.y4m", 100, 5);
    let config = dir.path().join("grid.json");
    let csv = dir.path().join("grid.csv");
    std::fs::write(
        &config,
        serde_json::json!({
            "reference_videos": [clip],
            "scenarios": ["2"],
            "seed": 3,
            "output": csv,
        })
        .to_string(),
    )
    .unwrap();
    let out = dfvqm(&["experiment", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with(
        "video,scenario,case,possibility,cfd_pct,tdf_pct,sd,td,dfvqmi,mean_psnr,mean_ssim,seed,status,reason\n"
    ));
    assert_eq!(text.lines().count(), 17);

    let mos = dir.path().join("mos.csv");
    let mut table = String::from("label,mos\n");
    for (k, line) in text.lines().skip(1).enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f[12] == "ok" {
            table.push_str(&format!(
                "{}/{}/{}/{},{}\n",
                f[0],
                f[1],
                f[2],
                f[3],
                5.0 - k as f64 * 0.1
            ));
        }
    }
    std::fs::write(&mos, table).unwrap();
    let out = dfvqm(&[
        "correlate",
        "--scores",
        csv.to_str().unwrap(),
        "--mos",
        mos.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let c = json(&out);
    assert!(c["n"].as_u64().unwrap() >= 3);
    assert!(c["pearson"].as_f64().unwrap().abs() <= 1.0);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"reference_videos": []}"#).unwrap();
    assert_eq!(code(&dfvqm(&["experiment", "--config", bad.to_str().unwrap()])), 2);
}
