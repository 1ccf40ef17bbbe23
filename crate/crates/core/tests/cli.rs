use std::path::Path;
use std::process::{Command, Output};

use activesel::io::{load_pool, save_pool, OUTPUT_DIR_ENV};
use activesel::synthbench::{generate_pool, SynthConfig};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_activesel"));
    c.env_remove(OUTPUT_DIR_ENV);
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_pool(dir: &Path) -> String {
    let synth = generate_pool(&SynthConfig {
        clusters: 4,
        samples_per_cluster: 10,
        frames_per_sequence: 30,
        outliers: 2,
        seed: 3,
        ..SynthConfig::default()
    })
    .unwrap();
    let path = dir.join("pool.toml");
    save_pool(&synth.pool, &path).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn loss_prints_value() {
    let o = run(&[
        "loss", "--pred", "0,0,2,2", "--gt", "1,1,3,3", "--kind", "tversky", "--alpha", "0.4",
        "--beta", "0.6",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0.75\n");
    assert!(o.stderr.is_empty());
}

#[test]
fn select_kmal_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_pool(dir.path());
    let out = dir.path().join("sel.txt");
    let args = [
        "select",
        "--manifest",
        &manifest,
        "--strategy",
        "kmal",
        "--budget",
        "6",
        "--interval",
        "10",
        "--frames",
        "5",
        "--metric",
        "cosine",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ];
    let o = run(&args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# activesel selection v1\nstrategy\tkmal\nbudget\t6\nseed\t7\n"));
    let ids: Vec<&str> = text
        .lines()
        .skip_while(|l| !l.starts_with("selected\t"))
        .skip(1)
        .take_while(|l| !l.starts_with("audit\t"))
        .map(|l| l.split('\t').nth(2).unwrap())
        .collect();
    assert!(!ids.is_empty());
    assert!(ids.iter().all(|id| !id.starts_with("outlier")));

    // same inputs, same bytes
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), text);
}

#[test]
fn select_to_stdout_and_output_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_pool(dir.path());
    let o = run(&[
        "select",
        "--manifest",
        &manifest,
        "--strategy",
        "sal",
        "--budget",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("strategy\tsal\n"));

    let outdir = dir.path().join("results");
    let o = bin()
        .env(OUTPUT_DIR_ENV, &outdir)
        .args([
            "select",
            "--manifest",
            &manifest,
            "--strategy",
            "random",
            "--budget",
            "3",
            "--out",
            "r.txt",
        ])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(outdir.join("r.txt").exists());
}

#[test]
fn oversized_budget_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_pool(dir.path());
    let o = run(&["select", "--manifest", &manifest, "--budget", "999999"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget 999999 exceeds pool size 42"));
}

#[test]
fn usage_error_exit_code() {
    assert_eq!(run(&["select"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        run(&[
            "select",
            "--manifest",
            "x.toml",
            "--budget",
            "2",
            "--strategy",
            "greedy"
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn stats_reports_pool() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_pool(dir.path());
    let o = run(&["stats", "--manifest", &manifest, "--bins", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("n\t42\ndim\t16\nave_d\t"));
    let counts: usize = out
        .lines()
        .filter(|l| l.starts_with("bin\t"))
        .map(|l| l.rsplit('\t').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(counts, 42);
    let isolated: usize = out
        .lines()
        .find(|l| l.starts_with("isolated\t"))
        .unwrap()
        .split('\t')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(isolated >= 2);
}

#[test]
fn stats_on_csv_pool() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.csv");
    std::fs::write(&path, "a,0,1,0\nb,0,1,1\nc,0,0,1\n").unwrap();
    let o = run(&[
        "stats",
        "--manifest",
        path.to_str().unwrap(),
        "--mode",
        "first",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("n\t3\ndim\t2\nave_d\t0.29289321881345"));
}

#[test]
fn corrupt_manifest_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_pool(dir.path());
    let blob = dir.path().join("pool.bin");
    let bytes = std::fs::read(&blob).unwrap();
    std::fs::write(&blob, &bytes[..bytes.len() - 4]).unwrap();
    assert!(load_pool(&manifest).is_err());
    let o = run(&["stats", "--manifest", &manifest]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("blob"));
}

#[test]
fn bench_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.txt");
    let args = [
        "bench",
        "--clusters",
        "4",
        "--budget",
        "4",
        "--seeds",
        "3",
        "--samples-per-cluster",
        "8",
        "--out",
        out.to_str().unwrap(),
    ];
    let o = run(&args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(stdout(&o).lines().count(), 5);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("cell\t")).count(), 12);
    assert_eq!(
        text.lines().filter(|l| l.starts_with("summary\t")).count(),
        4
    );
    run(&args);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), text);
}
