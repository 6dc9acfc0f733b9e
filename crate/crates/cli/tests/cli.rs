//! End-to-end tests of the `ndlomb` binary: determinism, exit codes, the
//! documented flag surface, and golden-file reports for the three presets.
//!
//! Golden files regenerate with `UPDATE_GOLDEN=1 cargo test -p ndlomb-cli`.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ndlomb"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn ndlomb")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ndlomb-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).expect("temp dir");
    dir
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn generate_is_byte_identical_across_runs() {
    let dir = temp_dir("determinism");
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    for path in [&a, &b] {
        let out = run(&[
            "generate",
            "--preset",
            "simple-wave",
            "--seed",
            "9",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert_success(&out);
    }
    assert_eq!(
        std::fs::read(&a).unwrap(),
        std::fs::read(&b).unwrap(),
        "same flags must produce identical bytes"
    );
    assert_eq!(
        std::fs::read(dir.join("a.csv.config")).unwrap(),
        std::fs::read(dir.join("b.csv.config")).unwrap()
    );
}

#[test]
fn generate_preset_sample_count_and_field() {
    let dir = temp_dir("preset-count");
    let samples = dir.join("wave.csv");
    let field = dir.join("wave_field.csv");
    let out = run(&[
        "generate",
        "--preset",
        "simple-wave",
        "--output",
        samples.to_str().unwrap(),
        "--field-output",
        field.to_str().unwrap(),
    ]);
    assert_success(&out);
    let text = std::fs::read_to_string(&samples).unwrap();
    // header plus 81*81 - round(0.6 * 6561) rows
    assert_eq!(text.lines().count(), 1 + 2624);
    let field_text = std::fs::read_to_string(&field).unwrap();
    assert!(field_text.starts_with("# dims=2\n# shape=81,81\n"));
    assert_eq!(field_text.lines().filter(|l| l.ends_with("nan")).count(), 3937);
}

#[test]
fn generate_config_echo_reproduces_the_dataset() {
    let dir = temp_dir("echo");
    let first = dir.join("first.csv");
    let out = run(&[
        "generate",
        "--preset",
        "noise-only",
        "--seed",
        "5",
        "--output",
        first.to_str().unwrap(),
    ]);
    assert_success(&out);
    let second = dir.join("second.csv");
    let config = format!("{}.config", first.display());
    let out = run(&[
        "generate",
        "--config",
        &config,
        "--output",
        second.to_str().unwrap(),
    ]);
    assert_success(&out);
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap(),
        "the sidecar echo must regenerate the identical dataset"
    );

    // a gapped, jittered, noisy custom spec goes around the same loop
    let custom = dir.join("custom.csv");
    assert_success(&run(&[
        "generate",
        "--components",
        "0.4@1@0.2",
        "--pattern",
        "jittered",
        "--range",
        "0:0.25:30",
        "--jitter",
        "0.6",
        "--gaps",
        "0:8.0..11.5;0:20.0..22.0",
        "--missing",
        "0.15",
        "--sigma",
        "0.3",
        "--seed",
        "11",
        "--output",
        custom.to_str().unwrap(),
    ]));
    let again = dir.join("again.csv");
    assert_success(&run(&[
        "generate",
        "--config",
        &format!("{}.config", custom.display()),
        "--output",
        again.to_str().unwrap(),
    ]));
    assert_eq!(
        std::fs::read(&custom).unwrap(),
        std::fs::read(&again).unwrap()
    );
}

#[test]
fn empty_component_list_generates_zeros() {
    let dir = temp_dir("zeros");
    let path = dir.join("zeros.csv");
    let out = run(&[
        "generate",
        "--components",
        "",
        "--pattern",
        "regular",
        "--range",
        "0:0.5:2",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_success(&out);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1 + 5);
    for line in text.lines().skip(1) {
        assert!(line.ends_with(",0"), "expected zero value: {line}");
    }
}

#[test]
fn seed_env_variable_is_the_fallback() {
    let dir = temp_dir("env-seed");
    let via_flag = dir.join("flag.csv");
    let via_env = dir.join("env.csv");
    assert_success(&run(&[
        "generate",
        "--preset",
        "noise-only",
        "--seed",
        "123",
        "--output",
        via_flag.to_str().unwrap(),
    ]));
    let out = bin()
        .args([
            "generate",
            "--preset",
            "noise-only",
            "--output",
            via_env.to_str().unwrap(),
        ])
        .env("NDLOMB_SEED", "123")
        .output()
        .expect("spawn");
    assert_success(&out);
    assert_eq!(
        std::fs::read(&via_flag).unwrap(),
        std::fs::read(&via_env).unwrap()
    );
}

#[test]
fn analyze_reports_peak_and_m_one_collapses_fap() {
    let dir = temp_dir("analyze");
    let samples = dir.join("samples.csv");
    // 1-d cosine at f = 0.3 on a jittered lattice
    assert_success(&run(&[
        "generate",
        "--components",
        "0.3@1@0",
        "--pattern",
        "jittered",
        "--range",
        "0:0.1:20",
        "--jitter",
        "0.8",
        "--sigma",
        "0.1",
        "--seed",
        "3",
        "--output",
        samples.to_str().unwrap(),
    ]));
    let spectrum = dir.join("spectrum.csv");
    let out = run(&[
        "analyze",
        "--input",
        samples.to_str().unwrap(),
        "--grid",
        "0.05:0.005:1.0",
        "--sigma",
        "0.1",
        "--m-indep",
        "1",
        "--output",
        spectrum.to_str().unwrap(),
    ]);
    assert_success(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("peak at (0.300000)"), "summary: {stdout}");
    // with m = 1 the fap column equals prob exactly, byte for byte
    let text = std::fs::read_to_string(&spectrum).unwrap();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let prob = cols[cols.len() - 2];
        let fap = cols[cols.len() - 1];
        assert_eq!(prob, fap, "prob/fap differ in line {line}");
    }
}

#[test]
fn analyze_exit_code_for_empty_input() {
    let dir = temp_dir("empty");
    let path = dir.join("empty.csv");
    std::fs::write(&path, "t1,value\n0.0,nan\n1.0,nan\n").unwrap();
    let out = run(&[
        "analyze",
        "--input",
        path.to_str().unwrap(),
        "--grid",
        "0.1:0.1:1.0",
        "--output",
        dir.join("out.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(5), "EmptyAfterFilter exit code");
    assert!(String::from_utf8_lossy(&out.stderr).contains("no finite-valued samples"));
}

#[test]
fn analyze_with_too_few_samples_warns_and_leaves_fap_empty() {
    let dir = temp_dir("tiny");
    let path = dir.join("tiny.csv");
    std::fs::write(&path, "t1,value\n0.0,1.0\n0.7,0.2\n1.9,-1.1\n").unwrap();
    let spectrum = dir.join("out.csv");
    let out = run(&[
        "analyze",
        "--input",
        path.to_str().unwrap(),
        "--grid",
        "0.1:0.1:1.0",
        "--output",
        spectrum.to_str().unwrap(),
    ]);
    assert_success(&out);
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("too few"),
        "expected a small-sample warning"
    );
    let text = std::fs::read_to_string(&spectrum).unwrap();
    for line in text.lines().skip(1) {
        assert!(line.ends_with(",,"), "prob/fap should be empty: {line}");
    }
}

#[test]
fn analyze_exit_code_for_bad_grid() {
    let dir = temp_dir("badgrid");
    let path = dir.join("samples.csv");
    std::fs::write(&path, "t1,value\n0.0,1.0\n1.0,2.0\n").unwrap();
    let out = run(&[
        "analyze",
        "--input",
        path.to_str().unwrap(),
        "--grid",
        "1.0:0.1:0.5",
        "--output",
        dir.join("out.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(7), "BadRange exit code");
}

#[test]
fn usage_errors_exit_with_code_two() {
    let out = run(&["generate", "--preset", "no-such-preset", "--output", "x.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["baseline", "--method", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn emax_command_prints_four_over_pi() {
    let out = run(&["emax", "--resolution", "100000"]);
    assert_success(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let emax_line = stdout
        .lines()
        .find(|l| l.starts_with("e_max"))
        .expect("e_max line");
    let value: f64 = emax_line.split('=').nth(1).unwrap().trim().parse().unwrap();
    assert!((value - 4.0 / std::f64::consts::PI).abs() < 1e-6);
}

#[test]
fn baseline_omd_prints_error_budget() {
    let dir = temp_dir("omd");
    let samples = dir.join("cos.csv");
    // cos(t) over the classic truncated window [0, 2 pi + pi/5)
    let f = 1.0 / std::f64::consts::TAU;
    let t_total = std::f64::consts::TAU + std::f64::consts::PI / 5.0;
    let n = 200;
    let step = t_total / n as f64;
    assert_success(&run(&[
        "generate",
        "--components",
        &format!("{f}@1@0"),
        "--pattern",
        "regular",
        "--range",
        &format!("0:{step}:{}", t_total - step / 2.0),
        "--output",
        samples.to_str().unwrap(),
    ]));
    let out = run(&[
        "baseline",
        "--method",
        "omd",
        "--input",
        samples.to_str().unwrap(),
        "--freq",
        &f.to_string(),
        "--sigma",
        "1",
    ]);
    assert_success(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("error budget"), "{stdout}");
    // truncation bias visible in the printed coefficient
    let a_line = stdout.lines().find(|l| l.trim().starts_with("a =")).unwrap();
    let a: f64 = a_line.split('=').nth(1).unwrap().trim().parse().unwrap();
    assert!((a - 1.0).abs() > 0.01, "a = {a} should carry truncation bias");
}

#[test]
fn compare_preset_reports_reduced_dft_peak() {
    let out = run(&["compare", "--preset", "simple-wave"]);
    assert_success(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let ratio_line = stdout
        .lines()
        .find(|l| l.starts_with("dft/lsm peak ratio"))
        .expect("ratio line");
    let ratio: f64 = ratio_line.split(':').nth(1).unwrap().trim().parse().unwrap();
    assert!(ratio > 0.0 && ratio < 1.0, "ratio = {ratio}");
}

#[test]
fn sweep_writes_long_form_rows() {
    let dir = temp_dir("sweep");
    let out_path = dir.join("sweep.csv");
    let out = run(&[
        "sweep",
        "--n-list",
        "50,100",
        "--replicates",
        "5",
        "--seed",
        "8",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_success(&out);
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,method,replicate,error"));
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 5);
    assert!(text.lines().skip(1).all(|l| {
        let cols: Vec<&str> = l.split(',').collect();
        cols.len() == 4 && (cols[1] == "lsm" || cols[1] == "omd")
    }));
    // noiseless sweep: estimator error vanishes, demodulation bias stays
    let out = run(&[
        "sweep",
        "--n-list",
        "50,100",
        "--replicates",
        "2",
        "--sigma",
        "0",
        "--output",
        dir.join("clean.csv").to_str().unwrap(),
    ]);
    assert_success(&out);
    let text = std::fs::read_to_string(dir.join("clean.csv")).unwrap();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let err: f64 = cols[3].parse().unwrap();
        match cols[1] {
            "lsm" => assert!(err < 1e-9, "{line}"),
            "omd" => assert!(err > 0.01, "{line}"),
            other => panic!("unexpected method {other}"),
        }
    }
}

fn golden_check(tag: &str, rendered: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("report_{tag}.md"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, rendered).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|_| panic!("missing golden file {path:?}; run with UPDATE_GOLDEN=1"));
    assert_eq!(
        rendered, expected,
        "report for {tag} deviates from the golden file; \
         regenerate deliberately with UPDATE_GOLDEN=1"
    );
}

#[test]
fn report_presets_match_golden_files() {
    for preset in ["simple-wave", "traveling-wave", "noise-only"] {
        let out = run(&["report", "--preset", preset, "--seed", "1"]);
        assert_success(&out);
        golden_check(preset, &String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn report_reads_back_spectrum_files() {
    let dir = temp_dir("report-file");
    let samples = dir.join("samples.csv");
    assert_success(&run(&[
        "generate",
        "--preset",
        "noise-only",
        "--output",
        samples.to_str().unwrap(),
    ]));
    let spectrum = dir.join("spectrum.csv");
    assert_success(&run(&[
        "analyze",
        "--input",
        samples.to_str().unwrap(),
        "--grid",
        "0.05:0.0025:1.2975",
        "--sigma",
        "1",
        "--output",
        spectrum.to_str().unwrap(),
    ]));
    let report = dir.join("report.md");
    let out = run(&[
        "report",
        "--input",
        spectrum.to_str().unwrap(),
        "--samples",
        samples.to_str().unwrap(),
        "--sigma",
        "1",
        "--output",
        report.to_str().unwrap(),
    ]);
    assert_success(&out);
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("## Top peaks"));
    assert!(text.contains("## Confidence intervals"));
}
