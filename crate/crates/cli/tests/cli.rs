//! Process-level checks of the binary: exit codes, strict config rejection,
//! and the CSV layout contract.

use std::path::PathBuf;
use std::process::Command;

fn scratch(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("wpc-cli-{tag}-{}", std::process::id()))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_wpc-lab"))
        .args(args)
        .output()
        .expect("spawn wpc-lab");
    (
        output.status.code().expect("exit code"),
        String::from_utf8_lossy(&output.stdout).into_owned(),
        String::from_utf8_lossy(&output.stderr).into_owned(),
    )
}

#[test]
fn successful_run_exits_zero_and_reports_the_file() {
    let dir = scratch("ok");
    let (code, stdout, _) = run(&[
        "retro",
        "--set",
        "antennas=2",
        "--set",
        "trials=8",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("retro.csv"), "{stdout}");
    assert!(dir.join("retro.csv").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_key_exits_two_before_any_output() {
    let dir = scratch("badkey");
    let (code, _, stderr) = run(&[
        "decouple",
        "--set",
        "adc_bitz=12",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("unknown key `adc_bitz`"), "{stderr}");
    assert!(!dir.exists(), "no output directory on config failure");
}

#[test]
fn malformed_value_exits_two() {
    let (code, _, stderr) = run(&["waveform", "--set", "trials=many"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("expected an integer"), "{stderr}");
}

#[test]
fn trials_flag_exits_two_where_the_experiment_defines_none() {
    let (code, _, stderr) = run(&["backscatter", "--trials", "50"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("unknown key `trials`"), "{stderr}");
}

#[test]
fn missing_config_file_exits_two() {
    let (code, _, stderr) = run(&["retro", "--config", "/nonexistent/lab.conf"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("cannot read config file"), "{stderr}");
}

#[test]
fn unresolvable_peaks_exit_three() {
    // Two mobiles boxed into 0.2 wavelengths merge into a single maximum.
    let dir = scratch("numeric");
    let (code, _, stderr) = run(&[
        "ua-locate",
        "--set",
        "mobiles=2",
        "--set",
        "span_wl=1.2",
        "--set",
        "snrs_db=inf",
        "--set",
        "elements=64",
        "--trials",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 3, "{stderr}");
    assert!(stderr.contains("numeric failure"), "{stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_subcommand_exits_two() {
    let (code, _, _) = run(&["warp"]);
    assert_eq!(code, 2);
}

#[test]
fn config_file_flags_and_sets_compose() {
    let dir = scratch("compose");
    std::fs::create_dir_all(&dir).unwrap();
    let conf = dir.join("lab.conf");
    std::fs::write(&conf, "# fast settings\nantennas = 4, 8\ntrials = 16\n").unwrap();
    let (code, _, _) = run(&[
        "retro",
        "--config",
        conf.to_str().unwrap(),
        "--seed",
        "9",
        "--set",
        "antennas=2",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(dir.join("retro.csv")).unwrap();
    // --set overrides the file list; --seed overrides the default.
    assert!(csv.contains("# antennas = 2"), "{csv}");
    assert!(csv.contains("# trials = 16"), "{csv}");
    assert!(csv.contains("# seed = 9"), "{csv}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn csv_layout_is_metadata_then_header_then_rows() {
    let dir = scratch("layout");
    let (code, _, _) = run(&[
        "retro",
        "--set",
        "antennas=2,4",
        "--set",
        "trials=8",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(dir.join("retro.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    let first_data = lines.iter().position(|l| !l.starts_with('#')).unwrap();
    assert!(lines[..first_data]
        .iter()
        .any(|l| l.starts_with("# generated_unix = ")));
    assert_eq!(
        lines[first_data],
        "n_antennas,retro_power,mean_random_power,gain,gain_over_n"
    );
    assert_eq!(lines.len() - first_data - 1, 2, "one row per antenna count");
    // Data rows never restart metadata.
    assert!(lines[first_data..].iter().all(|l| !l.starts_with('#')));
    std::fs::remove_dir_all(&dir).ok();
}
