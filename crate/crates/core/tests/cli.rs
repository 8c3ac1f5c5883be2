//! The `nslab` binary: subcommands, exit codes and on-disk outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nslab::scenario::{RunReport, ScenarioConfig, ScenarioKind};

fn nslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nslab")).args(args).env("NSLAB_THREADS", "1").output().expect("binary runs")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const KERNEL: &str = "scenario = \"kernel-verify\"\n\n[kernel_verify]\nsamples = 50\npoisson_points = 16\n";

#[test]
fn list_scenarios_names_every_kind() {
    let out = nslab(&["list-scenarios"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for k in ScenarioKind::ALL {
        assert!(text.lines().any(|l| l.starts_with(k.name())), "{} missing", k.name());
    }
}

#[test]
fn shipped_configs_validate_and_cover_every_scenario() {
    let mut seen = Vec::new();
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let out = nslab(&["validate", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
        seen.push(ScenarioConfig::parse(&fs::read_to_string(&path).unwrap()).unwrap().scenario);
    }
    for k in ScenarioKind::ALL {
        assert!(seen.contains(&k), "no config for {}", k.name());
    }
}

#[test]
fn config_errors_exit_with_two_and_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "a.toml", "scenario = \"kernel-verify\"\n\n[kernel_verify]\nsampels = 3\n");
    let out = nslab(&["validate", &unknown]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"), "{}", String::from_utf8_lossy(&out.stderr));

    let invalid = write(dir.path(), "b.toml", "scenario = \"kernel-verify\"\n[kernel_verify]\nr_min = -1.0\n");
    let out = nslab(&["run", &invalid, "--out", dir.path().join("r").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    assert!(!dir.path().join("r").exists());

    let missing = dir.path().join("nope.toml");
    assert_eq!(nslab(&["run", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn failed_assertion_exits_with_one_but_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        write(dir.path(), "s.toml", "scenario = \"sce-misstep\"\n\n[sce_misstep]\nsteps = 20\nthreshold = 10.0\n");
    let out_dir = dir.path().join("run");
    let out = nslab(&["run", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("FAIL exceeds_threshold")), "{stdout}");
    let report = RunReport::read(&out_dir).unwrap();
    assert!(!report.passed());
    assert!(out_dir.join("misstep.csv").exists());
}

#[test]
fn run_is_reproducible_and_plot_draws_every_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "k.toml", KERNEL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = nslab(&["run", &cfg, "--out", d.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let report = RunReport::read(&a).unwrap();
    assert_eq!(report, RunReport { wall_ms: report.wall_ms, ..RunReport::read(&b).unwrap() });
    for f in &report.files {
        assert_eq!(fs::read(a.join(&f.name)).unwrap(), fs::read(b.join(&f.name)).unwrap(), "{}", f.name);
    }

    let echoed = ScenarioConfig::parse(&report.config).unwrap();
    assert_eq!(echoed, ScenarioConfig::parse(KERNEL).unwrap());
    assert_eq!(echoed.content_hash(), report.config_hash);

    let out = nslab(&["plot", a.to_str().unwrap()]);
    assert!(out.status.success());
    for f in report.files.iter().filter(|f| f.plot.is_some()) {
        let svg = fs::read_to_string(a.join(&f.name).with_extension("svg")).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
}

#[test]
fn plot_without_a_run_only_warns() {
    let dir = tempfile::tempdir().unwrap();
    let out = nslab(&["plot", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn bad_thread_count_is_ignored_with_a_warning() {
    let out =
        Command::new(env!("CARGO_BIN_EXE_nslab")).arg("list-scenarios").env("NSLAB_THREADS", "zero").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("NSLAB_THREADS"));
}
