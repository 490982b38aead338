use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use saari_cli::commands::{
    ClassifyResult, FigureEightResult, RankResult, ReleqResult, SimulationSummary,
};
use saari_cli::Report;
use saari_core::genericity::{ExperimentReport, ScanReport, Verdict};
use saari_core::lie::ObstructionSample;
use serde::de::DeserializeOwned;
use serde::Serialize;
use tempfile::TempDir;

const TWO_BODY: &str =
    r#"{"N":2,"space_dim":2,"masses":[1,1],"potential":{"variant":"newtonian"},"com_fixed":true}"#;
const THREE_EQUAL: &str = r#"{"N":3,"space_dim":2,"masses":[1,1,1],"potential":{"variant":"newtonian"},"com_fixed":true}"#;

fn saari(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_saari"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run_config(dir: &TempDir, command: &str, config: &str, extra: &[&str]) -> Output {
    let path = write(dir, &format!("{command}.json"), config);
    let mut args = vec![command, "--config", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    saari(&args)
}

/// Parses a report and checks that it re-serializes to the same text.
fn report<T: DeserializeOwned + Serialize>(out: &Output) -> Report<T> {
    let text = std::str::from_utf8(&out.stdout).unwrap();
    let r: Report<T> = serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"));
    assert_eq!(r.schema_version, 1);
    let again = serde_json::to_string_pretty(&r).unwrap() + "\n";
    assert_eq!(again, text, "report does not round-trip");
    r
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn tower_of_a_coordinate_on_the_oscillator() {
    let dir = TempDir::new().unwrap();
    let out = run_config(
        &dir,
        "tower",
        r#"{"system":{"kind":"oscillator"},"observable":{"kind":"coordinate","index":0},"point":[1,0],"tower_order":3}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r: Report<ObstructionSample> = report(&out);
    assert_eq!(r.command, "tower");
    assert_eq!(r.result.psi.values, vec![0.0, -1.0, 0.0]);
}

#[test]
fn missing_config_file_exits_2() {
    let out = saari(&["tower", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_or_incomplete_configs_exit_2() {
    let dir = TempDir::new().unwrap();
    for bad in [
        "{not json",
        r#"{"system":{"kind":"oscillator"},"observable":{"kind":"energy"},"point":[1,0],"colour":"red"}"#,
        r#"{"system":{"kind":"oscillator"},"observable":{"kind":"energy"},"point":[1,0,0]}"#,
        r#"{"system":{"kind":"oscillator"},"observable":{"kind":"inertia"},"point":[1,0]}"#,
    ] {
        let out = run_config(&dir, "rank", bad, &[]);
        assert_eq!(out.status.code(), Some(2), "{bad}: {}", stderr(&out));
    }
    let no_observable = r#"{"system":{"kind":"oscillator"},"point":[1,0]}"#;
    assert_eq!(
        run_config(&dir, "tower", no_observable, &[]).status.code(),
        Some(2)
    );
    let out = saari(&["scan"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn colliding_bodies_exit_3_with_a_collision_message() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        r#"{{"system":{{"kind":"nbody","system":{TWO_BODY}}},"observable":{{"kind":"energy"}},"point":[0,0,0,0,1,0,-1,0]}}"#
    );
    let out = run_config(&dir, "tower", &cfg, &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("collision"), "{}", stderr(&out));
}

#[test]
fn rank_of_the_oscillator_energy_jet() {
    let dir = TempDir::new().unwrap();
    let out = run_config(
        &dir,
        "rank",
        r#"{"system":{"kind":"oscillator"},"observable":{"kind":"energy"},"point":[1,0]}"#,
        &["--expect-submersion"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r: Report<RankResult> = report(&out);
    assert!(r.result.report.submersion);
    assert_eq!(r.result.report.numerical_rank, 3);

    let field = run_config(
        &dir,
        "rank",
        r#"{"system":{"kind":"oscillator"},"observable":{"kind":"energy"},"point":[1,0],"rank":{"wrt":"field"}}"#,
        &["--expect-submersion"],
    );
    assert_eq!(field.status.code(), Some(0), "{}", stderr(&field));
}

#[test]
fn rank_at_an_equilibrium_fails_the_expectation() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"system":{"kind":"oscillator"},"observable":{"kind":"energy"},"point":[0,0]}"#;
    let out = run_config(&dir, "rank", cfg, &["--expect-submersion"]);
    assert_eq!(out.status.code(), Some(1));
    let r: Report<RankResult> = report(&out);
    assert_eq!(r.result.report.numerical_rank, 0);
    assert_eq!(run_config(&dir, "rank", cfg, &[]).status.code(), Some(0));
}

#[test]
fn expectation_flags_on_other_commands_exit_2() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"system":{"kind":"oscillator"},"observable":{"kind":"energy"},"point":[1,0]}"#;
    assert_eq!(
        run_config(&dir, "tower", cfg, &["--expect-submersion"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run_config(&dir, "tower", cfg, &["--expect", "equilibrium"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn releq_lagrange_has_omega_squared_three() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        r#"{{"system":{{"kind":"nbody","system":{THREE_EQUAL}}},"releq":{{"kind":"lagrange","side":1}}}}"#
    );
    let out = run_config(&dir, "releq", &cfg, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r: Report<ReleqResult> = report(&out);
    assert!((r.result.solution.omega_squared - 3.0).abs() < 1e-12);
    assert!(r.result.rigid_rotation_defect < 1e-12);
}

#[test]
fn releq_needs_a_planar_body_system() {
    let dir = TempDir::new().unwrap();
    let out = run_config(
        &dir,
        "releq",
        r#"{"system":{"kind":"oscillator"},"releq":{"kind":"two_body","r":1}}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_of_the_oscillator_energy_is_all_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"seed":11,"system":{"kind":"oscillator"},"observable":{"kind":"energy"},
        "scan":{"sampler":{"kind":"box","lower":[-2,-2],"upper":[2,2],"count":200}}}"#;
    let out = run_config(&dir, "scan", cfg, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r: Report<ScanReport> = report(&out);
    assert_eq!(r.result.zero_fraction, Some(1.0));
    assert_eq!(r.result.seed, Some(11));
}

#[test]
fn scan_sampler_of_the_wrong_dimension_exits_2() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"seed":1,"system":{"kind":"oscillator"},"observable":{"kind":"energy"},
        "scan":{"sampler":{"kind":"box","lower":[-2],"upper":[2],"count":5}}}"#;
    assert_eq!(run_config(&dir, "scan", cfg, &[]).status.code(), Some(2));
}

#[test]
fn stochastic_blocks_without_seed_exit_2_and_flag_supplies_it() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"system":{"kind":"oscillator"},"observable":{"kind":"energy"},
        "scan":{"sampler":{"kind":"box","lower":[-2,-2],"upper":[2,2],"count":5}}}"#;
    assert_eq!(run_config(&dir, "scan", cfg, &[]).status.code(), Some(2));
    let out = run_config(&dir, "scan", cfg, &["--seed", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(report::<ScanReport>(&out).result.seed, Some(4));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        r#"{{"seed":99,"system":{{"kind":"nbody","system":{TWO_BODY}}},"observable":{{"kind":"inertia"}},
        "scan":{{"sampler":{{"kind":"nbody","position_scale":1,"momentum_scale":1,"min_separation":0.1,"count":40}}}},
        "perturbation":{{"target":"observable_f","degree":2,"epsilon":0.01,"trials":3}}}}"#
    );
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let first = run_config(
        &dir,
        "perturb-experiment",
        &cfg,
        &["--out", a.to_str().unwrap()],
    );
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let second = run_config(
        &dir,
        "perturb-experiment",
        &cfg,
        &["--out", b.to_str().unwrap()],
    );
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read(&a).unwrap(), first.stdout);
    let r: Report<ExperimentReport> = report(&first);
    assert_eq!(r.result.trials.len(), 3);
    assert_eq!(r.result.pooled_zero, 0);

    let other = run_config(&dir, "perturb-experiment", &cfg, &["--seed", "100"]);
    assert_ne!(first.stdout, other.stdout);
}

fn simulate_figure_eight(dir: &TempDir, csv: &Path) -> Output {
    let cfg = format!(
        r#"{{"system":{{"kind":"nbody","system":{THREE_EQUAL}}},"observable":{{"kind":"inertia"}},
        "point":[0.97000436,-0.24308753,-0.97000436,0.24308753,0,0,
                 0.466203685,0.43236573,0.466203685,0.43236573,-0.93240737,-0.86473146],
        "integrator":{{"method":"dopri5","rtol":1e-12,"atol":1e-12,"max_time":6.32591398}},
        "output":{{"trajectory":"{}"}}}}"#,
        csv.display()
    );
    run_config(dir, "simulate", &cfg, &[])
}

#[test]
fn simulate_writes_a_trajectory_that_classifies_as_non_constant() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("fig8.csv");
    let out = simulate_figure_eight(&dir, &csv);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let s: Report<SimulationSummary> = report(&out);
    assert!(s.result.halt.is_none());
    assert!(s.result.energy_drift.unwrap() < 1e-9);
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("t,q1,"));

    let cfg = format!(
        r#"{{"system":{{"kind":"nbody","system":{THREE_EQUAL}}},"classify":{{"trajectory":"{}"}}}}"#,
        csv.display()
    );
    let out = run_config(&dir, "classify", &cfg, &["--expect", "non-constant-f"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r: Report<ClassifyResult> = report(&out);
    assert_eq!(r.result.classification.verdict, Verdict::NonConstantF);
    assert_eq!(r.result.n_states, s.result.n_states);

    let out = run_config(
        &dir,
        "classify",
        &cfg,
        &["--expect", "relative-equilibrium"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn classify_integrates_a_relative_equilibrium() {
    let dir = TempDir::new().unwrap();
    // Lagrange triangle of side 1: omega = sqrt(3), period 2 pi / sqrt(3).
    let w = 3f64.sqrt();
    let h = 3f64.sqrt() / 2.0;
    let q = [0.5, -h / 3.0, -0.5, -h / 3.0, 0.0, 2.0 * h / 3.0];
    let p: Vec<f64> = q.chunks(2).flat_map(|c| [-w * c[1], w * c[0]]).collect();
    let point: Vec<f64> = q.iter().copied().chain(p).collect();
    let cfg = format!(
        r#"{{"system":{{"kind":"nbody","system":{THREE_EQUAL}}},"point":{},
        "integrator":{{"method":"dopri5","rtol":1e-13,"atol":1e-14,"max_time":{}}},"classify":{{}}}}"#,
        serde_json::to_string(&point).unwrap(),
        std::f64::consts::TAU / w
    );
    let out = run_config(
        &dir,
        "classify",
        &cfg,
        &["--expect", "relative-equilibrium"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn simulate_into_a_collision_exits_3_after_writing() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("fall.csv");
    let cfg = format!(
        r#"{{"system":{{"kind":"nbody","system":{TWO_BODY}}},"point":[0.5,0,-0.5,0,0,0,0,0],
        "integrator":{{"method":"dopri5","rtol":1e-10,"atol":1e-12,"max_time":10}},
        "output":{{"trajectory":"{}"}}}}"#,
        csv.display()
    );
    let out = run_config(&dir, "simulate", &cfg, &[]);
    assert_eq!(out.status.code(), Some(3));
    let s: Report<SimulationSummary> = report(&out);
    assert!(s.result.halt.is_some());
    assert!(csv.is_file());
}

#[test]
fn figure_eight_demo_is_non_constant() {
    let dir = TempDir::new().unwrap();
    let report_path = dir.path().join("demo.json");
    let out = saari(&[
        "figure8-demo",
        "--expect",
        "non-constant-f",
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r: Report<FigureEightResult> = report(&out);
    let c = &r.result.classification;
    assert!(c.inertia_rel_variation > 100.0 * c.energy_drift);
    assert_eq!(std::fs::read(&report_path).unwrap(), out.stdout);
}

#[test]
fn simulate_then_classify_share_one_config() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("orbit.csv");
    let cfg = format!(
        r#"{{"system":{{"kind":"nbody","system":{TWO_BODY}}},
        "point":[0.5,0,-0.5,0,0,0.7071067811865476,0,-0.7071067811865476],
        "integrator":{{"method":"dopri5","rtol":1e-13,"atol":1e-14,"max_time":4.44}},
        "classify":{{"trajectory":"{0}"}},"output":{{"trajectory":"{0}"}}}}"#,
        csv.display()
    );
    let out = run_config(&dir, "classify", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let out = run_config(&dir, "simulate", &cfg, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = run_config(
        &dir,
        "classify",
        &cfg,
        &["--expect", "relative-equilibrium"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}
