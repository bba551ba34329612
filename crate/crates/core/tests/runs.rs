use barrier_sta::experiments::{
    compare, read_trajectory_csv, run, COMPARE_HEADER, METRICS_HEADER, TRAJECTORY_HEADER,
};
use barrier_sta::scenario::{preset, resolve_scenario, LogStride, Scenario};
use barrier_sta::sim::simulate;
use std::fs;

fn short(name: &str, t_end: f64, stride: u64) -> Scenario {
    let mut sc = preset(name).unwrap().with_overrides(None, Some(t_end)).unwrap();
    sc.integration.log_stride = LogStride::Every(stride);
    sc
}

#[test]
fn run_writes_expected_row_count() {
    let dir = tempfile::tempdir().unwrap();
    for (t_end, stride) in [(1.5, 100), (1.23456, 7), (0.5, 1)] {
        let sc = short("fig2a", t_end, stride);
        let out = run(&sc, dir.path()).unwrap();
        let text = fs::read_to_string(&out.trajectory).unwrap();
        // t_end / dt may land a hair below an integer, e.g. 0.5 / 1e-5
        let expected = (t_end / (sc.integration.dt * stride as f64) + 1e-9).floor() as usize + 1;
        assert_eq!(text.lines().count(), expected + 1, "t_end {t_end} stride {stride}");
        assert_eq!(text.lines().next(), Some(TRAJECTORY_HEADER));
        assert_eq!(sc.integration.rows() as usize, expected);
    }
}

#[test]
fn rerun_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let sc = short("fig2a", 3.0, 100);
    let ra = run(&sc, a.path()).unwrap();
    let rb = run(&sc, b.path()).unwrap();
    assert_eq!(fs::read(&ra.trajectory).unwrap(), fs::read(&rb.trajectory).unwrap());
    assert_eq!(fs::read(&ra.metrics_path).unwrap(), fs::read(&rb.metrics_path).unwrap());
}

#[test]
fn trajectory_file_matches_in_memory_log() {
    let dir = tempfile::tempdir().unwrap();
    let sc = short("fig2b", 2.0, 50);
    let out = run(&sc, dir.path()).unwrap();
    let parsed = read_trajectory_csv(fs::File::open(&out.trajectory).unwrap()).unwrap();
    let log = simulate(&sc).unwrap();
    assert_eq!(parsed, log.rows);
}

#[test]
fn metrics_file_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&short("fig2a", 3.0, 100), dir.path()).unwrap();
    let text = fs::read_to_string(&out.metrics_path).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], METRICS_HEADER);
    assert!(lines[1].starts_with("fig2a,proposed,"));
    assert!(lines[1].ends_with(",0,true"));
}

#[test]
fn compare_proposed_against_adaptive() {
    let dir = tempfile::tempdir().unwrap();
    let scenarios = [preset("fig2a").unwrap(), preset("fig2b").unwrap()];
    let cmp = compare(&scenarios, dir.path()).unwrap();
    assert!(cmp.first_error().is_none());
    let a = cmp.rows[0].result.as_ref().unwrap();
    let b = cmp.rows[1].result.as_ref().unwrap();
    assert_eq!((a.controller, b.controller), ("proposed", "shtessel"));
    assert!(a.converged && !b.converged);
    assert!(a.sup_s_post.unwrap() < 0.1);
    assert!(b.sup_s_post.unwrap() > 1.0);

    let text = fs::read_to_string(&cmp.csv_path).unwrap();
    assert_eq!(text, cmp.csv());
    assert_eq!(text.lines().next(), Some(COMPARE_HEADER));
    assert_eq!(text.lines().count(), 3);
    assert!(dir.path().join("0_fig2a/fig2a_trajectory.csv").exists());
    assert!(dir.path().join("1_fig2b/fig2b_metrics.csv").exists());
    assert!(cmp.table().contains("shtessel"));
}

#[test]
fn preset_names_and_files_resolve_the_same() {
    let dir = tempfile::tempdir().unwrap();
    let sc = preset("classic").unwrap();
    let path = dir.path().join("classic.toml");
    fs::write(&path, sc.to_toml()).unwrap();
    let from_file = resolve_scenario(path.to_str().unwrap()).unwrap();
    assert_eq!(from_file, resolve_scenario("classic").unwrap());
    assert!(resolve_scenario("no-such-thing").is_err());
}

fn assert_send_sync<T: Send + Sync>() {}

#[test]
fn public_types_are_thread_safe() {
    assert_send_sync::<Scenario>();
    assert_send_sync::<barrier_sta::sim::TrajectoryLog>();
    assert_send_sync::<barrier_sta::diagnostics::Metrics>();
    assert_send_sync::<barrier_sta::plant::DisturbanceSpec>();
    assert_send_sync::<barrier_sta::barrier_gain::GainState>();
    assert_send_sync::<barrier_sta::controllers::ShtesselState>();
    assert_send_sync::<barrier_sta::experiments::RunError>();
}
