use cilab_core::diagnostics::{
    build_report, emit_report, read_report, write_snapshots, RowStatus,
};
use cilab_core::field::snapshot;
use cilab_core::pipeline::{build_run, RunConfig};
use cilab_core::{Error, VectorField};

fn initial_only() -> RunConfig {
    RunConfig {
        stages: 0,
        grid: 32,
        samples: 5,
        ..RunConfig::default()
    }
}

#[test]
fn initial_run_reports_and_round_trips() {
    let run = build_run(&initial_only()).unwrap();
    let report = build_report(&run, &mut |_, _| {}).unwrap();
    assert_eq!(report.stages.len(), 1);
    let s = &report.stages[0];
    assert_eq!(s.series.len(), 5);
    assert!(s.series.iter().all(|r| r.residual <= 1e-8));
    assert!(s.ledger.iter().all(|r| r.status != RowStatus::Fail), "{:?}", s.ledger);
    let dir = tempfile::tempdir().unwrap();
    emit_report(&report, dir.path()).unwrap();
    assert_eq!(read_report(dir.path()).unwrap(), report);
}

#[test]
fn snapshots_read_back() {
    let run = build_run(&initial_only()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let names = write_snapshots(&run, dir.path(), 0.1).unwrap();
    assert_eq!(names, ["stage_0_v.eulr", "stage_0_p.eulr", "stage_0_r.eulr"]);
    let v: VectorField = snapshot::read(&dir.path().join(&names[0])).unwrap();
    assert_eq!(&v, &*run.stages[0].velocity(0.1).unwrap());
}

#[test]
fn invalid_configs_fail_before_field_work() {
    let small = RunConfig {
        grid: 8,
        ..RunConfig::default()
    };
    assert!(matches!(build_run(&small), Err(Error::GridCapacity(_))));
    let bad_d = RunConfig {
        d: Some(0.5),
        ..initial_only()
    };
    assert!(matches!(build_run(&bad_d), Err(Error::InvalidArgument(_))));
    let no_samples = RunConfig {
        samples: 1,
        ..initial_only()
    };
    assert!(matches!(build_run(&no_samples), Err(Error::InvalidArgument(_))));
}
