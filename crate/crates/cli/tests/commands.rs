use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use ntlot_cli::{cmd_generate, cmd_report, cmd_solve, RunManifest};
use ntlot_core::eval::{emit_results, read_results, Verdict};
use ntlot_core::BenchmarkRecord;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(format!("{name}.ilssp"))
}

fn ntlot() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ntlot"))
}

fn record(instance: &str, method: &str, ub: Option<f64>) -> BenchmarkRecord {
    BenchmarkRecord {
        instance: instance.into(),
        method: method.into(),
        seed: 0,
        ub,
        lb: None,
        gap_l: None,
        time_s: 1.0,
        feasible: ub.is_some(),
    }
}

#[test]
fn generate_writes_numbered_replicas() {
    let dir = tempfile::tempdir().unwrap();
    let files = cmd_generate("Data1-15-10-0.6-50", 5, 3, dir.path()).unwrap();
    let names: Vec<String> = files
        .iter()
        .map(|f| f.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(
        names,
        [
            "Data1-15-10-0.6-50-1.ilssp",
            "Data1-15-10-0.6-50-2.ilssp",
            "Data1-15-10-0.6-50-3.ilssp"
        ]
    );
    let again = tempfile::tempdir().unwrap();
    cmd_generate("Data1-15-10-0.6-50", 5, 3, again.path()).unwrap();
    for n in &names {
        assert_eq!(
            fs::read(dir.path().join(n)).unwrap(),
            fs::read(again.path().join(n)).unwrap()
        );
    }
    assert_ne!(fs::read(&files[0]).unwrap(), fs::read(&files[1]).unwrap());

    let ten = tempfile::tempdir().unwrap();
    let files = cmd_generate("Data2-15-5-0.8-50-80-20", 1, 10, ten.path()).unwrap();
    assert_eq!(files.len(), 10);
    assert_eq!(fs::read_dir(ten.path()).unwrap().count(), 10);
}

#[test]
fn generate_rejects_unknown_class() {
    let dir = tempfile::tempdir().unwrap();
    assert!(cmd_generate("Data9-1-1-0.5-50", 1, 1, dir.path()).is_err());
    let out = ntlot()
        .args(["generate", "nonsense", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn unknown_backend_names_the_variable() {
    let dir = tempfile::tempdir().unwrap();
    let out = ntlot()
        .arg("solve")
        .arg(fixture("Data1-2-3-0.8-50-s3"))
        .arg("--out")
        .arg(dir.path())
        .env("NTLOT_BACKEND", "cplex")
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("NTLOT_BACKEND") && err.contains("cplex"),
        "{err}"
    );
}

#[test]
fn exact_on_fixture_closes_the_gap() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = RunManifest::new(
        None,
        vec![fixture("Data1-3-2-0.6-100-s4")],
        "exact",
        0,
        dir.path().to_path_buf(),
        Some("highs".into()),
        0.01,
        true,
        1,
    )
    .unwrap();
    let rows = cmd_solve(&manifest).unwrap();
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert!(r.feasible);
    assert!((r.ub.unwrap() - 1287.0).abs() <= 1e-6);
    assert!(r.gap_l.unwrap().abs() <= 1e-6);
    assert_eq!(read_results(&dir.path().join("results.csv")).unwrap(), rows);
    assert!(dir
        .path()
        .join("solutions/Data1-3-2-0.6-100-s4-exact.json")
        .exists());
}

#[test]
fn solve_is_deterministic_apart_from_time() {
    let run = |jobs| {
        let dir = tempfile::tempdir().unwrap();
        let manifest = RunManifest::new(
            None,
            vec![
                fixture("Data1-3-3-0.8-50-s5"),
                fixture("Data2-3-2-0.8-50-80-20-s6"),
            ],
            "rf,rfo",
            0,
            dir.path().to_path_buf(),
            None,
            0.01,
            false,
            jobs,
        )
        .unwrap();
        cmd_solve(&manifest).unwrap();
        let mut rows = read_results(&dir.path().join("results.csv")).unwrap();
        for r in &mut rows {
            r.time_s = 0.0;
        }
        rows
    };
    let a = run(1);
    assert_eq!(a.len(), 4);
    assert!(a.iter().all(|r| r.feasible));
    assert_eq!(a, run(2));
}

#[test]
fn profile_matches_hand_computation() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("results.csv");
    emit_results(
        &[
            record("i1", "a", Some(100.0)),
            record("i1", "b", Some(110.0)),
            record("i2", "a", None),
            record("i2", "b", Some(150.0)),
        ],
        &csv,
    )
    .unwrap();
    let out = dir.path().join("report");
    let rep = cmd_report(&[csv], &out, 0.05).unwrap();
    assert_eq!(
        fs::read_to_string(out.join("profile-a.csv")).unwrap(),
        "tau,theta\n1,0.5\n1.1,0.5\n"
    );
    assert_eq!(
        fs::read_to_string(out.join("profile-b.csv")).unwrap(),
        "tau,theta\n1,0.5\n1.1,1\n"
    );
    // Only one instance has both methods feasible: too few pairs for a test.
    assert_eq!(rep.pairs.len(), 1);
    assert_eq!(rep.pairs[0].pairs, 1);
    assert_eq!(rep.pairs[0].verdict, Verdict::NoSignificance);
}

#[test]
fn single_method_profile_is_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("results.csv");
    emit_results(
        &[
            record("i1", "rfo", Some(10.0)),
            record("i2", "rfo", Some(20.0)),
        ],
        &csv,
    )
    .unwrap();
    let out = dir.path().join("report");
    let rep = cmd_report(&[csv], &out, 0.05).unwrap();
    assert!(rep.pairs.is_empty());
    assert_eq!(
        fs::read_to_string(out.join("profile-rfo.csv")).unwrap(),
        "tau,theta\n1,1\n"
    );
}

#[test]
fn identical_methods_are_not_significant() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("results.csv");
    let mut rows = Vec::new();
    for (i, ub) in [10.0, 12.0, 9.0, 30.0].into_iter().enumerate() {
        rows.push(record(&format!("i{i}"), "a", Some(ub)));
        rows.push(record(&format!("i{i}"), "b", Some(ub)));
    }
    emit_results(&rows, &csv).unwrap();
    let rep = cmd_report(&[csv], &dir.path().join("report"), 0.05).unwrap();
    assert_eq!(rep.pairs.len(), 1);
    assert_eq!(rep.pairs[0].pairs, 4);
    assert_eq!(rep.pairs[0].verdict, Verdict::NoSignificance);
    let text = fs::read_to_string(dir.path().join("report/ttest.csv")).unwrap();
    assert!(text.starts_with("method_a,method_b,pairs,t,p_value,mean_diff,verdict\na,b,4,"));
    assert!(text.trim_end().ends_with("no_significance"));
}

#[test]
fn report_rejects_uneven_coverage() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("results.csv");
    emit_results(
        &[
            record("i1", "a", Some(1.0)),
            record("i1", "b", Some(1.0)),
            record("i2", "a", Some(1.0)),
        ],
        &csv,
    )
    .unwrap();
    let err = cmd_report(&[csv.clone(), csv], &dir.path().join("r"), 0.05).unwrap_err();
    assert!(err.to_string().contains("duplicate"), "{err}");
    let csv2 = dir.path().join("r2.csv");
    emit_results(
        &[
            record("i1", "a", Some(1.0)),
            record("i1", "b", Some(1.0)),
            record("i2", "a", Some(1.0)),
        ],
        &csv2,
    )
    .unwrap();
    let err = cmd_report(&[csv2], &dir.path().join("r"), 0.05).unwrap_err();
    assert!(err.to_string().contains("i2"), "{err}");
}
