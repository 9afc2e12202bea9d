//! The command-line contract: exit codes, report shape and reproducers.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sylvkit_core::pencil::ExtendedComplex;
use sylvkit_core::report::{InstanceFile, ReportFile};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sylvkit"))
        .args(args)
        .env_remove("SYLVKIT_TOL")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> ReportFile {
    let text = String::from_utf8_lossy(&out.stdout);
    ReportFile::from_json(&text).unwrap_or_else(|e| panic!("{e}\n{text}"))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn counterexamples_decide_opposite_ways() {
    for (name, ur) in [
        ("counterexample_unique.json", true),
        ("counterexample_nonunique.json", false),
    ] {
        let out = run(&["analyze", &fixture(name)]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let d = report(&out).decisions.unwrap().ur;
        assert_eq!(
            (d.spectral, d.oracle, d.agree),
            (Some(ur), Some(ur), Some(true))
        );
    }
}

#[test]
fn every_fixture_is_decided_consistently() {
    let dir = PathBuf::from(fixture(""));
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let out = run(&["analyze", path.to_str().unwrap()]);
        if name.starts_with("corrupted") {
            assert_eq!(out.status.code(), Some(1), "{name}");
            continue;
        }
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stderr(&out));
        let rep = report(&out);
        assert!(
            rep.disagreements.is_empty(),
            "{name}: {:?}",
            rep.disagreements
        );
    }
}

#[test]
fn corrupted_fixture_is_an_input_error_with_a_line() {
    let out = run(&["analyze", &fixture("corrupted_shapes.json")]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(
        err.contains("line 7") && err.contains("D must be 2x1"),
        "{err}"
    );
    assert!(out.stdout.is_empty());
}

#[test]
fn syntax_errors_and_missing_files_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        "{\n  \"equation\": \"gen_sylvester\",\n  \"A\": [1, 2\n}\n",
    )
    .unwrap();
    let out = run(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));
    let out = run(&["analyze", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_do_not_claim_disagreement() {
    assert_eq!(run(&["analyze"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn solve_echoes_e_for_the_identity_equation() {
    let out = run(&["solve", &fixture("x_equals_e.json")]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    let sol = rep.solution.unwrap();
    let text = std::fs::read_to_string(fixture("x_equals_e.json")).unwrap();
    let (file, _) = InstanceFile::parse(&text).unwrap();
    assert_eq!(sol.x, file.e.unwrap());
    assert_eq!(sol.residual_fro, 0.0);
    assert!(sol.unique);
}

#[test]
fn solve_reports_uniqueness_honestly() {
    let out = run(&["solve", &fixture("counterexample_unique_rhs.json")]);
    let sol = report(&out).solution.unwrap();
    assert!(sol.unique && sol.residual_fro <= 1e-12);

    let out = run(&["solve", &fixture("counterexample_nonunique_rhs.json")]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    let d = rep.decisions.unwrap();
    assert_eq!(d.s.unwrap().oracle, Some(true));
    assert_eq!(d.us.unwrap().oracle, Some(false));
    let sol = rep.solution.unwrap();
    assert!(!sol.unique && sol.residual_fro <= 1e-12);
}

#[test]
fn solve_needs_a_right_hand_side() {
    let out = run(&["solve", &fixture("counterexample_unique.json")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn scalar_q_has_plus_and_minus_one() {
    for name in ["scalar_T.json", "scalar_C.json"] {
        let out = run(&["spectrum", &fixture(name), "--pencil", "Q"]);
        assert_eq!(out.status.code(), Some(0));
        let s = report(&out).spectrum.unwrap();
        assert!(s.regular);
        assert_eq!(s.spectrum.total(), 2);
        assert_eq!(s.spectrum.multiplicity_at(ExtendedComplex::ONE), 1);
        assert_eq!(s.spectrum.multiplicity_at(ExtendedComplex::MINUS_ONE), 1);
    }
}

#[test]
fn q_spectrum_of_the_unique_counterexample_drops_the_forced_infinity() {
    let out = run(&[
        "spectrum",
        &fixture("counterexample_unique.json"),
        "--pencil",
        "Q",
    ]);
    let s = report(&out).spectrum.unwrap();
    assert_eq!(s.spectrum.m_zero(), 2);
    assert_eq!(s.spectrum.m_infinity(), 1);
    let core = s.core.unwrap();
    assert_eq!(
        (core.removed_value, core.removed_count),
        (ExtendedComplex::Infinity, 1)
    );
    assert_eq!(core.spectrum.m_infinity(), 0);
}

#[test]
fn small_pencil_on_singular_a_names_the_matrix() {
    let out = run(&[
        "spectrum",
        &fixture("scalar_a_singular.json"),
        "--pencil",
        "P1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("A (sigma_min"), "{}", stderr(&out));
    let out = run(&[
        "spectrum",
        &fixture("scalar_a_singular.json"),
        "--pencil",
        "P2",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn pencils_belong_to_their_equation() {
    let out = run(&[
        "spectrum",
        &fixture("table_row_03_L1T_L1.json"),
        "--pencil",
        "Q",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&[
        "spectrum",
        &fixture("table_row_03_L1T_L1.json"),
        "--pencil",
        "AC",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let s = report(&out).spectrum.unwrap();
    let st = s.structure.unwrap();
    assert_eq!(
        (st.left_minimal_indices.as_slice(), s.regular),
        (&[1][..], false)
    );
    let out = run(&["spectrum", &fixture("scalar_T.json"), "--pencil", "DB"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn backends_can_run_alone() {
    let path = fixture("counterexample_unique.json");
    let d = report(&run(&["analyze", &path, "--backend", "spectral"]))
        .decisions
        .unwrap();
    assert_eq!((d.ur.spectral, d.ur.oracle), (Some(true), None));
    let d = report(&run(&["analyze", &path, "--backend", "oracle"]))
        .decisions
        .unwrap();
    assert_eq!((d.ur.spectral, d.ur.oracle), (None, Some(true)));
}

#[test]
fn tolerance_comes_from_flag_then_environment() {
    let path = fixture("scalar_T.json");
    let env = Command::new(env!("CARGO_BIN_EXE_sylvkit"))
        .args(["analyze", &path])
        .env("SYLVKIT_TOL", "1e-9")
        .output()
        .unwrap();
    assert_eq!(report(&env).tolerances.rank_tol, Some(1e-9));
    let flag = Command::new(env!("CARGO_BIN_EXE_sylvkit"))
        .args(["analyze", &path, "--tol", "1e-7", "--cluster-tol", "1e-5"])
        .env("SYLVKIT_TOL", "1e-9")
        .output()
        .unwrap();
    let t = report(&flag).tolerances;
    assert_eq!((t.rank_tol, t.cluster_tol), (Some(1e-7), 1e-5));
    assert_eq!(
        run(&["analyze", &path, "--tol", "-1"]).status.code(),
        Some(1)
    );
}

#[test]
fn suite_agrees_on_a_small_run() {
    let out = run(&["suite", "--seed", "42", "--count", "50"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("50/50 agree"));
    let rep = report(&out);
    assert_eq!(rep.seed, Some(42));
    let s = rep.suite.unwrap();
    assert_eq!((s.agree, s.count), (50, 50));
    assert!(s
        .categories
        .iter()
        .any(|c| c.category.starts_with("star_sylvester/T")));
    assert!(s
        .categories
        .iter()
        .any(|c| c.category.starts_with("star_sylvester/C")));
    assert!(s
        .categories
        .iter()
        .any(|c| c.category.starts_with("gen_sylvester")));
}

#[test]
fn empty_suite_is_vacuous() {
    let out = run(&["suite", "--count", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("0/0 agree"));
}

fn decision_booleans(rep: &ReportFile) -> Vec<(&'static str, Option<bool>, Option<bool>)> {
    rep.decisions.as_ref().unwrap().booleans()
}

fn faulty_suite(dir: &Path, fault: &str) -> (ReportFile, PathBuf) {
    let repro = dir.join(format!("{fault}.json"));
    let out = run(&[
        "suite",
        "--seed",
        "7",
        "--count",
        "80",
        "--inject-fault",
        fault,
        "--reproducer",
        repro.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("first disagreement"));
    (report(&out), repro)
}

#[test]
fn injected_fault_fails_the_suite_and_leaves_a_reproducer() {
    let dir = tempfile::tempdir().unwrap();
    for fault in ["star-square-negated", "gsylv-sr-negated"] {
        let (rep, repro) = faulty_suite(dir.path(), fault);
        let summary = rep.suite.unwrap();
        assert_eq!(summary.reproducer.as_deref(), Some(repro.to_str().unwrap()));
        let first = summary.first_disagreement.unwrap();
        assert!(summary.agree < summary.count);

        let text = std::fs::read_to_string(&repro).unwrap();
        let (file, _) = InstanceFile::parse(&text).unwrap();
        assert_eq!(file.seed, Some(7));
        assert_eq!(file, first.instance);

        // the dump reproduces the failure bit for bit
        let again = run(&["analyze", repro.to_str().unwrap(), "--inject-fault", fault]);
        assert_eq!(again.status.code(), Some(2));
        assert_eq!(
            decision_booleans(&report(&again)),
            decision_booleans(&first.report)
        );
        // and the correct build agrees on it
        assert_eq!(
            run(&["analyze", repro.to_str().unwrap()]).status.code(),
            Some(0)
        );
    }
}

#[test]
fn reports_round_trip() {
    let runs: [&[&str]; 4] = [
        &["analyze", &fixture("table_row_05_L1T_L1T.json")],
        &["solve", &fixture("counterexample_unique_rhs.json")],
        &[
            "spectrum",
            &fixture("table_row_06_L1_L1.json"),
            "--pencil",
            "DB",
        ],
        &["suite", "--count", "12", "--seed", "3"],
    ];
    for args in runs {
        let out = run(args);
        let rep = report(&out);
        let again = ReportFile::from_json(&rep.to_json()).unwrap();
        assert_eq!(again, rep, "{args:?}");
    }
}
