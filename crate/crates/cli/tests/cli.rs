use std::io::Write;
use std::process::{Command, Output};

fn waring(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_waring")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn certify_descends_to_the_certified_rank() {
    let o = waring(&["certify", "--n", "2", "--r", "2", "--degrees", "3,3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("g=5, certified k=4"), "{}", stdout(&o));
}

#[test]
fn certify_at_generic_rank_reports_deficiency() {
    let o = waring(&["certify", "--n", "2", "--r", "2", "--degrees", "3,3", "--k", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("terracini-deficient at k=5"));
}

#[test]
fn certify_csv_row() {
    let o = waring(&["certify", "--n", "2", "--r", "3", "--degrees", "2,2,2", "--format", "csv"]);
    assert_eq!(stdout(&o), "r,n,degrees,g,k\n3,2,2|2|2,4,3\n");
}

#[test]
fn bad_arguments_exit_two() {
    for args in [
        &["certify", "--n", "2", "--r", "3", "--degrees", "3,3"][..],
        &["certify", "--n", "2", "--r", "2", "--degrees", "4,3"],
        &["certify", "--n", "2", "--r", "2", "--degrees", "3,3", "--prime", "100"],
        &["certify", "--n", "2"],
        &["monodromy", "--n", "2", "--r", "2", "--degrees", "3,3", "--k", "3"],
        &["monodromy", "--n", "2", "--r", "2", "--degrees", "2,2", "--k", "3", "--min-step", "-1"],
        &["replay-theorem", "--fixture", "/definitely/not/here.json"],
        &["table", "--input", "/definitely/not/here.csv"],
        &["frobnicate"],
    ] {
        let o = waring(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn monodromy_unique_case() {
    let o = waring(&["monodromy", "--n", "2", "--r", "2", "--degrees", "2,2", "--k", "3", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("1 classes over ℂ; 1 real, 0 self-conjugate, 0 complex-paired"), "{out}");
    assert!(out.contains("verdict: identifiable over ℂ; saturated"));
}

#[test]
fn monodromy_json_is_reproducible_and_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let args = ["monodromy", "--n", "2", "--r", "2", "--degrees", "2,3", "--k", "4", "--seed", "9", "--format", "json"];
    let a = waring(&args);
    let mut with_file = args.to_vec();
    let p = path.to_str().unwrap();
    with_file.extend(["--json", p]);
    let b = waring(&with_file);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(std::fs::read(&path).unwrap(), a.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["count_complex"], 1);
    assert_eq!(v["verdict"], "identifiable over ℂ");
}

#[test]
fn config_file_supplies_missing_flags() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "# defaults for a quick run\nn = 2\nr = 2\ndegrees = 3,3\nformat = csv").unwrap();
    let p = f.path().to_str().unwrap();
    let o = waring(&["certify", "--config", p]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "r,n,degrees,g,k\n2,2,3|3,5,4\n");
    // explicit flags win over the file
    let o = waring(&["certify", "--config", p, "--degrees", "4,4"]);
    assert_eq!(stdout(&o), "r,n,degrees,g,k\n2,2,4|4,8,7\n");
}

#[test]
fn broken_config_exits_two() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "this line has no equals sign").unwrap();
    let o = waring(&["certify", "--config", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = waring(&["certify", "--config", "/no/such/config"]);
    assert_eq!(o.status.code(), Some(2));
}

fn table_file(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

#[test]
fn table_exit_codes() {
    let header = "r,n,degrees,expected_g,expected_k,mark\n";
    let ok = table_file(&format!("{header}2,2,3|3,5,4,star\n3,2,2|2|2,4,3,\n"));
    let o = waring(&["table", "--input", ok.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("2 rows: 0 k mismatches"));

    let wrong = table_file(&format!("{header}2,2,3|3,5,3,\n"));
    let o = waring(&["table", "--input", wrong.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL"));

    let empty = table_file(header);
    let o = waring(&["table", "--input", empty.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));

    for bad in ["2,2,3|x,5,4,\n", "2,2,3,5,4,\n", "2,2\n"] {
        let f = table_file(&format!("{header}{bad}"));
        let o = waring(&["table", "--input", f.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{bad:?}");
    }
}

#[test]
fn table_report_does_not_depend_on_thread_count() {
    let a = waring(&["table", "--subset", "acceptance", "--format", "json", "--jobs", "1"]);
    let b = waring(&["table", "--subset", "acceptance", "--format", "json", "--jobs", "4"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn small_table_flags_the_known_disagreement() {
    // the bundled row (2,2,(3,8)) lists k=8; the criterion certifies 9
    let o = waring(&["table", "--subset", "small", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    let failing: Vec<&str> = out.lines().filter(|l| l.contains(",false,")).collect();
    assert_eq!(failing, vec!["2,2,3|8,diamond,14,14,8,9,false,true"]);
}

#[test]
fn help_exits_zero() {
    assert_eq!(waring(&["--help"]).status.code(), Some(0));
    assert_eq!(waring(&["certify", "--help"]).status.code(), Some(0));
}
