use std::path::Path;
use std::process::{Command, Output};

fn rumkit() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rumkit"));
    c.env_remove("RUMKIT_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    rumkit().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn lines_of_square_grid() {
    let o = run(&["--quiet", "crystal", "lines", "--fixture", "square-grid", "--resolution", "40"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["version"], "1");
    assert_eq!(v["spectral_lines"].as_array().unwrap().len(), 2);
    assert!(o.stderr.is_empty());
}

#[test]
fn progress_goes_to_stderr_only() {
    let quiet = run(&["--quiet", "crystal", "scan", "--fixture", "kagome", "--resolution", "16"]);
    let loud = run(&["crystal", "scan", "--fixture", "kagome", "--resolution", "16"]);
    assert_eq!(code(&quiet), 0);
    assert_eq!(code(&loud), 0);
    assert_eq!(quiet.stdout, loud.stdout);
    assert!(quiet.stderr.is_empty());
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["crystal", "scan", "--fixture", "kagome", "--resolution", "5"][..],
        &["crystal", "scan", "--fixture", "nope", "--resolution", "8"],
        &["crystal", "scan", "--bogus-flag"],
        &["crystal", "ifm", "--fixture", "kagome", "--gamma", "0.1"],
        &["multigrid", "generate", "--preset", "heptagon"],
    ] {
        let o = run(args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn result_class_exits_3() {
    let o = run(&["--quiet", "crystal", "ifm", "--fixture", "square-grid", "--gamma", "0.3,0.4"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not in spectrum"));
    assert!(o.stdout.is_empty());
}

#[test]
fn unreadable_input_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let o = run(&["crystal", "scan", path_str(&missing), "--resolution", "8"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn malformed_input_reports_pointer_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"version":"1","basis":[[1,0],[0,1]],"motif_joints":[[0,0]],"motif_edges":[{"from":0,"to":0,"offset":[1,"x"]}]}"#).unwrap();
    let o = run(&["crystal", "scan", path_str(&p), "--resolution", "8"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("/motif_edges/0/offset/1"));
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let args = ["--quiet", "crystal", "scan", "--fixture", "kagome", "--resolution", "12"];
    let piped = run(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path_str(&out)]);
    let o = run(&with_out);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(&out).unwrap(), piped.stdout);
    let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(leftovers, 1);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["--quiet", "crystal", "scan", "--fixture", "kagome", "--resolution", "24"];
    let one = rumkit().args(args).env("RUMKIT_THREADS", "1").output().unwrap();
    let four = rumkit().args(args).env("RUMKIT_THREADS", "4").output().unwrap();
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
    let bad = rumkit().args(args).env("RUMKIT_THREADS", "0").output().unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn repeated_runs_are_identical() {
    let args = ["--quiet", "multigrid", "ribbons", "--preset", "penrose", "--window", "6"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn generate_then_ribbons_and_render() {
    let dir = tempfile::tempdir().unwrap();
    let tiling = dir.path().join("t.json");
    let o = run(&["--quiet", "multigrid", "generate", "--preset", "rhombille", "--window", "10", "--out", path_str(&tiling)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let from_file = run(&["--quiet", "multigrid", "ribbons", path_str(&tiling)]);
    let from_preset = run(&["--quiet", "multigrid", "ribbons", "--preset", "rhombille", "--window", "10"]);
    assert_eq!(code(&from_file), 0);
    assert_eq!(from_file.stdout, from_preset.stdout);
    assert!(stdout(&from_file).starts_with("family,index,tiles,"));

    let svg = run(&["--quiet", "render", path_str(&tiling)]);
    assert_eq!(code(&svg), 0);
    let s = stdout(&svg);
    assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
}

#[test]
fn figure_file_renders_as_svg() {
    let dir = tempfile::tempdir().unwrap();
    let fig = dir.path().join("fig.json");
    let o = run(&[
        "--quiet", "crystal", "lines", "--fixture", "kagome", "--resolution", "60", "--out",
        path_str(&fig),
    ]);
    assert_eq!(code(&o), 0);
    let svg = stdout(&run(&["--quiet", "render", path_str(&fig)]));
    assert_eq!(svg.matches("<line").count(), 3);
}
