use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mchap() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mchap"));
    c.env_remove("MCHAP_TIME_LIMIT");
    c
}

fn example() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/example1.inst")
}

fn run(c: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = c.output().expect("binary runs");
    (status.code().unwrap_or(-1), String::from_utf8(stdout).unwrap(), String::from_utf8(stderr).unwrap())
}

#[test]
fn solve_example_with_every_method() {
    for method in ["bp-sep1", "bp-sep2", "lam-t2", "brute"] {
        let (code, out, err) = run(mchap().args(["solve", "--method", method, "--instance"]).arg(example()));
        assert_eq!(code, 0, "{method}: {err}");
        let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[..4], ["example1", method, "16", "optimal"]);
    }
}

#[test]
fn solution_and_trace_files() {
    let dir = tempfile::tempdir().unwrap();
    let (sol, trace) = (dir.path().join("sol.txt"), dir.path().join("trace.tsv"));
    let (code, _, _) = run(mchap().args(["solve", "--instance"]).arg(example()).arg("--out").arg(&sol).arg("--trace").arg(&trace));
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&sol).unwrap();
    assert!(text.ends_with("users 6\n0 0\n1 -\n2 -\n3 1\n4 -\n5 2 3\n"), "{text}");
    let trace = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(trace, "node\tparent\tbound\taction\n0\t-\t17.000000\tbranch\n1\t0\t16.000000\tprune_integrality\n2\t0\t16.750000\tprune_bound\n");
    // without a file the log goes to standard error
    let (_, out, err) = run(mchap().args(["solve", "--trace", "--instance"]).arg(example()));
    assert!(err.starts_with("node\tparent"));
    assert!(!out.contains("branch"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(mchap().args(["solve", "--instance"]).arg(dir.path().join("missing.inst")));
    assert_eq!(code, 2, "{err}");
    let (code, _, _) = run(mchap().args(["solve", "--method", "simplex", "--instance"]).arg(example()));
    assert_eq!(code, 2);
    let bad = dir.path().join("bad.inst");
    std::fs::write(&bad, "mchap-instance v1\nunits_per_mhz 1\nholes 2\n0 5\n3 9\nusers 0\n").unwrap();
    let (code, _, err) = run(mchap().args(["solve", "--instance"]).arg(&bad));
    assert_eq!(code, 2);
    assert!(err.contains("line 5") && err.contains("overlap"), "{err}");

    // a search that cannot finish in zero seconds
    let (code, _, _) = run(mchap().args(["generate", "--m", "25", "--n", "100", "--q", "0.5", "--seed", "4", "--out"]).arg(dir.path()));
    assert_eq!(code, 0);
    let big = dir.path().join("m25_n100_q0.5_s4.inst");
    let (code, out, _) = run(mchap().args(["solve", "--time-limit", "0", "--instance"]).arg(&big));
    assert_eq!(code, 3);
    assert!(out.contains(",time_limit,"));
    let (code, _, _) = run(mchap().env("MCHAP_TIME_LIMIT", "0").args(["solve", "--instance"]).arg(&big));
    assert_eq!(code, 3);

    // the exhaustive oracle refuses large instances
    let (code, _, err) = run(mchap().args(["solve", "--method", "brute", "--instance"]).arg(&big));
    assert_eq!(code, 2, "{err}");
}

#[test]
fn generate_writes_count_files() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["generate", "--m", "25", "--n", "50", "--q", "0.5", "--delta-rule", "prop", "2", "3", "--seed", "1", "--count", "20", "--out"];
    let (code, out, _) = run(mchap().args(args).arg(dir.path()));
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 20);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 20);
    let fixed = ["generate", "--m", "30", "--n", "60", "--q", "0.25", "--delta-rule", "fixed", "45", "--out"];
    let (code, _, _) = run(mchap().args(fixed).arg(dir.path().join("fixed")));
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(dir.path().join("fixed/m30_n60_q0.25_s1.inst")).unwrap();
    let inst = mchap::format::read_instance(&text).unwrap();
    assert!(inst.users().iter().all(|u| u.mar == 4500));
    let (code, out, _) = run(mchap().args(["generate", "--m", "3", "--n", "2", "--q", "0.5", "--count", "0", "--out"]).arg(dir.path().join("none")));
    assert_eq!((code, out.as_str()), (0, ""));
    let (code, _, _) = run(mchap().args(["generate", "--m", "3", "--n", "2", "--q", "1.5", "--out"]).arg(dir.path()));
    assert_eq!(code, 2);
}

#[test]
fn compare_layouts() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run(mchap().args(["generate", "--m", "7", "--n", "4", "--q", "0.5", "--count", "4", "--out"]).arg(dir.path()));
    assert_eq!(code, 0);
    let summary = dir.path().join("summary.csv");
    let (code, out, err) =
        run(mchap().args(["compare", "--jobs", "3", "--methods", "bp-sep1,bp-sep2,lam-t2", "--dir"]).arg(dir.path()).arg("--summary").arg(&summary));
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 1 + 4 * 3);
    let s = std::fs::read_to_string(&summary).unwrap();
    let header: Vec<&str> = s.lines().next().unwrap().split(',').collect();
    for m in ["bp-sep1", "bp-sep2", "lam-t2"] {
        assert!(header.contains(&format!("{m}_tl").as_str()));
    }
    // every method finds the same objectives
    let objectives: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split(',').collect()).collect();
    for chunk in objectives.chunks(3) {
        assert!(chunk.iter().all(|r| r[2] == chunk[0][2] && r[3] == "optimal"));
    }

    let (code, out, _) = run(mchap().args(["compare", "--bounds-only", "--dir"]).arg(dir.path()));
    assert_eq!(code, 0);
    assert_eq!(out.lines().next().unwrap(), "instance,objective,status,bilp_bound,lamt2_bound,bilp_gap,lamt2_gap");

    let one = tempfile::tempdir().unwrap();
    std::fs::copy(example(), one.path().join("example1.inst")).unwrap();
    let (code, out, _) = run(mchap().args(["compare", "--methods", "bp-sep2", "--dir"]).arg(one.path()));
    assert_eq!(code, 0);
    assert_eq!(out, "instance,method,objective,status,root_bound,gap,nodes,cg_iterations,columns\nexample1,bp-sep2,16,optimal,17,1,3,6,13\n");

    let empty = tempfile::tempdir().unwrap();
    let (code, _, _) = run(mchap().args(["compare", "--dir"]).arg(empty.path()));
    assert_eq!(code, 2);
}

#[test]
fn parallel_and_serial_reports_match() {
    let dir = tempfile::tempdir().unwrap();
    run(mchap().args(["generate", "--m", "9", "--n", "5", "--q", "0.25", "--count", "6", "--out"]).arg(dir.path()));
    let serial = run(mchap().args(["compare", "--jobs", "1", "--dir"]).arg(dir.path()));
    let parallel = run(mchap().args(["compare", "--jobs", "4", "--dir"]).arg(dir.path()));
    assert_eq!(serial.1, parallel.1);
}
