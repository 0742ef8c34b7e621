use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rrg-cutoff"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const K4: &str = "4 3\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n";

#[test]
fn gen_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.txt", "b.txt"] {
        let o = run(&["gen", "-n", "1000", "-d", "3", "--seed", "7", "-o", name], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = fs::read(dir.path().join("a.txt")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.txt")).unwrap());
    let g = rrg_cutoff::graph::load_graph(dir.path().join("a.txt")).unwrap();
    assert_eq!((g.n(), g.d()), (1000, 3));
}

#[test]
fn k4_profile_csv() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("k4.txt"), K4).unwrap();
    let o = run(&["profile", "--walk", "srw", "-g", "k4.txt", "--starts", "all", "--tmax", "10", "-o", "p.csv"], dir.path());
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("p.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "t,tv");
    assert_eq!(rows[1], "0,0.75");
    assert_eq!(rows[2], "1,0.25");
    assert!(rows[3].starts_with("2,0.08333333333333"));
    assert_eq!(rows.len(), 12);
    assert!(csv.contains("# exactness=exact"));
    assert!(csv.contains("# walk=srw"));
    assert!(csv.contains("# n=4"));
}

#[test]
fn sampled_profiles_are_marked_as_lower_bounds_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["gen", "-n", "500", "-d", "3", "--seed", "1", "-o", "g.txt"], dir.path()).status.success());
    let args = ["profile", "--walk", "nbrw", "-g", "g.txt", "--starts", "sample:30", "--seed", "4", "--tmax", "25"];
    let one = run(&[&["--threads", "1"], &args[..]].concat(), dir.path());
    let two = run(&[&["--threads", "2"], &args[..]].concat(), dir.path());
    assert!(one.status.success());
    assert_eq!(one.stdout, two.stdout);
    assert!(stdout(&one).contains("# exactness=lower_bound"));
}

#[test]
fn predict_nbrw_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["predict", "--nbrw", "-n", "2000", "-d", "3", "--eps", "0.25"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l == "lower 11 upper 23"));
}

#[test]
fn validation_and_runtime_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("k4.txt"), K4).unwrap();
    let o = run(&["profile", "--walk", "srw", "--no-such-flag"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(run(&["gen", "-n", "5", "-d", "3", "--seed", "1", "-o", "x.txt"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["tmix", "--walk", "srw", "-g", "missing.txt", "--tmax", "3", "--starts", "all"], dir.path()).status.code(), Some(2));
    let o = run(&["profile", "--walk", "srw", "-g", "k4.txt", "--starts", "all", "--tmax", "10", "--budget", "10"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sample:m"));
    let o = run(&["profile", "--walk", "srw", "-g", "k4.txt", "--tmax", "3"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn tmix_table() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("k4.txt"), K4).unwrap();
    let o = run(&["tmix", "--walk", "srw", "-g", "k4.txt", "--starts", "all", "--tmax", "10", "--eps", "0.5,0.2,0.001"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().filter(|l| !l.starts_with('#')).map(|l| l.split_whitespace().collect()).collect();
    assert_eq!(rows[1], ["0.5", "1"]);
    assert_eq!(rows[2], ["0.2", "2"]);
    assert_eq!(rows[3], ["0.001", "7"]);
}

#[test]
fn verify_fixtures_has_no_failures_or_warnings() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--fixtures"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("warn 0  fail 0"), "{text}");
    assert!(text.contains("Petersen"));
}

#[test]
fn bd_speed_csv() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["gen", "-n", "2000", "-d", "3", "--seed", "2", "-o", "g.txt"], dir.path()).status.success());
    let o = run(&["bd-speed", "-g", "g.txt", "--seed", "5", "-c", "1.5,3", "--trials", "500"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "c,t,mean,std_error,predicted");
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("1.5,16,"));
}
