use std::path::Path;
use std::process::{Command, Output};

fn apsn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apsn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_passes() {
    let o = apsn(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn case4_summary_is_nonnegative() {
    let o = apsn(&["case", "table3-case4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "table3-case4");
    assert!(row[4].parse::<f64>().unwrap() >= -1e-10);
    assert_eq!(row[6], "ok");
}

#[test]
fn case_writes_fields() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = apsn(&["case", "boundary", "--n", "9", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("boundary.csv")).unwrap();
    assert!(csv.starts_with("node,x1,x2,scalar_flux,psi_0,"));
    let vtk = std::fs::read_to_string(dir.path().join("boundary.vtk")).unwrap();
    assert!(vtk.contains("SCALARS psi_23 double 1"));
}

#[test]
fn diffusion_convergence_is_second_order() {
    let o = apsn(&["convergence", "diffusion", "--eps", "1e-6", "--sides", "11,21"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    let rate: f64 = last[2].parse().unwrap();
    assert!((1.8..2.3).contains(&rate), "rate {rate}");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let run = || {
        stdout(&apsn(&[
            "convergence",
            "manufactured",
            "--sides",
            "5,9",
            "--order",
            "4",
        ]))
    };
    assert_eq!(run(), run());
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn solve_from_config_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[mesh]\nkind = \"interval\"\nlengths = [4.0]\ndofs = [40]\n\
         [[region]]\nsigma_t = 2.0\nsigma_s = 1.0\nq = 1.0\n\
         [bc]\ntype = \"isotropic\"\nvalue = 0.5\nmode = \"strong\"\n",
    );
    let out = dir.path().join("out");
    let o = apsn(&[
        "solve",
        &cfg,
        "--scheme",
        "gv",
        "--solver",
        "si",
        "--out",
        out.to_str().unwrap(),
        "--matrix",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("run,gv,40,8,"));
    let mtx = std::fs::read_to_string(out.join("run.mtx")).unwrap();
    assert!(mtx.starts_with("%%MatrixMarket matrix coordinate real general\n320 320 "));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(apsn(&["case", "table5"]).status.code(), Some(2));
    assert_eq!(apsn(&["solve"]).status.code(), Some(2));
    assert_eq!(apsn(&["solve", "/definitely/missing.toml"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[mesh]\nkind = \"square\"\nn = 5\ncolour = 1\n[[region]]\nsigma_t = 1.0\nsigma_s = 0.0\n",
    );
    let o = apsn(&["solve", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}

#[test]
fn numerical_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[mesh]\nkind = \"interval\"\nlengths = [10.0]\ndofs = [30]\n\
         [[region]]\nsigma_t = 10.0\nsigma_s = 9.99\nq = 1.0\n\
         [solver]\nmethod = \"si\"\nmax_iter = 3\n",
    );
    assert_eq!(apsn(&["solve", &cfg]).status.code(), Some(1));
}
