use std::process::Command;

fn qrdm(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qrdm")).args(args).output().unwrap()
}

#[test]
fn factor_prints_one_row() {
    let out = qrdm(&["factor", "identity:8", "--algo", "qrp"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("matrix,algo,m,n,rank_oracle"));
    assert!(lines[1].starts_with("identity:8,qrp,8,8,8,8,1.0000000000000000e0"), "{}", lines[1]);
}

#[test]
fn unknown_flags_and_bad_values_exit_with_one() {
    assert_eq!(qrdm(&["factor", "identity:3", "--bogus"]).status.code(), Some(1));
    assert_eq!(qrdm(&["factor", "identity:3", "--stop", "eps"]).status.code(), Some(1));
    assert_eq!(qrdm(&["factor", "identity:3", "--algo", "qr"]).status.code(), Some(1));
    assert_eq!(qrdm(&["factor", "identity:3", "--tau", "0"]).status.code(), Some(1));
    assert_eq!(qrdm(&["factor", "/no/such/file.mtx"]).status.code(), Some(1));
    assert_eq!(qrdm(&["--help"]).status.code(), Some(0));
}

#[test]
fn gen_then_compare_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = dir.path().join("a.mtx");
    let csv = dir.path().join("a.csv");
    let s = |p: &std::path::Path| p.to_str().unwrap().to_string();
    let out = qrdm(&["gen", "random:30:20:8:1e10", "--seed", "3", "--out", &s(&mtx)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = qrdm(&["compare", &s(&mtx), "--algo", "qrp,qrdm2", "--kdm", "16", "--out", &s(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = qrdm_harness::report::read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.matrix == "a" && r.rank_oracle == Some(8) && r.rank_computed == 8));
}

#[test]
fn sweep_writes_grid() {
    let out = qrdm(&["sweep", "identity:5", "--taus", "0:1:0.5", "--deltas", "0.9,1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 2);
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(3) == Some("0")));
}
