use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, config: &str, extra: &[&str], seed: Option<&str>) -> Output {
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, config).unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ineqlab"));
    cmd.arg("run").arg(&cfg).arg("--out-dir").arg(dir.join("out")).args(extra);
    cmd.env_remove("INEQLAB_SEED_OVERRIDE");
    if let Some(s) = seed {
        cmd.env("INEQLAB_SEED_OVERRIDE", s);
    }
    cmd.output().unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join("out").join(name)).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn empty_config_passes() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), "# nothing to do\n", &[], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        read(tmp.path(), "summary.csv"),
        "job,kind,measure,weight,verdict,bracket_low,bracket_high,estimate,report\n"
    );
}

#[test]
fn muckenhoupt_job_reports_bracket() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), "[job.m]\nkind = muckenhoupt\nmeasure = nu_p:p=1\nweight = identity\n", &[], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = rows(&read(tmp.path(), "summary.csv"));
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][4], "pass");
    let lo: f64 = r[0][5].parse().unwrap();
    let hi: f64 = r[0][6].parse().unwrap();
    assert!((lo - 1.0).abs() < 1e-3 && (hi - 4.0).abs() < 4e-3, "{lo} {hi}");
    assert!(read(tmp.path(), "m.json").contains("\"D_minus\""));
}

#[test]
fn invalid_measure_parameter_exits_one() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), "[job.bad]\nkind = muckenhoupt\nmeasure = nu_p:p=0.5\n", &[], None);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("invalid parameter"), "{err}");
    assert!(err.contains(":3:11:"), "{err}");
}

#[test]
fn syntax_error_has_position() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), "[job.a]\nkind = spectral\n  oops\n", &[], None);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":3:3:"), "{err}");
}

#[test]
fn unknown_key_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), "[job.a]\nkind = muckenhoupt\nmeasure = gaussian\ncolour = red\n", &[], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key 'colour'"));
}

#[test]
fn omega_table_rows() {
    let tmp = TempDir::new().unwrap();
    let cfg = "[job.id]\nkind = omega-table\nweight = identity\nfrom = 0\nto = 2\nstep = 1\n\n\
               [job.sq]\nkind = omega-table\nweight = omega_p:p=2\nfrom = 0\nto = 3\nstep = 0.5\n";
    let out = run(tmp.path(), cfg, &[], None);
    assert_eq!(out.status.code(), Some(0));
    let id = read(tmp.path(), "id.csv");
    assert!(id.starts_with("x,omega,omega_prime,omega_inv,alpha_omega\n"));
    let one: Vec<f64> = rows(&id)[1][1..].iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(one, vec![1.0, 1.0, 1.0, 1.0]);
    let sq = rows(&read(tmp.path(), "sq.csv"));
    let at3: Vec<f64> = sq[6].iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(at3, vec![3.0, 9.0, 6.0, 3.0, 9.0]);
}

#[test]
fn failing_job_exits_two() {
    let tmp = TempDir::new().unwrap();
    let cfg = "[job.t]\nkind = tci\nmeasure = nu_p:p=1\na = 50\ngrid_points = 40\nfamily = tilts\n";
    let out = run(tmp.path(), cfg, &[], None);
    assert_eq!(out.status.code(), Some(2));
    let r = rows(&read(tmp.path(), "summary.csv"));
    assert_eq!(r[0][4], "fail");
    assert!(r[0][7].parse::<f64>().unwrap() > 1.0);
}

#[test]
fn low_resolution_is_inconclusive() {
    let tmp = TempDir::new().unwrap();
    let cfg = "[job.d]\nkind = deviation-mc\nmeasure = nu_p:p=1\nn = 4\nC = 4\nt_grid = 6\nsamples = 200\nseed = 1\n";
    let out = run(tmp.path(), cfg, &[], None);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_seed_is_an_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = "[job.d]\nkind = deviation-mc\nmeasure = nu_p:p=1\nn = 4\nC = 4\n";
    let out = run(tmp.path(), cfg, &[], None);
    assert_eq!(out.status.code(), Some(1));
}

const MC: &str = "[job.dev]\nkind = deviation-mc\nmeasure = nu_p:p=1\nn = 5\nC = 4\nt_grid = 0, 0.5, 1\nsamples = 30000\nseed = 11\n\n\
                  [job.enl]\nkind = enlargement-mc\nmeasure = nu_p:p=1\nn = 3\nC = 4\nh_grid = 10, 1000\nsamples = 30000\nseed = 12\n\n\
                  [job.tab]\nkind = omega-table\nweight = omega_T:r=1.5\nto = 4\nstep = 0.25\n";

#[test]
fn reports_independent_of_workers() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    assert_eq!(run(a.path(), MC, &["--workers", "1"], None).status.code(), Some(0));
    assert_eq!(run(b.path(), MC, &["--workers", "3", "--verbose"], None).status.code(), Some(0));
    for f in ["summary.csv", "dev.json", "dev.csv", "enl.json", "enl.csv", "tab.json", "tab.csv"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
}

#[test]
fn seed_override_replaces_job_seeds() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    assert_eq!(run(a.path(), MC, &[], None).status.code(), Some(0));
    assert_eq!(run(b.path(), MC, &[], Some("99")).status.code(), Some(0));
    let dev = read(b.path(), "dev.json");
    assert!(dev.contains("\"seed\": 99"), "{dev}");
    assert_ne!(read(a.path(), "dev.csv"), read(b.path(), "dev.csv"));

    let c = TempDir::new().unwrap();
    assert_eq!(run(c.path(), MC, &[], Some("x")).status.code(), Some(1));
}
