use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use optocorr::cli::{read_csv, CSV_HEADER};
use tempfile::TempDir;

const POINT: &str = r#"
mode = "point"
kappa1 = "2pi*215e3"
kappa2 = "2pi*215e3"
gamma = "2pi*140"
C1 = 0
r = 0.0
nth = 0.0
"#;

fn optocorr(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optocorr"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn pair_line<'a>(text: &'a str, pair: &str) -> Vec<&'a str> {
    text.lines()
        .find(|l| l.starts_with(&format!("{pair},")))
        .unwrap_or_else(|| panic!("no {pair} row in\n{text}"))
        .split(',')
        .collect()
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn vacuum_point_has_no_correlations() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "p.toml", POINT);
    let out = optocorr(tmp.path(), &["--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    for pair in ["mo1", "mo2", "o1o2"] {
        let row = pair_line(&text, pair);
        let eta: f64 = row[1].parse().unwrap();
        let discord: f64 = row[3].parse().unwrap();
        assert!((eta - 0.5).abs() < 1e-12, "{pair}: {eta}");
        assert_eq!(row[2], "false");
        assert!(discord.abs() < 1e-9, "{pair}: {discord}");
    }
}

#[test]
fn squeeze_override_entangles_optics() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "p.toml", POINT);
    let out = optocorr(tmp.path(), &["--config", cfg.to_str().unwrap(), "--r", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let row = pair_line(&text, "o1o2");
    let eta: f64 = row[1].parse().unwrap();
    assert!((eta - (-2.0f64).exp() / 2.0).abs() < 1e-10, "{eta}");
    assert_eq!(row[2], "true");
}

#[test]
fn config_errors_map_to_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        (format!("{POINT}\nbogus = 1\n"), 52, "UnknownKey"),
        (POINT.replace("gamma = \"2pi*140\"\n", ""), 53, "MissingKey"),
        (POINT.replace("nth = 0.0", "nth = \"2pi*1\""), 51, "UnitError"),
        ("mode = \"point\"\nkappa1 = [".to_string(), 50, "ParseError"),
    ];
    for (i, (text, code, kind)) in cases.iter().enumerate() {
        let cfg = write(tmp.path(), &format!("bad{i}.toml"), text);
        let out = optocorr(tmp.path(), &["--config", cfg.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(*code), "{kind}: {}", stderr(&out));
        let err = stderr(&out);
        assert!(err.starts_with(&format!("error kind={kind} code={code}: ")), "{err}");
    }
}

#[test]
fn unknown_preset_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let out = optocorr(tmp.path(), &["--preset", "fig9"]);
    assert_eq!(out.status.code(), Some(43), "{}", stderr(&out));
}

#[test]
fn preset_writes_one_csv_per_curve() {
    let tmp = TempDir::new().unwrap();
    let out = optocorr(tmp.path(), &["--preset", "fig2", "--points", "40", "--out", "fig2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let mut files: Vec<_> = fs::read_dir(tmp.path().join("fig2")).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert_eq!(files.len(), 5);
    for f in &files {
        let text = fs::read_to_string(f).unwrap();
        assert!(text.starts_with("# optocorr "));
        let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, CSV_HEADER.join(","));
        let rows = read_csv(f).unwrap();
        assert_eq!(rows.len(), 40);
        assert!(rows.iter().all(|r| r.swept_var == "T" && r.stable));
    }
}

#[test]
fn invalid_sweep_leaves_no_csv() {
    let tmp = TempDir::new().unwrap();
    let text = r#"
mode = "sweep"
var = "C1"
lo = 10
hi = 1
kappa1 = "2pi*215e3"
kappa2 = "2pi*215e3"
gamma = "2pi*140"
r = 0.5
nth = 1e-3
"#;
    let cfg = write(tmp.path(), "s.toml", text);
    let out = optocorr(tmp.path(), &["--config", cfg.to_str().unwrap(), "--out", "s.csv"]);
    assert!(!out.status.success());
    let left: Vec<_> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "s.toml")
        .collect();
    assert!(left.is_empty(), "{left:?}");
}

#[test]
fn sweep_output_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let cfg = configs_dir().join("sweep_T.toml");
    let cfg = cfg.to_str().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = optocorr(tmp.path(), &["--config", cfg, "--points", "60", "--out", name]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let (a, b) = (fs::read(tmp.path().join("a.csv")).unwrap(), fs::read(tmp.path().join("b.csv")).unwrap());
    assert_eq!(a, b);
}

#[test]
fn shipped_configs_run() {
    let tmp = TempDir::new().unwrap();
    for name in ["point.toml", "physical_reference.toml"] {
        let cfg = configs_dir().join(name);
        let out = optocorr(tmp.path(), &["--config", cfg.to_str().unwrap()]);
        assert!(out.status.success(), "{name}: {}", stderr(&out));
    }
    let cfg = configs_dir().join("preset_fig3.toml");
    let out = optocorr(tmp.path(), &["--config", cfg.to_str().unwrap(), "--points", "20", "--out", "fig3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(fs::read_dir(tmp.path().join("fig3")).unwrap().count(), 3);
}

#[test]
fn physical_convert_reports_cooperativity() {
    let tmp = TempDir::new().unwrap();
    let cfg = configs_dir().join("physical_reference.toml");
    let out = optocorr(tmp.path(), &["--config", cfg.to_str().unwrap()]);
    let text = stdout(&out);
    let c1: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("C1 = "))
        .expect("C1 line")
        .parse()
        .unwrap();
    assert!(c1 > 0.0);
    assert!(text.contains("note: computed C1"));
}
