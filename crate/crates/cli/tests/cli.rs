use std::path::Path;
use std::process::Command;

fn rdr() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rdr"));
    c.env_remove("RDR_OUT_DIR").env_remove("RDR_WORKERS");
    c
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    let mut rd = csv::Reader::from_path(path).unwrap();
    rd.records().map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect()).collect()
}

const RABI: &str = r#"
schema_version = 1
experiment = "vacuum_rabi"
[drives]
abar_m = [1.0]
[sweep]
points = 121
"#;

#[test]
fn vacuum_rabi_writes_oscillating_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "rabi.toml", RABI);
    let out = dir.path().join("out");
    let st = rdr().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let rows = csv_rows(&out.join("point00_rabi.csv"));
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));
    let header = csv::Reader::from_path(out.join("point00_rabi.csv")).unwrap().headers().unwrap().clone();
    let z = header.iter().position(|h| h == "sigma_z").unwrap();
    let sz: Vec<f64> = rows.iter().map(|r| r[z]).collect();
    let crossings = sz.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    assert!(crossings >= 4, "{crossings}");
    let manifest = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"vacuum_rabi\"") && manifest.contains("code_version"));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.starts_with("point,quantity,value,std_error,unit,frame"));
    assert!(summary.contains("MHz") && summary.contains("effective-jc"));
}

const THERMAL: &str = r#"
schema_version = 1
experiment = "thermal_reset"
seed = 3
[drives]
abar_m_over_kappa_chi = [0.25, 0.5, 0.75]
[prep]
nbar = 1.0
samples = 100
[sweep]
hold_s = 4.0e-6
tomography_step_s = 5.0e-7
[truncation]
readout_dim = 3
"#;

#[test]
fn thermal_sweep_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "thermal.toml", THERMAL);
    let before = std::fs::read(&cfg).unwrap();
    for run in ["a", "b"] {
        let st = rdr().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join(run)).output().unwrap();
        assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    }
    assert_eq!(std::fs::read(&cfg).unwrap(), before);
    let names: Vec<String> = std::fs::read_dir(dir.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names.iter().filter(|n| n.ends_with("_trajectory.csv")).count(), 3);
    for n in names.iter().filter(|n| n.ends_with(".csv")) {
        let a = std::fs::read(dir.path().join("a").join(n)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(n)).unwrap();
        assert_eq!(a, b, "{n}");
    }
    let summary = std::fs::read_to_string(dir.path().join("a/summary.csv")).unwrap();
    for point in 0..3 {
        assert!(summary.lines().any(|l| l.starts_with(&format!("{point},coupling_m,"))));
    }
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "rabi.toml", RABI);
    let out = dir.path().join("env-out");
    let st = rdr().args(["simulate", "--config"]).arg(&cfg).env("RDR_OUT_DIR", &out).env("RDR_WORKERS", "1").output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    assert!(out.join("manifest.json").exists());
}

#[test]
fn bad_config_gives_error_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "schema_version = 1\nexperiment = \"thermal_reset\"\n[drives]\n");
    let st = rdr().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(!st.status.success());
    let rec: serde_json::Value = serde_json::from_slice(&st.stderr).unwrap();
    assert_eq!(rec["status"], "error");
    assert!(rec["message"].as_str().unwrap().contains("drives"));
}

#[test]
fn tomo_on_thermal_samples() {
    let dir = tempfile::tempdir().unwrap();
    let nbar: f64 = 1.5;
    let mut text = String::from("re_alpha,im_alpha,re_C,im_C\n");
    for k in -20..=20 {
        let r = 0.05 * k as f64;
        let c = (-(nbar + 0.5) * r * r).exp();
        text += &format!("{r},0,{c},0\n0,{r},{c},0\n");
    }
    let input = write(dir.path(), "samples.csv", &text);
    let st = rdr().args(["tomo", "--input"]).arg(&input).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let out = String::from_utf8(st.stdout).unwrap();
    let line = out.lines().find(|l| l.starts_with("nbar")).unwrap();
    let value: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((value - nbar).abs() < 0.02 * nbar, "{out}");
}

#[test]
fn fit_recovers_planted_curve() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, g, t0) = (0.05, 6.0, 0.25, 20.0);
    let mut text = String::from("time_us,nbar\n");
    for k in 0..=60 {
        let t = k as f64;
        let y = if t < t0 { a + b + b * g * (t0 - t) } else { a + b * (-g * (t - t0)).exp() };
        text += &format!("{t},{y}\n");
    }
    let input = write(dir.path(), "curve.csv", &text);
    let out = dir.path().join("fit");
    let st = rdr().args(["fit", "--input"]).arg(&input).arg("--out").arg(&out).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let mut rd = csv::Reader::from_path(out.join("fit.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    let get = |name: &str| -> f64 { rows.iter().find(|r| &r[0] == name).unwrap()[1].parse().unwrap() };
    assert!((get("gamma") - g).abs() < 1e-6);
    assert!((get("t0") - t0).abs() < 1e-6);
}

#[test]
fn calibrate_on_simulated_ramsey() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "ramsey.toml",
        "schema_version = 1\nexperiment = \"driven_ramsey\"\n[sweep]\nsettings = [1.0, 2.0, 3.0]\npoints = 401\n",
    );
    let out = dir.path().join("ramsey");
    let st = rdr().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let st = rdr().args(["calibrate", "--input"]).arg(out.join("stark_shifts.csv")).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let text = String::from_utf8(st.stdout).unwrap();
    let line = text.lines().find(|l| l.starts_with("eps_scale ")).unwrap();
    let scale: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    // Device default: 100 rad/us per unit setting.
    assert!((scale - 100.0).abs() < 3.0, "{text}");
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let cfg = rdr_cli::config::parse_config(&text).unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
        cfg.resolve(None, None).unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
        n += 1;
    }
    assert!(n >= 6);
}
