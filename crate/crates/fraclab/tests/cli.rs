use std::path::Path;
use std::process::Command;

fn fraclab(args: &[&str]) -> (Option<i32>, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_fraclab")).args(args).output().unwrap();
    (
        out.status.code(),
        String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr),
    )
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn exit_codes_follow_thresholds() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let out = out.to_str().unwrap();
    let good = write(
        tmp.path(),
        "good.toml",
        "decades = 4\n[ifs]\nratio = \"1/3\"\ntranslations = [0, \"2/3\"]\n[thresholds]\nmax_abs_error = 0.03\n",
    );
    let (code, text) = fraclab(&["estimate", "--config", &good, "--out", out]);
    assert_eq!(code, Some(0), "{text}");
    assert!(text.contains("PASS"));
    for f in ["estimate.json", "estimate_boxcount.csv", "estimate_loglog.dat"] {
        assert!(Path::new(out).join(f).exists(), "{f}");
    }

    let strict = write(
        tmp.path(),
        "strict.toml",
        "[ifs]\nratio = \"1/3\"\ntranslations = [0, \"2/3\"]\n[thresholds]\nmin_estimate = 0.9\n",
    );
    let (code, text) = fraclab(&["estimate", "--config", &strict, "--out", out]);
    assert_eq!(code, Some(1), "{text}");
    assert!(text.contains("failed estimate"));

    let broken = write(tmp.path(), "broken.toml", "[ifs]\nratio = 2\ntranslations = [0]\n");
    let (code, text) = fraclab(&["estimate", "--config", &broken, "--out", out]);
    assert_eq!(code, Some(2), "{text}");
}

#[test]
fn unknown_experiments_are_rejected() {
    let (code, text) = fraclab(&["nosuch", "--config", "x.toml"]);
    assert_eq!(code, Some(2));
    assert!(text.contains("overlap-demo"), "{text}");
}

#[test]
fn csv_and_dat_outputs_are_well_formed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/sweep.toml");
    let out = tmp.path().join("sweep");
    let (code, text) = fraclab(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "3",
    ]);
    assert_eq!(code, Some(0), "{text}");
    let mut rdr = csv::Reader::from_path(out.join("sweep_directions.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["nx", "ny", "nz", "slope", "r_squared"]
    );
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 500);
    let hist = std::fs::read_to_string(out.join("sweep_histogram.dat")).unwrap();
    let total: usize = hist
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(' ').nth(1).unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, 500);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(json["seed"], 3);
}
