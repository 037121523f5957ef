use std::process::{Command, Output};

fn mspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mspec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV report (comments and header dropped).
fn rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

const REFERENCE_ENERGIES: [f64; 5] = [
    2.5626420686238194,
    3.9182131882998398,
    4.9117898237673361,
    5.7357370354215595,
    6.4553592284429990,
];

#[test]
fn spectrum_reproduces_table() {
    let o = mspec(&[
        "spectrum",
        "--preset",
        "p2",
        "--hbar",
        "2pi",
        "--levels",
        "5",
        "--no-timestamp",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&o);
    assert_eq!(r.len(), 5);
    for (row, want) in r.iter().zip(REFERENCE_ENERGIES) {
        assert_eq!(row.len(), 3);
        let e: f64 = row[1].parse().unwrap();
        let err: f64 = row[2].parse().unwrap();
        assert!((e - want).abs() < 1e-7 && err < 1e-7);
    }
}

#[test]
fn input_errors_exit_2() {
    let o = mspec(&["spectrum", "--preset", "p2", "--hbar", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("hbar must be positive"));
    assert_eq!(mspec(&["spectrum", "--preset", "nonesuch"]).status.code(), Some(2));
    assert_eq!(mspec(&["trace", "--order", "4"]).status.code(), Some(2));
    assert_eq!(mspec(&["spectrum", "--hbar", "twopi"]).status.code(), Some(2));
    assert_eq!(
        mspec(&["validate-bps", "--file", "/nonexistent/table.bps"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn numerical_errors_exit_3() {
    let o = mspec(&["xi", "--kappa-min", "2", "--points", "3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("convergence disk"));
}

#[test]
fn corrupted_bps_file_is_rejected() {
    let shipped = include_str!("../../core/data/local_p2.bps");
    let dir = std::env::temp_dir().join(format!("mspec-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.bps");
    std::fs::write(&bad, shipped.replace("refined 1 0 2 1", "refined 1 0 2 2")).unwrap();
    let o = mspec(&["validate-bps", "--file", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let good = dir.join("good.bps");
    std::fs::write(&good, shipped).unwrap();
    assert!(mspec(&["validate-bps", "--file", good.to_str().unwrap()])
        .status
        .success());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn deterministic_output_without_timestamp() {
    let a = mspec(&["qc", "--no-timestamp"]);
    let b = mspec(&["qc", "--no-timestamp"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let t = mspec(&["qc"]);
    assert!(stdout(&t).contains("# timestamp_unix = "));
    assert!(!stdout(&a).contains("timestamp"));
    // 17 significant digits
    let e0 = &rows(&a)[0][1];
    assert_eq!(e0.split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
}

#[test]
fn json_output_is_one_object() {
    let o = mspec(&["ztrace", "--n-max", "2", "--format", "json", "--no-timestamp"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["command"], "ztrace");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert!(r["error"].as_f64().unwrap() >= 0.0);
    }
    let z1 = rows.iter().find(|r| r["N"] == 1 && r["method"] == "airy").unwrap();
    assert!((z1["value"].as_f64().unwrap() - 1.0 / 9.0).abs() < 1e-12);
}

#[test]
fn crosscheck_agrees() {
    let o = mspec(&["crosscheck", "--preset", "p2", "--no-timestamp"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("# agreement = pass"));
    let last = rows(&o).pop().unwrap();
    assert_eq!(last[0], "max_delta");
    assert!(last[3].parse::<f64>().unwrap() < 1e-5);
    assert_eq!(mspec(&["crosscheck", "--preset", "f0"]).status.code(), Some(2));
}

#[test]
fn output_file_and_symbolic_hbar() {
    let path = std::env::temp_dir().join(format!("mspec-trace-{}.csv", std::process::id()));
    let o = mspec(&[
        "trace",
        "--hbar",
        "2pi/3",
        "--kind",
        "power",
        "--order",
        "1",
        "--no-timestamp",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    let row = text.lines().last().unwrap();
    let v: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((v - 0.46045214817283).abs() < 1e-10);
}

#[test]
fn volume_and_geometry_file() {
    let dir = std::env::temp_dir().join(format!("mspec-geom-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let g = dir.join("p2.geom");
    std::fs::write(
        &g,
        "# local P2\nname = p2file\nvertices = (1,0) (0,1) (-1,-1)\ncoefficients = 1 1 1\n",
    )
    .unwrap();
    let o = mspec(&[
        "volume",
        "--geometry",
        g.to_str().unwrap(),
        "--energies",
        "40",
        "--levels",
        "0",
        "--no-timestamp",
    ]);
    std::fs::remove_dir_all(&dir).ok();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&o);
    assert_eq!(r[0][2].parse::<f64>().unwrap(), 4.5);
    let v: f64 = r[1][2].parse().unwrap();
    assert!((v / 1600.0 - 4.5).abs() < 0.045);
}
