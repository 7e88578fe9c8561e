//! Front-end behaviour: table ingestion in both formats, config headers in
//! outputs, and scan content sanity.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dfp"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dfp-cli-io-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const DA_CSV: &str = "\
fiducial,outcome,probability
H,plus,0.5
H,minus,0.5
V,plus,0.5
V,minus,0.5
D,plus,1.0
D,minus,0.0
A,plus,0.0
A,minus,1.0
R,plus,0.5
R,minus,0.5
L,plus,0.5
L,minus,0.5
";

fn da_json() -> String {
    let mut records = Vec::new();
    for line in DA_CSV.lines().skip(1) {
        let mut parts = line.split(',');
        let (f, o, p) = (
            parts.next().unwrap(),
            parts.next().unwrap(),
            parts.next().unwrap(),
        );
        records.push(format!(
            "{{\"fiducial\":\"{f}\",\"outcome\":\"{o}\",\"probability\":{p}}}"
        ));
    }
    format!("[{}]", records.join(","))
}

fn strip_source_line(contents: &str) -> String {
    contents
        .lines()
        .filter(|l| !l.starts_with("# source"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn csv_and_json_tables_give_identical_scans() {
    let csv_path = scratch("da.csv");
    let json_path = scratch("da.json");
    fs::write(&csv_path, DA_CSV).unwrap();
    fs::write(&json_path, da_json()).unwrap();

    let out_csv = scratch("scan-from-csv.csv");
    let out_json = scratch("scan-from-json.csv");
    for (table, out) in [(&csv_path, &out_csv), (&json_path, &out_json)] {
        let output = bin()
            .args([
                "fisher-scan",
                "--table",
                table.to_str().unwrap(),
                "--probe",
                "0,1,0",
                "--phi",
                "0:0.2:0.1",
                "-o",
                out.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(
            output.status.success(),
            "{}",
            String::from_utf8_lossy(&output.stderr)
        );
    }
    let a = strip_source_line(&fs::read_to_string(&out_csv).unwrap());
    let b = strip_source_line(&fs::read_to_string(&out_json).unwrap());
    assert_eq!(a, b, "CSV- and JSON-sourced scans must agree");
    // the ideal D/A projection carries unit phase information for this probe
    let data_line = a.lines().find(|l| l.starts_with("0,")).unwrap();
    let f: f64 = data_line.split(',').nth(1).unwrap().parse().unwrap();
    assert!((f - 1.0).abs() < 1e-9, "F = {f}");
}

#[test]
fn outputs_embed_the_resolved_config() {
    let out = scratch("header-check.csv");
    let output = bin()
        .args([
            "wfh-scan",
            "--n-bins",
            "2",
            "--gamma",
            "0.8",
            "--alpha",
            "0:1:0.5",
            "-o",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let contents = fs::read_to_string(&out).unwrap();
    for needle in [
        "# dfp wfh-scan",
        "# n_bins = 2",
        "# gamma = 0.8",
        "# phi = 0.1",
        "# fd_step",
    ] {
        assert!(contents.contains(needle), "missing {needle:?} in header");
    }
    let header = contents.lines().find(|l| l.starts_with("alpha,")).unwrap();
    assert_eq!(
        header.matches(",f_").count(),
        9,
        "2-bin detector has 9 outcome columns"
    );
}

#[test]
fn optimize_probe_reports_and_exports_scan() {
    let report = scratch("opt-report.csv");
    let scan = scratch("opt-scan.csv");
    let output = bin()
        .args([
            "optimize-probe",
            "--model",
            "zx",
            "--params",
            "phi-chi",
            "--grid",
            "30x60",
            "--scan-output",
            scan.to_str().unwrap(),
            "-o",
            report.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let report = fs::read_to_string(&report).unwrap();
    let line = report.lines().last().unwrap();
    let eff_phi: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
    let eff_chi: f64 = line.split(',').nth(5).unwrap().parse().unwrap();
    assert!((eff_phi - 0.5).abs() < 1e-3 && (eff_chi - 0.5).abs() < 1e-3);
    let scan = fs::read_to_string(&scan).unwrap();
    assert!(scan.lines().count() > 30 * 60, "full scan retained");
}

#[test]
fn tomo_compare_routes_track_each_other() {
    let out = scratch("tomo-routes.csv");
    let output = bin()
        .args([
            "tomo-compare",
            "--povm",
            "zx",
            "--noise",
            "1e-3",
            "--seed",
            "3",
            "-o",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let contents = fs::read_to_string(&out).unwrap();
    for line in contents
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("phi,"))
    {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let (f_dfp, f_tomo) = (cells[1], cells[6]);
        assert!(
            (f_dfp - f_tomo).abs() <= 0.05 * f_dfp.abs(),
            "routes diverge: {f_dfp} vs {f_tomo}"
        );
    }
}
