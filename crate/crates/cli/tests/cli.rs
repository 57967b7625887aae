use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use xychain_cli::config::{MethodName, RawConfig, SweepConfig};
use xychain_cli::grid::Grid;
use xychain_cli::sweep::run_sweep;

fn xychain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xychain"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data_lines(text: &str) -> Vec<String> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

fn cell(line: &str, i: usize) -> String {
    line.split(',').nth(i).unwrap().to_string()
}

#[test]
fn sweep_output_is_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "3"] {
        let path = dir.path().join(format!("chi_{workers}.csv"));
        let out = xychain(&[
            "sweep",
            "--quantity",
            "chi_field",
            "--n",
            "50",
            "--g",
            "0.9:1.1:9",
            "--beta",
            "2,10,75",
            "--method",
            "exact,ppa",
            "--workers",
            workers,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        outputs.push(fs::read(&path).unwrap());
    }
    let text = |b: &[u8]| String::from_utf8(b.to_vec()).unwrap();
    let (a, b) = (text(&outputs[0]), text(&outputs[1]));
    assert_eq!(data_lines(&a), data_lines(&b));
    // Only the echoed worker count and output path differ in the metadata.
    let meta = |t: &str| -> Vec<String> {
        t.lines()
            .filter(|l| l.starts_with('#') && !l.contains("workers") && !l.contains("out ="))
            .map(str::to_string)
            .collect()
    };
    assert_eq!(meta(&a), meta(&b));

    let rows = data_lines(&a);
    assert_eq!(rows[0], "N,gamma,g,beta,method,quantity,value,step,error");
    assert_eq!(rows.len(), 1 + 9 * 3 * 2);
    // Ordering: g outer, then beta, then method.
    assert_eq!(cell(&rows[1], 4), "exact");
    assert_eq!(cell(&rows[2], 4), "ppa");
    assert_eq!(cell(&rows[1], 3), cell(&rows[2], 3));
    assert_ne!(cell(&rows[1], 3), cell(&rows[3], 3));
    assert_eq!(cell(&rows[1], 2), cell(&rows[6], 2));
    // Seventeen significant digits.
    let value = cell(&rows[1], 6);
    let mantissa = value.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{value}");
}

#[test]
fn toml_config_with_flag_override_and_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cv.toml");
    fs::write(
        &config,
        "quantity = \"cv\"\nmethods = [\"exact\", \"ppa\", \"tla\"]\nn = [50, 100]\ng = 1.0\nbeta = \"1:1000:5:log\"\nformat = \"csv\"\n",
    )
    .unwrap();
    let out_path = dir.path().join("cv.jsonl");
    let out = xychain(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--format",
        "jsonl",
        "--n",
        "50",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&out_path).unwrap();
    let lines: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(lines[0].get("metadata").is_some());
    let rows = &lines[1..];
    assert_eq!(rows.len(), 5 * 3);
    assert!(rows.iter().all(|r| r["N"] == 50));
    let methods: Vec<&str> = rows[..3]
        .iter()
        .map(|r| r["method"].as_str().unwrap())
        .collect();
    assert_eq!(methods, ["exact", "ppa", "tla"]);
    let last = rows.last().unwrap();
    assert_eq!(last["beta"].as_f64().unwrap(), 1000.0);
    assert!(rows.iter().all(|r| r["value"].as_f64().unwrap() > 0.0));
}

#[test]
fn usage_errors_exit_one_and_name_the_field() {
    for (args, field) in [
        (
            vec![
                "sweep",
                "--quantity",
                "cv",
                "--n",
                "7",
                "--g",
                "1",
                "--beta",
                "1",
                "--method",
                "exact",
            ],
            "n",
        ),
        (
            vec![
                "sweep",
                "--quantity",
                "cv",
                "--n",
                "20",
                "--g",
                "1",
                "--beta",
                "1",
                "--method",
                "oracle",
            ],
            "methods",
        ),
        (
            vec![
                "sweep",
                "--quantity",
                "cv",
                "--n",
                "8",
                "--gamma",
                "0.5",
                "--g",
                "1",
                "--beta",
                "1",
                "--method",
                "tla",
            ],
            "methods",
        ),
        (
            vec![
                "sweep",
                "--quantity",
                "cv",
                "--n",
                "8",
                "--g",
                "1",
                "--method",
                "exact",
            ],
            "beta",
        ),
        (
            vec![
                "sweep",
                "--quantity",
                "heat",
                "--n",
                "8",
                "--g",
                "1",
                "--beta",
                "1",
                "--method",
                "exact",
            ],
            "quantity",
        ),
        (vec!["verify", "--max-n", "14"], "max-n"),
    ] {
        let out = xychain(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(&format!("invalid {field}")), "{args:?}: {err}");
    }
    assert_eq!(xychain(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(xychain(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_passes_and_corrupted_convention_fails_on_self_fidelity() {
    let good = xychain(&["verify", "--max-n", "6"]);
    let text = String::from_utf8_lossy(&good.stdout);
    assert_eq!(good.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 6);

    let bad = xychain(&["verify", "--max-n", "6", "--corrupt-energy-convention"]);
    assert_eq!(bad.status.code(), Some(3));
    let text = String::from_utf8_lossy(&bad.stdout);
    let self_line = text.lines().find(|l| l.contains("self-fidelity")).unwrap();
    assert!(self_line.starts_with("FAIL"), "{text}");
}

#[test]
fn reproduce_writes_table_and_gnuplot_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = xychain(&[
        "reproduce",
        "fig3",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("fig3.csv")).unwrap();
    let rows = data_lines(&csv);
    assert_eq!(rows[0], "beta,chi_exact,chi_ppa,chi_ground_even");
    assert!(rows[1..]
        .iter()
        .all(|r| r.ends_with("7.6562500000000000e1")));
    let gp = fs::read_to_string(dir.path().join("fig3.gp")).unwrap();
    assert!(gp.contains("plot 'fig3.csv' using 1:2"));
    assert!(Path::new(&dir.path().join("fig3.gp")).exists());
}

fn methods_strategy() -> impl Strategy<Value = Vec<MethodName>> {
    proptest::sample::subsequence(MethodName::ALL.to_vec(), 1..=5).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_row_carries_a_requested_method(methods in methods_strategy(), quantity in 0usize..5) {
        let quantity = ["fidelity", "chi_field", "xi_thermal", "cv", "z"][quantity];
        let raw = RawConfig {
            quantity: Some(quantity.to_string()),
            methods: Some(methods.iter().map(|m| m.name().to_string()).collect()),
            n: Some(Grid::List(vec![4.0, 6.0])),
            g: Some(Grid::List(vec![0.7, 1.0])),
            beta: Some(Grid::Value(3.0)),
            ref_g: Some(1.1),
            ..RawConfig::default()
        };
        let config = SweepConfig::try_from(raw).unwrap();
        let rows = run_sweep(&config).unwrap();
        prop_assert_eq!(rows.len(), config.row_count());
        for (i, row) in rows.iter().enumerate() {
            prop_assert_eq!(row.method, methods[i % methods.len()]);
        }
    }
}
