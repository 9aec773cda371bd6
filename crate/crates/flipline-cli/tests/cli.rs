//! The `flipline` binary end to end: file naming, determinism, CSV and SVG
//! well-formedness, error records and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use flipline_cli::table::hash_of_csv;
use flipline_cli::{parse_config, write_outputs, Outputs};

fn flipline(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flipline"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("FLIPLINE_THREADS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.json");
    fs::write(&path, text).unwrap();
    path
}

fn listing(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    v.sort();
    v
}

const RATES: &str = r#"{"command":"rates","params":{"mu":0.2,"alpha_d":0.1,"lambda":0.05,"kappa":0.01}}"#;

#[test]
fn reruns_are_byte_identical_and_named_by_hash() {
    let cfg_dir = tempfile::tempdir().unwrap();
    let path = write_config(cfg_dir.path(), RATES);
    let hash = parse_config(RATES).unwrap().hash();
    let mut texts = Vec::new();
    for threads in [None, Some("1")] {
        let out = tempfile::tempdir().unwrap();
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_flipline"));
        cmd.args(["rates", "--config"]).arg(&path).arg("--out").arg(out.path());
        match threads {
            Some(t) => cmd.env("FLIPLINE_THREADS", t),
            None => cmd.env_remove("FLIPLINE_THREADS"),
        };
        let o = cmd.output().unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let files = listing(out.path());
        assert_eq!(files, vec![format!("rates-{}.csv", &hash[..16])]);
        let printed = String::from_utf8(o.stdout).unwrap();
        assert!(printed.trim().ends_with(&files[0]));
        texts.push(fs::read(out.path().join(&files[0])).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    let csv = String::from_utf8(texts.pop().unwrap()).unwrap();
    assert_eq!(hash_of_csv(&csv), Some(hash.as_str()));
}

#[test]
fn csv_values_round_trip() {
    let out = tempfile::tempdir().unwrap();
    let o = flipline(&["landscape", "--mu", "0.2", "--alpha-d", "0.1", "--lambda", "0.05", "--kappa", "0.01"], out.path());
    assert!(o.status.success());
    let name = &listing(out.path())[0];
    let csv = fs::read_to_string(out.path().join(name)).unwrap();
    let mut data = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = data.next().unwrap().split(',').collect();
    let row: Vec<&str> = data.next().unwrap().split(',').collect();
    assert_eq!(header.len(), row.len());
    let k = header.iter().position(|h| h.starts_with("g_c")).unwrap();
    let gc: f64 = row[k].parse().unwrap();
    assert_eq!(gc, flipline::landscape::critical_quasienergy(&flipline::ModelParams::classical(0.2, 0.1)).0);
    // overrides and the equivalent document hash alike
    let doc = r#"{"command":"landscape","params":{"mu":0.2,"alpha_d":0.1,"lambda":0.05,"kappa":0.01}}"#;
    assert_eq!(hash_of_csv(&csv), Some(parse_config(doc).unwrap().hash().as_str()));
}

fn svg_ids(text: &str) -> Vec<String> {
    let doc = roxmltree::Document::parse(text).expect("well-formed SVG");
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    assert!(doc.descendants().any(|n| n.tag_name().name() == "metadata"));
    doc.descendants()
        .filter(|n| n.attribute("class") == Some("curve"))
        .map(|n| {
            let has_ink = n.attribute("d").is_some_and(|d| d.matches('L').count() >= 1) || n.children().any(|c| c.is_element());
            assert!(has_ink, "empty curve {:?}", n.attribute("id"));
            n.attribute("id").unwrap().to_string()
        })
        .collect()
}

#[test]
fn figures_are_valid_svg_with_every_curve() {
    let cases: [(&str, &[&str], Vec<&str>); 3] = [
        ("fig5", &["--mu", "0.2", "--alpha-d", "0.1"], vec!["curve-im_tau2", "curve-r_prime"]),
        ("fig6", &["--mu", "0.5"], vec!["curve-deep_mu0.5", "curve-shallow_mu0.5"]),
        ("fig7", &[], vec!["curve-closed_form_below", "curve-closed_form_above", "curve-finite_difference"]),
    ];
    for (fig, extra, want) in cases {
        let out = tempfile::tempdir().unwrap();
        let mut args = vec!["figure", fig];
        args.extend_from_slice(extra);
        let o = flipline(&args, out.path());
        assert!(o.status.success(), "{fig}: {}", String::from_utf8_lossy(&o.stderr));
        let files = listing(out.path());
        assert_eq!(files.len(), 2, "{files:?}");
        let svg = files.iter().find(|f| f.ends_with(".svg")).unwrap();
        assert!(svg.starts_with(fig));
        let text = fs::read_to_string(out.path().join(svg)).unwrap();
        let ids = svg_ids(&text);
        for id in want {
            assert!(ids.iter().any(|x| x == id), "{fig}: {id} missing from {ids:?}");
        }
        let csv = fs::read_to_string(out.path().join(files.iter().find(|f| f.ends_with(".csv")).unwrap())).unwrap();
        let hash = hash_of_csv(&csv).unwrap();
        assert!(text.contains(hash), "{fig}: svg metadata lacks the config hash");
    }
}

fn error_record(o: &Output) -> serde_json::Value {
    let text = String::from_utf8(o.stderr.clone()).unwrap();
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("{e}: {text}"))
}

#[test]
fn malformed_json_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "{\n  \"command\": \"rates\",\n  \"params\": {\"mu\": 0.2,, }\n}");
    let out = dir.path().join("out");
    let o = flipline(&["rates", "--config", path.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    let rec = error_record(&o);
    assert_eq!(rec["error"], "ParseError");
    assert_eq!(rec["line"], 3);
    assert!(!out.exists());
}

#[test]
fn all_violations_are_reported_together() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), r#"{"command":"sweep","params":{"mu":0.2,"lambda":-1},"sweep":{"parameter":"nu","count":1}}"#);
    let o = flipline(&["sweep", "--config", path.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let rec = error_record(&o);
    assert_eq!(rec["error"], "ValidationError");
    let v: Vec<String> = rec["violations"].as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect();
    for key in ["params.alpha_d", "params.kappa", "params.lambda", "sweep.parameter", "sweep.count", "sweep.start"] {
        assert!(v.iter().any(|s| s.starts_with(key)), "{key} not in {v:?}");
    }
}

#[test]
fn compute_failures_exit_one_and_leave_nothing() {
    let out = tempfile::tempdir().unwrap();
    // bias beyond the bifurcation: only one well
    let o = flipline(&["rates", "--mu", "0.2", "--alpha-d", "0.9", "--lambda", "0.05", "--kappa", "0.01"], out.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_record(&o)["error"], "SingleWellRegime");
    assert!(listing(out.path()).is_empty());
    let o = flipline(&["rates", "--mu", "1.2", "--alpha-d", "0.0", "--lambda", "0.05", "--kappa", "0.01"], out.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_record(&o)["error"], "DetuningTooLarge");
    assert!(listing(out.path()).is_empty());
}

#[test]
fn bad_thread_count_is_an_environment_error() {
    let out = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_flipline"))
        .args(["landscape", "--mu", "0.2", "--alpha-d", "0.1", "--lambda", "0.05", "--kappa", "0.01", "--out"])
        .arg(out.path())
        .env("FLIPLINE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_record(&o)["error"], "EnvironmentError");
}

#[test]
fn partial_writes_are_rolled_back() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("b.csv")).unwrap();
    fs::write(dir.path().join("b.csv").join("keep"), "x").unwrap();
    let outputs = Outputs {
        files: vec![("a.csv".into(), "1\n".into()), ("b.csv".into(), "2\n".into())],
        tables: Vec::new(),
    };
    let err = write_outputs(dir.path(), &outputs).unwrap_err();
    assert_eq!(err.kind(), "IoError");
    assert_eq!(listing(dir.path()), vec!["b.csv".to_string()]);
}
