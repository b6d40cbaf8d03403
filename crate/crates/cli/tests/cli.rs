use std::process::Command;

use serde_json::Value;

const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden");
const SCHEMA: &str = include_str!("../schema/output.schema.json");

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn bl(args: &str) -> Run {
    let argv = std::iter::once("bl").chain(args.split_whitespace());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = bl_cli::run(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn ok(args: &str) -> String {
    let r = bl(args);
    assert_eq!(r.code, 0, "`{args}` failed: {}", r.err);
    r.out
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(format!("{GOLDEN}/{name}")).unwrap()
}

#[test]
fn small_exact_goldens() {
    let m = "--n1 2 --n2 2 --nw 2 --backend exact";
    assert_eq!(ok(&format!("spectrum {m}")), golden("spectrum_2_2_2.csv"));
    assert_eq!(
        ok(&format!("stationary {m}")),
        golden("stationary_2_2_2.csv")
    );
    assert_eq!(
        ok(&format!("eigvec {m} --k 1")),
        golden("eigvec_2_2_2_k1.csv")
    );
    assert_eq!(
        ok(&format!("power {m} --m 2")),
        golden("power_2_2_2_m2.csv")
    );
    let m = "--n1 4 --n2 3 --nw 3";
    assert_eq!(ok(&format!("spectrum {m}")), golden("spectrum_4_3_3.csv"));
    assert_eq!(
        ok(&format!("stationary {m}")),
        golden("stationary_4_3_3.csv")
    );
}

#[test]
fn spectrum_rows() {
    let out = ok("spectrum --n1 2 --n2 2 --nw 2 --backend exact");
    assert_eq!(
        out.lines().skip(1).collect::<Vec<_>>(),
        ["0,1", "1,0", "2,-1/2"]
    );
    assert!(!out.contains('\r'));
}

#[test]
fn eigenvector_forms_agree_up_to_scale() {
    let m = "--n1 5 --n2 4 --nw 3 --k 2";
    let values = |form: &str| -> Vec<String> {
        ok(&format!("eigvec {m} --form {form}"))
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().to_string())
            .collect()
    };
    let pascal = values("pascal");
    let hyper = values("hypergeometric");
    assert_eq!(pascal.len(), 4);
    assert_eq!(
        pascal.iter().map(|v| v == "0").collect::<Vec<_>>(),
        hyper.iter().map(|v| v == "0").collect::<Vec<_>>()
    );
    let b = values("b");
    assert_eq!(b[2], "1");
    assert_eq!(&b[..2], ["0", "0"]);
}

#[test]
fn tv_curve_golden() {
    let out = ok("tv-curve --n1 100 --n2 100 --nw 100 --start 0 --m-max 1000");
    assert_eq!(out, golden("tv_curve_100_100_100.csv"));
    let tv: Vec<f64> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(tv.len(), 1001);
    let entered = tv.iter().position(|&x| x <= 0.01).unwrap();
    assert!(entered < 1000);
    assert!(tv[entered..].iter().all(|&x| x <= 0.01));
    assert!(tv[entered..].windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn upper_bound_golden() {
    let out =
        ok("bounds --n1 100 --n2 100 --nw 100 --kind upper --c 0,0.5,1,1.5,2,2.5,3 --measure");
    assert_eq!(out, golden("bounds_upper_100_100_100.csv"));
}

#[test]
fn lower_bound_grid_accepts_negative_c() {
    let out = ok("bounds --n1 100 --n2 100 --nw 100 --kind lower --c -1,-0.5");
    assert_eq!(
        out.lines()
            .nth(1)
            .unwrap()
            .split(',')
            .take(2)
            .collect::<Vec<_>>(),
        ["-1", "232"]
    );
}

#[test]
fn verify_defaults_all_pass() {
    let r = bl("verify");
    assert_eq!(r.code, 0, "{}", r.out);
    let lines: Vec<&str> = r.out.lines().skip(1).collect();
    assert_eq!(lines.len(), 20);
    assert!(lines.iter().all(|l| l.contains(",PASS,")));
}

#[test]
fn exit_codes() {
    assert_eq!(bl("spectrum").code, 2);
    assert_eq!(bl("spectrum --n1 2 --n2 2").code, 2);
    assert_eq!(bl("frobnicate").code, 2);
    assert_eq!(
        bl("tv-curve --n1 3 --n2 3 --nw 2 --m-max 5 --m-step 0").code,
        2
    );
    assert_eq!(
        bl("power --n1 10 --n2 10 --nw 10 --m 50 --backend exact --max-exact-cost 10").code,
        2
    );

    let r = bl("cutoff --n1 1 --n2 1 --nw 1");
    assert_eq!(r.code, 1);
    assert!(r.err.contains("does not converge"));
    assert!(r.out.is_empty());
    assert_eq!(bl("spectrum --n1 2 --n2 5 --nw 3").code, 1);
    assert_eq!(bl("stationary --n1 2 --n2 2 --nw 0").code, 1);
    assert_eq!(bl("eigvec --n1 2 --n2 2 --nw 2 --k 3").code, 1);
    assert_eq!(bl("simulate --n1 2 --n2 2 --nw 2 --m 1 --start 7").code, 1);
    assert_eq!(bl("--help").code, 0);
}

#[test]
fn relabelled_models_report_original_labels() {
    let r = bl("stationary --n1 3 --n2 3 --nw 5");
    assert_eq!(r.code, 0);
    assert_eq!(r.out, "i,pi\n2,1/2\n3,1/2\n");
    assert!(r.err.contains("canonical model (3,3,1)"));

    let out = ok("power --n1 3 --n2 3 --nw 5 --m 1 --format json");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["params"]["canonical"]["nw"], 1);
    assert_eq!(v["params"]["states"], serde_json::json!([2, 3]));
}

#[test]
fn output_is_deterministic() {
    for args in [
        "simulate --n1 10 --n2 10 --nw 10 --m 30 --walkers 20000 --seed 5 --format json",
        "tv-curve --n1 30 --n2 30 --nw 30 --m-max 200 --m-step 7 --backend float",
        "power --n1 6 --n2 5 --nw 4 --m 9 --format json",
    ] {
        assert_eq!(ok(args), ok(args), "{args}");
    }
    assert_ne!(
        ok("simulate --n1 10 --n2 10 --nw 10 --m 30 --walkers 2000 --seed 1"),
        ok("simulate --n1 10 --n2 10 --nw 10 --m 30 --walkers 2000 --seed 2")
    );
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spectrum.csv");
    let r = bl(&format!(
        "spectrum --n1 4 --n2 3 --nw 3 --output {}",
        path.display()
    ));
    assert_eq!(r.code, 0);
    assert!(r.out.is_empty());
    assert_eq!(
        std::fs::read_to_string(path).unwrap(),
        golden("spectrum_4_3_3.csv")
    );
}

#[test]
fn json_documents_match_schema() {
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let m = "--n1 5 --n2 5 --nw 4 --format json";
    let runs = [
        format!("spectrum {m}"),
        format!("spectrum {m} --backend float"),
        format!("eigvec {m} --k 2 --form hypergeometric"),
        format!("eigvec {m} --k 2 --form b --backend float"),
        format!("stationary {m}"),
        format!("power {m} --m 4"),
        format!("power {m} --m 4 --backend float"),
        format!("tv-curve {m} --m-max 20 --m-step 5"),
        format!("tv-curve {m} --m-max 20 --backend float"),
        format!("bounds {m} --kind upper --measure"),
        format!("bounds {m} --kind lower --c -1,0 --measure --backend float"),
        format!("cutoff {m} --epsilon 0.1"),
        format!("simulate {m} --m 5 --walkers 500"),
        "verify --max-n 5 --format json".to_string(),
        "stationary --n1 3 --n2 3 --nw 5 --format json".to_string(),
    ];
    for args in &runs {
        let doc: Value = serde_json::from_str(&ok(args)).unwrap();
        let errors: Vec<String> = validator.iter_errors(&doc).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "`{args}`: {errors:?}");
    }

    // A float value in an exact document must be rejected.
    let mut doc: Value = serde_json::from_str(&ok(&format!("spectrum {m}"))).unwrap();
    doc["data"][1]["lambda"] = serde_json::json!(0.5);
    assert!(!validator.is_valid(&doc));
}

#[test]
fn binary_honours_backend_variable_and_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_bl");
    let out = Command::new(exe)
        .args(["spectrum", "--n1", "2", "--n2", "2", "--nw", "2"])
        .env("BL_BACKEND", "float")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "k,lambda\n0,1\n1,0\n2,-0.5\n"
    );

    let out = Command::new(exe)
        .args([
            "spectrum",
            "--n1",
            "2",
            "--n2",
            "2",
            "--nw",
            "2",
            "--backend",
            "exact",
        ])
        .env("BL_BACKEND", "float")
        .output()
        .unwrap();
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        golden("spectrum_2_2_2.csv")
    );

    let out = Command::new(exe).arg("spectrum").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let out = Command::new(exe)
        .args(["cutoff", "--n1", "1", "--n2", "1", "--nw", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .starts_with("error: "));
}
