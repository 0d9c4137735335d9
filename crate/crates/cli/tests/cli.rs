use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }

    fn write(&self, name: &str, text: &str) -> String {
        std::fs::write(self.path(name), text).unwrap();
        self.arg(name)
    }

    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.path(name)).unwrap()
    }
}

fn hcr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcr"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = hcr(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    hcr(args).status.code().unwrap()
}

fn circle_csv(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = String::from("x1,x2\n");
    for _ in 0..n {
        let t = rng.gen::<f64>() * std::f64::consts::TAU;
        s.push_str(&format!(
            "{},{}\n",
            0.5 + 0.4 * t.cos(),
            0.5 + 0.4 * t.sin()
        ));
    }
    s
}

fn fit_circle(sb: &Sandbox) -> String {
    let input = sb.write("circle.csv", &circle_csv(4000, 1));
    let out = sb.arg("circle.hcr");
    ok(&["fit", "--input", &input, "--orders", "2,2", "--out", &out]);
    out
}

fn parse_table(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn fit_reports_eight_free_coefficients() {
    let sb = Sandbox::new();
    let input = sb.write("circle.csv", &circle_csv(1000, 2));
    let summary = ok(&[
        "fit",
        "--input",
        &input,
        "--orders",
        "2,2",
        "--out",
        &sb.arg("m.hcr"),
    ]);
    assert!(summary.contains("coefficients: 9 (8 free)"), "{summary}");
    assert!(summary.contains("level 1: 4") && summary.contains("level 2: 4"));
}

#[test]
fn uniform_model_warns_and_reports_one_line() {
    let sb = Sandbox::new();
    let input = sb.write("d.csv", "x1,x2\n0.1,0.2\n0.3,0.4\n");
    let model = sb.arg("m.hcr");
    let out = hcr(&["fit", "--input", &input, "--orders", "0,0", "--out", &model]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("uniform model"));
    let report = ok(&["report", "--model", &model]);
    assert_eq!(report.lines().count(), 1);
    assert!(report.contains("a(constant) = 1"));
    let density = ok(&["density", "--model", &model, "--point", "0.3,0.7"]);
    assert_eq!(density.trim().parse::<f64>().unwrap(), 1.0);
}

#[test]
fn fully_missing_column_is_flagged() {
    let sb = Sandbox::new();
    let input = sb.write("d.csv", "x1,x2\n0.1,NA\n0.3,\n0.7,?\n");
    let model = sb.arg("m.hcr");
    let out = hcr(&["fit", "--input", &input, "--orders", "1,1", "--out", &model]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no observed values"));
    let report = ok(&["report", "--model", &model]);
    let line = report
        .lines()
        .find(|l| l.trim_start().starts_with("(0,1)"))
        .unwrap();
    assert!(line.contains("[NO EVIDENCE]"), "{line}");
    assert!(sb.read("m.hcr").contains("no-evidence"));
}

#[test]
fn complete_input_is_reproduced() {
    let sb = Sandbox::new();
    let model = fit_circle(&sb);
    let text = "x1,x2\n0.25,0.75\n0.5,0.1\n";
    let input = sb.write("complete.csv", text);
    assert_eq!(ok(&["impute", "--model", &model, "--input", &input]), text);
}

#[test]
fn expected_and_cluster_split_imputation() {
    let sb = Sandbox::new();
    let model = fit_circle(&sb);
    let input = sb.write("gap.csv", "x1,x2\n?,0.5\n");
    let expected = parse_table(&ok(&[
        "impute", "--model", &model, "--input", &input, "--report",
    ]));
    assert_eq!(
        expected[0],
        vec!["x1", "x2", "__hcr_var_x1", "__hcr_var_x2"]
    );
    let x1: f64 = expected[1][0].parse().unwrap();
    let var: f64 = expected[1][2].parse().unwrap();
    assert!((x1 - 0.5).abs() < 0.05, "{x1}");
    assert!(var > 0.1, "variance {var}");
    assert_eq!(expected[1][3], "");

    let split = parse_table(&ok(&[
        "impute",
        "--model",
        &model,
        "--input",
        &input,
        "--policy",
        "cluster-split",
    ]));
    assert_eq!(split[0], vec!["x1", "x2", "__hcr_weight"]);
    assert_eq!(split.len(), 3);
    let values: Vec<f64> = split[1..].iter().map(|r| r[0].parse().unwrap()).collect();
    let weights: f64 = split[1..]
        .iter()
        .map(|r| r[2].parse::<f64>().unwrap())
        .sum();
    assert!(values.iter().any(|&v| v < 0.5) && values.iter().any(|&v| v > 0.5));
    assert!((weights - 1.0).abs() < 1e-12);
}

#[test]
fn nonpositive_mass_rows_stay_unfilled() {
    let sb = Sandbox::new();
    // 1 + f_1(x1): the conditional mass of x2 at x1 = 0 is 1 - sqrt(3) < 0
    let model = sb.write(
        "m.hcr",
        "hcr-model\nformat_version\t1\ndimension\t2\nlevel_orders\t0,1,1\n\
         coordinate\t1\tx1\tlegendre\t1\tidentity\ncoordinate\t2\tx2\tlegendre\t1\tidentity\n\
         term\t0,0\t1.0e0\t0\t-\tno-evidence\nterm\t1,0\t1.0e0\t0\t-\tno-evidence\n\
         term\t0,1\t0.0e0\t0\t-\tno-evidence\nterm\t1,1\t0.0e0\t0\t-\tno-evidence\n",
    );
    let gap = sb.write("gap.csv", "x1,x2\n0,?\n0.9,?\n");
    let out = parse_table(&ok(&["impute", "--model", &model, "--input", &gap]));
    assert_eq!(out[0], vec!["x1", "x2", "__hcr_note"]);
    assert_eq!(out[1], vec!["0", "?", "nonpositive-mass"]);
    assert_eq!(out[2][2], "");
    assert!(out[2][1].parse::<f64>().is_ok());
}

#[test]
fn density_slice_table() {
    let sb = Sandbox::new();
    let model = fit_circle(&sb);
    let table = parse_table(&ok(&["density", "--model", &model, "--point", "?,0.5"]));
    assert_eq!(table[0], vec!["x1", "density"]);
    assert_eq!(table.len(), 102);
    let ys: Vec<f64> = table[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    let k = (0..ys.len())
        .min_by(|&a, &b| ys[a].total_cmp(&ys[b]))
        .unwrap();
    assert!((45..=55).contains(&k), "minimum at row {k}");
    let short = parse_table(&ok(&[
        "density", "--model", &model, "--point", "?,0.5", "--grid", "11",
    ]));
    assert_eq!(short.len(), 12);
}

#[test]
fn usage_errors_exit_one() {
    let sb = Sandbox::new();
    let model = fit_circle(&sb);
    assert_eq!(code(&["density", "--model", &model, "--point", "?,?"]), 1);
    assert_eq!(
        code(&["density", "--model", &model, "--point", "0.2,abc"]),
        1
    );
    assert_eq!(code(&["density", "--model", &model, "--point", "0.2"]), 1);
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["fit", "--input", "x.csv"]), 1);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn data_errors_exit_two() {
    let sb = Sandbox::new();
    assert_eq!(code(&["report", "--model", &sb.arg("missing.hcr")]), 2);
    let corrupt = sb.write("bad.hcr", "hcr-model\nformat_version\t1\ndimension\tx\n");
    assert_eq!(code(&["report", "--model", &corrupt]), 2);
    let ragged = sb.write("r.csv", "a,b\n0.1,0.2\n0.3\n");
    assert_eq!(
        code(&["fit", "--input", &ragged, "--out", &sb.arg("m.hcr")]),
        2
    );
    let outside = sb.write("o.csv", "a\n0.5\n3\n");
    assert_eq!(
        code(&["fit", "--input", &outside, "--out", &sb.arg("m.hcr")]),
        2
    );
    let constant = sb.write("c.csv", "a\n2\n2\n2\n");
    let schema = sb.write("s.txt", "a: transform=cdf\n");
    let args = [
        "transform",
        "--input",
        &constant,
        "--schema",
        &schema,
        "--transforms",
        &sb.arg("t.txt"),
    ];
    assert_eq!(code(&args), 2);
}

#[test]
fn refine_identity_ascent_and_ridge() {
    let sb = Sandbox::new();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut text = String::from("u,v\n");
    for _ in 0..60 {
        let u: f64 = rng.gen();
        let v: f64 = (0.7 * u + 0.3 * rng.gen::<f64>()).min(1.0);
        text.push_str(&format!("{u},{v}\n"));
    }
    let input = sb.write("d.csv", &text);
    let model = sb.arg("m.hcr");
    ok(&["fit", "--input", &input, "--orders", "1,1", "--out", &model]);

    let same = sb.arg("same.hcr");
    ok(&[
        "refine", "--model", &model, "--input", &input, "--steps", "0", "--out", &same,
    ]);
    assert_eq!(sb.read("m.hcr"), sb.read("same.hcr"));

    let trace = parse_table(&ok(&[
        "refine",
        "--model",
        &model,
        "--input",
        &input,
        "--steps",
        "8",
        "--out",
        &sb.arg("r.hcr"),
    ]));
    assert_eq!(
        trace[0],
        vec!["step", "objective", "log_likelihood", "step_size"]
    );
    let objective: Vec<f64> = trace[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(objective.windows(2).all(|w| w[1] >= w[0]), "{objective:?}");

    let flat = sb.arg("flat.hcr");
    ok(&[
        "refine", "--model", &model, "--input", &input, "--steps", "30", "--ridge", "1e6", "--out",
        &flat,
    ]);
    let report = ok(&["report", "--model", &flat]);
    for line in report.lines().filter(|l| l.contains("sigma =")) {
        let a: f64 = line
            .split("a = ")
            .nth(1)
            .unwrap()
            .split_whitespace()
            .next()
            .unwrap()
            .parse()
            .unwrap();
        assert!(a.abs() < 1e-3, "{line}");
    }
}

#[test]
fn refine_reports_positivity_failure() {
    let sb = Sandbox::new();
    let input = sb.write("d.csv", "x1\n0\n0.1\n0.9\n");
    let model = sb.arg("m.hcr");
    ok(&["fit", "--input", &input, "--orders", "1", "--out", &model]);
    let text = sb.read("m.hcr");
    let patched: String = text
        .lines()
        .map(|l| {
            if l.starts_with("term\t1\t") {
                "term\t1\t1.0e0\t3\t-\tok".to_string()
            } else {
                l.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(&model, patched + "\n").unwrap();
    let out = hcr(&[
        "refine",
        "--model",
        &model,
        "--input",
        &input,
        "--out",
        &sb.arg("r.hcr"),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("rows 1") && err.contains("negative density"),
        "{err}"
    );
}

#[test]
fn report_labels_co_increase() {
    let sb = Sandbox::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut text = String::from("a,b\n");
    for _ in 0..400 {
        let u: f64 = rng.gen();
        let v = (u + 0.1 * (rng.gen::<f64>() - 0.5)).clamp(0.0, 1.0);
        text.push_str(&format!("{u},{v}\n"));
    }
    let input = sb.write("d.csv", &text);
    let model = sb.arg("m.hcr");
    ok(&["fit", "--input", &input, "--orders", "1,1", "--out", &model]);
    let report = ok(&["report", "--model", &model]);
    let line = report
        .lines()
        .find(|l| l.trim_start().starts_with("(1,1)"))
        .unwrap();
    assert!(line.contains("coordinates 1,2: co-increase"), "{line}");
}

#[test]
fn transform_examples() {
    let sb = Sandbox::new();
    let input = sb.write("d.csv", "z,w\n0,3\n1,1\n-2,4\n5,2\n");
    let schema = sb.write("s.txt", "z: logistic\nw: cdf\n");
    let transforms = sb.arg("t.txt");
    let unit = parse_table(&ok(&[
        "transform",
        "--input",
        &input,
        "--schema",
        &schema,
        "--transforms",
        &transforms,
    ]));
    assert_eq!(unit[1][0].parse::<f64>().unwrap(), 0.5);
    // sample minimum with l = 4 sits at (1 - 0.5) / 4
    assert_eq!(unit[2][1].parse::<f64>().unwrap(), 0.125);
    assert!(sb.read("t.txt").starts_with("hcr-transforms\n"));
}

#[test]
fn schema_pipeline_imputes_in_original_units() {
    let sb = Sandbox::new();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut text = String::from("height;weight;smoker\n");
    for _ in 0..300 {
        let h: f64 = rng.gen_range(150.0..200.0);
        let w = 0.9 * (h - 100.0) + rng.gen_range(-8.0..8.0);
        let s = if rng.gen_bool(0.3) { 1 } else { 0 };
        text.push_str(&format!("{h:.1};{w:.1};{s}\n"));
    }
    let input = sb.write("d.csv", &text);
    let schema = sb.write(
        "s.txt",
        "height: transform=cdf\nweight: rescale\nsmoker: discrete\n",
    );
    let model = sb.arg("m.hcr");
    ok(&[
        "fit",
        "--input",
        &input,
        "--schema",
        &schema,
        "--delimiter",
        ";",
        "--out",
        &model,
    ]);
    assert!(sb.read("m.hcr").contains("discrete:2"));
    let gaps = sb.write("g.csv", "height;weight;smoker\n180;;NA\nmissing;70;0\n");
    let out = ok(&[
        "impute",
        "--model",
        &model,
        "--input",
        &gaps,
        "--delimiter",
        ";",
        "--missing-tokens",
        "NA,missing",
    ]);
    let rows: Vec<Vec<&str>> = out.lines().map(|l| l.split(';').collect()).collect();
    let w: f64 = rows[1][1].parse().unwrap();
    assert!((60.0..=100.0).contains(&w), "weight {w}");
    assert!(rows[1][2] == "0" || rows[1][2] == "1");
    let h: f64 = rows[2][0].parse().unwrap();
    assert!((150.0..=200.0).contains(&h), "height {h}");
}

#[test]
fn identical_runs_give_identical_files() {
    let sb = Sandbox::new();
    let input = sb.write("d.csv", &circle_csv(500, 9));
    for name in ["a.hcr", "b.hcr"] {
        ok(&[
            "fit",
            "--input",
            &input,
            "--orders",
            "3,2",
            "--out",
            &sb.arg(name),
        ]);
    }
    assert_eq!(sb.read("a.hcr"), sb.read("b.hcr"));
    assert!(Path::new(&sb.arg("a.hcr")).exists());
}
