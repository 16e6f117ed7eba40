use loewner::benchmarks::random_stable_discrete;
use loewner::io::{read_frequency_csv, read_time_csv, write_time_csv};
use loewner::model::TimeSeries;
use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_loewner"));
    cmd.env("LOEWNER_LOG", "error");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn improper_fit_and_singular_values() {
    let dir = TempDir::new().unwrap();
    let data = p(&dir, "improper_tf.csv");
    let (model, sv) = (p(&dir, "m.json"), p(&dir, "sv.csv"));
    ok(&["bench", "improper", "-o", s(&data)]);
    let rep = json(&ok(&[
        "fit-lti",
        s(&data),
        "--tol",
        "1e-10",
        "-o",
        s(&model),
        "--sv",
        s(&sv),
    ]));
    assert_eq!(rep["nu"], 2);
    assert_eq!(rep["r"], 3);
    assert!(rep["max_rel_error"].as_f64().unwrap() < 1e-8);
    let table = fs::read_to_string(&sv).unwrap();
    let second: Vec<f64> = table
        .lines()
        .nth(2)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    let third: Vec<f64> = table
        .lines()
        .nth(3)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert!((second[1] - 5.59e-2).abs() < 5e-5);
    assert!((third[1] - 6.88e-4).abs() < 5e-7);
    let m: Value = serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(m["n"], 3);
}

#[test]
fn freqresp_row_count() {
    let dir = TempDir::new().unwrap();
    let (data, model) = (p(&dir, "improper_tf.csv"), p(&dir, "m.json"));
    ok(&["bench", "improper", "-o", s(&data)]);
    ok(&["fit-lti", s(&data), "-o", s(&model)]);
    let out = ok(&["freqresp", s(&model), "--grid", "log", "1e-2", "1e2", "100"]);
    let rows = read_frequency_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 100);
    for r in rows {
        let z = r.point;
        let want = (z * z + z + 1.0) / (z + 1.0);
        assert!((r.value[(0, 0)] - want).norm() < 1e-8 * want.norm());
    }
}

#[test]
fn transport_pipeline_reports_error() {
    let dir = TempDir::new().unwrap();
    let (data, model) = (p(&dir, "tr.csv"), p(&dir, "m.json"));
    ok(&[
        "bench",
        "transport",
        "--xm",
        "1.9592",
        "--points",
        "300",
        "-o",
        s(&data),
    ]);
    assert_eq!(
        read_frequency_csv(fs::File::open(&data).unwrap())
            .unwrap()
            .len(),
        300
    );
    let rep = json(&ok(&[
        "fit-lti",
        s(&data),
        "--order",
        "33",
        "-o",
        s(&model),
    ]));
    assert!(rep["max_rel_error"].as_f64().unwrap() < 1e-3);
}

#[test]
fn discrete_example_has_feedthrough() {
    let dir = TempDir::new().unwrap();
    let data = p(&dir, "dpole_tf.csv");
    ok(&["bench", "discrete-pole", "-o", s(&data)]);
    let rep = json(&ok(&[
        "fit-lti",
        s(&data),
        "--discrete",
        "1",
        "-o",
        s(&p(&dir, "m.json")),
    ]));
    assert_eq!(rep["nu"], 1);
    assert_eq!(rep["r"], 2);
    assert!((rep["feedthrough"][0][0].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let data = p(&dir, "improper_tf.csv");
    ok(&["bench", "improper", "-o", s(&data)]);
    let a = ok(&["fit-lti", s(&data), "--random-directions", "--seed", "3"]).stdout;
    let b = ok(&["fit-lti", s(&data), "--random-directions", "--seed", "3"]).stdout;
    assert_eq!(a, b);
}

#[test]
fn duplicate_point_is_schema_error() {
    let dir = TempDir::new().unwrap();
    let data = p(&dir, "dup.csv");
    fs::write(
        &data,
        "point_re,point_im,H_1_1_re,H_1_1_im\n0,1,1,0\n0,2,1,0\n0,1,1,0\n",
    )
    .unwrap();
    let out = run(&["fit-lti", s(&data)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("SchemaError") && err.contains("0+1i"), "{err}");
}

#[test]
fn malformed_number_is_parse_error_with_line() {
    let dir = TempDir::new().unwrap();
    let data = p(&dir, "bad.csv");
    fs::write(
        &data,
        "point_re,point_im,H_1_1_re,H_1_1_im\n0,1,1,0\n0,2,one,0\n",
    )
    .unwrap();
    let out = run(&["fit-lti", s(&data)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ParseError: line 3"));
}

#[test]
fn jittered_time_is_schema_error() {
    let dir = TempDir::new().unwrap();
    let data = p(&dir, "t.csv");
    fs::write(&data, "t,u_1,y_1\n0,1,0\n0.1,0,1\n0.2000001,0,2\n0.3,0,1\n").unwrap();
    let out = run(&["fit-time", s(&data), "--order", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("SchemaError"));
}

#[test]
fn singular_evaluation_is_numerical_error() {
    let dir = TempDir::new().unwrap();
    let model = p(&dir, "int.json");
    fs::write(
        &model,
        r#"{"A":[[0.0]],"B":[[1.0]],"C":[[1.0]],"D":[[0.0]],"E":[[1.0]],"field":"real","time":"continuous"}"#,
    )
    .unwrap();
    let out = run(&["freqresp", s(&model), "--grid", "lin", "0", "1", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("SingularPencil"));
}

#[test]
fn precondition_errors_exit_four() {
    let dir = TempDir::new().unwrap();
    let data = p(&dir, "improper_tf.csv");
    ok(&["bench", "improper", "-o", s(&data)]);
    let out = run(&["fit-lti", s(&data), "--tol", "2"]);
    assert_eq!(out.status.code(), Some(4));
    let zero = p(&dir, "zero.csv");
    fs::write(
        &zero,
        "point_re,point_im,H_1_1_re,H_1_1_im\n0,1,0,0\n0,2,0,0\n0,3,0,0\n0,4,0,0\n",
    )
    .unwrap();
    let reference = p(&dir, "ref.json");
    fs::write(&reference, r#"{"type":"rational","num":[1],"den":[1,1]}"#).unwrap();
    let out = run(&["lddc", s(&zero), "--reference", s(&reference)]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("PlantZeroAtPoint"));
}

#[test]
fn lddc_recovers_controller() {
    let dir = TempDir::new().unwrap();
    let data = p(&dir, "improper_tf.csv");
    ok(&["bench", "improper", "-o", s(&data)]);
    let reference = p(&dir, "ref.json");
    fs::write(&reference, r#"{"type":"rational","num":[1],"den":[1,1]}"#).unwrap();
    let rep = json(&ok(&[
        "lddc",
        s(&data),
        "--reference",
        s(&reference),
        "-o",
        s(&p(&dir, "k.json")),
    ]));
    assert!(rep["closed_loop_max_deviation"].as_f64().unwrap() < 1e-8);
    assert_eq!(rep["used"], 8);
}

#[test]
fn time_domain_fit_and_simulation() {
    let dir = TempDir::new().unwrap();
    let sys = random_stable_discrete(3, 5);
    let mut u = vec![0.0; 40];
    u[0] = 1.0;
    u[3] = -0.5;
    let ts = sys
        .simulate_discrete(&TimeSeries::from_input(1.0, &u))
        .unwrap();
    let data = p(&dir, "io.csv");
    write_time_csv(fs::File::create(&data).unwrap(), &ts).unwrap();
    let model = p(&dir, "m.json");
    let rep = json(&ok(&[
        "fit-time",
        s(&data),
        "--order",
        "3",
        "-o",
        s(&model),
    ]));
    assert_eq!(rep["order"], 3);
    let out = ok(&["simulate", s(&model), s(&data)]);
    let sim = read_time_csv(out.stdout.as_slice()).unwrap();
    for k in 0..ts.len() {
        assert!((sim.y[(k, 0)] - ts.y[(k, 0)]).abs() < 1e-8, "step {k}");
    }
}

#[test]
fn bilinear_fit_from_model_and_kernels() {
    let dir = TempDir::new().unwrap();
    let model = p(&dir, "b.json");
    ok(&[
        "bench",
        "random-bilinear",
        "--order",
        "3",
        "--seed",
        "1",
        "-o",
        s(&model),
    ]);
    let rep = json(&ok(&[
        "fit-bilinear",
        s(&model),
        "--k",
        "3",
        "--lo",
        "0.1",
        "--hi",
        "10",
        "-o",
        s(&p(&dir, "r.json")),
    ]));
    assert_eq!(rep["order"], 3);
    assert!(rep["max_rel_error_matched"].as_f64().unwrap() < 1e-8);

    let sys = loewner::model::BilinearModel::from_json(
        &serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap(),
    )
    .unwrap();
    let (lam, mu) = loewner::bilinear::default_points(3, 0.1, 10.0);
    let tuples = loewner::bilinear::InterpolationTuples::conjugate_chains(&lam, &mu).unwrap();
    let mut entries = Vec::new();
    let mut needed = tuples.matched_kernels();
    for i in 0..tuples.right.len() {
        needed.push(tuples.right_points(i));
    }
    for j in 0..tuples.left.len() {
        needed.push(tuples.left_points(j));
    }
    for i in 0..tuples.right.len() {
        for j in 0..tuples.left.len() {
            let mut pts = tuples.left_points(j);
            pts.extend(tuples.right_points(i));
            needed.push(pts);
        }
    }
    needed.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
    needed.dedup();
    for pts in needed {
        let v = loewner::bilinear::eval_generalized_tf(&sys, &pts).unwrap();
        entries.push(loewner::io::kernel_entry(&pts, v));
    }
    let kernels = p(&dir, "k.json");
    fs::write(&kernels, Value::Array(entries).to_string()).unwrap();
    let rep = json(&ok(&[
        "fit-bilinear",
        s(&kernels),
        "--k",
        "3",
        "--lo",
        "0.1",
        "--hi",
        "10",
        "-o",
        s(&p(&dir, "r2.json")),
    ]));
    assert_eq!(rep["order"], 3);
}

#[test]
fn parametric_fit_and_response() {
    let dir = TempDir::new().unwrap();
    let grid = p(&dir, "g.csv");
    let model = p(&dir, "p.json");
    ok(&[
        "bench",
        "surface",
        "--order",
        "2",
        "--param-order",
        "1",
        "--seed",
        "4",
        "-o",
        s(&grid),
    ]);
    let rep = json(&ok(&["fit-param", s(&grid), "-o", s(&model)]));
    assert_eq!(rep["r"], 2);
    assert_eq!(rep["q"], 1);
    assert!(rep["max_rel_error"].as_f64().unwrap() < 1e-8);
    let out = ok(&[
        "freqresp",
        s(&model),
        "--param",
        "0.8",
        "--grid",
        "log",
        "0.1",
        "10",
        "7",
    ]);
    let surf = loewner::benchmarks::RationalSurface::random(2, 1, 4);
    for r in read_frequency_csv(out.stdout.as_slice()).unwrap() {
        let want = surf.eval(r.point, 0.8);
        assert!((r.value[(0, 0)] - want).norm() < 1e-8 * want.norm());
    }
}
