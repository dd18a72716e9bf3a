use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectral-tensor"))
        .args(args)
        .env("SPECTRAL_TENSOR_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

const TENSOR_A: &str = "# diffusion tensor\n2.0 0.3 -0.1 1.2 0.05 0.4\n";
const TENSOR_B: &str = "1.0 0 0 1.0 0 1.0\n";

#[test]
fn dist_of_identical_files_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.txt", TENSOR_A);
    let b = write(dir.path(), "b.txt", TENSOR_A);
    for metric in ["sq", "le", "ai", "spectral-rot"] {
        let o = bin(&["dist", "--metric", metric, &a, &b]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let rows = csv_rows(&stdout(&o));
        assert_eq!(rows, vec![vec![0.0]], "{metric}");
    }
}

#[test]
fn dist_to_identity_matches_log_eigenvalues() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.txt", "4 0 0 2 0 1\n");
    let b = write(dir.path(), "b.txt", TENSOR_B);
    let o = bin(&["dist", "--metric", "le", &a, &b]);
    let d = csv_rows(&stdout(&o))[0][0];
    let expected = (4f64.ln().powi(2) + 2f64.ln().powi(2)).sqrt();
    assert!((d - expected).abs() < 1e-14);
}

#[test]
fn aniso_sweep_header_and_rows() {
    let o = bin(&["aniso-sweep", "--steps", "100"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "t,HA,FA,RA,GA");
    assert_eq!(text.lines().count(), 101);
}

#[test]
fn csv_values_round_trip() {
    let o = bin(&["aniso-sweep", "--steps", "7"]);
    let rows = csv_rows(&stdout(&o));
    let expected = spectral_tensor::aniso_sweep(7).unwrap();
    for (r, e) in rows.iter().zip(&expected) {
        assert_eq!(r[0], e.t);
        assert_eq!(r[2], e.fa);
        assert_eq!(r[3], e.ra);
    }
}

#[test]
fn bench_streams_are_seeded() {
    let run = || {
        let o = bin(&["bench", "--n", "200", "--repetitions", "1", "--seed", "42", "--format", "json"]);
        assert!(o.status.success());
        serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a["reference"], b["reference"]);
    assert_eq!(a["timings"].as_array().unwrap().len(), 4);
    for t in a["timings"].as_array().unwrap() {
        assert!(t["seconds"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn usage_and_data_exit_codes() {
    assert_eq!(bin(&["dist", "--metric", "nope", "a", "b"]).status.code(), Some(1));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(bin(&["aniso-sweep", "--steps", "1"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.txt", "1 0 0 -1 0 1\n");
    let o = bin(&["aniso", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("positive definite"));
}

#[test]
fn mean_of_two_copies_is_the_tensor() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.txt", &format!("{TENSOR_A}{TENSOR_A}"));
    for metric in ["sq", "le", "ai"] {
        let o = bin(&["mean", "--metric", metric, &a]);
        assert!(o.status.success());
        let row = &csv_rows(&stdout(&o))[0];
        let expected = [2.0, 0.3, -0.1, 1.2, 0.05, 0.4];
        for (x, e) in row.iter().zip(expected) {
            assert!((x - e).abs() < 1e-12, "{metric}: {row:?}");
        }
    }
}

#[test]
fn interp_writes_a_field() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.txt", TENSOR_A);
    let b = write(dir.path(), "b.txt", TENSOR_B);
    let out = dir.path().join("curve.dtf");
    let o = bin(&["interp", &a, &b, "--steps", "5", "--format", "dtf", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let f = spectral_tensor::read_field(&out).unwrap();
    assert_eq!(f.dims(), [5, 1, 1]);
    assert_eq!(f.voxels()[4].components(), [1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
}

#[test]
fn resample_identity_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let corners = write(
        dir.path(),
        "corners.txt",
        "2 0 0 1 0 0.5\n1 0 0 2 0 0.5\n1.5 0.2 0 1 0 0.5\n0.5 0 0 0.5 0 2\n",
    );
    let grid = dir.path().join("grid.dtf");
    let o = bin(&["grid-interp", &corners, "--size", "4", "--format", "dtf", "--out", grid.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let same = dir.path().join("same.dtf");
    let o = bin(&["resample", grid.to_str().unwrap(), "--dims", "4,4,1", "--out", same.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(&grid).unwrap(), fs::read(&same).unwrap());
}

#[test]
fn sweep_has_zero_center_row() {
    let o = bin(&["sweep", "--mode", "angle", "--steps", "5"]);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 5);
    assert!(rows[2][2..].iter().all(|d| d.abs() < 1e-12));
}

#[test]
fn render_scene_and_file() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("crossing.svg");
    let o = bin(&["render", "--scene", "crossing", "--out", svg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<ellipse").count(), 3);
    assert!(text.contains("<metadata>color-scale index=HA"));

    let input = write(dir.path(), "id.txt", TENSOR_B);
    let one = dir.path().join("one.svg");
    assert!(bin(&["render", &input, "--color", "fa", "--out", one.to_str().unwrap()]).status.success());
    assert_eq!(fs::read_to_string(&one).unwrap().matches("<ellipse").count(), 1);
    assert_eq!(bin(&["render", &input]).status.code(), Some(1));
}
