use std::path::Path;
use std::process::{Command, Output};

use av1lab::codec::io::{load_y4m, write_raw, write_y4m};
use av1lab::frame::{ChromaFormat, Frame, Plane};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_av1lab")).args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn plane(w: usize, h: usize, f: impl Fn(usize, usize) -> u16) -> Plane {
    Plane::from_vec(w, h, 8, (0..w * h).map(|i| f(i % w, i / w)).collect()).unwrap()
}

fn clip(frames: usize) -> Vec<Frame> {
    (0..frames)
        .map(|k| {
            let y = plane(72, 40, |x, y| ((x * 3 + y * 5 + 17 * k) % 256) as u16 ^ ((x * y) & 7) as u16);
            let u = plane(36, 20, |x, _| 100 + x as u16);
            let v = plane(36, 20, |_, y| 150 - y as u16);
            Frame::from_planes(y, Some(u), Some(v), ChromaFormat::Yuv420).unwrap()
        })
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn lossless_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let (src, bin, out) = (dir.path().join("in.y4m"), dir.path().join("s.bin"), dir.path().join("out.y4m"));
    let frames = clip(2);
    write_y4m(&src, &frames).unwrap();
    let rep = ok_json(&["encode", "--input", s(&src), "--output", s(&bin), "--qp", "0"]);
    assert_eq!(rep["frames"], 2);
    assert_eq!(rep["bytes"].as_u64().unwrap(), std::fs::metadata(&bin).unwrap().len());
    assert_eq!(rep["per_frame"][1]["psnr"]["combined"], "inf");
    let dec = ok_json(&["decode", "--input", s(&bin), "--output", s(&out), "--metrics", s(&src)]);
    assert_eq!(dec["psnr"][0]["planes"], serde_json::json!(["inf", "inf", "inf"]));
    assert_eq!(load_y4m(&out).unwrap(), frames);
}

#[test]
fn lossy_tiled_encode_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let (src, bin, report, out) = (dir.path().join("in.yuv"), dir.path().join("s.bin"), dir.path().join("r.json"), dir.path().join("out.yuv"));
    write_raw(&src, &clip(1)).unwrap();
    let raw = ["--width", "72", "--height", "40"];
    let mut args = vec!["encode", "--input", s(&src), "--output", s(&bin), "--qp", "120", "--tiles", "1x2", "--blocks", "8-32", "--report", s(&report)];
    args.extend(raw);
    let out_run = run(&args);
    assert!(out_run.status.success(), "{}", String::from_utf8_lossy(&out_run.stderr));
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["per_frame"][0]["tile_bytes"].as_array().unwrap().len(), 2);
    let db = rep["per_frame"][0]["psnr"]["combined"].as_f64().unwrap();
    assert!(db > 20.0 && db < 99.0, "{db}");
    let mut args = vec!["decode", "--input", s(&bin), "--output", s(&out), "--metrics", s(&src)];
    args.extend(raw);
    let dec = ok_json(&args);
    // The decoder measures the same reconstruction the encoder reported.
    assert_eq!(dec["psnr"][0]["combined"].as_f64().unwrap(), db);
}

#[test]
fn grain_parameters_from_json() {
    let dir = tempfile::tempdir().unwrap();
    let (src, bin, grain) = (dir.path().join("in.y4m"), dir.path().join("s.bin"), dir.path().join("g.json"));
    write_y4m(&src, &clip(1)).unwrap();
    std::fs::write(
        &grain,
        r#"{"lag":1,"luma_ar":[0,0,0,64],"luma_points":[{"value":0,"scale":120},{"value":255,"scale":120}],
           "chroma":[null,null],"scaling_shift":8,"seed":99}"#,
    )
    .unwrap();
    ok_json(&["encode", "--input", s(&src), "--output", s(&bin), "--grain-params", s(&grain)]);
    let out = dir.path().join("out.y4m");
    let dec = ok_json(&["decode", "--input", s(&bin), "--output", s(&out), "--metrics", s(&src)]);
    assert!(dec["psnr"][0]["combined"].as_f64().is_some());
}

#[test]
fn bad_arguments_fail() {
    let dir = tempfile::tempdir().unwrap();
    let (src, bin) = (dir.path().join("in.yuv"), dir.path().join("s.bin"));
    write_raw(&src, &clip(1)).unwrap();
    // Raw input without its geometry.
    assert!(!run(&["encode", "--input", s(&src), "--output", s(&bin)]).status.success());
    let geo = ["--width", "72", "--height", "40"];
    for extra in [["--superres-denom", "20"], ["--sb-size", "32"], ["--tiles", "1x9"], ["--blocks", "4"]] {
        let mut args = vec!["encode", "--input", s(&src), "--output", s(&bin)];
        args.extend(geo);
        args.extend(extra);
        assert!(!run(&args).status.success(), "{extra:?}");
    }
    std::fs::write(&bin, b"not a stream").unwrap();
    assert!(!run(&["decode", "--input", s(&bin), "--output", s(&dir.path().join("o.y4m"))]).status.success());
}

#[test]
fn analyze_reports_each_demonstration() {
    let rep = ok_json(&["analyze"]);
    assert_eq!(rep["cdef_directions"]["correct"], 64);
    assert!(rep["warp"]["max_abs_error"].as_f64().unwrap() <= 1.0);
    for k in ["Smooth", "Regular", "Sharp"] {
        assert!(rep["interpolation"][k]["max_abs_error"].as_f64().unwrap() <= 1.0);
    }
    for row in rep["entropy"].as_array().unwrap() {
        assert!(row["overhead"].as_f64().unwrap() < 0.06, "{row}");
    }
}
