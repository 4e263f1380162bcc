use std::path::Path;
use std::process::{Command, Output};

use tcdlr_core::harness::{load_tensor, relerr, save_mask, save_tensor, SynthSpec};

fn tcdlr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcdlr"))
        .args(args)
        .output()
        .expect("spawn tcdlr")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_recovers_and_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.tns");
    let o = tcdlr(&[
        "synth",
        "--n",
        "40",
        "--rank",
        "4",
        "--sample-rate",
        "0.6",
        "--k-min",
        "4",
        "--seed",
        "3",
        "--threads",
        "2",
        "--out",
        arg(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("seed=3") && text.contains("surrogate=lp"));
    assert!(text.contains("converged=true"));
    let (m, _) = SynthSpec {
        n1: 40,
        n2: 40,
        n3: 3,
        rank: 4,
        sample_rate: 0.6,
        seed: 3,
    }
    .observe()
    .unwrap();
    assert!(relerr(&load_tensor(&out).unwrap(), &m).unwrap() < 1e-6);
}

#[test]
fn non_convergence_exits_three_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.tns");
    let o = tcdlr(&[
        "synth",
        "--n",
        "30",
        "--rank",
        "3",
        "--max-iters",
        "4",
        "--out",
        arg(&out),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("converged=false"));
    assert!(load_tensor(&out).is_ok());
}

#[test]
fn complete_round_trips_files() {
    let dir = tempfile::tempdir().unwrap();
    let (m, obs) = SynthSpec::square(30, 3, 0.6, 1).observe().unwrap();
    let [t, k, truth, out] = ["t.tns", "m.msk", "truth.tns", "out.tns"].map(|f| dir.path().join(f));
    save_tensor(&t, obs.data()).unwrap();
    save_mask(&k, obs.mask()).unwrap();
    save_tensor(&truth, &m).unwrap();
    let o = tcdlr(&[
        "complete",
        "--tensor",
        arg(&t),
        "--mask",
        arg(&k),
        "--truth",
        arg(&truth),
        "--out",
        arg(&out),
        "--k-init",
        "3",
        "--fixed-rank",
        "--max-iters",
        "1000",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("relerr="));
    assert!(relerr(&load_tensor(&out).unwrap(), &m).unwrap() < 1e-6);
}

#[test]
fn malformed_input_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tns");
    std::fs::write(&bad, b"TNS3\x02\0\0\0\x02\0\0\0\x01\0\0\0\0\0").unwrap();
    let out = dir.path().join("out.tns");
    let o = tcdlr(&[
        "complete",
        "--tensor",
        arg(&bad),
        "--mask",
        arg(&bad),
        "--out",
        arg(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("format error"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        tcdlr(&["synth", "--surrogate", "cubic"]).status.code(),
        Some(2)
    );
    assert_eq!(tcdlr(&["bogus"]).status.code(), Some(2));
}

#[test]
fn phase_writes_csv_grid() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("phase.csv");
    let o = tcdlr(&[
        "phase",
        "--n",
        "20",
        "--rank-fractions",
        "0.1,0.2",
        "--sample-rates",
        "0.5,1.0",
        "--k-min",
        "2",
        "--out",
        arg(&csv),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "rank_fraction,sample_rate,mean_relerr,success_count,mean_time"
    );
    assert_eq!(lines.len(), 5);
}

#[test]
fn image_reports_psnr() {
    let dir = tempfile::tempdir().unwrap();
    let [input, out, seen] = ["in.png", "out.png", "seen.png"].map(|f| dir.path().join(f));
    let img = image::RgbImage::from_fn(32, 24, |x, y| {
        image::Rgb([(x * 8) as u8, (y * 10) as u8, ((x + y) * 4) as u8])
    });
    img.save(&input).unwrap();
    let o = tcdlr(&[
        "image",
        "--input",
        arg(&input),
        "--out",
        arg(&out),
        "--observed",
        arg(&seen),
        "--k-min",
        "2",
    ]);
    assert!(matches!(o.status.code(), Some(0 | 3)));
    assert!(stdout(&o).contains("psnr="));
    let rec = image::open(&out).unwrap().to_rgb8();
    assert_eq!(rec.dimensions(), (32, 24));
    assert!(seen.exists());
}

#[test]
fn bench_emits_rows() {
    let o = tcdlr(&[
        "bench", "--path", "factored", "--sizes", "30,40", "--rank", "5", "--reps", "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("path,n,n3,rank,reps,per_iter_secs"));
    assert_eq!(
        text.lines().filter(|l| l.starts_with("factored,")).count(),
        2
    );
}
