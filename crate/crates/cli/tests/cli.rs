use std::path::Path;
use std::process::{Command, Output};

use pcac::ply::{load_ply, save_ply};
use pcac::synthetic::{random_cloud, textured_cloud};

fn pcac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcac")).args(args).env_remove("PCAC_THREADS").output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn encode_decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.ply");
    let stream = dir.path().join("out.pcac");
    let rec = dir.path().join("rec.ply");
    let cloud = textured_cloud(3000, 2);
    save_ply(&cloud, &input).unwrap();

    let o = pcac(&["encode", "-i", path(&input), "-o", path(&stream), "--q", "4", "--threads", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = pcac(&["decode", "-i", path(&stream), "--geometry", path(&input), "-o", path(&rec)]);
    assert!(o.status.success(), "{}", stderr(&o));

    let decoded = load_ply(&rec).unwrap();
    assert_eq!(decoded.positions(), cloud.positions());
    let bytes = std::fs::read(&stream).unwrap();
    let expected = pcac::codec::decode_bytes(&bytes, &cloud.positions()).unwrap();
    assert_eq!(decoded, expected.cloud);

    let o = pcac(&["info", "-i", path(&stream)]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("points: 3000"), "{text}");
    assert!(text.contains("Q 4"), "{text}");
}

#[test]
fn every_knob_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.ply");
    let model = dir.path().join("model.txt");
    let stream = dir.path().join("out.pcac");
    save_ply(&random_cloud(1500, 3), &input).unwrap();
    std::fs::write(&model, "a = 0.2\nb = 1.6\n").unwrap();
    let o = pcac(&[
        "encode", "-i", path(&input), "-o", path(&stream), "--q", "20", "--no-slices", "--no-intra",
        "--no-adaptive-transform", "--no-scan-select", "--depth", "4", "--probe-depth", "3", "--t1", "50",
        "--t2", "0.2", "--delta", "3", "--tau", "30", "--lambda-model", path(&model),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(pcac(&["info", "-i", path(&stream)]).stdout).unwrap();
    assert!(text.contains("slices=false intra=false adaptive_transform=false scan_select=false"), "{text}");
    assert!(text.contains("depth 4") && text.contains("delta 3 tau 30"), "{text}");
}

#[test]
fn sweep_and_fit_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.ply");
    let csv = dir.path().join("sweep.csv");
    let model = dir.path().join("model.txt");
    save_ply(&textured_cloud(2000, 5), &input).unwrap();

    let o = pcac(&["sweep", "-i", path(&input), "--q", "4,8,16,32,64", "--csv", path(&csv)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "Q,bpp,psnr_y,psnr_u,psnr_v,encode_ms,decode_ms");
    assert_eq!(text.lines().count(), 6);

    let o = pcac(&["fit-lambda", "--csv", &format!("{},{}", path(&csv), path(&csv)), "-o", path(&model)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fitted: pcac::transform::LambdaQModel = std::fs::read_to_string(&model).unwrap().parse().unwrap();
    assert!(fitted.a > 0.0 && fitted.b.is_finite());
}

#[test]
fn ablate_writes_five_models() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.ply");
    let csv = dir.path().join("abl.csv");
    save_ply(&textured_cloud(2000, 6), &input).unwrap();
    let o = pcac(&["ablate", "-i", path(&input), "--csv", path(&csv)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("model,Q,bpp,psnr_y"));
    assert_eq!(text.lines().count(), 1 + 5 * 4);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 5);
}

#[test]
fn exit_codes_by_failure_class() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.ply");
    let other = dir.path().join("other.ply");
    let stream = dir.path().join("out.pcac");
    let rec = dir.path().join("rec.ply");
    save_ply(&random_cloud(900, 1), &input).unwrap();
    save_ply(&random_cloud(901, 1), &other).unwrap();
    assert!(pcac(&["encode", "-i", path(&input), "-o", path(&stream)]).status.success());

    // Wrong geometry is a format error with a clear message.
    let o = pcac(&["decode", "-i", path(&stream), "--geometry", path(&other), "-o", path(&rec)]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("geometry has 901 points but the bitstream codes 900"), "{}", stderr(&o));

    // Missing input file.
    let missing = dir.path().join("missing.ply");
    let o = pcac(&["encode", "-i", path(&missing), "-o", path(&stream)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("missing.ply"));

    // A PLY is not a bitstream.
    assert_eq!(pcac(&["info", "-i", path(&input)]).status.code(), Some(4));

    // Unknown flag and invalid step are argument errors.
    let o = pcac(&["encode", "-i", path(&input), "-o", path(&stream), "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
    let o = pcac(&["encode", "-i", path(&input), "-o", path(&stream), "--q", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = pcac(&["encode", "-i", path(&input), "-o", path(&stream), "--threads", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn threads_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.ply");
    let stream = dir.path().join("out.pcac");
    save_ply(&random_cloud(500, 2), &input).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_pcac"))
        .args(["encode", "-i", path(&input), "-o", path(&stream)])
        .env("PCAC_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let o = Command::new(env!("CARGO_BIN_EXE_pcac")).args(["info", "-i", path(&stream)]).env("PCAC_THREADS", "x").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
