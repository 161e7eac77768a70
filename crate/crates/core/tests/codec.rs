use pcac::codec::{decode_bytes, encode, EncoderConfig};
use pcac::entropy::{BitstreamError, ToolFlags};
use pcac::eval::{psnr_y, run_rd_sweep};
use pcac::synthetic::{random_cloud, textured_cloud};
use pcac::transform::GraphOverrides;
use pcac::{Error, Point, PointCloud};

fn closed_loop(cloud: &PointCloud, cfg: &EncoderConfig) -> Vec<u8> {
    let frame = encode(cloud, cfg).unwrap();
    let decoded = decode_bytes(&frame.bytes, &cloud.positions()).unwrap();
    assert_eq!(decoded.yuv, frame.reconstruction.yuv);
    assert_eq!(decoded.cloud, frame.reconstruction.cloud);
    frame.bytes
}

/// Smooth gradient on the left half, random colors on the right half.
fn half_noisy_cloud(n: usize) -> PointCloud {
    let side = (n as f64).sqrt().ceil() as usize;
    let mut state = 0x2545_f491_u32;
    let mut noise = move || {
        state ^= state << 13;
        state ^= state >> 17;
        state ^= state << 5;
        (state >> 24) as u8
    };
    let points = (0..n)
        .map(|k| {
            let (x, y) = (k % side, k / side);
            let rgb = if 2 * x >= side {
                [noise(), noise(), noise()]
            } else {
                [(60 + x) as u8, (200 - y) as u8, 90]
            };
            Point { position: [x as f64, y as f64, 0.0], rgb }
        })
        .collect();
    PointCloud::new(points)
}

#[test]
fn every_tool_combination_round_trips() {
    let cloud = half_noisy_cloud(3000);
    let mut streams = Vec::new();
    for bits in 0..16u8 {
        let tools = ToolFlags::from_byte(bits).unwrap();
        let cfg = EncoderConfig::with_q(12.0).with_tools(tools);
        streams.push(closed_loop(&cloud, &cfg));
    }
    let all_on = encode(&cloud, &EncoderConfig::with_q(12.0)).unwrap();
    assert_eq!(all_on.stats.slices, 2);
    // Each tool on its own changes the coded payload.
    for bit in 0..4 {
        assert_ne!(streams[1 << bit][6..], streams[0][6..], "tool bit {bit} had no effect");
    }
}

#[test]
fn graph_overrides_and_depth() {
    let cloud = random_cloud(1500, 4);
    let cfg = EncoderConfig {
        depth: Some(5),
        graph: GraphOverrides { delta: Some(7.5), tau: Some(40.0) },
        ..EncoderConfig::with_q(20.0)
    };
    closed_loop(&cloud, &cfg);
    let too_deep = EncoderConfig { depth: Some(12), ..EncoderConfig::with_q(20.0) };
    assert!(matches!(encode(&cloud, &too_deep), Err(Error::Partition(_))));
}

#[test]
fn tiny_and_empty_clouds() {
    for n in [0, 1, 2, 3, 199, 200] {
        let cloud = random_cloud(n, n as u64);
        let bytes = closed_loop(&cloud, &EncoderConfig::with_q(8.0));
        if n == 0 {
            assert_eq!(bytes.len(), 16);
        }
    }
}

#[test]
fn uniform_gray_codes_no_coefficients() {
    let cloud = PointCloud::from_positions(&random_cloud(2000, 1).positions(), [128, 128, 128]);
    let frame = encode(&cloud, &EncoderConfig::with_q(8.0)).unwrap();
    assert_eq!(frame.stats.empty_blocks, frame.stats.blocks);
    assert_eq!(frame.reconstruction.cloud, cloud);
}

#[test]
fn uniform_color_is_reproduced_exactly() {
    // A fine step keeps the per-point error of the first block well under the
    // RGB rounding margin; later blocks predict it exactly.
    let cloud = PointCloud::from_positions(&random_cloud(2000, 5).positions(), [200, 30, 90]);
    let frame = encode(&cloud, &EncoderConfig::with_q(1.0)).unwrap();
    let decoded = decode_bytes(&frame.bytes, &cloud.positions()).unwrap();
    assert_eq!(decoded.cloud, cloud);
    assert_eq!(psnr_y(&cloud.yuv(), &pcac::color::rgb_to_yuv(&decoded.cloud.colors())).unwrap(), 100.0);
}

#[test]
fn mismatched_geometry_is_rejected() {
    let cloud = random_cloud(800, 3);
    let frame = encode(&cloud, &EncoderConfig::default()).unwrap();
    let err = decode_bytes(&frame.bytes, &cloud.positions()[..799]).unwrap_err();
    assert!(matches!(err, Error::GeometryMismatch { expected: 800, found: 799 }));
}

#[test]
fn tampered_streams_fail_loudly() {
    let cloud = textured_cloud(1200, 8);
    let frame = encode(&cloud, &EncoderConfig::with_q(10.0)).unwrap();
    let positions = cloud.positions();
    for i in (0..frame.bytes.len()).step_by(7) {
        let mut bad = frame.bytes.clone();
        bad[i] ^= 0x24;
        assert!(decode_bytes(&bad, &positions).is_err(), "byte {i} flip went unnoticed");
    }
    let err = decode_bytes(&frame.bytes[..frame.bytes.len() - 3], &positions).unwrap_err();
    assert!(matches!(err, Error::Bitstream(BitstreamError::Truncated(_))));
}

#[test]
fn rate_falls_as_step_grows() {
    let cloud = textured_cloud(6000, 11);
    let rows = run_rd_sweep(&cloud, &EncoderConfig::default(), &[8.0, 16.0, 32.0, 64.0]).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].bpp < w[0].bpp, "{rows:?}");
        assert!(w[1].psnr_y < w[0].psnr_y, "{rows:?}");
    }
}

#[test]
fn duplicate_positions_are_handled() {
    let mut points = Vec::new();
    for k in 0..600 {
        let position = [(k % 7) as f64, 0.0, 0.0];
        points.push(Point { position, rgb: [(k * 13 % 256) as u8, 50, (k % 256) as u8] });
    }
    closed_loop(&PointCloud::new(points), &EncoderConfig::with_q(16.0));
}
