//! Deterministic synthetic clouds for tests, benchmarks and demos.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::cloud::{Point, PointCloud};

fn clamp_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// `n` points uniformly spread in a 1000-unit cube, all mid-gray.
pub fn uniform_cloud(n: usize, seed: u64) -> PointCloud {
    let mut rng = StdRng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| Point { position: [0; 3].map(|_| rng.gen_range(0.0..1000.0)), rgb: [128; 3] })
        .collect();
    PointCloud::new(points)
}

/// Voxelized surface with smooth colors and random texture.
///
/// The shape (height field, sphere shell or solid box), color field and noise
/// level all vary with `seed`. Coordinates are integers and may repeat.
pub fn random_cloud(n: usize, seed: u64) -> PointCloud {
    let mut rng = StdRng::seed_from_u64(seed);
    let scale = rng.gen_range(64.0..512.0f64);
    let shape = rng.gen_range(0..3);
    let noise = rng.gen_range(0.0..40.0);
    let freq = [0; 3].map(|_| rng.gen_range(0.5..4.0) / scale);
    let phase = [0; 3].map(|_| rng.gen_range(0.0..std::f64::consts::TAU));
    let points = (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            let v: f64 = rng.gen();
            let p = match shape {
                0 => [u * scale, v * scale, (scale / 8.0) * ((u * 7.0).sin() + (v * 5.0).cos())],
                1 => {
                    let theta = u * std::f64::consts::TAU;
                    let z = 2.0 * v - 1.0;
                    let r = (1.0 - z * z).sqrt();
                    [scale * r * theta.cos(), scale * r * theta.sin(), scale * z]
                }
                _ => [u * scale, v * scale, rng.gen::<f64>() * scale / 4.0],
            };
            let position = p.map(f64::round);
            let rgb = [0, 1, 2].map(|c| {
                let base = 128.0 + 100.0 * (position[c] * freq[c] + phase[c]).sin();
                clamp_u8(base + rng.gen_range(-noise..=noise))
            });
            Point { position, rgb }
        })
        .collect();
    PointCloud::new(points)
}

/// Gently curved voxel surface colored by a smooth gradient, with 10% of the
/// points replaced by uniformly random colors.
pub fn textured_cloud(n: usize, seed: u64) -> PointCloud {
    let mut rng = StdRng::seed_from_u64(seed);
    let side = (n as f64).sqrt().ceil().max(1.0) as usize;
    let s = side as f64;
    let points = (0..n)
        .map(|k| {
            let x = (k % side) as f64;
            let y = (k / side) as f64;
            let z = (6.0 * (x / 17.0).sin() + 4.0 * (y / 13.0).cos()).round();
            let rgb = if rng.gen_bool(0.1) {
                [rng.gen(), rng.gen(), rng.gen()]
            } else {
                [
                    clamp_u8(40.0 + 180.0 * x / s),
                    clamp_u8(220.0 - 160.0 * y / s),
                    clamp_u8(128.0 + 60.0 * ((x + y) / s * 3.0).sin()),
                ]
            };
            Point { position: [x, y, z], rgb }
        })
        .collect();
    PointCloud::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_determinism() {
        for n in [0, 1, 77, 1000] {
            assert_eq!(random_cloud(n, 3).len(), n);
            assert_eq!(textured_cloud(n, 3).len(), n);
            assert_eq!(uniform_cloud(n, 3).len(), n);
        }
        assert_eq!(random_cloud(500, 9), random_cloud(500, 9));
        assert_ne!(random_cloud(500, 9), random_cloud(500, 10));
    }

    #[test]
    fn texture_fraction() {
        let c = textured_cloud(20_000, 1);
        let side = 142.0;
        let off = c
            .points
            .iter()
            .filter(|p| p.rgb[0] != clamp_u8(40.0 + 180.0 * p.position[0] / side))
            .count();
        let frac = off as f64 / 20_000.0;
        assert!((0.08..0.11).contains(&frac), "{frac}");
    }
}
