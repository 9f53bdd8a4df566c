//! Synthetic stand-ins with the column layout of the real datasets. They
//! exercise the file-backed presets; they are not the real data.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::Path;

use subsel_core::rng::SeedStream;

pub const CALIFORNIA_HEADER: &str =
    "MedInc,HouseAge,AveRooms,AveBedrms,Population,AveOccup,Latitude,Longitude,MedHouseVal";

/// Housing-like rows. A fifth of them fall inside the preset's target box,
/// where prices respond to income more steeply than elsewhere.
pub fn write_california_fixture(path: &Path, n: usize, seed: u64) {
    let mut rng = SeedStream::new(seed);
    let mut text = String::from(CALIFORNIA_HEADER);
    text.push('\n');
    for i in 0..n {
        let (lat, lon) = if i % 5 == 0 {
            (37.0 + 1.5 * rng.open_uniform(), -123.0 + 1.5 * rng.open_uniform())
        } else {
            (32.5 + 4.4 * rng.uniform(), -121.4 + 7.0 * rng.uniform())
        };
        let income = (1.0 + 0.5 * rng.standard_normal()).exp();
        let age = 1.0 + (51.0 * rng.uniform()).floor();
        let rooms = 4.0 + 1.5 * rng.uniform() + 0.3 * income;
        let bedrooms = 1.0 + 0.2 * rng.uniform();
        let population = (300.0 + 3000.0 * rng.uniform()).round();
        let occupancy = 2.0 + 2.0 * rng.uniform();
        let slope = if lat > 36.0 { 0.8 } else { 0.3 + 0.01 * (lat - 32.5) };
        let value = (0.5 + slope * income - 0.004 * age + 0.05 * rooms - 0.1 * (lon + 118.0)
            + 0.2 * rng.standard_normal())
        .clamp(0.15, 5.0);
        let _ = writeln!(
            text,
            "{income:.4},{age},{rooms:.5},{bedrooms:.5},{population},{occupancy:.5},{lat:.2},{lon:.2},{value:.5}"
        );
    }
    std::fs::write(path, text).unwrap();
}

/// Precomputed-representation rows: `p` numeric columns, a 0/1 `label`, a
/// `hospital` id in 1..=5 and `split` (`source` or `target`). Target rows come
/// from hospital 5's distribution.
pub fn write_features_fixture(path: &Path, n: usize, p: usize, seed: u64) {
    let mut rng = SeedStream::new(seed);
    let mut text: String = (1..=p).map(|j| format!("f{j},")).collect();
    text.push_str("label,hospital,split\n");
    let w: Vec<f64> = (0..p).map(|_| rng.standard_normal() / (p as f64).sqrt()).collect();
    for i in 0..n {
        let target = i % 6 == 0;
        let hospital = if target { 5 } else { 1 + i % 5 };
        let shift = hospital as f64 * 0.3;
        let x: Vec<f64> = (0..p).map(|j| rng.standard_normal() + if j < 5 { shift } else { 0.0 }).collect();
        let eta: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() * 2.0 - shift;
        let label = u8::from(rng.uniform() < 1.0 / (1.0 + (-eta).exp()));
        for v in &x {
            let _ = write!(text, "{v:.6},");
        }
        let _ = writeln!(text, "{label},{hospital},{}", if target { "target" } else { "source" });
    }
    std::fs::write(path, text).unwrap();
}
