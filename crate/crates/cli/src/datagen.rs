//! Seeded synthetic datasets and CSV export.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use coreset_consensus::{stream_rng, Label, RawPoint, StreamPurpose};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::PointDistribution;

/// Draws `n` unlabeled points with independent coordinates from `rng`.
pub fn sample_points(
    n: usize,
    dim: usize,
    distribution: PointDistribution,
    rng: &mut ChaCha8Rng,
) -> Vec<RawPoint> {
    (0..n)
        .map(|i| {
            let x: Vec<f64> = (0..dim)
                .map(|_| match distribution {
                    PointDistribution::Normal => rng.sample(StandardNormal),
                    PointDistribution::Uniform => rng.gen::<f64>() * 2.0 - 1.0,
                })
                .collect();
            RawPoint::new(i, x, None)
        })
        .collect()
}

/// Unlabeled standard-normal cloud from the dataset stream of `seed`.
pub fn standard_normal(n: usize, dim: usize, seed: u64) -> Vec<RawPoint> {
    let mut rng = stream_rng(seed, StreamPurpose::Dataset, 0);
    sample_points(n, dim, PointDistribution::Normal, &mut rng)
}

/// Two-class dataset: unit-variance Gaussians whose means sit `separation`
/// apart along the first axis. Labels alternate (+1 at even indices), so any
/// prefix is class-balanced.
pub fn two_gaussians(n: usize, dim: usize, separation: f64, seed: u64) -> Vec<RawPoint> {
    let mut rng = stream_rng(seed, StreamPurpose::Dataset, 0);
    (0..n)
        .map(|i| {
            let positive = i % 2 == 0;
            let shift = if positive { 0.5 } else { -0.5 } * separation;
            let x: Vec<f64> = (0..dim)
                .map(|k| {
                    let z: f64 = rng.sample(StandardNormal);
                    if k == 0 {
                        z + shift
                    } else {
                        z
                    }
                })
                .collect();
            let label = if positive {
                Label::Positive
            } else {
                Label::Negative
            };
            RawPoint::new(i, x, Some(label))
        })
        .collect()
}

/// Writes points as CSV: coordinate columns `x0..x{d-1}`, then a `label`
/// column (±1) when `labeled`. Floats use the shortest round-tripping form.
pub fn write_points_csv(path: &Path, points: &[RawPoint], labeled: bool) -> Result<()> {
    let dim = points.first().map_or(0, |p| p.x.len());
    let mut out = String::new();
    let mut header: Vec<String> = (0..dim).map(|k| format!("x{k}")).collect();
    if labeled {
        header.push("label".to_string());
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for p in points {
        let mut cells: Vec<String> = p.x.iter().map(|v| v.to_string()).collect();
        if labeled {
            let label = p
                .label
                .with_context(|| format!("point {} has no label", p.id))?;
            cells.push((label.sign() as i64).to_string());
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
