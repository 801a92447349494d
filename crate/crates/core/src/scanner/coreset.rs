//! Coreset subsampling: an iid sample preserving every scanned likelihood
//! value within `eps` with probability `1 - delta`.

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// How a coreset request was resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoresetInfo {
    /// Sample size the bound asked for.
    pub target: usize,
    /// The target met or exceeded the dataset; the full data was returned.
    pub saturated: bool,
}

/// Sample size `ceil((ln^2 n / (2 eps^2)) * ln(kappa / (2 delta)))` from the
/// concentration bound: per-point log terms are bounded by `ln n` on the
/// feasible set, and a union bound covers `kappa` center evaluations.
pub fn coreset_size(n: usize, eps: f64, delta: f64, kappa: u64) -> Result<usize> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    for (name, v) in [("eps", eps), ("delta", delta)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} must lie in (0, 1), got {v}"
            )));
        }
    }
    if kappa < 1 {
        return Err(Error::InvalidParameter("kappa must be at least 1".into()));
    }
    let ln_n = (n as f64).ln();
    let t = (ln_n * ln_n / (2.0 * eps * eps)) * (kappa as f64 / (2.0 * delta)).ln();
    Ok(t.ceil().max(1.0) as usize)
}

/// Uniform iid sample with replacement of the bound's size; returns the full
/// dataset (flagged) when the bound saturates.
pub fn sample_coreset(
    data: &LabeledDataset,
    eps: f64,
    delta: f64,
    kappa: u64,
    seed: u64,
) -> Result<(LabeledDataset, CoresetInfo)> {
    let target = coreset_size(data.len(), eps, delta, kappa)?;
    if target >= data.len() {
        return Ok((
            data.clone(),
            CoresetInfo {
                target,
                saturated: true,
            },
        ));
    }
    Ok((
        sample_with_size(data, target, seed),
        CoresetInfo {
            target,
            saturated: false,
        },
    ))
}

/// Uniform iid sample with replacement of an explicit size (full clone when
/// `size >= n`). Deterministic in the seed.
pub fn sample_with_size(data: &LabeledDataset, size: usize, seed: u64) -> LabeledDataset {
    if size >= data.len() {
        return data.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = data.len();
    let indices: Vec<u32> = (0..size).map(|_| rng.gen_range(0..n) as u32).collect();
    data.subset(&indices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::MeasurementModel;
    use crate::geom::Point;

    fn data(n: usize) -> LabeledDataset {
        let points: Vec<Point> = (0..n)
            .map(|i| Point {
                x: i as f64,
                y: 0.0,
            })
            .collect();
        let measured: Vec<f64> = (0..n).map(|i| f64::from(i % 3 == 0)).collect();
        LabeledDataset::new(points, measured, MeasurementModel::Bernoulli).unwrap()
    }

    #[test]
    fn size_formula_example() {
        // n = 1e6, eps = 0.1, kappa = 1e4, delta = 0.05.
        let t = coreset_size(1_000_000, 0.1, 0.05, 10_000).unwrap();
        let ln_n = 1e6f64.ln();
        let expect = ((ln_n * ln_n / 0.02) * (1e4f64 / 0.1).ln()).ceil() as usize;
        assert_eq!(t, expect);
        assert!((t as i64 - 109_873).abs() <= 2, "t = {t}");
    }

    #[test]
    fn saturation_returns_full_dataset() {
        let d = data(50);
        let (sample, info) = sample_coreset(&d, 0.2, 0.1, 100, 7).unwrap();
        assert!(info.saturated);
        assert_eq!(sample, d);
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = data(5000);
        let a = sample_with_size(&d, 200, 99);
        let b = sample_with_size(&d, 200, 99);
        assert_eq!(a, b);
        let c = sample_with_size(&d, 200, 100);
        assert_ne!(a, c);
        assert_eq!(a.len(), 200);
    }
}
