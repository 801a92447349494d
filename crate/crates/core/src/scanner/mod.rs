//! Scan algorithms over candidate kernel centers.
//!
//! Four algorithms share one evaluation engine and differ in where their
//! candidate centers come from and how much of the dataset each center
//! inspects:
//!
//! - `Grid`: fixed grid, full dataset, exact kernels.
//! - `Prune`: fixed grid, truncated kernels; each coarse cell's centers only
//!   walk the points in the cell's expanded window, with everything outside
//!   folded into closed-form aggregates. An exact rewrite of truncated
//!   evaluation, so only the truncation error budget is spent.
//! - `Adaptive`: density-adaptive grid, full dataset, truncated kernels.
//! - `Fast`: adaptive grid plus pruned windows, additionally collapsing
//!   window points beyond the truncation radius of the current center into
//!   the aggregates.
//! - `Disk`: the combinatorial disk baseline (see [`crate::disk`]).
//!
//! Every scan is deterministic in `(data, config)` regardless of thread
//! count: centers are processed in fixed chunks (grid order for `Grid`,
//! coarse-cell order otherwise), warm starts chain within a chunk only, and
//! the reduction breaks ties toward the lexicographically smallest center.

mod coreset;
mod engine;

pub use coreset::{coreset_size, sample_coreset, sample_with_size, CoresetInfo};
pub use engine::PrunedCellView;

use crate::data::{LabeledDataset, MeasurementModel};
use crate::error::{Error, Result};
use crate::geom::{self, Domain, Point};
use crate::likelihood::{RatePair, SolverConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanAlgorithm {
    Grid,
    Prune,
    Adaptive,
    Fast,
    Disk,
}

impl ScanAlgorithm {
    pub fn name(&self) -> &'static str {
        match self {
            ScanAlgorithm::Grid => "grid",
            ScanAlgorithm::Prune => "prune",
            ScanAlgorithm::Adaptive => "adaptive",
            ScanAlgorithm::Fast => "fast",
            ScanAlgorithm::Disk => "disk",
        }
    }
}

impl std::str::FromStr for ScanAlgorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(ScanAlgorithm::Grid),
            "prune" => Ok(ScanAlgorithm::Prune),
            "adaptive" => Ok(ScanAlgorithm::Adaptive),
            "fast" => Ok(ScanAlgorithm::Fast),
            "disk" => Ok(ScanAlgorithm::Disk),
            other => Err(Error::InvalidParameter(format!(
                "unknown algorithm '{other}'"
            ))),
        }
    }
}

/// Full configuration of one scan invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Additive error budget in (0, 1).
    pub epsilon: f64,
    /// Kernel bandwidth to scan at.
    pub bandwidth: f64,
    pub algorithm: ScanAlgorithm,
    pub solver: SolverConfig,
    /// Seed for the optional coreset subsample.
    pub seed: u64,
    /// Subsample the dataset to this size before scanning.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub coreset_size: Option<usize>,
    /// Scan a ladder of bandwidths instead of a single one.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bandwidth_range: Option<(f64, f64)>,
    /// Known noise scale for Gaussian data.
    pub sigma: f64,
    /// Multiplier on the adaptive fine-grid spacing. 1.0 keeps the untuned
    /// constants of the construction; larger values match practice.
    pub grid_scale: f64,
    /// Guard against runaway grids.
    pub max_grid_centers: u64,
}

impl ScanConfig {
    pub fn new(algorithm: ScanAlgorithm, epsilon: f64, bandwidth: f64) -> Self {
        ScanConfig {
            epsilon,
            bandwidth,
            algorithm,
            solver: SolverConfig::default(),
            seed: 0,
            coreset_size: None,
            bandwidth_range: None,
            sigma: 1.0,
            grid_scale: 1.0,
            max_grid_centers: geom::DEFAULT_MAX_GRID_CENTERS,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.bandwidth > 0.0) || !self.bandwidth.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {}",
                self.bandwidth
            )));
        }
        if let Some((lo, hi)) = self.bandwidth_range {
            if !(lo > 0.0 && lo <= hi) {
                return Err(Error::InvalidParameter(format!(
                    "bandwidth range [{lo}, {hi}] must satisfy 0 < lo <= hi"
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of a scan: the maximizing region and work counters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub best_center: Point,
    /// Bandwidth of the winning region (disk scans store the disk radius).
    pub best_bandwidth: f64,
    pub rates: RatePair,
    pub phi: f64,
    pub centers_evaluated: u64,
    /// Point-term evaluations performed, after pruning.
    pub points_scanned: u64,
    pub elapsed_seconds: f64,
    pub algorithm: ScanAlgorithm,
}

/// Runs the configured scan. With `coreset_size` set the dataset is first
/// subsampled (seeded, with replacement); `bandwidth_range` switches to the
/// multi-bandwidth ladder.
pub fn scan(data: &LabeledDataset, domain: &Domain, config: &ScanConfig) -> Result<ScanResult> {
    config.validate()?;
    domain.validate_covers(data)?;
    if config.bandwidth_range.is_some() {
        return scan_multi_bandwidth(data, domain, config);
    }
    let sampled;
    let data = match config.coreset_size {
        Some(t) => {
            sampled = sample_with_size(data, t, config.seed);
            &sampled
        }
        None => data,
    };
    match config.algorithm {
        ScanAlgorithm::Grid => engine::grid_scan(data, domain, config, engine::GridMode::Exact),
        ScanAlgorithm::Prune => engine::grid_scan(data, domain, config, engine::GridMode::Pruned),
        ScanAlgorithm::Adaptive => engine::adaptive_scan(data, domain, config, false),
        ScanAlgorithm::Fast => engine::adaptive_scan(data, domain, config, true),
        ScanAlgorithm::Disk => crate::disk::disk_scan(data, domain, config),
    }
}

/// Reference evaluation path for the pruning rewrite: the same centers,
/// traversal, and warm-start chains as `Prune`, but every center walks the
/// full dataset with truncated kernels. `Prune` must match it to rounding.
pub fn truncated_reference_scan(
    data: &LabeledDataset,
    domain: &Domain,
    config: &ScanConfig,
) -> Result<ScanResult> {
    config.validate()?;
    domain.validate_covers(data)?;
    engine::grid_scan(data, domain, config, engine::GridMode::TruncatedFull)
}

/// Geometric bandwidth ladder covering `[r_min, r_max]` with ratio
/// `1 + eps e / 4`, so any bandwidth in the range is within one ratio step
/// of a ladder element.
pub fn bandwidth_ladder(r_min: f64, r_max: f64, eps: f64) -> Result<Vec<f64>> {
    if !(r_min > 0.0 && r_min <= r_max) {
        return Err(Error::InvalidParameter(format!(
            "bandwidth range [{r_min}, {r_max}] must satisfy 0 < r_min <= r_max"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    let ratio = 1.0 + eps * std::f64::consts::E / 4.0;
    let steps = if r_min == r_max {
        0
    } else {
        ((r_max / r_min).ln() / ratio.ln()).ceil() as usize
    };
    Ok((0..=steps).map(|i| r_min * ratio.powi(i as i32)).collect())
}

/// Runs the configured scan at every ladder bandwidth and returns the
/// overall maximum, with the winning bandwidth recorded. Work counters
/// accumulate across the ladder.
pub fn scan_multi_bandwidth(
    data: &LabeledDataset,
    domain: &Domain,
    config: &ScanConfig,
) -> Result<ScanResult> {
    let (lo, hi) = config.bandwidth_range.ok_or_else(|| {
        Error::InvalidParameter("scan_multi_bandwidth requires a bandwidth range".into())
    })?;
    let ladder = bandwidth_ladder(lo, hi, config.epsilon)?;
    let sampled;
    let data = match config.coreset_size {
        Some(t) => {
            sampled = sample_with_size(data, t, config.seed);
            &sampled
        }
        None => data,
    };

    let start = std::time::Instant::now();
    let mut best: Option<ScanResult> = None;
    let mut centers = 0u64;
    let mut points = 0u64;
    for r in ladder {
        let mut inner = config.clone();
        inner.bandwidth = r;
        inner.bandwidth_range = None;
        inner.coreset_size = None;
        let result = scan(data, domain, &inner)?;
        centers += result.centers_evaluated;
        points += result.points_scanned;
        let better = match &best {
            None => true,
            Some(b) => {
                result.phi > b.phi
                    || (result.phi == b.phi
                        && (
                            result.best_center.x,
                            result.best_center.y,
                            result.best_bandwidth,
                        ) < (b.best_center.x, b.best_center.y, b.best_bandwidth))
            }
        };
        if better {
            best = Some(result);
        }
    }
    let mut out = best.expect("ladder is never empty");
    out.centers_evaluated = centers;
    out.points_scanned = points;
    out.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Center count of the fixed grid a scan at `(r, eps)` would enumerate;
/// the default union-bound arity for coreset sizing.
pub fn planned_center_count(domain: &Domain, r: f64, eps: f64) -> Result<u64> {
    Ok(geom::build_fixed_grid(domain, r, eps, u64::MAX)?.center_count())
}

/// Model-specific degenerate-data check: scans of such data return the null
/// result immediately.
pub(crate) fn degenerate_null_scan(data: &LabeledDataset) -> Option<f64> {
    match data.model {
        MeasurementModel::Bernoulli => {
            let m = data.measured_count();
            (m == 0 || m == data.len()).then(|| m as f64 / data.len() as f64)
        }
        MeasurementModel::Poisson => (data.measured_mean() == 0.0).then_some(0.0),
        MeasurementModel::Gaussian => None,
    }
}

pub(crate) fn null_scan_result(
    q0: f64,
    grid_origin: Point,
    bandwidth: f64,
    algorithm: ScanAlgorithm,
    centers: u64,
    elapsed: f64,
) -> ScanResult {
    ScanResult {
        best_center: grid_origin,
        best_bandwidth: bandwidth,
        rates: RatePair { p: q0, q: q0 },
        phi: 0.0,
        centers_evaluated: centers,
        points_scanned: 0,
        elapsed_seconds: elapsed,
        algorithm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_degenerate_range() {
        let l = bandwidth_ladder(2.5, 2.5, 0.3).unwrap();
        assert_eq!(l, vec![2.5]);
    }

    #[test]
    fn ladder_step_count_example() {
        let l = bandwidth_ladder(1.0, 1000.0, 0.5).unwrap();
        let ratio = 1.0 + 0.5 * std::f64::consts::E / 4.0;
        let s = ((1000.0f64).ln() / ratio.ln()).ceil() as usize;
        assert_eq!(s, 24);
        assert_eq!(l.len(), s + 1);
        assert!((l[0] - 1.0).abs() < 1e-15);
        assert!(*l.last().unwrap() >= 1000.0 * (1.0 - 1e-12));
    }

    #[test]
    fn ladder_covers_range_within_one_ratio() {
        let eps = 0.37;
        let ladder = bandwidth_ladder(0.2, 57.0, eps).unwrap();
        let ratio = 1.0 + eps * std::f64::consts::E / 4.0;
        let mut r = 0.2;
        while r <= 57.0 {
            let nearest = ladder
                .iter()
                .map(|&l| (r / l).max(l / r))
                .fold(f64::INFINITY, f64::min);
            assert!(nearest <= ratio + 1e-12, "bandwidth {r} uncovered");
            r *= 1.07;
        }
    }

    #[test]
    fn algorithm_parse_roundtrip() {
        for name in ["grid", "prune", "adaptive", "fast", "disk"] {
            let a: ScanAlgorithm = name.parse().unwrap();
            assert_eq!(a.name(), name);
        }
        assert!("blob".parse::<ScanAlgorithm>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = ScanConfig::new(ScanAlgorithm::Grid, 0.0, 1.0);
        assert!(c.validate().is_err());
        c.epsilon = 0.2;
        c.bandwidth = -1.0;
        assert!(c.validate().is_err());
        c.bandwidth = 1.0;
        c.bandwidth_range = Some((2.0, 1.0));
        assert!(c.validate().is_err());
        c.bandwidth_range = Some((1.0, 2.0));
        assert!(c.validate().is_ok());
    }
}
