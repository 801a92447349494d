//! Planted-anomaly experiments: synthetic baselines, anomaly planting,
//! recovery metrics, and the power / timing / bandwidth-sensitivity
//! harnesses.
//!
//! A trial plants a ground-truth kernel region over baseline points, draws
//! Bernoulli labels at rate `p` inside the affected group and `q` outside,
//! subsamples, scans, and scores the recovered region against the planted
//! one. Per-trial seeds derive from the master seed and trial index, so
//! trials are schedule-independent.

use crate::data::{LabeledDataset, MeasurementModel};
use crate::error::{Error, Result};
use crate::geom::{Domain, KernelRegion, Point};
use crate::scanner::{self, sample_with_size, ScanAlgorithm, ScanConfig, ScanResult};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Ground truth for one planted anomaly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantSpec {
    /// The planted region.
    pub kernel: KernelRegion,
    /// Label rate inside the affected group.
    pub p_rate: f64,
    /// Background label rate.
    pub q_rate: f64,
    /// Fraction of the baseline the region was sized to affect, when the
    /// bandwidth was solved from a target fraction.
    pub target_fraction: Option<f64>,
    pub seed: u64,
}

impl PlantSpec {
    pub fn new(kernel: KernelRegion, p_rate: f64, q_rate: f64, seed: u64) -> Result<Self> {
        if !(0.0 < q_rate && q_rate < p_rate && p_rate < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "plant rates must satisfy 0 < q < p < 1, got p={p_rate}, q={q_rate}"
            )));
        }
        Ok(PlantSpec {
            kernel,
            p_rate,
            q_rate,
            target_fraction: None,
            seed,
        })
    }
}

/// Assigns each baseline point to the affected group with probability
/// `K(x)`, then draws its label at the group's rate. Two draws per point in
/// point order, so identical inputs reproduce identical datasets.
pub fn plant_anomaly(baseline: &[Point], spec: &PlantSpec) -> Result<LabeledDataset> {
    if baseline.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut measured = Vec::with_capacity(baseline.len());
    for p in baseline {
        let affected = rng.gen::<f64>() < spec.kernel.eval(p);
        let rate = if affected { spec.p_rate } else { spec.q_rate };
        measured.push(f64::from(rng.gen::<f64>() < rate));
    }
    LabeledDataset::new(baseline.to_vec(), measured, MeasurementModel::Bernoulli)
}

/// Result of sizing a bandwidth to hit a target affected fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthFit {
    pub bandwidth: f64,
    pub achieved_fraction: f64,
    /// Bisection closed to within the tolerance.
    pub converged: bool,
    pub iterations: usize,
}

/// Expected affected fraction `sum K(x) / n` at bandwidth `r`.
fn affected_fraction(baseline: &[Point], center: Point, r: f64) -> f64 {
    let kernel = KernelRegion {
        center,
        bandwidth: r,
        truncation_radius: None,
    };
    baseline.iter().map(|p| kernel.eval(p)).sum::<f64>() / baseline.len() as f64
}

/// Bisection on the bandwidth until the expected affected fraction is
/// within `1e-3` of the target (at most 60 iterations). The fraction is
/// monotone nondecreasing in the bandwidth. When the target is unreachable
/// from below (all mass at the center already exceeds it) the smallest
/// probed bandwidth is reported unconverged.
pub fn solve_bandwidth_for_fraction(
    baseline: &[Point],
    center: Point,
    f: f64,
) -> Result<BandwidthFit> {
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "target fraction must lie in (0, 1), got {f}"
        )));
    }
    if baseline.is_empty() {
        return Err(Error::EmptyDataset);
    }
    const TOL: f64 = 1e-3;
    const MAX_ITERS: usize = 60;

    let max_dist = baseline
        .iter()
        .map(|p| center.dist(p))
        .fold(0.0f64, f64::max);
    if max_dist == 0.0 {
        // Every point sits at the center: the fraction is 1 at any
        // bandwidth. Report the smallest probe.
        return Ok(BandwidthFit {
            bandwidth: f64::MIN_POSITIVE,
            achieved_fraction: 1.0,
            converged: false,
            iterations: 0,
        });
    }
    let mut lo = max_dist * 1e-9;
    if affected_fraction(baseline, center, lo) >= f {
        return Ok(BandwidthFit {
            bandwidth: lo,
            achieved_fraction: affected_fraction(baseline, center, lo),
            converged: false,
            iterations: 0,
        });
    }
    let mut hi = max_dist;
    let mut grow = 0;
    while affected_fraction(baseline, center, hi) < f && grow < 200 {
        hi *= 2.0;
        grow += 1;
    }
    let mut best = BandwidthFit {
        bandwidth: hi,
        achieved_fraction: affected_fraction(baseline, center, hi),
        converged: false,
        iterations: 0,
    };
    for iter in 1..=MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        let frac = affected_fraction(baseline, center, mid);
        if (frac - f).abs() < (best.achieved_fraction - f).abs() {
            best = BandwidthFit {
                bandwidth: mid,
                achieved_fraction: frac,
                converged: false,
                iterations: iter,
            };
        }
        if (frac - f).abs() <= TOL {
            best.converged = true;
            best.iterations = iter;
            break;
        }
        if frac < f {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

/// Extended Jaccard similarity between two kernel regions over the baseline:
/// `<K, K'> / (<K, K> + <K', K'> - <K, K'>)` with the inner product summed
/// over the points. When both kernels vanish on every point the value is 1
/// for identical regions and 0 otherwise.
pub fn metric_jaccard(k: &KernelRegion, k_hat: &KernelRegion, baseline: &[Point]) -> f64 {
    let mut cross = 0.0;
    let mut self_a = 0.0;
    let mut self_b = 0.0;
    for p in baseline {
        let a = k.eval(p);
        let b = k_hat.eval(p);
        cross += a * b;
        self_a += a * a;
        self_b += b * b;
    }
    let denom = self_a + self_b - cross;
    if denom <= 0.0 {
        return f64::from(k == k_hat);
    }
    cross / denom
}

/// One harness cell: a planted trial, its scan outcome, and the recovery
/// metrics. Scan failures are recorded, never dropped.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub algorithm: ScanAlgorithm,
    /// Coreset size for power sweeps; baseline size when unsampled.
    pub sample_size: usize,
    /// Bandwidth scale factor (bandwidth-sensitivity sweeps; 1 otherwise).
    pub scale: f64,
    pub trial: usize,
    pub trial_seed: u64,
    pub ground_truth: PlantSpec,
    pub result: Option<ScanResult>,
    pub error: Option<String>,
    /// Distance between planted and recovered centers.
    pub center_distance: Option<f64>,
    /// Extended Jaccard between the planted kernel and a kernel at the
    /// recovered center with the planted bandwidth (center recovery).
    pub jaccard: Option<f64>,
    pub phi_found: Option<f64>,
    pub runtime_seconds: Option<f64>,
}

/// Synthetic baseline kinds standing in for real point data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Uniform,
    Clustered,
}

impl std::str::FromStr for BaselineKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(BaselineKind::Uniform),
            "clustered" => Ok(BaselineKind::Clustered),
            other => Err(Error::InvalidParameter(format!(
                "unknown baseline kind '{other}'"
            ))),
        }
    }
}

/// Draws a synthetic baseline: iid uniform over the domain, or a mixture of
/// 10 isotropic Gaussian clusters with seeded random centers, redrawn (then
/// clamped) to stay inside the domain.
pub fn synth_baseline(
    kind: BaselineKind,
    n: usize,
    seed: u64,
    domain: &Domain,
) -> Result<Vec<Point>> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    match kind {
        BaselineKind::Uniform => {
            for _ in 0..n {
                points.push(Point {
                    x: rng.gen_range(domain.x_lo..=domain.x_hi),
                    y: rng.gen_range(domain.y_lo..=domain.y_hi),
                });
            }
        }
        BaselineKind::Clustered => {
            const CLUSTERS: usize = 10;
            let sigma = domain.width().min(domain.height()).max(f64::MIN_POSITIVE) / 25.0;
            let centers: Vec<Point> = (0..CLUSTERS)
                .map(|_| Point {
                    x: rng.gen_range(domain.x_lo..=domain.x_hi),
                    y: rng.gen_range(domain.y_lo..=domain.y_hi),
                })
                .collect();
            for _ in 0..n {
                let c = centers[rng.gen_range(0..CLUSTERS)];
                let mut drawn = Point { x: c.x, y: c.y };
                for attempt in 0..100 {
                    let dx = sigma * standard_normal(&mut rng);
                    let dy = sigma * standard_normal(&mut rng);
                    drawn = Point {
                        x: c.x + dx,
                        y: c.y + dy,
                    };
                    if domain.contains(&drawn) {
                        break;
                    }
                    if attempt == 99 {
                        drawn = Point {
                            x: drawn.x.clamp(domain.x_lo, domain.x_hi),
                            y: drawn.y.clamp(domain.y_lo, domain.y_hi),
                        };
                    }
                }
                points.push(drawn);
            }
        }
    }
    Ok(points)
}

/// Box-Muller draw; two uniforms per call keeps the stream length fixed.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Splits a master seed into independent per-use seeds.
pub fn derive_seed(master: u64, tag: u64, index: u64) -> u64 {
    // SplitMix64 over the combined words.
    let mut z = master
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(tag.rotate_left(17))
        .wrapping_add(index.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Configuration shared by the harness sweeps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub epsilon: f64,
    pub p_rate: f64,
    pub q_rate: f64,
    /// Target affected fraction used to size each trial's bandwidth.
    pub target_fraction: f64,
    pub trials: usize,
    pub master_seed: u64,
    /// Scale on the adaptive construction passed through to scans.
    pub grid_scale: f64,
    pub strict_solver: bool,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            epsilon: 0.1,
            p_rate: 0.8,
            q_rate: 0.5,
            target_fraction: 0.03,
            trials: 20,
            master_seed: 0x5eed_cafe,
            grid_scale: 1.0,
            strict_solver: false,
        }
    }
}

/// Plants one trial: picks a baseline point as the epicenter (seeded),
/// sizes the bandwidth for the target fraction, and draws labels.
pub fn plant_trial(
    baseline: &[Point],
    cfg: &HarnessConfig,
    trial: usize,
) -> Result<(PlantSpec, LabeledDataset)> {
    let seed = derive_seed(cfg.master_seed, 0x01a7, trial as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = baseline[rng.gen_range(0..baseline.len())];
    let fit = solve_bandwidth_for_fraction(baseline, center, cfg.target_fraction)?;
    let kernel = KernelRegion::new(center, fit.bandwidth)?;
    let mut spec = PlantSpec::new(kernel, cfg.p_rate, cfg.q_rate, derive_seed(seed, 2, 0))?;
    spec.target_fraction = Some(cfg.target_fraction);
    let data = plant_anomaly(baseline, &spec)?;
    Ok((spec, data))
}

fn scan_config(
    algorithm: ScanAlgorithm,
    bandwidth: f64,
    cfg: &HarnessConfig,
    seed: u64,
) -> ScanConfig {
    let mut sc = ScanConfig::new(algorithm, cfg.epsilon, bandwidth);
    sc.seed = seed;
    sc.grid_scale = cfg.grid_scale;
    if cfg.strict_solver {
        sc.solver = crate::likelihood::SolverConfig::strict();
    }
    sc
}

/// Runs one already-planted trial cell: subsample, scan, score.
pub fn run_cell(
    baseline: &[Point],
    domain: &Domain,
    cfg: &HarnessConfig,
    spec: &PlantSpec,
    data: &LabeledDataset,
    algorithm: ScanAlgorithm,
    sample_size: usize,
    scale: f64,
    trial: usize,
) -> ExperimentRecord {
    let trial_seed = derive_seed(cfg.master_seed, 0xce11, trial as u64);
    let sample = sample_with_size(data, sample_size, derive_seed(trial_seed, 3, 0));
    let bandwidth = spec.kernel.bandwidth * scale;
    let config = scan_config(algorithm, bandwidth, cfg, trial_seed);
    let mut record = ExperimentRecord {
        algorithm,
        sample_size,
        scale,
        trial,
        trial_seed,
        ground_truth: *spec,
        result: None,
        error: None,
        center_distance: None,
        jaccard: None,
        phi_found: None,
        runtime_seconds: None,
    };
    match scanner::scan(&sample, domain, &config) {
        Ok(result) => {
            let recovered = KernelRegion {
                center: result.best_center,
                bandwidth: spec.kernel.bandwidth,
                truncation_radius: None,
            };
            record.center_distance = Some(spec.kernel.center.dist(&result.best_center));
            record.jaccard = Some(metric_jaccard(&spec.kernel, &recovered, baseline));
            record.phi_found = Some(result.phi);
            record.runtime_seconds = Some(result.elapsed_seconds);
            record.result = Some(result);
        }
        Err(err) => record.error = Some(err.to_string()),
    }
    record
}

/// Power sweep: one record per (algorithm, sample size, trial).
pub fn power_experiment(
    baseline: &[Point],
    domain: &Domain,
    cfg: &HarnessConfig,
    algorithms: &[ScanAlgorithm],
    sample_sizes: &[usize],
) -> Result<Vec<ExperimentRecord>> {
    let mut records = Vec::new();
    for trial in 0..cfg.trials {
        let (spec, data) = plant_trial(baseline, cfg, trial)?;
        for &algorithm in algorithms {
            for &size in sample_sizes {
                records.push(run_cell(
                    baseline, domain, cfg, &spec, &data, algorithm, size, 1.0, trial,
                ));
            }
        }
    }
    Ok(records)
}

/// Bandwidth-sensitivity sweep: scans each trial at `bandwidth * scale` for
/// every scale in the grid, at a fixed sample size.
pub fn bandwidth_sensitivity(
    baseline: &[Point],
    domain: &Domain,
    cfg: &HarnessConfig,
    algorithm: ScanAlgorithm,
    sample_size: usize,
    scales: &[f64],
) -> Result<Vec<ExperimentRecord>> {
    for &s in scales {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bandwidth scale must be positive, got {s}"
            )));
        }
    }
    let mut records = Vec::new();
    for trial in 0..cfg.trials {
        let (spec, data) = plant_trial(baseline, cfg, trial)?;
        for &scale in scales {
            records.push(run_cell(
                baseline,
                domain,
                cfg,
                &spec,
                &data,
                algorithm,
                sample_size,
                scale,
                trial,
            ));
        }
    }
    Ok(records)
}

/// Median of the valid values of one metric across records (pairwise
/// midpoint on even counts); `None` when every record failed.
pub fn median(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let mut v: Vec<f64> = values.flatten().collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}

/// 95th-percentile discrepancy over null plants (labels iid at the
/// background rate): the harness threshold for "indistinguishable from
/// null" checks.
pub fn null_phi_threshold(
    baseline: &[Point],
    domain: &Domain,
    cfg: &HarnessConfig,
    algorithm: ScanAlgorithm,
    bandwidth: f64,
    plants: usize,
) -> Result<f64> {
    let mut phis = Vec::with_capacity(plants);
    for i in 0..plants {
        let seed = derive_seed(cfg.master_seed, 0x9911, i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let measured: Vec<f64> = baseline
            .iter()
            .map(|_| f64::from(rng.gen::<f64>() < cfg.q_rate))
            .collect();
        let data = LabeledDataset::new(baseline.to_vec(), measured, MeasurementModel::Bernoulli)?;
        let config = scan_config(algorithm, bandwidth, cfg, seed);
        phis.push(scanner::scan(&data, domain, &config)?.phi);
    }
    phis.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = ((plants as f64) * 0.95).ceil() as usize - 1;
    Ok(phis[idx.min(plants - 1)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plant_extremes_follow_rates() {
        let baseline: Vec<Point> = (0..4000)
            .map(|i| Point {
                x: (i % 100) as f64,
                y: (i / 100) as f64,
            })
            .collect();
        // A kernel so tight it affects nobody: labels at the q rate.
        let tight = KernelRegion::new(Point { x: -500.0, y: 0.0 }, 1e-6).unwrap();
        let spec = PlantSpec::new(tight, 0.9, 0.4, 77).unwrap();
        let data = plant_anomaly(&baseline, &spec).unwrap();
        let mean = data.measured_mean();
        let sd = (0.4f64 * 0.6 / 4000.0).sqrt();
        assert!((mean - 0.4).abs() < 3.0 * sd, "mean {mean}");

        // A kernel covering everything: labels at the p rate.
        let wide = KernelRegion::new(Point { x: 50.0, y: 20.0 }, 1e9).unwrap();
        let spec = PlantSpec::new(wide, 0.9, 0.4, 78).unwrap();
        let data = plant_anomaly(&baseline, &spec).unwrap();
        let mean = data.measured_mean();
        let sd = (0.9f64 * 0.1 / 4000.0).sqrt();
        assert!((mean - 0.9).abs() < 3.0 * sd, "mean {mean}");
    }

    #[test]
    fn plant_group_size_matches_expectation() {
        let domain = Domain::new(0.0, 10.0, 0.0, 10.0).unwrap();
        let baseline = synth_baseline(BaselineKind::Uniform, 5000, 5, &domain).unwrap();
        let kernel = KernelRegion::new(Point { x: 5.0, y: 5.0 }, 1.5).unwrap();
        // Distinguish group membership via extreme rates: p ~ 1, q ~ 0.
        let spec = PlantSpec::new(kernel, 0.999999, 1e-9, 13).unwrap();
        let data = plant_anomaly(&baseline, &spec).unwrap();
        let expected: f64 = baseline.iter().map(|p| kernel.eval(p)).sum();
        let var: f64 = baseline
            .iter()
            .map(|p| {
                let k = kernel.eval(p);
                k * (1.0 - k)
            })
            .sum();
        let planted = data.measured_count() as f64;
        assert!(
            (planted - expected).abs() <= 3.0 * var.sqrt() + 3.0,
            "planted {planted}, expected {expected}"
        );
    }

    #[test]
    fn plant_is_reproducible() {
        let baseline: Vec<Point> = (0..500)
            .map(|i| Point {
                x: (i as f64).sin() * 5.0,
                y: (i as f64).cos() * 5.0,
            })
            .collect();
        let kernel = KernelRegion::new(Point { x: 0.0, y: 0.0 }, 2.0).unwrap();
        let spec = PlantSpec::new(kernel, 0.8, 0.5, 123).unwrap();
        assert_eq!(
            plant_anomaly(&baseline, &spec).unwrap(),
            plant_anomaly(&baseline, &spec).unwrap()
        );
    }

    #[test]
    fn bandwidth_fit_hits_target() {
        let domain = Domain::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let baseline = synth_baseline(BaselineKind::Uniform, 10_000, 9, &domain).unwrap();
        let fit =
            solve_bandwidth_for_fraction(&baseline, Point { x: 0.5, y: 0.5 }, 0.03).unwrap();
        assert!(fit.converged);
        let direct = affected_fraction(&baseline, Point { x: 0.5, y: 0.5 }, fit.bandwidth);
        assert!((direct - 0.03).abs() <= 1e-3, "fraction {direct}");
    }

    #[test]
    fn bandwidth_fit_scale_equivariance() {
        let baseline: Vec<Point> = (0..200)
            .map(|i| Point {
                x: ((i * 37) % 101) as f64 / 101.0,
                y: ((i * 61) % 103) as f64 / 103.0,
            })
            .collect();
        let center = Point { x: 0.4, y: 0.6 };
        let fit = solve_bandwidth_for_fraction(&baseline, center, 0.2).unwrap();
        let doubled: Vec<Point> = baseline
            .iter()
            .map(|p| Point {
                x: 2.0 * p.x,
                y: 2.0 * p.y,
            })
            .collect();
        let fit2 = solve_bandwidth_for_fraction(
            &doubled,
            Point {
                x: 2.0 * center.x,
                y: 2.0 * center.y,
            },
            0.2,
        )
        .unwrap();
        assert_eq!(fit2.bandwidth.to_bits(), (2.0 * fit.bandwidth).to_bits());
    }

    #[test]
    fn bandwidth_fit_degenerate_all_at_center() {
        let baseline = vec![Point { x: 1.0, y: 1.0 }; 10];
        let fit =
            solve_bandwidth_for_fraction(&baseline, Point { x: 1.0, y: 1.0 }, 0.5).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.achieved_fraction, 1.0);
    }

    #[test]
    fn jaccard_examples() {
        let domain = Domain::new(0.0, 4.0, 0.0, 4.0).unwrap();
        let baseline = synth_baseline(BaselineKind::Uniform, 2000, 3, &domain).unwrap();
        let a = KernelRegion::new(Point { x: 2.0, y: 2.0 }, 0.8).unwrap();
        assert_eq!(metric_jaccard(&a, &a, &baseline), 1.0);

        // Disjoint truncated supports.
        let left = KernelRegion::truncated(Point { x: 0.5, y: 0.5 }, 0.3, 0.6).unwrap();
        let right = KernelRegion::truncated(Point { x: 3.5, y: 3.5 }, 0.3, 0.6).unwrap();
        assert_eq!(metric_jaccard(&left, &right, &baseline), 0.0);

        // Both vanish on the points: 0 unless identical regions.
        let far1 = KernelRegion::truncated(Point { x: -90.0, y: 0.0 }, 1.0, 1.0).unwrap();
        let far2 = KernelRegion::truncated(Point { x: -80.0, y: 0.0 }, 1.0, 1.0).unwrap();
        assert_eq!(metric_jaccard(&far1, &far2, &baseline), 0.0);
        assert_eq!(metric_jaccard(&far1, &far1, &baseline), 1.0);
    }

    #[test]
    fn jaccard_unit_distance_matches_direct_sum() {
        // Dense regular grid of points; two unit-bandwidth kernels at
        // distance 1, against a direct summation oracle.
        let mut baseline = Vec::new();
        for i in 0..60 {
            for j in 0..60 {
                baseline.push(Point {
                    x: -3.0 + i as f64 * 0.1,
                    y: -3.0 + j as f64 * 0.1,
                });
            }
        }
        let a = KernelRegion::new(Point { x: -0.5, y: 0.0 }, 1.0).unwrap();
        let b = KernelRegion::new(Point { x: 0.5, y: 0.0 }, 1.0).unwrap();
        let js = metric_jaccard(&a, &b, &baseline);
        let (mut cross, mut sa, mut sb) = (0.0, 0.0, 0.0);
        for p in &baseline {
            let va = (-(p.dist_sq(&a.center))).exp();
            let vb = (-(p.dist_sq(&b.center))).exp();
            cross += va * vb;
            sa += va * va;
            sb += vb * vb;
        }
        let expect = cross / (sa + sb - cross);
        assert!((js - expect).abs() < 1e-12);
        assert!(js > 0.0 && js < 1.0);
    }

    #[test]
    fn jaccard_symmetry_and_upper_bound() {
        let domain = Domain::new(0.0, 6.0, 0.0, 6.0).unwrap();
        let baseline = synth_baseline(BaselineKind::Clustered, 800, 21, &domain).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a = KernelRegion::new(
                Point {
                    x: rng.gen_range(0.0..6.0),
                    y: rng.gen_range(0.0..6.0),
                },
                rng.gen_range(0.2..2.0),
            )
            .unwrap();
            let b = KernelRegion::new(
                Point {
                    x: rng.gen_range(0.0..6.0),
                    y: rng.gen_range(0.0..6.0),
                },
                rng.gen_range(0.2..2.0),
            )
            .unwrap();
            let ab = metric_jaccard(&a, &b, &baseline);
            let ba = metric_jaccard(&b, &a, &baseline);
            assert_eq!(ab.to_bits(), ba.to_bits());
            assert!((0.0..=1.0).contains(&ab));
            if a != b {
                assert!(ab < 1.0);
            }
        }
    }

    #[test]
    fn synth_baseline_basics() {
        let domain = Domain::new(-1.0, 3.0, 2.0, 8.0).unwrap();
        assert!(synth_baseline(BaselineKind::Uniform, 0, 1, &domain).is_err());
        let single = synth_baseline(BaselineKind::Clustered, 1, 1, &domain).unwrap();
        assert_eq!(single.len(), 1);
        assert!(domain.contains(&single[0]));

        let pts = synth_baseline(BaselineKind::Uniform, 20_000, 42, &domain).unwrap();
        let mean_x: f64 = pts.iter().map(|p| p.x).sum::<f64>() / pts.len() as f64;
        let mean_y: f64 = pts.iter().map(|p| p.y).sum::<f64>() / pts.len() as f64;
        // Uniform mean concentrates at the domain center.
        let sd_x = domain.width() / (12.0f64).sqrt() / (pts.len() as f64).sqrt();
        let sd_y = domain.height() / (12.0f64).sqrt() / (pts.len() as f64).sqrt();
        assert!((mean_x - 1.0).abs() < 3.0 * sd_x);
        assert!((mean_y - 5.0).abs() < 3.0 * sd_y);

        let again = synth_baseline(BaselineKind::Uniform, 20_000, 42, &domain).unwrap();
        assert_eq!(pts, again);
        for p in synth_baseline(BaselineKind::Clustered, 5000, 7, &domain).unwrap() {
            assert!(domain.contains(&p));
        }
    }
}
