//! Shared scan engine: per-center evaluation with model dispatch, chunked
//! deterministic traversal, and the max reduction.

use crate::data::{LabeledDataset, MeasurementModel};
use crate::error::Result;
use crate::geom::{
    build_adaptive_grid, build_fixed_grid, truncation_radius, Domain, KernelRegion, Point,
};
use crate::likelihood::{
    bernoulli, gaussian, poisson, BernoulliView, DiscrepancyResult, RatePair, SolverConfig,
    ValueView, ZeroTail,
};
use crate::scanner::{degenerate_null_scan, null_scan_result, ScanAlgorithm, ScanConfig, ScanResult};
use rayon::prelude::*;

/// Fixed chunk size for the grid traversal; warm starts chain within a
/// chunk, so the value is part of the determinism contract, not a tuning
/// knob tied to the thread count.
const GRID_CHUNK: usize = 4096;

/// One coarse cell's pruned view of the dataset: the indices inside the
/// expanded window plus exact aggregates of everything outside it. Window
/// and outside counts partition the dataset exactly.
#[derive(Debug, Clone)]
pub struct PrunedCellView {
    /// Data indices inside the cell's expanded window, in dataset order.
    pub window: Vec<u32>,
    /// Points outside the window with measured value 1.
    pub outside_measured: usize,
    /// Points outside the window with measured value 0.
    pub outside_unmeasured: usize,
    /// Sum of measured values outside the window (value models).
    pub outside_sum_m: f64,
    /// Sum of squared measured values outside the window.
    pub outside_sum_m2: f64,
}

impl PrunedCellView {
    /// Builds the view for one window given the full dataset totals.
    pub fn new(data: &LabeledDataset, window: Vec<u32>) -> Self {
        let mut in_measured = 0usize;
        let mut in_sum = 0.0;
        let mut in_sum2 = 0.0;
        for &i in &window {
            let m = data.measured[i as usize];
            if m > 0.5 {
                in_measured += 1;
            }
            in_sum += m;
            in_sum2 += m * m;
        }
        let total_measured = data.measured_count();
        let total_sum: f64 = data.measured.iter().sum();
        let total_sum2: f64 = data.measured.iter().map(|&m| m * m).sum();
        let outside = data.len() - window.len();
        let outside_measured = total_measured - in_measured;
        PrunedCellView {
            outside_measured,
            outside_unmeasured: outside - outside_measured,
            outside_sum_m: total_sum - in_sum,
            outside_sum_m2: total_sum2 - in_sum2,
            window,
        }
    }

    pub(crate) fn tail(&self) -> ZeroTail {
        ZeroTail {
            n_measured: self.outside_measured,
            n_unmeasured: self.outside_unmeasured,
            sum_m: self.outside_sum_m,
            sum_m2: self.outside_sum_m2,
        }
    }
}

/// Precomputed null-model quantities shared by every center of a scan.
#[derive(Debug, Clone, Copy)]
enum ModelCtx {
    Bernoulli { q0: f64, ell0: f64 },
    Gaussian { mean: f64, null_ss: f64, sigma: f64 },
    Poisson { q0: f64, ell0: f64 },
}

impl ModelCtx {
    fn prepare(data: &LabeledDataset, sigma: f64) -> Result<Self> {
        Ok(match data.model {
            MeasurementModel::Bernoulli => {
                let (q0, ell0) = bernoulli::null_mle(data)?;
                ModelCtx::Bernoulli { q0, ell0 }
            }
            MeasurementModel::Gaussian => {
                let (mean, _) = gaussian::null_mle(data, sigma)?;
                let null_ss = data
                    .measured
                    .iter()
                    .map(|&m| (m - mean) * (m - mean))
                    .sum();
                ModelCtx::Gaussian {
                    mean,
                    null_ss,
                    sigma,
                }
            }
            MeasurementModel::Poisson => {
                let (q0, ell0) = poisson::null_mle(data)?;
                ModelCtx::Poisson { q0, ell0 }
            }
        })
    }
}

/// Evaluates one center: builds the kernel view (full or windowed) and
/// maximizes the model discrepancy. Returns the result and the number of
/// per-point terms the solver iterates over.
fn eval_center(
    data: &LabeledDataset,
    ctx: &ModelCtx,
    kernel: &KernelRegion,
    window: Option<(&[u32], ZeroTail)>,
    collapse_zeros: bool,
    solver: &SolverConfig,
    warm: Option<RatePair>,
) -> (DiscrepancyResult, u64) {
    let mut cfg = *solver;
    cfg.warm_start = warm;
    match *ctx {
        ModelCtx::Bernoulli { q0, ell0 } => {
            let view = match window {
                Some((w, tail)) => BernoulliView::over_window(data, kernel, w, tail, collapse_zeros),
                None => BernoulliView::full(data, kernel),
            };
            let result = bernoulli::solve_phi_view(&view, q0, ell0, &cfg, |_, _| {});
            (result, view.active_len() as u64)
        }
        ModelCtx::Gaussian {
            mean,
            null_ss,
            sigma,
        } => {
            let view = match window {
                Some((w, tail)) => ValueView::over_window(data, kernel, w, tail, collapse_zeros),
                None => ValueView::full(data, kernel),
            };
            let result =
                gaussian::phi_closed_form_view(&view, sigma, cfg.enforce_p_ge_q, mean, null_ss);
            (result, view.active_len() as u64)
        }
        ModelCtx::Poisson { q0, ell0 } => {
            let view = match window {
                Some((w, tail)) => ValueView::over_window(data, kernel, w, tail, collapse_zeros),
                None => ValueView::full(data, kernel),
            };
            let result = poisson::solve_phi_view(&view, q0, ell0, &cfg);
            (result, view.active_len() as u64)
        }
    }
}

/// Candidate for the reduction: per-center discrepancy, clamped at zero as
/// in the scan recurrence (best starts at zero).
#[derive(Debug, Clone, Copy)]
struct Candidate {
    phi: f64,
    center: Point,
    rates: RatePair,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        self.phi > other.phi
            || (self.phi == other.phi
                && (self.center.x, self.center.y) < (other.center.x, other.center.y))
    }
}

#[derive(Debug, Clone, Copy)]
struct ChunkOutcome {
    best: Option<Candidate>,
    centers: u64,
    points: u64,
}

fn reduce_chunks(chunks: Vec<ChunkOutcome>) -> (Option<Candidate>, u64, u64) {
    let mut best: Option<Candidate> = None;
    let mut centers = 0;
    let mut points = 0;
    for c in chunks {
        centers += c.centers;
        points += c.points;
        if let Some(cand) = c.best {
            best = match best {
                None => Some(cand),
                Some(b) if cand.better_than(&b) => Some(cand),
                keep => keep,
            };
        }
    }
    (best, centers, points)
}

fn record(best: &mut Option<Candidate>, phi: f64, center: Point, rates: RatePair) {
    let cand = Candidate {
        phi: phi.max(0.0),
        center,
        rates,
    };
    *best = match *best {
        None => Some(cand),
        Some(b) if cand.better_than(&b) => Some(cand),
        keep => keep,
    };
}

fn finish(
    best: Option<Candidate>,
    ctx: &ModelCtx,
    fallback_center: Point,
    bandwidth: f64,
    algorithm: ScanAlgorithm,
    centers: u64,
    points: u64,
    started: std::time::Instant,
) -> ScanResult {
    let q0 = match *ctx {
        ModelCtx::Bernoulli { q0, .. } | ModelCtx::Poisson { q0, .. } => q0,
        ModelCtx::Gaussian { mean, .. } => mean,
    };
    let cand = best.unwrap_or(Candidate {
        phi: 0.0,
        center: fallback_center,
        rates: RatePair { p: q0, q: q0 },
    });
    ScanResult {
        best_center: cand.center,
        best_bandwidth: bandwidth,
        rates: cand.rates,
        phi: cand.phi,
        centers_evaluated: centers,
        points_scanned: points,
        elapsed_seconds: started.elapsed().as_secs_f64(),
        algorithm,
    }
}

/// Evaluation strategy for the fixed-grid traversal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum GridMode {
    /// Full dataset, exact kernels.
    Exact,
    /// Window per-point with truncated kernels, outside aggregated.
    Pruned,
    /// Full dataset with truncated kernels; the pruning oracle.
    TruncatedFull,
}

/// Fixed-grid scan; `Prune` and its reference oracle group the centers by
/// coarse cell so windows and warm-start chains line up.
pub(crate) fn grid_scan(
    data: &LabeledDataset,
    domain: &Domain,
    config: &ScanConfig,
    mode: GridMode,
) -> Result<ScanResult> {
    let started = std::time::Instant::now();
    let r = config.bandwidth;
    let grid = build_fixed_grid(domain, r, config.epsilon, config.max_grid_centers)?;
    let algorithm = config.algorithm;
    let ctx = ModelCtx::prepare(data, config.sigma)?;

    if let Some(q0) = degenerate_null_scan(data) {
        return Ok(null_scan_result(
            q0,
            grid.center(0, 0),
            r,
            algorithm,
            grid.center_count(),
            started.elapsed().as_secs_f64(),
        ));
    }

    if mode == GridMode::Exact {
        // Linear row-major traversal in fixed-size chunks.
        let total = grid.center_count() as usize;
        let n_chunks = total.div_ceil(GRID_CHUNK);
        let chunks: Vec<ChunkOutcome> = (0..n_chunks)
            .into_par_iter()
            .map(|chunk| {
                let lo = chunk * GRID_CHUNK;
                let hi = (lo + GRID_CHUNK).min(total);
                let mut best = None;
                let mut points = 0;
                let mut warm = None;
                for idx in lo..hi {
                    let center = grid.center(idx % grid.nx, idx / grid.nx);
                    let kernel = KernelRegion {
                        center,
                        bandwidth: r,
                        truncation_radius: None,
                    };
                    let (res, work) =
                        eval_center(data, &ctx, &kernel, None, false, &config.solver, warm);
                    warm = Some(res.rates);
                    points += work;
                    record(&mut best, res.phi, center, res.rates);
                }
                ChunkOutcome {
                    best,
                    centers: (hi - lo) as u64,
                    points,
                }
            })
            .collect();
        let (best, centers, points) = reduce_chunks(chunks);
        return Ok(finish(
            best,
            &ctx,
            grid.center(0, 0),
            r,
            algorithm,
            centers,
            points,
            started,
        ));
    }

    // Pruned / reference modes: truncated kernels, centers grouped by the
    // coarse cell that owns them.
    let r_max = truncation_radius(r, data.len(), config.epsilon)?;
    let cells = CoarseLayout::new(domain, data, r_max);

    // Assign fixed-grid centers to coarse cells, preserving row-major order
    // within each cell.
    let mut cell_centers: Vec<Vec<u32>> = vec![Vec::new(); cells.ncx * cells.ncy];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let c = grid.center(i, j);
            let cell = cells.cell_of(domain, &c);
            cell_centers[cell].push((j * grid.nx + i) as u32);
        }
    }

    let chunks: Vec<ChunkOutcome> = (0..cell_centers.len())
        .into_par_iter()
        .map(|cell_idx| {
            let centers = &cell_centers[cell_idx];
            if centers.is_empty() {
                return ChunkOutcome {
                    best: None,
                    centers: 0,
                    points: 0,
                };
            }
            let view = cells.view(data, cell_idx);
            let mut best = None;
            let mut points = 0;
            // Empty window: every kernel weight in this cell is zero and
            // each center yields the null. One candidate at the cell's
            // lexicographically smallest center covers the reduction.
            if view.window.is_empty() && mode == GridMode::Pruned {
                let q0 = match ctx {
                    ModelCtx::Bernoulli { q0, .. } | ModelCtx::Poisson { q0, .. } => q0,
                    ModelCtx::Gaussian { mean, .. } => mean,
                };
                let lex_min = centers
                    .iter()
                    .map(|&idx| grid.center(idx as usize % grid.nx, idx as usize / grid.nx))
                    .min_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap())
                    .unwrap();
                let mut best = None;
                record(&mut best, 0.0, lex_min, RatePair { p: q0, q: q0 });
                return ChunkOutcome {
                    best,
                    centers: centers.len() as u64,
                    points: 0,
                };
            }
            let mut warm = None;
            let tail = view.tail();
            for &idx in centers {
                let center = grid.center(idx as usize % grid.nx, idx as usize / grid.nx);
                let kernel = KernelRegion {
                    center,
                    bandwidth: r,
                    truncation_radius: Some(r_max),
                };
                let window = match mode {
                    GridMode::Pruned => Some((view.window.as_slice(), tail)),
                    _ => None,
                };
                let (res, work) =
                    eval_center(data, &ctx, &kernel, window, false, &config.solver, warm);
                warm = Some(res.rates);
                points += work;
                record(&mut best, res.phi, center, res.rates);
            }
            ChunkOutcome {
                best,
                centers: centers.len() as u64,
                points,
            }
        })
        .collect();
    let (best, centers, points) = reduce_chunks(chunks);
    Ok(finish(
        best,
        &ctx,
        grid.center(0, 0),
        r,
        algorithm,
        centers,
        points,
        started,
    ))
}

/// Adaptive-grid scan; `pruned` switches on windowed evaluation with
/// per-center collapse of zero-weight window points (KernelFast).
pub(crate) fn adaptive_scan(
    data: &LabeledDataset,
    domain: &Domain,
    config: &ScanConfig,
    pruned: bool,
) -> Result<ScanResult> {
    let started = std::time::Instant::now();
    let r = config.bandwidth;
    // The construction's shift bound certifies 2x its per-step budget, so
    // spend half the user budget on it (the other half is truncation).
    let inner_eps = config.epsilon / 2.0;
    let grid = build_adaptive_grid(
        domain,
        data,
        r,
        inner_eps,
        config.grid_scale,
        config.max_grid_centers,
    )?;
    let algorithm = config.algorithm;
    let ctx = ModelCtx::prepare(data, config.sigma)?;
    let fallback = Point {
        x: domain.x_lo,
        y: domain.y_lo,
    };

    if let Some(q0) = degenerate_null_scan(data) {
        return Ok(null_scan_result(
            q0,
            fallback,
            r,
            algorithm,
            grid.total_fine_centers(),
            started.elapsed().as_secs_f64(),
        ));
    }

    let r_max = grid.r_max;
    let chunks: Vec<ChunkOutcome> = grid
        .cells
        .par_iter()
        .map(|cell| {
            let mut best = None;
            let mut points = 0;
            let mut warm = None;
            let pruned_view = pruned.then(|| PrunedCellView::new(data, cell.window.clone()));
            let tail = pruned_view.as_ref().map(|v| v.tail());
            for center in cell.fine_centers() {
                let kernel = KernelRegion {
                    center,
                    bandwidth: r,
                    truncation_radius: Some(r_max),
                };
                let window = pruned_view
                    .as_ref()
                    .map(|v| (v.window.as_slice(), tail.unwrap()));
                let (res, work) =
                    eval_center(data, &ctx, &kernel, window, pruned, &config.solver, warm);
                warm = Some(res.rates);
                points += work;
                record(&mut best, res.phi, center, res.rates);
            }
            ChunkOutcome {
                best,
                centers: cell.fine_center_count(),
                points,
            }
        })
        .collect();
    let (best, centers, points) = reduce_chunks(chunks);
    Ok(finish(
        best, &ctx, fallback, r, algorithm, centers, points, started,
    ))
}

/// Coarse-cell bucketing shared by the pruned fixed-grid modes.
struct CoarseLayout {
    ncx: usize,
    ncy: usize,
    side: f64,
    /// Per-cell point buckets (cell itself, not the window).
    buckets: Vec<Vec<u32>>,
}

impl CoarseLayout {
    fn new(domain: &Domain, data: &LabeledDataset, r_max: f64) -> Self {
        let side = 2.0 * r_max;
        let ncx = count(domain.width(), side);
        let ncy = count(domain.height(), side);
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); ncx * ncy];
        for (idx, p) in data.points.iter().enumerate() {
            let ix = index(p.x, domain.x_lo, side, ncx);
            let iy = index(p.y, domain.y_lo, side, ncy);
            buckets[iy * ncx + ix].push(idx as u32);
        }
        CoarseLayout {
            ncx,
            ncy,
            side,
            buckets,
        }
    }

    fn cell_of(&self, domain: &Domain, p: &Point) -> usize {
        let ix = index(p.x, domain.x_lo, self.side, self.ncx);
        let iy = index(p.y, domain.y_lo, self.side, self.ncy);
        iy * self.ncx + ix
    }

    /// Window view for a cell: its 3x3 bucket neighborhood.
    fn view(&self, data: &LabeledDataset, cell: usize) -> PrunedCellView {
        let ix = cell % self.ncx;
        let iy = cell / self.ncx;
        let mut window = Vec::new();
        for jy in iy.saturating_sub(1)..=(iy + 1).min(self.ncy - 1) {
            for jx in ix.saturating_sub(1)..=(ix + 1).min(self.ncx - 1) {
                window.extend_from_slice(&self.buckets[jy * self.ncx + jx]);
            }
        }
        window.sort_unstable();
        PrunedCellView::new(data, window)
    }
}

fn count(span: f64, side: f64) -> usize {
    if span <= 0.0 {
        1
    } else {
        (span / side).ceil().max(1.0) as usize
    }
}

fn index(v: f64, lo: f64, side: f64, n: usize) -> usize {
    (((v - lo) / side).floor().max(0.0) as usize).min(n - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pruned_cell_view_partitions_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let points: Vec<Point> = (0..300)
            .map(|_| Point {
                x: rng.gen_range(0.0..10.0),
                y: rng.gen_range(0.0..10.0),
            })
            .collect();
        let measured: Vec<f64> = (0..300).map(|_| f64::from(rng.gen_bool(0.3))).collect();
        let data = LabeledDataset::new(points, measured, MeasurementModel::Bernoulli).unwrap();
        let domain = Domain::new(0.0, 10.0, 0.0, 10.0).unwrap();
        let layout = CoarseLayout::new(&domain, &data, 1.3);
        for cell in 0..layout.buckets.len() {
            let view = layout.view(&data, cell);
            assert_eq!(
                view.window.len() + view.outside_measured + view.outside_unmeasured,
                data.len()
            );
            let window_measured = view
                .window
                .iter()
                .filter(|&&i| data.measured[i as usize] > 0.5)
                .count();
            assert_eq!(
                window_measured + view.outside_measured,
                data.measured_count()
            );
        }
    }
}
