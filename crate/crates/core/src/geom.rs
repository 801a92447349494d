//! Domain geometry: points, kernel regions, and candidate-center grids.
//!
//! Two grid constructions are provided. The fixed grid places centers at a
//! uniform spacing proportional to `eps * r`, fine enough that the
//! discrepancy at the best grid center is within `eps` of the best possible
//! center anywhere in the domain. The adaptive grid coarsens that spacing in
//! regions holding few data points, using a coarse partition into cells of
//! side `2 * r_max` and, per cell, a fine spacing inversely proportional to
//! the local point count.

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default cap on enumerated grid centers; construction fails loudly beyond it.
pub const DEFAULT_MAX_GRID_CENTERS: u64 = 10_000_000;

/// A planar point. Coordinates are treated as Euclidean; any projection from
/// geographic coordinates is the caller's responsibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "point coordinates must be finite, got ({x}, {y})"
            )));
        }
        Ok(Point { x, y })
    }

    pub fn dist_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.dist_sq(other).sqrt()
    }
}

/// Axis-aligned bounding box for the scanned domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Domain {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<Self> {
        let all_finite =
            x_lo.is_finite() && x_hi.is_finite() && y_lo.is_finite() && y_hi.is_finite();
        if !all_finite || x_lo > x_hi || y_lo > y_hi {
            return Err(Error::InvalidParameter(format!(
                "invalid domain box [{x_lo}, {x_hi}] x [{y_lo}, {y_hi}]"
            )));
        }
        Ok(Domain {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
        })
    }

    /// Tight bounding box of a point set.
    pub fn bounding(points: &[Point]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut d = Domain {
            x_lo: f64::INFINITY,
            x_hi: f64::NEG_INFINITY,
            y_lo: f64::INFINITY,
            y_hi: f64::NEG_INFINITY,
        };
        for p in points {
            d.x_lo = d.x_lo.min(p.x);
            d.x_hi = d.x_hi.max(p.x);
            d.y_lo = d.y_lo.min(p.y);
            d.y_hi = d.y_hi.max(p.y);
        }
        Ok(d)
    }

    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn height(&self) -> f64 {
        self.y_hi - self.y_lo
    }

    /// Longer side of the box.
    pub fn longer_side(&self) -> f64 {
        self.width().max(self.height())
    }

    /// Unitless resolution ratio: longer side over the kernel bandwidth.
    pub fn lambda_ratio(&self, bandwidth: f64) -> f64 {
        self.longer_side() / bandwidth
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.x_lo && p.x <= self.x_hi && p.y >= self.y_lo && p.y <= self.y_hi
    }

    /// Checks every dataset point lies inside the box.
    pub fn validate_covers(&self, data: &LabeledDataset) -> Result<()> {
        for (i, p) in data.points.iter().enumerate() {
            if !self.contains(p) {
                return Err(Error::PointOutsideDomain {
                    index: i,
                    x: p.x,
                    y: p.y,
                });
            }
        }
        Ok(())
    }
}

/// A Gaussian kernel region: center, bandwidth, and optional truncation.
///
/// `eval` returns `exp(-||x-c||^2 / r^2)`, in `[0, 1]` with value 1 at the
/// center. When a truncation radius is set the value is exactly 0 beyond it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelRegion {
    pub center: Point,
    pub bandwidth: f64,
    pub truncation_radius: Option<f64>,
}

impl KernelRegion {
    pub fn new(center: Point, bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive and finite, got {bandwidth}"
            )));
        }
        Ok(KernelRegion {
            center,
            bandwidth,
            truncation_radius: None,
        })
    }

    pub fn truncated(center: Point, bandwidth: f64, r_max: f64) -> Result<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "truncation radius must be positive and finite, got {r_max}"
            )));
        }
        let mut k = Self::new(center, bandwidth)?;
        k.truncation_radius = Some(r_max);
        Ok(k)
    }

    /// Kernel value at `x`.
    pub fn eval(&self, x: &Point) -> f64 {
        let d2 = self.center.dist_sq(x);
        if let Some(r_max) = self.truncation_radius {
            if d2 > r_max * r_max {
                return 0.0;
            }
        }
        (-d2 / (self.bandwidth * self.bandwidth)).exp()
    }
}

/// Truncation radius `r * sqrt(ln(n / eps))`.
///
/// Zeroing the kernel beyond this radius changes the discrepancy by at most
/// an additive `eps`: past it the kernel value is below `eps / n`, and every
/// per-point log term moves by at most `eps` under such a shift.
pub fn truncation_radius(r: f64, n: usize, eps: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "bandwidth must be positive, got {r}"
        )));
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if !(eps > 0.0) || eps >= n as f64 {
        return Err(Error::InvalidParameter(format!(
            "eps must satisfy 0 < eps < n, got eps={eps}, n={n}"
        )));
    }
    Ok(r * (n as f64 / eps).ln().sqrt())
}

/// Regular axis-aligned grid of candidate centers over a domain.
///
/// Centers are anchored at the domain's lower-left corner with uniform
/// spacing `side_length`; the final row/column is clamped onto the domain
/// boundary so every domain point has a center within
/// `side_length * sqrt(2) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub origin: Point,
    pub side_length: f64,
    pub nx: usize,
    pub ny: usize,
    x_max: f64,
    y_max: f64,
}

impl GridSpec {
    pub fn center_count(&self) -> u64 {
        self.nx as u64 * self.ny as u64
    }

    fn coord(&self, i: usize, lo: f64, hi: f64, n: usize) -> f64 {
        if i + 1 == n {
            hi
        } else {
            lo + i as f64 * self.side_length
        }
    }

    /// Center at grid position `(i, j)`; the last index per axis sits on the
    /// domain boundary.
    pub fn center(&self, i: usize, j: usize) -> Point {
        Point {
            x: self.coord(i, self.origin.x, self.x_max, self.nx),
            y: self.coord(j, self.origin.y, self.y_max, self.ny),
        }
    }

    /// Row-major enumeration (y outer, x inner).
    pub fn centers(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| self.center(i, j)))
    }
}

/// Per-axis center positions covering `[lo, hi]` at spacing `step`:
/// `lo, lo + step, ...` with the final position clamped to `hi`.
fn axis_count(lo: f64, hi: f64, step: f64) -> usize {
    let span = hi - lo;
    if span <= 0.0 {
        return 1;
    }
    let cells = (span / step).ceil().max(1.0);
    cells as usize + 1
}

/// Grid spacing for a requested error budget: `eps * r * sqrt(e / 4)`.
///
/// The discrepancy is Lipschitz in the center with constant
/// `(1/r) * sqrt(8/e)`, so a grid at this spacing keeps the value at the
/// nearest center within `eps` of any center in the domain.
pub fn fixed_grid_side(eps: f64, r: f64) -> f64 {
    eps * r * (std::f64::consts::E / 4.0).sqrt()
}

/// Builds the fixed candidate-center grid for bandwidth `r` and budget `eps`.
pub fn build_fixed_grid(
    domain: &Domain,
    r: f64,
    eps: f64,
    max_centers: u64,
) -> Result<GridSpec> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "bandwidth must be positive, got {r}"
        )));
    }
    let side = fixed_grid_side(eps, r);
    let nx = axis_count(domain.x_lo, domain.x_hi, side);
    let ny = axis_count(domain.y_lo, domain.y_hi, side);
    let requested = nx as u64 * ny as u64;
    if requested > max_centers {
        return Err(Error::GridTooLarge {
            requested,
            cap: max_centers,
        });
    }
    Ok(GridSpec {
        origin: Point {
            x: domain.x_lo,
            y: domain.y_lo,
        },
        side_length: side,
        nx,
        ny,
        x_max: domain.x_hi,
        y_max: domain.y_hi,
    })
}

/// Fine-grid spacing inside one coarse cell: `eps * (n / n_window) * r^2 /
/// (2 r_max)`, before capping.
pub fn adaptive_cell_side(eps: f64, n_total: usize, n_window: usize, r: f64, r_max: f64) -> f64 {
    eps * (n_total as f64 / n_window as f64) * r * r / (2.0 * r_max)
}

/// One coarse cell of the adaptive grid together with its fine center grid.
///
/// The window expands the cell by one cell length in every direction, so any
/// point within `2 * r_max` of any center in the cell lies inside it.
#[derive(Debug, Clone)]
pub struct CoarseCell {
    /// Cell index in the coarse grid (column, row).
    pub ix: usize,
    pub iy: usize,
    /// Lower-left corner of the cell.
    pub x0: f64,
    pub y0: f64,
    /// Data indices inside the expanded window, in dataset order.
    pub window: Vec<u32>,
    /// Fine-grid spacing used in this cell.
    pub fine_side: f64,
    /// Fine-grid origin (cell clipped to the domain).
    pub fine_x0: f64,
    pub fine_y0: f64,
    /// Fine centers per axis.
    pub fine_nx: usize,
    pub fine_ny: usize,
}

impl CoarseCell {
    pub fn fine_center_count(&self) -> u64 {
        self.fine_nx as u64 * self.fine_ny as u64
    }

    /// Row-major enumeration of the cell's fine centers.
    pub fn fine_centers(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.fine_ny).flat_map(move |j| {
            (0..self.fine_nx).map(move |i| Point {
                x: self.fine_x0 + i as f64 * self.fine_side,
                y: self.fine_y0 + j as f64 * self.fine_side,
            })
        })
    }
}

/// Density-adaptive candidate-center grid.
#[derive(Debug, Clone)]
pub struct AdaptiveGrid {
    /// Coarse cell side, `2 * r_max`.
    pub cell_side: f64,
    pub r_max: f64,
    /// Coarse cells per axis.
    pub ncx: usize,
    pub ncy: usize,
    /// Nonempty cells in row-major order; cells whose window holds no data
    /// points are dropped and contribute no centers.
    pub cells: Vec<CoarseCell>,
}

impl AdaptiveGrid {
    pub fn total_fine_centers(&self) -> u64 {
        self.cells.iter().map(|c| c.fine_center_count()).sum()
    }
}

/// Builds the adaptive grid for `(domain, data, r, eps)`.
///
/// The truncation radius is derived internally from `(r, |B|, eps)`. The
/// fine spacing formula is capped at `r_max`: the center-shift bound backing
/// the construction only certifies shifts up to `r_max`, and the cap also
/// guarantees at least one fine row/column per nonempty cell. `grid_scale`
/// multiplies the fine spacing; 1.0 keeps the untuned constants, larger
/// values trade the formal guarantee for speed.
pub fn build_adaptive_grid(
    domain: &Domain,
    data: &LabeledDataset,
    r: f64,
    eps: f64,
    grid_scale: f64,
    max_centers: u64,
) -> Result<AdaptiveGrid> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    if !(grid_scale > 0.0) || !grid_scale.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "grid scale must be positive, got {grid_scale}"
        )));
    }
    let n = data.len();
    let r_max = truncation_radius(r, n, eps)?;
    let cell_side = 2.0 * r_max;
    let ncx = cell_count(domain.width(), cell_side);
    let ncy = cell_count(domain.height(), cell_side);

    // Bucket points by coarse cell.
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); ncx * ncy];
    for (idx, p) in data.points.iter().enumerate() {
        let ix = bucket_index(p.x, domain.x_lo, cell_side, ncx);
        let iy = bucket_index(p.y, domain.y_lo, cell_side, ncy);
        buckets[iy * ncx + ix].push(idx as u32);
    }

    let mut cells = Vec::new();
    let mut total: u64 = 0;
    for iy in 0..ncy {
        for ix in 0..ncx {
            let mut window = Vec::new();
            for jy in iy.saturating_sub(1)..=(iy + 1).min(ncy - 1) {
                for jx in ix.saturating_sub(1)..=(ix + 1).min(ncx - 1) {
                    window.extend_from_slice(&buckets[jy * ncx + jx]);
                }
            }
            if window.is_empty() {
                continue;
            }
            window.sort_unstable();

            let raw = adaptive_cell_side(eps, n, window.len(), r, r_max) * grid_scale;
            let fine_side = raw.min(r_max);

            let x0 = domain.x_lo + ix as f64 * cell_side;
            let y0 = domain.y_lo + iy as f64 * cell_side;
            // Clip the fine grid to the domain; boundary cells overhang.
            let x1 = (x0 + cell_side).min(domain.x_hi);
            let y1 = (y0 + cell_side).min(domain.y_hi);
            let fine_nx = fine_count(x1 - x0, fine_side);
            let fine_ny = fine_count(y1 - y0, fine_side);

            total += fine_nx as u64 * fine_ny as u64;
            if total > max_centers {
                return Err(Error::GridTooLarge {
                    requested: total,
                    cap: max_centers,
                });
            }
            cells.push(CoarseCell {
                ix,
                iy,
                x0,
                y0,
                window,
                fine_side,
                fine_x0: x0,
                fine_y0: y0,
                fine_nx,
                fine_ny,
            });
        }
    }

    Ok(AdaptiveGrid {
        cell_side,
        r_max,
        ncx,
        ncy,
        cells,
    })
}

fn cell_count(span: f64, side: f64) -> usize {
    if span <= 0.0 {
        1
    } else {
        (span / side).ceil().max(1.0) as usize
    }
}

/// Half-open fine placement: `i * side` for `i < n`, `n = ceil(span / side)`,
/// so any position in the span is within `side` of a center per axis.
fn fine_count(span: f64, side: f64) -> usize {
    if span <= 0.0 {
        1
    } else {
        (span / side).ceil().max(1.0) as usize
    }
}

fn bucket_index(v: f64, lo: f64, side: f64, n: usize) -> usize {
    let i = ((v - lo) / side).floor();
    (i.max(0.0) as usize).min(n - 1)
}
