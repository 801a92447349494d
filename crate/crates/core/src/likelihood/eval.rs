//! Cached per-center evaluation views.
//!
//! A scan evaluates the likelihood and its gradient many times at one center
//! while the rates move. These views compute each point's kernel weight once
//! and keep points whose weight is exactly zero out of the per-point loops:
//! a zero-weight point contributes closed-form terms depending only on `q`,
//! so an aggregate count (plus measured-value sums for the value models) is
//! enough. That aggregation is an exact rewrite of the per-point sum, which
//! is what makes window pruning exact.

use crate::data::LabeledDataset;
use crate::geom::KernelRegion;
use crate::likelihood::{rate_mix, solver::RateObjective, xlogy};

/// Aggregate of points whose kernel weight is exactly zero.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ZeroTail {
    pub n_measured: usize,
    pub n_unmeasured: usize,
    pub sum_m: f64,
    pub sum_m2: f64,
}

impl ZeroTail {
    pub fn add(&mut self, m: f64) {
        if m > 0.5 {
            self.n_measured += 1;
        } else {
            self.n_unmeasured += 1;
        }
        self.sum_m += m;
        self.sum_m2 += m * m;
    }

    pub fn count(&self) -> usize {
        self.n_measured + self.n_unmeasured
    }
}

/// Bernoulli evaluation view: kernel weights split by measured class.
#[derive(Debug, Clone)]
pub(crate) struct BernoulliView {
    pub n_total: usize,
    /// Weights of per-point measured / unmeasured points, in dataset order.
    pub k_measured: Vec<f64>,
    pub k_unmeasured: Vec<f64>,
    pub tail: ZeroTail,
    /// Weight extremes per class, including the tail's zeros.
    k_meas_min: f64,
    k_meas_max: f64,
    k_unmeas_min: f64,
    k_unmeas_max: f64,
}

impl BernoulliView {
    /// Every point evaluated per-point.
    pub fn full(data: &LabeledDataset, kernel: &KernelRegion) -> Self {
        let idx: Vec<u32> = (0..data.len() as u32).collect();
        Self::over_window(data, kernel, &idx, ZeroTail::default(), false)
    }

    /// Window points evaluated per-point (kernel may be truncated); the rest
    /// aggregated. `collapse_zeros` additionally moves window points whose
    /// weight evaluates to zero into the aggregate.
    pub fn over_window(
        data: &LabeledDataset,
        kernel: &KernelRegion,
        window: &[u32],
        mut tail: ZeroTail,
        collapse_zeros: bool,
    ) -> Self {
        let mut k_measured = Vec::new();
        let mut k_unmeasured = Vec::new();
        for &i in window {
            let i = i as usize;
            let k = kernel.eval(&data.points[i]);
            if collapse_zeros && k == 0.0 {
                tail.add(data.measured[i]);
                continue;
            }
            if data.measured[i] > 0.5 {
                k_measured.push(k);
            } else {
                k_unmeasured.push(k);
            }
        }
        let mut view = BernoulliView {
            n_total: data.len(),
            k_measured,
            k_unmeasured,
            tail,
            k_meas_min: f64::INFINITY,
            k_meas_max: f64::NEG_INFINITY,
            k_unmeas_min: f64::INFINITY,
            k_unmeas_max: f64::NEG_INFINITY,
        };
        view.refresh_extremes();
        view
    }

    fn refresh_extremes(&mut self) {
        let fold = |ks: &[f64], zero: bool| -> (f64, f64) {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &k in ks {
                lo = lo.min(k);
                hi = hi.max(k);
            }
            if zero {
                lo = lo.min(0.0);
                hi = hi.max(0.0);
            }
            (lo, hi)
        };
        let (ml, mh) = fold(&self.k_measured, self.tail.n_measured > 0);
        let (ul, uh) = fold(&self.k_unmeasured, self.tail.n_unmeasured > 0);
        self.k_meas_min = ml;
        self.k_meas_max = mh;
        self.k_unmeas_min = ul;
        self.k_unmeas_max = uh;
    }

    pub fn measured_total(&self) -> usize {
        self.k_measured.len() + self.tail.n_measured
    }

    /// Points inspected per likelihood pass (per-point work).
    pub fn active_len(&self) -> usize {
        self.k_measured.len() + self.k_unmeasured.len()
    }

    /// True when the kernel vanished on the entire dataset.
    pub fn all_zero_weight(&self) -> bool {
        let max = self.k_meas_max.max(self.k_unmeas_max);
        !max.is_finite() || max == 0.0
    }

    /// Smallest per-point rate over the measured class.
    fn min_measured_rate(&self, p: f64, q: f64) -> f64 {
        if self.measured_total() == 0 {
            return f64::INFINITY;
        }
        let a = rate_mix(self.k_meas_min, p, q).0;
        let b = rate_mix(self.k_meas_max, p, q).0;
        a.min(b)
    }

    /// Largest per-point rate over the unmeasured class.
    fn max_unmeasured_rate(&self, p: f64, q: f64) -> f64 {
        if self.k_unmeasured.is_empty() && self.tail.n_unmeasured == 0 {
            return f64::NEG_INFINITY;
        }
        let a = rate_mix(self.k_unmeas_min, p, q).0;
        let b = rate_mix(self.k_unmeas_max, p, q).0;
        a.max(b)
    }

    /// Rate bounds that keep every log term finite and Lipschitz:
    /// `g >= 1/n` on the measured class, `g <= 1 - 1/n` on the unmeasured.
    pub fn rates_feasible(&self, p: f64, q: f64, slack: f64) -> bool {
        let n = self.n_total as f64;
        self.min_measured_rate(p, q) >= 1.0 / n - slack
            && self.max_unmeasured_rate(p, q) <= 1.0 - 1.0 / n + slack
    }

    /// Stationarity identities at `(p, q)`: `sum 1/g` over measured and
    /// `sum 1/(1-g)` over unmeasured both equal `n` at an interior optimum.
    /// Returns the two deviations scaled by `1/n`.
    pub fn conservation(&self, p: f64, q: f64) -> (f64, f64) {
        let n = self.n_total as f64;
        let mut inv_meas = 0.0;
        for &k in &self.k_measured {
            inv_meas += 1.0 / rate_mix(k, p, q).0;
        }
        inv_meas += self.tail.n_measured as f64 / rate_mix(0.0, p, q).0;
        let mut inv_unmeas = 0.0;
        for &k in &self.k_unmeasured {
            inv_unmeas += 1.0 / rate_mix(k, p, q).1;
        }
        inv_unmeas += self.tail.n_unmeasured as f64 / rate_mix(0.0, p, q).1;
        ((inv_meas - n).abs() / n, (inv_unmeas - n).abs() / n)
    }
}

impl RateObjective for BernoulliView {
    fn value(&self, p: f64, q: f64) -> f64 {
        let mut sum = 0.0;
        for &k in &self.k_measured {
            sum += rate_mix(k, p, q).0.ln();
        }
        for &k in &self.k_unmeasured {
            sum += rate_mix(k, p, q).1.ln();
        }
        let (g0, c0) = rate_mix(0.0, p, q);
        sum += xlogy(self.tail.n_measured as f64, g0);
        sum += xlogy(self.tail.n_unmeasured as f64, c0);
        sum / self.n_total as f64
    }

    fn grad(&self, p: f64, q: f64) -> (f64, f64) {
        let mut dp = 0.0;
        let mut dq = 0.0;
        for &k in &self.k_measured {
            let g = rate_mix(k, p, q).0;
            dp += k / g;
            dq += (1.0 - k) / g;
        }
        for &k in &self.k_unmeasured {
            let c = rate_mix(k, p, q).1;
            dp -= k / c;
            dq -= (1.0 - k) / c;
        }
        let (g0, c0) = rate_mix(0.0, p, q);
        dq += self.tail.n_measured as f64 / g0;
        dq -= self.tail.n_unmeasured as f64 / c0;
        let n = self.n_total as f64;
        (dp / n, dq / n)
    }

    fn project(&self, p: f64, q: f64) -> (f64, f64) {
        const MARGIN: f64 = 1e-12;
        let n = self.n_total as f64;
        let lo = 1.0 / n;
        let hi = 1.0 - lo;
        let mut p = p.clamp(MARGIN, 1.0 - MARGIN);
        let mut q = q.clamp(MARGIN, 1.0 - MARGIN);
        // Repair the active per-point rate constraints along their normals.
        // Each is a halfplane k*p + (1-k)*q >= lo (measured) or <= hi
        // (unmeasured) at a class weight extreme.
        for _ in 0..16 {
            let mut moved = false;
            if self.measured_total() > 0 {
                let ka = self.k_meas_min;
                let kb = self.k_meas_max;
                let k = if rate_mix(ka, p, q).0 <= rate_mix(kb, p, q).0 {
                    ka
                } else {
                    kb
                };
                let g = rate_mix(k, p, q).0;
                if g < lo {
                    let w2 = k * k + (1.0 - k) * (1.0 - k);
                    let gap = (lo - g) / w2;
                    p += k * gap;
                    q += (1.0 - k) * gap;
                    moved = true;
                }
            }
            if self.k_unmeasured.len() + self.tail.n_unmeasured > 0 {
                let ka = self.k_unmeas_min;
                let kb = self.k_unmeas_max;
                let k = if rate_mix(ka, p, q).0 >= rate_mix(kb, p, q).0 {
                    ka
                } else {
                    kb
                };
                let g = rate_mix(k, p, q).0;
                if g > hi {
                    let w2 = k * k + (1.0 - k) * (1.0 - k);
                    let gap = (g - hi) / w2;
                    p -= k * gap;
                    q -= (1.0 - k) * gap;
                    moved = true;
                }
            }
            p = p.clamp(MARGIN, 1.0 - MARGIN);
            q = q.clamp(MARGIN, 1.0 - MARGIN);
            if !moved {
                break;
            }
        }
        if !self.rates_feasible(p, q, 1e-12) {
            // The box [1/n, 1-1/n]^2 is always feasible: every per-point
            // rate is a convex combination of p and q.
            p = p.clamp(lo, hi);
            q = q.clamp(lo, hi);
        }
        (p, q)
    }
}

/// Evaluation view for the value models (Gaussian, Poisson): kernel weight
/// paired with the measured value per active point.
#[derive(Debug, Clone)]
pub(crate) struct ValueView {
    pub n_total: usize,
    pub k: Vec<f64>,
    pub m: Vec<f64>,
    pub tail: ZeroTail,
    pub max_measured: f64,
}

impl ValueView {
    pub fn full(data: &LabeledDataset, kernel: &KernelRegion) -> Self {
        let idx: Vec<u32> = (0..data.len() as u32).collect();
        Self::over_window(data, kernel, &idx, ZeroTail::default(), false)
    }

    pub fn over_window(
        data: &LabeledDataset,
        kernel: &KernelRegion,
        window: &[u32],
        mut tail: ZeroTail,
        collapse_zeros: bool,
    ) -> Self {
        let mut ks = Vec::new();
        let mut ms = Vec::new();
        for &i in window {
            let i = i as usize;
            let kv = kernel.eval(&data.points[i]);
            if collapse_zeros && kv == 0.0 {
                tail.add(data.measured[i]);
                continue;
            }
            ks.push(kv);
            ms.push(data.measured[i]);
        }
        let max_measured = data.measured.iter().copied().fold(0.0f64, f64::max);
        ValueView {
            n_total: data.len(),
            k: ks,
            m: ms,
            tail,
            max_measured,
        }
    }

    pub fn active_len(&self) -> usize {
        self.k.len()
    }

    pub fn all_zero_weight(&self) -> bool {
        self.k.iter().all(|&k| k == 0.0)
    }
}
