//! Kernel spatial scan statistics.
//!
//! A spatial scan statistic searches a family of candidate regions over a
//! point data set for the region maximizing a log-likelihood-ratio
//! discrepancy between measured values and a baseline. Here the regions are
//! Gaussian kernels `K(x) = exp(-||x-c||^2 / r^2)`: membership is a
//! probability that decays smoothly with distance from an epicenter `c`,
//! instead of the hard in/out boundary of classical disk scans.
//!
//! The crate provides:
//!
//! - [`geom`]: points, datasets, kernel regions, and the fixed/adaptive
//!   candidate-center grids with their approximation-driven sizing rules.
//! - [`likelihood`]: Bernoulli, Gaussian, and Poisson discrepancy functions,
//!   gradients, the projected-gradient rate solver, and the Gaussian closed
//!   form.
//! - [`scanner`]: the four kernel scan algorithms (grid, prune, adaptive,
//!   fast), coreset sampling, and the multi-bandwidth ladder.
//! - [`disk`]: a SatScan-style combinatorial disk baseline using Kulldorff's
//!   Bernoulli statistic.
//! - [`experiments`]: planted-anomaly generation, recovery metrics, and
//!   power / timing / bandwidth-sensitivity harnesses.
//!
//! All scan entry points are deterministic functions of `(data, config,
//! seed)`, independent of thread count.

pub mod data;
pub mod disk;
pub mod error;
pub mod experiments;
pub mod geom;
pub mod likelihood;
pub mod scanner;

pub use data::{LabeledDataset, MeasurementModel};
pub use error::{Error, Result};
pub use geom::{Domain, KernelRegion, Point};
pub use likelihood::{DiscrepancyResult, RatePair, SolverConfig};
