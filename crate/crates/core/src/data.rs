//! Labeled spatial datasets: baseline points with per-point measured values.

use crate::error::{Error, Result};
use crate::geom::Point;
use serde::{Deserialize, Serialize};

/// Statistical model the measured values obey.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementModel {
    /// Binary values in {0, 1}.
    Bernoulli,
    /// Real values, normal noise with known standard deviation.
    Gaussian,
    /// Non-negative integer counts.
    Poisson,
}

impl MeasurementModel {
    pub fn name(&self) -> &'static str {
        match self {
            MeasurementModel::Bernoulli => "bernoulli",
            MeasurementModel::Gaussian => "gaussian",
            MeasurementModel::Poisson => "poisson",
        }
    }

    /// Checks one measured value against this model.
    pub fn admits(&self, v: f64) -> bool {
        match self {
            MeasurementModel::Bernoulli => v == 0.0 || v == 1.0,
            MeasurementModel::Gaussian => v.is_finite(),
            MeasurementModel::Poisson => v.is_finite() && v >= 0.0 && v.fract() == 0.0,
        }
    }
}

/// Baseline points with a parallel list of measured values.
///
/// For the Bernoulli model the measured subset is the points with value 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub points: Vec<Point>,
    pub measured: Vec<f64>,
    pub model: MeasurementModel,
}

impl LabeledDataset {
    pub fn new(points: Vec<Point>, measured: Vec<f64>, model: MeasurementModel) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if points.len() != measured.len() {
            return Err(Error::LengthMismatch {
                points: points.len(),
                measured: measured.len(),
            });
        }
        for (i, p) in points.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite coordinates at index {i}"
                )));
            }
        }
        for (i, &v) in measured.iter().enumerate() {
            if !model.admits(v) {
                return Err(Error::ModelMismatch {
                    model: model.name(),
                    index: i,
                    value: v,
                });
            }
        }
        Ok(LabeledDataset {
            points,
            measured,
            model,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points with measured value 1 (Bernoulli).
    pub fn measured_count(&self) -> usize {
        self.measured.iter().filter(|&&v| v > 0.5).count()
    }

    /// Mean measured value.
    pub fn measured_mean(&self) -> f64 {
        self.measured.iter().sum::<f64>() / self.len() as f64
    }

    pub fn require_model(&self, op: &'static str, expected: MeasurementModel) -> Result<()> {
        if self.model != expected {
            return Err(Error::WrongModel {
                op,
                expected: expected.name(),
                actual: self.model.name(),
            });
        }
        Ok(())
    }

    /// Dataset restricted to the given indices (with replacement allowed).
    pub fn subset(&self, indices: &[u32]) -> LabeledDataset {
        LabeledDataset {
            points: indices.iter().map(|&i| self.points[i as usize]).collect(),
            measured: indices.iter().map(|&i| self.measured[i as usize]).collect(),
            model: self.model,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(coords: &[(f64, f64)]) -> Vec<Point> {
        coords.iter().map(|&(x, y)| Point { x, y }).collect()
    }

    #[test]
    fn rejects_empty_and_mismatched() {
        assert!(matches!(
            LabeledDataset::new(vec![], vec![], MeasurementModel::Bernoulli),
            Err(Error::EmptyDataset)
        ));
        let err = LabeledDataset::new(
            pts(&[(0.0, 0.0)]),
            vec![1.0, 0.0],
            MeasurementModel::Bernoulli,
        )
        .unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { .. }));
    }

    #[test]
    fn bernoulli_rejects_fractional_values() {
        let err = LabeledDataset::new(
            pts(&[(0.0, 0.0), (1.0, 1.0)]),
            vec![1.0, 0.5],
            MeasurementModel::Bernoulli,
        )
        .unwrap_err();
        match err {
            Error::ModelMismatch { index, value, .. } => {
                assert_eq!(index, 1);
                assert_eq!(value, 0.5);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn poisson_rejects_negative_and_fractional() {
        assert!(LabeledDataset::new(
            pts(&[(0.0, 0.0)]),
            vec![-1.0],
            MeasurementModel::Poisson
        )
        .is_err());
        assert!(LabeledDataset::new(
            pts(&[(0.0, 0.0)]),
            vec![2.5],
            MeasurementModel::Poisson
        )
        .is_err());
        assert!(LabeledDataset::new(
            pts(&[(0.0, 0.0)]),
            vec![7.0],
            MeasurementModel::Poisson
        )
        .is_ok());
    }

    #[test]
    fn measured_count_and_mean() {
        let d = LabeledDataset::new(
            pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]),
            vec![1.0, 1.0, 0.0, 0.0],
            MeasurementModel::Bernoulli,
        )
        .unwrap();
        assert_eq!(d.measured_count(), 2);
        assert_eq!(d.measured_mean(), 0.5);
    }
}
