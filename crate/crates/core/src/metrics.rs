//! Angles to ground truth, the longest correct eigenvector streak, captured
//! variance and time-to-streak lookups.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::ppca::ComponentSet;

/// `pi / 8, pi / 16, ..., pi / 1024`.
pub fn default_thresholds() -> Vec<f64> {
    (3..=10).map(|p| PI / f64::from(1u32 << p)).collect()
}

/// Column label for a threshold: `piDiv8` for `pi / 8`, otherwise the raw value.
pub fn threshold_label(v: f64) -> String {
    let ratio = PI / v;
    let rounded = ratio.round();
    if rounded >= 1.0 && (ratio - rounded).abs() < 1e-9 {
        format!("piDiv{}", rounded as u64)
    } else {
        format!("{v}")
    }
}

/// Sign-invariant angle in `[0, pi/2]` between two directions.
///
/// Uses `2 atan2(|v - s e|, |v + s e|)` with `s = sign(<v, e>)`, which agrees
/// with `acos(|<v, e>|)` for unit vectors but stays accurate for tiny angles
/// and is exactly symmetric in its arguments.
pub fn angle_between(v: &[f64], e: &[f64]) -> f64 {
    let (Some(v), Some(e)) = (unit(v), unit(e)) else {
        return PI / 2.0;
    };
    let s = if dot(&v, &e) >= 0.0 { 1.0 } else { -1.0 };
    let mut diff = 0.0;
    let mut sum = 0.0;
    for (a, b) in v.iter().zip(&e) {
        diff += (a - s * b) * (a - s * b);
        sum += (a + s * b) * (a + s * b);
    }
    (2.0 * diff.sqrt().atan2(sum.sqrt())).min(PI / 2.0)
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = norm(v);
    (n > 0.0 && n.is_finite()).then(|| v.iter().map(|x| x / n).collect())
}

/// Angle between two unit vectors; errors when either is off the sphere by
/// more than `1e-6`.
pub fn angular_error(v: &[f64], e: &[f64]) -> Result<f64> {
    if v.len() != e.len() {
        return Err(Error::DimensionMismatch {
            expected: e.len(),
            found: v.len(),
        });
    }
    for x in [v, e] {
        let n = norm(x);
        if !((n - 1.0).abs() <= 1e-6) {
            return Err(Error::NotUnit { norm: n });
        }
    }
    Ok(angle_between(v, e))
}

/// Number of leading angles strictly below `threshold`.
pub fn streak_from_angles(angles: &[f64], threshold: f64) -> usize {
    angles.iter().take_while(|a| **a < threshold).count()
}

/// Longest run of leading estimates within `threshold` of the matching truth.
pub fn eigenvector_streak(estimates: &ComponentSet, truth: &ComponentSet, threshold: f64) -> usize {
    estimates
        .vectors()
        .iter()
        .zip(truth.vectors())
        .take_while(|(v, e)| angle_between(v, e) < threshold)
        .count()
}

/// `v^T (X^T X) v`, computed as `|X v|^2`.
pub fn captured_variance(v: &[f64], ds: &Dataset) -> Result<f64> {
    let xv = ds.matrix().matvec(v)?;
    Ok(dot(&xv, &xv))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Priming,
    Ppca,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Priming => "priming",
            Variant::Ppca => "ppca",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub step: usize,
    pub wall_ms: f64,
    pub angles: Vec<f64>,
    /// `(threshold, streak)` pairs in the series' threshold order.
    pub streaks: Vec<(f64, usize)>,
    pub captured_variance: Vec<f64>,
    pub variant: Variant,
    pub l: usize,
}

impl MetricRecord {
    pub fn streak_at(&self, threshold: f64) -> Option<usize> {
        self.streaks
            .iter()
            .find(|(v, _)| (v - threshold).abs() <= 1e-15 * threshold.abs())
            .map(|(_, s)| *s)
    }
}

/// Measures `estimates` against `truth` at every threshold.
pub fn evaluate(
    estimates: &ComponentSet,
    truth: &ComponentSet,
    ds: &Dataset,
    thresholds: &[f64],
) -> Result<(Vec<f64>, Vec<(f64, usize)>, Vec<f64>)> {
    let angles: Vec<f64> = estimates
        .vectors()
        .iter()
        .zip(truth.vectors())
        .map(|(v, e)| angle_between(v, e))
        .collect();
    let streaks = thresholds
        .iter()
        .map(|&t| (t, streak_from_angles(&angles, t)))
        .collect();
    let variance = estimates
        .vectors()
        .iter()
        .map(|v| captured_variance(v, ds))
        .collect::<Result<Vec<_>>>()?;
    Ok((angles, streaks, variance))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub config_hash: String,
    pub seed: u64,
    pub algorithm: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub meta: SeriesMeta,
    records: Vec<MetricRecord>,
}

impl MetricSeries {
    pub fn new(meta: SeriesMeta) -> Self {
        Self {
            meta,
            records: Vec::new(),
        }
    }

    /// Appends a record; steps must be strictly increasing.
    pub fn push(&mut self, record: MetricRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if record.step <= last.step {
                return Err(Error::InvalidConfig(format!(
                    "record step {} does not follow {}",
                    record.step, last.step
                )));
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[MetricRecord] {
        &self.records
    }

    pub fn last(&self) -> Option<&MetricRecord> {
        self.records.last()
    }
}

/// First checkpoint whose streak at `threshold` reaches `target`, as
/// `(step, wall_ms)`.
pub fn steps_to_streak(
    series: &MetricSeries,
    target: usize,
    threshold: f64,
) -> Option<(usize, f64)> {
    series
        .records()
        .iter()
        .find(|r| r.streak_at(threshold).is_some_and(|s| s >= target))
        .map(|r| (r.step, r.wall_ms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::counterexample_dataset;

    #[test]
    fn angle_examples() {
        let e = [0.6, 0.8];
        assert_eq!(angular_error(&e, &e).unwrap(), 0.0);
        assert_eq!(angular_error(&[-0.6, -0.8], &e).unwrap(), 0.0);
        assert!((angular_error(&[-0.8, 0.6], &e).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!(matches!(
            angular_error(&[2.0, 0.0], &e),
            Err(Error::NotUnit { .. })
        ));
    }

    #[test]
    fn tiny_angles_resolved() {
        let t: f64 = 1e-10;
        let v = [t.cos(), t.sin()];
        let a = angular_error(&v, &[1.0, 0.0]).unwrap();
        assert!((a - t).abs() < 1e-20);
    }

    #[test]
    fn streak_worked_example() {
        let v = PI / 8.0;
        assert_eq!(
            streak_from_angles(&[v / 2.0, v / 3.0, 2.0 * v, v / 2.0], v),
            2
        );
        assert_eq!(streak_from_angles(&[0.0; 4], v), 4);
        assert_eq!(streak_from_angles(&[2.0 * v, 0.0], v), 0);
    }

    #[test]
    fn captured_variance_counterexample() {
        let ds = counterexample_dataset();
        assert_eq!(captured_variance(&[1.0, 0.0, 0.0], &ds).unwrap(), 18.0);
        assert_eq!(captured_variance(&[-1.0, 0.0, 0.0], &ds).unwrap(), 18.0);
        assert!(captured_variance(&[1.0, 0.0], &ds).is_err());
    }

    #[test]
    fn threshold_labels() {
        let labels: Vec<String> = default_thresholds()
            .into_iter()
            .map(threshold_label)
            .collect();
        assert_eq!(labels[0], "piDiv8");
        assert_eq!(labels[7], "piDiv1024");
        assert_eq!(threshold_label(0.5), "0.5");
    }

    fn record(step: usize, streak: usize) -> MetricRecord {
        MetricRecord {
            step,
            wall_ms: step as f64 * 2.0,
            angles: vec![],
            streaks: vec![(PI / 8.0, streak)],
            captured_variance: vec![],
            variant: Variant::Priming,
            l: 0,
        }
    }

    #[test]
    fn steps_to_streak_examples() {
        let meta = SeriesMeta {
            config_hash: String::new(),
            seed: 0,
            algorithm: "oja".into(),
        };
        let mut s = MetricSeries::new(meta);
        for (step, streak) in [(10, 3), (20, 15), (40, 16), (50, 16)] {
            s.push(record(step, streak)).unwrap();
        }
        assert_eq!(steps_to_streak(&s, 16, PI / 8.0), Some((40, 80.0)));
        assert_eq!(steps_to_streak(&s, 17, PI / 8.0), None);
        assert_eq!(steps_to_streak(&s, 0, PI / 8.0), Some((10, 20.0)));
        assert!(s.push(record(50, 1)).is_err());
    }
}
