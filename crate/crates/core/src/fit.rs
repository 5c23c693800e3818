//! Empirical log-power exponent from census checkpoints.
//!
//! If `C(B) ≈ c B (log B)^{ϖ-1}` then `log(C/B)` is affine in `log log B`
//! with slope `ϖ - 1`.

use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::census::{CensusRecord, Checkpoint};
use crate::error::{Error, Result};

pub const MIN_FIT_POINTS: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Checkpoints actually used: positive cumulative and `B ≥ 3`.
    pub checkpoints: Vec<Checkpoint>,
    /// Fitted slope, an estimate of `ϖ - 1`.
    pub estimate: f64,
    pub intercept: f64,
    #[serde(with = "crate::exact")]
    pub predicted_varpi: Rational64,
    /// `estimate - (ϖ - 1)`.
    pub residual: f64,
    /// Root-mean-square deviation of the points from the fitted line.
    pub rms_deviation: f64,
}

/// Running totals at each bound, read off records sorted by `m`.
pub fn checkpoints_from_records(records: &[CensusRecord], bounds: &[u64]) -> Vec<Checkpoint> {
    bounds
        .iter()
        .map(|&b| {
            let upto = records.partition_point(|r| r.m <= b);
            Checkpoint {
                bound: b,
                count: records[..upto].iter().map(|r| r.count).sum(),
                weighted: upto.checked_sub(1).map_or(Rational64::from_integer(0), |i| records[i].cumulative),
            }
        })
        .collect()
}

pub fn fit_exponent(checkpoints: &[Checkpoint], predicted_varpi: Rational64) -> Result<FitReport> {
    let used: Vec<Checkpoint> =
        checkpoints.iter().filter(|c| c.bound >= 3 && c.weighted > Rational64::from_integer(0)).cloned().collect();
    if used.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} usable checkpoints, at least {MIN_FIT_POINTS} needed",
            used.len()
        )));
    }
    let points: Vec<(f64, f64)> = used
        .iter()
        .map(|c| {
            let b = c.bound as f64;
            (b.ln().ln(), (c.weighted.to_f64().unwrap_or(f64::NAN) / b).ln())
        })
        .collect();
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("checkpoints do not spread in log log B".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let rms = (points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    let predicted = predicted_varpi.to_f64().unwrap_or(f64::NAN);
    Ok(FitReport {
        checkpoints: used,
        estimate: slope,
        intercept,
        predicted_varpi,
        residual: slope - (predicted - 1.0),
        rms_deviation: rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(exponent: f64, bounds: &[u64]) -> Vec<Checkpoint> {
        bounds
            .iter()
            .map(|&b| {
                let v = 0.3 * b as f64 * (b as f64).ln().powf(exponent);
                Checkpoint { bound: b, count: v as u64, weighted: Rational64::from_integer(v.round() as i64) }
            })
            .collect()
    }

    #[test]
    fn recovers_synthetic_exponent() {
        let bounds: Vec<u64> = (0..10).map(|j| 10_000_000u64 >> j).collect();
        let r = fit_exponent(&synthetic(-0.5, &bounds), Rational64::new(1, 2)).unwrap();
        assert!(r.residual.abs() < 1e-4, "{r:?}");
        assert!(r.rms_deviation < 1e-3);
        assert!((r.intercept - 0.3f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn checkpoints_match_census_summary() {
        use crate::census::{census_records, geometric_checkpoints, CensusConfig};
        use crate::{FactorizationTable, FiniteAbelianGroup, FrobenianFunction};
        let group = FiniteAbelianGroup::cyclic(4);
        let f = FrobenianFunction::builtin(&"sots".parse().unwrap()).unwrap();
        let table = FactorizationTable::build(20_000).unwrap();
        let bounds = geometric_checkpoints(20_000, 100);
        let config =
            CensusConfig { group: &group, function: &f, bound: 20_000, workers: 1, checkpoints: bounds.clone() };
        let (records, summary) = census_records(&config, &table).unwrap();
        assert_eq!(checkpoints_from_records(&records, &bounds), summary.checkpoints);
    }

    #[test]
    fn degenerate_inputs() {
        let zeros: Vec<Checkpoint> =
            (1..8).map(|j| Checkpoint { bound: 1000 * j, count: 0, weighted: Rational64::from_integer(0) }).collect();
        assert!(matches!(fit_exponent(&zeros, Rational64::from_integer(1)), Err(Error::InsufficientData(_))));
        let three = synthetic(0.0, &[1000, 2000, 4000]);
        assert!(matches!(fit_exponent(&three, Rational64::from_integer(1)), Err(Error::InsufficientData(_))));
    }
}
