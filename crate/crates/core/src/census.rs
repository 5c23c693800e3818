//! Census of `G`-extensions of the rationals by exact conductor.
//!
//! The range `1..=B` is cut into fixed chunks. Each batch of chunks is
//! counted in parallel, then merged in ascending order so the stream of
//! records is the same for any worker count.

use num_rational::Rational64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frobenian::FrobenianFunction;
use crate::group::FiniteAbelianGroup;
use crate::lattice::moebius_support;
use crate::sieve::FactorizationTable;
use crate::units::exact_conductor_count_factored;

const CHUNK: u64 = 1 << 14;

/// Smallest checkpoint produced by [`geometric_checkpoints`] unless the
/// bound itself is smaller.
pub const DEFAULT_CHECKPOINT_FLOOR: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRecord {
    pub m: u64,
    /// Surjections `(Z/m)^* -> G` of conductor exactly `m`.
    pub count: u64,
    #[serde(with = "crate::exact")]
    pub f_value: Rational64,
    #[serde(with = "crate::exact")]
    pub weighted: Rational64,
    #[serde(with = "crate::exact")]
    pub cumulative: Rational64,
}

/// Running totals up to `bound`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub bound: u64,
    pub count: u64,
    #[serde(with = "crate::exact")]
    pub weighted: Rational64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusSummary {
    pub group: String,
    pub function: String,
    pub bound: u64,
    pub workers: usize,
    pub total_count: u64,
    #[serde(with = "crate::exact")]
    pub total_weighted: Rational64,
    pub aut_order: u64,
    /// `total_weighted / |Aut(G)|`: extensions rather than surjections.
    #[serde(with = "crate::exact")]
    pub field_count: Rational64,
    pub nonzero_conductors: u64,
    pub checkpoints: Vec<Checkpoint>,
}

/// `B, B/2, B/4, …` down to `floor`, in ascending order. Always contains `B`.
pub fn geometric_checkpoints(bound: u64, floor: u64) -> Vec<u64> {
    let mut out = vec![bound];
    let mut b = bound / 2;
    while b >= floor.max(1) {
        out.push(b);
        b /= 2;
    }
    out.reverse();
    out
}

pub struct CensusConfig<'a> {
    pub group: &'a FiniteAbelianGroup,
    pub function: &'a FrobenianFunction,
    pub bound: u64,
    pub workers: usize,
    pub checkpoints: Vec<u64>,
}

/// Runs the census, handing every record with `count > 0` to `sink` in
/// ascending `m`. Fails before emitting anything if the table is too small
/// or the thread pool cannot be built.
pub fn census<F>(config: &CensusConfig<'_>, table: &FactorizationTable, mut sink: F) -> Result<CensusSummary>
where
    F: FnMut(&CensusRecord) -> Result<()>,
{
    let CensusConfig { group, function, bound, workers, .. } = *config;
    if bound > table.bound() {
        return Err(Error::OutOfRange { value: bound, bound: table.bound() });
    }
    if workers == 0 {
        return Err(Error::Domain("worker count must be positive".into()));
    }
    let aut_order =
        u64::try_from(group.aut_count()).map_err(|_| Error::GroupTooLarge { order: group.order(), bound: u64::MAX })?;
    let support = moebius_support(group)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    let mut checkpoints: Vec<u64> = config.checkpoints.iter().copied().filter(|&c| c <= bound).collect();
    checkpoints.sort_unstable();
    checkpoints.dedup();

    let count_chunk = |start: u64| -> Vec<(u64, u64, Rational64)> {
        let end = (start + CHUNK).min(bound + 1);
        (start..end)
            .filter_map(|m| {
                let factors = table.factor_unchecked(m);
                let c = exact_conductor_count_factored(m, &factors, group, &support).homs_surjective;
                (c > 0).then(|| (m, c, function.eval_factored(&factors)))
            })
            .collect()
    };

    let starts: Vec<u64> = (1..=bound).step_by(CHUNK as usize).collect();
    let batch = workers * 4;
    let mut total_count = 0u64;
    let mut cumulative = Rational64::zero();
    let mut nonzero = 0u64;
    let mut taken = Vec::with_capacity(checkpoints.len());
    let mut next_checkpoint = 0usize;
    for batch_starts in starts.chunks(batch) {
        let results: Vec<Vec<(u64, u64, Rational64)>> =
            pool.install(|| batch_starts.par_iter().map(|&s| count_chunk(s)).collect());
        for (m, count, f_value) in results.into_iter().flatten() {
            while next_checkpoint < checkpoints.len() && checkpoints[next_checkpoint] < m {
                taken.push(Checkpoint {
                    bound: checkpoints[next_checkpoint],
                    count: total_count,
                    weighted: cumulative,
                });
                next_checkpoint += 1;
            }
            let weighted = f_value * Rational64::from_integer(count as i64);
            total_count += count;
            cumulative += weighted;
            nonzero += 1;
            sink(&CensusRecord { m, count, f_value, weighted, cumulative })?;
        }
    }
    for &b in &checkpoints[next_checkpoint..] {
        taken.push(Checkpoint { bound: b, count: total_count, weighted: cumulative });
    }
    Ok(CensusSummary {
        group: group.to_string(),
        function: function.spec().to_string(),
        bound,
        workers,
        total_count,
        total_weighted: cumulative,
        aut_order,
        field_count: cumulative / Rational64::from_integer(aut_order as i64),
        nonzero_conductors: nonzero,
        checkpoints: taken,
    })
}

/// Collects the whole census in memory.
pub fn census_records(
    config: &CensusConfig<'_>,
    table: &FactorizationTable,
) -> Result<(Vec<CensusRecord>, CensusSummary)> {
    let mut records = Vec::new();
    let summary = census(config, table, |r| {
        records.push(r.clone());
        Ok(())
    })?;
    Ok((records, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(g: &str, f: &str, bound: u64, workers: usize) -> (Vec<CensusRecord>, CensusSummary) {
        let group: FiniteAbelianGroup = g.parse().unwrap();
        let function = FrobenianFunction::builtin(&f.parse().unwrap()).unwrap();
        let table = FactorizationTable::build(bound.max(2)).unwrap();
        let config = CensusConfig {
            group: &group,
            function: &function,
            bound,
            workers,
            checkpoints: geometric_checkpoints(bound, 1),
        };
        census_records(&config, &table).unwrap()
    }

    #[test]
    fn quadratic_conductors_up_to_twenty() {
        let (records, summary) = run("2", "one", 20, 2);
        let ms: Vec<u64> = records.iter().map(|r| r.m).collect();
        assert_eq!(ms, vec![3, 4, 5, 7, 8, 11, 12, 13, 15, 17, 19, 20]);
        // Conductor 8 carries both discriminants 8 and -8.
        assert_eq!(records.iter().find(|r| r.m == 8).unwrap().count, 2);
        assert_eq!(summary.total_count, 13);
        assert_eq!(summary.field_count, Rational64::from_integer(13));
    }

    #[test]
    fn sots_weights() {
        let (records, _) = run("2", "sots", 10, 1);
        let nonzero: Vec<u64> = records.iter().filter(|r| !r.weighted.is_zero()).map(|r| r.m).collect();
        assert_eq!(nonzero, vec![4, 5, 8]);
    }

    #[test]
    fn no_quintic_below_eleven() {
        let (records, summary) = run("5", "one", 10, 1);
        assert!(records.is_empty());
        assert_eq!(summary.total_count, 0);
        let (records, _) = run("5", "one", 11, 1);
        assert_eq!(records[0].m, 11);
        assert_eq!(records[0].count, 4);
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let (reference, summary) = run("2,2", "sots", 100_000, 1);
        for workers in [4, 16] {
            let (records, s) = run("2,2", "sots", 100_000, workers);
            assert_eq!(records, reference);
            assert_eq!(s.checkpoints, summary.checkpoints);
        }
    }

    #[test]
    fn checkpoints_track_cumulative() {
        let (records, summary) = run("3", "one", 5000, 3);
        for cp in &summary.checkpoints {
            let expected: Rational64 = records.iter().filter(|r| r.m <= cp.bound).map(|r| r.weighted).sum();
            assert_eq!(cp.weighted, expected, "at {}", cp.bound);
        }
        assert_eq!(geometric_checkpoints(100, 10), vec![12, 25, 50, 100]);
    }

    #[test]
    fn bound_beyond_table_fails_before_output() {
        let group = FiniteAbelianGroup::cyclic(2);
        let function = FrobenianFunction::builtin(&"one".parse().unwrap()).unwrap();
        let table = FactorizationTable::build(100).unwrap();
        let config = CensusConfig { group: &group, function: &function, bound: 1000, workers: 1, checkpoints: vec![] };
        let mut emitted = 0;
        assert!(census(&config, &table, |_| {
            emitted += 1;
            Ok(())
        })
        .is_err());
        assert_eq!(emitted, 0);
    }
}
