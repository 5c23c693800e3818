//! Census counts against an independent enumeration of homomorphisms.

mod support;

use abelcount_core::census::{census_records, CensusConfig};
use abelcount_core::{FactorizationTable, FiniteAbelianGroup, FrobenianFunction};
use support::{fundamental_discriminants_of_size, BruteForceCensus};

fn counts(group: &FiniteAbelianGroup, bound: u64, table: &FactorizationTable) -> Vec<u64> {
    let one = FrobenianFunction::builtin(&"one".parse().unwrap()).unwrap();
    let config = CensusConfig { group, function: &one, bound, workers: 3, checkpoints: vec![] };
    let (records, _) = census_records(&config, table).unwrap();
    let mut out = vec![0; bound as usize + 1];
    for r in records {
        out[r.m as usize] = r.count;
    }
    out
}

#[test]
fn groups_up_to_order_eight_match_enumeration() {
    let table = FactorizationTable::build(3000).unwrap();
    for spec in ["2", "3", "4", "2,2", "5", "6", "7", "8", "4,2", "2,2,2"] {
        let group: FiniteAbelianGroup = spec.parse().unwrap();
        let ours = counts(&group, 3000, &table);
        let mut oracle = BruteForceCensus::new(group.invariant_factors());
        for m in 1..=3000 {
            assert_eq!(ours[m as usize], oracle.count(m), "G=[{spec}] m={m}");
        }
    }
}

#[test]
fn quadratic_conductors_are_fundamental_discriminants() {
    let table = FactorizationTable::build(20_000).unwrap();
    let ours = counts(&FiniteAbelianGroup::cyclic(2), 20_000, &table);
    for n in 1..=20_000u64 {
        assert_eq!(ours[n as usize], fundamental_discriminants_of_size(n), "|D| = {n}");
    }
}
