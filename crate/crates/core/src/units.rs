//! Unit groups `(Z/m)^*` and counts of homomorphisms `(Z/m)^* -> G` by
//! exact conductor.
//!
//! Over the rationals, continuous homomorphisms from the Galois group to `G`
//! are homomorphisms from `(Z/m)^*` for some modulus `m`, and the conductor is
//! the least `m` through which the map factors. Only the finite part counts:
//! the real place never contributes to the conductor norm.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::group::{hom_count, FiniteAbelianGroup};
use crate::lattice::{moebius_support, surjections_from_support};
use crate::sieve::FactorizationTable;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitGroupStructure {
    pub modulus: u64,
    /// Orders of the cyclic factors, one block per prime power of `m`.
    pub cyclic_orders: Vec<u64>,
}

impl UnitGroupStructure {
    pub fn order(&self) -> u64 {
        self.cyclic_orders.iter().product()
    }

    pub fn as_group(&self) -> FiniteAbelianGroup {
        FiniteAbelianGroup::from_cyclic_orders(&self.cyclic_orders)
    }
}

/// Cyclic factors of `(Z/p^a)^*`.
pub fn prime_power_unit_orders(p: u64, a: u32) -> Vec<u64> {
    match (p, a) {
        (_, 0) => vec![],
        (2, 1) => vec![],
        (2, 2) => vec![2],
        (2, a) => vec![2, 1 << (a - 2)],
        (p, a) => vec![p.pow(a - 1) * (p - 1)],
    }
}

pub(crate) fn orders_from_factorization(factors: &[(u64, u32)]) -> Vec<u64> {
    factors.iter().flat_map(|&(p, a)| prime_power_unit_orders(p, a)).collect()
}

pub fn unit_group_structure(m: u64, table: &FactorizationTable) -> Result<UnitGroupStructure> {
    let factors = table.factor(m)?;
    Ok(UnitGroupStructure { modulus: m, cyclic_orders: orders_from_factorization(&factors) })
}

/// `|Hom((Z/m)^*, G)|`: homomorphisms whose conductor divides `m`.
pub fn homs_with_conductor_dividing(m: u64, group: &FiniteAbelianGroup, table: &FactorizationTable) -> Result<u64> {
    Ok(hom_count(&unit_group_structure(m, table)?.cyclic_orders, group))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConductorCount {
    pub modulus: u64,
    /// Homomorphisms of conductor exactly `m`.
    pub homs_all: u64,
    /// The surjective ones among them.
    pub homs_surjective: u64,
}

/// Counts by inclusion–exclusion over the primes of `m`: a map has conductor
/// exactly `m` when it does not factor through `m/p` for any `p | m`.
pub fn exact_conductor_count(m: u64, group: &FiniteAbelianGroup, table: &FactorizationTable) -> Result<ConductorCount> {
    let factors = table.factor(m)?;
    let support = moebius_support(group)?;
    Ok(exact_conductor_count_factored(m, &factors, group, &support))
}

/// Same as [`exact_conductor_count`] with the factorization and the
/// Möbius data of `G` supplied by the caller.
pub(crate) fn exact_conductor_count_factored(
    m: u64,
    factors: &[(u64, u32)],
    group: &FiniteAbelianGroup,
    support: &[(i64, FiniteAbelianGroup)],
) -> ConductorCount {
    if m % 4 == 2 {
        // (Z/2m')^* = (Z/m')^*: nothing is primitive at such a level.
        return ConductorCount { modulus: m, homs_all: 0, homs_surjective: 0 };
    }
    let k = factors.len();
    let mut all: i128 = 0;
    let mut surj: i128 = 0;
    let mut reduced: Vec<(u64, u32)> = factors.to_vec();
    for mask in 0u32..(1 << k) {
        for (i, f) in reduced.iter_mut().enumerate() {
            f.1 = factors[i].1 - ((mask >> i) & 1);
        }
        let orders = orders_from_factorization(&reduced);
        let sign: i128 = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
        all += sign * hom_count(&orders, group) as i128;
        surj += sign * surjections_from_support(&orders, support) as i128;
    }
    debug_assert!(all >= 0 && surj >= 0 && surj <= all);
    ConductorCount { modulus: m, homs_all: all as u64, homs_surjective: surj as u64 }
}
