//! The power of `log B` in the weighted conductor count.
//!
//! Three routes are provided: the mean of
//! `λ(a) = (|G[gcd(e, a-1)]| - 1) · f(a)` over `(Z/ℓ)^*` with `ℓ = lcm(e, q)`,
//! a closed form for the sum-of-two-squares weight, and the product form
//! `m(f) · Σ_{g ≠ 1} 1/[k(ζ_|g|):k]` valid when the field of `f` is disjoint
//! from `k(ζ_e)`.

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{euler_phi, gcd, lcm};
use crate::error::{Error, Result};
use crate::frobenian::FrobenianFunction;
use crate::group::FiniteAbelianGroup;
use crate::lattice::subgroup_lattice;

/// Cyclotomic data of the base field `k`.
pub trait CyclotomicDegreeOracle: Send + Sync {
    /// `[k(ζ_n) : k]`.
    fn degree(&self, n: u64) -> u64;
    /// Whether `μ_4 ⊆ k(ζ_n)`.
    fn mu4_in(&self, n: u64) -> bool;
    /// Frobenius classes of unramified primes are residues mod `ℓ`. Only the
    /// rationals have this description here.
    fn has_congruence_frobenius(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Rationals;

impl CyclotomicDegreeOracle for Rationals {
    fn degree(&self, n: u64) -> u64 {
        euler_phi(n)
    }

    fn mu4_in(&self, n: u64) -> bool {
        n.is_multiple_of(4)
    }

    fn has_congruence_frobenius(&self) -> bool {
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentRoute {
    Mean,
    SumOfTwoSquaresClosedForm,
    Disjoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    #[serde(with = "crate::exact")]
    pub value: Rational64,
    pub route: ExponentRoute,
    /// Modulus the Frobenius classes were taken over.
    pub modulus: u64,
    /// False when the disjoint route's hypothesis could not be confirmed; the
    /// value is then advisory.
    pub disjointness_ok: bool,
}

/// The largest `d | e` with `a ≡ 1 mod d`.
pub fn psi_class_value(e: u64, a: u64) -> u64 {
    gcd(e, a.saturating_sub(1))
}

/// `gcd(e, p - 1)` for a prime `p` not dividing `e`.
pub fn d_h_of_prime(e: u64, p: u64) -> Result<u64> {
    if e.is_multiple_of(p) {
        return Err(Error::Domain(format!("{p} divides the exponent {e}; use the wild local computation")));
    }
    Ok(gcd(e, p - 1))
}

fn require_rational(oracle: &dyn CyclotomicDegreeOracle) -> Result<()> {
    if oracle.has_congruence_frobenius() {
        Ok(())
    } else {
        Err(Error::Unsupported("the mean route needs congruence data for Frobenius classes".into()))
    }
}

pub fn varpi_mean(
    group: &FiniteAbelianGroup,
    f: &FrobenianFunction,
    oracle: &dyn CyclotomicDegreeOracle,
) -> Result<ExponentReport> {
    require_rational(oracle)?;
    let e = group.exponent();
    let ell = lcm(e, f.period());
    let mut sum = Rational64::zero();
    for a in 1..=ell {
        if gcd(a, ell) != 1 {
            continue;
        }
        let homs = group.torsion_count(psi_class_value(e, a)) - 1;
        if homs > 0 {
            sum += f.class_value(a) * homs as i64;
        }
    }
    Ok(ExponentReport {
        value: sum / euler_phi(ell) as i64,
        route: ExponentRoute::Mean,
        modulus: ell,
        disjointness_ok: true,
    })
}

pub fn varpi_sots_closed_form(group: &FiniteAbelianGroup, oracle: &dyn CyclotomicDegreeOracle) -> ExponentReport {
    let mut value = Rational64::zero();
    for (&order, &count) in &group.order_census().counts {
        if order == 1 {
            continue;
        }
        let mut term = Rational64::new(count as i64, oracle.degree(order) as i64);
        if !oracle.mu4_in(order) {
            term /= 2;
        }
        value += term;
    }
    ExponentReport {
        value,
        route: ExponentRoute::SumOfTwoSquaresClosedForm,
        modulus: lcm(group.exponent(), 4),
        disjointness_ok: true,
    }
}

pub fn varpi_disjoint(
    group: &FiniteAbelianGroup,
    f: &FrobenianFunction,
    oracle: &dyn CyclotomicDegreeOracle,
) -> ExponentReport {
    let e = group.exponent();
    let sum: Rational64 = group
        .order_census()
        .counts
        .iter()
        .filter(|(&order, _)| order > 1)
        .map(|(&order, &count)| Rational64::new(count as i64, oracle.degree(order) as i64))
        .sum();
    // Q(ζ_q) ∩ Q(ζ_e) = Q(ζ_gcd), which is Q exactly when gcd ≤ 2.
    let disjointness_ok = oracle.has_congruence_frobenius() && gcd(f.period(), e) <= 2;
    ExponentReport {
        value: f.mean() * sum,
        route: ExponentRoute::Disjoint,
        modulus: lcm(e, f.period()),
        disjointness_ok,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubgroupExponent {
    pub iso_type: FiniteAbelianGroup,
    pub generators: Vec<Vec<u64>>,
    #[serde(with = "crate::exact")]
    pub value: Rational64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubgroupScan {
    /// One entry per subgroup, ascending by order; the whole group is last.
    pub entries: Vec<SubgroupExponent>,
    /// Proper subgroups whose exponent is not strictly below the whole
    /// group's (indices into `entries`).
    pub non_strict: Vec<usize>,
}

/// Exponent of every subgroup of `G`, flagging any proper subgroup that
/// fails to come out strictly smaller.
pub fn varpi_subgroup_scan(
    group: &FiniteAbelianGroup,
    f: &FrobenianFunction,
    oracle: &dyn CyclotomicDegreeOracle,
) -> Result<SubgroupScan> {
    if !f.mean().is_positive() {
        return Err(Error::Domain("subgroup monotonicity needs a positive mean".into()));
    }
    let lattice = subgroup_lattice(group)?;
    let mut entries = Vec::with_capacity(lattice.len());
    for sub in lattice.subgroups() {
        entries.push(SubgroupExponent {
            iso_type: sub.iso_type.clone(),
            generators: sub.generators.clone(),
            value: varpi_mean(&sub.iso_type, f, oracle)?.value,
        });
    }
    let top = entries.last().map(|e| e.value).unwrap_or_default();
    let non_strict = (0..entries.len().saturating_sub(1)).filter(|&i| entries[i].value >= top).collect();
    Ok(SubgroupScan { entries, non_strict })
}
