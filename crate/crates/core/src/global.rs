//! S-unit tensor classes, global Fourier transforms as Euler products, the
//! Poisson identity for the conductor series, and the classes that feed the
//! leading constant.

use std::fmt;

use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, is_power_residue, is_prime, kronecker, lcm, pow_mod};
use crate::brauer::Place;
use crate::error::{Error, Result};
use crate::exponent::{varpi_mean, Rationals};
use crate::frobenian::{to_f64, FrobenianFunction};
use crate::group::FiniteAbelianGroup;
use crate::local::{local_ft_exact, tame_coefficient, LocalComponent, LocalSpot, LocalTensorClass, LocalTransform};
use crate::sieve::FactorizationTable;
use crate::units::exact_conductor_count_factored;

/// Finite places of `S`, ascending. The real place is always included
/// implicitly.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SUnitBasis {
    pub primes: Vec<u64>,
}

impl SUnitBasis {
    pub fn new(mut primes: Vec<u64>) -> Result<Self> {
        primes.sort_unstable();
        primes.dedup();
        if let Some(&p) = primes.iter().find(|&&p| !is_prime(p)) {
            return Err(Error::Domain(format!("{p} is not prime")));
        }
        Ok(Self { primes })
    }

    /// `{2} ∪ {p ≤ |G|} ∪ S_f`.
    pub fn for_problem(group: &FiniteAbelianGroup, f: &FrobenianFunction) -> Self {
        let mut primes: Vec<u64> = (2..=group.order().max(2)).filter(|&p| is_prime(p)).collect();
        primes.extend(f.exceptional_primes());
        Self::new(primes).expect("all entries are prime")
    }

    /// Generators of `O_S^*`: `-1` followed by the primes.
    pub fn generators(&self) -> Vec<i64> {
        std::iter::once(-1).chain(self.primes.iter().map(|&p| p as i64)).collect()
    }

    pub fn contains(&self, p: u64) -> bool {
        self.primes.binary_search(&p).is_ok()
    }
}

/// An element of `O_S^* ⊗ G^`: for each invariant factor `d_i` of `G`, the
/// exponents of `-1` (mod `gcd(2, d_i)`) and of each prime of `S` (mod `d_i`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TensorClass {
    pub exponents: Vec<Vec<u64>>,
}

impl TensorClass {
    pub fn trivial(group: &FiniteAbelianGroup, basis: &SUnitBasis) -> Self {
        Self { exponents: vec![vec![0; basis.primes.len() + 1]; group.rank()] }
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().flatten().all(|&k| k == 0)
    }

    /// Component-wise product of S-units, e.g. `-2` or `-1,3` for rank two.
    pub fn label(&self, basis: &SUnitBasis) -> String {
        if self.is_trivial() {
            return "1".into();
        }
        let gens = basis.generators();
        let parts: Vec<String> = self
            .exponents
            .iter()
            .map(|row| {
                let mut value: Option<i128> = Some(1);
                for (&g, &k) in gens.iter().zip(row) {
                    value = value.and_then(|v| (g as i128).checked_pow(k as u32).and_then(|gk| v.checked_mul(gk)));
                }
                match value {
                    Some(v) => v.to_string(),
                    None => {
                        let terms: Vec<String> =
                            gens.iter().zip(row).filter(|(_, &k)| k > 0).map(|(g, k)| format!("({g})^{k}")).collect();
                        terms.join("*")
                    }
                }
            })
            .collect();
        parts.join(",")
    }

    /// Image in `Q_v^* ⊗ G^` at a spot.
    pub fn specialize(&self, basis: &SUnitBasis, group: &FiniteAbelianGroup, spot: LocalSpot) -> LocalTensorClass {
        let gens = basis.generators();
        let components = self
            .exponents
            .iter()
            .zip(group.invariant_factors())
            .map(|(row, &d)| match spot.prime() {
                None => LocalComponent { valuation: 0, unit: 1, negative: row[0] % 2 == 1 },
                Some(p) => {
                    let m = spot.modulus();
                    let mut valuation = 0;
                    let mut unit = 1 % m;
                    for (&g, &k) in gens.iter().zip(row) {
                        if g == p as i64 {
                            valuation = k % d;
                        } else {
                            unit = unit * pow_mod(g.rem_euclid(m as i64) as u64, k, m) % m;
                        }
                    }
                    LocalComponent { valuation, unit, negative: false }
                }
            })
            .collect();
        LocalTensorClass { spot, components }
    }

    /// Residue of the `i`-th component modulo a prime `p` outside `S`.
    fn component_residue(&self, i: usize, gens: &[i64], p: u64) -> u64 {
        let mut r = 1 % p;
        for (&g, &k) in gens.iter().zip(&self.exponents[i]) {
            if k > 0 {
                r = r * pow_mod(g.rem_euclid(p as i64) as u64, k, p) % p;
            }
        }
        r
    }

    /// Whether the class is trivial in `Q_p^* ⊗ G^` for a prime `p ∉ S`.
    pub fn is_trivial_at(&self, basis: &SUnitBasis, group: &FiniteAbelianGroup, p: u64) -> bool {
        let gens = basis.generators();
        group
            .invariant_factors()
            .iter()
            .enumerate()
            .all(|(i, &d)| is_power_residue(self.component_residue(i, &gens, p), d, p))
    }
}

/// Every element of `O_S^* ⊗ G^`, the trivial class first.
pub fn s_unit_tensor_group(group: &FiniteAbelianGroup, basis: &SUnitBasis) -> Vec<TensorClass> {
    let width = basis.primes.len() + 1;
    let radices: Vec<(usize, usize, u64)> = group
        .invariant_factors()
        .iter()
        .enumerate()
        .flat_map(|(i, &d)| (0..width).map(move |j| (i, j, if j == 0 { gcd(2, d) } else { d })))
        .collect();
    let total: u64 = radices.iter().map(|r| r.2).product();
    let mut out = Vec::with_capacity(total as usize);
    let mut current = TensorClass::trivial(group, basis);
    for _ in 0..total {
        out.push(current.clone());
        for &(i, j, n) in &radices {
            current.exponents[i][j] += 1;
            if current.exponents[i][j] < n {
                break;
            }
            current.exponents[i][j] = 0;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Member,
    Nonmember,
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    TrivialClass,
    /// Each component is `±w^{d/2}` up to `d`-th powers, so local triviality
    /// at `p` depends on `p` modulo `modulus` only; every supported residue
    /// class was checked. `discriminants[i]` is the discriminant attached
    /// to `w` for component `i`.
    Periodic {
        modulus: u64,
        discriminants: Vec<i64>,
    },
    /// `f(p) ≠ 0`, `p ∉ S`, and the named component is not a `d`-th power mod `p`.
    Witness {
        prime: u64,
        component: usize,
    },
    /// No violation among supported primes up to the bound, and no proof.
    SearchExhausted {
        searched_up_to: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipCertificate {
    pub verdict: Verdict,
    pub evidence: Evidence,
}

/// Primes searched for local violations before giving up.
pub const MEMBERSHIP_SEARCH_BOUND: u64 = 100_000;
const PERIODIC_MODULUS_LIMIT: u64 = 10_000_000;

/// Decides whether `x_p = 1` at every prime `p ∉ S` with `f(p) ≠ 0`.
pub fn membership(
    x: &TensorClass,
    group: &FiniteAbelianGroup,
    f: &FrobenianFunction,
    basis: &SUnitBasis,
) -> MembershipCertificate {
    if x.is_trivial() {
        return MembershipCertificate { verdict: Verdict::Member, evidence: Evidence::TrivialClass };
    }
    if let Some((modulus, discriminants, holds)) = periodic_analysis(x, group, f, basis) {
        if holds {
            return MembershipCertificate {
                verdict: Verdict::Member,
                evidence: Evidence::Periodic { modulus, discriminants },
            };
        }
        // A failing residue class holds infinitely many primes; find one.
        if let Some(w) = find_violation(x, group, f, basis, u64::MAX) {
            return w;
        }
    }
    find_violation(x, group, f, basis, MEMBERSHIP_SEARCH_BOUND).unwrap_or(MembershipCertificate {
        verdict: Verdict::Unresolved,
        evidence: Evidence::SearchExhausted { searched_up_to: MEMBERSHIP_SEARCH_BOUND },
    })
}

fn supported(f: &FrobenianFunction, basis: &SUnitBasis, p: u64) -> bool {
    !basis.contains(p) && !f.is_exceptional(p) && !f.class_value(p).is_zero()
}

fn find_violation(
    x: &TensorClass,
    group: &FiniteAbelianGroup,
    f: &FrobenianFunction,
    basis: &SUnitBasis,
    bound: u64,
) -> Option<MembershipCertificate> {
    let gens = basis.generators();
    (3..=bound).step_by(2).filter(|&p| is_prime(p) && supported(f, basis, p)).find_map(|p| {
        group.invariant_factors().iter().enumerate().find_map(|(i, &d)| {
            (!is_power_residue(x.component_residue(i, &gens, p), d, p)).then_some(MembershipCertificate {
                verdict: Verdict::Nonmember,
                evidence: Evidence::Witness { prime: p, component: i },
            })
        })
    })
}

/// For classes whose components are `ε·w^{d/2}`: the period, attached
/// discriminants, and whether local triviality holds on every supported
/// residue class. `None` when some component has larger order.
fn periodic_analysis(
    x: &TensorClass,
    group: &FiniteAbelianGroup,
    f: &FrobenianFunction,
    basis: &SUnitBasis,
) -> Option<(u64, Vec<i64>, bool)> {
    let mut modulus = f.period();
    // Per component: (d, sign exponent, discriminant of w).
    let mut shapes = Vec::new();
    for (row, &d) in x.exponents.iter().zip(group.invariant_factors()) {
        if d % 2 == 1 {
            if row.iter().any(|&k| k != 0) {
                return None;
            }
            shapes.push((d, false, 1i64));
            continue;
        }
        let t = d / 2;
        let mut w: i64 = 1;
        for (&p, &k) in basis.primes.iter().zip(&row[1..]) {
            if k % t != 0 {
                return None;
            }
            if (k / t) % 2 == 1 {
                w = w.checked_mul(p as i64)?;
            }
        }
        let disc = if w.rem_euclid(4) == 1 { w } else { w.checked_mul(4)? };
        modulus = lcm(modulus, lcm(2 * d, disc.unsigned_abs()));
        shapes.push((d, row[0] == 1, disc));
    }
    if modulus > PERIODIC_MODULUS_LIMIT {
        return None;
    }
    let holds = (1..modulus).filter(|&a| gcd(a, modulus) == 1 && !f.class_value(a).is_zero()).all(|a| {
        shapes.iter().all(|&(d, negative, disc)| {
            // With p ≡ a: c = gcd(d, p-1); -1 = g^{(p-1)/2}; w = g^k with k odd iff (disc|p) = -1.
            let c = gcd(d, a - 1);
            let sign_part = if negative { ((a - 1) / 2) % c } else { 0 };
            let w_part = if kronecker(disc as i128, a as i128) == -1 { (d / 2) % c } else { 0 };
            (sign_part + w_part) % c == 0
        })
    });
    let discriminants = shapes.iter().map(|s| s.2).collect();
    Some((modulus, discriminants, holds))
}

/// Re-checks a certificate without reusing the decision procedure: witnesses
/// by a local character computation at the witness prime, periodic proofs by
/// confirming local triviality at every supported prime up to `check_bound`.
pub fn verify_certificate(
    x: &TensorClass,
    group: &FiniteAbelianGroup,
    f: &FrobenianFunction,
    basis: &SUnitBasis,
    cert: &MembershipCertificate,
    check_bound: u64,
) -> Result<bool> {
    let locally_trivial = |p: u64| -> Result<bool> {
        let spot = LocalSpot::for_group(Place::Prime(p), group);
        crate::local::is_locally_trivial(spot, group, &x.specialize(basis, group, spot))
    };
    match &cert.evidence {
        Evidence::TrivialClass => Ok(x.is_trivial()),
        Evidence::Witness { prime, .. } => {
            let p = *prime;
            Ok(is_prime(p) && supported(f, basis, p) && !f.eval_prime_power(p, 1).is_zero() && !locally_trivial(p)?)
        }
        Evidence::Periodic { .. } => {
            for p in (3..=check_bound).filter(|&p| is_prime(p) && supported(f, basis, p)) {
                if !locally_trivial(p)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Evidence::SearchExhausted { .. } => Ok(cert.verdict == Verdict::Unresolved),
    }
}

/// A truncated Euler product with a bound on the omitted primes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerProductValue {
    pub value: f64,
    pub prime_cutoff: u64,
    /// Bound on `|true value - value|`.
    pub tail_bound: f64,
    /// Product of the factors at the places of `S` and the real place.
    pub s_factor: f64,
}

/// Bound on `Σ_{p > P} p^{-s}`: the better of the integral over all
/// integers and the one using `π(t) < 1.25506 t / ln t`.
pub fn prime_tail_sum_bound(s: f64, cutoff: u64) -> f64 {
    let p = cutoff.max(2) as f64;
    let integers = p.powf(1.0 - s) / (s - 1.0);
    let primes = 1.25506 * s * p.powf(1.0 - s) / ((s - 1.0) * p.ln());
    integers.min(primes)
}

const PRIME_CHUNK: usize = 4096;

/// `f^(x; s)` as the product of the local transforms at `S ∪ {∞}` and the
/// tame factors at primes `p ≤ P` outside `S`.
pub fn global_ft(
    group: &FiniteAbelianGroup,
    f: &FrobenianFunction,
    x: &TensorClass,
    basis: &SUnitBasis,
    s: f64,
    prime_cutoff: u64,
    table: &FactorizationTable,
) -> Result<EulerProductValue> {
    if s.is_nan() || s <= 1.0 {
        return Err(Error::Domain(format!("the Euler product needs s > 1, got {s}")));
    }
    if prime_cutoff > table.bound() {
        return Err(Error::OutOfRange { value: prime_cutoff, bound: table.bound() });
    }
    let s_factor: f64 = s_place_transforms(group, f, x, basis, None)?.iter().map(|t| t.eval(s)).product();
    if s_factor == 0.0 {
        return Ok(EulerProductValue { value: 0.0, prime_cutoff, tail_bound: 0.0, s_factor });
    }
    let primes: Vec<u64> =
        table.primes_up_to(prime_cutoff).iter().map(|&p| p as u64).filter(|&p| !basis.contains(p)).collect();
    // Ordered reduction over fixed chunks keeps the result independent of
    // the thread count.
    let partials: Vec<(f64, bool, bool)> = primes
        .par_chunks(PRIME_CHUNK)
        .map(|chunk| {
            let mut log_sum = 0.0;
            let mut negative = false;
            let mut zero = false;
            for &p in chunk {
                let c = tame_coefficient(p, group, f, x.is_trivial_at(basis, group, p));
                let factor = 1.0 + to_f64(c) * (p as f64).powf(-s);
                if factor == 0.0 {
                    zero = true;
                } else {
                    negative ^= factor < 0.0;
                    log_sum += factor.abs().ln();
                }
            }
            (log_sum, negative, zero)
        })
        .collect();
    let mut log_sum = 0.0;
    let mut negative = false;
    for (l, neg, zero) in partials {
        if zero {
            return Ok(EulerProductValue { value: 0.0, prime_cutoff, tail_bound: 0.0, s_factor });
        }
        log_sum += l;
        negative ^= neg;
    }
    let value = s_factor * log_sum.exp() * if negative { -1.0 } else { 1.0 };
    let log_tail = tame_log_tail_bound(group, f, s, prime_cutoff)?;
    Ok(EulerProductValue { value, prime_cutoff, tail_bound: value.abs() * log_tail.exp_m1(), s_factor })
}

/// Bound on `|log ∏_{p > P} (1 + c_p p^{-s})|` with `|c_p| ≤ (|G| - 1)·H`.
fn tame_log_tail_bound(group: &FiniteAbelianGroup, f: &FrobenianFunction, s: f64, cutoff: u64) -> Result<f64> {
    let c = ((group.order() - 1).max(1) * f.growth_bound()) as f64;
    let y = c * (cutoff.max(2) as f64 + 1.0).powf(-s);
    if y >= 0.5 {
        return Err(Error::Domain(format!("prime cutoff {cutoff} too small for a tail bound at s = {s}")));
    }
    // |log(1 + z)| ≤ |z| / (1 - |z|).
    Ok(c * prime_tail_sum_bound(s, cutoff) / (1.0 - y))
}

/// Local transforms of `x` at the real place and each prime of `S`,
/// optionally restricted to whitelisted conductor exponents per prime.
pub fn s_place_transforms(
    group: &FiniteAbelianGroup,
    f: &FrobenianFunction,
    x: &TensorClass,
    basis: &SUnitBasis,
    allowed: Option<&std::collections::BTreeMap<u64, Vec<u32>>>,
) -> Result<Vec<LocalTransform>> {
    let mut out = Vec::with_capacity(basis.primes.len() + 1);
    let real = LocalSpot::for_group(Place::Real, group);
    out.push(local_ft_exact(real, group, f, &x.specialize(basis, group, real), None)?);
    for &p in &basis.primes {
        let spot = LocalSpot::for_group(Place::Prime(p), group);
        let restrict = allowed.and_then(|a| a.get(&p)).map(Vec::as_slice);
        out.push(local_ft_exact(spot, group, f, &x.specialize(basis, group, spot), restrict)?);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoissonReport {
    pub group: String,
    pub function: String,
    pub s: f64,
    pub conductor_bound: u64,
    pub prime_cutoff: u64,
    /// Partial sum over conductors up to the bound.
    pub lhs_partial: f64,
    /// Estimated contribution of conductors beyond the bound.
    pub lhs_tail_estimate: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub difference: f64,
    pub lhs_tolerance: f64,
    pub rhs_tolerance: f64,
    pub classes: usize,
    pub nonzero_classes: Vec<String>,
    pub passed: bool,
}

/// Fraction of the fitted tail estimate allowed as model error.
const TAIL_MODEL_UNCERTAINTY: f64 = 0.5;

/// Compares the conductor series `Σ_m |{χ : cond χ = m}| f(m) m^{-s}` over
/// all homomorphisms with `|G[2]|^{-1} Σ_x f^(x; s)` over `O_S^* ⊗ G^`.
pub fn poisson_check(
    group: &FiniteAbelianGroup,
    f: &FrobenianFunction,
    s: f64,
    conductor_bound: u64,
    prime_cutoff: u64,
    table: &FactorizationTable,
) -> Result<PoissonReport> {
    if s.is_nan() || s <= 1.0 {
        return Err(Error::Domain(format!("the Poisson identity is checked at s > 1, got {s}")));
    }
    let bound = conductor_bound.max(prime_cutoff);
    if bound > table.bound() {
        return Err(Error::OutOfRange { value: bound, bound: table.bound() });
    }

    let (lhs_partial, count) = conductor_series(group, f, s, conductor_bound, table);
    let varpi = varpi_mean(group, f, &Rationals)?.value;
    let lhs_tail_estimate = series_tail_estimate(count, conductor_bound, s, varpi.to_f64().unwrap_or(0.0));

    let basis = SUnitBasis::for_problem(group, f);
    let classes = s_unit_tensor_group(group, &basis);
    let mut rhs_sum = 0.0;
    let mut rhs_tolerance = 0.0;
    let mut nonzero_classes = Vec::new();
    for x in &classes {
        let v = global_ft(group, f, x, &basis, s, prime_cutoff, table)?;
        if v.value != 0.0 {
            nonzero_classes.push(x.label(&basis));
        }
        rhs_sum += v.value;
        rhs_tolerance += v.tail_bound;
    }
    let units = group.torsion_count(2) as f64;
    let rhs = rhs_sum / units;
    rhs_tolerance /= units;
    let lhs = lhs_partial + lhs_tail_estimate;
    let lhs_tolerance = TAIL_MODEL_UNCERTAINTY * lhs_tail_estimate.abs() + 1e-12 * lhs.abs();
    let difference = (lhs - rhs).abs();
    Ok(PoissonReport {
        group: group.to_string(),
        function: f.spec().to_string(),
        s,
        conductor_bound,
        prime_cutoff,
        lhs_partial,
        lhs_tail_estimate,
        lhs,
        rhs,
        difference,
        lhs_tolerance,
        rhs_tolerance,
        classes: classes.len(),
        nonzero_classes,
        passed: difference <= lhs_tolerance + rhs_tolerance,
    })
}

/// `(Σ_{m ≤ B} a_m m^{-s}, Σ_{m ≤ B} a_m)` where `a_m` counts all
/// homomorphisms of conductor exactly `m`, weighted by `f(m)`.
pub fn conductor_series(
    group: &FiniteAbelianGroup,
    f: &FrobenianFunction,
    s: f64,
    bound: u64,
    table: &FactorizationTable,
) -> (f64, f64) {
    // Surjectivity is not needed here; an empty Möbius support skips it.
    let support: Vec<(i64, FiniteAbelianGroup)> = Vec::new();
    let chunk = 1u64 << 14;
    let partials: Vec<(f64, f64)> = (0..bound.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let (mut series, mut count) = (0.0, 0.0);
            for m in (c * chunk + 1)..=((c + 1) * chunk).min(bound) {
                let factors = table.factor_unchecked(m);
                let weight = f.eval_factored(&factors);
                if weight.is_zero() {
                    continue;
                }
                let homs = exact_conductor_count_factored(m, &factors, group, &support).homs_all;
                if homs > 0 {
                    let a = homs as f64 * to_f64(weight);
                    series += a * (m as f64).powf(-s);
                    count += a;
                }
            }
            (series, count)
        })
        .collect();
    partials.into_iter().fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d))
}

/// `Σ_{m > B} a_m m^{-s}` for a counting function fitted as
/// `A(t) = K t (log t)^{ϖ-1}` through `A(B)`, by partial summation:
/// `-A(B) B^{-s} + s ∫_B^∞ A(t) t^{-s-1} dt`.
fn series_tail_estimate(count: f64, bound: u64, s: f64, varpi: f64) -> f64 {
    if count == 0.0 || bound < 3 {
        return 0.0;
    }
    let b = bound as f64;
    let beta = varpi - 1.0;
    let k = count / (b * b.ln().powf(beta));
    // With t = e^u the integral is ∫_{ln B}^∞ e^{(1-s)u} u^β du.
    let lo = b.ln();
    let hi = lo + 60.0 / (s - 1.0);
    let steps = 4000;
    let h = (hi - lo) / steps as f64;
    let g = |u: f64| ((1.0 - s) * u).exp() * u.powf(beta);
    let mut integral = g(lo) + g(hi);
    for i in 1..steps {
        integral += g(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    integral *= h / 3.0;
    s * k * integral - count * b.powf(-s)
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Member => "member",
            Verdict::Nonmember => "nonmember",
            Verdict::Unresolved => "unresolved",
        })
    }
}
