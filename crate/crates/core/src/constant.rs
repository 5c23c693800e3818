//! Leading constant of `N(B) ~ c · B (log B)^{ϖ-1}`.
//!
//! With `Res_{s=1} ζ = 1`,
//!
//! ```text
//! c = E · Σ_{x ∈ X} F_S(x) / (Γ(ϖ) · |G[2]|)
//! F_S(x) = f^_∞(x) · ∏_{p ∈ S} f^_p(x_p; 1) (1 - 1/p)^ϖ
//! E      = ∏_{p ∉ S} (1 - 1/p)^ϖ (1 + λ(p)/p)
//! ```
//!
//! where `λ(p) = (|G[gcd(e, p-1)]| - 1) f(p)` and `X` is the set of S-unit
//! classes that are locally trivial wherever `f(p) ≠ 0`.
//!
//! The product `E` converges only conditionally. Expanding `λ` in Dirichlet
//! characters mod `ℓ = lcm(e, q)`, `λ = Σ_χ c_χ χ` with `c_1 = ϖ`, gives
//! `E = ∏_{χ ≠ 1} L(1, χ)^{c_χ} · ∏_{p ∈ S} ∏_{χ ≠ 1} (1 - χ(p)/p)^{c_χ} · ∏_{p ∉ S} R(p)`
//! where each `R(p) = 1 + O(p^{-2})`. `L(1, χ)` comes from the digamma
//! function and the `R` product is truncated with an explicit bound.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, gamma};

use crate::arith::{gcd, lcm, trial_factor};
use crate::error::{Error, Result};
use crate::exponent::{varpi_mean, Rationals};
use crate::frobenian::{to_f64, FrobenianFunction};
use crate::global::{
    membership, prime_tail_sum_bound, s_place_transforms, MembershipCertificate, SUnitBasis, TensorClass, Verdict,
};
use crate::group::FiniteAbelianGroup;
use crate::local::{tame_coefficient, UnitsModPrimePower};
use crate::sieve::FactorizationTable;

/// Allowed conductor exponents at some primes of `S`; other places allow
/// every local character.
pub type LocalConditions = BTreeMap<u64, Vec<u32>>;

/// Parses `2:0+2,3:1` into `{2: [0, 2], 3: [1]}`.
pub fn parse_local_conditions(text: &str) -> Result<LocalConditions> {
    let mut out = LocalConditions::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || Error::Parse(format!("local condition `{part}` is not of the form p:n1+n2"));
        let (p, list) = part.split_once(':').ok_or_else(bad)?;
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let exps = list.split('+').map(|n| n.trim().parse::<u32>().map_err(|_| bad())).collect::<Result<Vec<_>>>()?;
        out.insert(p, exps);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassContribution {
    pub label: String,
    pub certificate: MembershipCertificate,
    /// `F_S(x)`; zero when some local transform vanishes.
    pub s_factor: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstantReport {
    pub group: String,
    pub function: String,
    #[serde(with = "crate::exact")]
    pub varpi: Rational64,
    pub c: f64,
    /// Bound on the truncation error in `c`.
    pub c_error: f64,
    /// `c` if every unresolved class were a member.
    pub c_with_unresolved: f64,
    pub euler_factor: f64,
    pub places: Vec<u64>,
    pub prime_cutoff: u64,
    /// Classes of `X` considered, with certificates.
    pub members: Vec<ClassContribution>,
    pub unresolved: Vec<ClassContribution>,
    pub nonmembers: Vec<ClassContribution>,
    /// Classes with a valuation part at some place of `S`; their local
    /// transform there vanishes, so they cannot contribute.
    pub classes_with_valuation: u64,
    /// Set when an unresolved class could change `c`.
    pub interval_flag: bool,
    /// `ϖ = 0`: the family is too thin for this shape of asymptotic and
    /// `1/Γ(0) = 0` makes `c` vanish.
    pub degenerate: bool,
}

/// Default truncation for the absolutely convergent part of `E`.
pub const DEFAULT_CONSTANT_PRIME_CUTOFF: u64 = 1_000_000;

pub fn leading_constant(
    group: &FiniteAbelianGroup,
    f: &FrobenianFunction,
    conditions: &LocalConditions,
    prime_cutoff: u64,
    table: &FactorizationTable,
) -> Result<ConstantReport> {
    if !f.is_non_negative() {
        return Err(Error::Domain("the leading constant needs a non-negative function".into()));
    }
    if prime_cutoff > table.bound() {
        return Err(Error::OutOfRange { value: prime_cutoff, bound: table.bound() });
    }
    let varpi = varpi_mean(group, f, &Rationals)?.value;
    let varpi_f = varpi.to_f64().expect("small rational");
    let basis = SUnitBasis::for_problem(group, f);
    if let Some(&p) = conditions.keys().find(|p| !basis.contains(**p)) {
        return Err(Error::Domain(format!("local condition at {p}, which is not a place of S {:?}", basis.primes)));
    }

    // Only classes without valuation at S can have nonzero F_S: those built
    // from -1 alone.
    let even: Vec<usize> =
        group.invariant_factors().iter().enumerate().filter(|(_, &d)| d % 2 == 0).map(|(i, _)| i).collect();
    let total_classes: u64 =
        group.invariant_factors().iter().map(|&d| gcd(2, d) * d.pow(basis.primes.len() as u32)).product();
    let candidates: Vec<TensorClass> = (0..1u64 << even.len())
        .map(|mask| {
            let mut x = TensorClass::trivial(group, &basis);
            for (bit, &i) in even.iter().enumerate() {
                x.exponents[i][0] = (mask >> bit) & 1;
            }
            x
        })
        .collect();

    let mut members = Vec::new();
    let mut unresolved = Vec::new();
    let mut nonmembers = Vec::new();
    for x in &candidates {
        let certificate = membership(x, group, f, &basis);
        let s_factor: f64 = s_place_transforms(group, f, x, &basis, Some(conditions))?
            .iter()
            .map(|t| {
                let local = t.eval(1.0);
                match t.spot.prime() {
                    Some(p) => local * (1.0 - 1.0 / p as f64).powf(varpi_f),
                    None => local,
                }
            })
            .product();
        let entry = ClassContribution { label: x.label(&basis), certificate, s_factor };
        match entry.certificate.verdict {
            Verdict::Member => members.push(entry),
            Verdict::Unresolved => unresolved.push(entry),
            Verdict::Nonmember => nonmembers.push(entry),
        }
    }

    let units = group.torsion_count(2) as f64;
    let base = ConstantReport {
        group: group.to_string(),
        function: f.spec().to_string(),
        varpi,
        c: 0.0,
        c_error: 0.0,
        c_with_unresolved: 0.0,
        euler_factor: f64::NAN,
        places: basis.primes.clone(),
        prime_cutoff,
        interval_flag: unresolved.iter().any(|u| u.s_factor != 0.0),
        members,
        unresolved,
        nonmembers,
        classes_with_valuation: total_classes - candidates.len() as u64,
        degenerate: varpi.is_zero(),
    };
    if varpi.is_zero() {
        return Ok(base);
    }

    let euler = euler_factor(group, f, &basis, varpi_f, prime_cutoff, table)?;
    let scale = euler.value / (gamma(varpi_f) * units);
    let member_sum: f64 = base.members.iter().map(|m| m.s_factor).sum();
    let unresolved_sum: f64 = base.unresolved.iter().map(|m| m.s_factor).sum();
    let c = scale * member_sum;
    Ok(ConstantReport {
        c,
        c_error: c.abs() * euler.log_error.exp_m1(),
        c_with_unresolved: scale * (member_sum + unresolved_sum),
        euler_factor: euler.value,
        ..base
    })
}

struct EulerFactor {
    value: f64,
    /// Bound on `|log E - log value|`.
    log_error: f64,
}

/// `E = ∏_{p ∉ S} (1 - 1/p)^ϖ (1 + λ(p)/p)` via the character expansion.
fn euler_factor(
    group: &FiniteAbelianGroup,
    f: &FrobenianFunction,
    basis: &SUnitBasis,
    varpi: f64,
    prime_cutoff: u64,
    table: &FactorizationTable,
) -> Result<EulerFactor> {
    let ell = lcm(group.exponent(), f.period());
    let chars = DirichletCharacters::new(ell)?;
    let lambda = |a: u64| to_f64(tame_coefficient_mod(a, group, f));
    let residues = chars.residues();
    let phi = residues.len() as f64;
    let lambda_max = residues.iter().map(|&a| lambda(a)).fold(0.0, f64::max);

    // c_χ = mean of λ · conj(χ); index 0 is the principal character.
    let mut coefficients: Vec<(usize, Complex64)> = Vec::new();
    for k in 1..chars.count() {
        let c: Complex64 = residues.iter().map(|&a| lambda(a) * chars.value(k, a).conj()).sum::<Complex64>() / phi;
        if c.norm() > 1e-14 {
            coefficients.push((k, c));
        }
    }

    let primes: Vec<u64> = table.primes_up_to(prime_cutoff).iter().map(|&p| p as u64).collect();
    let mut log_e = Complex64::zero();
    for &(k, c) in &coefficients {
        // Pick the branch of log L(1, χ) continuing the Euler product.
        let log_l = chars.l_one(k).ln();
        let partial: Complex64 = primes
            .iter()
            .filter(|&&p| !ell.is_multiple_of(p))
            .map(|&p| -(Complex64::new(1.0, 0.0) - chars.value(k, p) / p as f64).ln())
            .sum();
        let turns = ((partial - log_l).im / (2.0 * PI)).round();
        log_e += c * (log_l + Complex64::new(0.0, 2.0 * PI * turns));
        for &p in basis.primes.iter().filter(|&&p| !ell.is_multiple_of(p)) {
            log_e += c * (Complex64::new(1.0, 0.0) - chars.value(k, p) / p as f64).ln();
        }
    }
    let mut log_r = 0.0f64;
    for &p in primes.iter().filter(|&&p| !basis.contains(p)) {
        let pf = p as f64;
        let mut term = Complex64::new((1.0 + lambda(p % ell) / pf).ln() + varpi * (1.0 - 1.0 / pf).ln(), 0.0);
        for &(k, c) in &coefficients {
            term += c * (Complex64::new(1.0, 0.0) - chars.value(k, p) / pf).ln();
        }
        log_r += term.re;
    }
    if (prime_cutoff as f64) < 2.0 * lambda_max.max(1.0) {
        return Err(Error::Domain(format!("prime cutoff {prime_cutoff} is below twice the largest local weight")));
    }
    // Each log R(p) has vanishing first-order term; the second-order terms
    // are bounded by K/p² once |λ(p)/p| ≤ 1/2.
    let k_const = lambda_max * lambda_max + varpi * varpi + coefficients.iter().map(|(_, c)| c.norm()).sum::<f64>();
    let log_error = k_const * prime_tail_sum_bound(2.0, prime_cutoff);
    Ok(EulerFactor { value: (log_e.re + log_r).exp(), log_error })
}

/// `λ` at the residue class `a` mod `ℓ`.
fn tame_coefficient_mod(a: u64, group: &FiniteAbelianGroup, f: &FrobenianFunction) -> Rational64 {
    // tame_coefficient reads only p mod e and p mod q.
    let e = group.exponent();
    let representative = if a == 0 { lcm(e, f.period()) + 1 } else { a };
    tame_coefficient(representative, group, f, true)
}

/// All Dirichlet characters modulo `n`, indexed by exponent vectors over
/// generators of `(Z/n)^*` built from each prime-power factor.
pub struct DirichletCharacters {
    modulus: u64,
    /// Per prime power: (p^a, unit group).
    parts: Vec<(u64, UnitsModPrimePower)>,
    orders: Vec<u64>,
}

impl DirichletCharacters {
    pub fn new(modulus: u64) -> Result<Self> {
        let mut parts = Vec::new();
        let mut orders = Vec::new();
        for (p, a) in trial_factor(modulus) {
            let pa = p.pow(a);
            if pa == 2 {
                continue;
            }
            let units = UnitsModPrimePower::new(p, a)?;
            orders.extend(units.orders.iter().copied());
            parts.push((pa, units));
        }
        Ok(Self { modulus, parts, orders })
    }

    pub fn count(&self) -> usize {
        self.orders.iter().product::<u64>() as usize
    }

    pub fn residues(&self) -> Vec<u64> {
        (1..=self.modulus).filter(|&a| gcd(a, self.modulus) == 1).map(|a| a % self.modulus).collect()
    }

    /// `χ_k(a)`, zero when `gcd(a, n) > 1`.
    pub fn value(&self, k: usize, a: u64) -> Complex64 {
        if gcd(a, self.modulus) != 1 {
            return Complex64::zero();
        }
        let mut idx = k as u64;
        let mut phase = 0.0;
        let mut slot = 0;
        for (pa, units) in &self.parts {
            let log = units.log(a % pa).expect("unit");
            for &t in &log {
                let n = self.orders[slot];
                let kk = idx % n;
                idx /= n;
                phase += (kk * t % n) as f64 / n as f64;
                slot += 1;
            }
        }
        Complex64::from_polar(1.0, 2.0 * PI * phase)
    }

    /// `L(1, χ_k) = -(1/n) Σ_a χ_k(a) ψ(a/n)` for non-principal `χ_k`.
    pub fn l_one(&self, k: usize) -> Complex64 {
        let n = self.modulus as f64;
        -self
            .residues()
            .into_iter()
            .map(|a| {
                let a = if a == 0 { self.modulus } else { a };
                self.value(k, a) * digamma(a as f64 / n)
            })
            .sum::<Complex64>()
            / n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> FiniteAbelianGroup {
        s.parse().unwrap()
    }

    fn f(s: &str) -> FrobenianFunction {
        FrobenianFunction::builtin(&s.parse().unwrap()).unwrap()
    }

    #[test]
    fn l_values() {
        // L(1, χ_{-4}) = π/4; L(1, χ_{-3}) = π/(3√3).
        let four = DirichletCharacters::new(4).unwrap();
        assert_eq!(four.count(), 2);
        let k = (0..2).find(|&k| four.value(k, 3).re < 0.0).unwrap();
        assert!((four.l_one(k).re - PI / 4.0).abs() < 1e-13);
        let three = DirichletCharacters::new(3).unwrap();
        let k = (0..2).find(|&k| three.value(k, 2).re < 0.0).unwrap();
        assert!((three.l_one(k).re - PI / (3.0 * 3f64.sqrt())).abs() < 1e-13);
    }

    #[test]
    fn characters_are_orthogonal() {
        for n in [5u64, 8, 12, 15, 24, 40] {
            let chars = DirichletCharacters::new(n).unwrap();
            let res = chars.residues();
            assert_eq!(chars.count(), res.len());
            for j in 0..chars.count() {
                for k in 0..chars.count() {
                    let s: Complex64 = res.iter().map(|&a| chars.value(j, a) * chars.value(k, a).conj()).sum();
                    let expected = if j == k { res.len() as f64 } else { 0.0 };
                    assert!((s - expected).norm() < 1e-9, "n={n} j={j} k={k}");
                }
            }
        }
    }

    #[test]
    fn quadratic_count_is_six_over_pi_squared() {
        let table = FactorizationTable::build(1_000_000).unwrap();
        let r = leading_constant(&g("2"), &f("one"), &LocalConditions::new(), 1_000_000, &table).unwrap();
        assert!((r.c - 6.0 / (PI * PI)).abs() < 1e-9 + r.c_error, "{r:?}");
        assert!(r.c_error < 1e-6);
        assert_eq!(r.members.len(), 1);
    }

    #[test]
    fn accelerated_product_matches_direct_truncation() {
        // Direct truncation at 10^6 agrees to within its slow drift.
        let table = FactorizationTable::build(1_000_000).unwrap();
        for (grp, func) in [("2", "sots"), ("3", "one"), ("4", "sots"), ("3", "congruence:1,3")] {
            let (grp, func) = (g(grp), f(func));
            let basis = SUnitBasis::for_problem(&grp, &func);
            let varpi = varpi_mean(&grp, &func, &Rationals).unwrap().value.to_f64().unwrap();
            let fast = euler_factor(&grp, &func, &basis, varpi, 1_000_000, &table).unwrap().value;
            let direct: f64 = table
                .primes()
                .filter(|p| !basis.contains(*p))
                .map(|p| {
                    let pf = p as f64;
                    varpi * (1.0 - 1.0 / pf).ln() + (1.0 + to_f64(tame_coefficient(p, &grp, &func, true)) / pf).ln()
                })
                .sum::<f64>()
                .exp();
            assert!((fast - direct).abs() < 2e-3 * fast, "{grp} {}: {fast} vs {direct}", func.spec());
        }
    }

    #[test]
    fn sots_quadratic_members() {
        let table = FactorizationTable::build(100_000).unwrap();
        let r = leading_constant(&g("2"), &f("sots"), &LocalConditions::new(), 100_000, &table).unwrap();
        let mut labels: Vec<&str> = r.members.iter().map(|m| m.label.as_str()).collect();
        labels.sort();
        assert_eq!(labels, vec!["-1", "1"]);
        assert!(r.c > 0.0 && !r.interval_flag);
    }

    #[test]
    fn cubic_congruence_family_vanishes() {
        let table = FactorizationTable::build(100_000).unwrap();
        let r = leading_constant(&g("3"), &f("congruence:2,3"), &LocalConditions::new(), 100_000, &table).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.c, 0.0);
    }

    #[test]
    fn local_conditions() {
        assert_eq!(parse_local_conditions("2:0+2, 3:1").unwrap(), BTreeMap::from([(2, vec![0, 2]), (3, vec![1])]));
        assert!(parse_local_conditions("2-0").is_err());
        let table = FactorizationTable::build(100_000).unwrap();
        // Only characters unramified at 2: the 2-factor becomes (1 - 1/2) · 1.
        let all = leading_constant(&g("2"), &f("one"), &LocalConditions::new(), 100_000, &table).unwrap();
        let unram =
            leading_constant(&g("2"), &f("one"), &parse_local_conditions("2:0").unwrap(), 100_000, &table).unwrap();
        assert!((unram.c / all.c - 1.0 / 1.5).abs() < 1e-12);
        assert!(leading_constant(&g("2"), &f("one"), &parse_local_conditions("7:0").unwrap(), 100_000, &table).is_err());
    }
}
