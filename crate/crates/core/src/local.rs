//! Characters `Q_v^* -> G`, their conductor exponents, the pairing with
//! `Q_v^* ⊗ G^`, and local Fourier transforms.
//!
//! At a prime `p`, `Q_p^* = p^Z × Z_p^*`, and every homomorphism from `Z_p^*`
//! to `G` factors through `(Z/p^M)^*` for the truncation level `M` of the
//! spot. At the real place only the sign survives.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, pow_mod, primitive_root, valuation};
use crate::brauer::Place;
use crate::error::{Error, Result};
use crate::frobenian::{to_f64, FrobenianFunction};
use crate::group::{Element, FiniteAbelianGroup};

/// Largest `p^M` for which unit groups are tabulated.
pub const MAX_LOCAL_MODULUS: u64 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LocalSpot {
    pub place: Place,
    pub level: u32,
}

impl LocalSpot {
    /// The spot at `place` with the level that captures every character
    /// into a group of exponent `e`.
    pub fn for_group(place: Place, group: &FiniteAbelianGroup) -> Self {
        let e = group.exponent();
        let level = match place {
            Place::Real => 0,
            Place::Prime(2) => valuation(e, 2) + 2,
            Place::Prime(p) => valuation(e, p) + 1,
        };
        Self { place, level }
    }

    pub fn prime(&self) -> Option<u64> {
        match self.place {
            Place::Prime(p) => Some(p),
            Place::Real => None,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.prime().map_or(1, |p| p.pow(self.level))
    }
}

/// `(Z/p^M)^*` with chosen generators and a discrete-log table.
#[derive(Clone, Debug)]
pub struct UnitsModPrimePower {
    pub p: u64,
    pub level: u32,
    pub modulus: u64,
    pub generators: Vec<u64>,
    pub orders: Vec<u64>,
    /// Residue -> mixed-radix index of its exponent vector, `u32::MAX` at
    /// non-units.
    dlog: Vec<u32>,
    /// Generators of `U_j = {u ≡ 1 mod p^j}` modulo `p^M`, for `j = 0..=M`.
    level_generators: Vec<Vec<u64>>,
}

impl UnitsModPrimePower {
    pub fn new(p: u64, level: u32) -> Result<Self> {
        let modulus = p
            .checked_pow(level)
            .filter(|&m| m <= MAX_LOCAL_MODULUS)
            .ok_or_else(|| Error::Resource(format!("unit group modulo {p}^{level} is too large to tabulate")))?;
        let (generators, orders) = if modulus <= 2 {
            (vec![], vec![])
        } else if p == 2 {
            if level == 2 {
                (vec![3], vec![2])
            } else {
                (vec![modulus - 1, 5], vec![2, modulus / 4])
            }
        } else {
            let mut g = primitive_root(p);
            if level >= 2 && pow_mod(g, p - 1, p * p) == 1 {
                g += p;
            }
            (vec![g], vec![modulus / p * (p - 1)])
        };

        let mut dlog = vec![u32::MAX; modulus as usize];
        let total: u64 = orders.iter().product();
        // Walk exponent vectors in mixed radix, first generator fastest.
        let mut exps = vec![0u64; orders.len()];
        for idx in 0..total {
            let mut r = 1 % modulus;
            for (g, &k) in generators.iter().zip(&exps) {
                r = r * pow_mod(*g, k, modulus) % modulus;
            }
            dlog[r as usize] = idx as u32;
            for (k, &n) in exps.iter_mut().zip(&orders) {
                *k += 1;
                if *k < n {
                    break;
                }
                *k = 0;
            }
        }

        let mut level_generators = Vec::with_capacity(level as usize + 1);
        for j in 0..=level {
            let gens = if p == 2 {
                match j {
                    0 | 1 => generators.clone(),
                    _ if level <= 2 => vec![],
                    _ => vec![pow_mod(5, 1 << (j - 2), modulus)],
                }
            } else if j == 0 {
                generators.clone()
            } else if generators.is_empty() {
                vec![]
            } else {
                vec![pow_mod(generators[0], (p - 1) * p.pow(j - 1), modulus)]
            };
            level_generators.push(gens);
        }
        Ok(Self { p, level, modulus, generators, orders, dlog, level_generators })
    }

    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    /// Exponent vector of the unit `u` in terms of the generators.
    pub fn log(&self, u: u64) -> Option<Vec<u64>> {
        let idx = self.dlog[(u % self.modulus) as usize];
        if idx == u32::MAX {
            return None;
        }
        let mut idx = idx as u64;
        Some(
            self.orders
                .iter()
                .map(|&n| {
                    let k = idx % n;
                    idx /= n;
                    k
                })
                .collect(),
        )
    }

    pub fn level_generators(&self, j: u32) -> &[u64] {
        &self.level_generators[j as usize]
    }
}

/// An element of `Hom(Q_v^*, G)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalCharacter {
    pub spot: LocalSpot,
    /// Images of the unit generators (of `(Z/p^M)^*`, or of `-1` at the real
    /// place).
    pub unit_images: Vec<Element>,
    /// Image of `p`; the identity at the real place.
    pub uniformizer_image: Element,
    pub conductor_exponent: u32,
}

impl LocalCharacter {
    /// Norm of the conductor, `p^n`; always 1 at the real place.
    pub fn conductor_norm(&self) -> u64 {
        self.spot.prime().map_or(1, |p| p.pow(self.conductor_exponent))
    }

    fn image_of_log(&self, group: &FiniteAbelianGroup, log: &[u64]) -> Element {
        let mut acc = group.identity();
        for (img, &k) in self.unit_images.iter().zip(log) {
            acc = group.add(&acc, &group.scale(img, k));
        }
        acc
    }
}

/// Unit-part characters at a spot, memoized per `(spot, G)`.
#[derive(Debug)]
pub struct LocalCharacterTable {
    pub spot: LocalSpot,
    pub group: FiniteAbelianGroup,
    pub units: Option<UnitsModPrimePower>,
    /// Characters with trivial uniformizer image.
    pub unit_characters: Vec<LocalCharacter>,
}

impl LocalCharacterTable {
    fn build(spot: LocalSpot, group: &FiniteAbelianGroup) -> Result<Self> {
        let (units, gen_orders) = match spot.prime() {
            Some(p) => {
                let u = UnitsModPrimePower::new(p, spot.level)?;
                let orders = u.orders.clone();
                (Some(u), orders)
            }
            None => (None, vec![2]),
        };
        let choices: Vec<Vec<Element>> = gen_orders.iter().map(|&n| group.torsion_elements(n)).collect();
        let total: usize = choices.iter().map(Vec::len).product();
        if total > 1 << 22 {
            return Err(Error::Resource(format!("{total} local characters at {spot:?} is too many to enumerate")));
        }
        let mut unit_characters = Vec::with_capacity(total);
        let mut pick = vec![0usize; choices.len()];
        for _ in 0..total {
            let unit_images: Vec<Element> = pick.iter().zip(&choices).map(|(&i, c)| c[i].clone()).collect();
            let mut chi =
                LocalCharacter { spot, unit_images, uniformizer_image: group.identity(), conductor_exponent: 0 };
            if let Some(u) = &units {
                chi.conductor_exponent = conductor_exponent(&chi, u, group);
            }
            unit_characters.push(chi);
            for (i, c) in pick.iter_mut().zip(&choices) {
                *i += 1;
                if *i < c.len() {
                    break;
                }
                *i = 0;
            }
        }
        Ok(Self { spot, group: group.clone(), units, unit_characters })
    }

    /// `χ(u)` for a unit residue `u` mod `p^M`.
    pub fn eval_unit(&self, chi: &LocalCharacter, u: u64) -> Element {
        let units = self.units.as_ref().expect("finite spot");
        let log = units.log(u).expect("argument must be a unit");
        chi.image_of_log(&self.group, &log)
    }
}

fn conductor_exponent(chi: &LocalCharacter, units: &UnitsModPrimePower, group: &FiniteAbelianGroup) -> u32 {
    let id = group.identity();
    (0..=units.level)
        .find(|&j| {
            units.level_generators(j).iter().all(|&u| chi.image_of_log(group, &units.log(u).expect("unit")) == id)
        })
        .expect("every character is trivial at the truncation level")
}

type TableCache = Mutex<HashMap<(LocalSpot, FiniteAbelianGroup), Arc<LocalCharacterTable>>>;

fn cache() -> &'static TableCache {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

pub fn local_character_table(spot: LocalSpot, group: &FiniteAbelianGroup) -> Result<Arc<LocalCharacterTable>> {
    let key = (spot, group.clone());
    if let Some(t) = cache().lock().expect("cache poisoned").get(&key) {
        return Ok(Arc::clone(t));
    }
    let table = Arc::new(LocalCharacterTable::build(spot, group)?);
    cache().lock().expect("cache poisoned").entry(key).or_insert_with(|| Arc::clone(&table));
    Ok(table)
}

/// Every element of `Hom(Q_v^*, G)`: unit parts times all uniformizer images
/// at a prime, or the `|G[2]|` sign characters at the real place.
pub fn enumerate_local_characters(spot: LocalSpot, group: &FiniteAbelianGroup) -> Result<Vec<LocalCharacter>> {
    let table = local_character_table(spot, group)?;
    if spot.prime().is_none() {
        return Ok(table.unit_characters.clone());
    }
    let mut out = Vec::with_capacity(table.unit_characters.len() * group.order() as usize);
    for chi in &table.unit_characters {
        for g in group.elements() {
            out.push(LocalCharacter { uniformizer_image: g, ..chi.clone() });
        }
    }
    Ok(out)
}

/// One cyclic component of a class in `Q_v^* ⊗ G^`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocalComponent {
    /// Valuation modulo the component order (finite spots).
    pub valuation: u64,
    /// Unit residue modulo `p^M` (finite spots).
    pub unit: u64,
    /// Sign (real place).
    pub negative: bool,
}

/// A class in `Q_v^* ⊗ G^`, one entry per invariant factor of `G`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocalTensorClass {
    pub spot: LocalSpot,
    pub components: Vec<LocalComponent>,
}

impl LocalTensorClass {
    pub fn trivial(spot: LocalSpot, group: &FiniteAbelianGroup) -> Self {
        let unit = 1 % spot.modulus().max(2);
        Self { spot, components: vec![LocalComponent { valuation: 0, unit, negative: false }; group.rank()] }
    }

    pub fn has_valuation_part(&self) -> bool {
        self.components.iter().any(|c| c.valuation != 0)
    }

    /// Component-wise product.
    pub fn mul(&self, other: &Self, group: &FiniteAbelianGroup) -> Self {
        let m = self.spot.modulus().max(2);
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .zip(group.invariant_factors())
            .map(|((a, b), &d)| LocalComponent {
                valuation: (a.valuation + b.valuation) % d,
                unit: a.unit * b.unit % m,
                negative: a.negative ^ b.negative,
            })
            .collect();
        Self { spot: self.spot, components }
    }
}

/// `⟨χ, x⟩` as a phase in `[0, 1)`; the pairing value is `exp(2πi·phase)`.
pub fn pairing(table: &LocalCharacterTable, chi: &LocalCharacter, x: &LocalTensorClass) -> Rational64 {
    let group = &table.group;
    let mut phase = Rational64::zero();
    match chi.spot.prime() {
        None => {
            let sign_image = &chi.unit_images[0];
            for ((c, &d), &g) in x.components.iter().zip(group.invariant_factors()).zip(sign_image) {
                if c.negative {
                    phase += Rational64::new(g as i64, d as i64);
                }
            }
        }
        Some(_) => {
            for (i, (c, &d)) in x.components.iter().zip(group.invariant_factors()).enumerate() {
                let unit_image = table.eval_unit(chi, c.unit)[i];
                let total = (c.valuation * chi.uniformizer_image[i] + unit_image) % d;
                phase += Rational64::new(total as i64, d as i64);
            }
        }
    }
    phase - phase.floor()
}

/// `Σ_n c_n p^{-ns}` with exact coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalTransform {
    pub spot: LocalSpot,
    /// `coefficients[n]` multiplies `p^{-ns}`; a single entry at the real place.
    #[serde(with = "crate::exact::vec")]
    pub coefficients: Vec<Rational64>,
}

impl LocalTransform {
    pub fn eval(&self, s: f64) -> f64 {
        let p = self.spot.prime().unwrap_or(1) as f64;
        self.coefficients.iter().enumerate().map(|(n, c)| to_f64(*c) * p.powf(-(n as f64) * s)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(Zero::is_zero)
    }
}

/// Exact local transform at a spot, optionally restricted to characters
/// whose conductor exponent is whitelisted.
///
/// Characters of conductor exponent at most `n` form a subgroup, so the
/// pairing sums over it to its size or to zero; the exact-`n` layer is the
/// difference of two such sums. Summing over uniformizer images contributes
/// `|G|` when `x` has no valuation part and 0 otherwise, which cancels the
/// `1/|G|` normalization.
pub fn local_ft_exact(
    spot: LocalSpot,
    group: &FiniteAbelianGroup,
    f: &FrobenianFunction,
    x: &LocalTensorClass,
    allowed: Option<&[u32]>,
) -> Result<LocalTransform> {
    let table = local_character_table(spot, group)?;
    let Some(p) = spot.prime() else {
        let sum: i64 =
            table.unit_characters.iter().map(|chi| if pairing(&table, chi, x).is_zero() { 1 } else { -1 }).sum();
        // Sign characters pair with x by ±1 only.
        return Ok(LocalTransform { spot, coefficients: vec![Rational64::from_integer(sum)] });
    };
    let levels = spot.level as usize + 1;
    if x.has_valuation_part() {
        return Ok(LocalTransform { spot, coefficients: vec![Rational64::zero(); levels] });
    }
    let mut size = vec![0i64; levels];
    let mut orthogonal = vec![true; levels];
    for chi in &table.unit_characters {
        let n = chi.conductor_exponent as usize;
        let trivial = pairing(&table, chi, x).is_zero();
        for j in n..levels {
            size[j] += 1;
            orthogonal[j] &= trivial;
        }
    }
    let cumulative: Vec<i64> = (0..levels).map(|j| if orthogonal[j] { size[j] } else { 0 }).collect();
    let coefficients = (0..levels)
        .map(|n| {
            if allowed.is_some_and(|a| !a.contains(&(n as u32))) {
                return Rational64::zero();
            }
            let layer = cumulative[n] - if n > 0 { cumulative[n - 1] } else { 0 };
            f.eval_prime_power(p, n as u32) * layer
        })
        .collect();
    Ok(LocalTransform { spot, coefficients })
}

/// The transform as a literal average over all of `Hom(Q_v^*, G)` (counting
/// measure at the real place), evaluated in floating point.
pub fn local_ft_bruteforce(
    spot: LocalSpot,
    group: &FiniteAbelianGroup,
    f: &FrobenianFunction,
    x: &LocalTensorClass,
    s: f64,
) -> Result<f64> {
    let table = local_character_table(spot, group)?;
    let chars = enumerate_local_characters(spot, group)?;
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for chi in &chars {
        let weight = match spot.prime() {
            Some(p) => to_f64(f.eval_prime_power(p, chi.conductor_exponent)) * (chi.conductor_norm() as f64).powf(-s),
            None => 1.0,
        };
        let angle = 2.0 * std::f64::consts::PI * to_f64(pairing(&table, chi, x));
        re += weight * angle.cos();
        im += weight * angle.sin();
    }
    debug_assert!(im.abs() < 1e-9 * (1.0 + re.abs()), "imaginary part {im}");
    Ok(match spot.prime() {
        Some(_) => re / group.order() as f64,
        None => re,
    })
}

/// `1 + c·p^{-s}` at a tame prime outside the exceptional set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TameFactor {
    pub p: u64,
    #[serde(with = "crate::exact")]
    pub coefficient: Rational64,
}

impl TameFactor {
    pub fn eval(&self, s: f64) -> f64 {
        1.0 + to_f64(self.coefficient) * (self.p as f64).powf(-s)
    }
}

pub fn local_ft_tame(p: u64, group: &FiniteAbelianGroup, f: &FrobenianFunction, x_trivial: bool) -> Result<TameFactor> {
    if group.order().is_multiple_of(p) || f.is_exceptional(p) {
        return Err(Error::Domain(format!("{p} is not a tame place for this group and function")));
    }
    Ok(TameFactor { p, coefficient: tame_coefficient(p, group, f, x_trivial) })
}

pub(crate) fn tame_coefficient(
    p: u64,
    group: &FiniteAbelianGroup,
    f: &FrobenianFunction,
    x_trivial: bool,
) -> Rational64 {
    let fp = f.class_value(p);
    if x_trivial {
        fp * (group.torsion_count(gcd(group.exponent(), p - 1)) as i64 - 1)
    } else {
        -fp
    }
}

/// Checks `|Hom(C_{p-1}, G)| = |G[gcd(e, p-1)]|`, counting homomorphisms as
/// elements whose order divides `p - 1`.
pub fn hom_count_residue_identity(p: u64, group: &FiniteAbelianGroup) -> Result<bool> {
    if group.order().is_multiple_of(p) {
        return Err(Error::Domain(format!("{p} divides |G|")));
    }
    let by_elements = group.elements().filter(|g| (p - 1).is_multiple_of(group.element_order(g))).count() as u64;
    Ok(by_elements == group.torsion_count(gcd(group.exponent(), p - 1)))
}

/// Whether the character group pairs trivially with `x` everywhere, i.e.
/// `x` is the identity class.
pub fn is_locally_trivial(spot: LocalSpot, group: &FiniteAbelianGroup, x: &LocalTensorClass) -> Result<bool> {
    if x.has_valuation_part() {
        return Ok(false);
    }
    let table = local_character_table(spot, group)?;
    Ok(table.unit_characters.iter().all(|chi| pairing(&table, chi, x).is_zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::is_prime;
    use num_traits::One;

    fn g(s: &str) -> FiniteAbelianGroup {
        s.parse().unwrap()
    }

    fn f(s: &str) -> FrobenianFunction {
        FrobenianFunction::builtin(&s.parse().unwrap()).unwrap()
    }

    fn at(p: u64, grp: &FiniteAbelianGroup) -> LocalSpot {
        LocalSpot::for_group(Place::Prime(p), grp)
    }

    fn phi_multiset(spot: LocalSpot, grp: &FiniteAbelianGroup) -> Vec<u64> {
        let mut v: Vec<u64> =
            enumerate_local_characters(spot, grp).unwrap().iter().map(|c| c.conductor_norm()).collect();
        v.sort_unstable();
        v
    }

    /// Class of the unit `u` in every component.
    fn unit_class(spot: LocalSpot, grp: &FiniteAbelianGroup, u: u64) -> LocalTensorClass {
        let mut x = LocalTensorClass::trivial(spot, grp);
        for c in &mut x.components {
            c.unit = u % spot.modulus();
        }
        x
    }

    #[test]
    fn character_counts_and_conductors() {
        let c2 = g("2");
        assert_eq!(phi_multiset(at(2, &c2), &c2), vec![1, 1, 4, 4, 8, 8, 8, 8]);
        assert_eq!(phi_multiset(at(5, &c2), &c2), vec![1, 1, 5, 5]);
        assert_eq!(phi_multiset(LocalSpot::for_group(Place::Real, &c2), &c2), vec![1, 1]);
        for grp in ["2", "3", "4", "2,2", "6", "8", "4,2"].map(g) {
            for p in [2u64, 3, 5, 7, 13] {
                let spot = at(p, &grp);
                let units = UnitsModPrimePower::new(p, spot.level).unwrap();
                let expected = grp.order() * crate::group::hom_count(&units.orders, &grp);
                assert_eq!(enumerate_local_characters(spot, &grp).unwrap().len() as u64, expected);
            }
        }
    }

    #[test]
    fn conductor_exponent_by_brute_force() {
        for grp in ["2", "4", "2,2", "3", "8"].map(g) {
            for p in [2u64, 3, 5] {
                let spot = at(p, &grp);
                let table = local_character_table(spot, &grp).unwrap();
                let m = spot.modulus();
                for chi in &table.unit_characters {
                    let brute = (0..=spot.level)
                        .find(|&j| {
                            let pj = p.pow(j);
                            (1..m)
                                .filter(|u| u % p != 0 && (u - 1) % pj == 0)
                                .all(|u| table.eval_unit(chi, u) == grp.identity())
                        })
                        .unwrap();
                    assert_eq!(chi.conductor_exponent, brute, "G={grp} p={p}");
                }
            }
        }
    }

    #[test]
    fn truncation_level_is_enough() {
        for grp in ["2", "4", "2,2", "3", "6", "9"].map(g) {
            for p in [2u64, 3, 5, 7] {
                let spot = at(p, &grp);
                let deeper = LocalSpot { level: spot.level + 1, ..spot };
                let a = UnitsModPrimePower::new(p, spot.level).unwrap();
                let b = UnitsModPrimePower::new(p, deeper.level).unwrap();
                assert_eq!(
                    crate::group::hom_count(&a.orders, &grp),
                    crate::group::hom_count(&b.orders, &grp),
                    "G={grp} p={p}"
                );
                for func in ["one", "sots", "divisor"].map(f) {
                    for u in [1u64, 2, 3, 5, 7, 11].into_iter().filter(|u| u % p != 0) {
                        let x = unit_class(spot, &grp, u);
                        let y = unit_class(deeper, &grp, u);
                        let lo = local_ft_exact(spot, &grp, &func, &x, None).unwrap();
                        let hi = local_ft_exact(deeper, &grp, &func, &y, None).unwrap();
                        assert_eq!(&hi.coefficients[..lo.coefficients.len()], &lo.coefficients[..]);
                        assert!(hi.coefficients[lo.coefficients.len()..].iter().all(Zero::is_zero));
                    }
                }
            }
        }
    }

    #[test]
    fn brute_force_examples() {
        let c2 = g("2");
        let sots = f("sots");
        let spot2 = at(2, &c2);
        let one_class = LocalTensorClass::trivial(spot2, &c2);
        assert!((local_ft_bruteforce(spot2, &c2, &sots, &one_class, 1.0).unwrap() - 1.5).abs() < 1e-12);
        let real = LocalSpot::for_group(Place::Real, &c2);
        let mut minus_one = LocalTensorClass::trivial(real, &c2);
        minus_one.components[0].negative = true;
        assert_eq!(local_ft_bruteforce(real, &c2, &sots, &minus_one, 2.0).unwrap(), 0.0);
        let spot5 = at(5, &c2);
        let v = local_ft_bruteforce(spot5, &c2, &sots, &LocalTensorClass::trivial(spot5, &c2), 2.0).unwrap();
        assert!((v - 1.04).abs() < 1e-12);
    }

    #[test]
    fn tame_examples() {
        let c = |p, grp: &str, func: &str, triv| local_ft_tame(p, &g(grp), &f(func), triv).unwrap().coefficient;
        assert_eq!(c(5, "2", "sots", true), Rational64::one());
        assert_eq!(c(3, "2", "sots", true), Rational64::zero());
        assert_eq!(c(13, "3", "one", false), -Rational64::one());
        assert!(local_ft_tame(2, &g("2"), &f("one"), true).is_err());
        assert!(local_ft_tame(7, &g("2"), &f("congruence:1,7"), true).is_err());
    }

    #[test]
    fn pairing_examples() {
        let c4 = g("4");
        let spot = at(5, &c4);
        let table = local_character_table(spot, &c4).unwrap();
        let x = unit_class(spot, &c4, 2);
        let trivial_chi = &table.unit_characters[0];
        assert!(trivial_chi.unit_images.iter().all(|e| e == &c4.identity()));
        assert!(pairing(&table, trivial_chi, &x).is_zero());
        for chi in enumerate_local_characters(spot, &c4).unwrap() {
            if chi.conductor_exponent == 0 {
                assert!(pairing(&table, &chi, &x).is_zero());
            }
        }
        let real = LocalSpot::for_group(Place::Real, &g("2"));
        let rt = local_character_table(real, &g("2")).unwrap();
        let sign = rt.unit_characters.iter().find(|c| c.unit_images[0] != vec![0]).unwrap();
        let mut minus_one = LocalTensorClass::trivial(real, &g("2"));
        minus_one.components[0].negative = true;
        assert_eq!(pairing(&rt, sign, &minus_one), Rational64::new(1, 2));
    }

    #[test]
    fn pairing_is_bimultiplicative() {
        let grp = g("4,2");
        for p in [2u64, 3, 5] {
            let spot = at(p, &grp);
            let table = local_character_table(spot, &grp).unwrap();
            let chars = enumerate_local_characters(spot, &grp).unwrap();
            let mut x = unit_class(spot, &grp, 3 + (p == 3) as u64);
            x.components[0].valuation = 1;
            let y = unit_class(spot, &grp, 7);
            let xy = x.mul(&y, &grp);
            for chi in chars.iter().step_by(3) {
                let lhs = pairing(&table, chi, &xy);
                let rhs = pairing(&table, chi, &x) + pairing(&table, chi, &y);
                assert!((lhs - rhs).is_integer());
                for psi in chars.iter().step_by(7) {
                    let prod = LocalCharacter {
                        spot,
                        unit_images: chi.unit_images.iter().zip(&psi.unit_images).map(|(a, b)| grp.add(a, b)).collect(),
                        uniformizer_image: grp.add(&chi.uniformizer_image, &psi.uniformizer_image),
                        conductor_exponent: 0,
                    };
                    let lhs = pairing(&table, &prod, &x);
                    let rhs = pairing(&table, chi, &x) + pairing(&table, psi, &x);
                    assert!((lhs - rhs).is_integer());
                }
            }
        }
    }

    #[test]
    fn unramified_twists_keep_conductor_and_weight() {
        let grp = g("4");
        let sots = f("sots");
        for p in [2u64, 5, 13] {
            let spot = at(p, &grp);
            let table = local_character_table(spot, &grp).unwrap();
            for chi in enumerate_local_characters(spot, &grp).unwrap() {
                for h in grp.elements() {
                    let twisted =
                        LocalCharacter { uniformizer_image: grp.add(&chi.uniformizer_image, &h), ..chi.clone() };
                    let units = table.units.as_ref().unwrap();
                    assert_eq!(conductor_exponent(&twisted, units, &grp), chi.conductor_exponent);
                    assert_eq!(
                        sots.eval_prime_power(p, twisted.conductor_exponent),
                        sots.eval_prime_power(p, chi.conductor_exponent)
                    );
                }
            }
        }
    }

    #[test]
    fn tame_matches_brute_force() {
        let functions = ["one", "sots", "congruence:1,3", "split:4,1", "divisor"].map(f);
        for grp in ["2", "3", "4", "2,2", "6"].map(g) {
            for p in (2..=100u64).filter(|&p| is_prime(p) && grp.order() % p != 0) {
                let spot = at(p, &grp);
                for func in functions.iter().filter(|func| !func.is_exceptional(p)) {
                    for u in 1..p.min(12) {
                        let x = unit_class(spot, &grp, u);
                        let trivial = is_locally_trivial(spot, &grp, &x).unwrap();
                        let tame = local_ft_tame(p, &grp, func, trivial).unwrap();
                        let exact = local_ft_exact(spot, &grp, func, &x, None).unwrap();
                        assert_eq!(
                            &exact.coefficients[..2],
                            &[Rational64::one(), tame.coefficient],
                            "G={grp} p={p} u={u}"
                        );
                        assert!(exact.coefficients[2..].iter().all(Zero::is_zero));
                        for s in [1.0, 2.0] {
                            let b = local_ft_bruteforce(spot, &grp, func, &x, s).unwrap();
                            assert!((b - tame.eval(s)).abs() <= 1e-12 * b.abs().max(1.0));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn exact_matches_brute_force_at_wild_places() {
        for grp in ["2", "4", "2,2", "3", "6", "8"].map(g) {
            for p in [2u64, 3] {
                let spot = at(p, &grp);
                for func in ["one", "sots", "divisor"].map(f) {
                    for u in [1u64, 5, 7, 11, 13] {
                        let mut x = unit_class(spot, &grp, u);
                        for val in 0..2 {
                            x.components[0].valuation = val;
                            let exact = local_ft_exact(spot, &grp, &func, &x, None).unwrap();
                            for s in [1.0, 1.5, 2.0] {
                                let b = local_ft_bruteforce(spot, &grp, &func, &x, s).unwrap();
                                assert!((exact.eval(s) - b).abs() < 1e-12, "G={grp} p={p} u={u} v={val}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn positive_at_the_trivial_class() {
        for grp in ["2", "3", "4", "2,2", "6", "8", "4,2"].map(g) {
            for p in [2u64, 3, 5, 7] {
                let spot = at(p, &grp);
                for func in ["one", "sots", "congruence:2,3", "divisor"].map(f) {
                    let x = LocalTensorClass::trivial(spot, &grp);
                    for s in [1.0, 2.0, 3.0] {
                        assert!(local_ft_bruteforce(spot, &grp, &func, &x, s).unwrap() > 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn residue_field_hom_identity() {
        assert!(hom_count_residue_identity(13, &g("4")).unwrap());
        assert_eq!(g("4").torsion_count(gcd(4, 12)), 4);
        assert_eq!(g("4").torsion_count(gcd(4, 6)), 2);
        assert_eq!(g("5").torsion_count(gcd(5, 2)), 1);
        for p in (3..2000u64).filter(|&p| is_prime(p)) {
            for grp in ["2", "4", "2,2", "6", "3,3", "8"].map(g) {
                if grp.order() % p != 0 {
                    assert!(hom_count_residue_identity(p, &grp).unwrap());
                }
            }
        }
    }
}
