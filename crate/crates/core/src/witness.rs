//! Smallest conductors carrying a `G`-extension with a prescribed property
//! of the ramified primes, with an explicit surjection as proof.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, lcm, mul_mod, pow_mod};
use crate::error::{Error, Result};
use crate::frobenian::{is_sum_of_two_squares, FrobenianFunction, FunctionSpec};
use crate::group::{Element, FiniteAbelianGroup};
use crate::lattice::moebius_support;
use crate::local::UnitsModPrimePower;
use crate::sieve::FactorizationTable;
use crate::units::exact_conductor_count_factored;

/// A surjection `(Z/m)^* -> G` of conductor exactly `m`, given by the
/// images of generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub m: u64,
    /// Number of surjections of conductor exactly `m`.
    pub multiplicity: u64,
    /// Generators of `(Z/m)^*` as residues mod `m`, with their orders.
    pub generators: Vec<u64>,
    pub generator_orders: Vec<u64>,
    pub images: Vec<Element>,
    /// `m = a² + b²` when the search asked for sums of two squares.
    pub two_squares: Option<(u64, u64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessSearch {
    pub group: String,
    pub condition: String,
    pub bound: u64,
    pub witness: Option<Witness>,
    /// For cyclic `C_n`: the smallest prime `p ≡ 1 mod lcm(4, n)` up to the
    /// bound. `Q(ζ_p)` has a `C_n` subfield of conductor `p`, and `p` is a
    /// sum of two squares.
    pub cyclotomic_prime: Option<u64>,
}

/// Smallest `m ≤ bound` that is a sum of two squares and the conductor of a
/// `G`-extension.
pub fn find_witness_sots(group: &FiniteAbelianGroup, bound: u64, table: &FactorizationTable) -> Result<WitnessSearch> {
    let sots = FrobenianFunction::builtin(&FunctionSpec::SumOfTwoSquares)?;
    let mut search = find_witness(group, &sots, bound, table)?;
    if let Some(w) = search.witness.as_mut() {
        w.two_squares = two_squares(w.m);
    }
    if group.rank() <= 1 && !group.is_trivial() {
        let step = lcm(4, group.exponent());
        search.cyclotomic_prime = (1..).map(|k| k * step + 1).take_while(|&p| p <= bound).find(|&p| table.is_prime(p));
    }
    search.condition = "sum of two squares".into();
    Ok(search)
}

/// Smallest `m ≤ bound` that is the conductor of a `G`-extension whose
/// ramified primes all split completely in the field cut out by `spec`.
pub fn find_witness_split(
    group: &FiniteAbelianGroup,
    spec: &FunctionSpec,
    bound: u64,
    table: &FactorizationTable,
) -> Result<WitnessSearch> {
    if !matches!(spec, FunctionSpec::Split { .. }) {
        return Err(Error::InvalidFunction(spec.to_string(), "expected split:q,h1+h2+...".into()));
    }
    let f = FrobenianFunction::builtin(spec)?;
    let mut search = find_witness(group, &f, bound, table)?;
    search.condition = spec.to_string();
    Ok(search)
}

/// Smallest `m ≤ bound` with `f(m) ≠ 0` and a surjection of conductor `m`.
pub fn find_witness(
    group: &FiniteAbelianGroup,
    f: &FrobenianFunction,
    bound: u64,
    table: &FactorizationTable,
) -> Result<WitnessSearch> {
    if bound > table.bound() {
        return Err(Error::OutOfRange { value: bound, bound: table.bound() });
    }
    let support = moebius_support(group)?;
    let mut witness = None;
    for m in 1..=bound {
        let factors = table.factor_unchecked(m);
        if f.eval_factored(&factors) == 0.into() {
            continue;
        }
        let count = exact_conductor_count_factored(m, &factors, group, &support).homs_surjective;
        if count > 0 {
            witness = Some(explicit_surjection(m, &factors, group, count)?);
            break;
        }
    }
    Ok(WitnessSearch {
        group: group.to_string(),
        condition: f.spec().to_string(),
        bound,
        witness,
        cyclotomic_prime: None,
    })
}

fn two_squares(m: u64) -> Option<(u64, u64)> {
    (0..).take_while(|a| a * a <= m).find_map(|a| {
        let rest = m - a * a;
        let b = (rest as f64).sqrt().round() as u64;
        (b * b == rest && a <= b).then_some((a, b))
    })
}

/// Searches generator images for a surjective hom that is nontrivial on
/// the last ramification layer at every prime dividing `m`.
fn explicit_surjection(
    m: u64,
    factors: &[(u64, u32)],
    group: &FiniteAbelianGroup,
    multiplicity: u64,
) -> Result<Witness> {
    struct Part {
        offset: usize,
        /// Exponent vectors of generators of the last layer.
        top_layer: Vec<Vec<u64>>,
    }
    let mut parts = Vec::new();
    let mut generators = Vec::new();
    let mut generator_orders = Vec::new();
    for &(p, a) in factors {
        let units = UnitsModPrimePower::new(p, a)?;
        let pa = units.modulus;
        let rest = m / pa;
        for (&g, &n) in units.generators.iter().zip(&units.orders) {
            generators.push(crt(g, pa, 1, rest));
            generator_orders.push(n);
        }
        let top_layer = units.level_generators(a - 1).iter().map(|&u| units.log(u).expect("unit")).collect();
        parts.push(Part { offset: generators.len() - units.orders.len(), top_layer });
    }
    let choices: Vec<Vec<Element>> = generator_orders.iter().map(|&n| group.torsion_elements(n)).collect();
    let mut index = vec![0usize; choices.len()];
    loop {
        let images: Vec<Element> = index.iter().zip(&choices).map(|(&i, c)| c[i].clone()).collect();
        let primitive = parts.iter().all(|part| {
            part.top_layer.iter().any(|log| {
                let mut x = group.identity();
                for (k, &e) in log.iter().enumerate() {
                    x = group.add(&x, &group.scale(&images[part.offset + k], e));
                }
                x != group.identity()
            })
        });
        if primitive && generated_order(group, &images) == group.order() {
            return Ok(Witness { m, multiplicity, generators, generator_orders, images, two_squares: None });
        }
        // Next assignment in mixed radix.
        let mut k = 0;
        loop {
            if k == index.len() {
                return Err(Error::Domain(format!("no explicit surjection found at m = {m} despite a positive count")));
            }
            index[k] += 1;
            if index[k] < choices[k].len() {
                break;
            }
            index[k] = 0;
            k += 1;
        }
    }
}

fn crt(a: u64, m: u64, b: u64, n: u64) -> u64 {
    // x ≡ a mod m, x ≡ b mod n with gcd(m, n) = 1.
    (0..n).map(|k| a + k * m).find(|x| x % n == b % n).expect("coprime moduli") % (m * n).max(1)
}

fn generated_order(group: &FiniteAbelianGroup, gens: &[Element]) -> u64 {
    let mut seen: HashSet<Element> = HashSet::from([group.identity()]);
    let mut frontier = vec![group.identity()];
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y = group.add(&x, g);
            if seen.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    seen.len() as u64
}

/// Rebuilds the hom on all of `(Z/m)^*` by walking generator powers, and
/// checks that it is well defined, surjective and of conductor exactly `m`.
pub fn verify_witness(group: &FiniteAbelianGroup, w: &Witness) -> Result<()> {
    let m = w.m;
    let fail = |why: &str| Err(Error::Domain(format!("witness at m = {m}: {why}")));
    if m > 1 << 22 {
        return fail("modulus too large to verify by enumeration");
    }
    let units = (1..=m).filter(|&u| gcd(u, m) == 1).count() as u64;
    let mut table: HashMap<u64, Element> = HashMap::from([(1 % m, group.identity())]);
    for (i, (&g, img)) in w.generators.iter().zip(&w.images).enumerate() {
        let n = w.generator_orders[i];
        if pow_mod(g, n, m) != 1 % m || group.scale(img, n) != group.identity() {
            return fail("generator order mismatch");
        }
        let current: Vec<(u64, Element)> = table.iter().map(|(k, v)| (*k, v.clone())).collect();
        for (u, x) in current {
            let (mut v, mut y) = (u, x);
            for _ in 1..n {
                v = mul_mod(v, g, m);
                y = group.add(&y, img);
                match table.get(&v) {
                    Some(prev) if *prev != y => return fail("images are not a homomorphism"),
                    _ => {
                        table.insert(v, y.clone());
                    }
                }
            }
        }
    }
    if table.len() as u64 != units {
        return fail("generators do not generate the unit group");
    }
    let image: HashSet<&Element> = table.values().collect();
    if image.len() as u64 != group.order() {
        return fail("not surjective");
    }
    for (p, _) in crate::arith::trial_factor(m) {
        let lower = m / p;
        let trivial_on_kernel =
            table.iter().all(|(&u, x)| u % lower.max(1) != 1 % lower.max(1) || *x == group.identity());
        if trivial_on_kernel {
            return fail("factors through a smaller modulus");
        }
    }
    if let Some((a, b)) = w.two_squares {
        if a * a + b * b != m || !is_sum_of_two_squares(m) {
            return fail("bad two-squares representation");
        }
    }
    Ok(())
}

/// Every prime dividing `m` lies in the residue subgroup of `spec`.
pub fn ramified_primes_split(m: u64, spec: &FunctionSpec) -> bool {
    match spec {
        FunctionSpec::Split { modulus, subgroup } => {
            crate::arith::trial_factor(m).iter().all(|&(p, _)| subgroup.contains(&(p % modulus)))
        }
        _ => false,
    }
}
