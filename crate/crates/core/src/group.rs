//! Finite abelian groups in invariant-factor form.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{divisors, gcd, mobius, trial_factor};
use crate::error::{Error, Result};

/// A finite abelian group `Z/d_1 x ... x Z/d_r` with `d_1 | d_2 | ... | d_r`
/// and every `d_i >= 2`. The empty chain is the trivial group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FiniteAbelianGroup {
    factors: Vec<u64>,
}

/// Group elements are coordinate vectors with `x[i]` taken mod `d_i`.
pub type Element = Vec<u64>;

impl FiniteAbelianGroup {
    pub fn trivial() -> Self {
        Self { factors: Vec::new() }
    }

    pub fn cyclic(n: u64) -> Self {
        Self::from_cyclic_orders(&[n])
    }

    /// Canonicalizes any product of cyclic groups into invariant factors.
    /// Orders of 0 are rejected by [`FromStr`]; here they are treated as 1.
    pub fn from_cyclic_orders(orders: &[u64]) -> Self {
        // prime -> exponents of the p-primary cyclic pieces
        let mut primary: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
        for &n in orders.iter().filter(|&&n| n > 1) {
            for (p, a) in trial_factor(n) {
                primary.entry(p).or_default().push(a);
            }
        }
        let rank = primary.values().map(Vec::len).max().unwrap_or(0);
        let mut factors = vec![1u64; rank];
        for (p, mut exps) in primary {
            exps.sort_unstable();
            // Largest powers go to the last invariant factor.
            let offset = rank - exps.len();
            for (i, a) in exps.into_iter().enumerate() {
                factors[offset + i] *= p.pow(a);
            }
        }
        Self { factors }
    }

    pub fn invariant_factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }

    pub fn exponent(&self) -> u64 {
        self.factors.last().copied().unwrap_or(1)
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    /// `|G[d]|`, the number of elements killed by `d`.
    pub fn torsion_count(&self, d: u64) -> u64 {
        assert!(d >= 1, "torsion index must be positive");
        self.factors.iter().map(|&di| gcd(di, d)).product()
    }

    /// Number of elements of order exactly `n`.
    pub fn elements_of_order(&self, n: u64) -> u64 {
        if !self.exponent().is_multiple_of(n) {
            return 0;
        }
        let total: i64 = divisors(n).into_iter().map(|d| mobius(n / d) * self.torsion_count(d) as i64).sum();
        total as u64
    }

    /// Exact count of elements per element order.
    pub fn order_census(&self) -> OrderCensus {
        let counts = divisors(self.exponent())
            .into_iter()
            .map(|n| (n, self.elements_of_order(n)))
            .filter(|&(_, c)| c > 0)
            .collect();
        OrderCensus { counts }
    }

    /// Order of the automorphism group, from the p-primary invariants.
    pub fn aut_count(&self) -> u128 {
        let mut primary: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
        for &d in &self.factors {
            for (p, a) in trial_factor(d) {
                primary.entry(p).or_default().push(a);
            }
        }
        primary
            .into_iter()
            .map(|(p, mut exps)| {
                exps.sort_unstable();
                p_group_aut_count(p as u128, &exps)
            })
            .product()
    }

    // --- element arithmetic -------------------------------------------------

    pub fn identity(&self) -> Element {
        vec![0; self.rank()]
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Element {
        a.iter().zip(b).zip(&self.factors).map(|((x, y), d)| (x + y) % d).collect()
    }

    pub fn scale(&self, a: &[u64], k: u64) -> Element {
        a.iter().zip(&self.factors).map(|(x, d)| ((*x as u128 * k as u128) % *d as u128) as u64).collect()
    }

    pub fn neg(&self, a: &[u64]) -> Element {
        a.iter().zip(&self.factors).map(|(x, d)| (d - x) % d).collect()
    }

    pub fn element_order(&self, a: &[u64]) -> u64 {
        a.iter().zip(&self.factors).map(|(x, d)| d / gcd(*x, *d)).fold(1, crate::arith::lcm)
    }

    /// Mixed-radix index of an element, in `0..order()`.
    pub fn index_of(&self, a: &[u64]) -> usize {
        let mut idx = 0usize;
        for (x, d) in a.iter().zip(&self.factors).rev() {
            idx = idx * *d as usize + *x as usize;
        }
        idx
    }

    pub fn element_at(&self, mut idx: usize) -> Element {
        self.factors
            .iter()
            .map(|&d| {
                let x = idx % d as usize;
                idx /= d as usize;
                x as u64
            })
            .collect()
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.order() as usize).map(move |i| self.element_at(i))
    }

    /// All elements killed by `n`, i.e. the possible images of a generator
    /// of order `n`.
    pub fn torsion_elements(&self, n: u64) -> Vec<Element> {
        // G[n] = prod Z/d_i [gcd(d_i, n)], generated coordinatewise by d_i / g.
        let steps: Vec<(u64, u64)> = self
            .factors
            .iter()
            .map(|&d| {
                let g = gcd(d, n);
                (d / g, g)
            })
            .collect();
        let mut out = vec![self.identity()];
        for (i, &(step, count)) in steps.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * count as usize);
            for e in &out {
                for k in 0..count {
                    let mut x = e.clone();
                    x[i] = step * k;
                    next.push(x);
                }
            }
            out = next;
        }
        out
    }
}

/// Hillar–Rhea count of automorphisms of `prod Z/p^{e_i}` (exponents ascending).
fn p_group_aut_count(p: u128, exps: &[u32]) -> u128 {
    let r = exps.len();
    let mut total: u128 = 1;
    for k in 0..r {
        let e_k = exps[k];
        // d_k: largest (1-based) index l with e_l = e_k; c_k: smallest.
        let d_k = exps.iter().rposition(|&e| e == e_k).unwrap() + 1;
        let c_k = exps.iter().position(|&e| e == e_k).unwrap() + 1;
        total *= p.pow(d_k as u32) - p.pow(k as u32);
        total *= p.pow(e_k).pow((r - d_k) as u32);
        total *= p.pow(e_k - 1).pow((r - c_k + 1) as u32);
    }
    total
}

/// Hom count `|Hom(prod Z/n_i, G)| = prod |G[n_i]|`.
pub fn hom_count(domain: &[u64], group: &FiniteAbelianGroup) -> u64 {
    domain.iter().map(|&n| group.torsion_count(n)).product()
}

/// Element-order census of a group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderCensus {
    pub counts: BTreeMap<u64, u64>,
}

impl OrderCensus {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.factors.iter().rev().map(u64::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for FiniteAbelianGroup {
    type Err = Error;

    /// Comma-separated cyclic orders in any order, e.g. `"4,2"` or `"2,4"`.
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('[').trim_end_matches(']');
        if trimmed.is_empty() {
            return Ok(Self::trivial());
        }
        let mut orders = Vec::new();
        for part in trimmed.split(',') {
            let n: u64 = part
                .trim()
                .parse()
                .map_err(|_| Error::InvalidGroup(s.to_string(), format!("`{part}` is not a positive integer")))?;
            if n == 0 {
                return Err(Error::InvalidGroup(s.to_string(), "cyclic order 0".into()));
            }
            orders.push(n);
        }
        Ok(Self::from_cyclic_orders(&orders))
    }
}

impl TryFrom<String> for FiniteAbelianGroup {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FiniteAbelianGroup> for String {
    fn from(g: FiniteAbelianGroup) -> String {
        g.to_string()
    }
}

/// Every finite abelian group of order at most `max_order`, smallest first.
pub fn groups_up_to(max_order: u64) -> Vec<FiniteAbelianGroup> {
    fn extend(chain: &mut Vec<u64>, product: u64, max: u64, out: &mut Vec<FiniteAbelianGroup>) {
        out.push(FiniteAbelianGroup::from_cyclic_orders(chain));
        // Build chains top-down: each new factor divides the previous one.
        let last = chain.last().copied();
        for d in 2..=max / product {
            if let Some(prev) = last {
                if prev % d != 0 {
                    continue;
                }
            }
            chain.push(d);
            extend(chain, product * d, max, out);
            chain.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), 1, max_order, &mut out);
    out.sort_by_key(|g| (g.order(), g.rank()));
    out.dedup();
    out
}
