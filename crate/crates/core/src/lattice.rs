//! Subgroup lattices of small abelian groups and the Möbius inversion that
//! turns hom counts into surjection counts.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Arc, Mutex, OnceLock};

use crate::arith::trial_factor;
use crate::error::{Error, Result};
use crate::group::{hom_count, Element, FiniteAbelianGroup};

pub const DEFAULT_LATTICE_BOUND: u64 = 64;

/// A set of group elements, as a bitmask over element indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ElementSet {
    words: Vec<u64>,
}

impl ElementSet {
    fn empty(size: usize) -> Self {
        Self { words: vec![0; size.div_ceil(64)] }
    }

    fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_subset_of(&self, other: &ElementSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn intersection(&self, other: &ElementSet) -> ElementSet {
        ElementSet { words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect() }
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.words
            .iter()
            .enumerate()
            .flat_map(|(w, &bits)| (0..64).filter(move |b| bits >> b & 1 == 1).map(move |b| w * 64 + b))
    }
}

#[derive(Clone, Debug)]
pub struct Subgroup {
    pub elements: ElementSet,
    /// Isomorphism type of the subgroup.
    pub iso_type: FiniteAbelianGroup,
    pub generators: Vec<Element>,
    /// `μ(H, G)` in the subgroup lattice.
    pub moebius_to_top: i64,
}

impl Subgroup {
    pub fn order(&self) -> u64 {
        self.iso_type.order()
    }
}

#[derive(Clone, Debug)]
pub struct SubgroupLattice {
    ambient: FiniteAbelianGroup,
    /// Sorted by order, bottom first and the whole group last.
    subgroups: Vec<Subgroup>,
    index: HashMap<ElementSet, usize>,
}

impl SubgroupLattice {
    pub fn build(group: &FiniteAbelianGroup, bound: u64) -> Result<Self> {
        if group.order() > bound {
            return Err(Error::GroupTooLarge { order: group.order(), bound });
        }
        let n = group.order() as usize;

        // Subgroups of each p-primary part, then direct sums across primes.
        let mut combined: Vec<(ElementSet, Vec<Element>)> = vec![(singleton(group, n), Vec::new())];
        for (p, _) in trial_factor(group.order()) {
            let primary = primary_subgroups(group, p);
            let mut next = Vec::with_capacity(combined.len() * primary.len());
            for (a, gens_a) in &combined {
                for (b, gens_b) in &primary {
                    let mut set = ElementSet::empty(n);
                    for i in a.indices() {
                        let x = group.element_at(i);
                        for j in b.indices() {
                            set.insert(group.index_of(&group.add(&x, &group.element_at(j))));
                        }
                    }
                    let mut gens = gens_a.clone();
                    gens.extend(gens_b.iter().cloned());
                    next.push((set, gens));
                }
            }
            combined = next;
        }

        let mut subgroups: Vec<Subgroup> = combined
            .into_iter()
            .map(|(elements, generators)| Subgroup {
                iso_type: iso_type_of(group, &elements),
                elements,
                generators,
                moebius_to_top: 0,
            })
            .collect();
        subgroups.sort_by_key(|h| (h.order(), h.iso_type.clone()));

        // μ(G,G) = 1 and μ(H,G) = -Σ_{H < K <= G} μ(K,G), top-down.
        for i in (0..subgroups.len()).rev() {
            if i + 1 == subgroups.len() {
                subgroups[i].moebius_to_top = 1;
                continue;
            }
            let mut acc = 0;
            for k in i + 1..subgroups.len() {
                if subgroups[k].order() > subgroups[i].order()
                    && subgroups[i].elements.is_subset_of(&subgroups[k].elements)
                {
                    acc += subgroups[k].moebius_to_top;
                }
            }
            subgroups[i].moebius_to_top = -acc;
        }

        let index = subgroups.iter().enumerate().map(|(i, h)| (h.elements.clone(), i)).collect();
        Ok(Self { ambient: group.clone(), subgroups, index })
    }

    pub fn ambient(&self) -> &FiniteAbelianGroup {
        &self.ambient
    }

    pub fn subgroups(&self) -> &[Subgroup] {
        &self.subgroups
    }

    pub fn len(&self) -> usize {
        self.subgroups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subgroups.is_empty()
    }

    pub fn top(&self) -> usize {
        self.subgroups.len() - 1
    }

    pub fn bottom(&self) -> usize {
        0
    }

    /// Whether subgroup `a` is contained in subgroup `b`.
    pub fn is_contained(&self, a: usize, b: usize) -> bool {
        self.subgroups[a].elements.is_subset_of(&self.subgroups[b].elements)
    }

    /// Index of the intersection of two subgroups.
    pub fn meet(&self, a: usize, b: usize) -> usize {
        let set = self.subgroups[a].elements.intersection(&self.subgroups[b].elements);
        self.index[&set]
    }

    pub fn find(&self, elements: &ElementSet) -> Option<usize> {
        self.index.get(elements).copied()
    }
}

fn singleton(group: &FiniteAbelianGroup, n: usize) -> ElementSet {
    let mut s = ElementSet::empty(n);
    s.insert(group.index_of(&group.identity()));
    s
}

/// All subgroups of the `p`-primary component, by closing under one more
/// generator at a time.
fn primary_subgroups(group: &FiniteAbelianGroup, p: u64) -> Vec<(ElementSet, Vec<Element>)> {
    let n = group.order() as usize;
    let primary: Vec<Element> = group
        .elements()
        .filter(|x| {
            let mut o = group.element_order(x);
            while o.is_multiple_of(p) {
                o /= p;
            }
            o == 1
        })
        .collect();

    let bottom = singleton(group, n);
    let mut seen: HashSet<ElementSet> = HashSet::from([bottom.clone()]);
    let mut found = vec![(bottom.clone(), Vec::new())];
    let mut frontier = vec![(bottom, Vec::<Element>::new())];
    while let Some((set, gens)) = frontier.pop() {
        for g in &primary {
            if set.contains(group.index_of(g)) {
                continue;
            }
            let mut next = set.clone();
            let members: Vec<usize> = set.indices().collect();
            let mut multiple = g.clone();
            while !set.contains(group.index_of(&multiple)) {
                for &i in &members {
                    next.insert(group.index_of(&group.add(&group.element_at(i), &multiple)));
                }
                multiple = group.add(&multiple, g);
            }
            if seen.insert(next.clone()) {
                let mut next_gens = gens.clone();
                next_gens.push(g.clone());
                found.push((next.clone(), next_gens.clone()));
                frontier.push((next, next_gens));
            }
        }
    }
    found
}

/// Invariant factors of a subgroup, read off from its `p^k`-torsion counts.
fn iso_type_of(group: &FiniteAbelianGroup, set: &ElementSet) -> FiniteAbelianGroup {
    let members: Vec<Element> = set.indices().map(|i| group.element_at(i)).collect();
    let mut cyclic = Vec::new();
    for (p, _) in trial_factor(members.len() as u64) {
        // counts[k] = |H[p^k]|
        let mut counts = vec![1usize];
        let mut pk = 1u64;
        loop {
            pk *= p;
            let c = members.iter().filter(|x| group.scale(x, pk).iter().all(|&c| c == 0)).count();
            counts.push(c);
            if c == *counts.iter().rev().nth(1).unwrap() {
                break;
            }
        }
        // Number of cyclic factors of order >= p^k is log_p(counts[k]/counts[k-1]).
        let ge: Vec<u32> = counts.windows(2).map(|w| ((w[1] / w[0]) as f64).log(p as f64).round() as u32).collect();
        for k in 0..ge.len() {
            let exactly = ge[k] - ge.get(k + 1).copied().unwrap_or(0);
            for _ in 0..exactly {
                cyclic.push(p.pow(k as u32 + 1));
            }
        }
    }
    FiniteAbelianGroup::from_cyclic_orders(&cyclic)
}

fn lattice_cache() -> &'static Mutex<BTreeMap<FiniteAbelianGroup, Arc<SubgroupLattice>>> {
    static CACHE: OnceLock<Mutex<BTreeMap<FiniteAbelianGroup, Arc<SubgroupLattice>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(BTreeMap::new()))
}

/// Memoized subgroup lattice with the default size bound.
pub fn subgroup_lattice(group: &FiniteAbelianGroup) -> Result<Arc<SubgroupLattice>> {
    subgroup_lattice_bounded(group, DEFAULT_LATTICE_BOUND)
}

pub fn subgroup_lattice_bounded(group: &FiniteAbelianGroup, bound: u64) -> Result<Arc<SubgroupLattice>> {
    if group.order() > bound {
        return Err(Error::GroupTooLarge { order: group.order(), bound });
    }
    if let Some(hit) = lattice_cache().lock().unwrap().get(group) {
        return Ok(hit.clone());
    }
    let built = Arc::new(SubgroupLattice::build(group, bound)?);
    lattice_cache().lock().unwrap().entry(group.clone()).or_insert_with(|| built.clone());
    Ok(built)
}

/// The subgroups with nonzero Möbius value, as `(μ(H,G), H)` pairs. This is
/// all that surjection counting needs.
pub fn moebius_support(group: &FiniteAbelianGroup) -> Result<Vec<(i64, FiniteAbelianGroup)>> {
    Ok(subgroup_lattice(group)?
        .subgroups()
        .iter()
        .filter(|h| h.moebius_to_top != 0)
        .map(|h| (h.moebius_to_top, h.iso_type.clone()))
        .collect())
}

/// Number of surjective homomorphisms `prod Z/n_i -> G`.
pub fn surjection_count(domain: &[u64], group: &FiniteAbelianGroup) -> Result<u64> {
    let support = moebius_support(group)?;
    Ok(surjections_from_support(domain, &support))
}

pub(crate) fn surjections_from_support(domain: &[u64], support: &[(i64, FiniteAbelianGroup)]) -> u64 {
    let total: i128 = support.iter().map(|(mu, h)| *mu as i128 * hom_count(domain, h) as i128).sum();
    debug_assert!(total >= 0);
    total as u64
}
