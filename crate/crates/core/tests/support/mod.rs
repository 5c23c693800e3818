//! Independent oracles for integration tests. Nothing here calls into the
//! library's counting code.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut a = 0;
            while n.is_multiple_of(p) {
                n /= p;
                a += 1;
            }
            out.push((p, a));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn multiplicative_order(g: u64, m: u64) -> u64 {
    let (mut x, mut k) = (g % m, 1);
    while x != 1 {
        x = x * g % m;
        k += 1;
    }
    k
}

/// Cyclic generators of `(Z/p^a)^*` with a discrete-log table.
struct PrimePowerUnits {
    modulus: u64,
    gens: Vec<(u64, u64)>,
    dlog: HashMap<u64, Vec<u64>>,
}

impl PrimePowerUnits {
    fn new(p: u64, a: u32) -> Self {
        let modulus = p.pow(a);
        let phi = modulus / p * (p - 1);
        let gens: Vec<(u64, u64)> = if modulus == 2 {
            vec![]
        } else if p != 2 {
            let g = (2..modulus).find(|&g| gcd(g, p) == 1 && multiplicative_order(g, modulus) == phi).unwrap();
            vec![(g, phi)]
        } else if modulus == 4 {
            vec![(3, 2)]
        } else {
            vec![(modulus - 1, 2), (5, modulus / 4)]
        };
        let mut dlog = HashMap::from([(1 % modulus, vec![0; gens.len()])]);
        for (i, &(g, n)) in gens.iter().enumerate() {
            let snapshot: Vec<(u64, Vec<u64>)> = dlog.iter().map(|(k, v)| (*k, v.clone())).collect();
            for (u, e) in snapshot {
                let (mut v, mut e) = (u, e);
                for _ in 1..n {
                    v = v * g % modulus;
                    e[i] += 1;
                    dlog.insert(v, e.clone());
                }
            }
        }
        assert_eq!(dlog.len() as u64, phi.max(1));
        Self { modulus, gens, dlog }
    }
}

/// Surjections `(Z/m)^* -> G` of conductor exactly `m`, for `G` given by
/// its cyclic factors, counted by listing every hom.
pub struct BruteForceCensus {
    group: Vec<u64>,
    cache: HashMap<(u64, u32), PrimePowerUnits>,
}

impl BruteForceCensus {
    pub fn new(group: &[u64]) -> Self {
        Self { group: group.to_vec(), cache: HashMap::new() }
    }

    fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).zip(&self.group).map(|((x, y), d)| (x + y) % d).collect()
    }

    fn scale(&self, a: &[u64], k: u64) -> Vec<u64> {
        a.iter().zip(&self.group).map(|(x, d)| x * (k % d) % d).collect()
    }

    fn elements_killed_by(&self, n: u64) -> Vec<Vec<u64>> {
        let mut out = vec![vec![]];
        for &d in &self.group {
            out = out
                .into_iter()
                .flat_map(|e: Vec<u64>| {
                    (0..d).filter(move |x| (x * n).is_multiple_of(d)).map(move |x| [e.clone(), vec![x]].concat())
                })
                .collect();
        }
        out
    }

    fn generates(&self, images: &[Vec<u64>]) -> bool {
        let zero = vec![0; self.group.len()];
        let mut seen = HashSet::from([zero.clone()]);
        let mut stack = vec![zero];
        while let Some(x) = stack.pop() {
            for g in images {
                let y = self.add(&x, g);
                if seen.insert(y.clone()) {
                    stack.push(y);
                }
            }
        }
        seen.len() as u64 == self.group.iter().product::<u64>()
    }

    pub fn count(&mut self, m: u64) -> u64 {
        let factors = factor(m);
        for &f in &factors {
            self.cache.entry(f).or_insert_with(|| PrimePowerUnits::new(f.0, f.1));
        }
        let parts: Vec<&PrimePowerUnits> = factors.iter().map(|f| &self.cache[f]).collect();
        let orders: Vec<u64> = parts.iter().flat_map(|p| p.gens.iter().map(|g| g.1)).collect();
        let choices: Vec<Vec<Vec<u64>>> = orders.iter().map(|&n| self.elements_killed_by(n)).collect();
        // Residues generating the kernel of reduction to m/p, for each p | m.
        let kernels: Vec<Vec<u64>> = factors
            .iter()
            .map(|&(p, _)| {
                let step = m / p;
                (0..p).map(|k| (1 + k * step) % m).filter(|&u| gcd(u, m) == 1 && u != 1 % m).collect()
            })
            .collect();
        let eval = |images: &[Vec<u64>], u: u64| -> Vec<u64> {
            let mut acc = vec![0; self.group.len()];
            let mut slot = 0;
            for part in &parts {
                let log = &part.dlog[&(u % part.modulus)];
                for &e in log {
                    acc = self.add(&acc, &self.scale(&images[slot], e));
                    slot += 1;
                }
            }
            acc
        };
        let zero = vec![0; self.group.len()];
        let mut count = 0;
        let mut index = vec![0usize; choices.len()];
        'outer: loop {
            let images: Vec<Vec<u64>> = index.iter().zip(&choices).map(|(&i, c)| c[i].clone()).collect();
            let primitive = kernels.iter().all(|ker| ker.iter().any(|&u| eval(&images, u) != zero));
            if primitive && self.generates(&images) {
                count += 1;
            }
            let mut k = 0;
            loop {
                if k == index.len() {
                    break 'outer;
                }
                index[k] += 1;
                if index[k] < choices[k].len() {
                    break;
                }
                index[k] = 0;
                k += 1;
            }
        }
        count
    }
}

fn squarefree(n: u64) -> bool {
    factor(n).iter().all(|&(_, a)| a == 1)
}

/// Number of fundamental discriminants `D` with `|D| = n`.
pub fn fundamental_discriminants_of_size(n: u64) -> u64 {
    [n as i64, -(n as i64)].into_iter().filter(|&d| is_fundamental_discriminant(d)).count() as u64
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    let n = d.unsigned_abs();
    if d.rem_euclid(4) == 1 {
        d != 1 && squarefree(n)
    } else if d.rem_euclid(4) == 0 {
        let q = d / 4;
        matches!(q.rem_euclid(4), 2 | 3) && squarefree(q.unsigned_abs())
    } else {
        false
    }
}
