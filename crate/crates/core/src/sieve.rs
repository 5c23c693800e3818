//! Smallest-prime-factor table, built segment by segment.

use crate::error::{Error, Result};

/// Default memory budget for tables: 1 GiB.
pub const DEFAULT_MEMORY_BUDGET: u64 = 1 << 30;

const SEGMENT: usize = 1 << 18;

/// Smallest prime factor of every `n` in `2..=bound`.
#[derive(Clone, Debug)]
pub struct FactorizationTable {
    bound: u64,
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl FactorizationTable {
    pub fn build(bound: u64) -> Result<Self> {
        Self::with_budget(bound, DEFAULT_MEMORY_BUDGET)
    }

    pub fn with_budget(bound: u64, budget_bytes: u64) -> Result<Self> {
        if bound < 2 {
            return Err(Error::Domain(format!("sieve bound must be at least 2, got {bound}")));
        }
        if bound > u32::MAX as u64 {
            return Err(Error::Resource(format!("sieve bound {bound} exceeds 32-bit table entries")));
        }
        // spf array plus a generous allowance for the prime list.
        let needed = (bound + 1) * 4 + bound / 2;
        if needed > budget_bytes {
            return Err(Error::Resource(format!(
                "factorization table up to {bound} needs {needed} bytes, budget is {budget_bytes}"
            )));
        }
        let len = bound as usize + 1;
        let mut spf: Vec<u32> = Vec::new();
        spf.try_reserve_exact(len).map_err(|e| Error::Resource(format!("cannot allocate factorization table: {e}")))?;
        spf.resize(len, 0);

        // Base primes up to sqrt(bound) by a plain sieve.
        let root = (bound as f64).sqrt() as usize + 1;
        let mut base_composite = vec![false; root + 1];
        let mut base = Vec::new();
        for i in 2..=root {
            if !base_composite[i] {
                base.push(i as u64);
                let mut j = i * i;
                while j <= root {
                    base_composite[j] = true;
                    j += i;
                }
            }
        }

        let mut primes = Vec::new();
        let mut lo = 2usize;
        while lo < len {
            let hi = (lo + SEGMENT).min(len);
            let seg = &mut spf[lo..hi];
            for &p in &base {
                let p = p as usize;
                if p * p >= hi {
                    break;
                }
                let start = (lo.div_ceil(p) * p).max(p * p);
                let mut j = start;
                while j < hi {
                    if seg[j - lo] == 0 {
                        seg[j - lo] = p as u32;
                    }
                    j += p;
                }
            }
            for (i, slot) in seg.iter_mut().enumerate() {
                if *slot == 0 {
                    *slot = (lo + i) as u32;
                    primes.push((lo + i) as u32);
                }
            }
            lo = hi;
        }
        Ok(Self { bound, spf, primes })
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    fn check(&self, n: u64) -> Result<()> {
        if n == 0 || n > self.bound {
            Err(Error::OutOfRange { value: n, bound: self.bound })
        } else {
            Ok(())
        }
    }

    /// Smallest prime factor of `n >= 2`.
    pub fn spf(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.bound && self.spf(n) == n
    }

    /// Factorization of `n` as ascending `(prime, exponent)` pairs.
    pub fn factor(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        self.check(n)?;
        Ok(self.factor_unchecked(n))
    }

    pub(crate) fn factor_unchecked(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::with_capacity(8);
        while n > 1 {
            let p = self.spf(n);
            n /= p;
            match out.last_mut() {
                Some((q, a)) if *q == p => *a += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// Primes up to the bound, ascending.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes.iter().map(|&p| p as u64)
    }

    pub fn primes_up_to(&self, limit: u64) -> &[u32] {
        let end = self.primes.partition_point(|&p| (p as u64) <= limit);
        &self.primes[..end]
    }
}
