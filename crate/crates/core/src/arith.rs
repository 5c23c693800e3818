//! Small-integer number theory used throughout the crate.
//!
//! Everything here works by trial division or direct iteration. The sieve in
//! [`crate::sieve`] is the fast path for bulk factorization; these routines
//! serve one-off queries and double as independent cross-checks.

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Prime factorization by trial division, primes ascending.
pub fn trial_factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut a = 0;
            while n.is_multiple_of(p) {
                n /= p;
                a += 1;
            }
            out.push((p, a));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    trial_factor(n) == [(n, 1)]
}

pub fn euler_phi(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    trial_factor(n).into_iter().fold(1, |acc, (p, a)| acc * (p - 1) * p.pow(a - 1))
}

/// The Möbius function of `n >= 1`.
pub fn mobius(n: u64) -> i64 {
    let f = trial_factor(n);
    if f.iter().any(|&(_, a)| a > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, a) in trial_factor(n) {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..a {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// `p`-adic valuation of a nonzero integer.
pub fn valuation(mut n: u64, p: u64) -> u32 {
    debug_assert!(n != 0 && p >= 2);
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

pub fn is_squarefree(n: u64) -> bool {
    n != 0 && trial_factor(n).iter().all(|&(_, a)| a == 1)
}

/// Kronecker symbol `(a | n)` for any integer `a` and any `n`.
pub fn kronecker(a: i128, n: i128) -> i8 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut result: i8 = 1;
    let mut n = n;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    let mut a = a;
    let twos = n.trailing_zeros();
    if twos > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if twos % 2 == 1 {
            let r = a.rem_euclid(8);
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        n >>= twos;
    }
    // Jacobi symbol for odd positive n.
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Smallest primitive root modulo an odd prime `p`.
pub fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let factors = trial_factor(p - 1);
    (2..p)
        .find(|&g| factors.iter().all(|&(q, _)| pow_mod(g, (p - 1) / q, p) != 1))
        .expect("every prime has a primitive root")
}

/// Whether the unit `u` (mod the prime `p`) is a `d`-th power in `F_p^*`.
pub fn is_power_residue(u: u64, d: u64, p: u64) -> bool {
    let u = u % p;
    debug_assert!(u != 0);
    let g = gcd(d, p - 1);
    pow_mod(u, (p - 1) / g, p) == 1
}

/// Residue of `±∏ prime^exp` modulo `m`; `negative` selects the sign.
pub fn signed_product_mod(negative: bool, factors: &[(u64, u64)], m: u64) -> u64 {
    let mut acc = 1 % m;
    for &(p, e) in factors {
        acc = mul_mod(acc, pow_mod(p, e, m), m);
    }
    if negative && acc != 0 {
        m - acc
    } else {
        acc
    }
}
