//! Frobenian multiplicative functions whose defining field is cyclotomic.
//!
//! Outside a finite exceptional set, `f(p)` depends only on `p mod q` and
//! `f(p^j)` on `(p mod q, j)` through a [`PowerRule`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, trial_factor};
use crate::error::{Error, Result};
use crate::sieve::FactorizationTable;

/// The built-in functions, as written on the command line.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionSpec {
    /// `one`: the constant function 1.
    One,
    /// `sots`: indicator of integers that are a sum of two squares.
    SumOfTwoSquares,
    /// `congruence:a,q`: 1 on `p^j` with `p ≡ a mod q`, 0 elsewhere.
    Congruence { residue: u64, modulus: u64 },
    /// `split:q,h1+h2+…`: 1 on `p^j` with `p mod q` in the listed subgroup,
    /// i.e. `p` splits completely in the fixed field of that subgroup.
    Split { modulus: u64, subgroup: Vec<u64> },
    /// `divisor`: the number-of-divisors function.
    Divisor,
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::One => write!(f, "one"),
            FunctionSpec::SumOfTwoSquares => write!(f, "sots"),
            FunctionSpec::Congruence { residue, modulus } => write!(f, "congruence:{residue},{modulus}"),
            FunctionSpec::Split { modulus, subgroup } => {
                let parts: Vec<String> = subgroup.iter().map(u64::to_string).collect();
                write!(f, "split:{modulus},{}", parts.join("+"))
            }
            FunctionSpec::Divisor => write!(f, "divisor"),
        }
    }
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |why: &str| Error::InvalidFunction(s.to_string(), why.to_string());
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad("expected a non-negative integer"));
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a)),
            None => (s, None),
        };
        let spec = match (name, args) {
            ("one", None) => FunctionSpec::One,
            ("sots", None) => FunctionSpec::SumOfTwoSquares,
            ("divisor", None) => FunctionSpec::Divisor,
            ("congruence", Some(a)) => {
                let (r, q) = a.split_once(',').ok_or_else(|| bad("expected congruence:a,q"))?;
                let modulus = num(q)?;
                if modulus == 0 {
                    return Err(bad("modulus must be positive"));
                }
                FunctionSpec::Congruence { residue: num(r)? % modulus, modulus }
            }
            ("split", Some(a)) => {
                let (q, h) = a.split_once(',').ok_or_else(|| bad("expected split:q,h1+h2+..."))?;
                let modulus = num(q)?;
                if modulus == 0 {
                    return Err(bad("modulus must be positive"));
                }
                let mut subgroup = h.split('+').map(|t| num(t).map(|v| v % modulus)).collect::<Result<Vec<_>>>()?;
                subgroup.sort_unstable();
                subgroup.dedup();
                FunctionSpec::Split { modulus, subgroup }
            }
            ("one" | "sots" | "divisor" | "congruence" | "split", _) => return Err(bad("wrong number of parameters")),
            _ => return Err(Error::UnknownFunction(s.to_string())),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl FunctionSpec {
    fn validate(&self) -> Result<()> {
        let bad = |why: String| Error::InvalidFunction(self.to_string(), why);
        match self {
            FunctionSpec::Congruence { residue, modulus } => {
                if gcd(*residue, *modulus) != 1 {
                    return Err(bad(format!("{residue} is not a unit mod {modulus}")));
                }
            }
            FunctionSpec::Split { modulus, subgroup } => {
                let q = *modulus;
                if !subgroup.contains(&(1 % q)) {
                    return Err(bad("subgroup must contain 1".into()));
                }
                for &a in subgroup {
                    if gcd(a, q) != 1 {
                        return Err(bad(format!("{a} is not a unit mod {q}")));
                    }
                    for &b in subgroup {
                        if !subgroup.contains(&(a * b % q)) {
                            return Err(bad("residues are not closed under multiplication".into()));
                        }
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// How `f(p^j)` follows from the class value `f(p)` at non-exceptional `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerRule {
    /// `f(p^j) = f(p)` for every `j ≥ 1`.
    Stable,
    /// `f(p^j) = f(p)` for odd `j` and `1` for even `j`.
    EvenPowersTrivial,
    /// `f(p^j) = j + 1`.
    DivisorCount,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrobenianFunction {
    spec: FunctionSpec,
    period: u64,
    /// Indexed by residue mod `period`; entries at non-units are zero.
    class_values: Vec<Rational64>,
    /// `f(p^j)` for `j ≥ 1` at each exceptional prime (constant in `j`).
    exceptional: BTreeMap<u64, Rational64>,
    power_rule: PowerRule,
    growth_bound: u64,
}

impl FrobenianFunction {
    pub fn builtin(spec: &FunctionSpec) -> Result<Self> {
        spec.validate()?;
        let unit_indicator = |q: u64, member: &dyn Fn(u64) -> bool| -> Vec<Rational64> {
            (0..q).map(|a| if gcd(a, q) == 1 && member(a) { Rational64::one() } else { Rational64::zero() }).collect()
        };
        let ramified_zero = |q: u64| -> BTreeMap<u64, Rational64> {
            trial_factor(q).into_iter().map(|(p, _)| (p, Rational64::zero())).collect()
        };
        let (period, class_values, exceptional, power_rule, growth_bound) = match spec {
            FunctionSpec::One => (1, vec![Rational64::one()], BTreeMap::new(), PowerRule::Stable, 1),
            FunctionSpec::SumOfTwoSquares => (
                4,
                unit_indicator(4, &|a| a == 1),
                BTreeMap::from([(2, Rational64::one())]),
                PowerRule::EvenPowersTrivial,
                1,
            ),
            FunctionSpec::Congruence { residue, modulus } => {
                let r = *residue;
                (*modulus, unit_indicator(*modulus, &|a| a == r), ramified_zero(*modulus), PowerRule::Stable, 1)
            }
            FunctionSpec::Split { modulus, subgroup } => (
                *modulus,
                unit_indicator(*modulus, &|a| subgroup.contains(&a)),
                ramified_zero(*modulus),
                PowerRule::Stable,
                1,
            ),
            FunctionSpec::Divisor => {
                (1, vec![Rational64::from_integer(2)], BTreeMap::new(), PowerRule::DivisorCount, 2)
            }
        };
        Ok(Self { spec: spec.clone(), period, class_values, exceptional, power_rule, growth_bound })
    }

    pub fn spec(&self) -> &FunctionSpec {
        &self.spec
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn growth_bound(&self) -> u64 {
        self.growth_bound
    }

    pub fn power_rule(&self) -> PowerRule {
        self.power_rule
    }

    /// Primes where the class-function description does not apply.
    pub fn exceptional_primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.exceptional.keys().copied()
    }

    pub fn is_exceptional(&self, p: u64) -> bool {
        self.exceptional.contains_key(&p)
    }

    /// The class function on `(Z/q)^*`, evaluated at `a mod q`.
    pub fn class_value(&self, a: u64) -> Rational64 {
        self.class_values[(a % self.period) as usize]
    }

    /// Whether every stored value is non-negative.
    pub fn is_non_negative(&self) -> bool {
        self.class_values.iter().chain(self.exceptional.values()).all(|v| !v.is_negative())
    }

    pub fn eval_prime_power(&self, p: u64, j: u32) -> Rational64 {
        if j == 0 {
            return Rational64::one();
        }
        if let Some(v) = self.exceptional.get(&p) {
            return *v;
        }
        let base = self.class_value(p);
        match self.power_rule {
            PowerRule::Stable => base,
            PowerRule::EvenPowersTrivial if j.is_multiple_of(2) => Rational64::one(),
            PowerRule::EvenPowersTrivial => base,
            PowerRule::DivisorCount => Rational64::from_integer(j as i64 + 1),
        }
    }

    pub fn eval_factored(&self, factors: &[(u64, u32)]) -> Rational64 {
        let mut acc = Rational64::one();
        for &(p, j) in factors {
            acc *= self.eval_prime_power(p, j);
            if acc.is_zero() {
                break;
            }
        }
        acc
    }

    pub fn eval(&self, n: u64, table: &FactorizationTable) -> Result<Rational64> {
        Ok(self.eval_factored(&table.factor(n)?))
    }

    /// Average of the class function over `(Z/q)^*`.
    pub fn mean(&self) -> Rational64 {
        let units: Vec<Rational64> =
            (0..self.period).filter(|&a| gcd(a, self.period) == 1).map(|a| self.class_value(a)).collect();
        let count = units.len() as i64;
        units.into_iter().sum::<Rational64>() / count
    }

    /// `Σ_{n ≤ cutoff} f(n)/n^s` together with a bound on the omitted tail.
    pub fn l_function_partial(&self, s: f64, cutoff: u64, table: &FactorizationTable) -> Result<SeriesValue> {
        if s.is_nan() || s <= 1.0 {
            return Err(Error::Domain(format!("the series needs s > 1, got {s}")));
        }
        if cutoff > table.bound() {
            return Err(Error::OutOfRange { value: cutoff, bound: table.bound() });
        }
        let value = (1..=cutoff)
            .map(|n| {
                let v = self.eval_factored(&table.factor_unchecked(n));
                to_f64(v) * (n as f64).powf(-s)
            })
            .sum::<f64>();
        let tail_bound = self.tail_bound(s, cutoff.max(1), table)?;
        Ok(SeriesValue { value, tail_bound, cutoff })
    }

    /// Bound on `Σ_{n > N} |f(n)| n^{-s}`.
    ///
    /// With `|f| ≤ 1` this is the integral `N^{1-s}/(s-1)`. Otherwise Rankin's
    /// trick: the tail is at most `N^{-δ} Σ_n |f(n)| n^{-(s-δ)}`, and the full
    /// series is dominated by `∏_p (1 - H p^{-σ})^{-1}` with `σ = s - δ`.
    fn tail_bound(&self, s: f64, n: u64, table: &FactorizationTable) -> Result<f64> {
        let n_f = n as f64;
        let h = self.growth_bound as f64;
        if self.growth_bound == 1 {
            return Ok(n_f.powf(1.0 - s) / (s - 1.0));
        }
        let delta = (s - 1.0) / 2.0;
        let sigma = s - delta;
        if h >= 2f64.powf(sigma) {
            return Err(Error::Domain(format!("growth bound {h} too large for a tail bound at s = {s}")));
        }
        let limit = table.bound().min(1_000_000);
        let mut log_product = 0.0;
        for p in table.primes_up_to(limit) {
            log_product -= (1.0 - h * (*p as f64).powf(-sigma)).ln();
        }
        // Beyond the table, H p^{-σ} ≤ 1/2, so -log(1 - y) ≤ 2y.
        let last = limit as f64;
        if h * last.powf(-sigma) > 0.5 {
            return Err(Error::Resource("factorization table too small for the tail bound".into()));
        }
        log_product += 2.0 * h * last.powf(1.0 - sigma) / (sigma - 1.0);
        Ok(n_f.powf(-delta) * log_product.exp())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
    pub cutoff: u64,
}

pub(crate) fn to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Whether `n = a² + b²` for integers `a, b ≥ 0` (zero summands allowed).
pub fn is_sum_of_two_squares(n: u64) -> bool {
    n == 0 || trial_factor(n).iter().all(|&(p, a)| p % 4 != 3 || a % 2 == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> FrobenianFunction {
        FrobenianFunction::builtin(&s.parse().unwrap()).unwrap()
    }

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn sots_by_search(n: u64) -> bool {
        (0..).take_while(|a| a * a <= n).any(|a| {
            let rest = n - a * a;
            let b = (rest as f64).sqrt() as u64;
            (b.saturating_sub(1)..=b + 1).any(|b| b * b == rest)
        })
    }

    #[test]
    fn spec_round_trip() {
        for s in ["one", "sots", "congruence:2,3", "split:8,1+7", "split:4,1", "divisor"] {
            let spec: FunctionSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert_eq!("split:8,7+1".parse::<FunctionSpec>().unwrap().to_string(), "split:8,1+7");
        assert!(matches!("cube".parse::<FunctionSpec>(), Err(Error::UnknownFunction(_))));
        assert!("congruence:2,4".parse::<FunctionSpec>().is_err());
        assert!("split:8,3".parse::<FunctionSpec>().is_err());
        assert!("sots:1".parse::<FunctionSpec>().is_err());
    }

    #[test]
    fn eval_examples() {
        let t = FactorizationTable::build(100).unwrap();
        let sots = f("sots");
        assert_eq!(sots.eval(21, &t).unwrap(), r(0, 1));
        assert_eq!(sots.eval(45, &t).unwrap(), r(1, 1));
        assert_eq!(sots.eval(9, &t).unwrap(), r(1, 1));
        assert_eq!(sots.eval(3, &t).unwrap(), r(0, 1));
        let cong = f("congruence:2,3");
        assert_eq!(cong.eval(4, &t).unwrap(), r(1, 1));
        assert_eq!(cong.eval(6, &t).unwrap(), r(0, 1));
        assert_eq!(f("divisor").eval(12, &t).unwrap(), r(6, 1));
        for name in ["one", "sots", "congruence:1,3", "split:5,1+4", "divisor"] {
            assert_eq!(f(name).eval(1, &t).unwrap(), r(1, 1));
        }
    }

    #[test]
    fn means() {
        assert_eq!(f("sots").mean(), r(1, 2));
        assert_eq!(f("one").mean(), r(1, 1));
        assert_eq!(f("congruence:1,3").mean(), r(1, 2));
        assert_eq!(f("split:8,1+7").mean(), r(1, 2));
        assert_eq!(f("divisor").mean(), r(2, 1));
    }

    #[test]
    fn sots_against_search() {
        let t = FactorizationTable::build(100_000).unwrap();
        let sots = f("sots");
        for n in 1..=100_000u64 {
            let by_search = sots_by_search(n);
            assert_eq!(is_sum_of_two_squares(n), by_search, "n = {n}");
            assert_eq!(sots.eval(n, &t).unwrap().is_one(), by_search, "n = {n}");
        }
        assert!(is_sum_of_two_squares(13));
        assert!(is_sum_of_two_squares(2));
        assert!(is_sum_of_two_squares(0));
        assert!(!is_sum_of_two_squares(21));
    }

    #[test]
    fn split_matches_divisor_form() {
        // split:4,1 is 1 exactly on products of primes ≡ 1 mod 4.
        let t = FactorizationTable::build(2000).unwrap();
        let split = f("split:4,1");
        for n in 1..=2000u64 {
            let expected = trial_factor(n).iter().all(|&(p, _)| p % 4 == 1);
            assert_eq!(split.eval(n, &t).unwrap().is_one(), expected);
        }
    }

    #[test]
    fn zeta_two() {
        let t = FactorizationTable::build(1_000_000).unwrap();
        let z = f("one").l_function_partial(2.0, 1_000_000, &t).unwrap();
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((z.value - zeta2).abs() <= z.tail_bound);
        assert!(z.tail_bound < 1.1e-6);
        let s = f("sots").l_function_partial(2.0, 1_000_000, &t).unwrap();
        assert!(s.tail_bound < 1e-4 && s.value > 1.0);
        assert_eq!(f("sots").l_function_partial(2.0, 1, &t).unwrap().value, 1.0);
        assert!(f("one").l_function_partial(1.0, 10, &t).is_err());
    }

    #[test]
    fn divisor_tail_is_a_bound() {
        // Σ d(n)/n^3 = ζ(3)^2.
        let t = FactorizationTable::build(1_000_000).unwrap();
        let d = f("divisor").l_function_partial(3.0, 1000, &t).unwrap();
        let zeta3 = 1.202_056_903_159_594_f64;
        let err = (zeta3 * zeta3 - d.value).abs();
        assert!(err <= d.tail_bound, "{err} > {}", d.tail_bound);
        assert!(d.tail_bound < 1.0);
    }
}
