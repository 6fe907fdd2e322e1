//! Prime-field arithmetic and the small algebraic toolkit the laboratory
//! modules share: subsets of `F_p`, intervals, integer polynomials, map
//! specifications and seeded sampling.
//!
//! Elements are plain `u64` residues in `[0, p)`. All products go through
//! `u128`, so any prime below `2^64` is accepted.

mod map;
mod parse;
mod poly;
mod sample;
mod set;

pub use map::{GenExponent, MapSpec, Term, VARIABLES};
pub use parse::{parse_int_poly, parse_map_spec};
pub use poly::{is_affinely_dependent, IntPoly};
pub use sample::{derive_seed, rng_from_seed, sample_subset, sample_subset_with};
pub use set::{FpInterval, FpSet};

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

/// Validated odd prime modulus with a lazily computed primitive root.
///
/// Cloning is cheap (the context is reference counted) and clones share the
/// cached generator.
#[derive(Clone)]
pub struct PrimeField {
    inner: Arc<Inner>,
}

struct Inner {
    p: u64,
    generator: OnceLock<u64>,
}

impl PartialEq for PrimeField {
    fn eq(&self, other: &Self) -> bool {
        self.inner.p == other.inner.p
    }
}

impl Eq for PrimeField {}

impl fmt::Debug for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrimeField({})", self.inner.p)
    }
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p < 3 {
            return Err(Error::ModulusTooSmall(p));
        }
        if !is_prime(p) {
            return Err(Error::CompositeModulus(p));
        }
        Ok(PrimeField {
            inner: Arc::new(Inner {
                p,
                generator: OnceLock::new(),
            }),
        })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.inner.p
    }

    /// Order of the multiplicative group, `p - 1`.
    #[inline]
    pub fn group_order(&self) -> u64 {
        self.inner.p - 1
    }

    pub fn ensure_same(&self, other: &PrimeField) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::FieldMismatch {
                left: self.p(),
                right: other.p(),
            })
        }
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.inner.p
    }

    /// Canonical image of a signed integer, `pi_p(x)`.
    #[inline]
    pub fn from_i64(&self, x: i64) -> u64 {
        (x as i128).rem_euclid(self.inner.p as i128) as u64
    }

    #[inline]
    pub fn from_i128(&self, x: i128) -> u64 {
        x.rem_euclid(self.inner.p as i128) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        (s % self.inner.p as u128) as u64
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        let p = self.inner.p;
        let (a, b) = (a % p, b % p);
        if a >= b {
            a - b
        } else {
            p - (b - a)
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        self.sub(0, a)
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.inner.p as u128) as u64
    }

    pub fn pow(&self, base: u64, mut e: u64) -> u64 {
        let mut b = base % self.inner.p;
        let mut acc = 1 % self.inner.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    /// Inverse by Fermat. Returns `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let a = a % self.inner.p;
        (a != 0).then(|| self.pow(a, self.inner.p - 2))
    }

    /// Smallest primitive root of `F_p^x`, computed once and cached.
    pub fn generator(&self) -> u64 {
        *self.inner.generator.get_or_init(|| smallest_generator(self))
    }

    pub fn multiplicative_order(&self, a: u64) -> Option<u64> {
        let a = a % self.p();
        if a == 0 {
            return None;
        }
        let mut order = self.group_order();
        for q in prime_factors(self.group_order()) {
            while order % q == 0 && self.pow(a, order / q) == 1 {
                order /= q;
            }
        }
        Some(order)
    }

    /// `{x in F_p^x : x^k = 1}`, generated from the primitive root.
    pub fn kth_roots_of_unity(&self, k: u64) -> FpSet {
        assert!(k >= 1, "k must be positive");
        let d = gcd(k, self.group_order());
        let step = self.pow(self.generator(), self.group_order() / d);
        let mut set = FpSet::empty(self);
        let mut x = 1;
        for _ in 0..d {
            set.insert(x);
            x = self.mul(x, step);
        }
        set
    }

    /// `k * d!` reduced modulo `p - 1`, reducing after every multiplication.
    pub fn factorial_exponent(&self, k: u64, d: u64) -> u64 {
        let m = self.group_order() as u128;
        let mut acc = k as u128 % m;
        for i in 2..=d {
            acc = acc * (i as u128 % m) % m;
        }
        acc as u64
    }

    /// `x^(k d!)` for the X-set test. Zero maps to zero; the exponent is
    /// reduced modulo `p - 1` only for nonzero bases.
    pub fn factorial_power(&self, x: u64, reduced_exponent: u64) -> u64 {
        if x % self.p() == 0 {
            0
        } else {
            self.pow(x, reduced_exponent)
        }
    }

    /// Least residue representative of `x` mapped to `(-p/2, p/2]`.
    pub fn centered(&self, x: u64) -> i64 {
        let p = self.p();
        let x = x % p;
        if x > p / 2 {
            x as i64 - p as i64
        } else {
            x as i64
        }
    }
}

fn smallest_generator(field: &PrimeField) -> u64 {
    let n = field.group_order();
    let factors = prime_factors(n);
    (2..field.p())
        .find(|&g| factors.iter().all(|&q| field.pow(g, n / q) != 1))
        // p = 3: 2 is a generator and the range above is non-empty
        .unwrap_or(1)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Distinct prime factors by trial division.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2u64;
    while q.saturating_mul(q) <= n {
        if n % q == 0 {
            out.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the first twelve prime bases are exact for
/// every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn constructs_only_odd_primes() {
        assert_eq!(field(7).p(), 7);
        assert_eq!(field(101).p(), 101);
        assert_eq!(PrimeField::new(9), Err(Error::CompositeModulus(9)));
        assert_eq!(PrimeField::new(2), Err(Error::ModulusTooSmall(2)));
        assert_eq!(PrimeField::new(0), Err(Error::ModulusTooSmall(0)));
        assert!(PrimeField::new(18446744073709551557).is_ok());
        assert!(PrimeField::new(3215031751).is_err()); // strong pseudoprime to 2,3,5,7
    }

    #[test]
    fn primality_matches_trial_division() {
        for n in 0..5000u64 {
            let naive = n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(is_prime(n), naive, "n = {n}");
        }
    }

    #[test]
    fn smallest_generators() {
        assert_eq!(field(7).generator(), 3);
        assert_eq!(field(5).generator(), 2);
        assert_eq!(field(3).generator(), 2);
        assert_eq!(field(101).generator(), 2);
    }

    #[test]
    fn generator_powers_cover_the_group() {
        for p in [3u64, 5, 7, 11, 13, 97, 101, 499] {
            let f = field(p);
            let g = f.generator();
            let mut seen = vec![false; p as usize];
            let mut x = 1;
            for _ in 0..p - 1 {
                assert!(!seen[x as usize]);
                seen[x as usize] = true;
                x = f.mul(x, g);
            }
            assert_eq!(x, 1);
            // smallest: every smaller candidate has a shorter order
            for h in 2..g {
                assert!(f.multiplicative_order(h).unwrap() < p - 1);
            }
        }
    }

    #[test]
    fn roots_of_unity_examples() {
        let f7 = field(7);
        assert_eq!(f7.kth_roots_of_unity(3).to_vec(), vec![1, 2, 4]);
        assert_eq!(f7.kth_roots_of_unity(5).to_vec(), vec![1]);
        assert_eq!(field(5).kth_roots_of_unity(2).to_vec(), vec![1, 4]);
    }

    #[test]
    fn roots_of_unity_exhaustive() {
        for p in (3..100).filter(|&n| is_prime(n)) {
            let f = field(p);
            for k in 1..=12u64 {
                let roots = f.kth_roots_of_unity(k);
                assert_eq!(roots.len() as u64, gcd(k, p - 1), "p={p} k={k}");
                let brute: Vec<u64> = (1..p).filter(|&x| f.pow(x, k) == 1).collect();
                assert_eq!(roots.to_vec(), brute);
            }
        }
    }

    #[test]
    fn factorial_exponent_examples() {
        assert_eq!(field(7).factorial_exponent(1, 2), 2);
        assert_eq!(field(7).factorial_exponent(2, 3), 0);
        assert_eq!(field(11).factorial_exponent(1, 20), 0);
        // huge d never overflows
        assert_eq!(field(101).factorial_exponent(3, 1_000), 0);
    }

    #[test]
    fn factorial_power_treats_zero_literally() {
        let f = field(7);
        let e = f.factorial_exponent(2, 3);
        assert_eq!(e, 0);
        assert_eq!(f.factorial_power(0, e), 0);
        assert_eq!(f.factorial_power(3, e), 1);
    }

    #[test]
    fn arithmetic_basics() {
        let f = field(101);
        assert_eq!(f.add(100, 5), 4);
        assert_eq!(f.sub(3, 5), 99);
        assert_eq!(f.mul(50, 3), 49);
        assert_eq!(f.inv(0), None);
        for a in 1..101 {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
        assert_eq!(f.from_i64(-1), 100);
        assert_eq!(f.centered(100), -1);
        assert_eq!(f.centered(50), 50);
    }
}
