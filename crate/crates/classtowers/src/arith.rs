//! Integer primitives: deterministic primality, factoring by sieve or trial
//! division, the Kronecker symbol, and admission of survey radicands.
//!
//! A radicand is admitted when it factors as `d = p1*p2*q` with
//! `p1 ≡ 1 (mod 8)`, `p2 ≡ 5 (mod 8)`, `q ≡ 3 (mod 4)` and the two Legendre
//! conditions `(p1|p2) = (p1|q) = -1` hold. The three congruence classes are
//! disjoint, so the assignment of factors to roles is unique when it exists.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArithError {
    #[error("kronecker symbol is undefined for modulus 0")]
    ZeroModulus,
}

/// Why a candidate radicand was rejected. Variants are ordered by the first
/// condition that fails during admission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Rejection {
    #[error("not squarefree")]
    NotSquarefree,
    #[error("expected exactly 3 prime factors, found {0}")]
    WrongFactorCount(usize),
    #[error("no assignment of factors to classes 1 mod 8, 5 mod 8, 3 mod 4")]
    NoCongruenceAssignment,
    #[error("legendre symbol (p1|p2) is not -1")]
    LegendreP1P2,
    #[error("legendre symbol (p1|q) is not -1")]
    LegendreP1Q,
}

/// An admitted radicand `d = p1*p2*q` together with the Legendre symbols
/// among its factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RadicandProfile {
    pub d: u64,
    pub p1: u64,
    pub p2: u64,
    pub q: u64,
    pub legendre_p1_p2: i32,
    pub legendre_p1_q: i32,
    pub legendre_p2_q: i32,
}

/// Kronecker symbol (a|n), defined for every n != 0.
///
/// Agrees with the Legendre symbol when n is an odd prime not dividing a,
/// and with the Jacobi symbol for odd n > 0.
pub fn kronecker(a: i64, n: i64) -> Result<i32, ArithError> {
    if n == 0 {
        return Err(ArithError::ZeroModulus);
    }
    let mut n = n;
    let mut res = 1i32;
    if n < 0 {
        n = -n;
        if a < 0 {
            res = -res;
        }
    }
    // Split off the even part of n; (a|2) depends on a mod 8.
    let two_exp = n.trailing_zeros();
    n >>= two_exp;
    if two_exp > 0 {
        if a & 1 == 0 {
            return Ok(0);
        }
        if two_exp & 1 == 1 {
            let r = a.rem_euclid(8);
            if r == 3 || r == 5 {
                res = -res;
            }
        }
    }
    // Jacobi symbol for odd n > 0 by reciprocity.
    let mut a = a.rem_euclid(n) as u64;
    let mut n = n as u64;
    while a != 0 {
        let t = a.trailing_zeros();
        a >>= t;
        if t & 1 == 1 {
            let r = n & 7;
            if r == 3 || r == 5 {
                res = -res;
            }
        }
        if a & 3 == 3 && n & 3 == 3 {
            res = -res;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    Ok(if n == 1 { res } else { 0 })
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
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

/// Witness set covering the full 64-bit range (Sorenson & Webster).
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic primality test, exact for every u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in MR_WITNESSES.iter() {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest-prime-factor sieve; built once and shared read-only by survey
/// workers.
pub struct FactorSieve {
    limit: u64,
    spf: Vec<u32>,
}

impl FactorSieve {
    pub fn new(limit: u64) -> Self {
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut i = 2usize;
        while i * i <= n {
            if spf[i] == 0 {
                let mut j = i * i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
            i += 1;
        }
        FactorSieve { limit, spf }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Prime factorization as (prime, multiplicity) pairs, ascending.
    pub fn factor(&self, mut n: u64) -> Vec<(u64, u32)> {
        assert!(n <= self.limit, "{} exceeds sieve limit {}", n, self.limit);
        let mut out = Vec::new();
        while n > 1 {
            let p = match self.spf[n as usize] {
                0 => n, // n itself is prime
                p => p as u64,
            };
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        out
    }
}

/// Factor by trial division; adequate for the survey range.
pub fn trial_factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn profile_from_factors(d: u64, factors: &[(u64, u32)]) -> Result<RadicandProfile, Rejection> {
    if factors.iter().any(|&(_, e)| e > 1) {
        return Err(Rejection::NotSquarefree);
    }
    if factors.len() != 3 {
        return Err(Rejection::WrongFactorCount(factors.len()));
    }
    let mut p1 = None;
    let mut p2 = None;
    let mut q = None;
    for &(p, _) in factors {
        if p % 8 == 1 {
            p1 = Some(p);
        } else if p % 8 == 5 {
            p2 = Some(p);
        } else if p % 4 == 3 {
            q = Some(p);
        }
    }
    let (p1, p2, q) = match (p1, p2, q) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(Rejection::NoCongruenceAssignment),
    };
    let legendre_p1_p2 = kronecker(p1 as i64, p2 as i64).expect("odd prime modulus");
    if legendre_p1_p2 != -1 {
        return Err(Rejection::LegendreP1P2);
    }
    let legendre_p1_q = kronecker(p1 as i64, q as i64).expect("odd prime modulus");
    if legendre_p1_q != -1 {
        return Err(Rejection::LegendreP1Q);
    }
    let legendre_p2_q = kronecker(p2 as i64, q as i64).expect("odd prime modulus");
    Ok(RadicandProfile {
        d,
        p1,
        p2,
        q,
        legendre_p1_p2,
        legendre_p1_q,
        legendre_p2_q,
    })
}

/// Admit or reject a candidate radicand, naming the first failed condition.
pub fn profile_radicand(d: u64) -> Result<RadicandProfile, Rejection> {
    if d < 2 {
        return Err(Rejection::WrongFactorCount(0));
    }
    profile_from_factors(d, &trial_factor(d))
}

/// Sieve-backed variant for batch scans.
pub fn profile_radicand_sieved(d: u64, sieve: &FactorSieve) -> Result<RadicandProfile, Rejection> {
    if d < 2 {
        return Err(Rejection::WrongFactorCount(0));
    }
    profile_from_factors(d, &sieve.factor(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kronecker_small_values() {
        assert_eq!(kronecker(17, 5).unwrap(), -1);
        assert_eq!(kronecker(5, 11).unwrap(), 1);
        for a in -20..=20 {
            assert_eq!(kronecker(a, 1).unwrap(), 1);
        }
        assert_eq!(kronecker(3, 0), Err(ArithError::ZeroModulus));
    }

    #[test]
    fn kronecker_matches_euler_criterion() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let primes: Vec<u64> = (3..10_000).filter(|&n| is_prime(n)).collect();
        for _ in 0..1000 {
            let p = primes[rng.gen_range(0..primes.len())];
            let a = rng.gen_range(-(p as i64) * 3..(p as i64) * 3);
            let euler = pow_mod(a.rem_euclid(p as i64) as u64, (p - 1) / 2, p);
            let expect = if euler == 0 {
                0
            } else if euler == 1 {
                1
            } else {
                -1
            };
            assert_eq!(kronecker(a, p as i64).unwrap(), expect, "a={} p={}", a, p);
        }
    }

    #[test]
    fn kronecker_completely_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let primes: Vec<u64> = (3..10_000).filter(|&n| is_prime(n)).collect();
        for _ in 0..1000 {
            let p = primes[rng.gen_range(0..primes.len())] as i64;
            let a = rng.gen_range(1..1000i64);
            let b = rng.gen_range(1..1000i64);
            assert_eq!(
                kronecker(a, p).unwrap() * kronecker(b, p).unwrap(),
                kronecker(a * b, p).unwrap()
            );
        }
    }

    #[test]
    fn primality_examples() {
        assert!(is_prime(17));
        assert!(!is_prime(1));
        assert!(!is_prime(561)); // 3 * 11 * 17, Carmichael
        assert!(is_prime(2));
        assert!(!is_prime(0));
        assert!(is_prime(0xffff_ffff_ffff_ffc5)); // largest 64-bit prime
    }

    #[test]
    fn primality_matches_sieve_below_10000() {
        let sieve = FactorSieve::new(10_000);
        for n in 2..=10_000u64 {
            let by_sieve = sieve.factor(n).len() == 1 && sieve.factor(n)[0].1 == 1;
            assert_eq!(is_prime(n), by_sieve, "n={}", n);
        }
    }

    #[test]
    fn sieve_factorization_agrees_with_trial_division() {
        let sieve = FactorSieve::new(50_000);
        for n in 2..=50_000u64 {
            assert_eq!(sieve.factor(n), trial_factor(n), "n={}", n);
        }
    }

    #[test]
    fn profile_accepts_255_and_935() {
        let p = profile_radicand(255).unwrap();
        assert_eq!((p.p1, p.p2, p.q), (17, 5, 3));
        assert_eq!(p.legendre_p2_q, -1);

        let p = profile_radicand(935).unwrap();
        assert_eq!((p.p1, p.p2, p.q), (17, 5, 11));
        assert_eq!(p.legendre_p2_q, 1);
    }

    #[test]
    fn profile_rejections_name_first_failed_condition() {
        // 105 = 3 * 5 * 7: no factor is 1 mod 8.
        assert_eq!(
            profile_radicand(105),
            Err(Rejection::NoCongruenceAssignment)
        );
        assert_eq!(profile_radicand(50), Err(Rejection::NotSquarefree));
        assert_eq!(profile_radicand(15), Err(Rejection::WrongFactorCount(2)));
        // 3 * 5 * 41: 41 = 1 mod 8, 5 = 5 mod 8, 3 = 3 mod 4, but (41|5) = 1.
        assert_eq!(profile_radicand(615), Err(Rejection::LegendreP1P2));
        // 3 * 5 * 73: (73|5) = -1 but (73|3) = 1.
        assert_eq!(profile_radicand(1095), Err(Rejection::LegendreP1Q));
    }

    /// Independent oracle: re-check every admission condition from scratch.
    fn oracle_accepts(d: u64) -> bool {
        let mut fs = Vec::new();
        let mut n = d;
        let mut p = 2;
        while p * p <= n {
            while n % p == 0 {
                fs.push(p);
                n /= p;
            }
            p += 1;
        }
        if n > 1 {
            fs.push(n);
        }
        if fs.len() != 3 {
            return false;
        }
        if fs[0] == fs[1] || fs[1] == fs[2] {
            return false;
        }
        let mut p1 = 0;
        let mut p2 = 0;
        let mut q = 0;
        for &f in &fs {
            match (f % 8, f % 4) {
                (1, _) => p1 = f,
                (5, _) => p2 = f,
                (_, 3) => q = f,
                _ => return false,
            }
        }
        if p1 == 0 || p2 == 0 || q == 0 {
            return false;
        }
        let leg = |a: u64, p: u64| pow_mod(a % p, (p - 1) / 2, p) == p - 1;
        leg(p1, p2) && leg(p1, q)
    }

    #[test]
    fn profile_matches_oracle_below_100000() {
        let sieve = FactorSieve::new(100_000);
        for d in 2..100_000u64 {
            assert_eq!(
                profile_radicand_sieved(d, &sieve).is_ok(),
                oracle_accepts(d),
                "d={}",
                d
            );
        }
    }
}
