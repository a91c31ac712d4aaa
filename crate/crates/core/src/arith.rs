//! Machine-integer and big-integer helpers: primality, factorization, modular
//! arithmetic and Chinese remaindering over `Z`.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

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

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128 % m as i128).extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i128) as u64)
}

/// Deterministic Miller-Rabin for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
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

pub fn next_prime(n: u64) -> u64 {
    let mut k = n + 1;
    while !is_prime(k) {
        k += 1;
    }
    k
}

fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorization of a positive `u64`, primes ascending.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    let mut primes = Vec::new();
    factor_into(n, &mut primes);
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

fn factor_into(mut n: u64, acc: &mut Vec<u64>) {
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        while n % p == 0 {
            acc.push(p);
            n /= p;
        }
    }
    if n == 1 {
        return;
    }
    if is_prime(n) {
        acc.push(n);
        return;
    }
    let d = pollard_rho(n);
    factor_into(d, acc);
    factor_into(n / d, acc);
}

/// Prime factorization of a nonzero big integer (sign ignored).
///
/// Prime factors must fit in a `u64`; anything larger is reported as
/// unsupported rather than silently mis-factored.
pub fn factor_bigint(n: &BigInt) -> Result<Vec<(u64, u32)>> {
    if n.is_zero() {
        return Err(Error::ZeroElement);
    }
    let mut m: BigUint = n.magnitude().clone();
    if let Some(small) = m.to_u64() {
        return Ok(factor_u64(small));
    }
    let mut out: Vec<(u64, u32)> = Vec::new();
    let mut p = 2u64;
    while p < 100_000 {
        let bp = BigUint::from(p);
        let mut e = 0;
        while (&m % &bp).is_zero() {
            m /= &bp;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        if let Some(small) = m.to_u64() {
            for (q, e) in factor_u64(small) {
                out.push((q, e));
            }
            out.sort_unstable();
            return Ok(merge(out));
        }
        p = next_prime(p);
    }
    Err(Error::Unsupported(format!(
        "integer {n} has a cofactor beyond the factorization range"
    )))
}

fn merge(v: Vec<(u64, u32)>) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    for (p, e) in v {
        match out.last_mut() {
            Some((q, f)) if *q == p => *f += e,
            _ => out.push((p, e)),
        }
    }
    out.into_iter().filter(|&(p, _)| p > 1).collect()
}

/// `v_p(n)` for nonzero `n`.
pub fn val_bigint(n: &BigInt, p: u64) -> u32 {
    debug_assert!(!n.is_zero());
    let bp = BigInt::from(p);
    let mut m = n.clone();
    let mut e = 0;
    loop {
        let (q, r) = m.div_rem(&bp);
        if !r.is_zero() {
            return e;
        }
        m = q;
        e += 1;
    }
}

pub fn mod_bigint(n: &BigInt, m: &BigInt) -> BigInt {
    n.mod_floor(m)
}

/// Inverse of `a` modulo `m` for big integers.
pub fn inv_mod_bigint(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

/// Solve `x ≡ r_i (mod m_i)` for pairwise coprime moduli. Returns the
/// residue in `[0, ∏ m_i)` and the product modulus.
pub fn crt(congruences: &[(BigInt, BigInt)]) -> (BigInt, BigInt) {
    let mut x = BigInt::zero();
    let mut modulus = BigInt::one();
    for (r, m) in congruences {
        let inv = inv_mod_bigint(&modulus, m).expect("moduli must be pairwise coprime");
        let t = ((r - &x) * inv).mod_floor(m);
        x += &modulus * t;
        modulus *= m;
    }
    (x.mod_floor(&modulus), modulus)
}

/// Exact integer square root, if `n` is a perfect square.
pub fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.sign() == Sign::Minus {
        return None;
    }
    let r = n.sqrt();
    if &(&r * &r) == n {
        Some(r)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factors_small_and_composite() {
        assert_eq!(factor_u64(20), vec![(2, 2), (5, 1)]);
        assert_eq!(factor_u64(1), vec![]);
        assert_eq!(factor_u64(600851475143), vec![(71, 1), (839, 1), (1471, 1), (6857, 1)]);
        let n = BigInt::from(1_000_000_007u64) * BigInt::from(998_244_353u64) * 12;
        assert_eq!(
            factor_bigint(&n).unwrap(),
            vec![(2, 2), (3, 1), (998_244_353, 1), (1_000_000_007, 1)]
        );
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3215031751));
    }

    #[test]
    fn crt_matches_example() {
        let (x, m) = crt(&[(BigInt::from(1), BigInt::from(8)), (BigInt::from(0), BigInt::from(25))]);
        assert_eq!(x, BigInt::from(25));
        assert_eq!(m, BigInt::from(200));
    }

    #[test]
    fn inverses() {
        assert_eq!(inv_mod(3, 5), Some(2));
        assert_eq!(inv_mod(5, 10), None);
    }
}
