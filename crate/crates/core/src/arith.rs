//! Number-theory helpers: deterministic primality, prime ranges, CRR,
//! binomials and logarithm conventions.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Deterministic trial division. Inputs here stay well below 2^40.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) || n.is_multiple_of(3) {
        return false;
    }
    let mut f = 5u64;
    while f.saturating_mul(f) <= n {
        if n.is_multiple_of(f) || n.is_multiple_of(f + 2) {
            return false;
        }
        f += 6;
    }
    true
}

/// The `count` smallest primes in `[lo, hi]`, ascending.
pub fn smallest_primes_in(lo: u64, hi: u64, count: usize) -> Result<Vec<u64>> {
    let mut out = Vec::with_capacity(count);
    let mut p = lo.max(2);
    while out.len() < count && p <= hi {
        if is_prime(p) {
            out.push(p);
        }
        p += 1;
    }
    if out.len() < count {
        return Err(Error::InsufficientPrimes {
            needed: count,
            lo,
            hi,
            found: out.len(),
        });
    }
    Ok(out)
}

/// Chinese remainder representation: the unique `0 <= t < prod(moduli)`
/// with `t = residues[i] (mod moduli[i])`. Moduli must be pairwise coprime.
pub fn crr(residues: &[BigUint], moduli: &[u64]) -> BigUint {
    debug_assert_eq!(residues.len(), moduli.len());
    let product: BigUint = moduli.iter().map(|&m| BigUint::from(m)).product();
    let mut acc = BigUint::zero();
    for (r, &m) in residues.iter().zip(moduli) {
        let m_big = BigUint::from(m);
        let partial = &product / &m_big;
        let partial_mod = (&partial % &m_big).to_u64().unwrap();
        let inv = mod_inverse(partial_mod, m).expect("moduli must be coprime");
        let r_mod = r % &m_big;
        acc += partial * (r_mod * BigUint::from(inv));
    }
    acc % product
}

pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128).extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i128) as u64)
}

pub fn mod_pow(base: u64, mut exp: u64, m: u64) -> u64 {
    let m = m as u128;
    let mut acc = 1u128 % m;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// `ceil(log2(x))` for `x >= 1`; `0` for `x <= 1`.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Bits needed to encode values in `[0, x)`.
pub fn bits_for(x: u64) -> u32 {
    ceil_log2(x).max(1)
}

/// Iterated logarithm: `0` for `x <= 1`, else `1 + log*(log2 x)`.
pub fn log_star(x: f64) -> u32 {
    let mut x = x;
    let mut k = 0;
    while x > 1.0 {
        x = x.log2();
        k += 1;
    }
    k
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `sum_{i <= k} C(n, i)`.
pub fn binomial_prefix(n: u64, k: u64) -> BigUint {
    (0..=k.min(n)).map(|i| binomial(n, i)).sum()
}

pub fn binomial_u64(n: u64, k: u64) -> u64 {
    binomial(n, k).to_u64().expect("binomial overflow")
}

pub fn big_pow(base: u64, exp: u64) -> BigUint {
    num_traits::pow(BigUint::from(base), exp as usize)
}

pub fn to_bigint(v: &BigUint) -> BigInt {
    BigInt::from(v.clone())
}

/// Exact `floor(sqrt(v))`.
pub fn isqrt(v: &BigUint) -> BigUint {
    v.sqrt()
}

/// Exact `floor(v^(1/r))`.
pub fn iroot(v: &BigUint, r: u32) -> BigUint {
    if r == 1 {
        v.clone()
    } else {
        v.nth_root(r)
    }
}

pub fn is_multiple(v: &BigUint, m: u64) -> bool {
    (v % m).is_zero()
}

pub fn rem_u64(v: &BigUint, m: u64) -> u64 {
    (v % m).to_u64().unwrap()
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}
